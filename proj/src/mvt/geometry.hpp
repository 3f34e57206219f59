#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_int.hpp>

#include "json.hpp"

#include "mvt/rational.hpp"

namespace mvt {

using BigRat = boost::multiprecision::cpp_rational;

/// Polynomial with exact rational coefficients, ascending order.
struct Poly {
    std::vector<Rational> coeffs;

    int degree() const;
    Poly derivative() const;
    Poly derivative(int order) const;
    double eval(double t) const;
    BigRat eval_exact(const BigRat& t) const;
};

/// A curve t -> (t, phi_1(t), ..., phi_{n-1}(t)) with the n-1 disjoint
/// parameter sub-intervals that feed the sumset construction.
struct CurveSpec {
    int n = 3;
    std::vector<Poly> phis;
    double dom_lo = 0.0;
    double dom_hi = 1.0;
    std::vector<std::pair<double, double>> sub_intervals;

    void validate() const;
};

/// Determinant of the matrix whose (i, j) entry is phi_i^{(order + j)}; the
/// classical Wronskian of the order-th derivatives.  Derivatives are taken
/// exactly on coefficients, only the final evaluation is floating point.
double wronskian(const CurveSpec& curve, int derivative_order, double t);

/// Same quantity in exact rational arithmetic; the oracle for the double path.
BigRat wronskian_exact(const CurveSpec& curve, int derivative_order, const Rational& t);

/// D1[i][j] = phi_i'(t_j), D2[i][j] = phi_i''(t_j), with t_j required to lie
/// in the j-th sub-interval.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> build_D1_D2(const CurveSpec& curve,
                                                        const std::vector<double>& t);

/// The diagonal curvature coefficients <D1^{-1} D2 e_j, (1,...,1)> of the
/// sumset hypersurface; all non-zero means non-degenerate (possibly
/// indefinite) second fundamental form.
std::vector<double> sff_coefficients(const CurveSpec& curve, const std::vector<double>& t);

struct QuadFitReport {
    std::vector<double> sff;
    std::vector<double> finite_difference;
    std::vector<double> rel_error;
    double h = 0.0;

    double max_rel_error() const;
    nlohmann::json to_json() const;
};

/// Samples the sumset surface at perturbed parameters and checks the
/// second-order coefficients of x_0 as a function of the tangential
/// coordinates against sff_coefficients; the finite-difference error is O(h).
QuadFitReport quadratic_fit_check(const CurveSpec& curve, const std::vector<double>& t,
                                  double h);

struct GeometryReport {
    double min_abs_wronskian = 0.0;
    double min_abs_detD1 = 0.0;
    std::vector<double> min_abs_sff_coeffs;
    double min_scaled_wronskian = 0.0;
    double min_scaled_detD1 = 0.0;
    double min_scaled_sff = 0.0;
    int grid = 0;
    double threshold = 0.0;
    bool degenerate = false;

    nlohmann::json to_json() const;
};

/// Scan t over a grid of the sub-interval product, recording minima of
/// |det D1| and the curvature coefficients, plus the minimum |Wronskian| of
/// the second derivatives over the whole domain.  The degenerate flag fires
/// on scale-normalized minima so it is invariant under row scaling.
GeometryReport nondegeneracy_scan(const CurveSpec& curve, int grid_per_axis,
                                  double threshold = 1e-9);

/// Taylor truncation of (center + t)^power up to the given degree, exact
/// coefficients (center must be a perfect square of a rational for
/// half-integer powers).
Poly taylor_power_poly(const Rational& power, const Rational& center, int degree);

/// Named curve library, declarative text format (see README).
std::vector<std::pair<std::string, CurveSpec>> parse_curve_library(const std::string& text);

/// The curve library shipped with the tool; same content as data/curves.txt.
const std::string& default_curve_library();

} // namespace mvt
