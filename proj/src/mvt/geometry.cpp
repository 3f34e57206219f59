#include "mvt/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mvt {

namespace {

Rational rational_pow(const Rational& base, int exp) {
    Rational r(1);
    const bool invert = exp < 0;
    for (int i = 0; i < std::abs(exp); ++i) r = r * base;
    if (invert) {
        require(r.num != 0, ErrorCode::invalid_argument, "zero base with negative exponent");
        return Rational(r.den, r.num);
    }
    return r;
}

i64 integer_sqrt(i64 v) {
    require(v >= 0, ErrorCode::invalid_argument, "negative square root");
    i64 r = i64(std::llround(std::sqrt(double(v))));
    while (r * r > v) --r;
    while ((r + 1) * (r + 1) <= v) ++r;
    return r;
}

Rational rational_sqrt(const Rational& v) {
    const i64 sn = integer_sqrt(v.num);
    const i64 sd = integer_sqrt(v.den);
    require(sn * sn == v.num && sd * sd == v.den, ErrorCode::invalid_argument,
            "center must be a perfect rational square for half-integer powers, got " + v.str());
    return Rational(sn, sd);
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char delim) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, delim)) out.push_back(trim(item));
    return out;
}

} // namespace

int Poly::degree() const {
    for (size_t i = coeffs.size(); i > 0; --i)
        if (coeffs[i - 1].num != 0) return int(i - 1);
    return 0;
}

Poly Poly::derivative() const {
    Poly d;
    for (size_t k = 1; k < coeffs.size(); ++k)
        d.coeffs.push_back(coeffs[k] * Rational(i64(k)));
    if (d.coeffs.empty()) d.coeffs.push_back(Rational(0));
    return d;
}

Poly Poly::derivative(int order) const {
    Poly d = *this;
    for (int i = 0; i < order; ++i) d = d.derivative();
    return d;
}

double Poly::eval(double t) const {
    double acc = 0.0;
    for (size_t i = coeffs.size(); i > 0; --i) acc = acc * t + coeffs[i - 1].to_double();
    return acc;
}

BigRat Poly::eval_exact(const BigRat& t) const {
    BigRat acc = 0;
    for (size_t i = coeffs.size(); i > 0; --i)
        acc = acc * t + BigRat(coeffs[i - 1].num, coeffs[i - 1].den);
    return acc;
}

void CurveSpec::validate() const {
    require(n >= 3, ErrorCode::invalid_argument, "curve dimension n must be >= 3");
    require(int(phis.size()) == n - 1, ErrorCode::invalid_argument,
            "curve wants n-1 polynomials, got " + std::to_string(phis.size()));
    for (const auto& p : phis)
        require(p.degree() >= 2, ErrorCode::invalid_argument,
                "curve polynomials must have degree >= 2");
    require(dom_lo >= 0.0 && dom_hi <= 1.0 && dom_lo < dom_hi, ErrorCode::invalid_argument,
            "curve domain must be a sub-interval of [0, 1]");
    require(int(sub_intervals.size()) == n - 1, ErrorCode::invalid_argument,
            "curve wants n-1 sub-intervals");
    for (size_t j = 0; j < sub_intervals.size(); ++j) {
        const auto& [lo, hi] = sub_intervals[j];
        require(lo < hi, ErrorCode::invalid_argument, "empty sub-interval");
        require(lo >= dom_lo && hi <= dom_hi, ErrorCode::invalid_argument,
                "sub-interval outside the domain");
        if (j > 0)
            require(sub_intervals[j - 1].second < lo, ErrorCode::invalid_argument,
                    "sub-intervals must be disjoint and ordered");
    }
}

namespace {

Eigen::MatrixXd wronskian_matrix(const CurveSpec& curve, int order, double t) {
    const int m = curve.n - 1;
    Eigen::MatrixXd M(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            M(i, j) = curve.phis[size_t(i)].derivative(order + j).eval(t);
    return M;
}

BigRat det_exact(std::vector<std::vector<BigRat>> m) {
    const size_t k = m.size();
    if (k == 1) return m[0][0];
    BigRat det = 0;
    int sign = 1;
    for (size_t c = 0; c < k; ++c) {
        std::vector<std::vector<BigRat>> minor(k - 1, std::vector<BigRat>(k - 1));
        for (size_t i = 1; i < k; ++i) {
            size_t col = 0;
            for (size_t j = 0; j < k; ++j) {
                if (j == c) continue;
                minor[i - 1][col++] = m[i][j];
            }
        }
        det += sign * m[0][c] * det_exact(minor);
        sign = -sign;
    }
    return det;
}

} // namespace

double wronskian(const CurveSpec& curve, int derivative_order, double t) {
    curve.validate();
    require(derivative_order >= 1 && derivative_order <= 3, ErrorCode::precondition,
            "derivative order must be 1, 2 or 3");
    require(t >= curve.dom_lo && t <= curve.dom_hi, ErrorCode::precondition,
            "t outside the curve domain");
    return wronskian_matrix(curve, derivative_order, t).determinant();
}

BigRat wronskian_exact(const CurveSpec& curve, int derivative_order, const Rational& t) {
    curve.validate();
    require(derivative_order >= 1 && derivative_order <= 3, ErrorCode::precondition,
            "derivative order must be 1, 2 or 3");
    const double td = t.to_double();
    require(td >= curve.dom_lo && td <= curve.dom_hi, ErrorCode::precondition,
            "t outside the curve domain");
    const int m = curve.n - 1;
    const BigRat tt(t.num, t.den);
    std::vector<std::vector<BigRat>> M(static_cast<size_t>(m), std::vector<BigRat>(static_cast<size_t>(m)));
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            M[size_t(i)][size_t(j)] =
                curve.phis[size_t(i)].derivative(derivative_order + j).eval_exact(tt);
    return det_exact(M);
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> build_D1_D2(const CurveSpec& curve,
                                                        const std::vector<double>& t) {
    curve.validate();
    const int m = curve.n - 1;
    require(int(t.size()) == m, ErrorCode::invalid_argument,
            "expected one evaluation point per sub-interval");
    for (int j = 0; j < m; ++j) {
        const auto& [lo, hi] = curve.sub_intervals[size_t(j)];
        require(t[size_t(j)] >= lo && t[size_t(j)] <= hi, ErrorCode::precondition,
                "t_" + std::to_string(j + 1) + " = " + std::to_string(t[size_t(j)]) +
                    " is not in its sub-interval");
    }
    Eigen::MatrixXd D1(m, m), D2(m, m);
    for (int i = 0; i < m; ++i) {
        const Poly d1 = curve.phis[size_t(i)].derivative();
        const Poly d2 = d1.derivative();
        for (int j = 0; j < m; ++j) {
            D1(i, j) = d1.eval(t[size_t(j)]);
            D2(i, j) = d2.eval(t[size_t(j)]);
        }
    }
    return {D1, D2};
}

namespace {

double scaled_det(const Eigen::MatrixXd& M) {
    double norm_prod = 1.0;
    for (int j = 0; j < M.cols(); ++j) {
        const double cn = M.col(j).norm();
        if (cn == 0.0) return 0.0;
        norm_prod *= cn;
    }
    return std::abs(M.determinant()) / norm_prod;
}

constexpr double kSingularD1 = 1e-12;

} // namespace

std::vector<double> sff_coefficients(const CurveSpec& curve, const std::vector<double>& t) {
    const auto [D1, D2] = build_D1_D2(curve, t);
    require(scaled_det(D1) > kSingularD1, ErrorCode::precondition,
            "singular D1 at the requested points");
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(D1);
    std::vector<double> v(size_t(curve.n - 1));
    for (int j = 0; j < curve.n - 1; ++j) {
        const Eigen::VectorXd y = lu.solve(D2.col(j));
        v[size_t(j)] = y.sum();
    }
    return v;
}

double QuadFitReport::max_rel_error() const {
    double m = 0.0;
    for (const double e : rel_error) m = std::max(m, e);
    return m;
}

nlohmann::json QuadFitReport::to_json() const {
    return {{"sff", sff},
            {"finite_difference", finite_difference},
            {"rel_error", rel_error},
            {"h", h}};
}

QuadFitReport quadratic_fit_check(const CurveSpec& curve, const std::vector<double>& t,
                                  double h) {
    require(h > 0, ErrorCode::invalid_argument, "step h must be positive");
    const auto [D1, D2] = build_D1_D2(curve, t);
    const int m = curve.n - 1;
    for (int j = 0; j < m; ++j) {
        const auto& [lo, hi] = curve.sub_intervals[size_t(j)];
        require(t[size_t(j)] - h >= lo && t[size_t(j)] + h <= hi, ErrorCode::precondition,
                "step too large: t_" + std::to_string(j + 1) + " +/- h leaves its sub-interval");
    }
    const std::vector<double> v = sff_coefficients(curve, t);
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(D1);

    std::vector<double> base(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i) {
        double acc = 0.0;
        for (int j = 0; j < m; ++j) acc += curve.phis[size_t(i)].eval(t[size_t(j)]);
        base[size_t(i)] = acc;
    }
    // x0' - <D1^{-1} x', xi> isolates the quadratic part of the surface graph
    auto graph_defect = [&](const std::vector<double>& s) {
        Eigen::VectorXd dx(m);
        for (int i = 0; i < m; ++i) {
            double acc = 0.0;
            for (int j = 0; j < m; ++j)
                acc += curve.phis[size_t(i)].eval(t[size_t(j)] + s[size_t(j)]);
            dx(i) = acc - base[size_t(i)];
        }
        double dx0 = 0.0;
        for (int j = 0; j < m; ++j) dx0 += s[size_t(j)];
        return dx0 - lu.solve(dx).sum();
    };

    QuadFitReport report;
    report.h = h;
    report.sff = v;
    for (int j = 0; j < m; ++j) {
        std::vector<double> plus(size_t(m), 0.0), minus(size_t(m), 0.0);
        plus[size_t(j)] = h;
        minus[size_t(j)] = -h;
        const double estimate = -(graph_defect(plus) + graph_defect(minus)) / (h * h);
        report.finite_difference.push_back(estimate);
        const double scale = std::max(std::abs(v[size_t(j)]), 1e-30);
        report.rel_error.push_back(std::abs(estimate - v[size_t(j)]) / scale);
    }
    return report;
}

nlohmann::json GeometryReport::to_json() const {
    return {{"min_abs_wronskian", min_abs_wronskian},
            {"min_abs_detD1", min_abs_detD1},
            {"min_abs_sff_coeffs", min_abs_sff_coeffs},
            {"min_scaled_wronskian", min_scaled_wronskian},
            {"min_scaled_detD1", min_scaled_detD1},
            {"min_scaled_sff", min_scaled_sff},
            {"grid", grid},
            {"threshold", threshold},
            {"degenerate", degenerate}};
}

GeometryReport nondegeneracy_scan(const CurveSpec& curve, int grid_per_axis, double threshold) {
    curve.validate();
    require(grid_per_axis >= 4, ErrorCode::precondition, "grid_per_axis must be >= 4");
    const int m = curve.n - 1;

    GeometryReport report;
    report.grid = grid_per_axis;
    report.threshold = threshold;
    report.min_abs_detD1 = std::numeric_limits<double>::infinity();
    report.min_scaled_detD1 = std::numeric_limits<double>::infinity();
    report.min_scaled_sff = std::numeric_limits<double>::infinity();
    report.min_abs_sff_coeffs.assign(size_t(m), std::numeric_limits<double>::infinity());

    std::vector<std::vector<double>> axes(static_cast<size_t>(m));
    for (int j = 0; j < m; ++j) {
        const auto& [lo, hi] = curve.sub_intervals[size_t(j)];
        for (int g = 0; g < grid_per_axis; ++g)
            axes[size_t(j)].push_back(lo + (hi - lo) * double(g) / double(grid_per_axis - 1));
    }

    std::vector<int> idx(static_cast<size_t>(m), 0);
    std::vector<double> t(static_cast<size_t>(m));
    for (;;) {
        for (int j = 0; j < m; ++j) t[size_t(j)] = axes[size_t(j)][size_t(idx[size_t(j)])];
        const auto [D1, D2] = build_D1_D2(curve, t);
        const double det = std::abs(D1.determinant());
        const double sdet = scaled_det(D1);
        report.min_abs_detD1 = std::min(report.min_abs_detD1, det);
        report.min_scaled_detD1 = std::min(report.min_scaled_detD1, sdet);
        if (sdet > kSingularD1) {
            const Eigen::PartialPivLU<Eigen::MatrixXd> lu(D1);
            for (int j = 0; j < m; ++j) {
                const Eigen::VectorXd y = lu.solve(D2.col(j));
                const double v = std::abs(y.sum());
                report.min_abs_sff_coeffs[size_t(j)] =
                    std::min(report.min_abs_sff_coeffs[size_t(j)], v);
                const double scale = std::max(y.norm() * std::sqrt(double(m)), 1e-300);
                report.min_scaled_sff = std::min(report.min_scaled_sff, v / scale);
            }
        } else {
            report.min_abs_sff_coeffs.assign(size_t(m), 0.0);
            report.min_scaled_sff = 0.0;
        }
        int d = 0;
        while (d < m && ++idx[size_t(d)] == grid_per_axis) idx[size_t(d++)] = 0;
        if (d == m) break;
    }

    // Wronskian of the second derivatives over the whole domain
    const int wgrid = std::max(grid_per_axis * 8, 128);
    report.min_abs_wronskian = std::numeric_limits<double>::infinity();
    report.min_scaled_wronskian = std::numeric_limits<double>::infinity();
    for (int g = 0; g < wgrid; ++g) {
        const double t1 =
            curve.dom_lo + (curve.dom_hi - curve.dom_lo) * double(g) / double(wgrid - 1);
        const Eigen::MatrixXd W = wronskian_matrix(curve, 2, t1);
        const double w = std::abs(W.determinant());
        double row_prod = 1.0;
        for (int i = 0; i < m; ++i) {
            const double rn = W.row(i).norm();
            row_prod = (rn == 0.0) ? 0.0 : row_prod * rn;
        }
        report.min_abs_wronskian = std::min(report.min_abs_wronskian, w);
        report.min_scaled_wronskian =
            std::min(report.min_scaled_wronskian, row_prod == 0.0 ? 0.0 : w / row_prod);
    }

    report.degenerate = report.min_scaled_wronskian < threshold ||
                        report.min_scaled_detD1 < threshold ||
                        report.min_scaled_sff < threshold;
    return report;
}

Poly taylor_power_poly(const Rational& power, const Rational& center, int degree) {
    require(degree >= 2, ErrorCode::invalid_argument, "truncation degree must be >= 2");
    require(power.den == 1 || power.den == 2, ErrorCode::invalid_argument,
            "taylor_power_poly supports integer and half-integer powers");
    require(center.num > 0, ErrorCode::invalid_argument, "center must be positive");
    // (center + t)^power = sum_k binom(power, k) center^{power - k} t^k
    const Rational root = power.den == 2 ? rational_sqrt(center) : center;
    Poly p;
    Rational binom(1);
    for (int k = 0; k <= degree; ++k) {
        if (k > 0) {
            binom = binom * (power - Rational(k - 1)) * Rational(1, k);
        }
        const int exp_units = int(power.num) - k * int(power.den);
        p.coeffs.push_back(binom * rational_pow(root, exp_units));
    }
    return p;
}

std::vector<std::pair<std::string, CurveSpec>> parse_curve_library(const std::string& text) {
    std::vector<std::pair<std::string, CurveSpec>> out;
    std::optional<std::string> name;
    CurveSpec current;
    auto flush = [&]() {
        if (!name) return;
        current.validate();
        out.emplace_back(*name, current);
        name.reset();
        current = CurveSpec{};
    };
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            require(line.back() == ']', ErrorCode::invalid_argument,
                    "malformed section header at line " + std::to_string(lineno));
            flush();
            std::string head = trim(line.substr(1, line.size() - 2));
            require(head.rfind("curve ", 0) == 0, ErrorCode::invalid_argument,
                    "section must be [curve <name>] at line " + std::to_string(lineno));
            name = trim(head.substr(6));
            current.phis.clear();
            current.sub_intervals.clear();
            continue;
        }
        require(name.has_value(), ErrorCode::invalid_argument,
                "curve data before any [curve] section at line " + std::to_string(lineno));
        const auto eq = line.find('=');
        require(eq != std::string::npos, ErrorCode::invalid_argument,
                "curve line " + std::to_string(lineno) + " is not key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "n") {
            current.n = std::stoi(value);
        } else if (key == "phi") {
            Poly p;
            for (const auto& c : split(value, ',')) p.coeffs.push_back(parse_rational(c));
            current.phis.push_back(std::move(p));
        } else if (key == "domain") {
            const auto parts = split(value, ',');
            require(parts.size() == 2, ErrorCode::invalid_argument, "domain wants 'lo, hi'");
            current.dom_lo = parse_rational(parts[0]).to_double();
            current.dom_hi = parse_rational(parts[1]).to_double();
        } else if (key == "interval") {
            const auto parts = split(value, ',');
            require(parts.size() == 2, ErrorCode::invalid_argument, "interval wants 'lo, hi'");
            current.sub_intervals.emplace_back(parse_rational(parts[0]).to_double(),
                                               parse_rational(parts[1]).to_double());
        } else {
            fail(ErrorCode::invalid_argument, "unknown curve key '" + key + "'");
        }
    }
    flush();
    require(!out.empty(), ErrorCode::invalid_argument, "curve library is empty");
    return out;
}

const std::string& default_curve_library() {
    static const std::string text = R"(# Sumset-surface curve library.
# phi lines are polynomial coefficients in ascending order (rationals allowed).

[curve ts-cubed]
n = 3
phi = 0, 0, 1
phi = 0, 0, 0, 1
domain = 1/2, 1
interval = 1/2, 7/10
interval = 3/4, 19/20

[curve t2-t4]
n = 3
phi = 0, 0, 1
phi = 0, 0, 0, 0, 1
domain = 1/2, 1
interval = 1/2, 7/10
interval = 3/4, 19/20

[curve quartic-triple]
n = 4
phi = 0, 0, 1
phi = 0, 0, 0, 1
phi = 0, 0, 0, 0, 1
domain = 1/2, 1
interval = 1/2, 3/5
interval = 13/20, 3/4
interval = 4/5, 9/10

[curve rs-taylor]
# degree-6 truncations of (9/16 + t)^{3/2} and (9/16 + t)^{1/2}
n = 3
phi = 27/64, 9/8, 1/2, -4/27, 8/81, -64/729, 1792/19683
phi = 3/4, 2/3, -8/27, 64/243, -640/2187, 7168/19683, -28672/59049
domain = 0, 1/4
interval = 1/32, 3/32
interval = 5/32, 7/32

[curve t2-t7]
n = 3
phi = 0, 0, 1
phi = 0, 0, 0, 0, 0, 0, 0, 1
domain = 1/2, 1
interval = 1/2, 7/10
interval = 3/4, 19/20

[curve degenerate-pair]
n = 3
phi = 0, 0, 1
phi = 0, 0, 2
domain = 1/2, 1
interval = 1/2, 7/10
interval = 3/4, 19/20
)";
    return text;
}

} // namespace mvt
