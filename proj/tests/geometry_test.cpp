#include "doctest.h"

#include <cmath>

#include "mvt/geometry.hpp"

using namespace mvt;

namespace {

Poly poly(std::vector<Rational> coeffs) { return Poly{std::move(coeffs)}; }

CurveSpec ts_cubed() {
    CurveSpec c;
    c.n = 3;
    c.phis = {poly({Rational(0), Rational(0), Rational(1)}),
              poly({Rational(0), Rational(0), Rational(0), Rational(1)})};
    c.dom_lo = 0.5;
    c.dom_hi = 1.0;
    c.sub_intervals = {{0.5, 0.7}, {0.75, 0.95}};
    return c;
}

CurveSpec dependent_pair() {
    CurveSpec c = ts_cubed();
    c.phis[1] = poly({Rational(0), Rational(0), Rational(2)});  // 2 t^2
    return c;
}

CurveSpec quartic_triple() {
    CurveSpec c;
    c.n = 4;
    c.phis = {poly({Rational(0), Rational(0), Rational(1)}),
              poly({Rational(0), Rational(0), Rational(0), Rational(1)}),
              poly({Rational(0), Rational(0), Rational(0), Rational(0), Rational(1)})};
    c.dom_lo = 0.5;
    c.dom_hi = 1.0;
    c.sub_intervals = {{0.5, 0.6}, {0.65, 0.75}, {0.8, 0.9}};
    return c;
}

} // namespace

TEST_CASE("polynomial derivatives are exact on coefficients") {
    const Poly p = poly({Rational(1), Rational(-2), Rational(3), Rational(5)});  // 1-2t+3t^2+5t^3
    const Poly d = p.derivative();
    CHECK(d.coeffs == std::vector<Rational>{Rational(-2), Rational(6), Rational(15)});
    CHECK(p.eval(0.5) == doctest::Approx(1 - 1 + 0.75 + 0.625));
    // central differences converge at order h^2
    const double t = 0.3;
    auto fd = [&](double h) { return (p.eval(t + h) - p.eval(t - h)) / (2 * h); };
    const double e1 = std::abs(fd(1e-3) - d.eval(t));
    const double e2 = std::abs(fd(5e-4) - d.eval(t));
    CHECK(e2 < e1 / 2.5);  // halving h cuts the error ~4x
}

TEST_CASE("wronskian of the canonical pair is constant 12") {
    const CurveSpec c = ts_cubed();
    for (double t : {0.5, 0.6, 0.75, 1.0}) CHECK(wronskian(c, 2, t) == doctest::Approx(12.0));
    CHECK_THROWS_AS(wronskian(c, 2, 0.1), Error);  // outside the domain
    CHECK_THROWS_AS(wronskian(c, 4, 0.6), Error);  // unsupported order
}

TEST_CASE("dependent polynomials have an identically zero wronskian") {
    const CurveSpec c = dependent_pair();
    for (double t : {0.5, 0.7, 0.9}) CHECK(wronskian(c, 2, t) == doctest::Approx(0.0));
}

TEST_CASE("exact and double wronskians agree to 1e-12") {
    const CurveSpec c = quartic_triple();
    for (const Rational t : {Rational(1, 2), Rational(5, 8), Rational(3, 4)}) {
        const double dv = wronskian(c, 2, t.to_double());
        const double ev = wronskian_exact(c, 2, t).convert_to<double>();
        CHECK(std::abs(dv - ev) <= 1e-12 * std::max(1.0, std::abs(ev)));
    }
    // the n=4 curve at t = 1/2: lower-triangular structure gives det 288
    CHECK(wronskian_exact(quartic_triple(), 2, Rational(1, 2)).convert_to<double>() ==
          doctest::Approx(288.0));
}

TEST_CASE("D1 and D2 closed forms for the canonical pair") {
    const CurveSpec c = ts_cubed();
    const double a = 0.6, b = 0.8;
    const auto [D1, D2] = build_D1_D2(c, {a, b});
    CHECK(D1(0, 0) == doctest::Approx(2 * a));
    CHECK(D1(0, 1) == doctest::Approx(2 * b));
    CHECK(D1(1, 0) == doctest::Approx(3 * a * a));
    CHECK(D1(1, 1) == doctest::Approx(3 * b * b));
    CHECK(D1.determinant() == doctest::Approx(6 * a * b * (b - a)));
    CHECK(D2(0, 0) == doctest::Approx(2.0));
    CHECK(D2(0, 1) == doctest::Approx(2.0));
    CHECK(D2(1, 0) == doctest::Approx(6 * a));
    CHECK(D2(1, 1) == doctest::Approx(6 * b));
    // equal evaluation points violate the disjoint sub-interval membership
    CHECK_THROWS_AS(build_D1_D2(c, {0.6, 0.6}), Error);
}

TEST_CASE("sff coefficients are non-zero on the canonical pair, singular when dependent") {
    const CurveSpec c = ts_cubed();
    const std::vector<double> v = sff_coefficients(c, {0.6, 0.8});
    REQUIRE(v.size() == 2);
    CHECK(std::abs(v[0]) > 1e-6);
    CHECK(std::abs(v[1]) > 1e-6);
    CHECK_THROWS_AS(sff_coefficients(dependent_pair(), {0.6, 0.8}), Error);
}

TEST_CASE("quadratic fit: finite differences match the curvature coefficients") {
    const CurveSpec c = ts_cubed();
    const QuadFitReport rep = quadratic_fit_check(c, {0.6, 0.85}, 1e-4);
    CHECK(rep.max_rel_error() < 1e-4);
    // first-order convergence: shrinking h by 10 shrinks the error ~10x
    const QuadFitReport coarse = quadratic_fit_check(c, {0.6, 0.85}, 1e-3);
    const double ratio = coarse.max_rel_error() / rep.max_rel_error();
    CHECK(ratio > 3.0);
    CHECK(ratio < 40.0);
    // a step that escapes its sub-interval is rejected
    CHECK_THROWS_AS(quadratic_fit_check(c, {0.6, 0.85}, 0.2), Error);
}

TEST_CASE("zero perturbation reproduces the base surface point") {
    const CurveSpec c = ts_cubed();
    const std::vector<double> t = {0.6, 0.85};
    // x(t + 0) - x(t) must vanish identically in every coordinate
    double x0 = 0.0, x1 = 0.0, x2 = 0.0;
    for (const double tj : t) {
        x0 += tj;
        x1 += c.phis[0].eval(tj);
        x2 += c.phis[1].eval(tj);
    }
    double y0 = 0.0, y1 = 0.0, y2 = 0.0;
    for (const double tj : t) {
        y0 += tj;
        y1 += c.phis[0].eval(tj);
        y2 += c.phis[1].eval(tj);
    }
    CHECK(x0 == y0);
    CHECK(x1 == y1);
    CHECK(x2 == y2);
}

TEST_CASE("nondegeneracy scan classifies the library correctly") {
    const auto lib = parse_curve_library(default_curve_library());
    REQUIRE(lib.size() >= 5);
    int degenerate_count = 0;
    for (const auto& [name, curve] : lib) {
        const GeometryReport rep = nondegeneracy_scan(curve, 8);
        if (name == "degenerate-pair") {
            CHECK(rep.degenerate);
            CHECK(rep.min_abs_wronskian == doctest::Approx(0.0));
            ++degenerate_count;
        } else {
            CAPTURE(name);
            CHECK_FALSE(rep.degenerate);
            CHECK(rep.min_abs_wronskian > 1e-6);
        }
    }
    CHECK(degenerate_count == 1);
    CHECK_THROWS_AS(nondegeneracy_scan(ts_cubed(), 3), Error);  // grid too coarse
}

TEST_CASE("row scaling moves the wronskian but never the degenerate flag") {
    CurveSpec scaled = ts_cubed();
    for (auto& coef : scaled.phis[0].coeffs) coef = coef * Rational(7);
    const GeometryReport base = nondegeneracy_scan(ts_cubed(), 6);
    const GeometryReport big = nondegeneracy_scan(scaled, 6);
    CHECK(big.min_abs_wronskian == doctest::Approx(7.0 * base.min_abs_wronskian));
    CHECK(big.degenerate == base.degenerate);
}

TEST_CASE("taylor truncation builder matches the shipped library coefficients") {
    const Poly p32 = taylor_power_poly(Rational(3, 2), Rational(9, 16), 6);
    const std::vector<Rational> want32 = {Rational(27, 64),  Rational(9, 8),
                                          Rational(1, 2),    Rational(-4, 27),
                                          Rational(8, 81),   Rational(-64, 729),
                                          Rational(1792, 19683)};
    CHECK(p32.coeffs == want32);
    const Poly p12 = taylor_power_poly(Rational(1, 2), Rational(9, 16), 6);
    const std::vector<Rational> want12 = {Rational(3, 4),       Rational(2, 3),
                                          Rational(-8, 27),     Rational(64, 243),
                                          Rational(-640, 2187), Rational(7168, 19683),
                                          Rational(-28672, 59049)};
    CHECK(p12.coeffs == want12);
    // the truncations really do approximate the fractional powers
    const double t = 0.1;
    CHECK(p32.eval(t) == doctest::Approx(std::pow(9.0 / 16.0 + t, 1.5)).epsilon(1e-6));
    CHECK(p12.eval(t) == doctest::Approx(std::pow(9.0 / 16.0 + t, 0.5)).epsilon(1e-6));
    // half-integer powers need a perfect-square center
    CHECK_THROWS_AS(taylor_power_poly(Rational(3, 2), Rational(1, 3), 6), Error);
}

TEST_CASE("curve library parser rejects malformed input") {
    CHECK_THROWS_AS(parse_curve_library(""), Error);
    CHECK_THROWS_AS(parse_curve_library("[curve x]\nn = 3\n"), Error);  // missing phis
    CHECK_THROWS_AS(parse_curve_library("n = 3\n"), Error);             // data before section
}
