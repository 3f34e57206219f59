#include "doctest.h"

#include <cmath>

#include "mvt/explab.hpp"

using namespace mvt;

namespace {

std::vector<LadderPoint> synthetic_points(const std::vector<i64>& ns,
                                          const std::function<double(double)>& f) {
    std::vector<LadderPoint> pts;
    for (const i64 n : ns) {
        LadderPoint p;
        p.N = n;
        p.count = u128(std::llround(f(double(n))));
        pts.push_back(p);
    }
    return pts;
}

} // namespace

TEST_CASE("fit recovers pure power laws") {
    const auto quad = synthetic_points({16, 32, 64, 128}, [](double n) { return n * n; });
    const FitResult f2 = fit_exponent(quad);
    CHECK(f2.slope == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(f2.max_residual < 1e-9);

    const auto cubic =
        synthetic_points({16, 32, 64, 128}, [](double n) { return 5.0 * n * n * n; });
    const FitResult f3 = fit_exponent(cubic);
    CHECK(f3.slope == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(f3.intercept == doctest::Approx(std::log2(5.0)).epsilon(1e-6));
}

TEST_CASE("fit tolerates bounded jitter") {
    int flip = 0;
    const auto jittered = synthetic_points({16, 32, 64, 128, 256}, [&](double n) {
        const double sign = (flip++ % 2 == 0) ? 1.0 : -1.0;
        return n * n * n * (1.0 + sign * 0.1);
    });
    const FitResult fit = fit_exponent(jittered);
    CHECK(fit.slope > 2.8);
    CHECK(fit.slope < 3.2);
}

TEST_CASE("fit preconditions") {
    auto two = synthetic_points({16, 32}, [](double n) { return n; });
    CHECK_THROWS_AS(fit_exponent(two), Error);
    auto dup = synthetic_points({16, 32, 32}, [](double n) { return n; });
    CHECK_THROWS_AS(fit_exponent(dup), Error);
    auto zero = synthetic_points({16, 32, 64}, [](double) { return 0.0; });
    CHECK_THROWS_AS(fit_exponent(zero), Error);
}

TEST_CASE("check_bound verdicts") {
    const auto mk = [](double slope, double resid) {
        FitResult f;
        f.slope = slope;
        f.max_residual = resid;
        return f;
    };
    CHECK(check_bound(mk(4.1, 0.02), Rational(4)).verdict == Verdict::consistent);
    CHECK(check_bound(mk(5.6, 0.02), Rational(17, 3)).verdict == Verdict::consistent);
    CHECK(check_bound(mk(6.5, 0.01), Rational(5)).verdict == Verdict::violated);
    // a noisy fit above the band is only inconclusive
    CHECK(check_bound(mk(6.5, 0.5), Rational(5)).verdict == Verdict::inconclusive);
    // far below the band: cannot confirm
    CHECK(check_bound(mk(2.0, 0.01), Rational(5)).verdict == Verdict::inconclusive);
}

TEST_CASE("widening the band never flips consistent to violated") {
    FitResult f;
    f.slope = 5.2;
    f.max_residual = 0.01;
    Verdict prev = Verdict::violated;
    for (double high : {0.05, 0.1, 0.2, 0.35, 0.6, 1.0}) {
        const Verdict v = check_bound(f, Rational(5), 1.0, high).verdict;
        if (prev == Verdict::consistent) CHECK(v == Verdict::consistent);
        prev = v;
    }
}

TEST_CASE("run_ladder on the exact pair family has slope 2") {
    LadderTemplate tmpl;
    tmpl.name = "exact-pairs";
    tmpl.build = [](i64 N) {
        WindowSystem sys;
        sys.N = N;
        sys.groups = {{Interval::dyadic(N), 2, Side::left},
                      {Interval::dyadic(N), 2, Side::right}};
        sys.exact_forms = {1, 2};
        return sys;
    };
    const LadderRun run = run_ladder(tmpl, {32, 64, 128, 256});
    CHECK(run.fit.slope == doctest::Approx(2.0).epsilon(0.025));
    CHECK_FALSE(run.capacity_error.has_value());
    // counts follow 2R^2 - R exactly
    for (const auto& p : run.fit.points) {
        const i64 R = Interval::dyadic(p.N).size();
        CHECK(p.count == u128(2 * R * R - R));
    }
}

TEST_CASE("run_ladder keeps completed rungs on a capacity error") {
    LadderTemplate tmpl;
    tmpl.name = "budgeted";
    tmpl.build = [](i64 N) {
        WindowSystem sys;
        sys.N = N;
        sys.groups = {{Interval::dyadic(N), 2, Side::left},
                      {Interval::dyadic(N), 2, Side::right}};
        sys.exact_forms = {1, 2};
        return sys;
    };
    CountOptions opts;
    opts.budget_bytes = 100 * 1024;
    const LadderRun run = run_ladder(tmpl, {32, 48, 64, 96, 128}, opts);
    CHECK(run.capacity_error.has_value());
    CHECK(run.fit.points.size() >= 3);
    CHECK(run.fit.points.size() < 5);

    opts.budget_bytes = 1024;  // nothing fits: fewer than 3 rungs is an error
    CHECK_THROWS_AS(run_ladder(tmpl, {32, 48, 64}, opts), Error);
}

TEST_CASE("ladder preconditions") {
    LadderTemplate tmpl = LadderTemplate::from_preset(PresetConfig::make("i6"));
    CHECK_THROWS_AS(run_ladder(tmpl, {32, 32, 64}), Error);  // not strictly increasing
    CHECK_THROWS_AS(run_ladder(tmpl, {32, 64}), Error);      // too short
}

TEST_CASE("preset claimed exponents") {
    CHECK(*claimed_exponent(PresetConfig::make("n8")) == Rational(4));  // N^4 dominates
    PresetConfig n8 = PresetConfig::make("n8");
    n8.delta_exp = Rational(-1, 2);
    CHECK(*claimed_exponent(n8) == Rational(9, 2));  // delta N^5 dominates
    CHECK(*claimed_exponent(PresetConfig::make("n10")) == Rational(5));
    PresetConfig n10 = PresetConfig::make("n10");
    n10.delta_exp = Rational(-6, 5);
    CHECK(*claimed_exponent(n10) == Rational(29, 5));
    CHECK(*claimed_exponent(PresetConfig::make("i6")) == Rational(3));
    CHECK(*claimed_exponent(PresetConfig::make("i8")) == Rational(13, 3));
    CHECK(*claimed_exponent(PresetConfig::make("i10")) == Rational(17, 3));
    CHECK_FALSE(claimed_exponent(PresetConfig::make("n12")).has_value());
}

TEST_CASE("interchange check: canonical parameters stay under the audit constant") {
    const i64 N = 32;
    const double delta = std::pow(double(N), -1.8);
    const double Delta = 0.5 * delta * double(N);
    const InterchangeReport rep = interchange_check(N, delta, Delta, 2.0, 1.0);
    CHECK(rep.ratio <= 10.0);
    CHECK_FALSE(rep.flagged);
    CHECK(rep.count_base > 0);
    CHECK(rep.count_rescaled >= rep.count_base);  // tolerance monotonicity
}

TEST_CASE("interchange hypothesis violations name the failed inequality") {
    const i64 N = 32;
    const double delta = std::pow(double(N), -1.8);
    const double Delta = 0.5 * delta * double(N);
    // T below 2
    CHECK_THROWS_AS(interchange_check(N, delta, Delta, 1.5, 1.0), Error);
    // delta exactly on the 1/N boundary (strict inequality)
    CHECK_THROWS_AS(interchange_check(N, 1.0 / double(N), Delta, 2.0, 1.0), Error);
    // delta below the 1/N^2 boundary
    CHECK_THROWS_AS(interchange_check(N, std::pow(double(N), -2.2), Delta, 2.0, 1.0), Error);
    // T beyond (delta N)^{-1/2}
    CHECK_THROWS_AS(interchange_check(N, delta, Delta, 50.0, 1.0), Error);
    try {
        interchange_check(N, delta, Delta, 1.5, 1.0);
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("T >= 2") != std::string::npos);
    }
}

TEST_CASE("lower bound construction at the canonical parameters") {
    const i64 N = 64;
    const double delta = std::pow(double(N), -1.5);
    const double Delta = 1.0 / double(N);
    const LowerBoundReport rep = lower_bound_check(N, delta, Delta);
    CHECK(rep.M == 23);  // round(Delta^{1/4} N)
    CHECK(rep.lower_holds);
    CHECK(rep.upper_holds);
    CHECK(rep.scaled_count >= rep.lower_rhs);
    CHECK(rep.restricted_count == u128(7699846024ULL));  // pinned by the brute oracle
}

TEST_CASE("lower bound rejects windows that do not fit") {
    // Delta^{1/4} N below 4
    CHECK_THROWS_AS(lower_bound_check(64, 1e-9, 1e-8), Error);
    // delta > Delta violates the construction's ordering
    CHECK_THROWS_AS(lower_bound_check(64, 0.5, 0.25), Error);
    // window length beyond the dyadic range
    CHECK_THROWS_AS(lower_bound_check(16, 0.5, 1.0), Error);
}

TEST_CASE("diagonal-dominated families never fit below s - 0.2") {
    LadderTemplate tmpl;
    tmpl.name = "diag-floor";
    tmpl.build = [](i64 N) {
        WindowSystem sys;
        sys.N = N;
        sys.groups = {{Interval::dyadic(N), 2, Side::left},
                      {Interval::dyadic(N), 2, Side::right}};
        sys.exact_forms = {1, 2};
        return sys;
    };
    const LadderRun run = run_ladder(tmpl, {32, 64, 128});
    CHECK(run.fit.slope >= 2.0 - 0.2);
}
