#include "doctest.h"

#include <cmath>

#include "mvt/presets.hpp"
#include "mvt/sums.hpp"

using namespace mvt;

namespace {

MomentSpec linear_square_spec(i64 N, int p) {
    return MomentSpec(N, p,
                      {{Rational(1), Rational(0), false}, {Rational(2), Rational(0), false}});
}

} // namespace

TEST_CASE("exp sum at x = 0 is the range size") {
    const MomentSpec spec = linear_square_spec(32, 4);
    const std::vector<double> x = {0.0, 0.0};
    const SumValue s = eval_exp_sum(spec, x);
    CHECK(s.real == doctest::Approx(double(spec.range.size())).epsilon(1e-14));
    CHECK(s.imag == doctest::Approx(0.0).scale(spec.range.size()));
    CHECK(s.n_terms == spec.range.size());
}

TEST_CASE("alternating cancellation at x = 1/2") {
    MomentSpec spec(16, 2, {{Rational(1), Rational(0), false}});
    const std::vector<double> x = {0.5};
    const SumValue s = eval_exp_sum(spec, x);  // sum of (-1)^n over (8, 16]
    CHECK(s.abs() == doctest::Approx(0.0).scale(16).epsilon(1e-12));
}

TEST_CASE("dual evaluation paths agree to 1e-9") {
    PresetConfig cfg = PresetConfig::make("n8");
    cfg.delta_exp = Rational(-1);
    const MomentSpec spec = build_preset_spec(cfg, 64);
    u64 state = 20240501;
    auto uni = [&]() {
        state = splitmix64(state);
        return double(state >> 11) * 0x1.0p-53;
    };
    for (int trial = 0; trial < 25; ++trial) {
        const std::vector<double> x = {uni(), uni(), uni()};
        const SumValue a = eval_exp_sum(spec, x);
        const SumValue b = eval_exp_sum_recurrence(spec, x);
        CHECK(std::hypot(a.real - b.real, a.imag - b.imag) <= 1e-9);
        CHECK(a.abs() <= double(spec.range.size()) + 1e-9);
    }
}

TEST_CASE("dimension mismatch is rejected") {
    const MomentSpec spec = linear_square_spec(16, 4);
    const std::vector<double> x = {0.1};
    CHECK_THROWS_AS(eval_exp_sum(spec, x), Error);
}

TEST_CASE("monte carlo second moment recovers orthogonality") {
    // exact value of the p = 2 moment is the range size
    const MomentSpec spec = linear_square_spec(16, 2);
    for (u64 seed : {1u, 2u, 3u}) {
        const MCEstimate est = mc_moment(spec, 20000, seed);
        CHECK(std::abs(est.mean - 8.0) <= 4.0 * est.stderr_);
    }
}

TEST_CASE("monte carlo fourth moment matches the exact count") {
    const MomentSpec spec = linear_square_spec(16, 4);
    for (u64 seed : {1u, 2u, 3u}) {
        const MCEstimate est = mc_moment(spec, 20000, seed);
        CHECK(std::abs(est.mean - 120.0) <= 4.0 * est.stderr_);
    }
}

TEST_CASE("stderr shrinks like the square root of the sample count") {
    const MomentSpec spec = linear_square_spec(16, 4);
    const MCEstimate small = mc_moment(spec, 10000, 5);
    const MCEstimate big = mc_moment(spec, 100000, 5);
    const double shrink = small.stderr_ / big.stderr_;
    CHECK(shrink > 2.5);
    CHECK(shrink < 4.0);
}

TEST_CASE("monte carlo is deterministic and thread-count independent") {
    const MomentSpec spec = linear_square_spec(16, 4);
    const MCEstimate a = mc_moment(spec, 12000, 42, 1);
    const MCEstimate b = mc_moment(spec, 12000, 42, 4);
    CHECK(a.mean == b.mean);
    CHECK(a.stderr_ == b.stderr_);
    CHECK_THROWS_AS(mc_moment(spec, 500, 1), Error);  // samples >= 1000
}

TEST_CASE("weyl sum identities") {
    // q = 1: every phase is integral
    CHECK(weyl_sum(0, 1, 1024).abs() == doctest::Approx(1024.0).epsilon(1e-12));
    // a/q = 1/2, k = 8: parity cancellation over an even count
    CHECK(weyl_sum(1, 2, 10).abs() == doctest::Approx(0.0).scale(10).epsilon(1e-12));
    CHECK_THROWS_AS(weyl_sum(2, 4, 16), Error);  // gcd violation
    // |f| <= N always, = N at a = 0
    CHECK(weyl_sum(1, 997, 256).abs() <= 256.0 + 1e-9);
}

TEST_CASE("weyl bound near q ~ N^4") {
    const Rational sigma = weyl_sigma_preset("improved");
    CHECK(sigma == Rational(7, 480));
    CHECK(weyl_sigma_preset("bi") == Rational(3, 256));
    CHECK(weyl_sigma_preset("wooley") == Rational(1, 84));
    const i64 N = 1024;
    for (i64 q : {i64(1) << 38, (i64(1) << 39) + 7, i64(1) << 40}) {
        const double ratio = weyl_sum(1, q, N).abs() / weyl_bound_rhs(1, q, N, sigma);
        CHECK(ratio < 1.0);
    }
}

TEST_CASE("vdc: zero phase gives the block-size identity with a degenerate flag") {
    // constant phase: partition sum = J * D^2 = (N/2D) D^2
    const VdcResult r = vdc_partition_sum({Rational(0), Rational(0), false}, 64, 4096);
    CHECK(r.degenerate_phase);
    CHECK(r.partition_sum == doctest::Approx(2048.0 / 64.0 * 64.0 * 64.0));
    CHECK(r.bound_a == doctest::Approx(4096.0));
}

TEST_CASE("vdc: a single block reproduces the full squared sum") {
    const PhaseTerm phase{Rational(3, 2), Rational(1), true};
    const VdcResult r = vdc_partition_sum(phase, 2048, 4096);
    CHECK(r.intervals == 1);
    CHECK(r.partition_sum == doctest::Approx(r.full_sum_sq).epsilon(1e-12));
}

TEST_CASE("vdc: curvature bound holds with a factor-10 audit") {
    // f = N (n/N)^{3/2}, D = sqrt(N), N = 2^12
    const PhaseTerm phase{Rational(3, 2), Rational(1), true};
    const VdcResult r = vdc_partition_sum(phase, 64, 4096);
    CHECK_FALSE(r.degenerate_phase);
    CHECK(r.lambda3 > 0);
    CHECK(r.partition_sum <= 10.0 * r.bound_a);
}

TEST_CASE("vdc: Cauchy-Schwarz floor") {
    const PhaseTerm phase{Rational(3, 2), Rational(1), true};
    for (i64 D : {16, 64, 256}) {
        const VdcResult r = vdc_partition_sum(phase, D, 2048);
        CHECK(r.partition_sum >= r.full_sum_sq / double(r.intervals) - 1e-6);
    }
    CHECK_THROWS_AS(vdc_partition_sum(phase, 4096, 4096), Error);  // D beyond the range
}

TEST_CASE("vdc reports the secondary bound only past its validity threshold") {
    const PhaseTerm phase{Rational(3, 2), Rational(1), true};
    const VdcResult tiny = vdc_partition_sum(phase, 2, 4096);
    const VdcResult big = vdc_partition_sum(phase, 512, 4096);
    CHECK_FALSE(tiny.bound_b.has_value());  // D <= lambda3^{-1/3}
    CHECK(big.bound_b.has_value());
}
