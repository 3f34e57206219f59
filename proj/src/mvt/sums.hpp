#pragma once

#include <optional>
#include <span>
#include <vector>

#include "json.hpp"

#include "mvt/systems.hpp"

namespace mvt {

struct SumValue {
    double real = 0.0;
    double imag = 0.0;
    i64 n_terms = 0;

    double abs() const { return std::hypot(real, imag); }
};

/// S(x) = sum over the spec's range of e(sum_j c_j(n) x_j), with per-term
/// argument reduction mod 1 in extended precision before the trig call.
SumValue eval_exp_sum(const MomentSpec& spec, std::span<const double> x);

/// Independent evaluation path: integer-power phases advance through a
/// finite-difference table (one complex multiply per step), fractional
/// powers are evaluated directly.  Used to cross-check eval_exp_sum.
SumValue eval_exp_sum_recurrence(const MomentSpec& spec, std::span<const double> x);

struct MCEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
    i64 samples = 0;
    u64 seed = 0;

    nlohmann::json to_json() const {
        return {{"mean", mean}, {"stderr", stderr_}, {"samples", samples}, {"seed", seed}};
    }
};

/// Monte Carlo estimate of the moment integral over the unit cube.
/// Sampling is chunked by sample index with per-chunk derived seeds, so the
/// estimate depends only on (seed, samples), not on the worker count.
MCEstimate mc_moment(const MomentSpec& spec, i64 samples, u64 seed, int threads = 0);

/// f_k(a/q; N) = sum_{1<=n<=N} e((a/q) n^k), phases reduced exactly in
/// modular arithmetic (n^k mod q), so nothing is lost to rounding even when
/// n^k overflows a double's mantissa.
SumValue weyl_sum(i64 a, i64 q, i64 N, int k = 8);

/// N^{1-sigma} (N^4/q + 1 + q/N^4)^{1/160}.
double weyl_bound_rhs(i64 a, i64 q, i64 N, const Rational& sigma);

/// sigma presets for the Weyl bound comparison.
Rational weyl_sigma_preset(const std::string& name);

struct VdcResult {
    double partition_sum = 0.0;   // sum_j |sum_{n in V_j} e(f(n))|^2
    double full_sum_sq = 0.0;     // |sum over the whole range|^2
    double lambda3 = 0.0;         // max |f'''| on the range
    double bound_a = 0.0;         // N + sqrt(D/lambda3) + D^{3/2} sqrt(lambda3) N
    std::optional<double> bound_b;  // N D lambda3^{1/3} + D lambda3^{-1/3}, when D > lambda3^{-1/3}
    i64 intervals = 0;
    i64 block_size = 0;
    bool degenerate_phase = false;  // f''' vanishes identically
    bool sign_warning = false;      // f''' changes sign on the range

    nlohmann::json to_json() const;
};

/// Partition the dyadic range into blocks of size D and measure the summed
/// squared block sums of e(f(n)) for a single-phase f, against the two van
/// der Corput style bounds.
VdcResult vdc_partition_sum(const PhaseTerm& phase, i64 D, i64 N);

} // namespace mvt
