#include "mvt/sums.hpp"

#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

namespace mvt {

namespace {

constexpr long double kTwoPi = 6.283185307179586476925286766559L;

long double reduce_mod1(long double t) {
    t = std::fmod(t, 1.0L);
    if (t < 0) t += 1.0L;
    return t;
}

/// Coefficient c(n) = N^e * g(n) of one phase term, in extended precision.
long double term_coefficient(const PhaseTerm& t, i64 n, i64 N) {
    const long double amp = std::pow((long double)N, (long double)t.amplitude_exponent.to_double());
    const long double base = t.normalized ? (long double)n / (long double)N : (long double)n;
    return amp * std::pow(base, (long double)t.power.to_double());
}

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : int(hw);
}

} // namespace

SumValue eval_exp_sum(const MomentSpec& spec, std::span<const double> x) {
    spec.validate();
    require(x.size() == spec.terms.size(), ErrorCode::invalid_argument,
            "x dimension must match the number of phase terms");
    for (const double v : x)
        require(std::isfinite(v), ErrorCode::invalid_argument, "non-finite phase variable");

    double re = 0.0, im = 0.0;
    for (i64 n = spec.range.lo; n <= spec.range.hi; ++n) {
        long double arg = 0.0L;
        for (size_t j = 0; j < spec.terms.size(); ++j) {
            const long double c = term_coefficient(spec.terms[j], n, spec.N);
            arg += reduce_mod1(c * (long double)x[j]);
        }
        arg = reduce_mod1(arg);
        re += double(std::cos(kTwoPi * arg));
        im += double(std::sin(kTwoPi * arg));
    }
    return {re, im, spec.range.size()};
}

SumValue eval_exp_sum_recurrence(const MomentSpec& spec, std::span<const double> x) {
    spec.validate();
    require(x.size() == spec.terms.size(), ErrorCode::invalid_argument,
            "x dimension must match the number of phase terms");

    // Split terms into polynomial phases (advanced by difference tables) and
    // fractional-power phases (evaluated directly).
    struct PolyPhase {
        std::vector<long double> diff;  // diff[i] = Delta^i p at the cursor
    };
    std::vector<PolyPhase> polys;
    std::vector<size_t> frac_terms;
    const i64 n0 = spec.range.lo;
    for (size_t j = 0; j < spec.terms.size(); ++j) {
        const PhaseTerm& t = spec.terms[j];
        if (!t.power.is_integer()) {
            frac_terms.push_back(j);
            continue;
        }
        const int k = int(t.power.num);
        auto p_at = [&](i64 n) {
            return reduce_mod1(term_coefficient(t, n, spec.N) * (long double)x[j]);
        };
        PolyPhase pp;
        pp.diff.resize(size_t(k) + 1, 0.0L);
        // Delta^i p(n0) by the alternating binomial sum over p(n0..n0+i)
        for (int i = 0; i <= k; ++i) {
            long double acc = 0.0L;
            long double binom = 1.0L;
            for (int tt = 0; tt <= i; ++tt) {
                const long double sign = ((i - tt) % 2 == 0) ? 1.0L : -1.0L;
                acc += sign * binom * p_at(n0 + tt);
                binom = binom * (long double)(i - tt) / (long double)(tt + 1);
            }
            pp.diff[size_t(i)] = reduce_mod1(acc);
        }
        polys.push_back(std::move(pp));
    }

    double re = 0.0, im = 0.0;
    for (i64 n = spec.range.lo; n <= spec.range.hi; ++n) {
        long double arg = 0.0L;
        for (const auto& pp : polys) arg += pp.diff[0];
        for (const size_t j : frac_terms)
            arg += reduce_mod1(term_coefficient(spec.terms[j], n, spec.N) * (long double)x[j]);
        arg = reduce_mod1(arg);
        re += double(std::cos(kTwoPi * arg));
        im += double(std::sin(kTwoPi * arg));
        for (auto& pp : polys) {
            for (size_t i = 0; i + 1 < pp.diff.size(); ++i)
                pp.diff[i] = reduce_mod1(pp.diff[i] + pp.diff[i + 1]);
        }
    }
    return {re, im, spec.range.size()};
}

MCEstimate mc_moment(const MomentSpec& spec, i64 samples, u64 seed, int threads) {
    spec.validate();
    require(samples >= 1000, ErrorCode::precondition, "mc_moment wants samples >= 1000");

    constexpr i64 kChunk = 4096;
    const i64 n_chunks = (samples + kChunk - 1) / kChunk;
    std::vector<std::pair<long double, long double>> chunk_sums(size_t(n_chunks), {0.0L, 0.0L});

    const int half_p = spec.p / 2;
    auto run_chunk = [&](i64 c) {
        const i64 begin = c * kChunk;
        const i64 end = std::min(samples, begin + kChunk);
        u64 state = splitmix64(seed + 0x9e3779b97f4a7c15ULL * u64(c + 1));
        auto next_uniform = [&]() {
            state = splitmix64(state);
            return double(state >> 11) * 0x1.0p-53;
        };
        std::vector<double> x(spec.terms.size());
        long double sum = 0.0L, sum_sq = 0.0L;
        for (i64 i = begin; i < end; ++i) {
            for (auto& xi : x) xi = next_uniform();
            const SumValue s = eval_exp_sum(spec, x);
            const long double mag_sq = (long double)s.real * s.real + (long double)s.imag * s.imag;
            long double f = 1.0L;
            for (int t = 0; t < half_p; ++t) f *= mag_sq;
            sum += f;
            sum_sq += f * f;
        }
        chunk_sums[size_t(c)] = {sum, sum_sq};
    };

    const int nthreads = std::min<int>(resolve_threads(threads), int(n_chunks));
    if (nthreads <= 1) {
        for (i64 c = 0; c < n_chunks; ++c) run_chunk(c);
    } else {
        std::atomic<i64> next{0};
        auto work = [&]() {
            for (;;) {
                const i64 c = next.fetch_add(1);
                if (c >= n_chunks) break;
                run_chunk(c);
            }
        };
        std::vector<std::thread> pool;
        for (int t = 0; t < nthreads; ++t) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }

    long double sum = 0.0L, sum_sq = 0.0L;
    for (const auto& [a, b] : chunk_sums) {  // combined in chunk order
        sum += a;
        sum_sq += b;
    }
    const long double n = (long double)samples;
    const long double mean = sum / n;
    long double var = (sum_sq - n * mean * mean) / (n - 1.0L);
    if (var < 0) var = 0;
    MCEstimate est;
    est.mean = double(mean);
    est.stderr_ = double(std::sqrt(var / n));
    est.samples = samples;
    est.seed = seed;
    return est;
}

namespace {

u64 mulmod(u64 a, u64 b, u64 q) { return u64((u128(a) * b) % q); }

u64 powmod(u64 base, int exp, u64 q) {
    u64 r = 1 % q;
    base %= q;
    for (int i = 0; i < exp; ++i) r = mulmod(r, base, q);
    return r;
}

} // namespace

SumValue weyl_sum(i64 a, i64 q, i64 N, int k) {
    require(q >= 1, ErrorCode::invalid_argument, "q must be >= 1");
    require(N >= 1, ErrorCode::invalid_argument, "N must be >= 1");
    require(k >= 1, ErrorCode::invalid_argument, "k must be >= 1");
    const i64 a_mod = ((a % q) + q) % q;
    require(std::gcd(a_mod == 0 ? q : a_mod, q) == 1, ErrorCode::precondition,
            "weyl_sum requires gcd(a, q) = 1");
    double re = 0.0, im = 0.0;
    for (i64 n = 1; n <= N; ++n) {
        const u64 pw = powmod(u64(n % q), k, u64(q));
        const u64 phase = mulmod(u64(a_mod), pw, u64(q));
        const long double arg = (long double)phase / (long double)q;
        re += double(std::cos(kTwoPi * arg));
        im += double(std::sin(kTwoPi * arg));
    }
    return {re, im, N};
}

double weyl_bound_rhs(i64 a, i64 q, i64 N, const Rational& sigma) {
    require(q >= 1, ErrorCode::invalid_argument, "q must be >= 1");
    const i64 a_mod = ((a % q) + q) % q;
    require(std::gcd(a_mod == 0 ? q : a_mod, q) == 1, ErrorCode::precondition,
            "weyl bound requires gcd(a, q) = 1");
    const double Nd = double(N);
    const double N4 = Nd * Nd * Nd * Nd;
    const double bracket = N4 / double(q) + 1.0 + double(q) / N4;
    return std::pow(Nd, 1.0 - sigma.to_double()) * std::pow(bracket, 1.0 / 160.0);
}

Rational weyl_sigma_preset(const std::string& name) {
    if (name == "bi") return Rational(3, 256);           // 3 * 2^-8
    if (name == "wooley") return Rational(1, 84);
    if (name == "improved") return Rational(56, 15 * 256);  // (56/15) * 2^-8
    fail(ErrorCode::invalid_argument, "unknown sigma preset '" + name +
                                          "' (want bi, wooley or improved)");
}

nlohmann::json VdcResult::to_json() const {
    nlohmann::json j{{"partition_sum", partition_sum},
                     {"full_sum_sq", full_sum_sq},
                     {"lambda3", lambda3},
                     {"bound_a", bound_a},
                     {"intervals", intervals},
                     {"block_size", block_size},
                     {"degenerate_phase", degenerate_phase},
                     {"sign_warning", sign_warning}};
    if (bound_b) j["bound_b"] = *bound_b;
    return j;
}

VdcResult vdc_partition_sum(const PhaseTerm& phase, i64 D, i64 N) {
    phase.validate();
    require(N >= 4, ErrorCode::invalid_argument, "N must be >= 4");
    require(D >= 1, ErrorCode::invalid_argument, "block size D must be >= 1");
    const Interval range = Interval::dyadic(N);
    require(D <= range.size(), ErrorCode::invalid_argument,
            "block size exceeds the range");

    auto f_at = [&](i64 n) { return reduce_mod1(term_coefficient(phase, n, N)); };

    VdcResult r;
    r.block_size = D;
    double full_re = 0.0, full_im = 0.0;
    for (i64 lo = range.lo; lo <= range.hi; lo += D) {
        const i64 hi = std::min(range.hi, lo + D - 1);
        double re = 0.0, im = 0.0;
        for (i64 n = lo; n <= hi; ++n) {
            const long double arg = f_at(n);
            re += double(std::cos(kTwoPi * arg));
            im += double(std::sin(kTwoPi * arg));
        }
        r.partition_sum += re * re + im * im;
        full_re += re;
        full_im += im;
        r.intervals += 1;
    }
    r.full_sum_sq = full_re * full_re + full_im * full_im;

    // f = A n^gamma (gamma absorbed into A for normalized phases);
    // f''' = A gamma (gamma-1) (gamma-2) n^{gamma-3} is monotone in n, so the
    // max sits at an endpoint.  Single monomials never change sign inside the
    // range.
    const double gamma = phase.power.to_double();
    const double amp = std::pow(double(N), phase.amplitude_exponent.to_double()) *
                       (phase.normalized ? std::pow(double(N), -gamma) : 1.0);
    const double factor = gamma * (gamma - 1.0) * (gamma - 2.0);
    if (factor == 0.0) {
        r.degenerate_phase = true;
        r.lambda3 = 0.0;
        r.bound_a = double(N);
        return r;
    }
    auto third_deriv = [&](double n) { return std::abs(amp * factor * std::pow(n, gamma - 3.0)); };
    r.lambda3 = std::max(third_deriv(double(range.lo)), third_deriv(double(range.hi)));
    r.bound_a = double(N) + std::sqrt(double(D) / r.lambda3) +
                std::pow(double(D), 1.5) * std::sqrt(r.lambda3) * double(N);
    if (double(D) > std::pow(r.lambda3, -1.0 / 3.0)) {
        r.bound_b = double(N) * double(D) * std::cbrt(r.lambda3) +
                    double(D) / std::cbrt(r.lambda3);
    }
    return r;
}

} // namespace mvt
