#include "mvt/explab.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace mvt {

nlohmann::json LadderPoint::to_json() const {
    return {{"N", N}, {"count", to_string_u128(count)}, {"params", params}};
}

nlohmann::json FitResult::to_json() const {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : points) pts.push_back(p.to_json());
    return {{"points", pts},
            {"slope", slope},
            {"intercept", intercept},
            {"max_residual", max_residual}};
}

FitResult fit_exponent(const std::vector<LadderPoint>& points) {
    require(points.size() >= 3, ErrorCode::precondition,
            "exponent fit needs at least 3 ladder points");
    std::set<i64> ns;
    for (const auto& p : points) {
        require(p.count >= 1, ErrorCode::precondition,
                "ladder point with zero count at N = " + std::to_string(p.N));
        require(ns.insert(p.N).second, ErrorCode::precondition,
                "degenerate ladder: duplicate N = " + std::to_string(p.N));
    }
    const double n = double(points.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& p : points) {
        const double x = std::log2(double(p.N));
        const double y = log2_u128(p.count);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double denom = n * sxx - sx * sx;
    require(std::abs(denom) > 1e-12, ErrorCode::precondition, "degenerate ladder abscissae");
    FitResult fit;
    fit.points = points;
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
    for (const auto& p : points) {
        const double x = std::log2(double(p.N));
        const double y = log2_u128(p.count);
        fit.max_residual = std::max(fit.max_residual,
                                    std::abs(y - (fit.intercept + fit.slope * x)));
    }
    return fit;
}

const char* verdict_name(Verdict v) {
    switch (v) {
    case Verdict::consistent: return "consistent";
    case Verdict::violated: return "violated";
    case Verdict::inconclusive: return "inconclusive";
    }
    return "unknown";
}

nlohmann::json BoundVerdict::to_json() const {
    return {{"claimed_exponent", claimed.str()},
            {"claimed_value", claimed.to_double()},
            {"measured_slope", measured_slope},
            {"band_low", band_low},
            {"band_high", band_high},
            {"max_residual", max_residual},
            {"verdict", verdict_name(verdict)}};
}

BoundVerdict check_bound(const FitResult& fit, const Rational& claimed,
                         double band_low_width, double band_high_width) {
    require(band_low_width >= 0 && band_high_width >= 0, ErrorCode::invalid_argument,
            "band widths must be non-negative");
    BoundVerdict v;
    v.claimed = claimed;
    v.measured_slope = fit.slope;
    v.band_low = claimed.to_double() - band_low_width;
    v.band_high = claimed.to_double() + band_high_width;
    v.max_residual = fit.max_residual;
    if (fit.slope >= v.band_low && fit.slope <= v.band_high) {
        v.verdict = Verdict::consistent;
    } else if (fit.slope > v.band_high && fit.max_residual < 0.1) {
        v.verdict = Verdict::violated;
    } else {
        v.verdict = Verdict::inconclusive;
    }
    return v;
}

LadderTemplate LadderTemplate::from_preset(const PresetConfig& cfg) {
    LadderTemplate t;
    t.name = cfg.preset;
    t.build = [cfg](i64 N) { return build_preset_system(cfg, N); };
    t.params = [cfg](i64 N) { return resolved_params(cfg, N); };
    return t;
}

LadderRun run_ladder(const LadderTemplate& tmpl, const std::vector<i64>& ladder,
                     const CountOptions& options) {
    require(ladder.size() >= 3, ErrorCode::precondition, "ladder needs at least 3 rungs");
    for (size_t i = 1; i < ladder.size(); ++i)
        require(ladder[i] > ladder[i - 1], ErrorCode::precondition,
                "ladder must be strictly increasing");
    LadderRun run;
    for (const i64 N : ladder) {
        try {
            const WindowSystem sys = tmpl.build(N);
            CountResult res = count_auto(sys, options);
            LadderPoint point;
            point.N = N;
            point.count = res.count;
            point.params = tmpl.params ? tmpl.params(N) : std::map<std::string, double>{};
            run.fit.points.push_back(std::move(point));
            run.counts.push_back(std::move(res));
        } catch (const Error& e) {
            if (e.code() != ErrorCode::capacity) throw;
            run.capacity_error = e.what();
            break;
        }
    }
    require(run.fit.points.size() >= 3, ErrorCode::capacity,
            run.capacity_error ? "ladder truncated below 3 points: " + *run.capacity_error
                               : "ladder produced fewer than 3 points");
    run.fit = fit_exponent(run.fit.points);
    return run;
}

nlohmann::json InterchangeReport::to_json() const {
    return {{"N", N},
            {"delta", delta},
            {"Delta", Delta},
            {"T", T},
            {"C", C},
            {"audit_constant", audit_constant},
            {"count_base", to_string_u128(count_base)},
            {"count_rescaled", to_string_u128(count_rescaled)},
            {"count_tail", to_string_u128(count_tail)},
            {"ratio", ratio},
            {"flagged", flagged}};
}

InterchangeReport interchange_check(i64 N, double delta, double Delta, double T, double C,
                                    const CountOptions& options, double audit_constant) {
    require(N >= 8, ErrorCode::invalid_argument, "N must be >= 8");
    const double invN = 1.0 / double(N);
    const double invN2 = invN * invN;
    require(delta < invN, ErrorCode::precondition,
            "hypothesis violated: delta < 1/N fails (delta = " + std::to_string(delta) + ")");
    require(delta > invN2, ErrorCode::precondition,
            "hypothesis violated: delta > 1/N^2 fails (delta = " + std::to_string(delta) + ")");
    // Delta's bounds are checked inclusively (with rounding slack): the
    // canonical parameter choice Delta = delta*N/2 sits exactly on 1/N at
    // power-of-two scales, where pow() rounding must not reject it.
    const double slack = 1e-9;
    require(Delta >= invN * (1.0 - slack), ErrorCode::precondition,
            "hypothesis violated: Delta >= 1/N fails (Delta = " + std::to_string(Delta) + ")");
    require(Delta <= delta * double(N) * (1.0 + slack), ErrorCode::precondition,
            "hypothesis violated: Delta <= delta*N fails (Delta = " + std::to_string(Delta) +
                ")");
    require(T >= 2.0, ErrorCode::precondition,
            "hypothesis violated: T >= 2 fails (T = " + std::to_string(T) + ")");
    require(T <= 1.0 / std::sqrt(delta * double(N)), ErrorCode::precondition,
            "hypothesis violated: T <= (delta N)^{-1/2} fails (T = " + std::to_string(T) + ")");
    require(C > 0, ErrorCode::invalid_argument, "C must be positive");

    InterchangeReport rep;
    rep.N = N;
    rep.delta = delta;
    rep.Delta = Delta;
    rep.T = T;
    rep.C = C;
    rep.audit_constant = audit_constant;
    rep.count_base = count_windowed(make_n10_system(N, delta, Delta), options).count;
    rep.count_rescaled =
        count_windowed(make_n10_system(N, T * T * delta, T * Delta), options).count;
    rep.count_tail =
        count_windowed(make_n10_system(N, delta, C * T * delta), options).count;
    const long double denom = u128_to_ld(rep.count_rescaled) / (long double)T +
                              u128_to_ld(rep.count_tail);
    rep.ratio = denom > 0 ? double(u128_to_ld(rep.count_base) / denom) : 0.0;
    rep.flagged = rep.ratio > audit_constant;
    return rep;
}

nlohmann::json LowerBoundReport::to_json() const {
    return {{"N", N},
            {"delta", delta},
            {"Delta", Delta},
            {"M", M},
            {"window_lo", window_lo},
            {"restricted_count", to_string_u128(restricted_count)},
            {"scaled_count", scaled_count},
            {"lower_rhs", lower_rhs},
            {"lower_constant", lower_constant},
            {"lower_holds", lower_holds},
            {"full_count", to_string_u128(full_count)},
            {"envelope_bare", envelope_bare},
            {"epsilon_headroom", epsilon_headroom},
            {"envelope_rhs", envelope_rhs},
            {"audit_constant", audit_constant},
            {"upper_holds", upper_holds}};
}

LowerBoundReport lower_bound_check(i64 N, double delta, double Delta,
                                   const CountOptions& options, double lower_constant,
                                   double audit_constant) {
    require(N >= 8, ErrorCode::invalid_argument, "N must be >= 8");
    require(delta > 0 && Delta > 0, ErrorCode::invalid_argument,
            "delta and Delta must be positive");
    require(delta <= Delta, ErrorCode::precondition, "construction wants delta <= Delta");
    const i64 M = i64(std::llround(std::pow(Delta, 0.25) * double(N)));
    require(M >= 4, ErrorCode::precondition,
            "window length Delta^{1/4} N = " + std::to_string(M) + " is below 4");
    const Interval range = Interval::dyadic(N);
    require(M < range.size(), ErrorCode::precondition,
            "window length " + std::to_string(M) + " exceeds the dyadic range " + range.str());
    const i64 lo = N - M;  // top window [N - M, N] of the dyadic range

    LowerBoundReport rep;
    rep.N = N;
    rep.delta = delta;
    rep.Delta = Delta;
    rep.M = M;
    rep.window_lo = lo;
    rep.lower_constant = lower_constant;
    rep.audit_constant = audit_constant;

    const WindowSystem restricted =
        make_n10_system_on_interval(N, delta, Delta, Interval(lo, N));
    rep.restricted_count = count_windowed(restricted, options).count;
    rep.scaled_count = double(u128_to_ld(rep.restricted_count)) * double(N) / double(M);
    const double N7 = std::pow(double(N), 7.0);
    rep.lower_rhs = lower_constant * delta * std::pow(Delta, 0.75) * N7;
    rep.lower_holds = rep.scaled_count >= rep.lower_rhs;

    rep.full_count = count_windowed(make_n10_system(N, delta, Delta), options).count;
    const double N6 = std::pow(double(N), 6.0);
    const double N5 = std::pow(double(N), 5.0);
    rep.envelope_bare = delta * std::pow(Delta, 0.75) * N7 + (delta + Delta) * N6 + N5;
    // the source envelope carries an N^epsilon factor; at desk scale epsilon
    // losses are pinned as +0.35 in the exponent, same as the slope bands
    rep.envelope_rhs = rep.envelope_bare * std::pow(double(N), rep.epsilon_headroom);
    rep.upper_holds =
        double(u128_to_ld(rep.full_count)) <= audit_constant * rep.envelope_rhs;
    return rep;
}

} // namespace mvt
