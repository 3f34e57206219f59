#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "mvt/counter.hpp"
#include "mvt/presets.hpp"

namespace mvt {

struct LadderPoint {
    i64 N = 0;
    u128 count = 0;
    std::map<std::string, double> params;

    nlohmann::json to_json() const;
};

struct FitResult {
    std::vector<LadderPoint> points;
    double slope = 0.0;
    double intercept = 0.0;
    double max_residual = 0.0;

    nlohmann::json to_json() const;
};

/// Ordinary least squares of log2(count) against log2(N).
FitResult fit_exponent(const std::vector<LadderPoint>& points);

enum class Verdict { consistent, violated, inconclusive };

const char* verdict_name(Verdict v);

struct BoundVerdict {
    Rational claimed;
    double measured_slope = 0.0;
    double band_low = 0.0;
    double band_high = 0.0;
    double max_residual = 0.0;
    Verdict verdict = Verdict::inconclusive;

    nlohmann::json to_json() const;
};

/// Slope-band comparison against a claimed exponent.  "violated" requires the
/// slope to clear the band's top AND the fit to be clean (max residual < 0.1);
/// a noisy fit outside the band is only "inconclusive".
BoundVerdict check_bound(const FitResult& fit, const Rational& claimed,
                         double band_low_width = 1.0, double band_high_width = 0.35);

/// An N-parameterized counting system plus its per-N resolved parameters.
struct LadderTemplate {
    std::string name;
    std::function<WindowSystem(i64)> build;
    std::function<std::map<std::string, double>(i64)> params;

    static LadderTemplate from_preset(const PresetConfig& cfg);
};

struct LadderRun {
    FitResult fit;
    std::vector<CountResult> counts;
    std::optional<std::string> capacity_error;  // set when later rungs were dropped
};

/// Counts the template along the ladder and fits the slope.  A capacity error
/// on a later rung keeps the completed points (at least 3 are needed).
LadderRun run_ladder(const LadderTemplate& tmpl, const std::vector<i64>& ladder,
                     const CountOptions& options = {});

struct InterchangeReport {
    i64 N = 0;
    double delta = 0.0, Delta = 0.0, T = 0.0, C = 1.0;
    double audit_constant = 10.0;
    u128 count_base = 0;     // N_10(delta, Delta)
    u128 count_rescaled = 0; // N_10(T^2 delta, T Delta)
    u128 count_tail = 0;     // N_10(delta, C T delta)
    double ratio = 0.0;
    bool flagged = false;

    nlohmann::json to_json() const;
};

/// Measures N_10(delta, Delta) against (1/T) N_10(T^2 delta, T Delta)
/// + N_10(delta, C T delta) under the stated parameter hypotheses.
InterchangeReport interchange_check(i64 N, double delta, double Delta, double T, double C,
                                    const CountOptions& options = {},
                                    double audit_constant = 10.0);

struct LowerBoundReport {
    i64 N = 0;
    double delta = 0.0, Delta = 0.0;
    i64 M = 0;       // short-window length, round(Delta^{1/4} N)
    i64 window_lo = 0;
    u128 restricted_count = 0;
    double scaled_count = 0.0;        // (N/M) * restricted
    double lower_rhs = 0.0;           // c * delta Delta^{3/4} N^7
    double lower_constant = 0.0;
    bool lower_holds = false;
    u128 full_count = 0;
    double envelope_bare = 0.0;       // delta Delta^{3/4} N^7 + (delta+Delta) N^6 + N^5
    double epsilon_headroom = 0.35;   // the epsilon factor realized as N^0.35
    double envelope_rhs = 0.0;        // envelope_bare * N^epsilon_headroom
    double audit_constant = 10.0;
    bool upper_holds = false;

    nlohmann::json to_json() const;
};

/// The short-window construction: counts the 10th-moment system restricted to
/// a window of length M = round(Delta^{1/4} N), scales by N/M, and compares
/// against the claimed lower envelope; also audits the full count against the
/// three-term upper envelope.
LowerBoundReport lower_bound_check(i64 N, double delta, double Delta,
                                   const CountOptions& options = {},
                                   double lower_constant = 1e-2,
                                   double audit_constant = 10.0);

} // namespace mvt
