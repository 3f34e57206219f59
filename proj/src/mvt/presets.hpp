#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mvt/systems.hpp"

namespace mvt {

/// How the second window parameter Delta is tied to N and delta.
struct DeltaRule {
    enum class Kind { unset, exponent, delta_times_n };
    Kind kind = Kind::unset;
    Rational exponent;     // Delta = N^exponent
    double coefficient = 1.0;  // Delta = coefficient * delta * N

    static DeltaRule from_exponent(const Rational& e);
    /// Accepts "delta*N", "<coef>*delta*N" or a bare exponent like "-1.5".
    static DeltaRule parse(const std::string& text);
    double resolve(i64 N, double delta) const;
    std::string str() const;
};

/// Parameterization of one preset family; exponents are exact rationals so
/// claimed-slope lookups stay exact, resolved values are doubles.
struct PresetConfig {
    std::string preset;
    Rational delta_exp{-2};
    DeltaRule Delta;                 // defaults to delta*N for the 10/12-moment families
    Rational lambda_exp;             // per-preset default
    double window_constant = 1.0;

    static PresetConfig make(const std::string& name);
};

std::vector<std::string> preset_names();
bool is_preset(const std::string& name);

/// Human-readable description of the family (emitted in reports).
std::string preset_description(const std::string& name);

/// Resolved (delta, Delta, lambda) values at a given N, for reports and fits.
std::map<std::string, double> resolved_params(const PresetConfig& cfg, i64 N);

/// The counting system for the preset at N.  Window tolerances may be
/// arbitrary positive reals here (Delta rules with coefficients), even though
/// preset defaults are pure powers of N.
WindowSystem build_preset_system(const PresetConfig& cfg, i64 N);

/// The moment spec behind the preset, for the direct-sum and Monte Carlo
/// paths.  Only pure-power parameterizations are representable.
MomentSpec build_preset_spec(const PresetConfig& cfg, i64 N);

/// Claimed growth exponent of the count as a function of the preset's
/// parameters, when the family has an established bound at them.
std::optional<Rational> claimed_exponent(const PresetConfig& cfg);

/// First-spacing 10th-moment system with explicit window values; used by the
/// interchange and lower-bound checks where Delta is an arbitrary real.
WindowSystem make_n10_system(i64 N, double delta, double Delta, double window_constant = 1.0);

/// Same system restricted to a short window [lo, hi] of the dyadic range.
WindowSystem make_n10_system_on_interval(i64 N, double delta, double Delta, const Interval& iv,
                                         double window_constant = 1.0);

} // namespace mvt
