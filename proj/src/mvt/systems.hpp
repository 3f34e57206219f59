#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "mvt/fixed_point.hpp"
#include "mvt/interval.hpp"
#include "mvt/rational.hpp"

namespace mvt {

/// One phase term of an exponential sum.  The coefficient in front of the
/// oscillation is N^{amplitude_exponent}; the oscillating function is
/// (n/N)^power when `normalized`, n^power otherwise.  Terms that are plain
/// integer monomials with unit coefficient are "exact": they turn into exact
/// linear constraints instead of windows.
struct PhaseTerm {
    Rational power;
    Rational amplitude_exponent;
    bool normalized = false;

    bool exact() const {
        return power.is_integer() && amplitude_exponent.num == 0 && !normalized;
    }
    void validate() const {
        require(!(power < Rational(0)), ErrorCode::invalid_argument,
                "phase power must be >= 0");
    }
};

/// An even moment of an exponential sum over a dyadic range.
struct MomentSpec {
    i64 N = 0;
    int p = 0;
    std::vector<PhaseTerm> terms;
    Interval range;

    MomentSpec() = default;
    MomentSpec(i64 n, int order, std::vector<PhaseTerm> t)
        : N(n), p(order), terms(std::move(t)), range(Interval::dyadic(n)) {}
    MomentSpec(i64 n, int order, std::vector<PhaseTerm> t, Interval r)
        : N(n), p(order), terms(std::move(t)), range(r) {}

    void validate() const;
};

enum class Side { left, right };

inline const char* side_name(Side s) { return s == Side::left ? "left" : "right"; }

/// A block of identical slots: `multiplicity` variables ranging over
/// `interval`, on one side of the counting system.
struct SlotGroup {
    Interval interval;
    int multiplicity = 1;
    Side side = Side::left;
};

/// One windowed constraint |sum_left g - sum_right g| <= tolerance with
/// g(n) = (n/N)^power or n^power.
struct WindowedForm {
    Rational power;
    double tolerance = 0.0;
    bool normalized = false;
};

/// The counting problem equivalent to a moment: s slots per side, exact
/// integer constraints for the integer monomial phases and tolerance windows
/// for the rest.
struct WindowSystem {
    i64 N = 0;
    std::vector<SlotGroup> groups;
    std::vector<i64> exact_forms;
    std::vector<WindowedForm> windowed_forms;
    int scale_bits = FixedPoint::kDefaultScaleBits;

    int slots(Side side) const;
    std::vector<SlotGroup> side_groups(Side side) const;
    void validate() const;

    nlohmann::json to_json() const;
};

/// Exact per-element value of an exact form (n^power, integer power).
i64 exact_form_value(i64 power, i64 n);

/// Fixed-point per-element value of a windowed form.  This quantization is
/// part of the system's definition: every engine and the brute oracle must
/// compare the same numbers, or boundary ties would diverge.
FixedPoint windowed_form_value(const WindowedForm& form, i64 n, i64 N, int scale_bits);

/// Translate a moment into its counting system.  Each exact term with power
/// gamma contributes the constraint sum_left n^gamma = sum_right n^gamma; a
/// term with coefficient N^e contributes a window of half-width
/// window_constant * N^{-e} on its g-sums.
WindowSystem spec_to_system(const MomentSpec& spec, double window_constant = 1.0);

/// Plain declarative "key = value" spec files; see docs/README for the grammar.
MomentSpec parse_spec_text(const std::string& text);
std::string spec_to_text(const MomentSpec& spec);

nlohmann::json spec_to_json(const MomentSpec& spec);

} // namespace mvt
