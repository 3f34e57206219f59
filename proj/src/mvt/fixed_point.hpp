#pragma once

#include <cmath>
#include <limits>

#include "mvt/error.hpp"
#include "mvt/util.hpp"

namespace mvt {

/// Signed fixed-point value on a 128-bit integer, value = round(x * 2^scale_bits).
/// Addition is exact, so window comparisons are deterministic across platforms
/// and thread schedules; the only rounding happens once per tabulated element.
struct FixedPoint {
    i128 value = 0;

    static constexpr int kDefaultScaleBits = 48;

    static FixedPoint from_double(long double x, int scale_bits) {
        require(std::isfinite(double(x)), ErrorCode::invalid_argument,
                "non-finite value in fixed-point conversion");
        const long double scaled = std::ldexp(x, scale_bits);
        require(std::fabs(scaled) < std::ldexp(1.0L, 126), ErrorCode::capacity,
                "fixed-point overflow");
        FixedPoint fp;
        fp.value = i128(std::rint(scaled));
        return fp;
    }

    /// Exact conversion for integer-valued samples (no long double round trip).
    static FixedPoint from_integer(i64 v, int scale_bits) {
        FixedPoint fp;
        fp.value = i128(v) << scale_bits;
        return fp;
    }

    /// Saturating threshold for a tolerance; +inf tolerances never bind.
    static i128 tolerance_threshold(double tolerance, int scale_bits) {
        require(tolerance >= 0, ErrorCode::invalid_argument, "negative tolerance");
        const i128 saturated = i128(1) << 125;
        if (std::isinf(tolerance)) return saturated;
        const long double scaled = std::ldexp((long double)tolerance, scale_bits);
        if (scaled >= std::ldexp(1.0L, 125)) return saturated;
        return i128(std::rint(scaled));
    }

    double to_double(int scale_bits) const {
        return double(std::ldexp((long double)value, -scale_bits));
    }
};

} // namespace mvt
