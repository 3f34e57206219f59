#pragma once

#include <string>

#include "mvt/error.hpp"
#include "mvt/util.hpp"

namespace mvt {

/// Closed integer interval [lo, hi].  The dyadic range "n ~ N" is
/// represented as [floor(N/2)+1, N] so consecutive ladder rungs never
/// double-count an endpoint.
struct Interval {
    i64 lo = 1;
    i64 hi = 1;

    Interval() = default;
    Interval(i64 l, i64 h) : lo(l), hi(h) {
        require(lo <= hi, ErrorCode::invalid_argument, "empty interval");
        require(lo >= 1, ErrorCode::invalid_argument, "interval must stay positive");
    }

    static Interval dyadic(i64 N) { return Interval(N / 2 + 1, N); }

    i64 size() const { return hi - lo + 1; }
    bool contains(i64 v) const { return v >= lo && v <= hi; }
    bool overlaps(const Interval& o) const { return lo <= o.hi && o.lo <= hi; }

    friend bool operator==(const Interval& a, const Interval& b) {
        return a.lo == b.lo && a.hi == b.hi;
    }

    std::string str() const {
        return "[" + std::to_string(lo) + ", " + std::to_string(hi) + "]";
    }
};

} // namespace mvt
