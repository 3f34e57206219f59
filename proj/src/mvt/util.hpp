#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <string>

namespace mvt {

using i64 = std::int64_t;
using u64 = std::uint64_t;
using i128 = __int128;
using u128 = unsigned __int128;

inline std::string to_string_u128(u128 v) {
    if (v == 0) return "0";
    char buf[48];
    int pos = 48;
    while (v > 0) {
        buf[--pos] = char('0' + int(v % 10));
        v /= 10;
    }
    return std::string(buf + pos, buf + 48);
}

inline std::string to_string_i128(i128 v) {
    if (v < 0) return "-" + to_string_u128(u128(-v));
    return to_string_u128(u128(v));
}

// Exact for anything a long double mantissa holds; counts only feed log-log
// fits and reports, so the 64-bit mantissa is plenty.
inline long double u128_to_ld(u128 v) {
    const u64 hi = u64(v >> 64);
    const u64 lo = u64(v);
    return static_cast<long double>(hi) * 18446744073709551616.0L +
           static_cast<long double>(lo);
}

inline double log2_u128(u128 v) {
    return double(std::log2(u128_to_ld(v)));
}

// splitmix64; used to derive independent per-chunk RNG streams.
inline u64 splitmix64(u64 x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

class StopWatch {
public:
    StopWatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        const auto now = std::chrono::steady_clock::now();
        return std::chrono::duration<double>(now - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

} // namespace mvt
