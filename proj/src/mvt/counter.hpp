#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "mvt/systems.hpp"

namespace mvt {

/// One multiset of slot values, compressed: `weight` is the number of
/// ordered tuples the multiset represents (s! / prod of multiplicities!).
/// Capacity is fixed at 3 exact forms and 2 windows, which covers every
/// system in scope; the struct packs to 64 bytes so sorts stay cache-friendly.
struct TupleRecord {
    std::array<i128, 2> window{};
    std::array<i64, 3> key{};
    u64 weight = 0;
};

inline constexpr int kMaxExactForms = 3;
inline constexpr int kMaxWindowForms = 2;

struct CountOptions {
    int threads = 0;                         // 0 = hardware concurrency
    u64 budget_bytes = u64(8) << 30;         // enumeration memory budget
    std::string cache_dir;                   // empty = caching disabled
    double brute_ceiling = 1e9;              // ordered-pair work ceiling for the oracle
};

enum class Engine { convolution, group_sweep, brute };

const char* engine_name(Engine e);

struct CountResult {
    u128 count = 0;
    WindowSystem system;
    u64 enumerated_multisets = 0;
    double wall_time = 0.0;
    Engine engine = Engine::group_sweep;
    /// Sum of weight^2 over one side's records when both sides share the same
    /// slot structure (the permutation-diagonal contribution); 0 otherwise.
    u128 diagonal_weight_sq = 0;
    bool cache_hit = false;

    nlohmann::json to_json() const;
};

/// Pure-equation counting via s-fold convolution of the per-element value
/// distribution: returns sum_v r_s(v)^2.  Requires no windowed forms and a
/// single identical slot group on each side.
CountResult count_exact(const WindowSystem& system, const CountOptions& options = {});

/// Windowed counting: per-side multiset tables grouped by exact key, then a
/// two-pointer sweep over the first window with running weight sums; a second
/// window is filtered by a nested scan inside the active range.  Exact, no
/// sampling.
CountResult count_windowed(const WindowSystem& system, const CountOptions& options = {});

/// Mixed count for two O(N)-separated slot groups per side (multiplicity 2
/// each): the discrete bilinear quantity whose 4th-power growth the exponent
/// lab checks against slope 4.
CountResult count_bilinear(const WindowSystem& system, const CountOptions& options = {});

/// Dispatch: convolution when the system is purely exact and symmetric,
/// group sweep otherwise.
CountResult count_auto(const WindowSystem& system, const CountOptions& options = {});

/// Independent verification oracle: ordered-tuple enumeration with none of
/// the multiset/sweep machinery.  Small systems are counted by a literal
/// odometer over all ordered tuple pairs; medium ones enumerate each side's
/// ordered tuples and match within exact-key buckets by a quadratic scan.
CountResult brute_oracle(const WindowSystem& system, const CountOptions& options = {});

// --- cache -----------------------------------------------------------------

using Fingerprint = std::array<unsigned char, 32>;

/// Collision-resistant fingerprint of (side slot structure, N, forms,
/// tolerances, scale_bits) plus the record layout version.
Fingerprint side_fingerprint(const WindowSystem& system, Side side);

std::string fingerprint_hex(const Fingerprint& fp);

struct SideTable {
    std::vector<TupleRecord> records;  // sorted by key, then windows, then weight
    u64 enumerated = 0;
    bool from_cache = false;
};

/// Persist a grouped record table.  Layout: magic "MVT1", version u16 LE,
/// fingerprint (32 bytes), record count u64, then packed records (exact keys
/// as i64, window values as i128, weight u64), everything little-endian.
void cache_store(const std::string& dir, const Fingerprint& key, const SideTable& table,
                 int key_dims, int win_dims);

/// Returns nothing on a missing file, magic/version/fingerprint mismatch or a
/// malformed payload; callers recompute in that case.
std::optional<SideTable> cache_load(const std::string& dir, const Fingerprint& key,
                                    int key_dims, int win_dims);

/// Exposed for tests: build one side's sorted multiset table.
SideTable build_side_table(const WindowSystem& system, Side side,
                           const CountOptions& options);

/// Closed-form number of size-m multisets from k values (saturating).
u128 multiset_count(u64 k, int m);

} // namespace mvt
