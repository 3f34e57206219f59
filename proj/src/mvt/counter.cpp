#include "mvt/counter.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <thread>
#include <unordered_map>

#include <openssl/evp.h>

namespace mvt {

namespace {

constexpr u64 kFact[13] = {1, 1, 2, 6, 24, 120, 720, 5040, 40320,
                           362880, 3628800, 39916800, 479001600};

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : int(hw);
}

struct FormSet {
    std::vector<i64> exact;
    std::vector<WindowedForm> windowed;
    int key_dims = 0;
    int win_dims = 0;
    std::array<i128, 2> thresholds{};
};

FormSet make_form_set(const WindowSystem& sys) {
    require(sys.exact_forms.size() <= kMaxExactForms, ErrorCode::capacity,
            "too many exact forms (max " + std::to_string(kMaxExactForms) + ")");
    require(sys.windowed_forms.size() <= kMaxWindowForms, ErrorCode::capacity,
            "too many windowed forms (max " + std::to_string(kMaxWindowForms) + ")");
    FormSet fs;
    fs.exact = sys.exact_forms;
    fs.windowed = sys.windowed_forms;
    fs.key_dims = int(fs.exact.size());
    fs.win_dims = int(fs.windowed.size());
    for (int w = 0; w < fs.win_dims; ++w)
        fs.thresholds[w] =
            FixedPoint::tolerance_threshold(fs.windowed[w].tolerance, sys.scale_bits);
    return fs;
}

/// Per-element form values over one interval, indexed by n - lo.
struct ValueTable {
    Interval interval{1, 1};
    std::vector<std::array<i64, 3>> exact_vals;
    std::vector<std::array<i128, 2>> win_vals;
};

ValueTable make_value_table(const Interval& iv, const WindowSystem& sys, const FormSet& fs) {
    ValueTable vt;
    vt.interval = iv;
    const i64 size = iv.size();
    vt.exact_vals.assign(size_t(size), {});
    vt.win_vals.assign(size_t(size), {});
    for (i64 idx = 0; idx < size; ++idx) {
        const i64 n = iv.lo + idx;
        for (int k = 0; k < fs.key_dims; ++k)
            vt.exact_vals[size_t(idx)][size_t(k)] = exact_form_value(fs.exact[size_t(k)], n);
        for (int w = 0; w < fs.win_dims; ++w)
            vt.win_vals[size_t(idx)][size_t(w)] =
                windowed_form_value(fs.windowed[size_t(w)], n, sys.N, sys.scale_bits).value;
    }
    return vt;
}

u128 saturating_mul(u128 a, u128 b) {
    if (a == 0 || b == 0) return 0;
    const u128 cap = u128(1) << 120;
    if (a > cap / b) return cap;
    return a * b;
}

/// Fills records[0..count) with all multisets of size m whose smallest element
/// has index >= first and whose first element is exactly `first`.
struct GroupEnumerator {
    const ValueTable& vt;
    int m;

    GroupEnumerator(const ValueTable& table, int mult) : vt(table), m(mult) {}

    void fill_from_first(i64 first_idx, TupleRecord* out) const {
        TupleRecord rec;
        rec.key = vt.exact_vals[size_t(first_idx)];
        rec.window = vt.win_vals[size_t(first_idx)];
        cursor_ = out;
        extend(first_idx, 2, 1, 1, rec);
    }

    TupleRecord* end_cursor() const { return cursor_; }

private:
    mutable TupleRecord* cursor_ = nullptr;

    void extend(i64 prev_idx, int level, u64 run_len, u64 denom, TupleRecord rec) const {
        if (level > m) {
            rec.weight = kFact[m] / denom;
            *cursor_++ = rec;
            return;
        }
        const i64 size = vt.interval.size();
        for (i64 idx = prev_idx; idx < size; ++idx) {
            TupleRecord next = rec;
            for (int k = 0; k < kMaxExactForms; ++k)
                next.key[size_t(k)] += vt.exact_vals[size_t(idx)][size_t(k)];
            for (int w = 0; w < kMaxWindowForms; ++w)
                next.window[size_t(w)] += vt.win_vals[size_t(idx)][size_t(w)];
            const u64 r = (idx == prev_idx) ? run_len + 1 : 1;
            extend(idx, level + 1, r, denom * r, next);
        }
    }
};

std::vector<TupleRecord> enumerate_group(const ValueTable& vt, int m, int threads) {
    const i64 size = vt.interval.size();
    require(m >= 1 && m <= 12, ErrorCode::capacity, "slot multiplicity out of range");
    // records with first index i: multisets of size m-1 from the tail [i, size)
    std::vector<u64> offsets(size_t(size) + 1, 0);
    for (i64 i = 0; i < size; ++i) {
        const u128 c = multiset_count(u64(size - i), m - 1);
        require(c < (u128(1) << 63), ErrorCode::capacity, "group too large to enumerate");
        offsets[size_t(i) + 1] = offsets[size_t(i)] + u64(c);
    }
    std::vector<TupleRecord> records(offsets[size_t(size)]);
    const int nthreads = std::min<int>(resolve_threads(threads), int(size));
    std::atomic<i64> next{0};
    auto work = [&]() {
        GroupEnumerator en{vt, m};
        for (;;) {
            const i64 i = next.fetch_add(1);
            if (i >= size) break;
            en.fill_from_first(i, records.data() + offsets[size_t(i)]);
        }
    };
    if (nthreads <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(size_t(nthreads));
        for (int t = 0; t < nthreads; ++t) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    return records;
}

bool record_less(const TupleRecord& a, const TupleRecord& b) {
    for (int k = 0; k < kMaxExactForms; ++k) {
        if (a.key[size_t(k)] != b.key[size_t(k)]) return a.key[size_t(k)] < b.key[size_t(k)];
    }
    for (int w = 0; w < kMaxWindowForms; ++w) {
        if (a.window[size_t(w)] != b.window[size_t(w)])
            return a.window[size_t(w)] < b.window[size_t(w)];
    }
    return a.weight < b.weight;
}

bool same_key(const TupleRecord& a, const TupleRecord& b) {
    return a.key == b.key;
}

std::vector<SlotGroup> canonical_groups(const WindowSystem& sys, Side side) {
    auto gs = sys.side_groups(side);
    std::sort(gs.begin(), gs.end(), [](const SlotGroup& a, const SlotGroup& b) {
        if (a.interval.lo != b.interval.lo) return a.interval.lo < b.interval.lo;
        if (a.interval.hi != b.interval.hi) return a.interval.hi < b.interval.hi;
        return a.multiplicity < b.multiplicity;
    });
    return gs;
}

bool sides_symmetric(const WindowSystem& sys) {
    const auto l = canonical_groups(sys, Side::left);
    const auto r = canonical_groups(sys, Side::right);
    if (l.size() != r.size()) return false;
    for (size_t i = 0; i < l.size(); ++i)
        if (!(l[i].interval == r[i].interval) || l[i].multiplicity != r[i].multiplicity)
            return false;
    return true;
}

u128 projected_side_records(const WindowSystem& sys, Side side) {
    u128 total = 1;
    for (const auto& g : sys.side_groups(side))
        total = saturating_mul(total, multiset_count(u64(g.interval.size()), g.multiplicity));
    return total;
}

void check_budget(const WindowSystem& sys, const CountOptions& opt, bool symmetric) {
    u128 records = projected_side_records(sys, Side::left);
    if (!symmetric) records += projected_side_records(sys, Side::right);
    const u128 bytes = saturating_mul(records, sizeof(TupleRecord) + 8);
    if (bytes > u128(opt.budget_bytes)) {
        fail(ErrorCode::capacity,
             "projected table of " + to_string_u128(records) + " records (~" +
                 to_string_u128(bytes) + " bytes) exceeds the memory budget of " +
                 std::to_string(opt.budget_bytes) + " bytes");
    }
}

SideTable build_side_table_impl(const WindowSystem& sys, Side side, const FormSet& fs,
                                const CountOptions& opt) {
    if (!opt.cache_dir.empty()) {
        const auto fp = side_fingerprint(sys, side);
        if (auto cached = cache_load(opt.cache_dir, fp, fs.key_dims, fs.win_dims))
            return std::move(*cached);
    }
    SideTable table;
    const auto gs = canonical_groups(sys, side);
    std::vector<std::vector<TupleRecord>> per_group;
    per_group.reserve(gs.size());
    for (const auto& g : gs) {
        const ValueTable vt = make_value_table(g.interval, sys, fs);
        per_group.push_back(enumerate_group(vt, g.multiplicity, opt.threads));
        table.enumerated += per_group.back().size();
    }
    if (per_group.size() == 1) {
        table.records = std::move(per_group[0]);
    } else {
        u64 total = 1;
        for (const auto& v : per_group) total *= v.size();
        table.records.reserve(total);
        std::vector<size_t> idx(per_group.size(), 0);
        for (;;) {
            TupleRecord combined{};
            combined.weight = 1;
            for (size_t g = 0; g < per_group.size(); ++g) {
                const TupleRecord& r = per_group[g][idx[g]];
                for (int k = 0; k < kMaxExactForms; ++k) combined.key[size_t(k)] += r.key[size_t(k)];
                for (int w = 0; w < kMaxWindowForms; ++w)
                    combined.window[size_t(w)] += r.window[size_t(w)];
                combined.weight *= r.weight;
            }
            table.records.push_back(combined);
            size_t g = 0;
            while (g < idx.size() && ++idx[g] == per_group[g].size()) idx[g++] = 0;
            if (g == idx.size()) break;
        }
        table.enumerated = table.records.size();
    }
    std::sort(table.records.begin(), table.records.end(), record_less);
    if (!opt.cache_dir.empty()) {
        const auto fp = side_fingerprint(sys, side);
        cache_store(opt.cache_dir, fp, table, fs.key_dims, fs.win_dims);
    }
    return table;
}

size_t next_run_start(const std::vector<TupleRecord>& recs, size_t from) {
    if (from == 0 || from >= recs.size()) return std::min(from, recs.size());
    size_t i = from;
    while (i < recs.size() && same_key(recs[i - 1], recs[i])) ++i;
    return i;
}

/// Count window-admissible (left, right) ordered pairs within one key run.
u128 count_run_pairs(const std::vector<TupleRecord>& L, size_t la, size_t lb,
                     const std::vector<TupleRecord>& R, size_t ra, size_t rb,
                     const FormSet& fs) {
    u128 total = 0;
    if (fs.win_dims == 0) {
        u128 wl = 0, wr = 0;
        for (size_t i = la; i < lb; ++i) wl += L[i].weight;
        for (size_t j = ra; j < rb; ++j) wr += R[j].weight;
        return wl * wr;
    }
    const i128 T0 = fs.thresholds[0];
    size_t lo = ra, hi = ra;
    u128 window_weight = 0;
    for (size_t i = la; i < lb; ++i) {
        const i128 w = L[i].window[0];
        while (hi < rb && R[hi].window[0] <= w + T0) {
            window_weight += R[hi].weight;
            ++hi;
        }
        while (lo < hi && R[lo].window[0] < w - T0) {
            window_weight -= R[lo].weight;
            ++lo;
        }
        if (fs.win_dims == 1) {
            total += u128(L[i].weight) * window_weight;
        } else {
            const i128 T1 = fs.thresholds[1];
            const i128 w1 = L[i].window[1];
            u128 hits = 0;
            for (size_t j = lo; j < hi; ++j) {
                const i128 d = R[j].window[1] - w1;
                if (d <= T1 && d >= -T1) hits += R[j].weight;
            }
            total += u128(L[i].weight) * hits;
        }
    }
    return total;
}

size_t lower_bound_key(const std::vector<TupleRecord>& recs, const TupleRecord& probe) {
    return size_t(std::distance(
        recs.begin(),
        std::lower_bound(recs.begin(), recs.end(), probe,
                         [](const TupleRecord& a, const TupleRecord& b) {
                             for (int k = 0; k < kMaxExactForms; ++k)
                                 if (a.key[size_t(k)] != b.key[size_t(k)])
                                     return a.key[size_t(k)] < b.key[size_t(k)];
                             return false;
                         })));
}

u128 sweep_count(const SideTable& left, const SideTable& right, bool shared,
                 const FormSet& fs, int threads) {
    const auto& L = left.records;
    const auto& R = right.records;
    if (L.empty() || R.empty()) return 0;
    const int nthreads = resolve_threads(threads);
    const size_t chunks = size_t(std::max(1, nthreads * 4));
    std::atomic<size_t> next_chunk{0};
    std::vector<u128> partial(chunks, 0);
    auto work = [&]() {
        for (;;) {
            const size_t c = next_chunk.fetch_add(1);
            if (c >= chunks) break;
            const size_t approx_lo = L.size() * c / chunks;
            const size_t approx_hi = L.size() * (c + 1) / chunks;
            size_t run = next_run_start(L, approx_lo);
            const size_t stop = next_run_start(L, approx_hi);
            u128 sum = 0;
            while (run < stop) {
                size_t run_end = run + 1;
                while (run_end < L.size() && same_key(L[run_end - 1], L[run_end])) ++run_end;
                size_t ra, rb;
                if (shared) {
                    ra = run;
                    rb = run_end;
                } else {
                    ra = lower_bound_key(R, L[run]);
                    rb = ra;
                    while (rb < R.size() && same_key(R[rb], L[run])) ++rb;
                }
                if (ra < rb) sum += count_run_pairs(L, run, run_end, R, ra, rb, fs);
                run = run_end;
            }
            partial[c] += sum;
        }
    };
    if (nthreads <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < nthreads; ++t) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    u128 total = 0;
    for (const u128 p : partial) total += p;
    return total;
}

u128 weight_sq_sum(const std::vector<TupleRecord>& recs) {
    u128 total = 0;
    for (const auto& r : recs) total += u128(r.weight) * r.weight;
    return total;
}

void check_window_precision(const WindowSystem& sys) {
    const int s2 = sys.slots(Side::left) * 2;
    const double resolution = std::ldexp(double(s2), -sys.scale_bits);
    for (const auto& w : sys.windowed_forms) {
        // T = 0 is a legal exact-match constraint; positive sub-resolution
        // tolerances would silently behave like 0, so they are refused.
        if (w.tolerance > 0 && w.tolerance < resolution)
            fail(ErrorCode::precision,
                 "tolerance " + std::to_string(w.tolerance) + " is below the fixed-point "
                 "resolution " + std::to_string(resolution) + " for this system");
    }
}

CountResult count_with_sweep(const WindowSystem& sys, const CountOptions& opt, Engine tag) {
    StopWatch timer;
    const FormSet fs = make_form_set(sys);
    const bool symmetric = sides_symmetric(sys);
    check_budget(sys, opt, symmetric);
    CountResult result;
    result.system = sys;
    result.engine = tag;
    const SideTable left = build_side_table_impl(sys, Side::left, fs, opt);
    SideTable right_storage;
    const SideTable* right = &left;
    if (!symmetric) {
        right_storage = build_side_table_impl(sys, Side::right, fs, opt);
        right = &right_storage;
    }
    result.count = sweep_count(left, *right, symmetric, fs, opt.threads);
    result.enumerated_multisets = left.enumerated + (symmetric ? 0 : right->enumerated);
    result.cache_hit = left.from_cache || (!symmetric && right->from_cache);
    if (symmetric) result.diagonal_weight_sq = weight_sq_sum(left.records);
    result.wall_time = timer.seconds();
    return result;
}

// --- convolution engine ------------------------------------------------------

struct KeyHash {
    size_t operator()(const std::array<i64, 3>& k) const {
        u64 h = 1469598103934665603ULL;
        for (const i64 v : k) {
            u64 x = u64(v);
            for (int b = 0; b < 8; ++b) {
                h ^= (x >> (8 * b)) & 0xff;
                h *= 1099511628211ULL;
            }
        }
        return size_t(h);
    }
};

} // namespace

u128 multiset_count(u64 k, int m) {
    if (m == 0) return 1;
    if (k == 0) return 0;
    // C(k + m - 1, m)
    u128 num = 1;
    for (int i = 0; i < m; ++i) {
        num = saturating_mul(num, u128(k + u64(m) - 1 - u64(i)));
        num /= u128(i + 1);
    }
    return num;
}

const char* engine_name(Engine e) {
    switch (e) {
    case Engine::convolution: return "convolution";
    case Engine::group_sweep: return "group_sweep";
    case Engine::brute: return "brute";
    }
    return "unknown";
}

nlohmann::json CountResult::to_json() const {
    return {{"count", to_string_u128(count)},
            {"engine", engine_name(engine)},
            {"enumerated_multisets", enumerated_multisets},
            {"diagonal_weight_sq", to_string_u128(diagonal_weight_sq)},
            {"cache_hit", cache_hit},
            {"system", system.to_json()}};
}

SideTable build_side_table(const WindowSystem& system, Side side, const CountOptions& options) {
    system.validate();
    const FormSet fs = make_form_set(system);
    return build_side_table_impl(system, side, fs, options);
}

CountResult count_exact(const WindowSystem& system, const CountOptions& options) {
    system.validate();
    require(system.windowed_forms.empty(), ErrorCode::precondition,
            "count_exact requires a system without windowed forms");
    const auto lg = system.side_groups(Side::left);
    const auto rg = system.side_groups(Side::right);
    require(lg.size() == 1 && rg.size() == 1, ErrorCode::precondition,
            "count_exact requires a single slot group per side");
    require(lg[0].interval == rg[0].interval && lg[0].multiplicity == rg[0].multiplicity,
            ErrorCode::precondition, "count_exact requires identical sides");

    StopWatch timer;
    const FormSet fs = make_form_set(system);
    const int s = lg[0].multiplicity;
    const Interval iv = lg[0].interval;
    {
        const u128 bound = multiset_count(u64(iv.size()), s);
        const u128 bytes = saturating_mul(bound, 96);
        require(bytes <= u128(options.budget_bytes), ErrorCode::capacity,
                "projected distinct-key count " + to_string_u128(bound) +
                    " exceeds the memory budget of " + std::to_string(options.budget_bytes) +
                    " bytes");
    }
    const ValueTable vt = make_value_table(iv, system, fs);
    using Map = std::unordered_map<std::array<i64, 3>, u64, KeyHash>;
    Map current;
    current.reserve(size_t(iv.size()) * 2);
    for (i64 idx = 0; idx < iv.size(); ++idx) current[vt.exact_vals[size_t(idx)]] += 1;
    for (int level = 2; level <= s; ++level) {
        Map next;
        next.reserve(current.size() * 4);
        for (const auto& [key, cnt] : current) {
            for (i64 idx = 0; idx < iv.size(); ++idx) {
                std::array<i64, 3> shifted = key;
                for (int k = 0; k < kMaxExactForms; ++k)
                    shifted[size_t(k)] += vt.exact_vals[size_t(idx)][size_t(k)];
                next[shifted] += cnt;
            }
        }
        current = std::move(next);
        const u128 bytes = saturating_mul(u128(current.size()), 96);
        require(bytes <= u128(options.budget_bytes), ErrorCode::capacity,
                "convolution table of " + std::to_string(current.size()) +
                    " keys exceeds the memory budget of " + std::to_string(options.budget_bytes) +
                    " bytes");
    }
    u128 total = 0;
    for (const auto& [key, cnt] : current) total += u128(cnt) * cnt;

    CountResult result;
    result.count = total;
    result.system = system;
    result.engine = Engine::convolution;
    result.enumerated_multisets = current.size();
    result.wall_time = timer.seconds();
    return result;
}

CountResult count_windowed(const WindowSystem& system, const CountOptions& options) {
    system.validate();
    require(!system.windowed_forms.empty(), ErrorCode::precondition,
            "count_windowed requires at least one windowed form");
    require(system.windowed_forms.size() <= kMaxWindowForms, ErrorCode::precondition,
            "count_windowed supports at most two windowed forms");
    check_window_precision(system);
    return count_with_sweep(system, options, Engine::group_sweep);
}

CountResult count_bilinear(const WindowSystem& system, const CountOptions& options) {
    system.validate();
    for (Side side : {Side::left, Side::right}) {
        const auto gs = system.side_groups(side);
        require(gs.size() == 2, ErrorCode::precondition,
                "bilinear count requires two slot groups per side");
        for (const auto& g : gs)
            require(g.multiplicity == 2, ErrorCode::precondition,
                    "bilinear count requires multiplicity 2 in each group");
        require(!gs[0].interval.overlaps(gs[1].interval), ErrorCode::precondition,
                "bilinear groups must be separated intervals");
    }
    if (!system.windowed_forms.empty()) check_window_precision(system);
    return count_with_sweep(system, options, Engine::group_sweep);
}

CountResult count_auto(const WindowSystem& system, const CountOptions& options) {
    system.validate();
    const auto lg = system.side_groups(Side::left);
    const auto rg = system.side_groups(Side::right);
    const bool exact_shape = system.windowed_forms.empty() && lg.size() == 1 &&
                             rg.size() == 1 && lg[0].interval == rg[0].interval &&
                             lg[0].multiplicity == rg[0].multiplicity;
    if (exact_shape) return count_exact(system, options);
    if (!system.windowed_forms.empty()) return count_windowed(system, options);
    return count_with_sweep(system, options, Engine::group_sweep);
}

// --- brute oracle ------------------------------------------------------------

namespace {

struct SlotDomain {
    const ValueTable* table;
    i64 size;
};

/// Odometer over ordered tuples for a list of slots; calls fn with per-slot
/// value-table indices.
template <typename Fn>
void for_each_ordered_tuple(const std::vector<SlotDomain>& slots, Fn&& fn) {
    std::vector<i64> idx(slots.size(), 0);
    for (;;) {
        fn(idx);
        size_t d = 0;
        while (d < slots.size() && ++idx[d] == slots[d].size) idx[d++] = 0;
        if (d == slots.size()) break;
    }
}

} // namespace

CountResult brute_oracle(const WindowSystem& system, const CountOptions& options) {
    system.validate();
    StopWatch timer;
    const FormSet fs = make_form_set(system);

    std::map<std::pair<i64, i64>, ValueTable> tables;
    auto table_for = [&](const Interval& iv) -> const ValueTable* {
        auto it = tables.find({iv.lo, iv.hi});
        if (it == tables.end())
            it = tables.emplace(std::make_pair(iv.lo, iv.hi), make_value_table(iv, system, fs))
                     .first;
        return &it->second;
    };

    auto side_slots = [&](Side side) {
        std::vector<SlotDomain> slots;
        for (const auto& g : canonical_groups(system, side))
            for (int i = 0; i < g.multiplicity; ++i)
                slots.push_back({table_for(g.interval), g.interval.size()});
        return slots;
    };
    const std::vector<SlotDomain> left = side_slots(Side::left);
    const std::vector<SlotDomain> right = side_slots(Side::right);

    u128 left_tuples = 1, right_tuples = 1;
    for (const auto& s : left) left_tuples = saturating_mul(left_tuples, u128(s.size));
    for (const auto& s : right) right_tuples = saturating_mul(right_tuples, u128(s.size));
    const u128 pair_work = saturating_mul(left_tuples, right_tuples);

    CountResult result;
    result.system = system;
    result.engine = Engine::brute;

    constexpr u128 kLiteralCeiling = 5'000'000;
    constexpr u128 kSideCeiling = 20'000'000;

    auto eval_side = [&](const std::vector<SlotDomain>& slots, const std::vector<i64>& idx,
                         std::array<i64, 3>& key, std::array<i128, 2>& win) {
        key = {};
        win = {};
        for (size_t s = 0; s < slots.size(); ++s) {
            const auto& ev = slots[s].table->exact_vals[size_t(idx[s])];
            const auto& wv = slots[s].table->win_vals[size_t(idx[s])];
            for (int k = 0; k < fs.key_dims; ++k) key[size_t(k)] += ev[size_t(k)];
            for (int w = 0; w < fs.win_dims; ++w) win[size_t(w)] += wv[size_t(w)];
        }
    };
    auto admissible = [&](const std::array<i64, 3>& kl, const std::array<i128, 2>& wl,
                          const std::array<i64, 3>& kr, const std::array<i128, 2>& wr) {
        for (int k = 0; k < fs.key_dims; ++k)
            if (kl[size_t(k)] != kr[size_t(k)]) return false;
        for (int w = 0; w < fs.win_dims; ++w) {
            const i128 d = wl[size_t(w)] - wr[size_t(w)];
            if (d > fs.thresholds[size_t(w)] || d < -fs.thresholds[size_t(w)]) return false;
        }
        return true;
    };

    if (pair_work <= kLiteralCeiling && pair_work <= u128(options.brute_ceiling)) {
        // literal mode: every ordered tuple pair, one constraint check each
        u128 count = 0;
        u64 enumerated = 0;
        for_each_ordered_tuple(left, [&](const std::vector<i64>& li) {
            std::array<i64, 3> kl;
            std::array<i128, 2> wl;
            eval_side(left, li, kl, wl);
            ++enumerated;
            for_each_ordered_tuple(right, [&](const std::vector<i64>& ri) {
                std::array<i64, 3> kr;
                std::array<i128, 2> wr;
                eval_side(right, ri, kr, wr);
                if (admissible(kl, wl, kr, wr)) ++count;
            });
        });
        result.count = count;
        result.enumerated_multisets = enumerated;
    } else if (left_tuples <= kSideCeiling && right_tuples <= kSideCeiling) {
        // side-reduced mode: ordered tuples per side bucketed by exact key,
        // quadratic window matching inside each bucket
        using Bucket = std::map<std::array<i64, 3>, std::vector<std::array<i128, 2>>>;
        auto collect = [&](const std::vector<SlotDomain>& slots) {
            Bucket bucket;
            for_each_ordered_tuple(slots, [&](const std::vector<i64>& idx) {
                std::array<i64, 3> key;
                std::array<i128, 2> win;
                eval_side(slots, idx, key, win);
                bucket[key].push_back(win);
            });
            return bucket;
        };
        const Bucket lb = collect(left);
        const Bucket rb = collect(right);
        u128 count = 0;
        for (const auto& [key, lwins] : lb) {
            const auto it = rb.find(key);
            if (it == rb.end()) continue;
            for (const auto& wl : lwins)
                for (const auto& wr : it->second) {
                    bool ok = true;
                    for (int w = 0; w < fs.win_dims && ok; ++w) {
                        const i128 d = wl[size_t(w)] - wr[size_t(w)];
                        ok = d <= fs.thresholds[size_t(w)] && d >= -fs.thresholds[size_t(w)];
                    }
                    if (ok) ++count;
                }
        }
        result.count = count;
        result.enumerated_multisets = u64(left_tuples + right_tuples);
    } else {
        fail(ErrorCode::capacity,
             "brute oracle ceiling exceeded: " + to_string_u128(pair_work) +
                 " ordered tuple pairs against a ceiling of " +
                 std::to_string(u64(options.brute_ceiling)) +
                 " and per-side limit " + to_string_u128(kSideCeiling));
    }
    result.wall_time = timer.seconds();
    return result;
}

// --- cache -------------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'M', 'V', 'T', '1'};
constexpr std::uint16_t kFormatVersion = 1;

bool little_endian_host() { return std::endian::native == std::endian::little; }

void put_u16(std::string& out, std::uint16_t v) {
    out.push_back(char(v & 0xff));
    out.push_back(char(v >> 8));
}

void put_u64(std::string& out, u64 v) {
    for (int i = 0; i < 8; ++i) out.push_back(char((v >> (8 * i)) & 0xff));
}

void put_i64(std::string& out, i64 v) { put_u64(out, u64(v)); }

void put_i128(std::string& out, i128 v) {
    const u128 u = u128(v);
    put_u64(out, u64(u));
    put_u64(out, u64(u >> 64));
}

u64 get_u64(const unsigned char* p) {
    u64 v = 0;
    for (int i = 0; i < 8; ++i) v |= u64(p[i]) << (8 * i);
    return v;
}

i128 get_i128(const unsigned char* p) {
    const u128 lo = get_u64(p);
    const u128 hi = get_u64(p + 8);
    return i128(lo | (hi << 64));
}

std::string cache_path(const std::string& dir, const Fingerprint& fp) {
    return dir + "/" + fingerprint_hex(fp) + ".mvtcache";
}

} // namespace

Fingerprint side_fingerprint(const WindowSystem& system, Side side) {
    std::string material = "mvt-side-table-v1|layout=k3w2x64|";
    material += "scale=" + std::to_string(system.scale_bits);
    material += "|N=" + std::to_string(system.N);
    material += "|exact=";
    for (const i64 g : system.exact_forms) material += std::to_string(g) + ",";
    material += "|win=";
    for (const auto& w : system.windowed_forms) {
        char tol_hex[20];
        std::snprintf(tol_hex, sizeof(tol_hex), "%016llx",
                      (unsigned long long)std::bit_cast<u64>(w.tolerance));
        material += w.power.str() + ":" + tol_hex + ":" + (w.normalized ? "n" : "u") + ";";
    }
    material += "|groups=";
    for (const auto& g : canonical_groups(system, side)) {
        material += "(" + std::to_string(g.interval.lo) + "," + std::to_string(g.interval.hi) +
                    "," + std::to_string(g.multiplicity) + ");";
    }
    Fingerprint fp{};
    unsigned int len = 0;
    EVP_Digest(material.data(), material.size(), fp.data(), &len, EVP_sha256(), nullptr);
    require(len == fp.size(), ErrorCode::internal, "unexpected digest length");
    return fp;
}

std::string fingerprint_hex(const Fingerprint& fp) {
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(64);
    for (const unsigned char b : fp) {
        out.push_back(hex[b >> 4]);
        out.push_back(hex[b & 0xf]);
    }
    return out;
}

void cache_store(const std::string& dir, const Fingerprint& key, const SideTable& table,
                 int key_dims, int win_dims) {
    if (!little_endian_host()) return;  // format is little-endian only
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    std::string payload;
    payload.reserve(46 + table.records.size() * size_t(8 * key_dims + 16 * win_dims + 8));
    payload.append(kMagic, 4);
    put_u16(payload, kFormatVersion);
    payload.append(reinterpret_cast<const char*>(key.data()), key.size());
    put_u64(payload, table.records.size());
    for (const auto& r : table.records) {
        for (int k = 0; k < key_dims; ++k) put_i64(payload, r.key[size_t(k)]);
        for (int w = 0; w < win_dims; ++w) put_i128(payload, r.window[size_t(w)]);
        put_u64(payload, r.weight);
    }
    const std::string path = cache_path(dir, key);
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        require(out.good(), ErrorCode::io, "cannot write cache file " + tmp);
        out.write(payload.data(), std::streamsize(payload.size()));
        require(out.good(), ErrorCode::io, "short write to cache file " + tmp);
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) std::filesystem::remove(tmp, ec);
}

std::optional<SideTable> cache_load(const std::string& dir, const Fingerprint& key,
                                    int key_dims, int win_dims) {
    if (!little_endian_host()) return std::nullopt;
    std::ifstream in(cache_path(dir, key), std::ios::binary);
    if (!in.good()) return std::nullopt;
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const size_t header = 4 + 2 + 32 + 8;
    if (data.size() < header) return std::nullopt;
    if (std::memcmp(data.data(), kMagic, 4) != 0) return std::nullopt;
    const auto* p = reinterpret_cast<const unsigned char*>(data.data());
    const std::uint16_t version = std::uint16_t(p[4] | (p[5] << 8));
    if (version != kFormatVersion) return std::nullopt;
    if (std::memcmp(p + 6, key.data(), 32) != 0) return std::nullopt;
    const u64 count = get_u64(p + 38);
    const size_t rec_bytes = size_t(8 * key_dims + 16 * win_dims + 8);
    if (data.size() != header + count * rec_bytes) return std::nullopt;
    SideTable table;
    table.records.resize(count);
    const unsigned char* cursor = p + header;
    for (u64 i = 0; i < count; ++i) {
        TupleRecord& r = table.records[i];
        for (int k = 0; k < key_dims; ++k) {
            r.key[size_t(k)] = i64(get_u64(cursor));
            cursor += 8;
        }
        for (int w = 0; w < win_dims; ++w) {
            r.window[size_t(w)] = get_i128(cursor);
            cursor += 16;
        }
        r.weight = get_u64(cursor);
        cursor += 8;
        if (i > 0 && record_less(table.records[i], table.records[i - 1]))
            return std::nullopt;  // unsorted payload: treat as corrupt
    }
    table.from_cache = true;
    table.enumerated = 0;
    return table;
}

} // namespace mvt
