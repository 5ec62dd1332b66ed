#pragma once

#include <algorithm>
#include <atomic>
#include <limits>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "bounds.hpp"
#include "f12_bvh.hpp"
#include "mesh.hpp"
#include "parallel.hpp"
#include "triangle_distance.hpp"

namespace meshdist {

enum class QueryKind { Min, Max };

enum class Precision { Single = 32, Double = 64 };

inline const char* to_string(QueryKind k) { return k == QueryKind::Min ? "min" : "max"; }

struct EngineConfig {
    // Target upper limit on 4^k * front size when choosing the expansion depth k.
    std::size_t front_cap = 262144;
    unsigned depth_cap = 5;
    Precision precision = Precision::Double;
    // Worker count; 0 selects every hardware thread.
    int threads = 0;
    bool enhanced_bounds = true;
    // Testing knob: when false every generated pair is kept.
    bool culling = true;
    // Keep leaf pairs whose cached bound ties the global bound, so that a
    // witness pair realizing the distance is always evaluated.
    bool exact_witness = false;
    // Hard limit on entries emitted by a single expansion.
    std::size_t max_front_entries = std::size_t{1} << 27;
    // Record every committed update of the global bound.
    bool trace_bound = false;

    void validate() const {
        if (front_cap < 4) throw Error("front cap C must be >= 4");
        if (depth_cap < 1 || depth_cap > 16) throw Error("depth cap must be in [1, 16]");
        if (max_front_entries == 0) throw Error("max front entries must be positive");
    }
};

// One BVTT node: a node of each BVH plus the bound cached when it was emitted
// (box lower bound for min queries, box upper bound for max queries).
template <typename Real>
struct FrontEntry {
    NodeIndex node_a;
    NodeIndex node_b;
    Real bound;

    bool operator==(const FrontEntry&) const = default;
};

template <typename Real>
struct Witness {
    TriangleId tri_a = 0;
    TriangleId tri_b = 0;
    Vec3<Real> point_a = Vec3<Real>::Zero();
    Vec3<Real> point_b = Vec3<Real>::Zero();
    Real distance = 0;
};

template <typename Real>
struct IterationStats {
    unsigned k = 0;
    std::size_t front_in = 0;
    // Pairs whose box bounds were evaluated.
    std::size_t candidates = 0;
    std::size_t front_out = 0;
    // Leaf pairs sent to the narrow phase.
    std::size_t leaf_pairs = 0;
    // Pairs (front entries, generated pairs, leaf pairs) discarded by the bound test.
    std::size_t culled = 0;
    Real bound_after = 0;
};

template <typename Real>
struct QueryResult {
    QueryKind kind = QueryKind::Min;
    Real distance = 0;
    // True when `witness` realizes `distance` exactly.
    bool witness_exact = false;
    std::optional<Witness<Real>> witness;
    std::vector<IterationStats<Real>> iterations;
    std::size_t bvtt_nodes = 0;      // box-pair bound evaluations
    std::size_t expanded_pairs = 0;  // pairs that survived culling
    std::size_t peak_front = 0;
    std::size_t triangle_tests = 0;  // exact triangle-pair evaluations
    std::vector<Real> bound_trace;
};

template <typename Real>
struct QueryContext {
    const TriangleMesh<Real>& mesh_a;
    const TriangleMesh<Real>& mesh_b;
    const F12Bvh<Real>& bvh_a;
    const F12Bvh<Real>& bvh_b;
};

// Per-kind rules: which box bound culls, which one tightens the global bound,
// and which direction counts as progress.
template <QueryKind K>
struct QueryTraits;

template <>
struct QueryTraits<QueryKind::Min> {
    static constexpr Direction direction = Direction::Decreasing;

    template <typename Real>
    static Real worst() { return std::numeric_limits<Real>::infinity(); }
    template <typename Real>
    static bool better(Real a, Real b) { return a < b; }
    template <typename Real>
    static Real cull_key(const Aabb<Real>& a, const Aabb<Real>& b) { return aabb_min_lower(a, b); }
    template <typename Real>
    static Real progress(const Aabb<Real>& a, const Aabb<Real>& b, bool enhanced) {
        return enhanced ? enhanced_min_upper(a, b) : aabb_max_upper(a, b);
    }
    template <typename Real>
    static PairDistance<Real> exact(const Triangle<Real>& a, const Triangle<Real>& b) { return tri_tri_min(a, b); }
};

template <>
struct QueryTraits<QueryKind::Max> {
    static constexpr Direction direction = Direction::Increasing;

    template <typename Real>
    static Real worst() { return -std::numeric_limits<Real>::infinity(); }
    template <typename Real>
    static bool better(Real a, Real b) { return a > b; }
    template <typename Real>
    static Real cull_key(const Aabb<Real>& a, const Aabb<Real>& b) { return aabb_max_upper(a, b); }
    template <typename Real>
    static Real progress(const Aabb<Real>& a, const Aabb<Real>& b, bool enhanced) {
        return enhanced ? enhanced_max_lower(a, b) : aabb_min_lower(a, b);
    }
    template <typename Real>
    static PairDistance<Real> exact(const Triangle<Real>& a, const Triangle<Real>& b) { return tri_tri_max(a, b); }
};

// Global bound of a running query (upper bound of D_min, or lower bound of
// D_max) together with the best exact triangle pair found so far.
template <QueryKind K, typename Real>
class QueryState {
public:
    using Traits = QueryTraits<K>;

    explicit QueryState(Real initial) : bound_(initial) {}

    Real bound() const noexcept { return bound_.load(); }
    void commit(Real value) { bound_.commit(value); }
    void trace_into(std::vector<Real>* log) { bound_.trace_into(log); }

    // Whether a pair with cached bound `key` can still affect the answer.
    bool survives(Real key, Real current, bool inclusive = false) const {
        if (inclusive && key == current) return true;
        return Traits::better(key, current);
    }

    // Offers an exact triangle-pair result; ties keep the lexicographically
    // smallest (tri_a, tri_b).
    void offer(const Witness<Real>& w) {
        commit(w.distance);
        std::lock_guard lock(witness_mutex_);
        if (!witness_ || Traits::better(w.distance, witness_->distance) ||
            (w.distance == witness_->distance &&
             std::tie(w.tri_a, w.tri_b) < std::tie(witness_->tri_a, witness_->tri_b)))
            witness_ = w;
    }

    const std::optional<Witness<Real>>& witness() const noexcept { return witness_; }

private:
    MonotoneCell<Real, Traits::direction> bound_;
    std::optional<Witness<Real>> witness_;
    std::mutex witness_mutex_;
};

// Expansion depth for a front of n entries: the largest k with 4^k * n < C,
// clamped to the depth cap and the levels left above the leaves, and never
// below one level.
inline unsigned adaptive_depth(std::size_t n, const EngineConfig& cfg, unsigned max_remaining) {
    unsigned k = 1;
    const unsigned limit = std::min(cfg.depth_cap, max_remaining);
    while (k < limit) {
        const unsigned __int128 next = static_cast<unsigned __int128>(n) << (2 * (k + 1));
        if (next >= cfg.front_cap) break;
        ++k;
    }
    return std::max(1u, std::min(k, std::max(1u, max_remaining)));
}

namespace detail {

inline constexpr std::size_t kExpandBatch = 4096;
inline constexpr std::size_t kLeafBatch = 256;

template <typename Real>
struct LeafCandidate {
    NodeIndex node_a;
    NodeIndex node_b;
    Real bound;
};

// Reusable per-worker buffers of one query.
template <typename Real>
struct FrontScratch {
    std::vector<std::vector<FrontEntry<Real>>> out;
    std::vector<std::vector<LeafCandidate<Real>>> leaves;
    std::vector<LeafCandidate<Real>> leaf_all;

    void reset(int workers) {
        out.resize(workers);
        leaves.resize(workers);
        for (auto& v : out) v.clear();
        for (auto& v : leaves) v.clear();
        leaf_all.clear();
    }
};

// Exact narrow phase over one leaf pair. Returns the best pair of the 1-4
// triangle combinations and adds the number of evaluations to `tests`.
template <QueryKind K, typename Real>
Witness<Real> evaluate_leaf_pair(NodeIndex leaf_a, NodeIndex leaf_b, const QueryContext<Real>& ctx, std::size_t& tests) {
    using Traits = QueryTraits<K>;
    Witness<Real> best;
    bool have = false;
    for (TriangleId ta : ctx.bvh_a.leaf_triangles(leaf_a)) {
        const auto tri_a = ctx.mesh_a.triangle(ta);
        for (TriangleId tb : ctx.bvh_b.leaf_triangles(leaf_b)) {
            const auto r = Traits::exact(tri_a, ctx.mesh_b.triangle(tb));
            ++tests;
            if (!have || Traits::better(r.distance, best.distance) ||
                (r.distance == best.distance && std::tie(ta, tb) < std::tie(best.tri_a, best.tri_b))) {
                best = {ta, tb, r.p, r.q, r.distance};
                have = true;
            }
        }
    }
    return best;
}

// Narrow phase over the collected leaf pairs, nearest-first, rechecking each
// against the bound at the time it is reached.
template <QueryKind K, typename Real>
void run_leaf_phase(std::vector<LeafCandidate<Real>>& leaves, QueryState<K, Real>& state, const QueryContext<Real>& ctx,
                    const EngineConfig& cfg, IterationStats<Real>& stats, std::size_t& tests) {
    using Traits = QueryTraits<K>;
    std::sort(leaves.begin(), leaves.end(), [](const auto& x, const auto& y) {
        if (x.bound != y.bound) return Traits::better(x.bound, y.bound);
        return std::tie(x.node_a, x.node_b) < std::tie(y.node_a, y.node_b);
    });
    std::atomic<std::size_t> evaluated{0}, culled{0}, test_count{0};
    const int threads = resolve_threads(cfg.threads);
    parallel_batches(leaves.size(), kLeafBatch, threads, [&](std::size_t begin, std::size_t end, int) {
        std::size_t local_eval = 0, local_culled = 0, local_tests = 0;
        std::optional<Witness<Real>> best;
        Real local = state.bound();
        for (std::size_t i = begin; i < end; ++i) {
            const auto& c = leaves[i];
            if (cfg.culling && !state.survives(c.bound, local, cfg.exact_witness)) {
                ++local_culled;
                continue;
            }
            ++local_eval;
            const Witness<Real> w = evaluate_leaf_pair<K>(c.node_a, c.node_b, ctx, local_tests);
            if (!best || Traits::better(w.distance, best->distance) ||
                (w.distance == best->distance && std::tie(w.tri_a, w.tri_b) < std::tie(best->tri_a, best->tri_b)))
                best = w;
            if (Traits::better(w.distance, local)) local = w.distance;
            if ((i & 63) == 63) {
                const Real shared = state.bound();
                if (Traits::better(shared, local)) local = shared;
            }
        }
        if (best) state.offer(*best);
        evaluated += local_eval;
        culled += local_culled;
        test_count += local_tests;
    });
    stats.leaf_pairs += evaluated;
    stats.culled += culled;
    tests += test_count;
}

} // namespace detail

// Expands every entry of `front` by k levels on each side (fewer where a tree
// runs out of levels; a leaf pairs with itself), culls descendant pairs against
// the global bound, tightens the bound with the survivors' progress bounds and
// writes survivors to `out`. Surviving leaf-leaf pairs go through the exact
// narrow phase instead of being emitted.
template <QueryKind K, typename Real>
IterationStats<Real> expand_front_into(std::span<const FrontEntry<Real>> front, unsigned k, QueryState<K, Real>& state,
                                       const QueryContext<Real>& ctx, const EngineConfig& cfg,
                                       std::vector<FrontEntry<Real>>& out, detail::FrontScratch<Real>& scratch,
                                       std::size_t* triangle_tests = nullptr) {
    using Traits = QueryTraits<K>;
    IterationStats<Real> stats;
    stats.k = k;
    stats.front_in = front.size();
    out.clear();
    if (front.empty()) {
        stats.bound_after = state.bound();
        return stats;
    }

    const unsigned rem_a = ctx.bvh_a.remaining_depth(front.front().node_a);
    const unsigned rem_b = ctx.bvh_b.remaining_depth(front.front().node_b);
    const unsigned ka = std::min(k, rem_a), kb = std::min(k, rem_b);
    const bool leaf_level = ka == rem_a && kb == rem_b;
    const unsigned shift = ka + kb;
    const NodeIndex mask_b = (NodeIndex{1} << kb) - 1;
    const std::size_t total = front.size() << shift;

    const int threads = resolve_threads(cfg.threads);
    scratch.reset(threads);
    std::atomic<std::size_t> emitted{0}, culled{0}, candidates{0};
    const auto nodes_a = ctx.bvh_a.nodes();
    const auto nodes_b = ctx.bvh_b.nodes();

    parallel_batches(total, detail::kExpandBatch, threads, [&](std::size_t begin, std::size_t end, int worker) {
        auto& local_out = scratch.out[worker];
        auto& local_leaves = scratch.leaves[worker];
        Real local = state.bound();
        std::size_t local_culled = 0, local_candidates = 0;
        for (std::size_t t = begin; t < end;) {
            const std::size_t e = t >> shift;
            const FrontEntry<Real>& entry = front[e];
            const std::size_t entry_end = std::min(end, (e + 1) << shift);
            // The cached bound dominates every descendant's, so a stale entry
            // is dropped whole.
            if (cfg.culling && !state.survives(entry.bound, local)) {
                if ((t & ((std::size_t{1} << shift) - 1)) == 0) ++local_culled;
                t = entry_end;
                continue;
            }
            for (; t < entry_end; ++t) {
                const NodeIndex low = t & ((NodeIndex{1} << shift) - 1);
                const NodeIndex na = descendant(entry.node_a, ka, low >> kb);
                const NodeIndex nb = descendant(entry.node_b, kb, low & mask_b);
                const auto& box_a = nodes_a[na];
                const auto& box_b = nodes_b[nb];
                const Real key = Traits::cull_key(box_a, box_b);
                ++local_candidates;
                if (cfg.culling && !state.survives(key, local)) {
                    ++local_culled;
                    continue;
                }
                const Real progress = Traits::progress(box_a, box_b, cfg.enhanced_bounds);
                if (Traits::better(progress, local)) local = progress;
                if (leaf_level) {
                    local_leaves.push_back({na, nb, key});
                } else {
                    if (emitted.fetch_add(1, std::memory_order_relaxed) >= cfg.max_front_entries)
                        throw FrontOverflowError(emitted.load(), cfg.max_front_entries);
                    local_out.push_back({na, nb, key});
                }
            }
        }
        state.commit(local);
        culled += local_culled;
        candidates += local_candidates;
    });

    stats.candidates = candidates;
    stats.culled = culled;

    std::size_t out_size = 0;
    for (const auto& v : scratch.out) out_size += v.size();
    out.reserve(out_size);
    for (const auto& v : scratch.out) out.insert(out.end(), v.begin(), v.end());
    stats.front_out = out.size();

    if (leaf_level) {
        for (const auto& v : scratch.leaves) scratch.leaf_all.insert(scratch.leaf_all.end(), v.begin(), v.end());
        std::size_t tests = 0;
        detail::run_leaf_phase(scratch.leaf_all, state, ctx, cfg, stats, tests);
        if (triangle_tests) *triangle_tests += tests;
    }
    stats.bound_after = state.bound();
    return stats;
}

// Convenience form of a single expansion step returning the new front.
template <QueryKind K, typename Real>
std::vector<FrontEntry<Real>> expand_front(std::span<const FrontEntry<Real>> front, unsigned k, QueryState<K, Real>& state,
                                           const QueryContext<Real>& ctx, const EngineConfig& cfg,
                                           IterationStats<Real>* stats = nullptr) {
    std::vector<FrontEntry<Real>> out;
    detail::FrontScratch<Real> scratch;
    auto s = expand_front_into(front, k, state, ctx, cfg, out, scratch);
    if (stats) *stats = s;
    return out;
}

// Exact narrow phase of one leaf pair folded into the query state.
template <QueryKind K, typename Real>
std::size_t process_leaf_pair(NodeIndex leaf_a, NodeIndex leaf_b, const QueryContext<Real>& ctx, QueryState<K, Real>& state) {
    std::size_t tests = 0;
    state.offer(detail::evaluate_leaf_pair<K>(leaf_a, leaf_b, ctx, tests));
    return tests;
}

// Breadth-first BVTT front traversal: the front starts at the root pair and is
// expanded by an adaptive number of levels per iteration until every surviving
// pair has been resolved at the leaves. The returned distance is the final
// global bound.
template <QueryKind K, typename Real>
QueryResult<Real> run_query(const TriangleMesh<Real>& mesh_a, const TriangleMesh<Real>& mesh_b, const F12Bvh<Real>& bvh_a,
                            const F12Bvh<Real>& bvh_b, const EngineConfig& cfg,
                            const std::optional<std::pair<TriangleId, TriangleId>>& seed_pair = std::nullopt) {
    using Traits = QueryTraits<K>;
    cfg.validate();
    if (bvh_a.triangle_count() != mesh_a.triangle_count() || bvh_b.triangle_count() != mesh_b.triangle_count())
        throw TopologyMismatchError("BVH was not built over the given mesh");

    const QueryContext<Real> ctx{mesh_a, mesh_b, bvh_a, bvh_b};
    QueryResult<Real> result;
    result.kind = K;

    QueryState<K, Real> state(Traits::progress(bvh_a.root(), bvh_b.root(), cfg.enhanced_bounds));
    if (cfg.trace_bound) {
        result.bound_trace.push_back(state.bound());
        state.trace_into(&result.bound_trace);
    }
    if (seed_pair) {
        const auto r = Traits::exact(mesh_a.triangle(seed_pair->first), mesh_b.triangle(seed_pair->second));
        state.offer({seed_pair->first, seed_pair->second, r.p, r.q, r.distance});
        ++result.triangle_tests;
    }

    if (bvh_a.depth() == 0 && bvh_b.depth() == 0) {
        result.triangle_tests += process_leaf_pair<K>(0, 0, ctx, state);
        IterationStats<Real> s;
        s.front_in = 1;
        s.candidates = 1;
        s.leaf_pairs = 1;
        s.bound_after = state.bound();
        result.iterations.push_back(s);
        result.bvtt_nodes = 1;
        result.expanded_pairs = 1;
        result.peak_front = 1;
    } else {
        std::vector<FrontEntry<Real>> front{{0, 0, Traits::cull_key(bvh_a.root(), bvh_b.root())}}, next;
        detail::FrontScratch<Real> scratch;
        result.peak_front = 1;
        result.bvtt_nodes = 1;
        while (!front.empty()) {
            const unsigned remaining =
                std::max(bvh_a.remaining_depth(front.front().node_a), bvh_b.remaining_depth(front.front().node_b));
            const unsigned k = adaptive_depth(front.size(), cfg, remaining);
            auto stats = expand_front_into<K>(std::span<const FrontEntry<Real>>(front), k, state, ctx, cfg, next, scratch,
                                              &result.triangle_tests);
            result.bvtt_nodes += stats.candidates;
            result.expanded_pairs += stats.front_out + stats.leaf_pairs;
            result.peak_front = std::max(result.peak_front, next.size());
            result.iterations.push_back(stats);
            std::swap(front, next);
        }
    }

    if (cfg.trace_bound) state.trace_into(nullptr);
    result.distance = state.bound();
    result.witness = state.witness();
    result.witness_exact = result.witness && result.witness->distance == result.distance;
    return result;
}

template <typename Real>
QueryResult<Real> run_min_query(const TriangleMesh<Real>& mesh_a, const TriangleMesh<Real>& mesh_b, const F12Bvh<Real>& bvh_a,
                                const F12Bvh<Real>& bvh_b, const EngineConfig& cfg = {}) {
    return run_query<QueryKind::Min>(mesh_a, mesh_b, bvh_a, bvh_b, cfg);
}

template <typename Real>
QueryResult<Real> run_max_query(const TriangleMesh<Real>& mesh_a, const TriangleMesh<Real>& mesh_b, const F12Bvh<Real>& bvh_a,
                                const F12Bvh<Real>& bvh_b, const EngineConfig& cfg = {}) {
    return run_query<QueryKind::Max>(mesh_a, mesh_b, bvh_a, bvh_b, cfg);
}

} // namespace meshdist
