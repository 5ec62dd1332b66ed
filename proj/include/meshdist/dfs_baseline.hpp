#pragma once

#include <atomic>
#include <vector>

#include "query.hpp"

namespace meshdist {

// Per-triangle depth-first comparator. Every triangle of A owns one traversal of
// B's tree (nearer child first) and all traversals advance in lock step, one
// node per round, as concurrent per-triangle workers would: a round prunes with
// the shared bound as it stood when the round began, so bounds found during a
// round only help from the next one on. Pruning uses the conventional box bound
// and only exact triangle results move the shared bound.
//
// `bvtt_nodes` counts (triangle, node) box tests; `expanded_pairs` counts nodes
// that passed the bound test; `peak_front` is the largest number of pending
// nodes over all traversals in one round.
template <QueryKind K, typename Real>
QueryResult<Real> run_dfs_baseline(const TriangleMesh<Real>& mesh_a, const TriangleMesh<Real>& mesh_b,
                                   const F12Bvh<Real>& bvh_b, const EngineConfig& cfg = {}) {
    using Traits = QueryTraits<K>;
    if (bvh_b.triangle_count() != mesh_b.triangle_count()) throw TopologyMismatchError("BVH was not built over mesh B");
    if (mesh_a.empty()) throw Error("mesh A is empty");

    struct Item {
        NodeIndex node;
        Real key;
    };
    struct Traversal {
        Triangle<Real> tri;
        Aabb<Real> box;
        std::vector<Item> stack;
    };

    const auto nodes = bvh_b.nodes();
    const std::size_t n = mesh_a.triangle_count();
    std::vector<Traversal> walks(n);
    for (std::size_t i = 0; i < n; ++i) {
        walks[i].tri = mesh_a.triangle(i);
        walks[i].box = Aabb<Real>::of_triangle(walks[i].tri);
        walks[i].stack.push_back({0, Traits::cull_key(walks[i].box, nodes[0])});
    }

    QueryState<K, Real> state(Traits::template worst<Real>());
    QueryResult<Real> result;
    result.kind = K;
    result.bvtt_nodes = n;

    std::vector<TriangleId> active(n);
    for (std::size_t i = 0; i < n; ++i) active[i] = TriangleId(i);
    const int threads = resolve_threads(cfg.threads);

    while (!active.empty()) {
        const Real snapshot = state.bound();
        std::atomic<std::size_t> visited{0}, expanded{0}, tests{0};
        parallel_batches(active.size(), 64, threads, [&](std::size_t begin, std::size_t end, int) {
            std::size_t local_visited = 0, local_expanded = 0, local_tests = 0;
            for (std::size_t i = begin; i < end; ++i) {
                const TriangleId ta = active[i];
                Traversal& w = walks[ta];
                const Item item = w.stack.back();
                w.stack.pop_back();
                if (cfg.culling && !state.survives(item.key, snapshot)) continue;
                ++local_expanded;
                if (bvh_b.is_leaf(item.node)) {
                    for (TriangleId tb : bvh_b.leaf_triangles(item.node)) {
                        const auto r = Traits::exact(w.tri, mesh_b.triangle(tb));
                        ++local_tests;
                        state.offer({ta, tb, r.p, r.q, r.distance});
                    }
                    continue;
                }
                const NodeIndex left = 2 * item.node + 1, right = left + 1;
                const Real kl = Traits::cull_key(w.box, nodes[left]);
                const Real kr = Traits::cull_key(w.box, nodes[right]);
                local_visited += 2;
                // Less promising child goes first so the better one is popped next.
                if (Traits::better(kl, kr)) {
                    w.stack.push_back({right, kr});
                    w.stack.push_back({left, kl});
                } else {
                    w.stack.push_back({left, kl});
                    w.stack.push_back({right, kr});
                }
            }
            visited += local_visited;
            expanded += local_expanded;
            tests += local_tests;
        });
        result.bvtt_nodes += visited;
        result.expanded_pairs += expanded;
        result.triangle_tests += tests;

        std::size_t pending = 0, kept = 0;
        for (TriangleId ta : active) {
            if (walks[ta].stack.empty()) continue;
            pending += walks[ta].stack.size();
            active[kept++] = ta;
        }
        active.resize(kept);
        result.peak_front = std::max(result.peak_front, pending);
    }

    result.distance = state.bound();
    result.witness = state.witness();
    result.witness_exact = result.witness && result.witness->distance == result.distance;
    return result;
}

template <typename Real>
QueryResult<Real> run_dfs_baseline(const TriangleMesh<Real>& mesh_a, const TriangleMesh<Real>& mesh_b,
                                   const F12Bvh<Real>& bvh_b, QueryKind kind, const EngineConfig& cfg = {}) {
    return kind == QueryKind::Min ? run_dfs_baseline<QueryKind::Min>(mesh_a, mesh_b, bvh_b, cfg)
                                  : run_dfs_baseline<QueryKind::Max>(mesh_a, mesh_b, bvh_b, cfg);
}

} // namespace meshdist
