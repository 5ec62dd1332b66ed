#pragma once

#include <mutex>
#include <optional>
#include <tuple>

#include "mesh.hpp"
#include "parallel.hpp"
#include "query.hpp"
#include "triangle_distance.hpp"

namespace meshdist {

inline constexpr std::uint64_t kBruteForcePairLimit = 10'000'000;

// All-pairs reference answer. Refuses more than kBruteForcePairLimit pairs
// unless forced. Ties keep the lexicographically smallest (tri_a, tri_b).
template <QueryKind K, typename Real>
Witness<Real> brute_force(const TriangleMesh<Real>& mesh_a, const TriangleMesh<Real>& mesh_b, bool force = false,
                          int threads = 1) {
    using Traits = QueryTraits<K>;
    if (mesh_a.empty() || mesh_b.empty()) throw Error("brute force needs two non-empty meshes");
    const std::uint64_t pairs = std::uint64_t(mesh_a.triangle_count()) * mesh_b.triangle_count();
    if (pairs > kBruteForcePairLimit && !force) throw SizeGuardError(pairs, kBruteForcePairLimit);

    auto precedes = [](const Witness<Real>& x, const Witness<Real>& y) {
        if (x.distance != y.distance) return Traits::better(x.distance, y.distance);
        return std::tie(x.tri_a, x.tri_b) < std::tie(y.tri_a, y.tri_b);
    };

    std::optional<Witness<Real>> best;
    std::mutex mutex;
    parallel_batches(mesh_a.triangle_count(), 8, resolve_threads(threads), [&](std::size_t begin, std::size_t end, int) {
        std::optional<Witness<Real>> local;
        for (std::size_t i = begin; i < end; ++i) {
            const auto ta = mesh_a.triangle(i);
            for (std::size_t j = 0; j < mesh_b.triangle_count(); ++j) {
                const auto r = Traits::exact(ta, mesh_b.triangle(j));
                if (!local || Traits::better(r.distance, local->distance))
                    local = Witness<Real>{TriangleId(i), TriangleId(j), r.p, r.q, r.distance};
            }
        }
        std::lock_guard lock(mutex);
        if (!best || precedes(*local, *best)) best = local;
    });
    return *best;
}

template <typename Real>
Witness<Real> brute_force_min(const TriangleMesh<Real>& a, const TriangleMesh<Real>& b, bool force = false, int threads = 1) {
    return brute_force<QueryKind::Min>(a, b, force, threads);
}

template <typename Real>
Witness<Real> brute_force_max(const TriangleMesh<Real>& a, const TriangleMesh<Real>& b, bool force = false, int threads = 1) {
    return brute_force<QueryKind::Max>(a, b, force, threads);
}

} // namespace meshdist
