#pragma once

#include <set>
#include <string>
#include <vector>

#include "test_support.hpp"

namespace meshdist::testing {

// Structural audit of an f12-BVH against the mesh it was built over. Returns a
// description of the first problem found, or an empty string.
template <typename Real>
std::string audit_f12(const F12Bvh<Real>& bvh, const TriangleMesh<Real>& mesh) {
    const std::size_t L = bvh.leaf_count();
    if (L == 0 || (L & (L - 1)) != 0) return "leaf count " + std::to_string(L) + " is not a power of two";
    if (bvh.node_count() != 2 * L - 1) return "node count is not 2L-1";
    if ((std::size_t(1) << bvh.depth()) != L) return "depth does not match leaf count";
    if (mesh.triangle_count() > 1 && (L > mesh.triangle_count() || 2 * L < mesh.triangle_count()))
        return "leaf count cannot hold the triangles with 1 or 2 per leaf";

    // Fullness: every internal node has both children inside the array, leaves have none.
    for (std::size_t i = 0; i < bvh.node_count(); ++i) {
        const bool internal = 2 * i + 2 < bvh.node_count();
        if (internal == bvh.is_leaf(i)) return "node " + std::to_string(i) + " leaf flag disagrees with array layout";
        if (!internal && 2 * i + 1 < bvh.node_count()) return "node " + std::to_string(i) + " has one child";
    }

    // Leaves hold 1 or 2 triangles; together they cover every triangle once.
    std::set<TriangleId> seen;
    for (const auto& leaf : bvh.leaves()) {
        if (leaf.count < 1 || leaf.count > 2) return "leaf with " + std::to_string(leaf.count) + " triangles";
        for (TriangleId t : leaf.ids()) {
            if (t >= mesh.triangle_count()) return "leaf references triangle out of range";
            if (!seen.insert(t).second) return "triangle " + std::to_string(t) + " appears twice";
        }
    }
    if (seen.size() != mesh.triangle_count()) return "some triangles are missing from the leaves";

    // Tight containment against boxes recomputed from scratch. The leaves under
    // node i at level l are the contiguous block starting at rank ((i+1) << (D-l)) - L.
    const unsigned D = bvh.depth();
    for (std::size_t i = 0; i < bvh.node_count(); ++i) {
        unsigned level = 0;
        while ((std::size_t(2) << level) <= i + 1) ++level;
        const std::size_t span = std::size_t(1) << (D - level);
        const std::size_t first = ((i + 1) << (D - level)) - L;
        std::vector<Vec3<Real>> pts;
        for (std::size_t r = first; r < first + span; ++r)
            for (TriangleId t : bvh.leaves()[r].ids())
                for (const auto& p : mesh.triangle(t)) pts.push_back(p);
        const Aabb<double> expect = naive_box(pts);
        const auto& got = bvh.node(i);
        if (!got.tight) return "node " + std::to_string(i) + " not flagged tight";
        for (int a = 0; a < 3; ++a)
            if (double(got.min[a]) != expect.min[a] || double(got.max[a]) != expect.max[a])
                return "node " + std::to_string(i) + " box differs from recomputed box";
        if (2 * i + 2 < bvh.node_count() && (!got.contains(bvh.node(2 * i + 1)) || !got.contains(bvh.node(2 * i + 2))))
            return "node " + std::to_string(i) + " does not contain its children";
    }

    // Descendant enumeration: for each node and each k up to its remaining depth,
    // offsets 0..2^k-1 must yield exactly the nodes reached by walking children.
    for (std::size_t i = 0; i < bvh.node_count(); ++i) {
        std::vector<NodeIndex> frontier{i};
        for (unsigned k = 1; k <= bvh.remaining_depth(i); ++k) {
            std::vector<NodeIndex> next;
            for (NodeIndex n : frontier) {
                next.push_back(2 * n + 1);
                next.push_back(2 * n + 2);
            }
            frontier = std::move(next);
            std::set<NodeIndex> got;
            for (NodeIndex off = 0; off < (NodeIndex(1) << k); ++off) got.insert(bvh.descendant(i, k, off));
            if (got != std::set<NodeIndex>(frontier.begin(), frontier.end()))
                return "descendant enumeration of node " + std::to_string(i) + " at depth " + std::to_string(k) + " is wrong";
            if (i > 64 && k > 2) break;
        }
    }

    // Refit over the same mesh is a bitwise fixed point.
    const auto again = refit(bvh, mesh);
    for (std::size_t i = 0; i < bvh.node_count(); ++i)
        if (again.node(i).min != bvh.node(i).min || again.node(i).max != bvh.node(i).max)
            return "refit moved node " + std::to_string(i);
    return {};
}

} // namespace meshdist::testing
