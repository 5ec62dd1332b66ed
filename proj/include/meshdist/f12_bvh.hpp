#pragma once

#include <algorithm>
#include <bit>
#include <map>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "aabb.hpp"
#include "mesh.hpp"
#include "morton.hpp"

namespace meshdist {

// Index of the `offset`-th node `k` levels below `node` in an implicitly stored
// full binary tree (children of i at 2i+1 and 2i+2).
constexpr NodeIndex descendant(NodeIndex node, unsigned k, NodeIndex offset) noexcept {
    return ((node + 1) << k) - 1 + offset;
}

constexpr unsigned node_level(NodeIndex node) noexcept { return static_cast<unsigned>(std::bit_width(node + 1) - 1); }

struct LeafPrims {
    std::array<TriangleId, 2> tri{};
    std::uint8_t count = 0;

    std::span<const TriangleId> ids() const noexcept { return {tri.data(), count}; }
};

// Full binary AABB tree with one or two triangles per leaf. Nodes are stored in
// breadth-first order without child links; leaf r is node leaf_count-1+r.
template <typename Real>
class F12Bvh {
public:
    using Box = Aabb<Real>;

    std::span<const Box> nodes() const noexcept { return nodes_; }
    const Box& node(NodeIndex i) const { return nodes_[i]; }
    const Box& root() const { return nodes_.front(); }

    std::size_t node_count() const noexcept { return nodes_.size(); }
    std::size_t leaf_count() const noexcept { return leaves_.size(); }
    unsigned depth() const noexcept { return depth_; }
    std::size_t triangle_count() const noexcept { return prim_order_.size(); }

    // Morton-sorted triangle ids.
    std::span<const TriangleId> prim_order() const noexcept { return prim_order_; }
    std::span<const LeafPrims> leaves() const noexcept { return leaves_; }

    bool is_leaf(NodeIndex i) const noexcept { return i + 1 >= leaves_.size() && i < nodes_.size(); }
    NodeIndex leaf_node(std::size_t rank) const noexcept { return leaves_.size() - 1 + rank; }
    std::size_t leaf_rank(NodeIndex node) const noexcept { return node - (leaves_.size() - 1); }
    std::span<const TriangleId> leaf_triangles(NodeIndex node) const { return leaves_[leaf_rank(node)].ids(); }

    unsigned remaining_depth(NodeIndex node) const {
        if (node >= nodes_.size()) throw std::out_of_range("node " + std::to_string(node) + " not in tree");
        return depth_ - node_level(node);
    }

    NodeIndex descendant(NodeIndex node, unsigned k, NodeIndex offset) const {
        if (node >= nodes_.size() || offset >= (NodeIndex{1} << k))
            throw std::out_of_range("descendant: invalid node or offset");
        const NodeIndex d = meshdist::descendant(node, k, offset);
        if (k > remaining_depth(node) || d >= nodes_.size())
            throw std::out_of_range("descendant " + std::to_string(d) + " exceeds the node array of size " +
                                    std::to_string(nodes_.size()));
        return d;
    }

    // Recomputes every box from the current vertex positions of a mesh with the
    // same triangle list. Structure is left untouched.
    void refit(const TriangleMesh<Real>& mesh) {
        if (mesh.triangle_count() != triangle_count())
            throw TopologyMismatchError("refit: BVH was built over " + std::to_string(triangle_count()) +
                                        " triangles but the mesh has " + std::to_string(mesh.triangle_count()));
        const std::size_t first_leaf = leaves_.size() - 1;
        for (std::size_t r = 0; r < leaves_.size(); ++r) nodes_[first_leaf + r] = leaf_box(mesh, leaves_[r]);
        for (std::size_t i = first_leaf; i-- > 0;) nodes_[i] = Box::merge(nodes_[2 * i + 1], nodes_[2 * i + 2]);
    }

    static F12Bvh build(const TriangleMesh<Real>& mesh);

private:
    static Box leaf_box(const TriangleMesh<Real>& mesh, const LeafPrims& leaf) {
        Box box = Box::of_triangle(mesh.triangle(leaf.tri[0]));
        if (leaf.count == 2) box = Box::merge(box, Box::of_triangle(mesh.triangle(leaf.tri[1])));
        return box;
    }

    std::vector<Box> nodes_;
    std::vector<LeafPrims> leaves_;
    std::vector<TriangleId> prim_order_;
    unsigned depth_ = 0;
};

namespace detail {

// Chooses `merges` disjoint adjacent pairs of the sequence 0..n-1, cheapest first.
// A pair is taken only when the free runs left over can still provide the
// remaining merges; a run of length s can supply at most floor(s/2).
template <typename Real>
std::vector<bool> choose_pairs(std::span<const Real> pair_cost, std::size_t n, std::size_t merges) {
    std::vector<bool> starts_pair(n, false);
    if (merges == 0) return starts_pair;

    std::vector<std::size_t> order(n - 1);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pair_cost[a] < pair_cost[b]; });

    std::map<std::size_t, std::size_t> runs{{0, n}}; // free run [start, end)
    std::vector<bool> used(n, false);
    std::size_t taken = 0;
    std::size_t capacity = n / 2;

    while (taken < merges) {
        const std::size_t before = taken;
        for (std::size_t i : order) {
            if (taken == merges) break;
            if (used[i] || used[i + 1]) continue;
            auto it = std::prev(runs.upper_bound(i));
            const auto [start, end] = *it;
            const std::size_t left = i - start, right = end - (i + 2);
            const std::size_t new_capacity = capacity - (end - start) / 2 + left / 2 + right / 2;
            if (taken + 1 + new_capacity < merges) continue;
            runs.erase(it);
            if (left) runs.emplace(start, i);
            if (right) runs.emplace(i + 2, end);
            used[i] = used[i + 1] = true;
            starts_pair[i] = true;
            capacity = new_capacity;
            ++taken;
        }
        if (taken == before) throw std::logic_error("f12 pairing made no progress");
    }
    return starts_pair;
}

} // namespace detail

template <typename Real>
F12Bvh<Real> F12Bvh<Real>::build(const TriangleMesh<Real>& mesh) {
    if (mesh.empty()) throw Error("cannot build a BVH over an empty mesh");

    F12Bvh bvh;
    const auto codes = morton_codes(mesh);
    const std::size_t n = codes.size();
    bvh.prim_order_.reserve(n);
    for (const auto& c : codes) bvh.prim_order_.push_back(c.triangle);

    std::vector<Box> tri_box(n);
    for (std::size_t i = 0; i < n; ++i) tri_box[i] = Box::of_triangle(mesh.triangle(bvh.prim_order_[i]));

    const std::size_t leaf_count = std::bit_floor(n);
    std::vector<Real> cost(n > 1 ? n - 1 : 0);
    for (std::size_t i = 0; i + 1 < n; ++i) cost[i] = Box::merge(tri_box[i], tri_box[i + 1]).surface_area();
    const auto starts_pair = detail::choose_pairs<Real>(cost, n, n - leaf_count);

    bvh.leaves_.reserve(leaf_count);
    for (std::size_t i = 0; i < n; ++i) {
        LeafPrims leaf;
        leaf.tri[0] = bvh.prim_order_[i];
        leaf.count = 1;
        if (starts_pair[i]) {
            leaf.tri[1] = bvh.prim_order_[++i];
            leaf.count = 2;
        }
        bvh.leaves_.push_back(leaf);
    }

    bvh.depth_ = static_cast<unsigned>(std::countr_zero(leaf_count));
    bvh.nodes_.resize(2 * leaf_count - 1);
    bvh.refit(mesh);
    return bvh;
}

template <typename Real>
F12Bvh<Real> build_f12(const TriangleMesh<Real>& mesh) {
    return F12Bvh<Real>::build(mesh);
}

template <typename Real>
F12Bvh<Real> refit(F12Bvh<Real> bvh, const TriangleMesh<Real>& mesh) {
    bvh.refit(mesh);
    return bvh;
}

} // namespace meshdist
