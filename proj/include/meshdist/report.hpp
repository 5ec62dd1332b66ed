#pragma once

#include <json.hpp>

#include "f12_bvh.hpp"
#include "query.hpp"

namespace meshdist {

template <typename Real>
nlohmann::json vec_to_json(const Vec3<Real>& v) {
    return nlohmann::json::array({double(v.x()), double(v.y()), double(v.z())});
}

// {distance, witness_exact, tri_a, tri_b, point_a, point_b, iterations: [...]} plus
// aggregate counters. Witness fields are null when no triangle pair was evaluated.
template <typename Real>
nlohmann::json to_json(const QueryResult<Real>& r) {
    nlohmann::json j;
    j["kind"] = to_string(r.kind);
    j["distance"] = double(r.distance);
    j["witness_exact"] = r.witness_exact;
    if (r.witness) {
        j["tri_a"] = r.witness->tri_a;
        j["tri_b"] = r.witness->tri_b;
        j["point_a"] = vec_to_json(r.witness->point_a);
        j["point_b"] = vec_to_json(r.witness->point_b);
    } else {
        j["tri_a"] = j["tri_b"] = j["point_a"] = j["point_b"] = nullptr;
    }
    auto iters = nlohmann::json::array();
    for (const auto& it : r.iterations) {
        iters.push_back({{"k", it.k},
                         {"front_in", it.front_in},
                         {"front_out", it.front_out},
                         {"culled", it.culled},
                         {"bound_after", double(it.bound_after)}});
    }
    j["iterations"] = std::move(iters);
    j["bvtt_nodes"] = r.bvtt_nodes;
    j["expanded_pairs"] = r.expanded_pairs;
    j["peak_front"] = r.peak_front;
    j["triangle_tests"] = r.triangle_tests;
    return j;
}

template <typename Real>
nlohmann::json to_json(const Aabb<Real>& b) {
    return {{"min", vec_to_json(b.min)}, {"max", vec_to_json(b.max)}, {"tight", b.tight}};
}

// Debug dump of a BVH: node boxes in storage order and the triangles of each leaf.
template <typename Real>
nlohmann::json to_json(const F12Bvh<Real>& bvh) {
    nlohmann::json j;
    j["depth"] = bvh.depth();
    j["leaf_count"] = bvh.leaf_count();
    auto nodes = nlohmann::json::array();
    for (const auto& n : bvh.nodes()) nodes.push_back(to_json(n));
    j["nodes"] = std::move(nodes);
    auto leaves = nlohmann::json::array();
    for (const auto& l : bvh.leaves()) leaves.push_back(std::vector<TriangleId>(l.ids().begin(), l.ids().end()));
    j["leaves"] = std::move(leaves);
    j["prim_order"] = std::vector<TriangleId>(bvh.prim_order().begin(), bvh.prim_order().end());
    return j;
}

} // namespace meshdist
