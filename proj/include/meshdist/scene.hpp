#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "mesh.hpp"

namespace meshdist {

enum class SceneKind { RandomBlobs, IntersectingClusters, NestedShells, OffsetGrids };

inline const char* to_string(SceneKind k) {
    switch (k) {
    case SceneKind::RandomBlobs: return "random-blobs";
    case SceneKind::IntersectingClusters: return "intersecting-clusters";
    case SceneKind::NestedShells: return "nested-shells";
    case SceneKind::OffsetGrids: return "offset-grids";
    }
    return "?";
}

inline SceneKind parse_scene_kind(const std::string& name) {
    for (auto k : {SceneKind::RandomBlobs, SceneKind::IntersectingClusters, SceneKind::NestedShells, SceneKind::OffsetGrids})
        if (name == to_string(k)) return k;
    throw Error("unknown scene kind '" + name + "'");
}

// Scene parameters as key=value pairs. Recognized keys per kind:
//   all kinds:              n (triangles per mesh, default 200), seed (default 1)
//   random-blobs:           gap (cluster centre distance along x, 6), sigma (1), size (0.3), nb (n)
//   intersecting-clusters:  size (0.05), nb (n)
//   nested-shells:          inner (1), outer (1.5), offset (0.1), nb (n)
//   offset-grids:           gap (0.5), nb (n)
class SceneParams {
public:
    SceneParams() = default;
    SceneParams(std::initializer_list<std::pair<const std::string, std::string>> kv) : values_(kv) {}

    // Parses "k=v,k=v".
    static SceneParams parse(const std::string& text) {
        SceneParams p;
        std::size_t pos = 0;
        while (pos < text.size()) {
            std::size_t comma = text.find(',', pos);
            if (comma == std::string::npos) comma = text.size();
            const std::string item = text.substr(pos, comma - pos);
            pos = comma + 1;
            if (item.empty()) continue;
            const auto eq = item.find('=');
            if (eq == std::string::npos || eq == 0) throw Error("scene parameter '" + item + "' is not key=value");
            p.values_[item.substr(0, eq)] = item.substr(eq + 1);
        }
        return p;
    }

    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    bool has(const std::string& key) const { return values_.count(key) != 0; }
    const std::map<std::string, std::string>& values() const noexcept { return values_; }

    double number(const std::string& key, double fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        try {
            std::size_t used = 0;
            const double v = std::stod(it->second, &used);
            if (used != it->second.size()) throw std::invalid_argument(key);
            return v;
        } catch (const std::exception&) {
            throw Error("scene parameter " + key + "='" + it->second + "' is not a number");
        }
    }

    std::uint64_t integer(const std::string& key, std::uint64_t fallback) const {
        const double v = number(key, double(fallback));
        if (v < 0 || v != std::floor(v)) throw Error("scene parameter " + key + " must be a non-negative integer");
        return static_cast<std::uint64_t>(v);
    }

    void require_known(const std::set<std::string>& allowed) const {
        for (const auto& [k, v] : values_)
            if (!allowed.count(k)) throw Error("unknown scene parameter '" + k + "'");
    }

private:
    std::map<std::string, std::string> values_;
};

template <typename Real>
using MeshPair = std::pair<TriangleMesh<Real>, TriangleMesh<Real>>;

namespace detail {

using SceneRng = std::mt19937_64;

inline double uniform(SceneRng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

struct SoupBuilder {
    std::vector<Vec3<double>> vertices;
    std::vector<TriangleIndices> triangles;

    void add(const Vec3<double>& a, const Vec3<double>& b, const Vec3<double>& c) {
        const auto base = static_cast<std::uint32_t>(vertices.size());
        vertices.insert(vertices.end(), {a, b, c});
        triangles.push_back({base, base + 1, base + 2});
    }

    template <typename Real>
    TriangleMesh<Real> finish() && {
        std::vector<Vec3<Real>> v;
        v.reserve(vertices.size());
        for (const auto& p : vertices) v.push_back(p.cast<Real>());
        return TriangleMesh<Real>(std::move(v), std::move(triangles));
    }
};

inline Vec3<double> random_offset(SceneRng& rng, double size) {
    return {uniform(rng, -size, size), uniform(rng, -size, size), uniform(rng, -size, size)};
}

inline std::size_t positive_count(const SceneParams& p, const std::string& key, std::uint64_t fallback) {
    const auto v = p.integer(key, fallback);
    if (v < 1) throw Error("scene parameter " + key + " must be >= 1");
    return static_cast<std::size_t>(v);
}

template <typename Real>
MeshPair<Real> random_blobs(const SceneParams& p) {
    p.require_known({"n", "nb", "seed", "gap", "sigma", "size"});
    const std::size_t na = positive_count(p, "n", 200);
    const std::size_t nb = positive_count(p, "nb", na);
    const double gap = p.number("gap", 6.0), sigma = p.number("sigma", 1.0), size = p.number("size", 0.3);
    if (!(sigma > 0) || !(size > 0)) throw Error("random-blobs: sigma and size must be positive");
    SceneRng rng(p.integer("seed", 1));
    std::normal_distribution<double> normal(0.0, sigma);

    auto blob = [&](std::size_t n, const Vec3<double>& centre) {
        SoupBuilder soup;
        for (std::size_t i = 0; i < n; ++i) {
            const Vec3<double> c = centre + Vec3<double>(normal(rng), normal(rng), normal(rng));
            soup.add(c + random_offset(rng, size), c + random_offset(rng, size), c + random_offset(rng, size));
        }
        return std::move(soup).template finish<Real>();
    };
    auto a = blob(na, Vec3<double>::Zero());
    auto b = blob(nb, Vec3<double>(gap, 0, 0));
    return {std::move(a), std::move(b)};
}

// Two clusters on either side of the plane x = 0 that touch in exactly one
// point: one triangle of each shares a vertex at the contact point.
template <typename Real>
MeshPair<Real> intersecting_clusters(const SceneParams& p) {
    p.require_known({"n", "nb", "seed", "size"});
    const std::size_t na = positive_count(p, "n", 200);
    const std::size_t nb = positive_count(p, "nb", na);
    const double size = p.number("size", 0.05);
    if (!(size > 0)) throw Error("intersecting-clusters: size must be positive");
    SceneRng rng(p.integer("seed", 1));
    const Vec3<double> contact(0.0, uniform(rng, -0.5, 0.5), uniform(rng, -0.5, 0.5));

    auto cluster = [&](std::size_t n, double side) {
        const std::size_t special = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
        SoupBuilder soup;
        for (std::size_t i = 0; i < n; ++i) {
            if (i == special) {
                soup.add(contact, contact + Vec3<double>(side * size, size, 0), contact + Vec3<double>(side * size, 0, size));
                continue;
            }
            const Vec3<double> c(side * uniform(rng, 0, 1), uniform(rng, -1, 1), uniform(rng, -1, 1));
            std::array<Vec3<double>, 3> v;
            for (auto& x : v) {
                x = c + random_offset(rng, size);
                // keep the cluster strictly on its own side of x = 0
                x.x() = side * std::max(std::abs(x.x()), 1e-6);
            }
            soup.add(v[0], v[1], v[2]);
        }
        return std::move(soup).template finish<Real>();
    };
    auto a = cluster(na, -1.0);
    auto b = cluster(nb, +1.0);
    return {std::move(a), std::move(b)};
}

inline std::vector<Vec3<double>> sphere_soup_indices(std::size_t slices, std::size_t stacks, double radius,
                                                      std::vector<TriangleIndices>& tris) {
    std::vector<Vec3<double>> v;
    v.emplace_back(0, 0, radius);
    for (std::size_t i = 1; i < stacks; ++i) {
        const double theta = std::numbers::pi * double(i) / double(stacks);
        for (std::size_t j = 0; j < slices; ++j) {
            const double phi = 2 * std::numbers::pi * double(j) / double(slices);
            v.emplace_back(radius * std::sin(theta) * std::cos(phi), radius * std::sin(theta) * std::sin(phi),
                           radius * std::cos(theta));
        }
    }
    v.emplace_back(0, 0, -radius);
    const auto ring = [&](std::size_t i, std::size_t j) { return std::uint32_t(1 + (i - 1) * slices + j % slices); };
    const auto south = std::uint32_t(v.size() - 1);
    for (std::size_t j = 0; j < slices; ++j) tris.push_back({0, ring(1, j), ring(1, j + 1)});
    for (std::size_t i = 1; i + 1 < stacks; ++i)
        for (std::size_t j = 0; j < slices; ++j) {
            tris.push_back({ring(i, j), ring(i + 1, j), ring(i + 1, j + 1)});
            tris.push_back({ring(i, j), ring(i + 1, j + 1), ring(i, j + 1)});
        }
    for (std::size_t j = 0; j < slices; ++j) tris.push_back({south, ring(stacks - 1, j + 1), ring(stacks - 1, j)});
    return v;
}

// Concentric tessellated spheres; the outer one is randomly rotated and its
// centre displaced by `offset` in a random direction.
template <typename Real>
MeshPair<Real> nested_shells(const SceneParams& p) {
    p.require_known({"n", "nb", "seed", "inner", "outer", "offset"});
    const std::size_t na = positive_count(p, "n", 200);
    const std::size_t nb = positive_count(p, "nb", na);
    const double inner = p.number("inner", 1.0), outer = p.number("outer", 1.5), offset = p.number("offset", 0.1);
    if (!(inner > 0) || !(outer > inner + offset)) throw Error("nested-shells: need 0 < inner and inner + offset < outer");
    SceneRng rng(p.integer("seed", 1));

    // A UV sphere with s slices and t stacks has 2 * s * (t - 1) triangles.
    auto shell = [&](std::size_t n, double radius, const Mat3<double>& rot, const Vec3<double>& centre) {
        const std::size_t slices = std::max<std::size_t>(3, std::size_t(std::lround(std::sqrt(double(n)))));
        const std::size_t stacks = std::max<std::size_t>(2, n / (2 * slices) + 1);
        std::vector<TriangleIndices> tris;
        auto v = sphere_soup_indices(slices, stacks, radius, tris);
        std::vector<Vec3<Real>> out;
        out.reserve(v.size());
        for (const auto& x : v) out.push_back((rot * x + centre).cast<Real>());
        return TriangleMesh<Real>(std::move(out), std::move(tris));
    };

    const Vec3<double> axis = Vec3<double>(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1)) + Vec3<double>(0, 0, 1e-3);
    const Mat3<double> rot = Eigen::AngleAxis<double>(uniform(rng, 0, 2 * std::numbers::pi), axis.normalized()).toRotationMatrix();
    const Vec3<double> dir = Vec3<double>(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1)) + Vec3<double>(1e-3, 0, 0);
    auto a = shell(na, inner, Mat3<double>::Identity(), Vec3<double>::Zero());
    auto b = shell(nb, outer, rot, dir.normalized() * offset);
    return {std::move(a), std::move(b)};
}

// Two flat triangulated grids over the unit square, B at height `gap` above A,
// with a different resolution and a small seeded shift in the plane so the
// projections still overlap. Their minimum distance is exactly `gap`.
template <typename Real>
MeshPair<Real> offset_grids(const SceneParams& p) {
    p.require_known({"n", "nb", "seed", "gap"});
    const std::size_t na = positive_count(p, "n", 200);
    const std::size_t nb = positive_count(p, "nb", na);
    const double gap = p.number("gap", 0.5);
    if (!(gap >= 0)) throw Error("offset-grids: gap must be >= 0");
    SceneRng rng(p.integer("seed", 1));

    auto grid = [](std::size_t tris, double z, double dx, double dy) {
        const std::size_t cells = std::max<std::size_t>(1, std::size_t(std::lround(std::sqrt(double(tris) / 2))));
        std::vector<Vec3<Real>> v;
        for (std::size_t i = 0; i <= cells; ++i)
            for (std::size_t j = 0; j <= cells; ++j)
                v.emplace_back(Real(dx + double(i) / double(cells)), Real(dy + double(j) / double(cells)), Real(z));
        std::vector<TriangleIndices> t;
        const auto at = [&](std::size_t i, std::size_t j) { return std::uint32_t(i * (cells + 1) + j); };
        for (std::size_t i = 0; i < cells; ++i)
            for (std::size_t j = 0; j < cells; ++j) {
                t.push_back({at(i, j), at(i + 1, j), at(i + 1, j + 1)});
                t.push_back({at(i, j), at(i + 1, j + 1), at(i, j + 1)});
            }
        return TriangleMesh<Real>(std::move(v), std::move(t));
    };
    const double dx = uniform(rng, 0, 0.1), dy = uniform(rng, 0, 0.1);
    auto a = grid(na, 0.0, 0.0, 0.0);
    auto b = grid(nb + nb / 3, gap, dx, dy);
    return {std::move(a), std::move(b)};
}

} // namespace detail

// Deterministic synthetic scene: identical (kind, params) give identical meshes.
template <typename Real>
MeshPair<Real> gen_scene(SceneKind kind, const SceneParams& params) {
    switch (kind) {
    case SceneKind::RandomBlobs: return detail::random_blobs<Real>(params);
    case SceneKind::IntersectingClusters: return detail::intersecting_clusters<Real>(params);
    case SceneKind::NestedShells: return detail::nested_shells<Real>(params);
    case SceneKind::OffsetGrids: return detail::offset_grids<Real>(params);
    }
    throw Error("unknown scene kind");
}

template <typename Real>
MeshPair<Real> gen_scene(const std::string& kind, const SceneParams& params) {
    return gen_scene<Real>(parse_scene_kind(kind), params);
}

} // namespace meshdist
