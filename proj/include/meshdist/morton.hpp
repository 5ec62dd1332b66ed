#pragma once

#include <algorithm>
#include <utility>
#include <vector>

#include "aabb.hpp"
#include "mesh.hpp"

namespace meshdist {

inline constexpr int kMortonBitsPerAxis = 21;

struct MortonEntry {
    std::uint64_t code;
    TriangleId triangle;

    friend bool operator<(const MortonEntry& a, const MortonEntry& b) {
        return a.code != b.code ? a.code < b.code : a.triangle < b.triangle;
    }
    bool operator==(const MortonEntry&) const = default;
};

// Spreads the low 21 bits of v so that bit i lands at bit 3i.
inline std::uint64_t spread_bits_3(std::uint64_t v) {
    v &= 0x1fffff;
    v = (v | v << 32) & 0x1f00000000ffffULL;
    v = (v | v << 16) & 0x1f0000ff0000ffULL;
    v = (v | v << 8) & 0x100f00f00f00f00fULL;
    v = (v | v << 4) & 0x10c30c30c30c30c3ULL;
    v = (v | v << 2) & 0x1249249249249249ULL;
    return v;
}

// x occupies the most significant bit of each triple.
inline std::uint64_t morton_encode(std::uint32_t x, std::uint32_t y, std::uint32_t z) {
    return spread_bits_3(x) << 2 | spread_bits_3(y) << 1 | spread_bits_3(z);
}

template <typename Real>
std::uint32_t quantize_axis(Real value, Real lo, Real hi) {
    constexpr std::uint32_t kMax = (1u << kMortonBitsPerAxis) - 1;
    if (!(hi > lo)) return 0;
    const double u = (double(value) - double(lo)) / (double(hi) - double(lo));
    const double scaled = u * double(1u << kMortonBitsPerAxis);
    if (!(scaled > 0)) return 0;
    return std::min<std::uint32_t>(kMax, static_cast<std::uint32_t>(scaled));
}

// Morton codes of triangle centroids quantized over the scene box of the mesh,
// sorted by (code, triangle id).
template <typename Real>
std::vector<MortonEntry> morton_codes(const TriangleMesh<Real>& mesh) {
    std::vector<Vec3<Real>> centroids(mesh.triangle_count());
    Aabb<Real> scene;
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        const auto tri = mesh.triangle(t);
        centroids[t] = (tri[0] + tri[1] + tri[2]) / Real(3);
        scene.expand(centroids[t]);
    }
    std::vector<MortonEntry> out(mesh.triangle_count());
    for (std::size_t t = 0; t < centroids.size(); ++t) {
        const auto& c = centroids[t];
        out[t] = {morton_encode(quantize_axis(c.x(), scene.min.x(), scene.max.x()),
                                quantize_axis(c.y(), scene.min.y(), scene.max.y()),
                                quantize_axis(c.z(), scene.min.z(), scene.max.z())),
                  static_cast<TriangleId>(t)};
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace meshdist
