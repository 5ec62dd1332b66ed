#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "aabb.hpp"

namespace meshdist {

template <typename Real>
struct DistanceBounds {
    Real lower;
    Real upper;
};

namespace detail {

template <typename Real>
struct Interval {
    Real lo, hi;
};

// Gap between two intervals along one axis, zero when they overlap.
template <typename Real>
inline Real axis_gap(Interval<Real> a, Interval<Real> b) {
    if (a.lo <= b.hi && b.lo <= a.hi) return Real(0);
    return std::min(std::abs(a.lo - b.hi), std::abs(a.hi - b.lo));
}

// Largest separation between points of two intervals along one axis.
template <typename Real>
inline Real axis_span(Interval<Real> a, Interval<Real> b) {
    return std::max(std::abs(a.lo - b.hi), std::abs(a.hi - b.lo));
}

// Projection of a box onto `axis`: the full interval (0), or the min (1) or
// max (2) face plane.
template <typename Real>
inline Interval<Real> projection(const Aabb<Real>& box, int axis, int variant) {
    switch (variant) {
    case 1: return {box.min[axis], box.min[axis]};
    case 2: return {box.max[axis], box.max[axis]};
    default: return {box.min[axis], box.max[axis]};
    }
}

// Variant of face f's projection on `axis`.
inline constexpr int face_variant(int face, int axis) { return (face >> 1) == axis ? 1 + (face & 1) : 0; }

template <typename Real>
inline void require_tight(const Aabb<Real>& a, const Aabb<Real>& b) {
    if (!a.tight || !b.tight) throw TightnessError("enhanced AABB bounds require tight boxes");
}

// Squared per-face-pair distances: for each of the 36 face pairs, the sum over
// axes of kernel(projection_a, projection_b)^2. Each axis has only 3x3 distinct
// projection combinations, so those are evaluated once.
template <typename Real, typename Kernel>
inline std::array<Real, 36> face_pair_sums(const Aabb<Real>& a, const Aabb<Real>& b, Kernel kernel) {
    Real sq[3][3][3];
    for (int axis = 0; axis < 3; ++axis)
        for (int va = 0; va < 3; ++va)
            for (int vb = 0; vb < 3; ++vb) {
                const Real f = kernel(projection(a, axis, va), projection(b, axis, vb));
                sq[axis][va][vb] = f * f;
            }
    std::array<Real, 36> out;
    for (int fa = 0; fa < 6; ++fa)
        for (int fb = 0; fb < 6; ++fb) {
            Real s = sq[0][face_variant(fa, 0)][face_variant(fb, 0)];
            s += sq[1][face_variant(fa, 1)][face_variant(fb, 1)];
            s += sq[2][face_variant(fa, 2)][face_variant(fb, 2)];
            out[fa * 6 + fb] = s;
        }
    return out;
}

} // namespace detail

// Exact minimum distance between two boxes; the conventional lower bound of the
// minimum distance between their contents.
template <typename Real>
Real aabb_min_lower(const Aabb<Real>& a, const Aabb<Real>& b) {
    const Real gx = detail::axis_gap<Real>({a.min.x(), a.max.x()}, {b.min.x(), b.max.x()});
    const Real gy = detail::axis_gap<Real>({a.min.y(), a.max.y()}, {b.min.y(), b.max.y()});
    const Real gz = detail::axis_gap<Real>({a.min.z(), a.max.z()}, {b.min.z(), b.max.z()});
    return std::sqrt(squared_length(gx, gy, gz));
}

// Exact maximum distance between two boxes (attained at corners). Serves both as
// the upper bound of the maximum distance and as the conventional upper bound of
// the minimum distance.
template <typename Real>
Real aabb_max_upper(const Aabb<Real>& a, const Aabb<Real>& b) {
    const Real fx = detail::axis_span<Real>({a.min.x(), a.max.x()}, {b.min.x(), b.max.x()});
    const Real fy = detail::axis_span<Real>({a.min.y(), a.max.y()}, {b.min.y(), b.max.y()});
    const Real fz = detail::axis_span<Real>({a.min.z(), a.max.z()}, {b.min.z(), b.max.z()});
    return std::sqrt(squared_length(fx, fy, fz));
}

// Upper bound of the minimum distance between the contents of two tight boxes:
// each face of a tight box holds a content vertex, so the smallest
// face-to-face maximum distance over all 36 face pairs bounds the minimum.
template <typename Real>
Real enhanced_min_upper(const Aabb<Real>& a, const Aabb<Real>& b) {
    detail::require_tight(a, b);
    const auto sums = detail::face_pair_sums(a, b, detail::axis_span<Real>);
    return std::sqrt(*std::min_element(sums.begin(), sums.end()));
}

// Lower bound of the maximum distance between the contents of two tight boxes:
// the largest face-to-face minimum distance over all 36 face pairs.
template <typename Real>
Real enhanced_max_lower(const Aabb<Real>& a, const Aabb<Real>& b) {
    detail::require_tight(a, b);
    const auto sums = detail::face_pair_sums(a, b, detail::axis_gap<Real>);
    return std::sqrt(*std::max_element(sums.begin(), sums.end()));
}

} // namespace meshdist
