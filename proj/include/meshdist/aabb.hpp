#pragma once

#include <algorithm>
#include <array>
#include <limits>

#include "common.hpp"

namespace meshdist {

// Axis-aligned box [min, max]. `tight` asserts that every one of the six faces
// touches a vertex of the enclosed geometry, which the enhanced distance bounds
// rely on. Boxes are never inflated.
template <typename Real>
struct Aabb {
    Vec3<Real> min = Vec3<Real>::Constant(std::numeric_limits<Real>::infinity());
    Vec3<Real> max = Vec3<Real>::Constant(-std::numeric_limits<Real>::infinity());
    bool tight = false;

    static Aabb of_point(const Vec3<Real>& p) { return {p, p, true}; }

    static Aabb of_triangle(const std::array<Vec3<Real>, 3>& t) {
        Aabb box{t[0], t[0], true};
        box.expand(t[1]);
        box.expand(t[2]);
        return box;
    }

    void expand(const Vec3<Real>& p) {
        min = min.cwiseMin(p);
        max = max.cwiseMax(p);
    }

    // Union of two boxes; the result is tight when both inputs are.
    static Aabb merge(const Aabb& a, const Aabb& b) { return {a.min.cwiseMin(b.min), a.max.cwiseMax(b.max), a.tight && b.tight}; }

    bool valid() const { return (min.array() <= max.array()).all(); }

    bool contains(const Aabb& o) const { return (min.array() <= o.min.array()).all() && (o.max.array() <= max.array()).all(); }

    Vec3<Real> extent() const { return max - min; }
    Vec3<Real> center() const { return (min + max) * Real(0.5); }

    Real surface_area() const {
        const Vec3<Real> e = extent();
        return Real(2) * (e.x() * e.y() + e.y() * e.z() + e.z() * e.x());
    }

    // Face rectangle `f` in [0, 6): faces 2*axis and 2*axis+1 are the min and max
    // planes of that axis, represented as a box with zero extent along the axis.
    Aabb face(int f) const {
        const int axis = f >> 1;
        Aabb r = *this;
        if (f & 1)
            r.min[axis] = max[axis];
        else
            r.max[axis] = min[axis];
        return r;
    }

    bool operator==(const Aabb&) const = default;
};

} // namespace meshdist
