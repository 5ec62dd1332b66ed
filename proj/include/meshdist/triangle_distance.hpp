#pragma once

#include <algorithm>
#include <array>
#include <limits>

#include "common.hpp"

namespace meshdist {

template <typename Real>
using Triangle = std::array<Vec3<Real>, 3>;

// Distance between two triangles and the points on each that realize it.
template <typename Real>
struct PairDistance {
    Real distance;
    Vec3<Real> p; // on the first triangle
    Vec3<Real> q; // on the second triangle
};

namespace detail {

template <typename Real>
inline Real clamp01(Real v) {
    return v < Real(0) ? Real(0) : (v > Real(1) ? Real(1) : v);
}

// Point at parameter s on segment [a, b], returning the endpoints exactly at 0 and 1.
template <typename Real>
inline Vec3<Real> lerp_exact(const Vec3<Real>& a, const Vec3<Real>& b, Real s) {
    if (s == Real(0)) return a;
    if (s == Real(1)) return b;
    return a + (b - a) * s;
}

// Closest points between segments [p1, q1] and [p2, q2]. Zero-length segments are
// handled as points.
template <typename Real>
inline std::pair<Vec3<Real>, Vec3<Real>> closest_segment_segment(const Vec3<Real>& p1, const Vec3<Real>& q1,
                                                                const Vec3<Real>& p2, const Vec3<Real>& q2) {
    const Vec3<Real> d1 = q1 - p1, d2 = q2 - p2, r = p1 - p2;
    const Real a = d1.dot(d1), e = d2.dot(d2), f = d2.dot(r);
    Real s = 0, t = 0;
    if (a == Real(0) && e == Real(0)) {
        // both points
    } else if (a == Real(0)) {
        t = clamp01(f / e);
    } else {
        const Real c = d1.dot(r);
        if (e == Real(0)) {
            s = clamp01(-c / a);
        } else {
            const Real b = d1.dot(d2);
            const Real denom = a * e - b * b;
            s = denom > Real(0) ? clamp01((b * f - c * e) / denom) : Real(0);
            t = (b * s + f) / e;
            if (t < Real(0)) {
                t = 0;
                s = clamp01(-c / a);
            } else if (t > Real(1)) {
                t = 1;
                s = clamp01((b - c) / a);
            }
        }
    }
    return {lerp_exact(p1, q1, s), lerp_exact(p2, q2, t)};
}

// Closest point on triangle abc to p (Voronoi-region walk). Triangles whose edge
// vectors are parallel fall back to their three edges.
template <typename Real>
inline Vec3<Real> closest_point_on_triangle(const Vec3<Real>& p, const Triangle<Real>& tri) {
    const Vec3<Real>& a = tri[0];
    const Vec3<Real>& b = tri[1];
    const Vec3<Real>& c = tri[2];
    const Vec3<Real> ab = b - a, ac = c - a;

    if (ab.cross(ac).squaredNorm() == Real(0)) {
        Vec3<Real> best = a;
        Real best_d = std::numeric_limits<Real>::infinity();
        const std::array<std::pair<Vec3<Real>, Vec3<Real>>, 3> edges{{{a, b}, {b, c}, {c, a}}};
        for (const auto& [s0, s1] : edges) {
            const Vec3<Real> x = closest_segment_segment(p, p, s0, s1).second;
            const Real d = squared_length(p.x() - x.x(), p.y() - x.y(), p.z() - x.z());
            if (d < best_d) {
                best_d = d;
                best = x;
            }
        }
        return best;
    }

    const Vec3<Real> ap = p - a;
    const Real d1 = ab.dot(ap), d2 = ac.dot(ap);
    if (d1 <= 0 && d2 <= 0) return a;

    const Vec3<Real> bp = p - b;
    const Real d3 = ab.dot(bp), d4 = ac.dot(bp);
    if (d3 >= 0 && d4 <= d3) return b;

    const Real vc = d1 * d4 - d3 * d2;
    if (vc <= 0 && d1 >= 0 && d3 <= 0) return lerp_exact(a, b, d1 / (d1 - d3));

    const Vec3<Real> cp = p - c;
    const Real d5 = ab.dot(cp), d6 = ac.dot(cp);
    if (d6 >= 0 && d5 <= d6) return c;

    const Real vb = d5 * d2 - d1 * d6;
    if (vb <= 0 && d2 >= 0 && d6 <= 0) return lerp_exact(a, c, d2 / (d2 - d6));

    const Real va = d3 * d6 - d5 * d4;
    if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) return lerp_exact(b, c, (d4 - d3) / ((d4 - d3) + (d5 - d6)));

    const Real denom = Real(1) / (va + vb + vc);
    return a + ab * (vb * denom) + ac * (vc * denom);
}

// Point where segment [p, q] passes strictly through the interior side of the
// plane of `tri` and lands inside it, if any.
template <typename Real>
inline bool segment_crosses_triangle(const Vec3<Real>& p, const Vec3<Real>& q, const Triangle<Real>& tri, Vec3<Real>& hit) {
    const Vec3<Real> n = (tri[1] - tri[0]).cross(tri[2] - tri[0]);
    if (n.squaredNorm() == Real(0)) return false;
    const Real dp = n.dot(p - tri[0]);
    const Real dq = n.dot(q - tri[0]);
    if (!((dp > 0 && dq < 0) || (dp < 0 && dq > 0))) return false;
    const Vec3<Real> x = p + (q - p) * (dp / (dp - dq));
    for (int i = 0; i < 3; ++i) {
        const Vec3<Real>& u = tri[i];
        const Vec3<Real>& v = tri[(i + 1) % 3];
        if ((v - u).cross(x - u).dot(n) < 0) return false;
    }
    hit = x;
    return true;
}

} // namespace detail

// Exact minimum distance between two (possibly degenerate) triangles: zero when
// they intersect, otherwise the best of the 9 edge-edge and 6 vertex-face cases.
template <typename Real>
PairDistance<Real> tri_tri_min(const Triangle<Real>& t1, const Triangle<Real>& t2) {
    for (int i = 0; i < 3; ++i) {
        Vec3<Real> hit;
        if (detail::segment_crosses_triangle(t1[i], t1[(i + 1) % 3], t2, hit)) return {Real(0), hit, hit};
        if (detail::segment_crosses_triangle(t2[i], t2[(i + 1) % 3], t1, hit)) return {Real(0), hit, hit};
    }

    Real best = std::numeric_limits<Real>::infinity();
    Vec3<Real> bp = t1[0], bq = t2[0];
    auto consider = [&](const Vec3<Real>& p, const Vec3<Real>& q) {
        const Real d = squared_length(p.x() - q.x(), p.y() - q.y(), p.z() - q.z());
        if (d < best) {
            best = d;
            bp = p;
            bq = q;
        }
    };

    for (int i = 0; i < 3; ++i) {
        consider(t1[i], detail::closest_point_on_triangle(t1[i], t2));
        consider(detail::closest_point_on_triangle(t2[i], t1), t2[i]);
    }
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const auto [p, q] = detail::closest_segment_segment(t1[i], t1[(i + 1) % 3], t2[j], t2[(j + 1) % 3]);
            consider(p, q);
        }
    return {std::sqrt(best), bp, bq};
}

// Exact maximum distance between two triangles, attained at a vertex pair.
template <typename Real>
PairDistance<Real> tri_tri_max(const Triangle<Real>& t1, const Triangle<Real>& t2) {
    PairDistance<Real> out{Real(-1), t1[0], t2[0]};
    for (const auto& p : t1)
        for (const auto& q : t2) {
            const Real d = distance(p, q);
            if (d > out.distance) out = {d, p, q};
        }
    return out;
}

} // namespace meshdist
