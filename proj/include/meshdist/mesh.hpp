#pragma once

#include <array>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Geometry>

#include "common.hpp"

namespace meshdist {

using TriangleIndices = std::array<std::uint32_t, 3>;

class DegenerateTriangleError : public Error {
public:
    explicit DegenerateTriangleError(std::vector<std::size_t> faces, const std::string& context = {})
        : Error(context + format(faces)), faces_(std::move(faces)) {}

    // Zero-based indices of the offending faces.
    const std::vector<std::size_t>& faces() const noexcept { return faces_; }

private:
    static std::string format(const std::vector<std::size_t>& faces) {
        std::string msg = "degenerate triangles (repeated vertex index) at faces:";
        for (std::size_t f : faces) msg += " " + std::to_string(f);
        return msg;
    }

    std::vector<std::size_t> faces_;
};

// Indexed triangle soup. Zero-area triangles with distinct indices are allowed;
// triangles that repeat a vertex index are rejected at construction.
template <typename Real>
class TriangleMesh {
public:
    using Point = Vec3<Real>;
    using Triangle = std::array<Point, 3>;

    TriangleMesh() = default;

    TriangleMesh(std::vector<Point> vertices, std::vector<TriangleIndices> triangles)
        : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
        std::vector<std::size_t> bad;
        for (std::size_t f = 0; f < triangles_.size(); ++f) {
            const auto& t = triangles_[f];
            for (auto idx : t) {
                if (idx >= vertices_.size())
                    throw Error("face " + std::to_string(f) + " references vertex " + std::to_string(idx) +
                                " but the mesh has " + std::to_string(vertices_.size()) + " vertices");
            }
            if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) bad.push_back(f);
        }
        if (!bad.empty()) throw DegenerateTriangleError(std::move(bad));
    }

    std::span<const Point> vertices() const noexcept { return vertices_; }
    std::span<const TriangleIndices> triangles() const noexcept { return triangles_; }

    std::size_t vertex_count() const noexcept { return vertices_.size(); }
    std::size_t triangle_count() const noexcept { return triangles_.size(); }
    bool empty() const noexcept { return triangles_.empty(); }

    Triangle triangle(std::size_t t) const {
        const auto& idx = triangles_[t];
        return {vertices_[idx[0]], vertices_[idx[1]], vertices_[idx[2]]};
    }

    bool same_topology(const TriangleMesh& other) const noexcept {
        return vertices_.size() == other.vertices_.size() && triangles_ == other.triangles_;
    }

    template <typename Other>
    TriangleMesh<Other> cast() const {
        std::vector<Vec3<Other>> v;
        v.reserve(vertices_.size());
        for (const auto& p : vertices_) v.push_back(p.template cast<Other>());
        return TriangleMesh<Other>(std::move(v), triangles_);
    }

private:
    std::vector<Point> vertices_;
    std::vector<TriangleIndices> triangles_;
};

template <typename Real>
class RigidTransform {
public:
    RigidTransform() : rotation_(Mat3<Real>::Identity()), translation_(Vec3<Real>::Zero()) {}

    RigidTransform(const Mat3<Real>& rotation, const Vec3<Real>& translation)
        : rotation_(rotation), translation_(translation) {
        const Mat3<double> r = rotation.template cast<double>();
        const double err = (r.transpose() * r - Mat3<double>::Identity()).cwiseAbs().maxCoeff();
        if (!(err <= 1e-6)) throw Error("rotation is not orthonormal (max |RᵀR − I| = " + std::to_string(err) + ")");
    }

    static RigidTransform translation(const Vec3<Real>& t) { return {Mat3<Real>::Identity(), t}; }

    // Rotation by `angle` radians about `axis` passing through `pivot`.
    static RigidTransform rotation_about(const Vec3<Real>& axis, Real angle, const Vec3<Real>& pivot = Vec3<Real>::Zero()) {
        const Mat3<Real> r = Eigen::AngleAxis<Real>(angle, axis.normalized()).toRotationMatrix();
        return {r, pivot - r * pivot};
    }

    const Mat3<Real>& rotation() const noexcept { return rotation_; }
    const Vec3<Real>& translation() const noexcept { return translation_; }

    bool is_identity() const { return rotation_ == Mat3<Real>::Identity() && translation_.isZero(0); }

    Vec3<Real> apply(const Vec3<Real>& p) const { return rotation_ * p + translation_; }

private:
    Mat3<Real> rotation_;
    Vec3<Real> translation_;
};

template <typename Real>
TriangleMesh<Real> apply_transform(const TriangleMesh<Real>& mesh, const RigidTransform<Real>& xf) {
    std::vector<Vec3<Real>> out(mesh.vertices().begin(), mesh.vertices().end());
    // Identity keeps the coordinates bit-for-bit.
    if (!xf.is_identity()) {
        for (auto& p : out) p = xf.apply(p);
    }
    std::vector<TriangleIndices> tris(mesh.triangles().begin(), mesh.triangles().end());
    return TriangleMesh<Real>(std::move(out), std::move(tris));
}

} // namespace meshdist
