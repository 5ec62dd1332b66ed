#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace meshdist {

template <typename Real>
using Vec3 = Eigen::Matrix<Real, 3, 1>;

template <typename Real>
using Mat3 = Eigen::Matrix<Real, 3, 3>;

using TriangleId = std::uint32_t;
using NodeIndex = std::uint64_t;

// Base of every error the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class TopologyMismatchError : public Error {
public:
    explicit TopologyMismatchError(const std::string& what) : Error("topology mismatch: " + what) {}
};

class TightnessError : public Error {
public:
    using Error::Error;
};

class FrontOverflowError : public Error {
public:
    FrontOverflowError(std::size_t requested, std::size_t cap)
        : Error("BVTT front overflow: " + std::to_string(requested) + " entries requested, hard cap is " +
                std::to_string(cap)),
          requested_(requested), cap_(cap) {}

    std::size_t requested() const noexcept { return requested_; }
    std::size_t cap() const noexcept { return cap_; }

private:
    std::size_t requested_;
    std::size_t cap_;
};

class SizeGuardError : public Error {
public:
    SizeGuardError(std::uint64_t pairs, std::uint64_t limit)
        : Error("brute force refused: " + std::to_string(pairs) + " triangle pairs exceeds the guard of " +
                std::to_string(limit) + " (use force to override)"),
          pairs_(pairs) {}

    std::uint64_t pairs() const noexcept { return pairs_; }

private:
    std::uint64_t pairs_;
};

// Squared Euclidean length summed strictly in x, y, z order. Every distance in the
// library goes through these two helpers so that box-corner and vertex-vertex
// distances that are mathematically equal also round identically.
template <typename Real>
inline Real squared_length(Real dx, Real dy, Real dz) {
    Real s = dx * dx;
    s += dy * dy;
    s += dz * dz;
    return s;
}

template <typename Real>
inline Real distance(const Vec3<Real>& p, const Vec3<Real>& q) {
    return std::sqrt(squared_length(p.x() - q.x(), p.y() - q.y(), p.z() - q.z()));
}

} // namespace meshdist
