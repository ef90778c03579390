#pragma once

#include <Eigen/Core>

#include <cmath>
#include <stdexcept>
#include <string>

namespace sdmc {

using Vec3 = Eigen::Vector3d;
using Vec3i = Eigen::Vector3i;

/// Scene document is syntactically broken (bad JSON, missing/ill-typed key).
class ParseError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Scene document is well formed but violates a type invariant.
class ValidationError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Binary grid file is malformed (bad magic, version, or payload length).
class FormatError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// SDF gradient vanished where a surface normal was requested.
class DegenerateNormalError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline bool is_unit(const Vec3& v, double tol = 1e-12)
{
    return std::abs(v.norm() - 1.0) <= tol;
}

/// Axis-aligned box. Doubles as the simulation bounding volume; sdf() is the
/// exact signed distance to its surface (negative inside).
struct Aabb {
    Vec3 lo = Vec3::Zero();
    Vec3 hi = Vec3::Zero();

    Vec3 center() const { return 0.5 * (lo + hi); }
    Vec3 half_extents() const { return 0.5 * (hi - lo); }
    double diagonal() const { return (hi - lo).norm(); }

    bool contains(const Vec3& p) const
    {
        return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all();
    }

    double sdf(const Vec3& p) const
    {
        const Vec3 q = (p - center()).cwiseAbs() - half_extents();
        const double outside = q.cwiseMax(0.0).norm();
        const double inside = std::min(q.maxCoeff(), 0.0);
        return outside + inside;
    }
};

/// Per-medium optical properties. Units: mu_s, mu_a in 1/cm; g and n dimensionless.
struct OpticalProps {
    double mu_s = 0.0;
    double mu_a = 0.0;
    double g = 0.0;
    double n = 1.0;

    double mu_t() const { return mu_s + mu_a; }
    double albedo() const { return mu_s / mu_t(); }  // only meaningful when mu_t > 0

    bool operator==(const OpticalProps&) const = default;
};

/// Throws ValidationError naming `label` when any coefficient is out of range.
void validate_props(const OpticalProps& props, const std::string& label);

}  // namespace sdmc
