#pragma once

#include "sdmc/types.hpp"

#include <Eigen/Geometry>

#include <limits>
#include <memory>
#include <variant>

namespace sdmc {

class SdfNode;
using SdfPtr = std::shared_ptr<const SdfNode>;

// ---------------------------------------------------------------------------
// Node payloads. All lengths in cm. Shapes are defined about the origin and
// positioned with transform nodes.
// ---------------------------------------------------------------------------

struct SphereParams {
    double radius = 0.0;
    bool operator==(const SphereParams&) const = default;
};

struct BoxParams {
    Vec3 half_extents = Vec3::Zero();
    bool operator==(const BoxParams&) const = default;
};

struct CapsuleParams {
    Vec3 a = Vec3::Zero();
    Vec3 b = Vec3::Zero();
    double radius = 0.0;
    bool operator==(const CapsuleParams&) const = default;
};

/// Capped cylinder along the z axis.
struct CylinderParams {
    double half_height = 0.0;
    double radius = 0.0;
    bool operator==(const CylinderParams&) const = default;
};

/// Torus about the z axis.
struct TorusParams {
    double major_radius = 0.0;
    double minor_radius = 0.0;
    bool operator==(const TorusParams&) const = default;
};

enum class CsgKind { Union, SmoothUnion, Intersection, Subtraction };

struct CsgParams {
    CsgKind kind = CsgKind::Union;
    double smooth_k = 0.0;  // blending width, SmoothUnion only
    SdfPtr lhs;
    SdfPtr rhs;
};

struct TranslateParams {
    Vec3 offset = Vec3::Zero();
    SdfPtr child;
};

struct RotateParams {
    Vec3 axis = Vec3::UnitZ();
    double angle = 0.0;  // radians
    Eigen::Matrix3d inverse;  // derived: rotates points into the child frame
    SdfPtr child;
};

struct ElongateParams {
    Vec3 amount = Vec3::Zero();
    SdfPtr child;
};

/// Twist about the z axis; rate in rad/cm.
struct TwistParams {
    double rate = 0.0;
    SdfPtr child;
};

/// Bend in the x-y plane; rate in rad/cm.
struct BendParams {
    double rate = 0.0;
    SdfPtr child;
};

struct RepeatParams {
    Vec3 period = Vec3::Zero();
    SdfPtr child;
};

struct DisplaceParams {
    double amplitude = 0.0;
    double frequency = 0.0;  // rad/cm
    SdfPtr child;
};

using SdfShape = std::variant<SphereParams, BoxParams, CapsuleParams, CylinderParams,
                              TorusParams, CsgParams, TranslateParams, RotateParams,
                              ElongateParams, TwistParams, BendParams, RepeatParams,
                              DisplaceParams>;

/// Immutable expression tree of primitives, CSG operators and transforms.
/// Safe for concurrent read-only evaluation.
class SdfNode {
public:
    SdfShape shape;
    int material = -1;  // index into the scene material table; -1 on interior nodes

    /// True when |evaluate| never overestimates the distance to the surface,
    /// so sphere tracing may take the full step. Twist, bend, displace, repeat
    /// and smooth union only give a conservative bound and need a safety factor.
    bool step_safe = true;

    SdfNode(SdfShape s, bool safe) : shape(std::move(s)), step_safe(safe) {}
};

// Builders. Each validates its parameters and throws ValidationError on
// non-positive radii, extents or periods.
SdfPtr make_sphere(double radius);
SdfPtr make_box(const Vec3& half_extents);
SdfPtr make_capsule(const Vec3& a, const Vec3& b, double radius);
SdfPtr make_cylinder(double half_height, double radius);
SdfPtr make_torus(double major_radius, double minor_radius);

SdfPtr make_union(SdfPtr lhs, SdfPtr rhs);
SdfPtr make_smooth_union(SdfPtr lhs, SdfPtr rhs, double k);
SdfPtr make_intersection(SdfPtr lhs, SdfPtr rhs);
SdfPtr make_subtraction(SdfPtr lhs, SdfPtr rhs);

SdfPtr make_translate(SdfPtr child, const Vec3& offset);
SdfPtr make_rotate(SdfPtr child, const Vec3& axis, double angle);
SdfPtr make_elongate(SdfPtr child, const Vec3& amount);
SdfPtr make_twist(SdfPtr child, double rate);
SdfPtr make_bend(SdfPtr child, double rate);
SdfPtr make_repeat(SdfPtr child, const Vec3& period);
SdfPtr make_displace(SdfPtr child, double amplitude, double frequency);

/// Shallow copy with the material id replaced (nodes stay immutable).
SdfPtr with_material(const SdfPtr& node, int material);

/// Structural equality, used by the scene round-trip checks.
bool node_equal(const SdfNode& a, const SdfNode& b);

/// Signed distance at p: negative inside, positive outside, zero on the surface.
double evaluate(const SdfNode& node, const Vec3& p);

/// Unit surface normal from 6-point central differences with spacing eps.
/// Throws DegenerateNormalError when the gradient magnitude is below 1e-12.
Vec3 normal(const SdfNode& node, const Vec3& p, double eps);

struct HitReport {
    bool hit = false;
    double t = 0.0;
    int steps = 0;
};

/// March from origin along dir (unit) by the current |distance| until it drops
/// below delta (hit) or the ray passes t_max / runs out of steps. Trees that
/// are not step_safe advance by safety * |distance|.
HitReport sphere_trace(const SdfNode& node, const Vec3& origin, const Vec3& dir,
                       double delta, int max_steps,
                       double t_max = std::numeric_limits<double>::infinity(),
                       double safety = 0.9);

}  // namespace sdmc
