#include "sdmc/sdf.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace sdmc {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require(bool ok, const std::string& what)
{
    if (!ok) throw ValidationError(what);
}

void require_child(const SdfPtr& child, const char* op)
{
    if (!child) throw ValidationError(std::string(op) + ": missing child node");
}

double clampd(double x, double lo, double hi) { return std::min(std::max(x, lo), hi); }

}  // namespace

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

SdfPtr make_sphere(double radius)
{
    require(radius > 0.0, "sphere: radius must be > 0");
    return std::make_shared<SdfNode>(SphereParams{radius}, true);
}

SdfPtr make_box(const Vec3& half_extents)
{
    require((half_extents.array() > 0.0).all(), "box: half_extents must be > 0 componentwise");
    return std::make_shared<SdfNode>(BoxParams{half_extents}, true);
}

SdfPtr make_capsule(const Vec3& a, const Vec3& b, double radius)
{
    require(radius > 0.0, "capsule: radius must be > 0");
    require((b - a).squaredNorm() > 0.0, "capsule: endpoints must be distinct");
    return std::make_shared<SdfNode>(CapsuleParams{a, b, radius}, true);
}

SdfPtr make_cylinder(double half_height, double radius)
{
    require(half_height > 0.0, "cylinder: half_height must be > 0");
    require(radius > 0.0, "cylinder: radius must be > 0");
    return std::make_shared<SdfNode>(CylinderParams{half_height, radius}, true);
}

SdfPtr make_torus(double major_radius, double minor_radius)
{
    require(major_radius > 0.0, "torus: major_radius must be > 0");
    require(minor_radius > 0.0, "torus: minor_radius must be > 0");
    return std::make_shared<SdfNode>(TorusParams{major_radius, minor_radius}, true);
}

namespace {

SdfPtr make_csg(CsgKind kind, SdfPtr lhs, SdfPtr rhs, double k, bool safe)
{
    require_child(lhs, "csg");
    require_child(rhs, "csg");
    const bool children_safe = lhs->step_safe && rhs->step_safe;
    return std::make_shared<SdfNode>(CsgParams{kind, k, std::move(lhs), std::move(rhs)},
                                     safe && children_safe);
}

}  // namespace

SdfPtr make_union(SdfPtr lhs, SdfPtr rhs)
{
    return make_csg(CsgKind::Union, std::move(lhs), std::move(rhs), 0.0, true);
}

SdfPtr make_smooth_union(SdfPtr lhs, SdfPtr rhs, double k)
{
    require(k > 0.0, "smooth_union: k must be > 0");
    // The blended interior distance can overestimate, so the tree is not step_safe.
    return make_csg(CsgKind::SmoothUnion, std::move(lhs), std::move(rhs), k, false);
}

SdfPtr make_intersection(SdfPtr lhs, SdfPtr rhs)
{
    return make_csg(CsgKind::Intersection, std::move(lhs), std::move(rhs), 0.0, true);
}

SdfPtr make_subtraction(SdfPtr lhs, SdfPtr rhs)
{
    return make_csg(CsgKind::Subtraction, std::move(lhs), std::move(rhs), 0.0, true);
}

SdfPtr make_translate(SdfPtr child, const Vec3& offset)
{
    require_child(child, "translate");
    const bool safe = child->step_safe;
    return std::make_shared<SdfNode>(TranslateParams{offset, std::move(child)}, safe);
}

SdfPtr make_rotate(SdfPtr child, const Vec3& axis, double angle)
{
    require_child(child, "rotate");
    require(axis.norm() > 0.0, "rotate: axis must be non-zero");
    RotateParams params;
    params.axis = axis.normalized();
    params.angle = angle;
    params.inverse = Eigen::AngleAxisd(-angle, params.axis).toRotationMatrix();
    const bool safe = child->step_safe;
    params.child = std::move(child);
    return std::make_shared<SdfNode>(std::move(params), safe);
}

SdfPtr make_elongate(SdfPtr child, const Vec3& amount)
{
    require_child(child, "elongate");
    require((amount.array() >= 0.0).all(), "elongate: amount must be >= 0 componentwise");
    const bool safe = child->step_safe;
    return std::make_shared<SdfNode>(ElongateParams{amount, std::move(child)}, safe);
}

SdfPtr make_twist(SdfPtr child, double rate)
{
    require_child(child, "twist");
    return std::make_shared<SdfNode>(TwistParams{rate, std::move(child)}, false);
}

SdfPtr make_bend(SdfPtr child, double rate)
{
    require_child(child, "bend");
    return std::make_shared<SdfNode>(BendParams{rate, std::move(child)}, false);
}

SdfPtr make_repeat(SdfPtr child, const Vec3& period)
{
    require_child(child, "repeat");
    require((period.array() > 0.0).all(), "repeat: period must be > 0 componentwise");
    return std::make_shared<SdfNode>(RepeatParams{period, std::move(child)}, false);
}

SdfPtr make_displace(SdfPtr child, double amplitude, double frequency)
{
    require_child(child, "displace");
    return std::make_shared<SdfNode>(DisplaceParams{amplitude, frequency, std::move(child)},
                                     false);
}

SdfPtr with_material(const SdfPtr& node, int material)
{
    require_child(node, "with_material");
    auto copy = std::make_shared<SdfNode>(*node);
    copy->material = material;
    return copy;
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

double evaluate(const SdfNode& node, const Vec3& p)
{
    return std::visit(
        Overloaded{
            [&](const SphereParams& s) { return p.norm() - s.radius; },
            [&](const BoxParams& b) {
                const Vec3 q = p.cwiseAbs() - b.half_extents;
                return q.cwiseMax(0.0).norm() + std::min(q.maxCoeff(), 0.0);
            },
            [&](const CapsuleParams& c) {
                const Vec3 pa = p - c.a;
                const Vec3 ba = c.b - c.a;
                const double h = clampd(pa.dot(ba) / ba.squaredNorm(), 0.0, 1.0);
                return (pa - ba * h).norm() - c.radius;
            },
            [&](const CylinderParams& c) {
                const double dr = std::hypot(p.x(), p.y()) - c.radius;
                const double dz = std::abs(p.z()) - c.half_height;
                const double outside = std::hypot(std::max(dr, 0.0), std::max(dz, 0.0));
                return outside + std::min(std::max(dr, dz), 0.0);
            },
            [&](const TorusParams& t) {
                const double qx = std::hypot(p.x(), p.y()) - t.major_radius;
                return std::hypot(qx, p.z()) - t.minor_radius;
            },
            [&](const CsgParams& c) {
                const double d1 = evaluate(*c.lhs, p);
                switch (c.kind) {
                    case CsgKind::Union:
                        return std::min(d1, evaluate(*c.rhs, p));
                    case CsgKind::Intersection:
                        return std::max(d1, evaluate(*c.rhs, p));
                    case CsgKind::Subtraction:
                        return std::max(d1, -evaluate(*c.rhs, p));
                    case CsgKind::SmoothUnion: {
                        const double d2 = evaluate(*c.rhs, p);
                        const double h = clampd(0.5 + 0.5 * (d2 - d1) / c.smooth_k, 0.0, 1.0);
                        return d2 + (d1 - d2) * h - c.smooth_k * h * (1.0 - h);
                    }
                }
                return d1;  // unreachable
            },
            [&](const TranslateParams& t) { return evaluate(*t.child, p - t.offset); },
            [&](const RotateParams& r) { return evaluate(*r.child, r.inverse * p); },
            [&](const ElongateParams& e) {
                const Vec3 q = p - p.cwiseMax(-e.amount).cwiseMin(e.amount);
                return evaluate(*e.child, q);
            },
            [&](const TwistParams& t) {
                const double angle = t.rate * p.z();
                const double c = std::cos(angle), s = std::sin(angle);
                const Vec3 q(c * p.x() - s * p.y(), s * p.x() + c * p.y(), p.z());
                return evaluate(*t.child, q);
            },
            [&](const BendParams& b) {
                const double angle = b.rate * p.x();
                const double c = std::cos(angle), s = std::sin(angle);
                const Vec3 q(c * p.x() - s * p.y(), s * p.x() + c * p.y(), p.z());
                return evaluate(*b.child, q);
            },
            [&](const RepeatParams& r) {
                Vec3 q;
                for (int i = 0; i < 3; ++i) {
                    const double per = r.period[i];
                    q[i] = p[i] - per * std::round(p[i] / per);
                }
                return evaluate(*r.child, q);
            },
            [&](const DisplaceParams& d) {
                const double ripple = d.amplitude * std::sin(d.frequency * p.x()) *
                                      std::sin(d.frequency * p.y()) *
                                      std::sin(d.frequency * p.z());
                return evaluate(*d.child, p) + ripple;
            },
        },
        node.shape);
}

Vec3 normal(const SdfNode& node, const Vec3& p, double eps)
{
    Vec3 grad;
    for (int axis = 0; axis < 3; ++axis) {
        Vec3 step = Vec3::Zero();
        step[axis] = eps;
        grad[axis] = evaluate(node, p + step) - evaluate(node, p - step);
    }
    grad /= 2.0 * eps;
    const double magnitude = grad.norm();
    if (magnitude < 1e-12)
        throw DegenerateNormalError("sdf normal: gradient vanished at a singular point");
    return grad / magnitude;
}

HitReport sphere_trace(const SdfNode& node, const Vec3& origin, const Vec3& dir,
                       double delta, int max_steps, double t_max, double safety)
{
    const double factor = node.step_safe ? 1.0 : safety;
    HitReport report;
    double t = 0.0;
    while (report.steps < max_steps) {
        const double d = evaluate(node, origin + t * dir);
        ++report.steps;
        if (std::abs(d) <= delta) {
            report.hit = true;
            report.t = t;
            return report;
        }
        t += factor * std::abs(d);
        if (t > t_max) {
            report.t = t;
            return report;
        }
    }
    report.t = t;
    return report;
}

// ---------------------------------------------------------------------------
// Structural equality
// ---------------------------------------------------------------------------

namespace {

bool shape_equal(const SdfShape& a, const SdfShape& b)
{
    if (a.index() != b.index()) return false;
    return std::visit(
        Overloaded{
            [&](const SphereParams& x) { return x == std::get<SphereParams>(b); },
            [&](const BoxParams& x) { return x == std::get<BoxParams>(b); },
            [&](const CapsuleParams& x) { return x == std::get<CapsuleParams>(b); },
            [&](const CylinderParams& x) { return x == std::get<CylinderParams>(b); },
            [&](const TorusParams& x) { return x == std::get<TorusParams>(b); },
            [&](const CsgParams& x) {
                const auto& y = std::get<CsgParams>(b);
                return x.kind == y.kind && x.smooth_k == y.smooth_k &&
                       node_equal(*x.lhs, *y.lhs) && node_equal(*x.rhs, *y.rhs);
            },
            [&](const TranslateParams& x) {
                const auto& y = std::get<TranslateParams>(b);
                return x.offset == y.offset && node_equal(*x.child, *y.child);
            },
            [&](const RotateParams& x) {
                const auto& y = std::get<RotateParams>(b);
                return x.axis == y.axis && x.angle == y.angle && node_equal(*x.child, *y.child);
            },
            [&](const ElongateParams& x) {
                const auto& y = std::get<ElongateParams>(b);
                return x.amount == y.amount && node_equal(*x.child, *y.child);
            },
            [&](const TwistParams& x) {
                const auto& y = std::get<TwistParams>(b);
                return x.rate == y.rate && node_equal(*x.child, *y.child);
            },
            [&](const BendParams& x) {
                const auto& y = std::get<BendParams>(b);
                return x.rate == y.rate && node_equal(*x.child, *y.child);
            },
            [&](const RepeatParams& x) {
                const auto& y = std::get<RepeatParams>(b);
                return x.period == y.period && node_equal(*x.child, *y.child);
            },
            [&](const DisplaceParams& x) {
                const auto& y = std::get<DisplaceParams>(b);
                return x.amplitude == y.amplitude && x.frequency == y.frequency &&
                       node_equal(*x.child, *y.child);
            },
        },
        a);
}

}  // namespace

bool node_equal(const SdfNode& a, const SdfNode& b)
{
    return a.material == b.material && shape_equal(a.shape, b.shape);
}

}  // namespace sdmc
