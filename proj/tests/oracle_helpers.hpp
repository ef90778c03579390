// Test-only oracles: brute-force containment, fixed-step ray marching, random
// scene trees and small statistics helpers. Independent of the library's
// stepping and sampling paths so they can arbitrate them.
#pragma once

#include "sdmc/rng.hpp"
#include "sdmc/sdf.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

namespace oracle {

using sdmc::SdfNode;
using sdmc::SdfPtr;
using sdmc::Vec3;

// ---------------------------------------------------------------------------
// Analytic inside/outside test per primitive, set algebra for CSG, inverse
// point mapping for transforms. Covers the node kinds the property suites
// exercise (primitives, sharp CSG, translate, rotate).
// ---------------------------------------------------------------------------

inline bool contains(const SdfNode& node, const Vec3& p)
{
    struct Visitor {
        const Vec3& p;
        bool operator()(const sdmc::SphereParams& s) const { return p.norm() < s.radius; }
        bool operator()(const sdmc::BoxParams& b) const
        {
            return (p.cwiseAbs().array() < b.half_extents.array()).all();
        }
        bool operator()(const sdmc::CapsuleParams& c) const
        {
            const Vec3 ba = c.b - c.a;
            const double h = std::clamp((p - c.a).dot(ba) / ba.squaredNorm(), 0.0, 1.0);
            return (p - c.a - h * ba).norm() < c.radius;
        }
        bool operator()(const sdmc::CylinderParams& c) const
        {
            return std::hypot(p.x(), p.y()) < c.radius && std::abs(p.z()) < c.half_height;
        }
        bool operator()(const sdmc::TorusParams& t) const
        {
            const double q = std::hypot(p.x(), p.y()) - t.major_radius;
            return std::hypot(q, p.z()) < t.minor_radius;
        }
        bool operator()(const sdmc::CsgParams& c) const
        {
            const bool in_a = contains(*c.lhs, p);
            const bool in_b = contains(*c.rhs, p);
            switch (c.kind) {
                case sdmc::CsgKind::Union: return in_a || in_b;
                case sdmc::CsgKind::Intersection: return in_a && in_b;
                case sdmc::CsgKind::Subtraction: return in_a && !in_b;
                case sdmc::CsgKind::SmoothUnion: return in_a || in_b;  // not exercised
            }
            return false;
        }
        bool operator()(const sdmc::TranslateParams& t) const
        {
            return contains(*t.child, Vec3(p - t.offset));
        }
        bool operator()(const sdmc::RotateParams& r) const
        {
            const Eigen::Matrix3d inv =
                Eigen::AngleAxisd(-r.angle, r.axis).toRotationMatrix();
            return contains(*r.child, Vec3(inv * p));
        }
        bool operator()(const sdmc::ElongateParams& e) const
        {
            const Vec3 q = p - p.cwiseMax(-e.amount).cwiseMin(e.amount);
            return contains(*e.child, q);
        }
        bool operator()(const sdmc::TwistParams&) const { return false; }    // not exercised
        bool operator()(const sdmc::BendParams&) const { return false; }     // not exercised
        bool operator()(const sdmc::RepeatParams&) const { return false; }   // not exercised
        bool operator()(const sdmc::DisplaceParams&) const { return false; } // not exercised
    };
    return std::visit(Visitor{p}, node.shape);
}

// ---------------------------------------------------------------------------
// Fixed-step ray march: walk evaluate() in steps of `step` until the sign
// flips, then bisect the bracket. Brute force, no sphere-trace logic shared.
// ---------------------------------------------------------------------------

inline std::optional<double> ray_march_hit(const SdfNode& node, const Vec3& origin,
                                           const Vec3& dir, double step, double t_max)
{
    double t_prev = 0.0;
    double d_prev = sdmc::evaluate(node, origin);
    for (double t = step; t <= t_max; t += step) {
        const double d = sdmc::evaluate(node, origin + t * dir);
        if ((d > 0.0) != (d_prev > 0.0)) {
            double lo = t_prev, hi = t;
            for (int i = 0; i < 60; ++i) {
                const double mid = 0.5 * (lo + hi);
                const double dm = sdmc::evaluate(node, origin + mid * dir);
                if ((dm > 0.0) == (d_prev > 0.0)) lo = mid;
                else hi = mid;
            }
            return 0.5 * (lo + hi);
        }
        t_prev = t;
        d_prev = d;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Random scene trees over the exact-distance node kinds.
// ---------------------------------------------------------------------------

inline SdfPtr random_primitive(sdmc::Rng& rng)
{
    auto range = [&](double lo, double hi) { return lo + rng.uniform() * (hi - lo); };
    switch (rng.next_u64() % 5) {
        case 0: return sdmc::make_sphere(range(0.3, 1.0));
        case 1:
            return sdmc::make_box(Vec3(range(0.3, 0.9), range(0.3, 0.9), range(0.3, 0.9)));
        case 2: {
            const Vec3 a(range(-0.5, 0.5), range(-0.5, 0.5), range(-0.5, 0.5));
            const Vec3 b = a + Vec3(range(0.2, 0.8), range(0.2, 0.8), range(0.2, 0.8));
            return sdmc::make_capsule(a, b, range(0.15, 0.5));
        }
        case 3: return sdmc::make_cylinder(range(0.3, 0.9), range(0.2, 0.7));
        default: return sdmc::make_torus(range(0.5, 1.0), range(0.15, 0.4));
    }
}

inline SdfPtr random_tree(sdmc::Rng& rng, int depth)
{
    auto range = [&](double lo, double hi) { return lo + rng.uniform() * (hi - lo); };
    if (depth <= 0 || rng.uniform() < 0.35) return random_primitive(rng);
    switch (rng.next_u64() % 5) {
        case 0: return sdmc::make_union(random_tree(rng, depth - 1), random_tree(rng, depth - 1));
        case 1:
            return sdmc::make_intersection(random_tree(rng, depth - 1),
                                           random_tree(rng, depth - 1));
        case 2:
            return sdmc::make_subtraction(random_tree(rng, depth - 1),
                                          random_tree(rng, depth - 1));
        case 3:
            return sdmc::make_translate(random_tree(rng, depth - 1),
                                        Vec3(range(-0.8, 0.8), range(-0.8, 0.8),
                                             range(-0.8, 0.8)));
        default: {
            const Vec3 axis(range(-1.0, 1.0), range(-1.0, 1.0), range(-1.0, 1.0));
            if (axis.norm() < 1e-3) return random_primitive(rng);
            return sdmc::make_rotate(random_tree(rng, depth - 1), axis,
                                     range(0.0, 6.28318530717958648));
        }
    }
}

// ---------------------------------------------------------------------------
// Statistics helpers
// ---------------------------------------------------------------------------

/// Kolmogorov-Smirnov statistic of sorted samples against a CDF.
inline double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf)
{
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double stat = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        stat = std::max(stat, std::abs((i + 1) / n - f));
        stat = std::max(stat, std::abs(f - i / n));
    }
    return stat;
}

/// Pearson chi-square of observed counts against expected counts.
inline double chi_square(const std::vector<double>& observed, const std::vector<double>& expected)
{
    double stat = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        const double diff = observed[i] - expected[i];
        stat += diff * diff / expected[i];
    }
    return stat;
}

/// chi-square 99th percentile for the dof used by the suites (dof -> value).
inline double chi2_99(int dof)
{
    switch (dof) {
        case 49: return 74.919;
        case 99: return 134.642;
        default: return -1.0;  // extend the table when a new dof appears
    }
}

inline double simpson(const std::function<double(double)>& f, double a, double b, int n)
{
    if (n % 2) ++n;
    const double h = (b - a) / n;
    double sum = f(a) + f(b);
    for (int i = 1; i < n; ++i) sum += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return sum * h / 3.0;
}

}  // namespace oracle
