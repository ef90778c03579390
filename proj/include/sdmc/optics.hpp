#pragma once

#include "sdmc/types.hpp"

#include <cmath>
#include <numbers>
#include <optional>

namespace sdmc {

/// Optical depth to the next interaction: tau = -log(xi), xi uniform in (0,1).
/// Mean 1, second moment 2.
template <class R>
double sample_optical_depth(R& rng)
{
    return -std::log(rng.uniform_open());
}

/// Henyey-Greenstein deflection cosine via the closed-form inverse CDF.
/// g == 0 takes the uniform branch to avoid the 0/0.
template <class R>
double sample_hg_cos(double g, R& rng)
{
    if (g == 0.0) return 2.0 * rng.uniform() - 1.0;
    const double f = (1.0 - g * g) / (1.0 - g + 2.0 * g * rng.uniform());
    double cos_theta = (1.0 + g * g - f * f) / (2.0 * g);
    return std::min(1.0, std::max(-1.0, cos_theta));
}

/// Deflect a unit direction by the polar cosine cos_theta with azimuth phi.
/// A direction within ~1e-6 rad of +/-z takes the explicit degenerate branch.
Vec3 rotate_direction(const Vec3& dir, double cos_theta, double phi);

template <class R>
Vec3 sample_hg_direction(const Vec3& dir, double g, R& rng)
{
    const double cos_theta = sample_hg_cos(g, rng);
    const double phi = 2.0 * std::numbers::pi * rng.uniform();
    return rotate_direction(dir, cos_theta, phi);
}

/// Unpolarized Fresnel reflectance for n1 -> n2 at incidence cosine cos_i
/// (cos_i in [0,1]). Returns 1 beyond the critical angle.
double fresnel_reflectance(double n1, double n2, double cos_i);

/// Mirror reflection about the surface normal.
Vec3 specular_reflect(const Vec3& dir, const Vec3& normal);

/// Refracted direction per Snell's law in vector form; normal must oppose dir
/// (cos_i = -dir.normal > 0). nullopt on total internal reflection.
std::optional<Vec3> refract_dir(const Vec3& dir, const Vec3& normal, double n1, double n2);

enum class BoundaryKind { Reflected, Refracted };

struct BoundaryOutcome {
    Vec3 new_dir;
    BoundaryKind kind;
};

/// Stochastic Fresnel split: reflect with probability R, refract otherwise.
template <class R>
BoundaryOutcome reflect_or_refract(const Vec3& dir, const Vec3& normal, double n1,
                                   double n2, R& rng)
{
    const double cos_i = -dir.dot(normal);
    const double reflectance = fresnel_reflectance(n1, n2, cos_i);
    if (rng.uniform() < reflectance)
        return {specular_reflect(dir, normal), BoundaryKind::Reflected};
    // reflectance < 1 here, so refraction cannot hit the TIR branch
    return {refract_dir(dir, normal, n1, n2).value(), BoundaryKind::Refracted};
}

/// Diffusion-theory optical penetration depth 1/sqrt(3 mu_a (mu_a + mu_s (1-g))).
/// Throws std::domain_error when mu_a <= 0.
double penetration_depth(double mu_a, double mu_s, double g);

}  // namespace sdmc
