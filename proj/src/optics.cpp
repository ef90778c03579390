#include "sdmc/optics.hpp"

#include <stdexcept>

namespace sdmc {

Vec3 rotate_direction(const Vec3& dir, double cos_theta, double phi)
{
    const double sin_theta = std::sqrt(std::max(0.0, 1.0 - cos_theta * cos_theta));
    const double cos_phi = std::cos(phi);
    const double sin_phi = std::sin(phi);

    Vec3 out;
    if (std::abs(dir.z()) > 1.0 - 1e-12) {
        // travelling along +/-z: the generic frame below degenerates
        out.x() = sin_theta * cos_phi;
        out.y() = sin_theta * sin_phi * (dir.z() > 0.0 ? 1.0 : -1.0);
        out.z() = cos_theta * (dir.z() > 0.0 ? 1.0 : -1.0);
    } else {
        const double denom = std::sqrt(1.0 - dir.z() * dir.z());
        out.x() = sin_theta * (dir.x() * dir.z() * cos_phi - dir.y() * sin_phi) / denom +
                  dir.x() * cos_theta;
        out.y() = sin_theta * (dir.y() * dir.z() * cos_phi + dir.x() * sin_phi) / denom +
                  dir.y() * cos_theta;
        out.z() = -sin_theta * cos_phi * denom + dir.z() * cos_theta;
    }
    return out.normalized();
}

double fresnel_reflectance(double n1, double n2, double cos_i)
{
    const double sin2_t = (n1 / n2) * (n1 / n2) * (1.0 - cos_i * cos_i);
    if (sin2_t >= 1.0) return 1.0;  // total internal reflection
    const double cos_t = std::sqrt(1.0 - sin2_t);
    const double rs = (n1 * cos_i - n2 * cos_t) / (n1 * cos_i + n2 * cos_t);
    const double rp = (n1 * cos_t - n2 * cos_i) / (n1 * cos_t + n2 * cos_i);
    return 0.5 * (rs * rs + rp * rp);
}

Vec3 specular_reflect(const Vec3& dir, const Vec3& normal)
{
    return dir - 2.0 * dir.dot(normal) * normal;
}

std::optional<Vec3> refract_dir(const Vec3& dir, const Vec3& normal, double n1, double n2)
{
    const double eta = n1 / n2;
    const double cos_i = -dir.dot(normal);
    const double sin2_t = eta * eta * (1.0 - cos_i * cos_i);
    if (sin2_t > 1.0) return std::nullopt;
    const double cos_t = std::sqrt(1.0 - sin2_t);
    const Vec3 refracted = eta * dir + (eta * cos_i - cos_t) * normal;
    return refracted.normalized();
}

double penetration_depth(double mu_a, double mu_s, double g)
{
    if (mu_a <= 0.0)
        throw std::domain_error("penetration_depth: mu_a must be > 0");
    return 1.0 / std::sqrt(3.0 * mu_a * (mu_a + mu_s * (1.0 - g)));
}

}  // namespace sdmc
