#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracle_helpers.hpp"
#include "sdmc/optics.hpp"
#include "sdmc/rng.hpp"

#include <cmath>
#include <numbers>
#include <vector>

using namespace sdmc;

namespace {

/// Hands out a scripted sequence of uniform draws.
struct ScriptedRng {
    std::vector<double> values;
    std::size_t next = 0;
    double uniform() { return values.at(next++); }
    double uniform_open() { return values.at(next++); }
};

double hg_pdf(double cos_theta, double g)
{
    const double denom = 1.0 + g * g - 2.0 * g * cos_theta;
    return 0.5 * (1.0 - g * g) / std::pow(denom, 1.5);
}

}  // namespace

TEST_CASE("optical depth of a scripted draw")
{
    ScriptedRng rng{{std::exp(-1.0)}};
    CHECK(sample_optical_depth(rng) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("optical depth moments over a million draws")
{
    Rng rng(101);
    const int n = 1000000;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double tau = sample_optical_depth(rng);
        CHECK(tau > 0.0);
        sum += tau;
        sum_sq += tau * tau;
    }
    CHECK(sum / n == doctest::Approx(1.0).epsilon(0.003));       // 3 sigma
    CHECK(sum_sq / n == doctest::Approx(2.0).epsilon(0.01));     // second moment identity
}

TEST_CASE("optical depth histogram matches the exponential law (KS)")
{
    Rng rng(103);
    const int n = 1000000;
    std::vector<double> samples(n);
    for (auto& s : samples) s = sample_optical_depth(rng);
    const double stat = oracle::ks_statistic(std::move(samples),
                                             [](double t) { return 1.0 - std::exp(-t); });
    CHECK(stat < 1.63 / std::sqrt(static_cast<double>(n)));  // 1% significance
}

TEST_CASE("HG mean deflection cosine equals g")
{
    const int n = 1000000;
    SUBCASE("isotropic")
    {
        Rng rng(107);
        double sum = 0.0;
        for (int i = 0; i < n; ++i) sum += sample_hg_cos(0.0, rng);
        CHECK(std::abs(sum / n) < 0.002);
    }
    SUBCASE("strongly forward")
    {
        Rng rng(109);
        double sum = 0.0;
        for (int i = 0; i < n; ++i) sum += sample_hg_cos(0.9, rng);
        CHECK(sum / n == doctest::Approx(0.9).epsilon(0.001 / 0.9));
    }
}

TEST_CASE("HG mean cosine identity verified by quadrature")
{
    for (const double g : {-0.5, 0.5, 0.9}) {
        const double mean = oracle::simpson(
            [g](double c) { return c * hg_pdf(c, g); }, -1.0, 1.0, 20000);
        CHECK(mean == doctest::Approx(g).epsilon(1e-6));
    }
}

TEST_CASE("HG sampled cosine matches the analytic pdf (chi-square)")
{
    const int n = 1000000;
    const int bins = 100;
    for (const double g : {-0.5, 0.0, 0.5, 0.9}) {
        Rng rng(113 + static_cast<std::uint64_t>((g + 1) * 100));
        std::vector<double> observed(bins, 0.0);
        for (int i = 0; i < n; ++i) {
            const double c = sample_hg_cos(g, rng);
            int bin = static_cast<int>((c + 1.0) / 2.0 * bins);
            bin = std::clamp(bin, 0, bins - 1);
            observed[bin] += 1.0;
        }
        std::vector<double> expected(bins);
        for (int b = 0; b < bins; ++b) {
            const double lo = -1.0 + 2.0 * b / bins;
            const double hi = -1.0 + 2.0 * (b + 1) / bins;
            expected[b] = n * oracle::simpson([g](double c) { return hg_pdf(c, g); },
                                              lo, hi, 64);
        }
        const double stat = oracle::chi_square(observed, expected);
        CAPTURE(g);
        CHECK(stat < oracle::chi2_99(bins - 1));
    }
}

TEST_CASE("no-deflection rotation is the identity")
{
    const Vec3 out = rotate_direction({0, 0, 1}, 1.0, 0.37);
    CHECK(out.x() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(out.y() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(out.z() == doctest::Approx(1.0).epsilon(1e-12));

    const Vec3 tilted = Vec3(1, 2, 3).normalized();
    const Vec3 same = rotate_direction(tilted, 1.0, 1.1);
    CHECK((same - tilted).norm() < 1e-12);
}

TEST_CASE("rotation handles the -z degenerate frame")
{
    const Vec3 out = rotate_direction({0, 0, -1}, 0.5, 0.0);
    CHECK(is_unit(out));
    CHECK(out.z() == doctest::Approx(-0.5));
}

TEST_CASE("Fresnel reflectance reference values")
{
    // normal incidence 1 -> 1.5 is ((n2-n1)/(n2+n1))^2, bit for bit
    const double expected = ((1.5 - 1.0) / (1.5 + 1.0)) * ((1.5 - 1.0) / (1.5 + 1.0));
    CHECK(fresnel_reflectance(1.0, 1.5, 1.0) == expected);
    CHECK(expected == doctest::Approx(0.04).epsilon(1e-14));

    // beyond the critical angle of a 1.5 -> 1.0 interface
    const double cos_crit = std::cos(std::asin(1.0 / 1.5));
    CHECK(fresnel_reflectance(1.5, 1.0, 0.9 * cos_crit) == 1.0);

    // index matched
    CHECK(fresnel_reflectance(1.33, 1.33, 0.42) == 0.0);

    // symmetric under media exchange at normal incidence
    CHECK(fresnel_reflectance(1.0, 1.5, 1.0) ==
          doctest::Approx(fresnel_reflectance(1.5, 1.0, 1.0)).epsilon(1e-15));
}

TEST_CASE("Fresnel reflectance is continuous in the incidence cosine")
{
    const double h = 1e-7;
    for (double c = h; c < 1.0 - h; c += 1e-3) {
        const double jump_up =
            std::abs(fresnel_reflectance(1.0, 1.5, c + h) - fresnel_reflectance(1.0, 1.5, c));
        const double jump_dn =
            std::abs(fresnel_reflectance(1.5, 1.0, c + h) - fresnel_reflectance(1.5, 1.0, c));
        CHECK(jump_up < 1e-4);
        CHECK(jump_dn < 1e-3);  // steeper near the critical angle, still continuous
    }
}

TEST_CASE("mirror reflection preserves the tangential component")
{
    const Vec3 dir = Vec3(0.5, 0.1, -0.8).normalized();
    const Vec3 n(0, 0, 1);
    const Vec3 reflected = specular_reflect(dir, n);
    CHECK(reflected.dot(n) == doctest::Approx(-dir.dot(n)).epsilon(1e-15));
    CHECK(reflected.x() == doctest::Approx(dir.x()).epsilon(1e-15));
    CHECK(reflected.y() == doctest::Approx(dir.y()).epsilon(1e-15));
    CHECK(is_unit(reflected));
}

TEST_CASE("refraction bends 30 degrees to 19.47 degrees across 1 -> 1.5")
{
    const double theta1 = 30.0 * std::numbers::pi / 180.0;
    const Vec3 n(0, 0, 1);
    const Vec3 dir(std::sin(theta1), 0, -std::cos(theta1));
    const auto refracted = refract_dir(dir, n, 1.0, 1.5);
    REQUIRE(refracted.has_value());
    const double theta2 = std::asin(std::hypot(refracted->x(), refracted->y()));
    CHECK(theta2 == doctest::Approx(std::asin(std::sin(theta1) / 1.5)).epsilon(1e-12));
    // Snell's law in product form
    CHECK(1.0 * std::sin(theta1) == doctest::Approx(1.5 * std::sin(theta2)).epsilon(1e-12));
    // refracted ray stays in the plane of incidence
    CHECK(std::abs(refracted->dot(dir.cross(n))) < 1e-12);
}

TEST_CASE("refraction reports total internal reflection")
{
    const double cos_crit = std::cos(std::asin(1.0 / 1.5));
    const double cos_i = 0.5 * cos_crit;
    const double sin_i = std::sqrt(1 - cos_i * cos_i);
    const Vec3 dir(sin_i, 0, -cos_i);
    CHECK_FALSE(refract_dir(dir, {0, 0, 1}, 1.5, 1.0).has_value());
}

TEST_CASE("index-matched boundary is a no-op refraction")
{
    ScriptedRng rng{{0.999}};  // forces the refraction branch (R = 0 anyway)
    const Vec3 dir(0, 0, -1);
    const auto outcome = reflect_or_refract(dir, {0, 0, 1}, 1.4, 1.4, rng);
    CHECK(outcome.kind == BoundaryKind::Refracted);
    CHECK((outcome.new_dir - dir).norm() < 1e-15);
}

TEST_CASE("boundary outcomes stay unit-norm over a million random draws")
{
    Rng rng(127);
    for (int i = 0; i < 1000000; ++i) {
        Vec3 dir = Vec3(2 * rng.uniform() - 1, 2 * rng.uniform() - 1, 2 * rng.uniform() - 1);
        if (dir.norm() < 1e-6) continue;
        dir.normalize();
        Vec3 n = Vec3(2 * rng.uniform() - 1, 2 * rng.uniform() - 1, 2 * rng.uniform() - 1);
        if (n.norm() < 1e-6) continue;
        n.normalize();
        if (dir.dot(n) > 0) n = -n;
        if (-dir.dot(n) < 1e-9) continue;
        const double n1 = 1.0 + rng.uniform();
        const double n2 = 1.0 + rng.uniform();
        const auto outcome = reflect_or_refract(dir, n, n1, n2, rng);
        CHECK(std::abs(outcome.new_dir.norm() - 1.0) <= 1e-12);
    }
}

TEST_CASE("penetration depth reference values")
{
    CHECK(penetration_depth(1.8, 820.0, 0.9) == doctest::Approx(0.047).epsilon(0.01));
    CHECK(penetration_depth(0.23, 210.0, 0.9) == doctest::Approx(0.261).epsilon(0.01));
    CHECK(penetration_depth(1.0 / 3.0, 0.0, 0.7) ==
          doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
    CHECK_THROWS_AS(penetration_depth(0.0, 10.0, 0.9), std::domain_error);
    CHECK_THROWS_AS(penetration_depth(-1.0, 10.0, 0.9), std::domain_error);
}
