#pragma once

#include "sdmc/scene.hpp"
#include "sdmc/transport.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace sdmc {

/// Mean number of scattering events for a photon released at the center of an
/// isotropically scattering sphere of radial optical depth tau_max:
/// tau^2/2 (thick limit) plus tau (thin limit).
double expected_scatterings(double tau_max);

/// Two-exponential depth-fluence model
///   psi(z) = psi0 * (c1 exp(-z k1 / delta) - c2 exp(-z k2 / delta)).
struct FluenceFitParams {
    double psi0 = 1.0;
    double c1 = 0.0;
    double k1 = 1.0;
    double c2 = 0.0;
    double k2 = 1.0;
    double delta = 1.0;  // penetration depth, cm
};

double fluence_depth_model(double z, const FluenceFitParams& params);

struct DepthSample {
    double z = 0.0;    // depth below the illuminated surface, cm
    double psi = 0.0;  // laterally averaged fluence
};

struct FitResult {
    FluenceFitParams params;
    double rms_residual = 0.0;
    int iterations = 0;
    bool converged = false;
    bool degenerate = false;  // all-zero profile, psi0 -> 0
};

/// Damped Gauss-Newton least squares of the two-exponential model. When
/// fixed_delta is set, delta is pinned and k1, k2 are fitted; otherwise the
/// leading decay is reported as delta with k1 = 1. Converged when the relative
/// parameter change drops below 1e-8, capped at 500 iterations.
FitResult fit_fluence_depth(const std::vector<DepthSample>& profile,
                            std::optional<double> fixed_delta);

/// Laterally averaged fluence per z layer, restricted to the central
/// `lateral_fraction` of the x-y extent, over layers that lie fully below
/// surface_z. Layer 0 is the layer touching the surface; `skip_layers` of
/// them are dropped (binning artifacts dominate next to the surface).
std::vector<DepthSample> depth_profile(const std::vector<double>& fluence, const Vec3i& dims,
                                       const Aabb& extents, double surface_z,
                                       double lateral_fraction = 0.5, int skip_layers = 2);

/// The isotropic-sphere benchmark scene: radius 0.5 cm, mu_s = tau_max / 0.5,
/// no absorption, g = 0, index matched to the ambient medium, point source at
/// the center.
Scene make_isotropic_sphere_scene(double tau_max, std::int64_t n_photons,
                                  std::uint64_t seed, int workers);

struct ScatterCountRow {
    double tau = 0.0;
    double measured = 0.0;
    double predicted = 0.0;
    double std_error = 0.0;
    std::int64_t n_photons = 0;
};

/// Runs the isotropic-sphere scene per tau and tabulates measured versus
/// predicted mean scattering counts.
std::vector<ScatterCountRow> mean_scatter_experiment(const std::vector<double>& taus,
                                                     std::int64_t n_photons,
                                                     std::uint64_t seed, int workers);

}  // namespace sdmc
