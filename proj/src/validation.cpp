#include "sdmc/validation.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace sdmc {

double expected_scatterings(double tau_max)
{
    return 0.5 * tau_max * tau_max + tau_max;
}

double fluence_depth_model(double z, const FluenceFitParams& p)
{
    return p.psi0 * (p.c1 * std::exp(-z * p.k1 / p.delta) -
                     p.c2 * std::exp(-z * p.k2 / p.delta));
}

namespace {

// Internal fit space: psi(z) = A exp(-a z) - B exp(-b z), theta = (A, a, B, b).
using Theta = Eigen::Vector4d;

double model(const Theta& t, double z)
{
    return t[0] * std::exp(-t[1] * z) - t[2] * std::exp(-t[3] * z);
}

double cost(const Theta& t, const std::vector<DepthSample>& data)
{
    double sum = 0.0;
    for (const auto& s : data) {
        const double r = model(t, s.z) - s.psi;
        sum += r * r;
    }
    return sum;
}

/// One damped Gauss-Newton system: (J^T J + lambda diag(J^T J)) step = -J^T r.
Theta solve_step(const Theta& t, const std::vector<DepthSample>& data, double lambda)
{
    Eigen::Matrix4d jtj = Eigen::Matrix4d::Zero();
    Eigen::Vector4d jtr = Eigen::Vector4d::Zero();
    for (const auto& s : data) {
        const double e1 = std::exp(-t[1] * s.z);
        const double e2 = std::exp(-t[3] * s.z);
        Eigen::Vector4d jac;
        jac << e1, -t[0] * s.z * e1, -e2, t[2] * s.z * e2;
        const double r = (t[0] * e1 - t[2] * e2) - s.psi;
        jtj.noalias() += jac * jac.transpose();
        jtr.noalias() += jac * r;
    }
    Eigen::Matrix4d damped = jtj;
    for (int i = 0; i < 4; ++i)
        damped(i, i) += lambda * std::max(jtj(i, i), 1e-300);
    return t - damped.ldlt().solve(jtr);
}

Theta initial_guess(const std::vector<DepthSample>& data, double b_over_a)
{
    // tail log-slope gives the leading decay rate
    const double psi_max = std::max_element(data.begin(), data.end(),
                                            [](const DepthSample& x, const DepthSample& y) {
                                                return x.psi < y.psi;
                                            })
                               ->psi;
    std::vector<DepthSample> tail;
    for (const auto& s : data)
        if (s.psi > 1e-4 * psi_max) tail.push_back(s);
    if (tail.size() > 4) tail.erase(tail.begin(), tail.begin() + tail.size() / 2);

    double sz = 0, sl = 0, szz = 0, szl = 0;
    for (const auto& s : tail) {
        const double l = std::log(s.psi);
        sz += s.z;
        sl += l;
        szz += s.z * s.z;
        szl += s.z * l;
    }
    const double n = static_cast<double>(tail.size());
    const double denom = n * szz - sz * sz;
    double a = 1.0, log_amp = std::log(psi_max);
    if (denom > 0.0) {
        a = -(n * szl - sz * sl) / denom;
        log_amp = (sl * szz - sz * szl) / denom;
    }
    if (!(a > 0.0) || !std::isfinite(a)) a = 1.0 / (data.back().z + 1e-12);

    Theta t;
    t[0] = std::exp(std::min(log_amp, 700.0));
    t[1] = a;
    t[2] = 0.2 * t[0];
    t[3] = b_over_a * a;
    return t;
}

FitResult run_lm(Theta t, const std::vector<DepthSample>& data)
{
    FitResult out;
    double lambda = 1e-3;
    double current = cost(t, data);
    for (out.iterations = 1; out.iterations <= 500; ++out.iterations) {
        const Theta proposal = solve_step(t, data, lambda);
        const bool valid = proposal.allFinite() && proposal[1] > 0.0 && proposal[3] > 0.0;
        const double proposed = valid ? cost(proposal, data)
                                      : std::numeric_limits<double>::infinity();
        if (proposed <= current) {
            const double rel_change =
                ((proposal - t).cwiseAbs().array() / (t.cwiseAbs().array() + 1e-30))
                    .maxCoeff();
            t = proposal;
            current = proposed;
            lambda = std::max(lambda * 0.3, 1e-12);
            if (rel_change < 1e-8) {
                out.converged = true;
                break;
            }
        } else {
            lambda *= 10.0;
            if (lambda > 1e12) break;
        }
    }
    out.rms_residual = std::sqrt(current / static_cast<double>(data.size()));
    out.params.psi0 = 1.0;
    out.params.c1 = t[0];
    out.params.c2 = t[2];
    // rates mapped back by caller
    out.params.k1 = t[1];
    out.params.k2 = t[3];
    return out;
}

}  // namespace

FitResult fit_fluence_depth(const std::vector<DepthSample>& profile,
                            std::optional<double> fixed_delta)
{
    if (profile.size() < 5)
        throw ValidationError("fit_fluence_depth: need at least 5 profile points");
    for (std::size_t i = 1; i < profile.size(); ++i)
        if (!(profile[i].z > profile[i - 1].z))
            throw ValidationError("fit_fluence_depth: z must be strictly increasing");

    const double psi_max = std::max_element(profile.begin(), profile.end(),
                                            [](const DepthSample& x, const DepthSample& y) {
                                                return x.psi < y.psi;
                                            })
                               ->psi;
    if (!(psi_max > 0.0)) {
        FitResult degenerate;
        degenerate.degenerate = true;
        degenerate.params.psi0 = 0.0;
        return degenerate;
    }

    FitResult best;
    bool have_best = false;
    for (const double ratio : {4.0, 10.0, 20.0}) {
        FitResult attempt = run_lm(initial_guess(profile, ratio), profile);
        if (!have_best || attempt.rms_residual < best.rms_residual) {
            best = attempt;
            have_best = true;
        }
    }

    // map the internal rates (A, a, B, b) onto the reported parameter set
    const double a = best.params.k1;
    const double b = best.params.k2;
    if (fixed_delta) {
        best.params.delta = *fixed_delta;
        best.params.k1 = a * *fixed_delta;
        best.params.k2 = b * *fixed_delta;
    } else {
        best.params.delta = 1.0 / a;
        best.params.k1 = 1.0;
        best.params.k2 = b / a;
    }
    return best;
}

std::vector<DepthSample> depth_profile(const std::vector<double>& fluence, const Vec3i& dims,
                                       const Aabb& extents, double surface_z,
                                       double lateral_fraction, int skip_layers)
{
    const Vec3 cell = (extents.hi - extents.lo).cwiseQuotient(dims.cast<double>());
    const Vec3 center = extents.center();
    const double half_x = 0.5 * lateral_fraction * (extents.hi.x() - extents.lo.x());
    const double half_y = 0.5 * lateral_fraction * (extents.hi.y() - extents.lo.y());

    std::vector<int> xs, ys;
    for (int ix = 0; ix < dims.x(); ++ix) {
        const double x = extents.lo.x() + (ix + 0.5) * cell.x();
        if (std::abs(x - center.x()) <= half_x) xs.push_back(ix);
    }
    for (int iy = 0; iy < dims.y(); ++iy) {
        const double y = extents.lo.y() + (iy + 0.5) * cell.y();
        if (std::abs(y - center.y()) <= half_y) ys.push_back(iy);
    }

    std::vector<DepthSample> profile;
    int layer = 0;
    for (int iz = dims.z() - 1; iz >= 0; --iz) {
        const double z_top = extents.lo.z() + (iz + 1) * cell.z();
        if (z_top > surface_z) continue;  // layer not fully below the surface
        if (layer++ < skip_layers) continue;
        const double z_center = extents.lo.z() + (iz + 0.5) * cell.z();
        double sum = 0.0;
        for (int ix : xs)
            for (int iy : ys)
                sum += fluence[(static_cast<std::int64_t>(ix) * dims.y() + iy) * dims.z() + iz];
        profile.push_back({surface_z - z_center,
                           sum / (static_cast<double>(xs.size()) * ys.size())});
    }
    return profile;
}

Scene make_isotropic_sphere_scene(double tau_max, std::int64_t n_photons, std::uint64_t seed,
                                  int workers)
{
    Scene scene;
    scene.material_names = {"ambient", "sphere"};
    scene.materials.resize(2);
    scene.materials[0] = OpticalProps{0.0, 0.0, 0.0, 1.0};
    scene.materials[1] = OpticalProps{tau_max / 0.5, 0.0, 0.0, 1.0};
    scene.ambient = 0;
    scene.roots = {with_material(make_sphere(0.5), 1)};
    scene.bounds = Aabb{Vec3(-0.6, -0.6, -0.6), Vec3(0.6, 0.6, 0.6)};
    scene.source.kind = SourceKind::PointIsotropic;
    scene.source.position = Vec3::Zero();
    scene.grid.dims = Vec3i::Ones();
    scene.run.n_photons = n_photons;
    scene.run.seed = seed;
    scene.run.workers = workers;
    scene.run.roulette = false;  // weights never drop below 1 here anyway
    return scene;
}

std::vector<ScatterCountRow> mean_scatter_experiment(const std::vector<double>& taus,
                                                     std::int64_t n_photons,
                                                     std::uint64_t seed, int workers)
{
    std::vector<ScatterCountRow> rows;
    rows.reserve(taus.size());
    for (std::size_t i = 0; i < taus.size(); ++i) {
        const double tau = taus[i];
        if (tau < 0.0)
            throw ValidationError("mean_scatter_experiment: tau must be >= 0");
        ScatterCountRow row;
        row.tau = tau;
        row.predicted = expected_scatterings(tau);
        row.n_photons = n_photons;
        if (tau == 0.0) {
            rows.push_back(row);  // vacuum sphere: no interactions at all
            continue;
        }
        const Scene scene = make_isotropic_sphere_scene(tau, n_photons, seed + i, workers);
        const SimulationResult result = run_simulation(scene);
        row.measured = result.mean_scatters();
        row.std_error = result.scatters_std_error();
        rows.push_back(row);
    }
    return rows;
}

}  // namespace sdmc
