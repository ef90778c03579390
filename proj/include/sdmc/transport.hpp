#pragma once

#include "sdmc/grid.hpp"
#include "sdmc/optics.hpp"
#include "sdmc/rng.hpp"
#include "sdmc/scene.hpp"

#include <array>
#include <cstdint>
#include <numbers>

namespace sdmc {

inline constexpr double kRouletteThreshold = 1e-4;
inline constexpr double kRouletteSurvival = 0.1;

/// A weighted photon bundle. dir stays unit; weight in (0, 1] until death.
struct PhotonPacket {
    Vec3 pos = Vec3::Zero();
    Vec3 dir = -Vec3::UnitZ();
    double weight = 1.0;
    double tau_remaining = 0.0;
    int material = -1;
    std::int64_t n_scatters = 0;
    std::int64_t n_sdf_evals = 0;
    bool alive = true;
};

enum class StepEvent { Interaction, Boundary, Escaped, StepLimit };

enum class Fate { Absorbed, Escaped, StepLimit };

/// Bounding-box faces, used for escape bookkeeping: -x +x -y +y -z +z.
enum Face { FaceNegX = 0, FacePosX, FaceNegY, FacePosY, FaceNegZ, FacePosZ };

struct PacketRecord {
    Fate fate = Fate::Escaped;
    std::int64_t n_scatters = 0;
    int exit_face = -1;  // -1 unless escaped
    double residual_weight = 0.0;
};

/// Per-worker counters; merged by summation after the photon loop. Weight
/// accounting satisfies absorbed + escaped + steplimit_residual + roulette_net
/// == launched weight exactly (up to rounding).
struct Tallies {
    double escaped_weight = 0.0;
    double absorbed_weight = 0.0;
    double steplimit_residual = 0.0;
    double roulette_net = 0.0;  // weight destroyed minus weight created by roulette
    std::array<double, 6> face_escaped_weight{};
    std::int64_t n_escaped = 0;
    std::int64_t n_absorbed = 0;
    std::int64_t n_steplimit = 0;
    std::int64_t n_emission_nudges = 0;
    std::int64_t n_degenerate_normals = 0;
    double sum_scatters = 0.0;
    double sum_scatters_sq = 0.0;
    std::int64_t total_sdf_evals = 0;
    std::int64_t n_tau_draws = 0;
    double sum_tau = 0.0;
    double sum_tau_sq = 0.0;

    void merge(const Tallies& o)
    {
        escaped_weight += o.escaped_weight;
        absorbed_weight += o.absorbed_weight;
        steplimit_residual += o.steplimit_residual;
        roulette_net += o.roulette_net;
        for (int f = 0; f < 6; ++f) face_escaped_weight[f] += o.face_escaped_weight[f];
        n_escaped += o.n_escaped;
        n_absorbed += o.n_absorbed;
        n_steplimit += o.n_steplimit;
        n_emission_nudges += o.n_emission_nudges;
        n_degenerate_normals += o.n_degenerate_normals;
        sum_scatters += o.sum_scatters;
        sum_scatters_sq += o.sum_scatters_sq;
        total_sdf_evals += o.total_sdf_evals;
        n_tau_draws += o.n_tau_draws;
        sum_tau += o.sum_tau;
        sum_tau_sq += o.sum_tau_sq;
    }
};

namespace detail {

/// Orthonormal pair completing a unit direction.
inline void make_frame(const Vec3& d, Vec3& u, Vec3& v)
{
    const Vec3 helper = std::abs(d.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
    u = helper.cross(d).normalized();
    v = d.cross(u);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Emission (sources module entry point)
// ---------------------------------------------------------------------------

template <class R>
Vec3 sample_isotropic_direction(R& rng)
{
    const double cos_theta = 2.0 * rng.uniform() - 1.0;
    const double sin_theta = std::sqrt(std::max(0.0, 1.0 - cos_theta * cos_theta));
    const double phi = 2.0 * std::numbers::pi * rng.uniform();
    return {sin_theta * std::cos(phi), sin_theta * std::sin(phi), cos_theta};
}

/// Area-uniform point on the disc of given radius, in the plane normal to dir.
template <class R>
Vec3 sample_disc_point(const Vec3& center, double radius, const Vec3& dir, R& rng)
{
    const double r = radius * std::sqrt(rng.uniform());
    const double phi = 2.0 * std::numbers::pi * rng.uniform();
    Vec3 u, v;
    detail::make_frame(dir, u, v);
    return center + r * (std::cos(phi) * u + std::sin(phi) * v);
}

/// Launches a fresh packet: weight 1, counters zeroed, medium resolved via
/// current_material. Point sources emit isotropically; plane and beam sources
/// emit with the fixed source direction.
template <class R>
PhotonPacket emit(const Scene& scene, R& rng)
{
    PhotonPacket pk;
    const SourceSpec& src = scene.source;
    switch (src.kind) {
        case SourceKind::PointIsotropic:
            pk.pos = src.position;
            pk.dir = sample_isotropic_direction(rng);
            break;
        case SourceKind::UniformPlane: {
            const double x = scene.bounds.lo.x() +
                             rng.uniform() * (scene.bounds.hi.x() - scene.bounds.lo.x());
            const double y = scene.bounds.lo.y() +
                             rng.uniform() * (scene.bounds.hi.y() - scene.bounds.lo.y());
            pk.pos = Vec3(x, y, src.plane_z);
            pk.dir = src.direction;
            break;
        }
        case SourceKind::CircularBeam:
            pk.pos = sample_disc_point(src.center, src.radius, src.direction, rng);
            pk.dir = src.direction;
            break;
    }
    pk.material = current_material(scene, pk.pos);
    return pk;
}

// ---------------------------------------------------------------------------
// Optical depth integration (the sphere-tracing walk)
// ---------------------------------------------------------------------------

namespace detail {

/// One scene distance query. Returns the step bound (safety-scaled where a
/// tree is not step_safe), the raw nearest-interface distance and which
/// surface is nearest (-1 for the bounding box). Counts one evaluation per
/// root plus one for the bounding box.
struct SceneQuery {
    double bbox_sdf = 0.0;
    double step_bound = 0.0;   // min over safety_i * |d_i| and |d_bbox|
    double nearest_abs = 0.0;  // min over raw |d_i| and |d_bbox|
    int nearest = -1;          // root index, or -1 for the bounding box
    std::int64_t evals = 0;
};

inline SceneQuery query_scene(const Scene& scene, const Vec3& p)
{
    SceneQuery q;
    q.bbox_sdf = scene.bounds.sdf(p);
    q.evals = 1;
    q.step_bound = std::abs(q.bbox_sdf);
    q.nearest_abs = std::abs(q.bbox_sdf);
    q.nearest = -1;
    for (std::size_t i = 0; i < scene.roots.size(); ++i) {
        const SdfNode& root = *scene.roots[i];
        const double d = std::abs(evaluate(root, p));
        ++q.evals;
        const double bounded = root.step_safe ? d : d * scene.run.lipschitz_safety;
        q.step_bound = std::min(q.step_bound, bounded);
        if (d <= q.nearest_abs) {
            q.nearest_abs = d;
            q.nearest = static_cast<int>(i);
        }
    }
    return q;
}

inline void advance(PhotonPacket& pk, double distance, RecordGrid& grid)
{
    const Vec3 next = pk.pos + distance * pk.dir;
    grid.deposit_segment(pk.pos, next, pk.weight);
    pk.pos = next;
}

}  // namespace detail

/// Walks the packet along its direction by sphere-trace steps, spending
/// tau_remaining at the local mu_t, until an interaction point is reached,
/// a root-SDF interface comes within delta, or the packet leaves the bounding
/// box. Every traversed segment lands in the recording grid; every query is
/// charged to the packet's SDF evaluation counter and the count grid.
inline StepEvent integrate_optical_depth(const Scene& scene, PhotonPacket& pk,
                                         RecordGrid& grid, Tallies& tallies)
{
    const double delta = scene.run.delta;
    Vec3 last_inside =
        pk.pos.cwiseMax(scene.bounds.lo).cwiseMin(scene.bounds.hi);
    for (int steps = 0; steps < scene.run.max_steps; ++steps) {
        const double d_box = scene.bounds.sdf(pk.pos);
        if (d_box > 0.0) {
            pk.n_sdf_evals += 1;
            grid.record_sdf_evals(last_inside, 1);
            pk.alive = false;
            return StepEvent::Escaped;
        }
        last_inside = pk.pos;

        const detail::SceneQuery q = detail::query_scene(scene, pk.pos);
        pk.n_sdf_evals += q.evals;
        grid.record_sdf_evals(pk.pos, q.evals);

        const double mu_t = scene.materials[pk.material].mu_t();

        if (mu_t > 0.0 && pk.tau_remaining <= q.step_bound * mu_t) {
            // the remaining optical depth is spent before any surface is reached
            detail::advance(pk, pk.tau_remaining / mu_t, grid);
            pk.tau_remaining = 0.0;
            return StepEvent::Interaction;
        }

        if (q.nearest_abs < delta) {
            if (q.nearest >= 0) return StepEvent::Boundary;
            // bounding-box wall: hop across, the next query terminates the walk
            detail::advance(pk, 2.0 * delta, grid);
            pk.tau_remaining = std::max(0.0, pk.tau_remaining - 2.0 * delta * mu_t);
            continue;
        }

        detail::advance(pk, q.step_bound, grid);
        pk.tau_remaining = std::max(0.0, pk.tau_remaining - q.step_bound * mu_t);
    }
    // grazing-ray pathology: give up on this packet and account for it
    tallies.steplimit_residual += pk.weight;
    ++tallies.n_steplimit;
    pk.alive = false;
    return StepEvent::StepLimit;
}

// ---------------------------------------------------------------------------
// Interaction and boundary handling
// ---------------------------------------------------------------------------

/// Implicit capture: deposit the absorbed share of the weight, scatter the
/// rest into a Henyey-Greenstein direction, then play Russian roulette below
/// the weight threshold.
template <class R>
void handle_interaction(PhotonPacket& pk, const OpticalProps& props, R& rng,
                        RecordGrid& grid, Tallies& tallies, bool roulette)
{
    const double absorbed = pk.weight * props.mu_a / props.mu_t();
    if (absorbed > 0.0) {
        grid.deposit_absorption(pk.pos, absorbed);
        tallies.absorbed_weight += absorbed;
        pk.weight -= absorbed;
    }
    pk.n_scatters += 1;
    if (pk.weight <= 0.0) {
        pk.weight = 0.0;
        pk.alive = false;
        return;
    }
    pk.dir = sample_hg_direction(pk.dir, props.g, rng);

    if (roulette && pk.weight < kRouletteThreshold) {
        if (rng.uniform() < kRouletteSurvival) {
            const double boosted = pk.weight / kRouletteSurvival;
            tallies.roulette_net -= boosted - pk.weight;
            pk.weight = boosted;
        } else {
            tallies.roulette_net += pk.weight;
            pk.weight = 0.0;
            pk.alive = false;
        }
    }
}

/// Resolves a packet sitting within delta of a root-SDF surface. Matched
/// refractive indices pass straight through; mismatched ones reflect or
/// refract stochastically. The packet is then displaced 2 delta along the
/// oriented surface normal onto its outgoing side. A displacement along the
/// new direction instead would strand near-critical refractions (grazing
/// outgoing angles) on the incident side, where the re-detected interface
/// reflects them back unphysically.
template <class R>
void handle_boundary(const Scene& scene, PhotonPacket& pk, R& rng)
{
    double dist = 0.0;
    const int root_idx = nearest_root(scene, pk.pos, &dist);
    const SdfNode& surface = *scene.roots[root_idx];

    Vec3 nrm = normal(surface, pk.pos, scene.normal_eps());
    if (nrm.dot(pk.dir) > 0.0) nrm = -nrm;  // orient against travel

    const double n1 = scene.materials[pk.material].n;
    const Vec3 probe = pk.pos - 2.0 * scene.run.delta * nrm;  // transmission side
    const double n2 = scene.materials[current_material(scene, probe)].n;

    bool crosses = true;
    if (n1 != n2) {
        const BoundaryOutcome outcome = reflect_or_refract(pk.dir, nrm, n1, n2, rng);
        pk.dir = outcome.new_dir;
        crosses = outcome.kind == BoundaryKind::Refracted;
    }
    pk.pos += 2.0 * scene.run.delta * (crosses ? -nrm : nrm);
    pk.material = current_material(scene, pk.pos);
}

// ---------------------------------------------------------------------------
// Full packet lifetime
// ---------------------------------------------------------------------------

namespace detail {

inline int exit_face(const Aabb& box, const Vec3& p)
{
    const Vec3 rel = (p - box.center()).cwiseQuotient(box.half_extents());
    int axis = 0;
    rel.cwiseAbs().maxCoeff(&axis);
    return 2 * axis + (rel[axis] > 0.0 ? 1 : 0);
}

}  // namespace detail

/// Emit -> draw tau -> integrate -> handle event, looping until the packet
/// escapes, is absorbed, or trips a step limit. Remaining optical depth is
/// carried across boundary crossings rather than resampled.
template <class R>
PacketRecord simulate_packet(const Scene& scene, R& rng, RecordGrid& grid, Tallies& tallies)
{
    PhotonPacket pk = emit(scene, rng);

    // a packet born within delta of a surface is nudged forward onto one side
    double born_dist = 0.0;
    nearest_root(scene, pk.pos, &born_dist);
    born_dist = std::min(born_dist, std::abs(scene.bounds.sdf(pk.pos)));
    if (born_dist < scene.run.delta) {
        pk.pos += 2.0 * scene.run.delta * pk.dir;
        pk.material = current_material(scene, pk.pos);
        ++tallies.n_emission_nudges;
    }

    pk.tau_remaining = sample_optical_depth(rng);
    ++tallies.n_tau_draws;
    tallies.sum_tau += pk.tau_remaining;
    tallies.sum_tau_sq += pk.tau_remaining * pk.tau_remaining;

    PacketRecord rec;
    std::int64_t boundary_events = 0;
    while (pk.alive) {
        const StepEvent event = integrate_optical_depth(scene, pk, grid, tallies);
        switch (event) {
            case StepEvent::Escaped: {
                rec.fate = Fate::Escaped;
                rec.exit_face = detail::exit_face(scene.bounds, pk.pos);
                rec.residual_weight = pk.weight;
                tallies.escaped_weight += pk.weight;
                tallies.face_escaped_weight[rec.exit_face] += pk.weight;
                ++tallies.n_escaped;
                break;
            }
            case StepEvent::StepLimit:
                rec.fate = Fate::StepLimit;
                rec.residual_weight = pk.weight;
                break;
            case StepEvent::Boundary: {
                if (++boundary_events > scene.run.max_steps) {
                    // trapped grazing/TIR orbit; retire the packet
                    tallies.steplimit_residual += pk.weight;
                    ++tallies.n_steplimit;
                    pk.alive = false;
                    rec.fate = Fate::StepLimit;
                    rec.residual_weight = pk.weight;
                    break;
                }
                try {
                    handle_boundary(scene, pk, rng);
                } catch (const DegenerateNormalError&) {
                    ++tallies.n_degenerate_normals;
                    tallies.steplimit_residual += pk.weight;
                    ++tallies.n_steplimit;
                    pk.alive = false;
                    rec.fate = Fate::StepLimit;
                    rec.residual_weight = pk.weight;
                }
                break;
            }
            case StepEvent::Interaction: {
                handle_interaction(pk, scene.materials[pk.material], rng, grid, tallies,
                                   scene.run.roulette);
                if (!pk.alive) {
                    rec.fate = Fate::Absorbed;
                    rec.residual_weight = 0.0;
                    ++tallies.n_absorbed;
                    break;
                }
                pk.tau_remaining = sample_optical_depth(rng);
                ++tallies.n_tau_draws;
                tallies.sum_tau += pk.tau_remaining;
                tallies.sum_tau_sq += pk.tau_remaining * pk.tau_remaining;
                break;
            }
        }
    }
    rec.n_scatters = pk.n_scatters;
    tallies.sum_scatters += static_cast<double>(pk.n_scatters);
    tallies.sum_scatters_sq += static_cast<double>(pk.n_scatters) * pk.n_scatters;
    tallies.total_sdf_evals += pk.n_sdf_evals;
    return rec;
}

// ---------------------------------------------------------------------------
// Parallel driver
// ---------------------------------------------------------------------------

struct SimulationResult {
    RecordGrid grid;
    Tallies tallies;
    std::int64_t n_photons = 0;
    double wall_seconds = 0.0;

    double mean_scatters() const
    {
        return sum_div(tallies.sum_scatters);
    }
    double scatters_std_error() const
    {
        const double mean = mean_scatters();
        const double var = sum_div(tallies.sum_scatters_sq) - mean * mean;
        return std::sqrt(std::max(0.0, var) / static_cast<double>(n_photons));
    }
    /// absorbed + escaped + residual + roulette_net, which conservation pins
    /// to the launched weight.
    double accounted_weight() const
    {
        return tallies.absorbed_weight + tallies.escaped_weight +
               tallies.steplimit_residual + tallies.roulette_net;
    }

private:
    double sum_div(double s) const { return s / static_cast<double>(n_photons); }
};

/// Runs scene.run.n_photons packets over scene.run.workers threads, each with
/// an rng stream derived from (seed, worker index), and merges the per-worker
/// grids and tallies in worker order. Single-worker runs are bit-reproducible
/// for a fixed seed.
SimulationResult run_simulation(const Scene& scene);

}  // namespace sdmc
