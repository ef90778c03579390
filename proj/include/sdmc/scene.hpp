#pragma once

#include "sdmc/sdf.hpp"
#include "sdmc/sources.hpp"
#include "sdmc/types.hpp"

#include <cstdint>
#include <vector>

namespace sdmc {

struct GridSpec {
    Vec3i dims = Vec3i::Ones();
    bool operator==(const GridSpec&) const = default;
};

struct RunParams {
    std::int64_t n_photons = 0;
    std::uint64_t seed = 1;
    int workers = 0;                 // 0 = hardware concurrency
    double delta = 1e-6;             // boundary threshold, cm
    bool roulette = true;
    int max_steps = 10000;
    double lipschitz_safety = 0.9;   // step multiplier under non-exact transforms

    bool operator==(const RunParams&) const = default;
};

/// Complete simulation description: SDF roots with per-root materials, one
/// ambient medium, a bounding box that strictly contains every surface of
/// interest, source, recording grid and run parameters. Immutable during the
/// photon loop and shared read-only across workers.
struct Scene {
    std::vector<OpticalProps> materials;
    std::vector<std::string> material_names;
    int ambient = -1;                // index into materials
    std::vector<SdfPtr> roots;       // each root carries a valid material id
    Aabb bounds;
    SourceSpec source;
    GridSpec grid;
    RunParams run;

    /// Central-difference spacing for surface normals.
    double normal_eps() const { return 1e-6 * bounds.diagonal(); }
};

/// Throws ValidationError when the scene violates a structural invariant.
void validate_scene(const Scene& scene);

/// Material at p: nearest containing SDF wins (smallest |distance| among the
/// roots whose SDF is negative, later roots break ties); ambient when no root
/// contains p.
int current_material(const Scene& scene, const Vec3& p);

/// Index of the root SDF whose surface is nearest to p.
int nearest_root(const Scene& scene, const Vec3& p, double* distance = nullptr);

/// Semantic equality, used by the document round-trip checks.
bool scene_equal(const Scene& a, const Scene& b);

}  // namespace sdmc
