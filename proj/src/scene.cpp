#include "sdmc/scene.hpp"

#include <cmath>
#include <limits>

namespace sdmc {

void validate_props(const OpticalProps& props, const std::string& label)
{
    if (!(props.mu_s >= 0.0))
        throw ValidationError(label + ": mu_s must be >= 0");
    if (!(props.mu_a >= 0.0))
        throw ValidationError(label + ": mu_a must be >= 0");
    if (!(props.g >= -1.0 && props.g <= 1.0))
        throw ValidationError(label + ": g must be in [-1, 1]");
    if (!(props.n >= 1.0))
        throw ValidationError(label + ": n must be >= 1");
}

void validate_scene(const Scene& scene)
{
    if (scene.materials.empty())
        throw ValidationError("scene: material table is empty");
    if (scene.ambient < 0 || scene.ambient >= static_cast<int>(scene.materials.size()))
        throw ValidationError("scene: ambient material index out of range");
    for (std::size_t i = 0; i < scene.materials.size(); ++i) {
        const std::string label = i < scene.material_names.size()
                                      ? "material '" + scene.material_names[i] + "'"
                                      : "material " + std::to_string(i);
        validate_props(scene.materials[i], label);
    }
    for (const auto& root : scene.roots) {
        if (!root) throw ValidationError("scene: null SDF root");
        if (root->material < 0 || root->material >= static_cast<int>(scene.materials.size()))
            throw ValidationError("scene: SDF root references an unknown material");
    }
    if (((scene.bounds.hi - scene.bounds.lo).array() <= 0.0).any())
        throw ValidationError("scene: bounding box must have positive extent");
    if ((scene.grid.dims.array() < 1).any())
        throw ValidationError("scene: grid dims must be >= 1");
    if (scene.run.n_photons < 1)
        throw ValidationError("scene: run.photons must be >= 1");
    if (!(scene.run.delta > 0.0))
        throw ValidationError("scene: run.delta must be > 0");
    if (scene.run.max_steps < 1)
        throw ValidationError("scene: run.max_steps must be >= 1");
    if (!(scene.run.lipschitz_safety > 0.0 && scene.run.lipschitz_safety <= 1.0))
        throw ValidationError("scene: run.lipschitz_safety must be in (0, 1]");
    if (scene.run.workers < 0)
        throw ValidationError("scene: run.workers must be >= 0");

    switch (scene.source.kind) {
        case SourceKind::PointIsotropic:
            if (!scene.bounds.contains(scene.source.position))
                throw ValidationError("source: point position must lie inside the bounding box");
            break;
        case SourceKind::UniformPlane:
            if (scene.source.plane_z < scene.bounds.lo.z() ||
                scene.source.plane_z > scene.bounds.hi.z())
                throw ValidationError("source: plane z must lie within the bounding box");
            if (!is_unit(scene.source.direction, 1e-9))
                throw ValidationError("source: direction must be unit length");
            break;
        case SourceKind::CircularBeam:
            if (!(scene.source.radius > 0.0))
                throw ValidationError("source: beam radius must be > 0");
            if (!scene.bounds.contains(scene.source.center))
                throw ValidationError("source: beam center must lie inside the bounding box");
            if (!is_unit(scene.source.direction, 1e-9))
                throw ValidationError("source: direction must be unit length");
            break;
    }
}

int current_material(const Scene& scene, const Vec3& p)
{
    int best = scene.ambient;
    double best_abs = std::numeric_limits<double>::infinity();
    for (const auto& root : scene.roots) {
        const double d = evaluate(*root, p);
        if (d < 0.0 && -d <= best_abs) {
            best_abs = -d;
            best = root->material;
        }
    }
    return best;
}

int nearest_root(const Scene& scene, const Vec3& p, double* distance)
{
    int best = -1;
    double best_abs = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < scene.roots.size(); ++i) {
        const double d = std::abs(evaluate(*scene.roots[i], p));
        if (d <= best_abs) {
            best_abs = d;
            best = static_cast<int>(i);
        }
    }
    if (distance) *distance = best_abs;
    return best;
}

bool scene_equal(const Scene& a, const Scene& b)
{
    if (a.materials != b.materials || a.material_names != b.material_names ||
        a.ambient != b.ambient)
        return false;
    if (a.roots.size() != b.roots.size()) return false;
    for (std::size_t i = 0; i < a.roots.size(); ++i)
        if (!node_equal(*a.roots[i], *b.roots[i])) return false;
    return a.bounds.lo == b.bounds.lo && a.bounds.hi == b.bounds.hi &&
           a.source == b.source && a.grid == b.grid && a.run == b.run;
}

}  // namespace sdmc
