#pragma once

#include "sdmc/types.hpp"

namespace sdmc {

enum class SourceKind { PointIsotropic, UniformPlane, CircularBeam };

/// Photon emission description. Positions must lie inside (point) or on a
/// z-face of (plane/beam) the scene bounding box; directions are unit.
struct SourceSpec {
    SourceKind kind = SourceKind::PointIsotropic;
    Vec3 position = Vec3::Zero();    // point-isotropic
    double plane_z = 0.0;            // uniform-plane
    Vec3 center = Vec3::Zero();      // circular-beam
    double radius = 0.0;             // circular-beam, cm
    Vec3 direction = -Vec3::UnitZ(); // plane and beam

    bool operator==(const SourceSpec&) const = default;
};

}  // namespace sdmc
