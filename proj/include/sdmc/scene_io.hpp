#pragma once

#include "sdmc/grid.hpp"
#include "sdmc/scene.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace sdmc {

struct ParsedScene {
    Scene scene;
    std::vector<std::string> warnings;  // e.g. unknown keys
};

/// Parses a JSON scene document. Structural problems (bad JSON, missing or
/// ill-typed keys) throw ParseError; invariant violations (negative radius,
/// unknown material reference, ...) throw ValidationError naming the offender.
ParsedScene parse_scene(const std::string& text);

ParsedScene load_scene(const std::filesystem::path& path);

/// Document text such that parse(serialize(scene)) compares scene_equal.
std::string serialize_scene(const Scene& scene);

// ---------------------------------------------------------------------------
// Binary grid files: 8-byte magic "SDMCGRID", u32 version, u32 kind, 3*u32
// dims, 6*f64 extents (lo, hi), then nx*ny*nz little-endian f64 values with
// z varying fastest.
// ---------------------------------------------------------------------------

enum class GridKind : std::uint32_t {
    PathLength = 0,
    Absorption = 1,
    SdfEvals = 2,
    Fluence = 3,
};

struct GridData {
    GridKind kind = GridKind::PathLength;
    Vec3i dims = Vec3i::Ones();
    Aabb extents;
    std::vector<double> values;
};

/// Writes bit-exact; throws std::ios_base::failure on I/O problems.
void write_grid(const GridData& grid, const std::filesystem::path& path);

/// Throws FormatError on bad magic/version/kind or a payload length mismatch.
GridData read_grid(const std::filesystem::path& path);

/// CSV with one row per slice row; values are full-precision doubles.
void write_slice_csv(const Slice& slice, const std::filesystem::path& path);

}  // namespace sdmc
