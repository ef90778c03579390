#pragma once

#include "sdmc/types.hpp"

#include <cstdint>
#include <vector>

namespace sdmc {

/// Cartesian accumulation grid covering the scene bounding box. Per cell it
/// tallies weighted path length (cm), absorbed weight and SDF evaluation
/// counts. Cells bin half-open [lo, hi) per axis with the last cell closed.
/// One instance per worker; merge() sums elementwise after the photon loop.
class RecordGrid {
public:
    RecordGrid(const Vec3i& dims, const Aabb& extents);

    /// Track-length estimator: distributes weight * chord length over every
    /// cell the segment crosses. Parts outside the extents are clipped.
    void deposit_segment(const Vec3& p0, const Vec3& p1, double weight);

    /// Adds w to the cell containing p; out-of-extents deposits are dropped
    /// and counted in discarded().
    void deposit_absorption(const Vec3& p, double w);

    /// Adds count to the evaluation-count cell containing p (same binning and
    /// discard rule as deposit_absorption).
    void record_sdf_evals(const Vec3& p, std::int64_t count);

    void merge(const RecordGrid& other);

    /// Fluence per cell in 1/cm^2 per launched photon: path / (cell volume * n).
    std::vector<double> fluence(std::int64_t n_photons) const;

    const Vec3i& dims() const { return dims_; }
    const Aabb& extents() const { return extents_; }
    Vec3 cell_size() const { return cell_; }
    double cell_volume() const { return cell_.prod(); }
    std::int64_t n_cells() const { return static_cast<std::int64_t>(path_.size()); }

    /// Flat index with z fastest: (ix * ny + iy) * nz + iz.
    std::int64_t flat_index(int ix, int iy, int iz) const
    {
        return (static_cast<std::int64_t>(ix) * dims_.y() + iy) * dims_.z() + iz;
    }

    /// Cell index of a point, or -1 when outside the extents.
    std::int64_t cell_of(const Vec3& p) const;

    const std::vector<double>& path() const { return path_; }
    const std::vector<double>& absorbed() const { return absorbed_; }
    const std::vector<std::int64_t>& sdf_evals() const { return evals_; }

    double total_path() const;
    double total_absorbed() const;
    std::int64_t total_sdf_evals() const;
    std::int64_t discarded() const { return discarded_; }

private:
    int axis_cell(double x, int axis) const;

    Vec3i dims_;
    Aabb extents_;
    Vec3 cell_;
    std::vector<double> path_;
    std::vector<double> absorbed_;
    std::vector<std::int64_t> evals_;
    std::int64_t discarded_ = 0;
};

/// One 2D plane of a grid-shaped field. Rows follow the first remaining axis
/// (varies slowest), columns the second.
struct Slice {
    int n_rows = 0;
    int n_cols = 0;
    std::vector<double> values;  // row-major
};

/// Extracts the plane `index` normal to `axis` (0=x, 1=y, 2=z) from a field
/// laid out like RecordGrid. Throws std::out_of_range on a bad index.
Slice extract_slice(const std::vector<double>& field, const Vec3i& dims, int axis, int index);

}  // namespace sdmc
