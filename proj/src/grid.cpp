#include "sdmc/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace sdmc {

RecordGrid::RecordGrid(const Vec3i& dims, const Aabb& extents)
    : dims_(dims), extents_(extents)
{
    if ((dims.array() < 1).any())
        throw ValidationError("grid: dims must be >= 1 in every axis");
    if (((extents.hi - extents.lo).array() <= 0.0).any())
        throw ValidationError("grid: extents must have positive size");
    cell_ = (extents.hi - extents.lo).cwiseQuotient(dims.cast<double>());
    const std::int64_t n =
        static_cast<std::int64_t>(dims.x()) * dims.y() * dims.z();
    path_.assign(n, 0.0);
    absorbed_.assign(n, 0.0);
    evals_.assign(n, 0);
}

int RecordGrid::axis_cell(double x, int axis) const
{
    const double rel = (x - extents_.lo[axis]) / cell_[axis];
    int idx = static_cast<int>(std::floor(rel));
    // hi face belongs to the last cell
    if (idx == dims_[axis] && x <= extents_.hi[axis]) idx = dims_[axis] - 1;
    return idx;
}

std::int64_t RecordGrid::cell_of(const Vec3& p) const
{
    int idx[3];
    for (int axis = 0; axis < 3; ++axis) {
        idx[axis] = axis_cell(p[axis], axis);
        if (idx[axis] < 0 || idx[axis] >= dims_[axis]) return -1;
    }
    return flat_index(idx[0], idx[1], idx[2]);
}

void RecordGrid::deposit_absorption(const Vec3& p, double w)
{
    const std::int64_t cell = cell_of(p);
    if (cell < 0) {
        ++discarded_;
        return;
    }
    absorbed_[cell] += w;
}

void RecordGrid::record_sdf_evals(const Vec3& p, std::int64_t count)
{
    const std::int64_t cell = cell_of(p);
    if (cell < 0) {
        ++discarded_;
        return;
    }
    evals_[cell] += count;
}

void RecordGrid::deposit_segment(const Vec3& p0, const Vec3& p1, double weight)
{
    const Vec3 d = p1 - p0;
    const double length = d.norm();
    if (length == 0.0 || weight == 0.0) return;
    const Vec3 dir = d / length;

    // clip [0, length] against the extents slab by slab
    double t_enter = 0.0;
    double t_exit = length;
    for (int axis = 0; axis < 3; ++axis) {
        if (dir[axis] == 0.0) {
            if (p0[axis] < extents_.lo[axis] || p0[axis] > extents_.hi[axis]) return;
            continue;
        }
        double t_lo = (extents_.lo[axis] - p0[axis]) / dir[axis];
        double t_hi = (extents_.hi[axis] - p0[axis]) / dir[axis];
        if (t_lo > t_hi) std::swap(t_lo, t_hi);
        t_enter = std::max(t_enter, t_lo);
        t_exit = std::min(t_exit, t_hi);
    }
    if (t_enter >= t_exit) return;

    // Amanatides-Woo traversal between t_enter and t_exit
    const Vec3 entry = p0 + t_enter * dir;
    int cell[3];
    double t_next[3];
    int step[3];
    double t_delta[3];
    for (int axis = 0; axis < 3; ++axis) {
        cell[axis] = std::clamp(axis_cell(entry[axis], axis), 0, dims_[axis] - 1);
        if (dir[axis] > 0.0) {
            step[axis] = 1;
            const double boundary = extents_.lo[axis] + (cell[axis] + 1) * cell_[axis];
            t_next[axis] = t_enter + (boundary - entry[axis]) / dir[axis];
            t_delta[axis] = cell_[axis] / dir[axis];
        } else if (dir[axis] < 0.0) {
            step[axis] = -1;
            const double boundary = extents_.lo[axis] + cell[axis] * cell_[axis];
            t_next[axis] = t_enter + (boundary - entry[axis]) / dir[axis];
            t_delta[axis] = -cell_[axis] / dir[axis];
        } else {
            step[axis] = 0;
            t_next[axis] = std::numeric_limits<double>::infinity();
            t_delta[axis] = std::numeric_limits<double>::infinity();
        }
    }

    double t = t_enter;
    while (t < t_exit) {
        int next_axis = 0;
        if (t_next[1] < t_next[next_axis]) next_axis = 1;
        if (t_next[2] < t_next[next_axis]) next_axis = 2;
        const double t_stop = std::min(t_next[next_axis], t_exit);
        const double chord = t_stop - t;
        if (chord > 0.0) path_[flat_index(cell[0], cell[1], cell[2])] += weight * chord;
        if (t_stop >= t_exit) break;
        t = t_stop;
        t_next[next_axis] += t_delta[next_axis];
        cell[next_axis] += step[next_axis];
        if (cell[next_axis] < 0 || cell[next_axis] >= dims_[next_axis]) break;
    }
}

void RecordGrid::merge(const RecordGrid& other)
{
    if (other.dims_ != dims_)
        throw ValidationError("grid merge: dimension mismatch");
    for (std::size_t i = 0; i < path_.size(); ++i) {
        path_[i] += other.path_[i];
        absorbed_[i] += other.absorbed_[i];
        evals_[i] += other.evals_[i];
    }
    discarded_ += other.discarded_;
}

std::vector<double> RecordGrid::fluence(std::int64_t n_photons) const
{
    if (n_photons < 1)
        throw ValidationError("fluence: n_photons must be >= 1");
    const double norm = 1.0 / (cell_volume() * static_cast<double>(n_photons));
    std::vector<double> out(path_.size());
    for (std::size_t i = 0; i < path_.size(); ++i) out[i] = path_[i] * norm;
    return out;
}

double RecordGrid::total_path() const
{
    return std::accumulate(path_.begin(), path_.end(), 0.0);
}

double RecordGrid::total_absorbed() const
{
    return std::accumulate(absorbed_.begin(), absorbed_.end(), 0.0);
}

std::int64_t RecordGrid::total_sdf_evals() const
{
    return std::accumulate(evals_.begin(), evals_.end(), std::int64_t{0});
}

Slice extract_slice(const std::vector<double>& field, const Vec3i& dims, int axis, int index)
{
    if (axis < 0 || axis > 2) throw std::out_of_range("slice: axis must be 0, 1 or 2");
    if (index < 0 || index >= dims[axis]) throw std::out_of_range("slice: index out of range");

    const int row_axis = (axis == 0) ? 1 : 0;
    const int col_axis = (axis == 2) ? 1 : 2;

    Slice slice;
    slice.n_rows = dims[row_axis];
    slice.n_cols = dims[col_axis];
    slice.values.resize(static_cast<std::size_t>(slice.n_rows) * slice.n_cols);

    int idx[3];
    idx[axis] = index;
    for (int r = 0; r < slice.n_rows; ++r) {
        idx[row_axis] = r;
        for (int c = 0; c < slice.n_cols; ++c) {
            idx[col_axis] = c;
            const std::int64_t flat =
                (static_cast<std::int64_t>(idx[0]) * dims.y() + idx[1]) * dims.z() + idx[2];
            slice.values[static_cast<std::size_t>(r) * slice.n_cols + c] = field[flat];
        }
    }
    return slice;
}

}  // namespace sdmc
