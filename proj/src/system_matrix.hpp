#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "lvr/geometry.hpp"

namespace lvr::detail {

/// The projector for one fixed (grid, geometry) pair stored as a sparse
/// matrix, one row per (view, detector) bin, with a column-major copy so both
/// products are gathers.
class SystemMatrix {
public:
    SystemMatrix(const Grid& grid, const ProjectionGeometry& geom);

    const Grid& grid() const { return grid_; }
    const ProjectionGeometry& geometry() const { return geom_; }
    std::size_t nonzeros() const { return row_val_.size(); }

    void forward(const double* img, double* sino) const;
    void back(const double* sino, double* img) const;

private:
    Grid grid_;
    ProjectionGeometry geom_;
    std::vector<std::size_t> row_ptr_;
    std::vector<std::uint32_t> row_col_;
    std::vector<double> row_val_;
    std::vector<std::size_t> col_ptr_;
    std::vector<std::uint32_t> col_row_;
    std::vector<double> col_val_;
};

/// Shared, lazily built matrix for a geometry. Keeps a handful of recent entries.
std::shared_ptr<const SystemMatrix> cached_system_matrix(const Grid& grid, const ProjectionGeometry& geom);

} // namespace lvr::detail
