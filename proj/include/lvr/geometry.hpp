#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace lvr {

/// Square pixel grid. Row 0 is the top of the image (largest y).
struct Grid {
    std::size_t nx = 0;
    std::size_t ny = 0;
    double pixel_size = 1.0;

    Grid() = default;
    Grid(std::size_t n, double pixel = 1.0) : nx(n), ny(n), pixel_size(pixel) {}

    std::size_t size() const { return nx * ny; }
    void validate() const;

    bool operator==(const Grid&) const = default;
};

/// Parallel-beam geometry. A ray at angle a and offset d is the line
/// x cos(a) + y sin(a) = d; detector bin k sits at d_k = (k - (n-1)/2) * spacing.
struct ProjectionGeometry {
    std::vector<double> angles_deg;
    std::size_t n_detectors = 0;
    double detector_spacing = 1.0;

    std::size_t n_views() const { return angles_deg.size(); }
    double detector_offset(std::size_t bin) const {
        return (static_cast<double>(bin) - 0.5 * (static_cast<double>(n_detectors) - 1.0)) *
               detector_spacing;
    }

    void validate() const;
    /// Throws ConfigError when the detector is too short to cover the grid diagonal.
    void validate_for(const Grid& grid) const;

    bool operator==(const ProjectionGeometry&) const = default;
};

/// ceil(sqrt(2) * n) rounded up to even.
std::size_t default_detector_count(std::size_t n);

/// M angles uniform over [0, 180), detector sized for the grid.
ProjectionGeometry uniform_geometry(const Grid& grid, std::size_t n_views);

/// The sub-geometry keeping only the given view indices.
ProjectionGeometry subset_geometry(const ProjectionGeometry& geom, std::span<const std::size_t> views);

struct Image {
    Grid grid;
    std::vector<double> data; // row-major (ny, nx)

    Image() = default;
    explicit Image(const Grid& g) : grid(g), data(g.size(), 0.0) {}
    Image(const Grid& g, std::vector<double> values);

    double& at(std::size_t row, std::size_t col) { return data[row * grid.nx + col]; }
    double at(std::size_t row, std::size_t col) const { return data[row * grid.nx + col]; }
};

struct Sinogram {
    ProjectionGeometry geometry;
    std::vector<double> data; // row-major (n_views, n_detectors)

    Sinogram() = default;
    explicit Sinogram(const ProjectionGeometry& g)
        : geometry(g), data(g.n_views() * g.n_detectors, 0.0) {}
    Sinogram(const ProjectionGeometry& g, std::vector<double> values);

    std::span<double> row(std::size_t view) {
        return {data.data() + view * geometry.n_detectors, geometry.n_detectors};
    }
    std::span<const double> row(std::size_t view) const {
        return {data.data() + view * geometry.n_detectors, geometry.n_detectors};
    }
};

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

} // namespace lvr
