#include "lvr/geometry.hpp"

#include <cmath>
#include <string>

#include "lvr/errors.hpp"

namespace lvr {

void Grid::validate() const {
    if (nx < 2 || ny < 2)
        throw ConfigError("grid must be at least 2x2");
    if (nx != ny)
        throw ConfigError("grid must be square, got " + std::to_string(nx) + "x" + std::to_string(ny));
    if (!(pixel_size > 0.0) || !std::isfinite(pixel_size))
        throw ConfigError("pixel size must be positive");
}

void ProjectionGeometry::validate() const {
    if (angles_deg.empty())
        throw ConfigError("geometry has no views");
    if (n_detectors == 0)
        throw ConfigError("geometry has no detector bins");
    if (!(detector_spacing > 0.0) || !std::isfinite(detector_spacing))
        throw ConfigError("detector spacing must be positive");
    for (std::size_t i = 0; i < angles_deg.size(); ++i) {
        const double a = angles_deg[i];
        if (!(a >= 0.0 && a < 180.0))
            throw ConfigError("angle outside [0, 180): " + std::to_string(a));
        if (i > 0 && !(a > angles_deg[i - 1]))
            throw ConfigError("angles must be strictly increasing");
    }
}

void ProjectionGeometry::validate_for(const Grid& grid) const {
    grid.validate();
    validate();
    const double diagonal = std::sqrt(2.0) * static_cast<double>(grid.nx) * grid.pixel_size;
    const double coverage = static_cast<double>(n_detectors) * detector_spacing;
    if (coverage + 1e-9 < diagonal)
        throw ConfigError("detector covers " + std::to_string(coverage) +
                          " but the grid diagonal is " + std::to_string(diagonal));
}

std::size_t default_detector_count(std::size_t n) {
    auto count = static_cast<std::size_t>(std::ceil(std::sqrt(2.0) * static_cast<double>(n)));
    return count + (count % 2);
}

ProjectionGeometry uniform_geometry(const Grid& grid, std::size_t n_views) {
    grid.validate();
    if (n_views == 0)
        throw ConfigError("need at least one view");
    ProjectionGeometry g;
    g.angles_deg.resize(n_views);
    for (std::size_t i = 0; i < n_views; ++i)
        g.angles_deg[i] = 180.0 * static_cast<double>(i) / static_cast<double>(n_views);
    g.n_detectors = default_detector_count(grid.nx);
    g.detector_spacing = grid.pixel_size;
    return g;
}

ProjectionGeometry subset_geometry(const ProjectionGeometry& geom, std::span<const std::size_t> views) {
    ProjectionGeometry out;
    out.n_detectors = geom.n_detectors;
    out.detector_spacing = geom.detector_spacing;
    out.angles_deg.reserve(views.size());
    for (std::size_t v : views) {
        if (v >= geom.n_views())
            throw ConfigError("view index out of range");
        out.angles_deg.push_back(geom.angles_deg[v]);
    }
    out.validate();
    return out;
}

Image::Image(const Grid& g, std::vector<double> values) : grid(g), data(std::move(values)) {
    if (data.size() != grid.size())
        throw ConfigError("image data does not match grid");
}

Sinogram::Sinogram(const ProjectionGeometry& g, std::vector<double> values)
    : geometry(g), data(std::move(values)) {
    if (data.size() != geometry.n_views() * geometry.n_detectors)
        throw ConfigError("sinogram data does not match geometry");
}

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw ConfigError("dot: length mismatch");
    long double acc = 0.0L;
    for (std::size_t i = 0; i < a.size(); ++i)
        acc += static_cast<long double>(a[i]) * b[i];
    return static_cast<double>(acc);
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

} // namespace lvr
