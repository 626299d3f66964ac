#include <cmath>
#include <numbers>

#include "lvr/errors.hpp"
#include "lvr/projector.hpp"

namespace lvr::reference {

namespace {

struct Sample {
    double fx, fy;
};

// Straight from the definition: every sample on every ray, direct evaluation
// of the sample position, bounds test per bilinear tap.
template <typename Visit>
void for_each_tap(const Grid& grid, double angle_deg, double offset, Visit&& visit) {
    const auto n = static_cast<long>(grid.nx);
    const double p = grid.pixel_size;
    const double step = 0.5 * p;
    const double half = 0.5 * static_cast<double>(grid.nx) * p * std::sqrt(2.0) + p;
    const auto n_samples = static_cast<long>(std::ceil(2.0 * half / step));
    const double center = 0.5 * (static_cast<double>(grid.nx) - 1.0);
    const double a = angle_deg * std::numbers::pi / 180.0;
    const double c = std::cos(a);
    const double s = std::sin(a);
    for (long j = 0; j < n_samples; ++j) {
        const double t = -half + (static_cast<double>(j) + 0.5) * step;
        const double x = offset * c - t * s;
        const double y = offset * s + t * c;
        const double fx = x / p + center;
        const double fy = center - y / p;
        const long ix = static_cast<long>(std::floor(fx));
        const long iy = static_cast<long>(std::floor(fy));
        const double wx = fx - std::floor(fx);
        const double wy = fy - std::floor(fy);
        const long xs[2] = {ix, ix + 1};
        const long ys[2] = {iy, iy + 1};
        const double wxs[2] = {1.0 - wx, wx};
        const double wys[2] = {1.0 - wy, wy};
        for (int dy = 0; dy < 2; ++dy)
            for (int dx = 0; dx < 2; ++dx)
                if (xs[dx] >= 0 && xs[dx] < n && ys[dy] >= 0 && ys[dy] < n)
                    visit(static_cast<std::size_t>(ys[dy] * n + xs[dx]), wxs[dx] * wys[dy] * step);
    }
}

} // namespace

Sinogram forward_project(const Image& img, const ProjectionGeometry& geom) {
    geom.validate_for(img.grid);
    Sinogram sino(geom);
    for (std::size_t v = 0; v < geom.n_views(); ++v)
        for (std::size_t k = 0; k < geom.n_detectors; ++k) {
            double acc = 0.0;
            for_each_tap(img.grid, geom.angles_deg[v], geom.detector_offset(k),
                         [&](std::size_t idx, double w) { acc += w * img.data[idx]; });
            sino.row(v)[k] = acc;
        }
    return sino;
}

Image back_project(const Sinogram& sino, const Grid& grid) {
    const auto& geom = sino.geometry;
    geom.validate_for(grid);
    Image img(grid);
    for (std::size_t v = 0; v < geom.n_views(); ++v)
        for (std::size_t k = 0; k < geom.n_detectors; ++k) {
            const double value = sino.row(v)[k];
            for_each_tap(grid, geom.angles_deg[v], geom.detector_offset(k),
                         [&](std::size_t idx, double w) { img.data[idx] += w * value; });
        }
    return img;
}

} // namespace lvr::reference
