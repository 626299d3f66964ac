#include "lvr/projector.hpp"

#include <cmath>
#include <numbers>

#include "lvr/errors.hpp"
#include "ray_sampling.hpp"

namespace lvr {

namespace {

// Views are back projected in fixed-size blocks, each into its own buffer, and
// the buffers are summed in block order, so the result does not depend on the
// number of threads.
constexpr std::size_t kViewsPerBlock = 8;

void check_image(const Image& img) {
    img.grid.validate();
    if (img.data.size() != img.grid.size())
        throw ConfigError("image data does not match its grid");
}

void check_sinogram(const Sinogram& sino) {
    sino.geometry.validate();
    if (sino.data.size() != sino.geometry.n_views() * sino.geometry.n_detectors)
        throw ConfigError("sinogram data does not match its geometry");
}

} // namespace

Sinogram forward_project(const Image& img, const ProjectionGeometry& geom) {
    check_image(img);
    geom.validate_for(img.grid);
    const std::size_t n = img.grid.nx;
    const detail::RaySampling rs(img.grid);
    Sinogram sino(geom);
    const auto n_views = static_cast<std::ptrdiff_t>(geom.n_views());
    const double* pixels = img.data.data();

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t v = 0; v < n_views; ++v) {
        const double a = detail::deg_to_rad(geom.angles_deg[static_cast<std::size_t>(v)]);
        const double c = std::cos(a);
        const double s = std::sin(a);
        auto row = sino.row(static_cast<std::size_t>(v));
        for (std::size_t k = 0; k < geom.n_detectors; ++k) {
            const auto line = detail::ray_line(rs, c, s, geom.detector_offset(k));
            double acc = 0.0;
            detail::walk_ray(rs, line, n, [&](std::size_t idx, double w) { acc += w * pixels[idx]; });
            row[k] = acc * rs.step;
        }
    }
    return sino;
}

Image back_project(const Sinogram& sino, const Grid& grid) {
    check_sinogram(sino);
    const auto& geom = sino.geometry;
    geom.validate_for(grid);
    const std::size_t n = grid.nx;
    const std::size_t n_pix = grid.size();
    const detail::RaySampling rs(grid);
    const std::size_t n_blocks = (geom.n_views() + kViewsPerBlock - 1) / kViewsPerBlock;
    std::vector<double> partial(n_blocks * n_pix, 0.0);

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(n_blocks); ++b) {
        double* acc = partial.data() + static_cast<std::size_t>(b) * n_pix;
        const std::size_t v_end = std::min(geom.n_views(), (static_cast<std::size_t>(b) + 1) * kViewsPerBlock);
        for (std::size_t v = static_cast<std::size_t>(b) * kViewsPerBlock; v < v_end; ++v) {
            const double a = detail::deg_to_rad(geom.angles_deg[v]);
            const double c = std::cos(a);
            const double s = std::sin(a);
            const auto row = sino.row(v);
            for (std::size_t k = 0; k < geom.n_detectors; ++k) {
                const double value = row[k] * rs.step;
                if (value == 0.0)
                    continue;
                const auto line = detail::ray_line(rs, c, s, geom.detector_offset(k));
                detail::walk_ray(rs, line, n, [&](std::size_t idx, double w) { acc[idx] += w * value; });
            }
        }
    }

    Image img(grid);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t p = 0; p < static_cast<std::ptrdiff_t>(n_pix); ++p) {
        double sum = 0.0;
        for (std::size_t b = 0; b < n_blocks; ++b)
            sum += partial[b * n_pix + static_cast<std::size_t>(p)];
        img.data[static_cast<std::size_t>(p)] = sum;
    }
    return img;
}

double fbp_scale(std::size_t n_views, const Grid& grid) {
    if (n_views == 0)
        throw ConfigError("fbp_scale: no views");
    return std::numbers::pi / (2.0 * static_cast<double>(n_views) * grid.pixel_size * grid.pixel_size);
}

Image fbp(const Sinogram& sino, const Grid& grid) {
    Image img = back_project(ramp_filter(sino), grid);
    const double c = fbp_scale(sino.geometry.n_views(), grid);
    for (double& v : img.data)
        v *= c;
    return img;
}

Sinogram fbp_transpose(const Image& img, const ProjectionGeometry& geom) {
    Sinogram sino = ramp_filter(forward_project(img, geom));
    const double c = fbp_scale(geom.n_views(), img.grid);
    for (double& v : sino.data)
        v *= c;
    return sino;
}

} // namespace lvr
