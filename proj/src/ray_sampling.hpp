#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "lvr/geometry.hpp"

namespace lvr::detail {

/// Sample layout shared by the forward and transposed kernels. A ray is
/// parametrized as d * (cos a, sin a) + t * (-sin a, cos a) with
/// t_j = -half_length + (j + 1/2) * step, j in [0, n_samples).
struct RaySampling {
    double step;
    double half_length;
    std::size_t n_samples;
    double center; // (n - 1) / 2 in pixel units
    double inv_pixel;

    explicit RaySampling(const Grid& grid)
        : step(0.5 * grid.pixel_size),
          half_length(0.5 * static_cast<double>(grid.nx) * grid.pixel_size * std::sqrt(2.0) + grid.pixel_size),
          n_samples(static_cast<std::size_t>(std::ceil(2.0 * half_length / step))),
          center(0.5 * (static_cast<double>(grid.nx) - 1.0)),
          inv_pixel(1.0 / grid.pixel_size) {}
};

/// Continuous pixel coordinates of sample j: col = fx0 + j*dfx, row = fy0 + j*dfy.
struct RayLine {
    double fx0, dfx, fy0, dfy;
};

inline RayLine ray_line(const RaySampling& rs, double cos_a, double sin_a, double offset) {
    const double t0 = -rs.half_length + 0.5 * rs.step;
    const double x0 = offset * cos_a - t0 * sin_a;
    const double y0 = offset * sin_a + t0 * cos_a;
    return {x0 * rs.inv_pixel + rs.center, -sin_a * rs.step * rs.inv_pixel,
            rs.center - y0 * rs.inv_pixel, -cos_a * rs.step * rs.inv_pixel};
}

/// Range of j for which a + j*b lies in (-1, n); conservative by one sample.
inline void clip_axis(double a, double b, double n, std::size_t n_samples, std::ptrdiff_t& lo, std::ptrdiff_t& hi) {
    if (std::abs(b) < 1e-12) {
        if (!(a > -1.0 && a < n)) {
            lo = 0;
            hi = 0;
        }
        return;
    }
    double j1 = (-1.0 - a) / b;
    double j2 = (n - a) / b;
    if (j1 > j2)
        std::swap(j1, j2);
    const auto s = static_cast<double>(n_samples);
    const auto jlo = static_cast<std::ptrdiff_t>(std::floor(std::clamp(j1, -1.0, s))) - 1;
    const auto jhi = static_cast<std::ptrdiff_t>(std::ceil(std::clamp(j2, -1.0, s))) + 2;
    lo = std::max(lo, jlo);
    hi = std::min(hi, jhi);
}

/// Calls visit(index, weight) for every in-grid bilinear tap of every sample on
/// the ray, in sample order. Samples whose footprint misses the grid contribute
/// nothing and are skipped.
template <typename Visit>
inline void walk_ray(const RaySampling& rs, const RayLine& line, std::size_t n, Visit&& visit) {
    std::ptrdiff_t lo = 0;
    auto hi = static_cast<std::ptrdiff_t>(rs.n_samples);
    const auto nd = static_cast<double>(n);
    clip_axis(line.fx0, line.dfx, nd, rs.n_samples, lo, hi);
    clip_axis(line.fy0, line.dfy, nd, rs.n_samples, lo, hi);
    const auto ni = static_cast<std::ptrdiff_t>(n);
    for (std::ptrdiff_t j = lo; j < hi; ++j) {
        const double fx = line.fx0 + static_cast<double>(j) * line.dfx;
        const double fy = line.fy0 + static_cast<double>(j) * line.dfy;
        const double flx = std::floor(fx);
        const double fly = std::floor(fy);
        const auto ix = static_cast<std::ptrdiff_t>(flx);
        const auto iy = static_cast<std::ptrdiff_t>(fly);
        if (ix < -1 || ix >= ni || iy < -1 || iy >= ni)
            continue;
        const double wx = fx - flx;
        const double wy = fy - fly;
        const bool x0_in = ix >= 0;
        const bool x1_in = ix + 1 < ni;
        const bool y0_in = iy >= 0;
        const bool y1_in = iy + 1 < ni;
        if (y0_in) {
            const std::size_t row = static_cast<std::size_t>(iy) * n;
            if (x0_in)
                visit(row + static_cast<std::size_t>(ix), (1.0 - wx) * (1.0 - wy));
            if (x1_in)
                visit(row + static_cast<std::size_t>(ix + 1), wx * (1.0 - wy));
        }
        if (y1_in) {
            const std::size_t row = static_cast<std::size_t>(iy + 1) * n;
            if (x0_in)
                visit(row + static_cast<std::size_t>(ix), (1.0 - wx) * wy);
            if (x1_in)
                visit(row + static_cast<std::size_t>(ix + 1), wx * wy);
        }
    }
}

inline double deg_to_rad(double deg) { return deg * (3.14159265358979323846 / 180.0); }

} // namespace lvr::detail
