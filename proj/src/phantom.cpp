#include "lvr/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lvr/errors.hpp"

namespace lvr {

bool EllipseSpec::contains(double x, double y) const {
    const double t = rotation_deg * std::numbers::pi / 180.0;
    const double dx = x - cx, dy = y - cy;
    const double u = dx * std::cos(t) + dy * std::sin(t);
    const double v = -dx * std::sin(t) + dy * std::cos(t);
    return (u * u) / (a * a) + (v * v) / (b * b) <= 1.0;
}

bool EllipseSpec::inside_unit_disk() const { return std::hypot(cx, cy) + std::max(a, b) <= 1.0; }

std::vector<EllipseSpec> shepp_logan_ellipses() {
    return {
        {0.0, 0.0, 0.69, 0.92, 0.0, 1.0},
        {0.0, -0.0184, 0.6624, 0.874, 0.0, -0.8},
        {0.22, 0.0, 0.11, 0.31, -18.0, -0.2},
        {-0.22, 0.0, 0.16, 0.41, 18.0, -0.2},
        {0.0, 0.35, 0.21, 0.25, 0.0, 0.1},
        {0.0, 0.1, 0.046, 0.046, 0.0, 0.1},
        {0.0, -0.1, 0.046, 0.046, 0.0, 0.1},
        {-0.08, -0.605, 0.046, 0.023, 0.0, 0.1},
        {0.0, -0.605, 0.023, 0.023, 0.0, 0.1},
        {0.06, -0.605, 0.023, 0.046, 0.0, 0.1},
    };
}

Image rasterize_ellipses(const std::vector<EllipseSpec>& ellipses, std::size_t n, std::size_t supersample,
                         double clip_radius) {
    if (n < 2 || supersample == 0)
        throw ConfigError("rasterize_ellipses: need n >= 2 and supersample >= 1");
    Image img{Grid(n)};
    const double half = 0.5 * static_cast<double>(n);
    const double c0 = 0.5 * (static_cast<double>(n) - 1.0);
    const double inv_s = 1.0 / static_cast<double>(supersample);
    const double weight = inv_s * inv_s;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t row = 0; row < static_cast<std::ptrdiff_t>(n); ++row)
        for (std::size_t col = 0; col < n; ++col) {
            double acc = 0.0;
            for (std::size_t sy = 0; sy < supersample; ++sy)
                for (std::size_t sx = 0; sx < supersample; ++sx) {
                    const double px = static_cast<double>(col) + (static_cast<double>(sx) + 0.5) * inv_s - 0.5;
                    const double py = static_cast<double>(row) + (static_cast<double>(sy) + 0.5) * inv_s - 0.5;
                    const double x = (px - c0) / half;
                    const double y = (c0 - py) / half;
                    if (clip_radius > 0.0 && x * x + y * y > clip_radius * clip_radius)
                        continue;
                    for (const auto& e : ellipses)
                        if (e.contains(x, y))
                            acc += e.intensity;
                }
            img.at(static_cast<std::size_t>(row), col) = acc * weight;
        }
    return img;
}

Image shepp_logan(std::size_t n) {
    if (n < 32)
        throw ConfigError("shepp_logan: n must be >= 32, got " + std::to_string(n));
    Image img = rasterize_ellipses(shepp_logan_ellipses(), n);
    const auto [lo, hi] = std::minmax_element(img.data.begin(), img.data.end());
    const double min = *lo, range = *hi - *lo;
    for (double& v : img.data)
        v = (v - min) / range;
    return img;
}

double PortableRng::normal() {
    double u1 = uniform();
    while (u1 <= 0.0)
        u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

void RandomPhantomOptions::validate() const {
    if (!(background_radius > 0.0 && background_radius <= 1.0))
        throw ConfigError("random phantom: background radius must be in (0, 1]");
    if (min_ellipses > max_ellipses)
        throw ConfigError("random phantom: min_ellipses > max_ellipses");
    if (!(min_axis > 0.0 && min_axis <= max_axis && max_axis <= 1.0))
        throw ConfigError("random phantom: axis range must satisfy 0 < min <= max <= 1");
    if (min_intensity > max_intensity || center_radius < 0.0)
        throw ConfigError("random phantom: invalid intensity or center range");
}

std::vector<EllipseSpec> random_phantom_ellipses(std::uint64_t seed, const RandomPhantomOptions& o) {
    o.validate();
    PortableRng rng(seed);
    std::vector<EllipseSpec> out;
    out.push_back({0.0, 0.0, o.background_radius, o.background_radius, 0.0, o.background_intensity});
    const std::size_t count = rng.integer(o.min_ellipses, o.max_ellipses);
    while (out.size() < count + 1) {
        // Uniform over the disk of admissible centers.
        const double r = o.center_radius * std::sqrt(rng.uniform());
        const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
        EllipseSpec e;
        e.cx = r * std::cos(phi);
        e.cy = r * std::sin(phi);
        e.a = rng.uniform(o.min_axis, o.max_axis);
        e.b = rng.uniform(o.min_axis, o.max_axis);
        e.rotation_deg = rng.uniform(0.0, 180.0);
        e.intensity = rng.uniform(o.min_intensity, o.max_intensity);
        if (e.inside_unit_disk())
            out.push_back(e);
    }
    return out;
}

Image random_phantom(std::size_t n, std::uint64_t seed, const RandomPhantomOptions& options) {
    if (n < 32)
        throw ConfigError("random_phantom: n must be >= 32, got " + std::to_string(n));
    Image img = rasterize_ellipses(random_phantom_ellipses(seed, options), n, 4, options.background_radius);
    for (double& v : img.data)
        v = std::clamp(v, 0.0, 1.0);
    return img;
}

} // namespace lvr
