#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "lvr/geometry.hpp"

namespace lvr {

/// Ellipse in normalized coordinates: the grid spans [-1, 1] on both axes,
/// y pointing up. Intensities add where ellipses overlap.
struct EllipseSpec {
    double cx = 0.0;
    double cy = 0.0;
    double a = 0.5; // semi-axis along the rotated x direction
    double b = 0.5;
    double rotation_deg = 0.0;
    double intensity = 1.0;

    bool contains(double x, double y) const;
    /// Sufficient test: |center| + max(a, b) <= 1.
    bool inside_unit_disk() const;
};

/// The ten ellipses of the modified (high-contrast) Shepp-Logan head.
std::vector<EllipseSpec> shepp_logan_ellipses();

/// Sum of ellipse intensities averaged over supersample x supersample
/// points per pixel. Points outside clip_radius (if > 0) contribute nothing.
Image rasterize_ellipses(const std::vector<EllipseSpec>& ellipses, std::size_t n, std::size_t supersample = 4,
                         double clip_radius = 0.0);

/// Shepp-Logan head on an n x n grid, rescaled to [0, 1]. n >= 32.
Image shepp_logan(std::size_t n);

struct RandomPhantomOptions {
    double background_radius = 0.9;
    double background_intensity = 0.2;
    std::size_t min_ellipses = 3;
    std::size_t max_ellipses = 8;
    double center_radius = 0.6;
    double min_axis = 0.05;
    double max_axis = 0.4;
    double min_intensity = -0.3;
    double max_intensity = 0.5;

    void validate() const;
};

/// Draws from mt19937_64 with hand-written transforms, so sequences are
/// identical across standard libraries (std distributions are not).
class PortableRng {
public:
    explicit PortableRng(std::uint64_t seed) : engine_(seed) {}
    std::uint64_t next() { return engine_(); }
    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Integer in [lo, hi]; modulo bias is negligible for small ranges.
    std::size_t integer(std::size_t lo, std::size_t hi) { return lo + next() % (hi - lo + 1); }
    /// Standard normal via Box-Muller.
    double normal();

private:
    std::mt19937_64 engine_;
};

/// Ellipses of a random phantom; the background disk comes first.
std::vector<EllipseSpec> random_phantom_ellipses(std::uint64_t seed, const RandomPhantomOptions& options = {});

/// Background disk plus random soft-contrast ellipses, confined to the
/// background disk and clipped to [0, 1]. n >= 32.
Image random_phantom(std::size_t n, std::uint64_t seed, const RandomPhantomOptions& options = {});

} // namespace lvr
