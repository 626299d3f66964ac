#pragma once

#include <cmath>
#include <filesystem>
#include <string>
#include <random>
#include <vector>

#include "lvr/geometry.hpp"

namespace lvr::test {

inline std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v)
        x = u(rng);
    return v;
}

inline Image random_image(const Grid& g, std::mt19937_64& rng) { return Image(g, random_vector(g.size(), rng)); }

inline Sinogram random_sinogram(const ProjectionGeometry& geom, std::mt19937_64& rng) {
    return Sinogram(geom, random_vector(geom.n_views() * geom.n_detectors, rng));
}

inline double rel_adjoint_gap(double lhs, double rhs, double scale) { return std::abs(lhs - rhs) / scale; }

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

/// Indicator of pixels whose center lies in the centered disk of radius r (pixels).
inline Image centered_disk(std::size_t n, double r) {
    Image img{Grid(n)};
    const double c = 0.5 * (static_cast<double>(n) - 1.0);
    for (std::size_t row = 0; row < n; ++row)
        for (std::size_t col = 0; col < n; ++col) {
            const double x = static_cast<double>(col) - c, y = c - static_cast<double>(row);
            img.at(row, col) = x * x + y * y <= r * r ? 1.0 : 0.0;
        }
    return img;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("lvr-" + tag + "-" + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

} // namespace lvr::test
