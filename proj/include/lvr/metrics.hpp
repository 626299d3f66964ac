#pragma once

#include <optional>
#include <vector>

#include "lvr/geometry.hpp"

namespace lvr {

/// Rectangular region, in pixels.
struct Roi {
    std::size_t row = 0;
    std::size_t col = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;
};

struct Psnr {
    double db = 0.0;        // +inf when the images are identical
    bool infinite = false;
};

/// 10 log10(range^2 / MSE).
Psnr psnr(const Image& x, const Image& ref, double data_range = 1.0, const std::optional<Roi>& roi = std::nullopt);

/// Single-scale SSIM with an 11x11 Gaussian window (sigma 1.5, K1 0.01,
/// K2 0.03) averaged over window placements that fit inside the image/ROI.
double ssim(const Image& x, const Image& ref, double data_range = 1.0, const std::optional<Roi>& roi = std::nullopt);

struct MetricReport {
    Psnr psnr;
    double ssim = 0.0;
    double data_range = 1.0;
};

MetricReport evaluate_metrics(const Image& x, const Image& ref, double data_range = 1.0);

struct MeanStd {
    double mean = 0.0;
    double std = 0.0; // population standard deviation
};

MeanStd mean_std(const std::vector<double>& values);

} // namespace lvr
