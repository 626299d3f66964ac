#include "lvr/metrics.hpp"

#include <cmath>
#include <limits>

#include "lvr/errors.hpp"

namespace lvr {

namespace {

constexpr std::size_t kWindow = 11;

Roi resolve_roi(const Image& x, const Image& ref, const std::optional<Roi>& roi) {
    if (x.grid.nx != ref.grid.nx || x.grid.ny != ref.grid.ny || x.data.size() != ref.data.size())
        throw ConfigError("metrics: image shapes differ");
    if (!roi)
        return {0, 0, x.grid.ny, x.grid.nx};
    if (roi->rows == 0 || roi->cols == 0 || roi->row + roi->rows > x.grid.ny || roi->col + roi->cols > x.grid.nx)
        throw ConfigError("metrics: ROI outside the image");
    return *roi;
}

std::vector<double> gaussian_window() {
    std::vector<double> g(kWindow);
    double total = 0.0;
    for (std::size_t i = 0; i < kWindow; ++i) {
        const double d = static_cast<double>(i) - 5.0;
        g[i] = std::exp(-d * d / (2.0 * 1.5 * 1.5));
        total += g[i];
    }
    for (double& v : g)
        v /= total;
    return g;
}

} // namespace

Psnr psnr(const Image& x, const Image& ref, double data_range, const std::optional<Roi>& roi) {
    if (!(data_range > 0.0))
        throw ConfigError("psnr: data_range must be positive");
    const Roi r = resolve_roi(x, ref, roi);
    double sse = 0.0;
    for (std::size_t row = r.row; row < r.row + r.rows; ++row)
        for (std::size_t col = r.col; col < r.col + r.cols; ++col) {
            const double d = x.at(row, col) - ref.at(row, col);
            sse += d * d;
        }
    const double mse = sse / static_cast<double>(r.rows * r.cols);
    if (mse == 0.0)
        return {std::numeric_limits<double>::infinity(), true};
    return {10.0 * std::log10(data_range * data_range / mse), false};
}

double ssim(const Image& x, const Image& ref, double data_range, const std::optional<Roi>& roi) {
    if (!(data_range > 0.0))
        throw ConfigError("ssim: data_range must be positive");
    const Roi r = resolve_roi(x, ref, roi);
    if (r.rows < kWindow || r.cols < kWindow)
        throw ConfigError("ssim: region must be at least 11x11");
    const auto g = gaussian_window();
    const double c1 = (0.01 * data_range) * (0.01 * data_range);
    const double c2 = (0.03 * data_range) * (0.03 * data_range);
    const std::size_t out_rows = r.rows - kWindow + 1, out_cols = r.cols - kWindow + 1;
    double total = 0.0;
    for (std::size_t i = 0; i < out_rows; ++i)
        for (std::size_t j = 0; j < out_cols; ++j) {
            double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
            for (std::size_t u = 0; u < kWindow; ++u)
                for (std::size_t v = 0; v < kWindow; ++v) {
                    const double w = g[u] * g[v];
                    const double a = x.at(r.row + i + u, r.col + j + v);
                    const double b = ref.at(r.row + i + u, r.col + j + v);
                    mx += w * a;
                    my += w * b;
                    sxx += w * a * a;
                    syy += w * b * b;
                    sxy += w * a * b;
                }
            const double vx = sxx - mx * mx, vy = syy - my * my, cxy = sxy - mx * my;
            total += ((2 * mx * my + c1) * (2 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
        }
    return total / static_cast<double>(out_rows * out_cols);
}

MetricReport evaluate_metrics(const Image& x, const Image& ref, double data_range) {
    return {psnr(x, ref, data_range), ssim(x, ref, data_range), data_range};
}

MeanStd mean_std(const std::vector<double>& values) {
    if (values.empty())
        return {};
    double mean = 0.0;
    for (double v : values)
        mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values)
        var += (v - mean) * (v - mean);
    return {mean, std::sqrt(var / static_cast<double>(values.size()))};
}

} // namespace lvr
