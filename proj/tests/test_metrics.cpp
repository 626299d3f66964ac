#include <doctest.h>

#include <cmath>
#include <random>

#include "lvr/errors.hpp"
#include "lvr/metrics.hpp"
#include "test_support.hpp"

using namespace lvr;

namespace {

Image patterned(std::size_t rows, std::size_t cols, double (*f)(double, double)) {
    Grid g;
    g.nx = cols;
    g.ny = rows;
    Image img(g);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c)
            img.at(r, c) = f(static_cast<double>(r), static_cast<double>(c));
    return img;
}

double wave(double r, double c) { return 0.5 + 0.4 * std::sin(0.3 * r + 0.2 * c); }
double wave_noisy(double r, double c) { return wave(r, c) + 0.1 * std::cos(0.7 * r - 0.5 * c); }
double ripple(double r, double c) { return 0.5 + 0.3 * std::cos(0.11 * r * c / 7.0); }

Image noisy(const Image& base, double sigma, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, sigma);
    Image out = base;
    for (double& v : out.data)
        v += n(rng);
    return out;
}

} // namespace

TEST_CASE("psnr of known differences") {
    const Image zero(Grid(16));
    CHECK(psnr(zero, zero).infinite);
    CHECK(std::isinf(psnr(zero, zero).db));

    Image tenth(Grid(16));
    std::fill(tenth.data.begin(), tenth.data.end(), 0.1);
    const Psnr p = psnr(tenth, zero);
    CHECK_FALSE(p.infinite);
    CHECK(p.db == doctest::Approx(20.0).epsilon(1e-12));
    CHECK(psnr(tenth, zero, 2.0).db == doctest::Approx(20.0 + 20.0 * std::log10(2.0)).epsilon(1e-12));

    // A common offset leaves the error unchanged.
    std::mt19937_64 rng(1);
    const Image a = test::random_image(Grid(16), rng), b = test::random_image(Grid(16), rng);
    Image a2 = a, b2 = b;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        a2.data[i] += 3.0;
        b2.data[i] += 3.0;
    }
    CHECK(psnr(a2, b2).db == doctest::Approx(psnr(a, b).db).epsilon(1e-12));
    CHECK(psnr(a, b).db == doctest::Approx(psnr(b, a).db).epsilon(1e-14));

    CHECK_THROWS_AS(psnr(a, Image(Grid(8))), ConfigError);
    CHECK_THROWS_AS(psnr(a, b, 0.0), ConfigError);
}

TEST_CASE("psnr restricted to a region") {
    Image x(Grid(16));
    const Image ref(Grid(16));
    x.at(0, 0) = 5.0;
    CHECK(psnr(x, ref, 1.0, Roi{4, 4, 8, 8}).infinite);
    x.at(5, 6) = 0.5;
    // One pixel off by 0.5 among 64.
    CHECK(psnr(x, ref, 1.0, Roi{4, 4, 8, 8}).db == doctest::Approx(10.0 * std::log10(64.0 / 0.25)).epsilon(1e-12));
    CHECK_THROWS_AS(psnr(x, ref, 1.0, Roi{10, 10, 8, 8}), ConfigError);
}

TEST_CASE("ssim matches reference values from an independent implementation") {
    // Gaussian-weighted SSIM (sigma 1.5, population covariance) over valid windows.
    const Image x = patterned(40, 33, wave);
    const Image y = patterned(40, 33, wave_noisy);
    CHECK(ssim(y, x) == doctest::Approx(0.8745921600292327).epsilon(1e-10));
    const Image z = patterned(40, 33, ripple);
    CHECK(ssim(z, x, 2.0) == doctest::Approx(-0.13088566254388775).epsilon(1e-10));
}

TEST_CASE("ssim basic properties") {
    std::mt19937_64 rng(2);
    const Image x = test::random_image(Grid(24), rng);
    CHECK(ssim(x, x) == doctest::Approx(1.0).epsilon(1e-14));

    const Image y = test::random_image(Grid(24), rng);
    CHECK(std::abs(ssim(x, y) - ssim(y, x)) <= 1e-12);

    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        std::mt19937_64 r(seed);
        const double s = ssim(test::random_image(Grid(16), r), test::random_image(Grid(16), r));
        CHECK(s >= -1.0);
        CHECK(s <= 1.0);
    }

    // Constant images reduce to the luminance term.
    Image a(Grid(16)), b(Grid(16));
    std::fill(a.data.begin(), a.data.end(), 0.3);
    std::fill(b.data.begin(), b.data.end(), 0.7);
    const double c1 = 0.01 * 0.01;
    CHECK(ssim(a, b) == doctest::Approx((2 * 0.3 * 0.7 + c1) / (0.09 + 0.49 + c1)).epsilon(1e-12));
}

TEST_CASE("ssim falls as noise grows") {
    const Image base = patterned(48, 48, wave);
    double prev = 1.0;
    for (double sigma : {0.01, 0.03, 0.1, 0.3}) {
        const double s = ssim(noisy(base, sigma, 5), base);
        CHECK(s < prev);
        prev = s;
    }
}

TEST_CASE("ssim on a region equals ssim of the cropped images") {
    std::mt19937_64 rng(3);
    const Image x = test::random_image(Grid(32), rng);
    const Image y = noisy(x, 0.2, 4);
    const Roi roi{3, 5, 20, 14};
    Grid g;
    g.nx = roi.cols;
    g.ny = roi.rows;
    Image cx(g), cy(g);
    for (std::size_t r = 0; r < roi.rows; ++r)
        for (std::size_t c = 0; c < roi.cols; ++c) {
            cx.at(r, c) = x.at(roi.row + r, roi.col + c);
            cy.at(r, c) = y.at(roi.row + r, roi.col + c);
        }
    CHECK(ssim(x, y, 1.0, roi) == doctest::Approx(ssim(cx, cy)).epsilon(1e-14));
    CHECK(psnr(x, y, 1.0, roi).db == doctest::Approx(psnr(cx, cy).db).epsilon(1e-14));
    CHECK_THROWS_AS(ssim(x, y, 1.0, Roi{0, 0, 10, 20}), ConfigError);
    CHECK_THROWS_AS(ssim(Image(Grid(8)), Image(Grid(8))), ConfigError);
}

TEST_CASE("mean_std uses the population deviation") {
    const auto ms = mean_std({2, 4, 4, 4, 5, 5, 7, 9});
    CHECK(ms.mean == 5.0);
    CHECK(ms.std == 2.0);
    CHECK(mean_std({}).mean == 0.0);
    const auto r = evaluate_metrics(patterned(16, 16, wave), patterned(16, 16, wave));
    CHECK(r.psnr.infinite);
    CHECK(r.ssim == doctest::Approx(1.0));
}
