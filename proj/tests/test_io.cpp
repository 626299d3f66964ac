#include <doctest.h>

#include <png.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <random>

#include "lvr/errors.hpp"
#include "lvr/io.hpp"
#include "lvr/projector.hpp"
#include "test_support.hpp"

using namespace lvr;

namespace {

void write_bytes(const std::filesystem::path& p, const std::string& bytes) {
    std::ofstream(p, std::ios::binary) << bytes;
}

std::uint32_t u32_at(const std::string& bytes, std::size_t offset) {
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i)
        v = (v << 8) | static_cast<unsigned char>(bytes[offset + static_cast<std::size_t>(i)]);
    return v;
}

std::vector<unsigned char> read_png_gray(const std::filesystem::path& p, std::uint32_t& w, std::uint32_t& h) {
    png_image img;
    std::memset(&img, 0, sizeof img);
    img.version = PNG_IMAGE_VERSION;
    REQUIRE(png_image_begin_read_from_file(&img, p.c_str()));
    img.format = PNG_FORMAT_GRAY;
    std::vector<unsigned char> buf(PNG_IMAGE_SIZE(img));
    REQUIRE(png_image_finish_read(&img, nullptr, buf.data(), 0, nullptr));
    w = img.width;
    h = img.height;
    return buf;
}

RedscanConfig small_net() {
    RedscanConfig c;
    c.n_blocks = 2;
    c.base_channels = 6;
    c.growth = 3;
    return c;
}

} // namespace

TEST_CASE("images round-trip through the binary format") {
    test::TempDir dir("img");
    std::mt19937_64 rng(1);
    Image img = test::random_image(Grid(64), rng);
    for (double& v : img.data)
        v = static_cast<float>(v);
    const auto p = dir.path() / "x.bin";
    save_image(img, p);
    const std::string bytes = read_file(p);
    CHECK(bytes.size() == 16400);
    CHECK(bytes.substr(0, 4) == "TIMG");
    CHECK(u32_at(bytes, 4) == 1);
    CHECK(u32_at(bytes, 8) == 64);
    CHECK(u32_at(bytes, 12) == 64);
    const Image back = load_image(p);
    CHECK(back.grid == Grid(64));
    CHECK(back.data == img.data);

    write_bytes(p, "XIMG" + bytes.substr(4));
    CHECK_THROWS_AS(load_image(p), FormatError);
    write_bytes(p, bytes.substr(0, bytes.size() - 3));
    CHECK_THROWS_AS(load_image(p), FormatError);
    CHECK_THROWS_AS(load_image(dir.path() / "missing.bin"), IoError);
}

TEST_CASE("sinograms round-trip through the binary format") {
    test::TempDir dir("sino");
    std::mt19937_64 rng(2);
    const auto geom = uniform_geometry(Grid(32), 60);
    Sinogram s = test::random_sinogram(geom, rng);
    for (double& v : s.data)
        v = static_cast<float>(v);
    const auto p = dir.path() / "s.bin";
    save_sinogram(s, p);
    const std::string bytes = read_file(p);
    CHECK(bytes.size() == 16 + 4 * s.data.size());
    CHECK(bytes.substr(0, 4) == "TSIN");
    const Sinogram back = load_sinogram(p);
    CHECK(back.data == s.data);
    CHECK(back.geometry.n_views() == 60);
    CHECK(back.geometry.n_detectors == geom.n_detectors);
    for (std::size_t v = 0; v < 60; ++v)
        CHECK(back.geometry.angles_deg[v] == doctest::Approx(geom.angles_deg[v]));

    write_bytes(p, bytes.substr(0, 4) + std::string(4, '\x07') + bytes.substr(8));
    CHECK_THROWS_AS(load_sinogram(p), FormatError);
}

TEST_CASE("mask lines round-trip") {
    const auto angles = uniform_geometry(Grid(32), 240).angles_deg;
    for (const ViewMask& m : {sparse_view_mask(240, 40), limited_angle_mask(240, 90.0, angles),
                              make_custom_mask(12, {0, 5, 11})}) {
        CHECK(parse_mask_line(format_mask_line(m)) == m);
    }
    CHECK(format_mask_line(make_custom_mask(6, {1, 4})) == "custom 6 1,4");
    CHECK_THROWS_AS(parse_mask_line("custom 6 1,9"), FormatError);
    CHECK_THROWS_AS(parse_mask_line("bogus 6 1"), FormatError);
    CHECK_THROWS_AS(parse_mask_line("sv 6 1,x"), FormatError);
}

TEST_CASE("checkpoints restore the exact network") {
    test::TempDir dir("ckpt");
    const auto model = init_params<float>(small_net(), 3);
    const auto p1 = dir.path() / "a.rscn", p2 = dir.path() / "b.rscn";
    save_checkpoint(model, p1);
    save_checkpoint(model, p2);
    CHECK(read_file(p1) == read_file(p2));
    CHECK(read_file(p1).substr(0, 4) == "RSCN");

    const auto loaded = load_checkpoint(p1, small_net());
    CHECK(loaded.config == model.config);
    std::mt19937_64 rng(4);
    nn::Tensor<float> x({1, 1, 16, 16});
    for (auto& v : x.data())
        v = static_cast<float>(std::uniform_real_distribution<double>(0.0, 1.0)(rng));
    nn::Tape<float> tape(false);
    const auto ya = redscan_forward(tape, model, x);
    const auto yb = redscan_forward(tape, loaded, x);
    CHECK(std::equal(ya.data().begin(), ya.data().end(), yb.data().begin()));

    auto other = small_net();
    other.growth = 4;
    CHECK_THROWS_AS(load_checkpoint(p1, other), ConfigError);
    const std::string bytes = read_file(p1);
    write_bytes(p2, bytes.substr(0, bytes.size() / 2));
    CHECK_THROWS_AS(load_checkpoint(p2), FormatError);
    write_bytes(p2, "JUNK" + bytes.substr(4));
    CHECK_THROWS_AS(load_checkpoint(p2), FormatError);
}

TEST_CASE("PNG export maps the window to 8 bits") {
    test::TempDir dir("png");
    Image img(Grid(4));
    img.data = {0.0, 1.0, 128.0 / 255.0, -3.0, 7.0, 0.5, 0.25, 0.75, 0, 0, 0, 0, 1, 1, 1, 1};
    const auto p = dir.path() / "x.png";
    export_png(img, p);
    std::uint32_t w = 0, h = 0;
    const auto px = read_png_gray(p, w, h);
    CHECK(w == 4);
    CHECK(h == 4);
    CHECK(px[0] == 0);
    CHECK(px[1] == 255);
    CHECK(std::abs(int(px[2]) - 128) <= 1);
    CHECK(px[3] == 0);
    CHECK(px[4] == 255);
    CHECK(px[5] == 128);
    CHECK(px[15] == 255);

    export_png(img, p, 0.0, 2.0);
    const auto half = read_png_gray(p, w, h);
    CHECK(half[1] == 128);
    CHECK_THROWS_AS(export_png(img, p, 1.0, 1.0), ConfigError);
}
