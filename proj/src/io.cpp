#include "lvr/io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>

#include "lvr/errors.hpp"

namespace lvr {

namespace {

constexpr std::uint32_t kVersion = 1;

class Writer {
public:
    void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
    void u16(std::uint16_t v) {
        for (int i = 0; i < 2; ++i)
            u8(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i)
            u8(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
    void bytes(const std::string& s) { buf_ += s; }

    void save(const std::filesystem::path& path) const {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out)
            throw IoError("cannot open " + path.string() + " for writing");
        out.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
        if (!out)
            throw IoError("write failed: " + path.string());
    }

private:
    std::string buf_;
};

class Reader {
public:
    Reader(std::string data, std::string what) : data_(std::move(data)), what_(std::move(what)) {}

    std::uint8_t u8() {
        need(1);
        return static_cast<std::uint8_t>(data_[pos_++]);
    }
    std::uint16_t u16() {
        std::uint16_t v = 0;
        for (int i = 0; i < 2; ++i)
            v |= static_cast<std::uint16_t>(u8()) << (8 * i);
        return v;
    }
    std::uint32_t u32() {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(u8()) << (8 * i);
        return v;
    }
    float f32() { return std::bit_cast<float>(u32()); }
    std::string bytes(std::size_t n) {
        need(n);
        std::string s = data_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    void magic(const char* expected) {
        const std::string m = bytes(4);
        if (m != expected)
            throw FormatError(what_ + ": bad magic '" + m + "', expected '" + expected + "'");
        const std::uint32_t version = u32();
        if (version != kVersion)
            throw FormatError(what_ + ": unsupported version " + std::to_string(version));
    }
    std::size_t remaining() const { return data_.size() - pos_; }
    void need(std::size_t n) const {
        if (data_.size() - pos_ < n)
            throw FormatError(what_ + ": truncated file");
    }
    void finish() const {
        if (pos_ != data_.size())
            throw FormatError(what_ + ": " + std::to_string(data_.size() - pos_) + " trailing bytes");
    }

private:
    std::string data_;
    std::string what_;
    std::size_t pos_ = 0;
};

std::uint32_t checked_u32(std::size_t v, const char* what) {
    if (v > std::numeric_limits<std::uint32_t>::max())
        throw ConfigError(std::string(what) + " does not fit in 32 bits");
    return static_cast<std::uint32_t>(v);
}

std::vector<double> read_floats(Reader& r, std::uint64_t count) {
    if (count > r.remaining() / 4)
        throw FormatError("data section shorter than the header dimensions");
    std::vector<double> v(count);
    for (auto& x : v)
        x = static_cast<double>(r.f32());
    return v;
}

} // namespace

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad())
        throw IoError("read failed: " + path.string());
    return ss.str();
}

void save_image(const Image& img, const std::filesystem::path& path) {
    if (img.data.size() != img.grid.size())
        throw ConfigError("save_image: data does not match the grid");
    Writer w;
    w.bytes("TIMG");
    w.u32(kVersion);
    w.u32(checked_u32(img.grid.nx, "image width"));
    w.u32(checked_u32(img.grid.ny, "image height"));
    for (double v : img.data)
        w.f32(static_cast<float>(v));
    w.save(path);
}

Image load_image(const std::filesystem::path& path) {
    Reader r(read_file(path), path.string());
    r.magic("TIMG");
    const std::uint32_t nx = r.u32(), ny = r.u32();
    if (nx != ny || nx < 2)
        throw FormatError(path.string() + ": image must be square and at least 2x2");
    Image img(Grid(nx), read_floats(r, std::uint64_t{nx} * ny));
    r.finish();
    return img;
}

void save_sinogram(const Sinogram& sino, const std::filesystem::path& path) {
    const auto& g = sino.geometry;
    if (sino.data.size() != g.n_views() * g.n_detectors)
        throw ConfigError("save_sinogram: data does not match the geometry");
    Writer w;
    w.bytes("TSIN");
    w.u32(kVersion);
    w.u32(checked_u32(g.n_views(), "view count"));
    w.u32(checked_u32(g.n_detectors, "detector count"));
    for (double v : sino.data)
        w.f32(static_cast<float>(v));
    w.save(path);
}

Sinogram load_sinogram(const std::filesystem::path& path) {
    Reader r(read_file(path), path.string());
    r.magic("TSIN");
    const std::uint32_t views = r.u32(), dets = r.u32();
    if (views == 0 || dets == 0)
        throw FormatError(path.string() + ": empty sinogram");
    ProjectionGeometry g;
    g.n_detectors = dets;
    g.detector_spacing = 1.0;
    for (std::uint32_t i = 0; i < views; ++i)
        g.angles_deg.push_back(180.0 * i / views);
    Sinogram s(g, read_floats(r, std::uint64_t{views} * dets));
    r.finish();
    return s;
}

std::string format_mask_line(const ViewMask& mask) {
    mask.validate();
    std::string out = mask.mode == MaskMode::SparseView     ? "sv"
                      : mask.mode == MaskMode::LimitedAngle ? "la"
                                                            : "custom";
    out += " " + std::to_string(mask.n_views_full) + " ";
    for (std::size_t i = 0; i < mask.kept.size(); ++i) {
        if (i != 0)
            out += ",";
        out += std::to_string(mask.kept[i]);
    }
    return out;
}

ViewMask parse_mask_line(const std::string& line) {
    std::istringstream in(line);
    std::string mode, list, extra;
    std::size_t n_full = 0;
    if (!(in >> mode >> n_full >> list) || (in >> extra))
        throw FormatError("mask line must be 'mode n_full idx0,idx1,...': " + line);
    ViewMask m;
    if (mode == "sv")
        m.mode = MaskMode::SparseView;
    else if (mode == "la")
        m.mode = MaskMode::LimitedAngle;
    else if (mode == "custom")
        m.mode = MaskMode::Custom;
    else
        throw FormatError("unknown mask mode '" + mode + "'");
    m.n_views_full = n_full;
    std::size_t pos = 0;
    while (pos <= list.size()) {
        const std::size_t comma = std::min(list.find(',', pos), list.size());
        std::size_t idx = 0;
        const char* first = list.data() + pos;
        const char* last = list.data() + comma;
        auto [ptr, ec] = std::from_chars(first, last, idx);
        if (ec != std::errc() || ptr != last)
            throw FormatError("bad view index in mask line: " + line);
        m.kept.push_back(idx);
        pos = comma + 1;
    }
    try {
        m.validate();
    } catch (const ConfigError& e) {
        throw FormatError(std::string("invalid mask: ") + e.what());
    }
    return m;
}

void save_checkpoint(const RedscanModel<float>& model, const std::filesystem::path& path) {
    const auto& c = model.config;
    Writer w;
    w.bytes("RSCN");
    w.u32(kVersion);
    for (std::size_t v : {c.n_blocks, c.base_channels, c.growth, c.dense_layers, c.ca_reduction})
        w.u32(checked_u32(v, "config field"));
    w.u8(c.use_ca ? 1 : 0);
    w.u8(c.use_sa ? 1 : 0);
    w.u32(checked_u32(model.params.size(), "parameter count"));
    for (const auto& p : model.params.items()) {
        if (p.name.size() > std::numeric_limits<std::uint16_t>::max())
            throw ConfigError("parameter name too long: " + p.name);
        w.u16(static_cast<std::uint16_t>(p.name.size()));
        w.bytes(p.name);
        const auto& shape = p.tensor.shape();
        if (shape.size() > 255)
            throw ConfigError("parameter rank too large: " + p.name);
        w.u8(static_cast<std::uint8_t>(shape.size()));
        for (std::size_t d : shape)
            w.u32(checked_u32(d, "parameter dimension"));
        for (float v : p.tensor.data()) {
            if (!std::isfinite(v))
                throw ConfigError("non-finite value in parameter " + p.name);
            w.f32(v);
        }
    }
    w.save(path);
}

RedscanModel<float> load_checkpoint(const std::filesystem::path& path, const std::optional<RedscanConfig>& expected) {
    Reader r(read_file(path), path.string());
    r.magic("RSCN");
    RedscanConfig cfg;
    cfg.n_blocks = r.u32();
    cfg.base_channels = r.u32();
    cfg.growth = r.u32();
    cfg.dense_layers = r.u32();
    cfg.ca_reduction = r.u32();
    cfg.use_ca = r.u8() != 0;
    cfg.use_sa = r.u8() != 0;
    if (expected && !(*expected == cfg))
        throw ConfigError(path.string() + ": checkpoint config does not match the requested model");
    // Shapes implied by the stored config; the file must agree with them.
    RedscanModel<float> model = init_params<float>(cfg, 0);
    const std::uint32_t count = r.u32();
    if (count != model.params.size())
        throw ConfigError(path.string() + ": " + std::to_string(count) + " parameters stored, config implies " +
                          std::to_string(model.params.size()));
    std::vector<bool> seen(count, false);
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::string name = r.bytes(r.u16());
        const std::size_t ndim = r.u8();
        nn::Shape shape(ndim);
        for (auto& d : shape)
            d = r.u32();
        if (!model.params.contains(name))
            throw ConfigError(path.string() + ": unexpected parameter " + name);
        auto items = model.params.items();
        const auto pos = static_cast<std::size_t>(
            std::find_if(items.begin(), items.end(), [&](const auto& p) { return p.name == name; }) - items.begin());
        if (seen[pos])
            throw ConfigError(path.string() + ": parameter " + name + " stored twice");
        seen[pos] = true;
        auto& t = model.params.get(name);
        if (t.shape() != shape)
            throw ConfigError(path.string() + ": parameter " + name + " has shape " + nn::shape_string(shape) +
                              ", config implies " + nn::shape_string(t.shape()));
        r.need(4 * t.size());
        for (auto& v : t.data())
            v = r.f32();
    }
    r.finish();
    return model;
}

void export_png(const Image& img, const std::filesystem::path& path, double lo, double hi) {
    if (!(lo < hi))
        throw ConfigError("export_png: window must satisfy lo < hi");
    const std::size_t w = img.grid.nx, h = img.grid.ny;
    std::vector<png_byte> pixels(w * h);
    for (std::size_t i = 0; i < pixels.size(); ++i) {
        const double t = std::clamp((img.data[i] - lo) / (hi - lo), 0.0, 1.0);
        pixels[i] = static_cast<png_byte>(std::lround(255.0 * t));
    }
    std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.string().c_str(), "wb"), &std::fclose);
    if (!fp)
        throw IoError("cannot open " + path.string() + " for writing");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (png == nullptr || info == nullptr) {
        png_destroy_write_struct(&png, nullptr);
        throw IoError("libpng initialisation failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("PNG encoding failed: " + path.string());
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 8, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (std::size_t row = 0; row < h; ++row)
        png_write_row(png, pixels.data() + row * w);
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

} // namespace lvr
