#include "lvr/dataset.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "lvr/errors.hpp"
#include "lvr/io.hpp"
#include "lvr/projector.hpp"

namespace lvr {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::size_t global_index(const DatasetManifest& m, Split split, std::size_t index) {
    switch (split) {
    case Split::Train:
        return index;
    case Split::Val:
        return m.n_train + index;
    case Split::Test:
        return m.n_train + m.n_val + index;
    }
    return index;
}

std::size_t split_count(const DatasetManifest& m, Split split) {
    return split == Split::Train ? m.n_train : split == Split::Val ? m.n_val : m.n_test;
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

template <typename N>
N parse_number(const std::string& key, const std::string& value) {
    N out{};
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size())
        throw FormatError("manifest: bad value for " + key + ": '" + value + "'");
    return out;
}

constexpr Split kSplits[] = {Split::Train, Split::Val, Split::Test};

} // namespace

const char* split_name(Split split) {
    switch (split) {
    case Split::Train:
        return "train";
    case Split::Val:
        return "val";
    case Split::Test:
        return "test";
    }
    return "?";
}

void DatasetManifest::validate() const {
    if (n_train < 1 || n_val < 1 || n_test < 1)
        throw ConfigError("manifest: every split needs at least one sample");
    if (grid < 32)
        throw ConfigError("manifest: grid must be >= 32");
    if (!(pixel_size > 0.0))
        throw ConfigError("manifest: pixel_size must be positive");
    if (n_views < 1)
        throw ConfigError("manifest: n_views must be >= 1");
    mask.validate();
    if (mask.n_views_full != n_views)
        throw ConfigError("manifest: mask covers " + std::to_string(mask.n_views_full) + " views, scan has " +
                          std::to_string(n_views));
    phantom.validate();
}

bool DatasetManifest::operator==(const DatasetManifest& o) const {
    return n_train == o.n_train && n_val == o.n_val && n_test == o.n_test && grid == o.grid &&
           pixel_size == o.pixel_size && n_views == o.n_views && mask == o.mask && seed == o.seed;
}

const std::vector<Sample>& Dataset::split(Split s) const {
    return s == Split::Train ? train : s == Split::Val ? val : test;
}

Image sample_ground_truth(const DatasetManifest& manifest, Split split, std::size_t index) {
    const std::uint64_t seed = splitmix64(manifest.seed ^ splitmix64(global_index(manifest, split, index)));
    Image gt = random_phantom(manifest.grid, seed, manifest.phantom);
    gt.grid.pixel_size = manifest.pixel_size;
    for (double& v : gt.data)
        v = static_cast<double>(static_cast<float>(v));
    return gt;
}

Sample make_sample(const DatasetManifest& manifest, const Image& gt) {
    Sample s;
    s.gt = gt;
    s.sino = forward_project(gt, manifest.geometry());
    s.sino_u = apply_mask(s.sino, manifest.mask);
    s.fbp_u = fbp_sampled(s.sino_u, manifest.mask, manifest.grid_spec());
    return s;
}

Dataset make_dataset(const DatasetManifest& manifest) {
    manifest.validate();
    Dataset d;
    d.manifest = manifest;
    for (Split split : kSplits) {
        auto& out = split == Split::Train ? d.train : split == Split::Val ? d.val : d.test;
        for (std::size_t i = 0; i < split_count(manifest, split); ++i)
            out.push_back(make_sample(manifest, sample_ground_truth(manifest, split, i)));
    }
    return d;
}

std::filesystem::path sample_path(const std::filesystem::path& dir, Split split, std::size_t index,
                                  const std::string& kind) {
    char name[32];
    std::snprintf(name, sizeof name, "%04zu", index);
    return dir / split_name(split) / (std::string(name) + "." + kind + ".bin");
}

std::string format_manifest(const DatasetManifest& m) {
    std::ostringstream out;
    out << "format=lvr-dataset-1\n"
        << "n_train=" << m.n_train << "\n"
        << "n_val=" << m.n_val << "\n"
        << "n_test=" << m.n_test << "\n"
        << "grid=" << m.grid << "\n"
        << "pixel_size=" << format_double(m.pixel_size) << "\n"
        << "n_views=" << m.n_views << "\n"
        << "n_detectors=" << default_detector_count(m.grid) << "\n"
        << "mask=" << format_mask_line(m.mask) << "\n"
        << "seed=" << m.seed << "\n";
    return out.str();
}

DatasetManifest parse_manifest(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw FormatError("manifest: expected key=value, got '" + line + "'");
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    auto get = [&](const std::string& key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end())
            throw FormatError("manifest: missing key " + key);
        return it->second;
    };
    if (get("format") != "lvr-dataset-1")
        throw FormatError("manifest: unsupported format " + get("format"));
    DatasetManifest m;
    m.n_train = parse_number<std::size_t>("n_train", get("n_train"));
    m.n_val = parse_number<std::size_t>("n_val", get("n_val"));
    m.n_test = parse_number<std::size_t>("n_test", get("n_test"));
    m.grid = parse_number<std::size_t>("grid", get("grid"));
    m.pixel_size = parse_number<double>("pixel_size", get("pixel_size"));
    m.n_views = parse_number<std::size_t>("n_views", get("n_views"));
    m.mask = parse_mask_line(get("mask"));
    m.seed = parse_number<std::uint64_t>("seed", get("seed"));
    try {
        m.validate();
    } catch (const ConfigError& e) {
        throw FormatError(std::string("manifest: ") + e.what());
    }
    if (parse_number<std::size_t>("n_detectors", get("n_detectors")) != default_detector_count(m.grid))
        throw FormatError("manifest: n_detectors does not match the grid");
    return m;
}

DatasetManifest read_manifest(const std::filesystem::path& dir) { return parse_manifest(read_file(dir / "manifest.txt")); }

DatasetManifest generate_dataset(const DatasetManifest& manifest, const std::filesystem::path& dir) {
    manifest.validate();
    std::error_code ec;
    for (Split split : kSplits) {
        std::filesystem::create_directories(dir / split_name(split), ec);
        if (ec)
            throw IoError("cannot create " + (dir / split_name(split)).string() + ": " + ec.message());
    }
    for (Split split : kSplits)
        for (std::size_t i = 0; i < split_count(manifest, split); ++i) {
            const Sample s = make_sample(manifest, sample_ground_truth(manifest, split, i));
            save_image(s.gt, sample_path(dir, split, i, "gt"));
            save_sinogram(s.sino, sample_path(dir, split, i, "sino"));
            save_sinogram(s.sino_u, sample_path(dir, split, i, "sinou"));
            save_image(s.fbp_u, sample_path(dir, split, i, "fbpu"));
        }
    std::ofstream out(dir / "manifest.txt", std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot write " + (dir / "manifest.txt").string());
    out << format_manifest(manifest);
    return manifest;
}

Dataset load_dataset(const std::filesystem::path& dir) {
    Dataset d;
    d.manifest = read_manifest(dir);
    const Grid grid = d.manifest.grid_spec();
    const ProjectionGeometry geom = d.manifest.geometry();
    for (Split split : kSplits) {
        auto& out = split == Split::Train ? d.train : split == Split::Val ? d.val : d.test;
        for (std::size_t i = 0; i < split_count(d.manifest, split); ++i) {
            Sample s;
            s.gt = load_image(sample_path(dir, split, i, "gt"));
            s.fbp_u = load_image(sample_path(dir, split, i, "fbpu"));
            s.sino = load_sinogram(sample_path(dir, split, i, "sino"));
            s.sino_u = load_sinogram(sample_path(dir, split, i, "sinou"));
            if (s.gt.grid.nx != grid.nx || s.fbp_u.grid.nx != grid.nx || s.sino.data.size() != s.sino_u.data.size() ||
                s.sino.geometry.n_views() != geom.n_views() || s.sino.geometry.n_detectors != geom.n_detectors)
                throw FormatError("dataset sample " + sample_path(dir, split, i, "*").string() +
                                  " does not match the manifest");
            s.gt.grid = s.fbp_u.grid = grid;
            s.sino.geometry = s.sino_u.geometry = geom;
            out.push_back(std::move(s));
        }
    }
    return d;
}

} // namespace lvr
