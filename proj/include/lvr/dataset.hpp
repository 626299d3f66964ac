#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lvr/geometry.hpp"
#include "lvr/phantom.hpp"
#include "lvr/sampling.hpp"

namespace lvr {

struct DatasetManifest {
    std::size_t n_train = 128;
    std::size_t n_val = 16;
    std::size_t n_test = 32;
    std::size_t grid = 64;
    double pixel_size = 1.0;
    std::size_t n_views = 60;
    ViewMask mask = sparse_view_mask(60, 10);
    std::uint64_t seed = 1;
    RandomPhantomOptions phantom;

    void validate() const;
    Grid grid_spec() const { return Grid(grid, pixel_size); }
    ProjectionGeometry geometry() const { return uniform_geometry(grid_spec(), n_views); }
    bool operator==(const DatasetManifest& o) const;
};

enum class Split { Train, Val, Test };
const char* split_name(Split split);

/// One paired example: ground truth, full sinogram, acquired (masked,
/// full-shape) sinogram and the initial reconstruction from it.
struct Sample {
    Image gt;
    Sinogram sino;
    Sinogram sino_u;
    Image fbp_u;
};

struct Dataset {
    DatasetManifest manifest;
    std::vector<Sample> train;
    std::vector<Sample> val;
    std::vector<Sample> test;

    const std::vector<Sample>& split(Split s) const;
};

/// Ground truth of one sample; the phantom seed is derived from the manifest
/// seed and the sample's global index. Values are rounded to float so that
/// what is stored on disk is exactly what the pipeline consumed.
Image sample_ground_truth(const DatasetManifest& manifest, Split split, std::size_t index);

/// gt -> forward_project -> apply_mask -> fbp_sampled.
Sample make_sample(const DatasetManifest& manifest, const Image& gt);

/// Entire dataset in memory (same content as generate_dataset writes).
Dataset make_dataset(const DatasetManifest& manifest);

/// Writes manifest.txt and split/NNNN.{gt,sino,sinou,fbpu}.bin.
DatasetManifest generate_dataset(const DatasetManifest& manifest, const std::filesystem::path& dir);

std::string format_manifest(const DatasetManifest& manifest);
DatasetManifest parse_manifest(const std::string& text);
DatasetManifest read_manifest(const std::filesystem::path& dir);

/// Reads a dataset directory; stored values come back as doubles of the f32 data.
Dataset load_dataset(const std::filesystem::path& dir);

/// Path of one sample file, e.g. dir/train/0003.gt.bin.
std::filesystem::path sample_path(const std::filesystem::path& dir, Split split, std::size_t index,
                                  const std::string& kind);

} // namespace lvr
