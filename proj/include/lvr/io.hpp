#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "lvr/geometry.hpp"
#include "lvr/redscan.hpp"
#include "lvr/sampling.hpp"

namespace lvr {

/// "TIMG", u32 version 1, u32 nx, u32 ny, then nx*ny f32, all little-endian.
void save_image(const Image& img, const std::filesystem::path& path);
/// Pixel size is not stored; the loaded grid has pixel_size 1.
Image load_image(const std::filesystem::path& path);

/// "TSIN", u32 version 1, u32 n_views, u32 n_detectors, then f32 data.
void save_sinogram(const Sinogram& sino, const std::filesystem::path& path);
/// Geometry is rebuilt as uniform over [0, 180) with unit detector spacing.
Sinogram load_sinogram(const std::filesystem::path& path);

/// "sv|la|custom n_full idx0,idx1,..."
std::string format_mask_line(const ViewMask& mask);
ViewMask parse_mask_line(const std::string& line);

/// "RSCN", u32 version 1, config block (u32 n_blocks, base_channels, growth,
/// dense_layers, ca_reduction; u8 use_ca, use_sa), u32 parameter count, then
/// per parameter: u16 name length, name, u8 ndim, u32 dims, f32 data.
void save_checkpoint(const RedscanModel<float>& model, const std::filesystem::path& path);
/// Throws FormatError on corrupt files and ConfigError when the stored config
/// differs from `expected` or the parameters disagree with the config.
RedscanModel<float> load_checkpoint(const std::filesystem::path& path,
                                    const std::optional<RedscanConfig>& expected = std::nullopt);

/// 8-bit grayscale PNG, round(255 * clamp((v - lo) / (hi - lo), 0, 1)).
void export_png(const Image& img, const std::filesystem::path& path, double lo = 0.0, double hi = 1.0);

/// Whole file as bytes; IoError when unreadable.
std::string read_file(const std::filesystem::path& path);

} // namespace lvr
