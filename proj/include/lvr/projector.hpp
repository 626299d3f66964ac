#pragma once

#include <cstddef>
#include <vector>

#include "lvr/geometry.hpp"

namespace lvr {

/// Ray-driven parallel-beam projection: each bin is the midpoint-rule line
/// integral of the bilinearly interpolated image, sampled every half pixel.
Sinogram forward_project(const Image& img, const ProjectionGeometry& geom);

/// Exact transpose of forward_project (bilinear splatting of the same samples).
Image back_project(const Sinogram& sino, const Grid& grid);

/// Ram-Lak filter applied per view row. Rows are zero-padded to the next power
/// of two >= 2 * n_detectors; the response is |f| normalized to 1 at the
/// detector Nyquist frequency (2|k|/L on the padded DFT grid).
Sinogram ramp_filter(const Sinogram& sino);

/// Padded length used by ramp_filter for a given detector count.
std::size_t ramp_padded_length(std::size_t n_detectors);

/// Real frequency response on the rfft grid, L/2 + 1 entries.
std::vector<double> ramp_frequency_response(std::size_t padded_length);

/// pi / (2 M p^2): back projection weight for an M-view scan over 180 degrees.
double fbp_scale(std::size_t n_views, const Grid& grid);

/// fbp_scale(M) * back_project(ramp_filter(sino)), M = sino's own view count.
Image fbp(const Sinogram& sino, const Grid& grid);

/// Adjoint of fbp: fbp_scale(M) * ramp_filter(forward_project(img)).
Sinogram fbp_transpose(const Image& img, const ProjectionGeometry& geom);

namespace reference {

/// Serial, unclipped versions of the projector kernels for cross-checking.
Sinogram forward_project(const Image& img, const ProjectionGeometry& geom);
Image back_project(const Sinogram& sino, const Grid& grid);

} // namespace reference

} // namespace lvr
