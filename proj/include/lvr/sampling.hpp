#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lvr/geometry.hpp"

namespace lvr {

enum class MaskMode { SparseView, LimitedAngle, Custom };

/// The acquired subset of views. Indices are 0-based, sorted, unique.
struct ViewMask {
    std::size_t n_views_full = 0;
    std::vector<std::size_t> kept;
    MaskMode mode = MaskMode::Custom;

    std::size_t n_kept() const { return kept.size(); }
    bool contains(std::size_t view) const;
    /// Per-view membership flags, length n_views_full.
    std::vector<bool> membership() const;
    void validate() const;

    bool operator==(const ViewMask&) const = default;
};

ViewMask make_custom_mask(std::size_t n_full, std::vector<std::size_t> kept);

/// Every (n_full / n_keep)-th view starting at 0. n_full must divide evenly.
ViewMask sparse_view_mask(std::size_t n_full, std::size_t n_keep);

/// All views with angle < max_angle_deg.
ViewMask limited_angle_mask(std::size_t n_full, double max_angle_deg, std::span<const double> angles_deg);

enum class MaskLayout { FullShape, Compact };

/// Full shape: unsampled rows are exactly zero. Compact: only kept rows, with
/// the matching sub-geometry.
Sinogram apply_mask(const Sinogram& sino, const ViewMask& mask, MaskLayout layout = MaskLayout::FullShape);

/// Angular quadrature factor relative to the full scan: n_full / n_kept when
/// the kept views are a uniform stride starting at 0 that covers all 180
/// degrees, otherwise 1 (kept views keep their full-scan spacing).
double quadrature_weight(const ViewMask& mask);

/// FBP of an acquired (full-shape, zero-filled) sinogram with the per-view
/// weight of the views actually kept. Initial reconstruction I_u.
Image fbp_sampled(const Sinogram& masked, const ViewMask& mask, const Grid& grid);

} // namespace lvr
