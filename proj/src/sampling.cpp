#include "lvr/sampling.hpp"

#include <algorithm>
#include <string>

#include "lvr/errors.hpp"
#include "lvr/projector.hpp"

namespace lvr {

bool ViewMask::contains(std::size_t view) const {
    return std::binary_search(kept.begin(), kept.end(), view);
}

std::vector<bool> ViewMask::membership() const {
    std::vector<bool> flags(n_views_full, false);
    for (std::size_t v : kept)
        flags[v] = true;
    return flags;
}

void ViewMask::validate() const {
    if (kept.empty())
        throw ConfigError("view mask keeps no views");
    for (std::size_t i = 0; i < kept.size(); ++i) {
        if (kept[i] >= n_views_full)
            throw ConfigError("view mask index " + std::to_string(kept[i]) + " out of range");
        if (i > 0 && kept[i] <= kept[i - 1])
            throw ConfigError("view mask indices must be strictly increasing");
    }
}

ViewMask make_custom_mask(std::size_t n_full, std::vector<std::size_t> kept) {
    ViewMask mask{n_full, std::move(kept), MaskMode::Custom};
    mask.validate();
    return mask;
}

ViewMask sparse_view_mask(std::size_t n_full, std::size_t n_keep) {
    if (n_keep == 0 || n_keep > n_full)
        throw ConfigError("sparse view mask needs 1 <= keep <= full");
    if (n_full % n_keep != 0)
        throw ConfigError("sparse view mask: " + std::to_string(n_full) + " views are not divisible by " +
                          std::to_string(n_keep));
    const std::size_t stride = n_full / n_keep;
    ViewMask mask{n_full, {}, MaskMode::SparseView};
    mask.kept.reserve(n_keep);
    for (std::size_t i = 0; i < n_keep; ++i)
        mask.kept.push_back(i * stride);
    return mask;
}

ViewMask limited_angle_mask(std::size_t n_full, double max_angle_deg, std::span<const double> angles_deg) {
    if (!(max_angle_deg > 0.0 && max_angle_deg <= 180.0))
        throw ConfigError("limited angle range must be in (0, 180]");
    if (angles_deg.size() != n_full)
        throw ConfigError("limited angle mask: angle list does not match view count");
    ViewMask mask{n_full, {}, MaskMode::LimitedAngle};
    for (std::size_t v = 0; v < n_full; ++v)
        if (angles_deg[v] < max_angle_deg)
            mask.kept.push_back(v);
    if (mask.kept.empty())
        throw ConfigError("limited angle mask keeps no views");
    return mask;
}

Sinogram apply_mask(const Sinogram& sino, const ViewMask& mask, MaskLayout layout) {
    mask.validate();
    if (mask.n_views_full != sino.geometry.n_views())
        throw ConfigError("mask covers " + std::to_string(mask.n_views_full) + " views, sinogram has " +
                          std::to_string(sino.geometry.n_views()));
    if (layout == MaskLayout::Compact) {
        Sinogram out(subset_geometry(sino.geometry, mask.kept));
        for (std::size_t i = 0; i < mask.kept.size(); ++i) {
            const auto src = sino.row(mask.kept[i]);
            std::copy(src.begin(), src.end(), out.row(i).begin());
        }
        return out;
    }
    Sinogram out(sino.geometry);
    for (std::size_t v : mask.kept) {
        const auto src = sino.row(v);
        std::copy(src.begin(), src.end(), out.row(v).begin());
    }
    return out;
}

double quadrature_weight(const ViewMask& mask) {
    mask.validate();
    const std::size_t n_keep = mask.kept.size();
    if (mask.n_views_full % n_keep != 0)
        return 1.0;
    const std::size_t stride = mask.n_views_full / n_keep;
    for (std::size_t i = 0; i < n_keep; ++i)
        if (mask.kept[i] != i * stride)
            return 1.0;
    return static_cast<double>(stride);
}

Image fbp_sampled(const Sinogram& masked, const ViewMask& mask, const Grid& grid) {
    if (mask.n_views_full != masked.geometry.n_views())
        throw ConfigError("fbp_sampled: mask does not match sinogram");
    Image img = fbp(masked, grid);
    const double w = quadrature_weight(mask);
    if (w != 1.0)
        for (double& v : img.data)
            v *= w;
    return img;
}

} // namespace lvr
