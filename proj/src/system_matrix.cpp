#include "system_matrix.hpp"

#include <algorithm>
#include <mutex>
#include <utility>

#include "ray_sampling.hpp"

namespace lvr::detail {

SystemMatrix::SystemMatrix(const Grid& grid, const ProjectionGeometry& geom) : grid_(grid), geom_(geom) {
    grid.validate();
    geom.validate_for(grid);
    const std::size_t n = grid.nx, n_pix = grid.size();
    const std::size_t n_det = geom.n_detectors, n_rows = geom.n_views() * n_det;
    const RaySampling rs(grid);

    std::vector<std::vector<std::pair<std::uint32_t, double>>> rows(n_rows);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t v = 0; v < static_cast<std::ptrdiff_t>(geom.n_views()); ++v) {
        const double a = deg_to_rad(geom.angles_deg[static_cast<std::size_t>(v)]);
        const double c = std::cos(a), s = std::sin(a);
        for (std::size_t k = 0; k < n_det; ++k) {
            auto& row = rows[static_cast<std::size_t>(v) * n_det + k];
            walk_ray(rs, ray_line(rs, c, s, geom.detector_offset(k)), n,
                     [&](std::size_t idx, double w) { row.emplace_back(static_cast<std::uint32_t>(idx), w); });
            std::stable_sort(row.begin(), row.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
            std::size_t out = 0;
            for (std::size_t i = 0; i < row.size(); ++i) {
                if (out > 0 && row[out - 1].first == row[i].first)
                    row[out - 1].second += row[i].second;
                else
                    row[out++] = row[i];
            }
            row.resize(out);
            for (auto& e : row)
                e.second *= rs.step;
        }
    }

    row_ptr_.assign(n_rows + 1, 0);
    col_ptr_.assign(n_pix + 1, 0);
    for (std::size_t r = 0; r < n_rows; ++r) {
        row_ptr_[r + 1] = row_ptr_[r] + rows[r].size();
        for (const auto& e : rows[r])
            ++col_ptr_[e.first + 1];
    }
    for (std::size_t p = 0; p < n_pix; ++p)
        col_ptr_[p + 1] += col_ptr_[p];
    row_col_.resize(row_ptr_.back());
    row_val_.resize(row_ptr_.back());
    col_row_.resize(row_ptr_.back());
    col_val_.resize(row_ptr_.back());
    std::vector<std::size_t> fill(col_ptr_.begin(), col_ptr_.end() - 1);
    for (std::size_t r = 0; r < n_rows; ++r) {
        std::size_t i = row_ptr_[r];
        for (const auto& [col, w] : rows[r]) {
            row_col_[i] = col;
            row_val_[i++] = w;
            const std::size_t j = fill[col]++;
            col_row_[j] = static_cast<std::uint32_t>(r);
            col_val_[j] = w;
        }
    }
}

void SystemMatrix::forward(const double* img, double* sino) const {
    const auto n_rows = static_cast<std::ptrdiff_t>(row_ptr_.size() - 1);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t r = 0; r < n_rows; ++r) {
        double acc = 0.0;
        for (std::size_t i = row_ptr_[static_cast<std::size_t>(r)]; i < row_ptr_[static_cast<std::size_t>(r) + 1]; ++i)
            acc += row_val_[i] * img[row_col_[i]];
        sino[r] = acc;
    }
}

void SystemMatrix::back(const double* sino, double* img) const {
    const auto n_pix = static_cast<std::ptrdiff_t>(col_ptr_.size() - 1);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t p = 0; p < n_pix; ++p) {
        double acc = 0.0;
        for (std::size_t i = col_ptr_[static_cast<std::size_t>(p)]; i < col_ptr_[static_cast<std::size_t>(p) + 1]; ++i)
            acc += col_val_[i] * sino[col_row_[i]];
        img[p] = acc;
    }
}

std::shared_ptr<const SystemMatrix> cached_system_matrix(const Grid& grid, const ProjectionGeometry& geom) {
    constexpr std::size_t kMaxEntries = 4;
    static std::mutex mutex;
    static std::vector<std::shared_ptr<const SystemMatrix>> cache;
    std::lock_guard lock(mutex);
    for (auto it = cache.begin(); it != cache.end(); ++it)
        if ((*it)->grid() == grid && (*it)->geometry() == geom) {
            auto hit = *it;
            cache.erase(it);
            cache.push_back(hit);
            return hit;
        }
    auto built = std::make_shared<const SystemMatrix>(grid, geom);
    if (cache.size() == kMaxEntries)
        cache.erase(cache.begin());
    cache.push_back(built);
    return built;
}

} // namespace lvr::detail
