#include "lvr/scl.hpp"

#include "lvr/errors.hpp"
#include "lvr/projector.hpp"
#include "system_matrix.hpp"

namespace lvr {

void SclConfig::validate() const {
    if (!(lambda >= 0.0))
        throw ConfigError("scl: lambda must be >= 0");
    grid.validate();
    geometry.validate();
    mask.validate();
    if (mask.n_views_full != geometry.n_views())
        throw ConfigError("scl: mask covers " + std::to_string(mask.n_views_full) + " views, geometry has " +
                          std::to_string(geometry.n_views()));
}

Sinogram merge_sinogram(const Sinogram& s_net, const Sinogram& s_u, const ViewMask& mask, double lambda) {
    if (s_net.geometry.n_views() != s_u.geometry.n_views() ||
        s_net.geometry.n_detectors != s_u.geometry.n_detectors || s_net.data.size() != s_u.data.size())
        throw ConfigError("merge_sinogram: sinogram shapes differ");
    if (mask.n_views_full != s_net.geometry.n_views())
        throw ConfigError("merge_sinogram: mask does not match the sinogram view count");
    Sinogram out = s_net;
    const double denom = lambda + 1.0;
    for (std::size_t v : mask.kept) {
        auto dst = out.row(v);
        const auto net = s_net.row(v);
        const auto acq = s_u.row(v);
        for (std::size_t k = 0; k < dst.size(); ++k)
            dst[k] = (lambda * net[k] + acq[k]) / denom;
    }
    return out;
}

SclResult scl_forward(const Image& i_net, const Sinogram& s_u, const SclConfig& config) {
    if (i_net.grid != config.grid)
        throw ConfigError("scl_forward: image grid does not match the layer");
    if (s_u.geometry.n_views() != config.geometry.n_views() ||
        s_u.geometry.n_detectors != config.geometry.n_detectors)
        throw ConfigError("scl_forward: acquired sinogram does not match the layer geometry");
    const auto a = detail::cached_system_matrix(config.grid, config.geometry);
    Sinogram projected(config.geometry);
    a->forward(i_net.data.data(), projected.data.data());
    SclResult r;
    r.merged = merge_sinogram(projected, s_u, config.mask, config.lambda);
    const Sinogram filtered = ramp_filter(r.merged);
    r.image = Image(config.grid);
    a->back(filtered.data.data(), r.image.data.data());
    const double c = fbp_scale(config.geometry.n_views(), config.grid);
    for (double& v : r.image.data)
        v *= c;
    r.context = {config};
    return r;
}

Image scl_backward(const Image& grad_out, const SclContext& context) {
    const auto& cfg = context.config;
    if (grad_out.grid != cfg.grid)
        throw ConfigError("scl_backward: gradient grid does not match the layer");
    const auto a = detail::cached_system_matrix(cfg.grid, cfg.geometry);
    Sinogram projected(cfg.geometry);
    a->forward(grad_out.data.data(), projected.data.data());
    Sinogram s = ramp_filter(projected);
    const double c = fbp_scale(cfg.geometry.n_views(), cfg.grid);
    for (double& e : s.data)
        e *= c;
    const double d = cfg.lambda / (1.0 + cfg.lambda);
    for (std::size_t v : cfg.mask.kept)
        for (double& e : s.row(v))
            e *= d;
    Image out(cfg.grid);
    a->back(s.data.data(), out.data.data());
    return out;
}

Image scl_linear(const Image& x, const SclConfig& config) {
    return scl_forward(x, Sinogram(config.geometry), config).image;
}

template <typename T>
nn::Tensor<T> scl_layer(nn::Tape<T>& tape, const nn::Tensor<T>& x, const std::vector<Sinogram>& s_u,
                        const SclConfig& config, std::vector<Sinogram>* merged) {
    if (x.rank() != 4 || x.dim(1) != 1 || x.dim(2) != config.grid.ny || x.dim(3) != config.grid.nx)
        throw ConfigError("scl_layer: expected (B, 1, " + std::to_string(config.grid.ny) + ", " +
                          std::to_string(config.grid.nx) + ") input, got " + nn::shape_string(x.shape()));
    const std::size_t batch = x.dim(0), n = config.grid.size();
    if (s_u.size() != batch)
        throw ConfigError("scl_layer: need one acquired sinogram per batch item");
    nn::Tensor<T> out(x.shape(), x.requires_grad());
    if (merged != nullptr)
        merged->clear();
    for (std::size_t b = 0; b < batch; ++b) {
        Image img(config.grid);
        for (std::size_t i = 0; i < n; ++i)
            img.data[i] = static_cast<double>(x.data()[b * n + i]);
        auto r = scl_forward(img, s_u[b], config);
        for (std::size_t i = 0; i < n; ++i)
            out.data()[b * n + i] = static_cast<T>(r.image.data[i]);
        if (merged != nullptr)
            merged->push_back(std::move(r.merged));
    }
    if (nn::should_record(tape, {&x})) {
        tape.record([x, out, config, batch, n]() {
            if (!out.has_grad())
                return;
            const SclContext ctx{config};
            for (std::size_t b = 0; b < batch; ++b) {
                Image g(config.grid);
                for (std::size_t i = 0; i < n; ++i)
                    g.data[i] = static_cast<double>(out.grad()[b * n + i]);
                const Image dx = scl_backward(g, ctx);
                auto dst = x.grad();
                for (std::size_t i = 0; i < n; ++i)
                    dst[b * n + i] += static_cast<T>(dx.data[i]);
            }
        });
    }
    return out;
}

template nn::Tensor<float> scl_layer(nn::Tape<float>&, const nn::Tensor<float>&, const std::vector<Sinogram>&,
                                     const SclConfig&, std::vector<Sinogram>*);
template nn::Tensor<double> scl_layer(nn::Tape<double>&, const nn::Tensor<double>&, const std::vector<Sinogram>&,
                                      const SclConfig&, std::vector<Sinogram>*);

} // namespace lvr
