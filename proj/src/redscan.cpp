#include "lvr/redscan.hpp"

#include <cmath>

#include "lvr/errors.hpp"
#include "lvr/phantom.hpp"

namespace lvr {

using nn::Shape;
using nn::Tape;
using nn::Tensor;

void RedscanConfig::validate() const {
    if (n_blocks < 1)
        throw ConfigError("redscan: n_blocks must be >= 1");
    if (base_channels < 2 || base_channels % 2 != 0)
        throw ConfigError("redscan: base_channels must be even and >= 2, got " + std::to_string(base_channels));
    if (growth < 1)
        throw ConfigError("redscan: growth must be >= 1");
    if (dense_layers != 4)
        throw ConfigError("redscan: dense_layers is fixed at 4");
    if (ca_reduction != 2)
        throw ConfigError("redscan: ca_reduction is fixed at 2");
}

std::string block_param(std::size_t block, const std::string& name) {
    return "block" + std::to_string(block) + "." + name;
}

namespace {

struct ParamSpec {
    std::string name;
    Shape shape;
    std::size_t fan_in; // 0 for biases
};

std::vector<ParamSpec> parameter_layout(const RedscanConfig& cfg) {
    cfg.validate();
    const std::size_t c = cfg.base_channels, g = cfg.growth, h = c / cfg.ca_reduction;
    std::vector<ParamSpec> specs;
    auto conv = [&](const std::string& name, std::size_t in, std::size_t out, std::size_t k) {
        specs.push_back({name + ".weight", {out, in, k, k}, in * k * k});
        specs.push_back({name + ".bias", {out}, 0});
    };
    conv("ife1", 1, c, 3);
    conv("ife2", c, c, 3);
    for (std::size_t b = 0; b < cfg.n_blocks; ++b) {
        for (std::size_t t = 0; t < cfg.dense_layers; ++t)
            conv(block_param(b, "dense" + std::to_string(t)), c + t * g, g, 3);
        conv(block_param(b, "lff"), c + cfg.dense_layers * g, c, 1);
        if (cfg.use_ca) {
            specs.push_back({block_param(b, "ca.w1"), {h, c}, c});
            specs.push_back({block_param(b, "ca.w2"), {c, h}, h});
        }
        if (cfg.use_sa)
            specs.push_back({block_param(b, "sa.w3"), {1, c, 1, 1}, c});
    }
    conv("gff1", cfg.n_blocks * c, c, 1);
    conv("gff2", c, c, 3);
    conv("final", c, 1, 3);
    return specs;
}

} // namespace

std::size_t redscan_parameter_count(const RedscanConfig& config) {
    std::size_t total = 0;
    for (const auto& s : parameter_layout(config))
        total += nn::shape_size(s.shape);
    return total;
}

template <typename T>
RedscanModel<T> init_params(const RedscanConfig& config, std::uint64_t seed) {
    RedscanModel<T> model;
    model.config = config;
    PortableRng rng(seed);
    for (const auto& spec : parameter_layout(config)) {
        auto& t = model.params.add(spec.name, spec.shape);
        if (spec.fan_in == 0)
            continue;
        const double sd = std::sqrt(2.0 / static_cast<double>(spec.fan_in));
        for (auto& v : t.data())
            v = static_cast<T>(sd * rng.normal());
    }
    return model;
}

template <typename To, typename From>
RedscanModel<To> convert_model(const RedscanModel<From>& model) {
    RedscanModel<To> out;
    out.config = model.config;
    for (const auto& p : model.params.items()) {
        auto& t = out.params.add(p.name, p.tensor.shape());
        for (std::size_t i = 0; i < t.size(); ++i)
            t.data()[i] = static_cast<To>(p.tensor.data()[i]);
    }
    return out;
}

template <typename T>
Tensor<T> channel_attention(Tape<T>& tape, const Tensor<T>& f, const Tensor<T>& w1, const Tensor<T>& w2) {
    if (f.rank() != 4 || w1.rank() != 2 || w2.rank() != 2 || w1.dim(1) != f.dim(1) || w2.dim(0) != f.dim(1) ||
        w2.dim(1) != w1.dim(0))
        throw ConfigError("channel_attention: weight shapes do not match " + nn::shape_string(f.shape()));
    auto v = nn::global_avg_pool(tape, f);
    auto hidden = nn::relu(tape, nn::fully_connected(tape, v, w1));
    auto v_hat = nn::sigmoid(tape, nn::fully_connected(tape, hidden, w2));
    return nn::mul_channelwise(tape, f, v_hat);
}

template <typename T>
Tensor<T> spatial_attention(Tape<T>& tape, const Tensor<T>& f, const Tensor<T>& w3) {
    if (f.rank() != 4 || w3.rank() != 4 || w3.dim(0) != 1 || w3.dim(1) != f.dim(1) || w3.dim(2) != 1)
        throw ConfigError("spatial_attention: weight shape does not match " + nn::shape_string(f.shape()));
    auto m_hat = nn::sigmoid(tape, nn::conv2d(tape, f, w3, Tensor<T>()));
    return nn::mul_spatialwise(tape, f, m_hat);
}

template <typename T>
Tensor<T> sca(Tape<T>& tape, const RedscanModel<T>& model, std::size_t block, const Tensor<T>& f) {
    const auto& p = model.params;
    const auto& cfg = model.config;
    if (cfg.use_ca && cfg.use_sa)
        return nn::add(tape,
                       channel_attention(tape, f, p.get(block_param(block, "ca.w1")), p.get(block_param(block, "ca.w2"))),
                       spatial_attention(tape, f, p.get(block_param(block, "sa.w3"))));
    if (cfg.use_ca)
        return channel_attention(tape, f, p.get(block_param(block, "ca.w1")), p.get(block_param(block, "ca.w2")));
    if (cfg.use_sa)
        return spatial_attention(tape, f, p.get(block_param(block, "sa.w3")));
    return f;
}

template <typename T>
Tensor<T> redscab(Tape<T>& tape, const RedscanModel<T>& model, std::size_t block, const Tensor<T>& f) {
    const auto& p = model.params;
    std::vector<Tensor<T>> features{f};
    for (std::size_t t = 0; t < model.config.dense_layers; ++t) {
        const std::string name = block_param(block, "dense" + std::to_string(t));
        auto in = features.size() == 1 ? f : nn::concat_channels(tape, features);
        features.push_back(
            nn::leaky_relu(tape, nn::conv2d(tape, in, p.get(name + ".weight"), p.get(name + ".bias")), T(0.01)));
    }
    auto fused = nn::conv2d(tape, nn::concat_channels(tape, features), p.get(block_param(block, "lff.weight")),
                            p.get(block_param(block, "lff.bias")));
    return nn::add(tape, sca(tape, model, block, fused), f);
}

template <typename T>
Tensor<T> redscan_forward(Tape<T>& tape, const RedscanModel<T>& model, const Tensor<T>& input) {
    if (input.rank() != 4 || input.dim(1) != 1 || input.dim(2) != input.dim(3))
        throw ConfigError("redscan_forward: expected (B, 1, H, H) input, got " + nn::shape_string(input.shape()));
    const auto& p = model.params;
    auto conv = [&](const Tensor<T>& x, const std::string& name) {
        return nn::conv2d(tape, x, p.get(name + ".weight"), p.get(name + ".bias"));
    };
    auto shallow = conv(input, "ife1");
    auto f = conv(shallow, "ife2");
    std::vector<Tensor<T>> block_outputs;
    for (std::size_t b = 0; b < model.config.n_blocks; ++b) {
        f = redscab(tape, model, b, f);
        block_outputs.push_back(f);
    }
    auto global = conv(conv(nn::concat_channels(tape, block_outputs), "gff1"), "gff2");
    return conv(nn::add(tape, global, shallow), "final");
}

#define LVR_INSTANTIATE_REDSCAN(T)                                                                           \
    template RedscanModel<T> init_params<T>(const RedscanConfig&, std::uint64_t);                            \
    template Tensor<T> channel_attention(Tape<T>&, const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);    \
    template Tensor<T> spatial_attention(Tape<T>&, const Tensor<T>&, const Tensor<T>&);                      \
    template Tensor<T> sca(Tape<T>&, const RedscanModel<T>&, std::size_t, const Tensor<T>&);                 \
    template Tensor<T> redscab(Tape<T>&, const RedscanModel<T>&, std::size_t, const Tensor<T>&);             \
    template Tensor<T> redscan_forward(Tape<T>&, const RedscanModel<T>&, const Tensor<T>&);

LVR_INSTANTIATE_REDSCAN(float)
LVR_INSTANTIATE_REDSCAN(double)
template RedscanModel<float> convert_model<float, double>(const RedscanModel<double>&);
template RedscanModel<double> convert_model<double, float>(const RedscanModel<float>&);
template RedscanModel<float> convert_model<float, float>(const RedscanModel<float>&);
template RedscanModel<double> convert_model<double, double>(const RedscanModel<double>&);

} // namespace lvr
