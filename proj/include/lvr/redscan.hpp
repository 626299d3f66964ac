#pragma once

#include <cstdint>
#include <string>

#include "lvr/nn/ops.hpp"
#include "lvr/nn/tensor.hpp"

namespace lvr {

struct RedscanConfig {
    std::size_t n_blocks = 4;
    std::size_t base_channels = 32; // C
    std::size_t growth = 16;        // G, channels added by each dense conv
    std::size_t dense_layers = 4;
    std::size_t ca_reduction = 2;
    bool use_ca = true;
    bool use_sa = true;

    /// Throws ConfigError unless n_blocks >= 1, C even, dense_layers == 4 and ca_reduction == 2.
    void validate() const;
    bool operator==(const RedscanConfig&) const = default;
};

/// Total scalar parameter count implied by the layer shapes.
std::size_t redscan_parameter_count(const RedscanConfig& config);

template <typename T>
struct RedscanModel {
    RedscanConfig config;
    nn::ParameterSet<T> params;
};

/// Parameters in a fixed order: conv/FC weights ~ N(0, 2/fan_in), biases 0.
template <typename T>
RedscanModel<T> init_params(const RedscanConfig& config, std::uint64_t seed);

/// Same parameters in another precision.
template <typename To, typename From>
RedscanModel<To> convert_model(const RedscanModel<From>& model);

/// GAP -> FC(C -> C/r) -> ReLU -> FC(C/r -> C) -> sigmoid, then scale channels.
template <typename T>
nn::Tensor<T> channel_attention(nn::Tape<T>& tape, const nn::Tensor<T>& f, const nn::Tensor<T>& w1,
                                const nn::Tensor<T>& w2);

/// 1x1 conv to one channel (no bias) -> sigmoid, then scale every location.
template <typename T>
nn::Tensor<T> spatial_attention(nn::Tape<T>& tape, const nn::Tensor<T>& f, const nn::Tensor<T>& w3);

/// Sum of the enabled attention branches; f itself when both are off.
template <typename T>
nn::Tensor<T> sca(nn::Tape<T>& tape, const RedscanModel<T>& model, std::size_t block, const nn::Tensor<T>& f);

/// Dense convs, local fusion, attention and the local residual of one block.
template <typename T>
nn::Tensor<T> redscab(nn::Tape<T>& tape, const RedscanModel<T>& model, std::size_t block, const nn::Tensor<T>& f);

/// (B, 1, H, W) -> (B, 1, H, W).
template <typename T>
nn::Tensor<T> redscan_forward(nn::Tape<T>& tape, const RedscanModel<T>& model, const nn::Tensor<T>& input);

std::string block_param(std::size_t block, const std::string& name);

} // namespace lvr
