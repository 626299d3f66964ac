#pragma once

#include <vector>

#include "lvr/nn/tensor.hpp"

namespace lvr::nn {

/// Stride-1 "same" cross-correlation over NCHW input. Weight is
/// (out, in, k, k) with odd k; bias (out) may be undefined.
template <typename T>
Tensor<T> conv2d(Tape<T>& tape, const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias);

template <typename T>
Tensor<T> leaky_relu(Tape<T>& tape, const Tensor<T>& x, T slope = T(0.01));

template <typename T>
Tensor<T> relu(Tape<T>& tape, const Tensor<T>& x);

template <typename T>
Tensor<T> sigmoid(Tape<T>& tape, const Tensor<T>& x);

/// (B, C, H, W) -> (B, C), mean over H x W.
template <typename T>
Tensor<T> global_avg_pool(Tape<T>& tape, const Tensor<T>& x);

/// x (B, in), weight (out, in) -> (B, out). No bias.
template <typename T>
Tensor<T> fully_connected(Tape<T>& tape, const Tensor<T>& x, const Tensor<T>& weight);

template <typename T>
Tensor<T> concat_channels(Tape<T>& tape, const std::vector<Tensor<T>>& xs);

/// Channels [start, start + count) of an NCHW tensor.
template <typename T>
Tensor<T> slice_channels(Tape<T>& tape, const Tensor<T>& x, std::size_t start, std::size_t count);

template <typename T>
Tensor<T> add(Tape<T>& tape, const Tensor<T>& x, const Tensor<T>& y);

/// Elementwise product of equal shapes.
template <typename T>
Tensor<T> mul(Tape<T>& tape, const Tensor<T>& x, const Tensor<T>& y);

/// x (B, C, H, W) scaled per channel by v (B, C).
template <typename T>
Tensor<T> mul_channelwise(Tape<T>& tape, const Tensor<T>& x, const Tensor<T>& v);

/// x (B, C, H, W) scaled per location by m (B, 1, H, W).
template <typename T>
Tensor<T> mul_spatialwise(Tape<T>& tape, const Tensor<T>& x, const Tensor<T>& m);

template <typename T>
Tensor<T> scale(Tape<T>& tape, const Tensor<T>& x, T factor);

/// Scalar sum of all entries.
template <typename T>
Tensor<T> sum(Tape<T>& tape, const Tensor<T>& x);

/// Scalar mean |pred - target|. Sub-gradient 0 where they are equal.
template <typename T>
Tensor<T> mean_abs_error(Tape<T>& tape, const Tensor<T>& pred, const Tensor<T>& target);

namespace reference {

/// Direct nested-loop convolution, same contract as nn::conv2d (forward only).
template <typename T>
std::vector<T> conv2d_forward(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias);

} // namespace reference

} // namespace lvr::nn
