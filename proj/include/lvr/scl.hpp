#pragma once

#include <vector>

#include "lvr/geometry.hpp"
#include "lvr/nn/tensor.hpp"
#include "lvr/sampling.hpp"

namespace lvr {

struct SclConfig {
    double lambda = 0.001;
    ViewMask mask;
    ProjectionGeometry geometry; // full scan
    Grid grid;

    void validate() const;
};

/// Per view row: (lambda * s_net + s_u) / (lambda + 1) on acquired views,
/// s_net elsewhere.
Sinogram merge_sinogram(const Sinogram& s_net, const Sinogram& s_u, const ViewMask& mask, double lambda);

struct SclContext {
    SclConfig config;
};

struct SclResult {
    Image image;     // fbp of the merged sinogram
    Sinogram merged; // the merged sinogram itself
    SclContext context;
};

/// fbp(merge(forward_project(i_net), s_u)). s_u is full-shape with zero rows
/// off the mask.
SclResult scl_forward(const Image& i_net, const Sinogram& s_u, const SclConfig& config);

/// Vector-Jacobian product of scl_forward with respect to i_net:
/// back_project(D * fbp_transpose(grad_out)), D = lambda/(1+lambda) on
/// acquired rows and 1 elsewhere.
Image scl_backward(const Image& grad_out, const SclContext& context);

/// Linear part of the layer (s_u = 0).
Image scl_linear(const Image& x, const SclConfig& config);

/// The layer on a (B, 1, H, W) network tensor; s_u holds one sinogram per
/// batch item. Computed in double and cast back. When `merged` is given it
/// receives the merged sinogram of every batch item.
template <typename T>
nn::Tensor<T> scl_layer(nn::Tape<T>& tape, const nn::Tensor<T>& x, const std::vector<Sinogram>& s_u,
                        const SclConfig& config, std::vector<Sinogram>* merged = nullptr);

} // namespace lvr
