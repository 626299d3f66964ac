#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "lvr/dataset.hpp"
#include "lvr/nn/tensor.hpp"
#include "lvr/redscan.hpp"
#include "lvr/scl.hpp"

namespace lvr {

struct TrainConfig {
    std::size_t z_recurrent = 4;
    std::size_t batch_size = 4;
    double learning_rate = 5e-4;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.99;
    double adam_eps = 1e-8;
    std::size_t max_iters = 2000;
    std::uint64_t seed = 1;
    std::size_t val_interval = 100;
    std::filesystem::path checkpoint_path; // empty: no file written
    bool use_scl = true;
    double lambda = 0.001;
    /// Global gradient norm cap; 0 disables clipping.
    double clip_norm = 10.0;

    void validate() const;
};

template <typename T>
struct AdamState {
    std::vector<std::vector<T>> m;
    std::vector<std::vector<T>> v;
    std::size_t step = 0;
};

template <typename T>
AdamState<T> make_adam_state(const nn::ParameterSet<T>& params);

/// One bias-corrected Adam update from the gradients stored on the parameters.
template <typename T>
void adam_step(nn::ParameterSet<T>& params, AdamState<T>& state, double lr, double beta1, double beta2, double eps);

/// Scales all gradients so their global L2 norm is at most max_norm.
/// Returns the norm before clipping.
template <typename T>
double clip_gradients(nn::ParameterSet<T>& params, double max_norm);

template <typename T>
double max_abs_gradient(const nn::ParameterSet<T>& params);

/// SCL configuration for a dataset's scan.
SclConfig scl_config_for(const DatasetManifest& manifest, double lambda);

/// Sinogram merges of every recurrent iteration, [iteration][batch item].
using RecurrentTrace = std::vector<std::vector<Sinogram>>;

/// Z weight-shared passes; each pass is the network followed by the SCL when
/// `scl` is given. The input of pass j > 1 is the output of pass j - 1.
template <typename T>
nn::Tensor<T> recurrent_forward(nn::Tape<T>& tape, const RedscanModel<T>& model, const nn::Tensor<T>& i_u,
                                const std::vector<Sinogram>& s_u, const SclConfig* scl, std::size_t z,
                                RecurrentTrace* trace = nullptr);

/// Mean absolute difference.
template <typename T>
nn::Tensor<T> l1_loss(nn::Tape<T>& tape, const nn::Tensor<T>& pred, const nn::Tensor<T>& gt);

/// Packs images into a (B, 1, H, W) tensor and back.
template <typename T>
nn::Tensor<T> images_to_tensor(const std::vector<const Image*>& images);
Image tensor_to_image(const nn::Tensor<float>& t, std::size_t index, const Grid& grid);

struct ValidationPoint {
    std::size_t iteration = 0;
    double train_loss = 0.0; // mean over the iterations since the previous point
    double psnr = 0.0;
    double ssim = 0.0;
    double seconds = 0.0;
};

struct TrainRecord {
    std::vector<double> losses; // one per iteration
    std::vector<ValidationPoint> validations;
    double best_val_psnr = 0.0;
    std::size_t best_iteration = 0;
};

struct TrainResult {
    RedscanModel<float> model; // best-validation parameters
    TrainRecord record;
};

struct InferenceOptions {
    std::size_t z_recurrent = 4;
    bool use_scl = true;
    double lambda = 0.001;
    std::size_t batch_size = 8;
};

/// Runs the unrolled model without a tape on initial reconstructions.
std::vector<Image> reconstruct_batch(const RedscanModel<float>& model, const DatasetManifest& manifest,
                                     const std::vector<const Sample*>& samples, const InferenceOptions& options);

/// Initial reconstruction fbp_sampled(s_u), then the unrolled model.
Image reconstruct(const RedscanModel<float>& model, const DatasetManifest& manifest, const Sinogram& s_u,
                  const InferenceOptions& options);

/// Mean PSNR and SSIM of the model on a split.
std::pair<double, double> validate_model(const RedscanModel<float>& model, const DatasetManifest& manifest,
                                         const std::vector<Sample>& split, const InferenceOptions& options);

/// Algorithm loop: seeded batch order, unrolled forward, L1 on the final
/// output, backward, clipping, Adam; validation every val_interval
/// iterations keeps the best model. Progress lines
/// "iter loss val_psnr val_ssim secs" go to `log` when given.
/// Throws TrainingError on a non-finite loss.
TrainResult train(const Dataset& data, RedscanModel<float> model, const TrainConfig& config, std::ostream* log = nullptr);

} // namespace lvr
