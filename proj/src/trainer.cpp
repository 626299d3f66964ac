#include "lvr/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

#include "lvr/errors.hpp"
#include "lvr/io.hpp"
#include "lvr/metrics.hpp"
#include "lvr/nn/ops.hpp"
#include "lvr/phantom.hpp"

namespace lvr {

using nn::Tape;
using nn::Tensor;

void TrainConfig::validate() const {
    if (z_recurrent < 1)
        throw ConfigError("train: z must be >= 1");
    if (batch_size < 1)
        throw ConfigError("train: batch size must be >= 1");
    if (!(learning_rate > 0.0))
        throw ConfigError("train: learning rate must be positive");
    if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0 && adam_beta2 >= 0.0 && adam_beta2 < 1.0 && adam_eps > 0.0))
        throw ConfigError("train: invalid Adam hyperparameters");
    if (val_interval < 1)
        throw ConfigError("train: validation interval must be >= 1");
    if (!(lambda >= 0.0))
        throw ConfigError("train: lambda must be >= 0");
    if (!(clip_norm >= 0.0))
        throw ConfigError("train: clip norm must be >= 0");
}

template <typename T>
AdamState<T> make_adam_state(const nn::ParameterSet<T>& params) {
    AdamState<T> s;
    for (const auto& p : params.items()) {
        s.m.emplace_back(p.tensor.size(), T(0));
        s.v.emplace_back(p.tensor.size(), T(0));
    }
    return s;
}

template <typename T>
void adam_step(nn::ParameterSet<T>& params, AdamState<T>& state, double lr, double beta1, double beta2, double eps) {
    auto items = params.items();
    if (state.m.size() != items.size() || state.v.size() != items.size())
        throw ConfigError("adam_step: optimizer state does not match the parameters");
    ++state.step;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
    for (std::size_t p = 0; p < items.size(); ++p) {
        auto& t = items[p].tensor;
        if (state.m[p].size() != t.size())
            throw ConfigError("adam_step: moment shape mismatch for " + items[p].name);
        auto value = t.data();
        const auto grad = t.grad();
        auto& m = state.m[p];
        auto& v = state.v[p];
        for (std::size_t i = 0; i < value.size(); ++i) {
            const double g = grad[i];
            const double mi = beta1 * m[i] + (1.0 - beta1) * g;
            const double vi = beta2 * v[i] + (1.0 - beta2) * g * g;
            m[i] = static_cast<T>(mi);
            v[i] = static_cast<T>(vi);
            value[i] = static_cast<T>(value[i] - lr * (mi / bc1) / (std::sqrt(vi / bc2) + eps));
        }
    }
}

template <typename T>
double clip_gradients(nn::ParameterSet<T>& params, double max_norm) {
    double sq = 0.0;
    for (const auto& p : params.items())
        for (T g : p.tensor.grad())
            sq += static_cast<double>(g) * g;
    const double norm = std::sqrt(sq);
    if (max_norm > 0.0 && norm > max_norm) {
        const T s = static_cast<T>(max_norm / norm);
        for (auto& p : params.items())
            for (T& g : p.tensor.grad())
                g *= s;
    }
    return norm;
}

template <typename T>
double max_abs_gradient(const nn::ParameterSet<T>& params) {
    double m = 0.0;
    for (const auto& p : params.items())
        for (T g : p.tensor.grad())
            m = std::isnan(g) ? g : std::max(m, std::abs(static_cast<double>(g)));
    return m;
}

SclConfig scl_config_for(const DatasetManifest& manifest, double lambda) {
    SclConfig c;
    c.lambda = lambda;
    c.mask = manifest.mask;
    c.grid = manifest.grid_spec();
    c.geometry = manifest.geometry();
    c.validate();
    return c;
}

template <typename T>
Tensor<T> recurrent_forward(Tape<T>& tape, const RedscanModel<T>& model, const Tensor<T>& i_u,
                            const std::vector<Sinogram>& s_u, const SclConfig* scl, std::size_t z,
                            RecurrentTrace* trace) {
    if (z < 1)
        throw ConfigError("recurrent_forward: z must be >= 1");
    if (trace != nullptr)
        trace->clear();
    Tensor<T> x = i_u;
    for (std::size_t j = 0; j < z; ++j) {
        x = redscan_forward(tape, model, x);
        if (scl != nullptr) {
            std::vector<Sinogram> merged;
            x = scl_layer(tape, x, s_u, *scl, trace != nullptr ? &merged : nullptr);
            if (trace != nullptr)
                trace->push_back(std::move(merged));
        }
    }
    return x;
}

template <typename T>
Tensor<T> l1_loss(Tape<T>& tape, const Tensor<T>& pred, const Tensor<T>& gt) {
    return nn::mean_abs_error(tape, pred, gt);
}

template <typename T>
Tensor<T> images_to_tensor(const std::vector<const Image*>& images) {
    if (images.empty())
        throw ConfigError("images_to_tensor: no images");
    const Grid g = images[0]->grid;
    Tensor<T> t({images.size(), 1, g.ny, g.nx});
    for (std::size_t b = 0; b < images.size(); ++b) {
        if (images[b]->grid.nx != g.nx || images[b]->grid.ny != g.ny)
            throw ConfigError("images_to_tensor: images differ in size");
        for (std::size_t i = 0; i < g.size(); ++i)
            t.data()[b * g.size() + i] = static_cast<T>(images[b]->data[i]);
    }
    return t;
}

Image tensor_to_image(const Tensor<float>& t, std::size_t index, const Grid& grid) {
    Image img(grid);
    for (std::size_t i = 0; i < grid.size(); ++i)
        img.data[i] = static_cast<double>(t.data()[index * grid.size() + i]);
    return img;
}

std::vector<Image> reconstruct_batch(const RedscanModel<float>& model, const DatasetManifest& manifest,
                                     const std::vector<const Sample*>& samples, const InferenceOptions& options) {
    std::optional<SclConfig> scl;
    if (options.use_scl)
        scl = scl_config_for(manifest, options.lambda);
    std::vector<Image> out;
    const std::size_t step = std::max<std::size_t>(1, options.batch_size);
    for (std::size_t start = 0; start < samples.size(); start += step) {
        const std::size_t end = std::min(samples.size(), start + step);
        std::vector<const Image*> inputs;
        std::vector<Sinogram> s_u;
        for (std::size_t i = start; i < end; ++i) {
            inputs.push_back(&samples[i]->fbp_u);
            s_u.push_back(samples[i]->sino_u);
        }
        Tape<float> tape(false);
        auto y = recurrent_forward(tape, model, images_to_tensor<float>(inputs), s_u, scl ? &*scl : nullptr,
                                   options.z_recurrent);
        for (std::size_t b = 0; b < end - start; ++b)
            out.push_back(tensor_to_image(y, b, manifest.grid_spec()));
    }
    return out;
}

Image reconstruct(const RedscanModel<float>& model, const DatasetManifest& manifest, const Sinogram& s_u,
                  const InferenceOptions& options) {
    Sample s;
    s.sino_u = s_u;
    s.sino_u.geometry = manifest.geometry();
    if (s_u.data.size() != s.sino_u.geometry.n_views() * s.sino_u.geometry.n_detectors)
        throw ConfigError("reconstruct: sinogram does not match the dataset scan");
    s.fbp_u = fbp_sampled(s.sino_u, manifest.mask, manifest.grid_spec());
    return reconstruct_batch(model, manifest, {&s}, options).front();
}

std::pair<double, double> validate_model(const RedscanModel<float>& model, const DatasetManifest& manifest,
                                         const std::vector<Sample>& split, const InferenceOptions& options) {
    std::vector<const Sample*> ptrs;
    for (const auto& s : split)
        ptrs.push_back(&s);
    const auto recs = reconstruct_batch(model, manifest, ptrs, options);
    double p = 0.0, q = 0.0;
    for (std::size_t i = 0; i < recs.size(); ++i) {
        p += psnr(recs[i], split[i].gt).db;
        q += ssim(recs[i], split[i].gt);
    }
    const double n = static_cast<double>(recs.size());
    return {p / n, q / n};
}

TrainResult train(const Dataset& data, RedscanModel<float> model, const TrainConfig& config, std::ostream* log) {
    config.validate();
    if (data.train.empty())
        throw ConfigError("train: empty training split");
    model = convert_model<float>(model);
    const auto start = std::chrono::steady_clock::now();
    auto seconds = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };
    std::optional<SclConfig> scl;
    if (config.use_scl)
        scl = scl_config_for(data.manifest, config.lambda);
    const InferenceOptions inference{config.z_recurrent, config.use_scl, config.lambda, 8};
    const std::vector<Sample>& val = data.val.empty() ? data.train : data.val;

    TrainResult result;
    auto& rec = result.record;
    AdamState<float> adam = make_adam_state(model.params);
    PortableRng rng(config.seed);
    std::vector<std::size_t> order(data.train.size());
    std::size_t cursor = order.size();

    auto next_index = [&] {
        if (cursor == order.size()) {
            std::iota(order.begin(), order.end(), std::size_t{0});
            for (std::size_t i = order.size(); i > 1; --i)
                std::swap(order[i - 1], order[rng.integer(0, i - 1)]);
            cursor = 0;
        }
        return order[cursor++];
    };

    double interval_loss = 0.0;
    std::size_t interval_count = 0;
    auto checkpoint = [&](std::size_t iter) {
        const auto [vp, vs] = validate_model(model, data.manifest, val, inference);
        ValidationPoint point{iter, interval_count ? interval_loss / static_cast<double>(interval_count) : 0.0, vp,
                              vs, seconds()};
        rec.validations.push_back(point);
        interval_loss = 0.0;
        interval_count = 0;
        if (rec.validations.size() == 1 || vp > rec.best_val_psnr) {
            rec.best_val_psnr = vp;
            rec.best_iteration = iter;
            result.model = convert_model<float>(model);
            if (!config.checkpoint_path.empty())
                save_checkpoint(result.model, config.checkpoint_path);
        }
        if (log != nullptr) {
            char line[160];
            std::snprintf(line, sizeof line, "%zu %.6f %.4f %.5f %.1f", point.iteration, point.train_loss, point.psnr,
                          point.ssim, point.seconds);
            *log << line << std::endl;
        }
    };

    checkpoint(0);
    for (std::size_t iter = 1; iter <= config.max_iters; ++iter) {
        std::vector<const Image*> inputs, targets;
        std::vector<Sinogram> s_u;
        for (std::size_t b = 0; b < config.batch_size; ++b) {
            const Sample& s = data.train[next_index()];
            inputs.push_back(&s.fbp_u);
            targets.push_back(&s.gt);
            s_u.push_back(s.sino_u);
        }
        model.params.zero_grad();
        Tape<float> tape(true);
        auto out = recurrent_forward(tape, model, images_to_tensor<float>(inputs), s_u, scl ? &*scl : nullptr,
                                     config.z_recurrent);
        auto loss = l1_loss(tape, out, images_to_tensor<float>(targets));
        const double value = loss.item();
        tape.backward(loss);
        if (!std::isfinite(value)) {
            char msg[160];
            std::snprintf(msg, sizeof msg, "non-finite loss at iteration %zu (max |grad| = %g)", iter,
                          max_abs_gradient(model.params));
            throw TrainingError(msg);
        }
        clip_gradients(model.params, config.clip_norm);
        adam_step(model.params, adam, config.learning_rate, config.adam_beta1, config.adam_beta2, config.adam_eps);
        rec.losses.push_back(value);
        interval_loss += value;
        ++interval_count;
        if (iter % config.val_interval == 0 || iter == config.max_iters)
            checkpoint(iter);
    }
    return result;
}

#define LVR_INSTANTIATE_TRAINER(T)                                                                                \
    template AdamState<T> make_adam_state(const nn::ParameterSet<T>&);                                            \
    template void adam_step(nn::ParameterSet<T>&, AdamState<T>&, double, double, double, double);                \
    template double clip_gradients(nn::ParameterSet<T>&, double);                                                 \
    template double max_abs_gradient(const nn::ParameterSet<T>&);                                                 \
    template Tensor<T> recurrent_forward(Tape<T>&, const RedscanModel<T>&, const Tensor<T>&,                      \
                                         const std::vector<Sinogram>&, const SclConfig*, std::size_t,             \
                                         RecurrentTrace*);                                                        \
    template Tensor<T> l1_loss(Tape<T>&, const Tensor<T>&, const Tensor<T>&);                                     \
    template Tensor<T> images_to_tensor<T>(const std::vector<const Image*>&);

LVR_INSTANTIATE_TRAINER(float)
LVR_INSTANTIATE_TRAINER(double)

} // namespace lvr
