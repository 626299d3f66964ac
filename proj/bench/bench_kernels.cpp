// Parallel kernels against their serial references.

#include <benchmark/benchmark.h>

#include <random>

#include "lvr/nn/ops.hpp"
#include "lvr/phantom.hpp"
#include "lvr/projector.hpp"
#include "lvr/scl.hpp"

using namespace lvr;

namespace {

Image phantom(std::size_t n) { return shepp_logan(n); }

nn::Tensor<float> random_tensor(nn::Shape shape, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> u(-1.0f, 1.0f);
    nn::Tensor<float> t(std::move(shape));
    for (auto& v : t.data())
        v = u(rng);
    return t;
}

void BM_Forward(benchmark::State& state) {
    const Image img = phantom(static_cast<std::size_t>(state.range(0)));
    const auto geom = uniform_geometry(img.grid, 60);
    for (auto _ : state)
        benchmark::DoNotOptimize(forward_project(img, geom));
}

void BM_ForwardReference(benchmark::State& state) {
    const Image img = phantom(static_cast<std::size_t>(state.range(0)));
    const auto geom = uniform_geometry(img.grid, 60);
    for (auto _ : state)
        benchmark::DoNotOptimize(reference::forward_project(img, geom));
}

void BM_Back(benchmark::State& state) {
    const Image img = phantom(static_cast<std::size_t>(state.range(0)));
    const Sinogram s = forward_project(img, uniform_geometry(img.grid, 60));
    for (auto _ : state)
        benchmark::DoNotOptimize(back_project(s, img.grid));
}

void BM_BackReference(benchmark::State& state) {
    const Image img = phantom(static_cast<std::size_t>(state.range(0)));
    const Sinogram s = forward_project(img, uniform_geometry(img.grid, 60));
    for (auto _ : state)
        benchmark::DoNotOptimize(reference::back_project(s, img.grid));
}

void BM_Fbp(benchmark::State& state) {
    const Image img = phantom(static_cast<std::size_t>(state.range(0)));
    const Sinogram s = forward_project(img, uniform_geometry(img.grid, 60));
    for (auto _ : state)
        benchmark::DoNotOptimize(fbp(s, img.grid));
}

void BM_SclForward(benchmark::State& state) {
    const Image img = phantom(static_cast<std::size_t>(state.range(0)));
    SclConfig cfg;
    cfg.grid = img.grid;
    cfg.geometry = uniform_geometry(img.grid, 60);
    cfg.mask = sparse_view_mask(60, 10);
    const Sinogram s_u = apply_mask(forward_project(img, cfg.geometry), cfg.mask);
    for (auto _ : state)
        benchmark::DoNotOptimize(scl_forward(img, s_u, cfg));
}

// Batch 4, 64x64, the dense-block input width of the desk-scale network.
void BM_Conv(benchmark::State& state) {
    const auto c = static_cast<std::size_t>(state.range(0));
    const auto x = random_tensor({4, c, 64, 64}, 1);
    const auto w = random_tensor({8, c, 3, 3}, 2);
    const auto b = random_tensor({8}, 3);
    nn::Tape<float> tape(false);
    for (auto _ : state)
        benchmark::DoNotOptimize(nn::conv2d(tape, x, w, b));
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * 4 * 64 * 64 * 8 * c * 9));
}

void BM_ConvReference(benchmark::State& state) {
    const auto c = static_cast<std::size_t>(state.range(0));
    const auto x = random_tensor({4, c, 64, 64}, 1);
    const auto w = random_tensor({8, c, 3, 3}, 2);
    const auto b = random_tensor({8}, 3);
    for (auto _ : state)
        benchmark::DoNotOptimize(nn::reference::conv2d_forward(x, w, b));
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * 4 * 64 * 64 * 8 * c * 9));
}

void BM_ConvBackward(benchmark::State& state) {
    const auto c = static_cast<std::size_t>(state.range(0));
    auto x = random_tensor({4, c, 64, 64}, 1);
    auto w = random_tensor({8, c, 3, 3}, 2);
    auto b = random_tensor({8}, 3);
    for (auto* t : {&x, &w, &b})
        t->set_requires_grad(true);
    for (auto _ : state) {
        nn::Tape<float> tape;
        tape.backward(nn::sum(tape, nn::conv2d(tape, x, w, b)));
    }
}

} // namespace

BENCHMARK(BM_Forward)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ForwardReference)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Back)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BackReference)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Fbp)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SclForward)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Conv)->Arg(16)->Arg(48)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ConvReference)->Arg(16)->Arg(48)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ConvBackward)->Arg(16)->Arg(48)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
