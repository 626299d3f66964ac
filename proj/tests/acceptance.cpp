// One line per acceptance criterion. Pass criterion numbers as arguments to
// run a subset; exit status is nonzero when any selected criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "lvr/cli.hpp"
#include "lvr/dataset.hpp"
#include "lvr/evaluate.hpp"
#include "lvr/io.hpp"
#include "lvr/metrics.hpp"
#include "lvr/nn/gradcheck.hpp"
#include "lvr/nn/ops.hpp"
#include "lvr/phantom.hpp"
#include "lvr/projector.hpp"
#include "lvr/sampling.hpp"
#include "lvr/scl.hpp"
#include "lvr/trainer.hpp"
#include "test_support.hpp"

using namespace lvr;
using nn::GradCheckOptions;
using nn::Tape;
using nn::Tensor;

namespace {

// Tolerances.
constexpr double kAdjointTol = 1e-9;
constexpr int kAdjointTrials = 20;
constexpr double kDiskTol = 1.0;
constexpr double kSquareTol = 0.5;
constexpr double kFullFbpMinDb = 30.0;
constexpr double kSparseFbpLoDb = 18.0;
constexpr double kSparseFbpHiDb = 30.0;
constexpr double kBlendTol = 1e-12;
constexpr double kAffineTol = 1e-12;
constexpr double kPrimitiveTol = 1e-5;
constexpr double kEndToEndSingleTol = 1e-3;
constexpr double kLearningGainDb = 3.0;

// Runtime budgets in seconds.
constexpr double kBudgetAdjoint = 10.0;
constexpr double kBudgetRadon = 5.0;
constexpr double kBudgetFbp = 30.0;
constexpr double kBudgetGradients = 120.0;
constexpr double kBudgetLearning = 1800.0;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double norm(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

double seconds_since(std::chrono::steady_clock::time_point t) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

SclConfig scl_config(const Grid& grid, const ProjectionGeometry& geom, const ViewMask& mask, double lambda) {
    SclConfig c;
    c.grid = grid;
    c.geometry = geom;
    c.mask = mask;
    c.lambda = lambda;
    return c;
}

// ---------------------------------------------------------------- 2

Outcome operator_adjoints() {
    std::mt19937_64 rng(2);
    const Grid grid(64);
    const auto geom = uniform_geometry(grid, 60);
    std::map<std::string, double> worst;
    auto record = [&](const std::string& name, double lhs, double rhs, double scale) {
        worst[name] = std::max(worst[name], std::abs(lhs - rhs) / scale);
    };
    const SclConfig scl_sv = scl_config(grid, geom, sparse_view_mask(60, 10), 0.001);
    const SclConfig scl_la = scl_config(grid, geom, limited_angle_mask(60, 120.0, geom.angles_deg), 0.001);
    for (int t = 0; t < kAdjointTrials; ++t) {
        const Image x = test::random_image(grid, rng), x2 = test::random_image(grid, rng);
        const Sinogram y = test::random_sinogram(geom, rng), y2 = test::random_sinogram(geom, rng);

        const Sinogram fx = forward_project(x, geom);
        record("projector", dot(fx.data, y.data), dot(x.data, back_project(y, grid).data), norm(fx.data) * norm(y.data));

        const Sinogram ry = ramp_filter(y);
        record("ramp", dot(ry.data, y2.data), dot(y.data, ramp_filter(y2).data), norm(ry.data) * norm(y2.data));

        const Image by = fbp(y, grid);
        record("fbp", dot(by.data, x.data), dot(y.data, fbp_transpose(x, geom).data), norm(by.data) * norm(x.data));

        for (const SclConfig* cfg : {&scl_sv, &scl_la}) {
            const Image ax = scl_linear(x, *cfg);
            record("scl", dot(ax.data, x2.data), dot(x.data, scl_backward(x2, {*cfg}).data),
                   norm(ax.data) * norm(x2.data));
        }
    }
    Outcome o{true, ""};
    for (const auto& [name, w] : worst) {
        o.pass = o.pass && w <= kAdjointTol;
        o.detail += fmt("%s %.1e  ", name.c_str(), w);
    }
    o.detail += fmt("(%d trials each, tol %.0e)", kAdjointTrials, kAdjointTol);
    return o;
}

// ---------------------------------------------------------------- 3

Outcome radon_oracle() {
    Outcome o{true, ""};
    for (std::size_t n : {64u, 128u}) {
        const double r = 16.0;
        const Image disk = test::centered_disk(n, r);
        const auto geom = uniform_geometry(disk.grid, 36);
        const Sinogram s = forward_project(disk, geom);
        double disk_err = 0.0;
        for (std::size_t v = 0; v < geom.n_views(); ++v)
            for (std::size_t k = 0; k < geom.n_detectors; ++k) {
                const double d = geom.detector_offset(k);
                const double chord = std::abs(d) < r ? 2.0 * std::sqrt(r * r - d * d) : 0.0;
                disk_err = std::max(disk_err, std::abs(s.row(v)[k] - chord));
            }

        Image sq{Grid(n)};
        const std::size_t lo = n / 2 - 10;
        for (std::size_t row = lo; row < lo + 20; ++row)
            for (std::size_t col = lo; col < lo + 20; ++col)
                sq.at(row, col) = 1.0;
        const ProjectionGeometry g0{{0.0}, default_detector_count(n), 1.0};
        const Sinogram p = forward_project(sq, g0);
        double sq_err = 0.0;
        for (std::size_t k = 0; k < g0.n_detectors; ++k) {
            const double d = g0.detector_offset(k);
            sq_err = std::max(sq_err, std::abs(p.row(0)[k] - (std::abs(d) < 10.0 ? 20.0 : 0.0)));
        }
        o.pass = o.pass && disk_err <= kDiskTol && sq_err <= kSquareTol;
        o.detail += fmt("n=%zu disk %.3f square %.3f  ", n, disk_err, sq_err);
    }
    o.detail += fmt("(tol %.1f / %.1f)", kDiskTol, kSquareTol);
    return o;
}

// ---------------------------------------------------------------- 4

Outcome fbp_round_trip() {
    const Image phantom = shepp_logan(128);
    const double full = psnr(fbp(forward_project(phantom, uniform_geometry(phantom.grid, 180)), phantom.grid), phantom).db;
    const double sparse = psnr(fbp(forward_project(phantom, uniform_geometry(phantom.grid, 40)), phantom.grid), phantom).db;
    const bool full_ok = full >= kFullFbpMinDb;
    const bool sparse_ok = sparse >= kSparseFbpLoDb && sparse <= kSparseFbpHiDb && sparse < full;
    return {full_ok && sparse_ok,
            fmt("180 views %.2f dB (need >= %.0f: %s), 40 views %.2f dB (need %.0f-%.0f: %s)", full, kFullFbpMinDb,
                full_ok ? "ok" : "short", sparse, kSparseFbpLoDb, kSparseFbpHiDb, sparse_ok ? "ok" : "out")};
}

// ---------------------------------------------------------------- 5

Outcome scl_exactness() {
    std::mt19937_64 rng(5);
    const Grid grid(64);
    const auto geom = uniform_geometry(grid, 60);
    const ViewMask mask = sparse_view_mask(60, 10);
    bool exact = true;
    double blend = 0.0, off_rows = 0.0, affine = 0.0;
    for (int t = 0; t < 10; ++t) {
        const Image x = test::random_image(grid, rng);
        const Sinogram s_u = apply_mask(test::random_sinogram(geom, rng), mask);
        const Sinogram s_net = forward_project(x, geom);

        const auto r0 = scl_forward(x, s_u, scl_config(grid, geom, mask, 0.0));
        for (std::size_t v : mask.kept) {
            const auto a = r0.merged.row(v), b = s_u.row(v);
            exact = exact && std::equal(a.begin(), a.end(), b.begin());
        }

        const SclConfig cfg = scl_config(grid, geom, mask, 0.001);
        const auto r = scl_forward(x, s_u, cfg);
        for (std::size_t v = 0; v < geom.n_views(); ++v)
            for (std::size_t k = 0; k < geom.n_detectors; ++k) {
                const double got = r.merged.row(v)[k];
                if (mask.contains(v)) {
                    const double want = (0.001 * s_net.row(v)[k] + s_u.row(v)[k]) / 1.001;
                    blend = std::max(blend, std::abs(got - want) / std::max(1.0, std::abs(want)));
                } else {
                    off_rows = std::max(off_rows, std::abs(got - s_net.row(v)[k]) / std::max(1.0, std::abs(got)));
                }
            }

        const Image lin = scl_linear(x, cfg);
        const Image off = scl_forward(Image(grid), s_u, cfg).image;
        double gap = 0.0;
        for (std::size_t i = 0; i < lin.data.size(); ++i)
            gap = std::max(gap, std::abs(r.image.data[i] - lin.data[i] - off.data[i]));
        affine = std::max(affine, gap / norm(r.image.data));
    }
    return {exact && off_rows <= kBlendTol && blend <= kBlendTol && affine <= kAffineTol,
            fmt("lambda=0 rows bit-exact: %s, blend err %.1e, unacquired rows err %.1e, affine err %.1e (tol %.0e)",
                exact ? "yes" : "no", blend, off_rows, affine, kBlendTol)};
}

// ---------------------------------------------------------------- 6

template <typename T>
Tensor<T> rand_tensor(nn::Shape shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    Tensor<T> t(std::move(shape));
    for (auto& v : t.data())
        v = static_cast<T>(u(rng));
    return t;
}

// Magnitudes in [0.1, 1] with random sign, away from activation kinks.
Tensor<double> off_zero(nn::Shape shape, std::mt19937_64& rng) {
    auto t = rand_tensor<double>(std::move(shape), rng, 0.1, 1.0);
    std::bernoulli_distribution flip(0.5);
    for (auto& v : t.data())
        if (flip(rng))
            v = -v;
    return t;
}

Outcome differentiation() {
    std::mt19937_64 rng(6);
    GradCheckOptions opts;
    opts.eps = 1e-5;
    opts.tol = kPrimitiveTol;
    opts.max_checks = 0;
    opts.denom_floor = 1e-3;
    using D = double;
    using Fn = std::function<Tensor<D>(Tape<D>&)>;
    std::vector<std::tuple<std::string, Fn, std::vector<Tensor<D>>>> cases;
    auto weighted = [](Tape<D>& t, const Tensor<D>& y, const Tensor<D>& w) { return nn::sum(t, nn::mul(t, y, w)); };

    const auto x = off_zero({2, 3, 6, 5}, rng);
    const auto r3 = rand_tensor<D>({2, 3, 6, 5}, rng);
    const auto cw = rand_tensor<D>({4, 3, 3, 3}, rng), cb = rand_tensor<D>({4}, rng);
    const auto r4 = rand_tensor<D>({2, 4, 6, 5}, rng);
    cases.push_back({"conv2d", [=](Tape<D>& t) { return weighted(t, nn::conv2d(t, x, cw, cb), r4); }, {x, cw, cb}});
    const auto w1 = rand_tensor<D>({4, 3, 1, 1}, rng), b1 = rand_tensor<D>({4}, rng);
    cases.push_back({"conv2d_1x1", [=](Tape<D>& t) { return weighted(t, nn::conv2d(t, x, w1, b1), r4); }, {x, w1, b1}});
    cases.push_back({"leaky_relu", [=](Tape<D>& t) { return weighted(t, nn::leaky_relu(t, x), r3); }, {x}});
    cases.push_back({"relu", [=](Tape<D>& t) { return weighted(t, nn::relu(t, x), r3); }, {x}});
    cases.push_back({"sigmoid", [=](Tape<D>& t) { return weighted(t, nn::sigmoid(t, x), r3); }, {x}});
    const auto rp = rand_tensor<D>({2, 3}, rng);
    cases.push_back({"global_avg_pool", [=](Tape<D>& t) { return weighted(t, nn::global_avg_pool(t, x), rp); }, {x}});
    const auto fw = rand_tensor<D>({2, 3}, rng), rf = rand_tensor<D>({2, 2}, rng);
    const auto pooled = rand_tensor<D>({2, 3}, rng);
    cases.push_back({"fully_connected",
                     [=](Tape<D>& t) { return weighted(t, nn::fully_connected(t, pooled, fw), rf); }, {pooled, fw}});
    const auto x2 = rand_tensor<D>({2, 2, 6, 5}, rng), rc = rand_tensor<D>({2, 5, 6, 5}, rng);
    cases.push_back({"concat_channels",
                     [=](Tape<D>& t) { return weighted(t, nn::concat_channels<D>(t, {x, x2}), rc); }, {x, x2}});
    const auto rs = rand_tensor<D>({2, 2, 6, 5}, rng);
    cases.push_back({"slice_channels", [=](Tape<D>& t) { return weighted(t, nn::slice_channels(t, x, 1, 2), rs); }, {x}});
    const auto y = rand_tensor<D>({2, 3, 6, 5}, rng);
    cases.push_back({"add", [=](Tape<D>& t) { return weighted(t, nn::add(t, x, y), r3); }, {x, y}});
    cases.push_back({"mul", [=](Tape<D>& t) { return weighted(t, nn::mul(t, x, y), r3); }, {x, y}});
    const auto v = rand_tensor<D>({2, 3}, rng), m = rand_tensor<D>({2, 1, 6, 5}, rng);
    cases.push_back({"mul_channelwise", [=](Tape<D>& t) { return weighted(t, nn::mul_channelwise(t, x, v), r3); }, {x, v}});
    cases.push_back({"mul_spatialwise", [=](Tape<D>& t) { return weighted(t, nn::mul_spatialwise(t, x, m), r3); }, {x, m}});
    cases.push_back({"scale", [=](Tape<D>& t) { return weighted(t, nn::scale(t, x, 0.37), r3); }, {x}});
    cases.push_back({"mean_abs_error", [=](Tape<D>& t) { return nn::mean_abs_error(t, x, y); }, {x, y}});
    const auto ca1 = rand_tensor<D>({2, 4}, rng), ca2 = rand_tensor<D>({4, 2}, rng);
    const auto f4 = rand_tensor<D>({2, 4, 6, 5}, rng);
    cases.push_back({"channel_attention",
                     [=](Tape<D>& t) { return weighted(t, channel_attention(t, f4, ca1, ca2), r4); }, {f4, ca1, ca2}});
    const auto sa = rand_tensor<D>({1, 4, 1, 1}, rng);
    cases.push_back({"spatial_attention",
                     [=](Tape<D>& t) { return weighted(t, spatial_attention(t, f4, sa), r4); }, {f4, sa}});

    const Grid g16(16);
    const SclConfig scl = scl_config(g16, uniform_geometry(g16, 60), sparse_view_mask(60, 10), 0.001);
    std::vector<Sinogram> s_u;
    for (int b = 0; b < 2; ++b)
        s_u.push_back(apply_mask(forward_project(test::random_image(g16, rng), scl.geometry), scl.mask));
    const auto xi = rand_tensor<D>({2, 1, 16, 16}, rng, 0.0, 1.0), ri = rand_tensor<D>({2, 1, 16, 16}, rng);
    cases.push_back({"scl_layer", [=](Tape<D>& t) { return weighted(t, scl_layer(t, xi, s_u, scl), ri); }, {xi}});

    Outcome o{true, ""};
    double prim_worst = 0.0;
    std::string prim_name;
    for (auto& [name, fn, inputs] : cases) {
        const auto rep = nn::gradient_check<D>(fn, inputs, opts);
        if (rep.max_rel_error > prim_worst) {
            prim_worst = rep.max_rel_error;
            prim_name = name;
        }
        if (!rep.passed) {
            o.pass = false;
            o.detail += name + " FAILED (" + rep.worst + ")  ";
        }
    }
    o.detail += fmt("%zu primitives worst %.1e (%s)", cases.size(), prim_worst, prim_name.c_str());

    // Full unroll: RedSCAN + SCL, Z=2, 16x16, every parameter entry.
    RedscanConfig net;
    net.n_blocks = 1;
    net.base_channels = 4;
    net.growth = 2;
    auto model = init_params<D>(net, 6);
    std::vector<Tensor<D>> inputs{xi};
    for (auto& p : model.params.items())
        inputs.push_back(p.tensor);
    const auto rep = nn::gradient_check<D>(
        [&](Tape<D>& t) { return weighted(t, recurrent_forward(t, model, xi, s_u, &scl, 2), ri); }, inputs, opts);
    o.pass = o.pass && rep.passed;
    o.detail += fmt(", unroll double %.1e over %zu entries", rep.max_rel_error, rep.checked);

    // Single precision analytic gradient against a double difference oracle.
    const auto fmodel = init_params<float>(net, 6);
    Tensor<float> fx(xi.shape()), fr(ri.shape());
    std::copy(xi.data().begin(), xi.data().end(), fx.data().begin());
    std::copy(ri.data().begin(), ri.data().end(), fr.data().begin());
    {
        Tape<float> tape;
        tape.backward(nn::sum(tape, nn::mul(tape, recurrent_forward(tape, fmodel, fx, s_u, &scl, 2), fr)));
    }
    auto dmodel = convert_model<D>(fmodel);
    Tensor<D> dx(xi.shape()), dr(ri.shape());
    std::copy(fx.data().begin(), fx.data().end(), dx.data().begin());
    std::copy(fr.data().begin(), fr.data().end(), dr.data().begin());
    auto loss = [&] {
        Tape<D> t(false);
        return weighted(t, recurrent_forward(t, dmodel, dx, s_u, &scl, 2), dr).item();
    };
    double single = 0.0;
    std::size_t checked = 0;
    const double eps = 1e-6;
    for (std::size_t k = 0; k < fmodel.params.size(); ++k) {
        const auto& fp = fmodel.params.items()[k].tensor;
        auto& dp = dmodel.params.items()[k].tensor;
        for (std::size_t i = 0; i < fp.size(); ++i) {
            const double saved = dp.data()[i];
            dp.data()[i] = saved + eps;
            const double up = loss();
            dp.data()[i] = saved - eps;
            const double down = loss();
            dp.data()[i] = saved;
            const double numeric = (up - down) / (2.0 * eps);
            const double analytic = fp.grad()[i];
            single = std::max(single, std::abs(analytic - numeric) /
                                          std::max({std::abs(analytic), std::abs(numeric), 1e-2}));
            ++checked;
        }
    }
    o.pass = o.pass && single <= kEndToEndSingleTol;
    o.detail += fmt(", unroll single %.1e over %zu entries (tol %.0e / %.0e)", single, checked, kPrimitiveTol,
                    kEndToEndSingleTol);
    return o;
}

// ---------------------------------------------------------------- 7

Outcome learning_regression() {
    const auto start = std::chrono::steady_clock::now();
    DatasetManifest m; // 64x64, 60 views, SV keeps 10, 128/16/32 samples
    m.seed = 2024;
    const Dataset data = make_dataset(m);

    RedscanConfig net;
    net.n_blocks = 2;
    net.base_channels = 16;
    net.growth = 8;
    TrainConfig cfg; // Z=4, 2000 iterations, batch 4, lr 5e-4, lambda 0.001
    cfg.seed = 7;
    std::cerr << "[7] training " << redscan_parameter_count(net) << " parameters\n";
    const auto result = train(data, init_params<float>(net, cfg.seed), cfg, &std::cerr);

    const InferenceOptions inference{cfg.z_recurrent, true, cfg.lambda, 8};
    const auto tables = evaluate_split(standard_methods(nullptr, &result.model, inference), m, data.test);
    std::cerr << format_summary(tables);
    const double gain = tables[1].psnr.mean - tables[0].psnr.mean;

    // Final merged sinogram of the trained model with exact replacement.
    const auto scl = scl_config_for(m, 0.0);
    std::vector<const Image*> inputs;
    std::vector<Sinogram> s_u;
    for (std::size_t i = 0; i < 4; ++i) {
        inputs.push_back(&data.test[i].fbp_u);
        s_u.push_back(data.test[i].sino_u);
    }
    Tape<float> tape(false);
    RecurrentTrace trace;
    recurrent_forward(tape, result.model, images_to_tensor<float>(inputs), s_u, &scl, cfg.z_recurrent, &trace);
    bool consistent = trace.size() == cfg.z_recurrent;
    for (std::size_t b = 0; b < s_u.size() && consistent; ++b)
        for (std::size_t v : m.mask.kept) {
            const auto got = trace.back()[b].row(v), want = s_u[b].row(v);
            consistent = consistent && std::equal(got.begin(), got.end(), want.begin());
        }

    const auto& losses = result.record.losses;
    const double head = std::accumulate(losses.begin(), losses.begin() + 100, 0.0) / 100.0;
    const double tail = std::accumulate(losses.end() - 100, losses.end(), 0.0) / 100.0;
    const double elapsed = seconds_since(start);
    const bool pass = gain >= kLearningGainDb && consistent && tail < head && elapsed <= kBudgetLearning;
    return {pass, fmt("test PSNR %.2f dB vs FBP %.2f dB (gain %.2f, need %.1f), merged rows = s_u on Omega: %s, "
                      "loss %.4f -> %.4f, best iter %zu, %.0f s (budget %.0f)",
                      tables[1].psnr.mean, tables[0].psnr.mean, gain, kLearningGainDb, consistent ? "yes" : "no", head,
                      tail, result.record.best_iteration, elapsed, kBudgetLearning)};
}

// ---------------------------------------------------------------- 8

Outcome ablation_harness() {
    DatasetManifest m;
    m.grid = 32;
    m.n_train = 8;
    m.n_val = 2;
    m.n_test = 4;
    m.seed = 8;
    const Dataset data = make_dataset(m);
    RedscanConfig net;
    net.n_blocks = 1;
    net.base_channels = 4;
    net.growth = 2;
    TrainConfig cfg;
    cfg.max_iters = 60;
    cfg.batch_size = 2;
    cfg.val_interval = 20;
    const auto zs = z_sweep(data, net, cfg, {1, 2, 3, 4});
    cfg.z_recurrent = 2;
    const auto att = attention_ablation(data, net, cfg);
    const std::string curve = format_z_curve(zs), table = format_attention_table(att);
    std::cout << curve << table;

    bool ok = zs.size() == 4 && att.size() == 4;
    for (std::size_t i = 0; ok && i < zs.size(); ++i)
        ok = zs[i].z == i + 1 && zs[i].test.rows.size() == m.n_test && std::isfinite(zs[i].test.psnr.mean);
    std::set<std::pair<bool, bool>> combos;
    for (const auto& r : att) {
        combos.insert({r.use_ca, r.use_sa});
        ok = ok && std::isfinite(r.test.psnr.mean) && r.test.rows.size() == m.n_test;
    }
    ok = ok && combos.size() == 4 && std::count(curve.begin(), curve.end(), '\n') == 5 &&
         std::count(table.begin(), table.end(), '\n') == 5;
    return {ok, fmt("Z sweep %zu points, CA/SA table %zu rows", zs.size(), att.size())};
}

// ---------------------------------------------------------------- 9

Outcome determinism() {
    test::TempDir dir("acceptance");
    DatasetManifest m;
    m.grid = 32;
    m.n_train = 4;
    m.n_val = 1;
    m.n_test = 1;
    m.seed = 9;
    generate_dataset(m, dir.path() / "a");
    generate_dataset(m, dir.path() / "b");
    bool datasets = true;
    std::size_t files = 0;
    for (const auto& e : std::filesystem::recursive_directory_iterator(dir.path() / "a"))
        if (e.is_regular_file()) {
            ++files;
            datasets = datasets &&
                       read_file(e.path()) == read_file(dir.path() / "b" / std::filesystem::relative(e.path(), dir.path() / "a"));
        }

    const Dataset data = load_dataset(dir.path() / "a");
    RedscanConfig net;
    net.n_blocks = 1;
    net.base_channels = 4;
    net.growth = 2;
    TrainConfig cfg;
    cfg.max_iters = 6;
    cfg.batch_size = 2;
    cfg.z_recurrent = 2;
    cfg.val_interval = 3;
    cfg.checkpoint_path = dir.path() / "one.rscn";
    train(data, init_params<float>(net, cfg.seed), cfg);
    cfg.checkpoint_path = dir.path() / "two.rscn";
    train(data, init_params<float>(net, cfg.seed), cfg);
    const bool checkpoints = read_file(dir.path() / "one.rscn") == read_file(dir.path() / "two.rscn");

    // save -> load -> save is byte-identical for every format.
    bool round = true;
    const auto model = load_checkpoint(dir.path() / "one.rscn", net);
    save_checkpoint(model, dir.path() / "three.rscn");
    round = round && read_file(dir.path() / "one.rscn") == read_file(dir.path() / "three.rscn");
    const auto img_path = sample_path(dir.path() / "a", Split::Train, 0, "gt");
    save_image(load_image(img_path), dir.path() / "img.bin");
    round = round && read_file(img_path) == read_file(dir.path() / "img.bin");
    const auto sino_path = sample_path(dir.path() / "a", Split::Train, 0, "sinou");
    save_sinogram(load_sinogram(sino_path), dir.path() / "sino.bin");
    round = round && read_file(sino_path) == read_file(dir.path() / "sino.bin");
    round = round && parse_manifest(format_manifest(m)) == m;
    const ViewMask la = limited_angle_mask(60, 120.0, m.geometry().angles_deg);
    round = round && parse_mask_line(format_mask_line(la)) == la;
    export_png(load_image(img_path), dir.path() / "a.png");
    export_png(load_image(img_path), dir.path() / "b.png");
    round = round && read_file(dir.path() / "a.png") == read_file(dir.path() / "b.png");

    return {datasets && checkpoints && round,
            fmt("dataset regeneration identical (%zu files): %s, checkpoints identical: %s, formats round-trip: %s",
                files, datasets ? "yes" : "no", checkpoints ? "yes" : "no", round ? "yes" : "no")};
}

// ---------------------------------------------------------------- 1

Outcome full_scale_substitution(std::size_t ran, std::size_t passed) {
    const auto angles = uniform_geometry(Grid(256), 240).angles_deg;
    const bool sv = sparse_view_mask(240, 40).kept.size() == 40;
    const bool la = limited_angle_mask(240, 120.0, angles).kept.size() == 160;
    return {sv && la,
            fmt("full-scale protocol masks 240->40 SV: %s, 240->160 LA: %s; substitute criteria run %zu, "
                "passed %zu",
                sv ? "ok" : "wrong", la ? "ok" : "wrong", ran, passed)};
}

} // namespace

int main(int argc, char** argv) {
    tune_allocator();
    std::set<int> selected;
    for (int i = 1; i < argc; ++i)
        selected.insert(std::atoi(argv[i]));
    auto wanted = [&](int k) { return selected.empty() || selected.count(k) != 0; };

    const std::vector<std::tuple<int, std::string, std::function<Outcome()>, double>> criteria{
        {2, "operator adjoints", operator_adjoints, kBudgetAdjoint},
        {3, "analytic Radon oracle", radon_oracle, kBudgetRadon},
        {4, "FBP round trip", fbp_round_trip, kBudgetFbp},
        {5, "SCL exactness", scl_exactness, 0.0},
        {6, "differentiation", differentiation, kBudgetGradients},
        {7, "learning regression", learning_regression, kBudgetLearning},
        {8, "ablation harness", ablation_harness, 0.0},
        {9, "determinism and serialization", determinism, 0.0},
    };

    bool all = true;
    std::size_t ran = 0, passed = 0;
    for (const auto& [k, name, fn, budget] : criteria) {
        if (!wanted(k))
            continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double t = seconds_since(start);
        if (budget > 0.0 && t > budget) {
            o.pass = false;
            o.detail += fmt(" [over budget %.0f s]", budget);
        }
        ++ran;
        passed += o.pass;
        all = all && o.pass;
        std::printf("criterion %d %-30s %s  %.1fs  %s\n", k, name.c_str(), o.pass ? "PASS" : "FAIL", t,
                    o.detail.c_str());
        std::fflush(stdout);
    }
    if (wanted(1)) {
        const Outcome o = full_scale_substitution(ran, passed);
        all = all && o.pass;
        std::printf("criterion 1 %-30s %s  %s\n", "full-scale substitution", o.pass ? "PASS" : "FAIL", o.detail.c_str());
    }
    return all ? 0 : 1;
}
