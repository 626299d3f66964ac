#include "lvr/cli.hpp"

#include <CLI11.hpp>

#include <ostream>
#include <string>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "lvr/dataset.hpp"
#include "lvr/errors.hpp"
#include "lvr/evaluate.hpp"
#include "lvr/io.hpp"
#include "lvr/phantom.hpp"
#include "lvr/projector.hpp"
#include "lvr/sampling.hpp"
#include "lvr/trainer.hpp"

namespace lvr {

void tune_allocator() {
#if defined(__GLIBC__)
    mallopt(M_MMAP_THRESHOLD, 1 << 30);
    mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
}

namespace {

struct ScanFlags {
    std::size_t grid = 64;
    std::size_t views = 60;
    std::size_t sv_keep = 0;
    double la_max_deg = 0.0;
    std::string data;
};

struct NetFlags {
    std::size_t blocks = 4;
    std::size_t channels = 32;
    std::size_t growth = 16;
    bool no_ca = false;
    bool no_sa = false;

    RedscanConfig config() const {
        RedscanConfig c;
        c.n_blocks = blocks;
        c.base_channels = channels;
        c.growth = growth;
        c.use_ca = !no_ca;
        c.use_sa = !no_sa;
        return c;
    }
};

struct TrainFlags {
    std::size_t z = 4;
    double lr = 5e-4;
    std::size_t batch = 4;
    std::uint64_t seed = 1;
    std::size_t iters = 2000;
    std::size_t val_interval = 100;
    double lambda = 0.001;
    bool no_scl = false;

    TrainConfig config() const {
        TrainConfig c;
        c.z_recurrent = z;
        c.learning_rate = lr;
        c.batch_size = batch;
        c.seed = seed;
        c.max_iters = iters;
        c.val_interval = val_interval;
        c.lambda = lambda;
        c.use_scl = !no_scl;
        return c;
    }
    InferenceOptions inference() const { return {z, !no_scl, lambda, 8}; }
};

void add_scan(CLI::App* cmd, ScanFlags& f, bool with_mask = true) {
    cmd->add_option("--grid", f.grid, "image side length in pixels")->capture_default_str();
    cmd->add_option("--views", f.views, "number of full-scan views over [0,180)")->capture_default_str();
    if (with_mask) {
        auto* sv = cmd->add_option("--sv-keep", f.sv_keep, "sparse view: keep this many uniformly spaced views");
        cmd->add_option("--la-max-deg", f.la_max_deg, "limited angle: keep views below this angle")->excludes(sv);
    }
}

void add_net(CLI::App* cmd, NetFlags& f) {
    cmd->add_option("--blocks", f.blocks, "residual dense blocks")->capture_default_str();
    cmd->add_option("--channels", f.channels, "base feature channels")->capture_default_str();
    cmd->add_option("--growth", f.growth, "dense growth rate")->capture_default_str();
    cmd->add_flag("--no-ca", f.no_ca, "disable channel attention");
    cmd->add_flag("--no-sa", f.no_sa, "disable spatial attention");
}

void add_inference(CLI::App* cmd, TrainFlags& f) {
    cmd->add_option("--z", f.z, "recurrent passes")->capture_default_str();
    cmd->add_option("--lambda", f.lambda, "consistency blending weight")->capture_default_str();
    cmd->add_flag("--no-scl", f.no_scl, "disable the sinogram consistency layer");
}

void add_train(CLI::App* cmd, TrainFlags& f) {
    add_inference(cmd, f);
    cmd->add_option("--lr", f.lr, "Adam learning rate")->capture_default_str();
    cmd->add_option("--batch", f.batch, "batch size")->capture_default_str();
    cmd->add_option("--seed", f.seed, "initialization and batch order seed")->capture_default_str();
    cmd->add_option("--iters", f.iters, "training iterations")->capture_default_str();
    cmd->add_option("--val-interval", f.val_interval, "iterations between validations")->capture_default_str();
}

std::optional<ViewMask> mask_from(const ScanFlags& f) {
    if (f.sv_keep > 0)
        return sparse_view_mask(f.views, f.sv_keep);
    if (f.la_max_deg > 0.0)
        return limited_angle_mask(f.views, f.la_max_deg, uniform_geometry(Grid(f.grid), f.views).angles_deg);
    return std::nullopt;
}

DatasetManifest manifest_from(const ScanFlags& f) {
    if (!f.data.empty())
        return read_manifest(f.data);
    DatasetManifest m;
    m.grid = f.grid;
    m.n_views = f.views;
    m.mask = mask_from(f).value_or(sparse_view_mask(f.views, f.views / 6));
    return m;
}

void write_image(const Image& img, const std::string& path, const std::string& png) {
    save_image(img, path);
    if (!png.empty())
        export_png(img, png);
}

std::string index_list(const std::vector<std::size_t>& idx) {
    std::string s;
    for (std::size_t i = 0; i < idx.size(); ++i)
        s += (i ? "," : "") + std::to_string(idx[i]);
    return s;
}

} // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Limited-view CT reconstruction with a recurrent consistency network", "lvr"};
    app.require_subcommand(1);

    ScanFlags scan;
    NetFlags net;
    TrainFlags tr;
    std::string input, output, png, model_path, single_path, split = "test", what = "z";
    std::uint64_t seed = 1;
    bool shepp = false, rows = false;
    DatasetManifest sizes;
    std::vector<std::size_t> zs{1, 2, 3, 4};

    auto* phantom = app.add_subcommand("phantom", "write a phantom image or a whole dataset");
    add_scan(phantom, scan);
    phantom->add_flag("--shepp", shepp, "Shepp-Logan head instead of a random phantom");
    phantom->add_option("--seed", seed, "phantom or dataset seed")->capture_default_str();
    phantom->add_option("-o,--out", output, "output image file");
    phantom->add_option("--png", png, "also write a PNG preview");
    phantom->add_option("--dataset", scan.data, "generate a dataset into this directory instead");
    phantom->add_option("--n-train", sizes.n_train)->capture_default_str();
    phantom->add_option("--n-val", sizes.n_val)->capture_default_str();
    phantom->add_option("--n-test", sizes.n_test)->capture_default_str();

    auto* project = app.add_subcommand("project", "forward project an image, optionally keeping only acquired views");
    add_scan(project, scan);
    project->add_option("-i,--in", input, "input image file")->required();
    project->add_option("-o,--out", output, "output sinogram file")->required();

    auto* mask = app.add_subcommand("mask", "print the acquired view indices");
    add_scan(mask, scan);

    auto* fbp_cmd = app.add_subcommand("fbp", "filtered back projection of a sinogram");
    add_scan(fbp_cmd, scan);
    fbp_cmd->add_option("-i,--in", input, "input sinogram file")->required();
    fbp_cmd->add_option("-o,--out", output, "output image file")->required();
    fbp_cmd->add_option("--png", png, "also write a PNG preview");

    auto* train_cmd = app.add_subcommand("train", "train the recurrent network on a dataset");
    train_cmd->add_option("--data", scan.data, "dataset directory")->required();
    train_cmd->add_option("-o,--out", output, "checkpoint file")->required();
    add_net(train_cmd, net);
    add_train(train_cmd, tr);

    auto* recon = app.add_subcommand("reconstruct", "reconstruct an acquired sinogram with a trained model");
    add_scan(recon, scan);
    recon->add_option("--data", scan.data, "take the scan geometry from this dataset");
    recon->add_option("--model", model_path, "checkpoint file")->required();
    recon->add_option("-i,--in", input, "acquired sinogram file")->required();
    recon->add_option("-o,--out", output, "output image file")->required();
    recon->add_option("--png", png, "also write a PNG preview");
    add_inference(recon, tr);

    auto* eval = app.add_subcommand("eval", "score FBP and trained models on a dataset split");
    eval->add_option("--data", scan.data, "dataset directory")->required();
    eval->add_option("--model", model_path, "recurrent model checkpoint");
    eval->add_option("--single", single_path, "single-pass model checkpoint");
    eval->add_option("--split", split, "train, val or test")
        ->check(CLI::IsMember({"train", "val", "test"}))
        ->capture_default_str();
    eval->add_flag("--rows", rows, "also print per-sample rows");
    add_inference(eval, tr);

    auto* ablate = app.add_subcommand("ablate", "recurrent depth or attention ablation");
    ablate->add_option("--data", scan.data, "dataset directory")->required();
    ablate->add_option("--what", what, "z or attention")->check(CLI::IsMember({"z", "attention"}))->capture_default_str();
    ablate->add_option("--zs", zs, "depths for the z sweep")->delimiter(',');
    add_net(ablate, net);
    add_train(ablate, tr);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*phantom) {
            if (!scan.data.empty()) {
                DatasetManifest m = sizes;
                m.grid = scan.grid;
                m.n_views = scan.views;
                m.mask = mask_from(scan).value_or(sparse_view_mask(scan.views, scan.views / 6));
                m.seed = seed;
                generate_dataset(m, scan.data);
                out << "wrote " << m.n_train + m.n_val + m.n_test << " samples to " << scan.data << "\n";
            } else {
                if (output.empty())
                    throw ConfigError("phantom: give --out or --dataset");
                write_image(shepp ? shepp_logan(scan.grid) : random_phantom(scan.grid, seed), output, png);
            }
        } else if (*project) {
            const Image img = load_image(input);
            Sinogram s = forward_project(img, uniform_geometry(img.grid, scan.views));
            if (const auto m = mask_from(scan))
                s = apply_mask(s, *m);
            save_sinogram(s, output);
        } else if (*mask) {
            const auto m = mask_from(scan);
            if (!m)
                throw ConfigError("mask: give --sv-keep or --la-max-deg");
            out << index_list(m->kept) << "\n";
        } else if (*fbp_cmd) {
            const Sinogram s = load_sinogram(input);
            const auto m = mask_from(scan);
            write_image(m ? fbp_sampled(s, *m, Grid(scan.grid)) : fbp(s, Grid(scan.grid)), output, png);
        } else if (*train_cmd) {
            const Dataset data = load_dataset(scan.data);
            TrainConfig c = tr.config();
            c.checkpoint_path = output;
            const auto r = train(data, init_params<float>(net.config(), tr.seed), c, &out);
            save_checkpoint(r.model, output);
            out << "best iteration " << r.record.best_iteration << " val psnr " << r.record.best_val_psnr << "\n";
        } else if (*recon) {
            const DatasetManifest m = manifest_from(scan);
            const auto model = load_checkpoint(model_path);
            write_image(reconstruct(model, m, load_sinogram(input), tr.inference()), output, png);
        } else if (*eval) {
            const Dataset data = load_dataset(scan.data);
            std::optional<RedscanModel<float>> full, single;
            if (!model_path.empty())
                full = load_checkpoint(model_path);
            if (!single_path.empty())
                single = load_checkpoint(single_path);
            const Split s = split == "train" ? Split::Train : split == "val" ? Split::Val : Split::Test;
            const auto tables = evaluate_split(standard_methods(single ? &*single : nullptr, full ? &*full : nullptr,
                                                                tr.inference()),
                                               data.manifest, data.split(s));
            out << format_summary(tables);
            if (rows)
                for (const auto& t : tables)
                    out << "# " << t.method << "\n" << format_rows(t);
        } else if (*ablate) {
            const Dataset data = load_dataset(scan.data);
            if (what == "z")
                out << format_z_curve(z_sweep(data, net.config(), tr.config(), zs, &err));
            else
                out << format_attention_table(attention_ablation(data, net.config(), tr.config(), &err));
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

} // namespace lvr
