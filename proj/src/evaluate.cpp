#include "lvr/evaluate.hpp"

#include <chrono>
#include <cstdio>
#include <ostream>

#include "lvr/errors.hpp"

namespace lvr {

namespace {

std::string pm(const MeanStd& m, const char* fmt) {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, m.mean, m.std);
    return buf;
}

// Pads to a width in code points; the ± sign takes two bytes.
std::string pad(std::string s, std::size_t width) {
    std::size_t n = 0;
    for (unsigned char c : s)
        n += (c & 0xC0) != 0x80;
    if (n < width)
        s.append(width - n, ' ');
    return s;
}

AblationRow run_one(const Dataset& data, const RedscanConfig& net, const TrainConfig& config, std::string label,
                    std::ostream* log) {
    const auto start = std::chrono::steady_clock::now();
    if (log != nullptr)
        *log << "# " << label << std::endl;
    const auto trained = train(data, init_params<float>(net, config.seed), config, log);
    Method m{label, &trained.model, {config.z_recurrent, config.use_scl, config.lambda, 8}};
    AblationRow row{label, config.z_recurrent, net.use_ca, net.use_sa,
                    evaluate_method(m, data.manifest, data.test), 0.0};
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return row;
}

} // namespace

SplitTable evaluate_method(const Method& method, const DatasetManifest& manifest, const std::vector<Sample>& split) {
    if (split.empty())
        throw ConfigError("evaluate: empty split");
    std::vector<Image> recs;
    if (method.model != nullptr) {
        std::vector<const Sample*> ptrs;
        for (const auto& s : split)
            ptrs.push_back(&s);
        recs = reconstruct_batch(*method.model, manifest, ptrs, method.options);
    }
    SplitTable table;
    table.method = method.name;
    table.rows.resize(split.size());
#pragma omp parallel for schedule(dynamic)
    for (std::size_t i = 0; i < split.size(); ++i) {
        const Image& x = method.model != nullptr ? recs[i] : split[i].fbp_u;
        table.rows[i] = {i, psnr(x, split[i].gt).db, ssim(x, split[i].gt)};
    }
    std::vector<double> p, s;
    for (const auto& r : table.rows) {
        p.push_back(r.psnr);
        s.push_back(r.ssim);
    }
    table.psnr = mean_std(p);
    table.ssim = mean_std(s);
    return table;
}

std::vector<Method> standard_methods(const RedscanModel<float>* single, const RedscanModel<float>* recurrent,
                                     const InferenceOptions& full) {
    std::vector<Method> out{{"FBP", nullptr, full}};
    if (single != nullptr) {
        InferenceOptions one = full;
        one.z_recurrent = 1;
        one.use_scl = false;
        out.push_back({"RedSCAN", single, one});
    }
    if (recurrent != nullptr)
        out.push_back({"R2edSCAN", recurrent, full});
    return out;
}

std::vector<SplitTable> evaluate_split(const std::vector<Method>& methods, const DatasetManifest& manifest,
                                       const std::vector<Sample>& split) {
    std::vector<SplitTable> out;
    for (const auto& m : methods)
        out.push_back(evaluate_method(m, manifest, split));
    return out;
}

std::string format_rows(const SplitTable& table) {
    std::string out = "sample\tpsnr\tssim\n";
    char buf[96];
    for (const auto& r : table.rows) {
        std::snprintf(buf, sizeof buf, "%zu\t%.4f\t%.5f\n", r.index, r.psnr, r.ssim);
        out += buf;
    }
    out += "MEAN±STD\t" + pm(table.psnr, "%.4f±%.4f") + "\t" + pm(table.ssim, "%.5f±%.5f") + "\n";
    return out;
}

std::string format_summary(const std::vector<SplitTable>& tables) {
    std::size_t width = 6;
    for (const auto& t : tables)
        width = std::max(width, t.method.size());
    std::string out = pad("method", width + 2) + pad("PSNR", 15) + "SSIM\n";
    for (const auto& t : tables)
        out += pad(t.method, width + 2) + pad(pm(t.psnr, "%.2f±%.2f"), 15) + pm(t.ssim, "%.4f±%.4f") + "\n";
    return out;
}

std::vector<AblationRow> z_sweep(const Dataset& data, const RedscanConfig& net, const TrainConfig& config,
                                 const std::vector<std::size_t>& zs, std::ostream* log) {
    std::vector<AblationRow> rows;
    for (std::size_t z : zs) {
        TrainConfig c = config;
        c.z_recurrent = z;
        rows.push_back(run_one(data, net, c, "Z=" + std::to_string(z), log));
    }
    return rows;
}

std::vector<AblationRow> attention_ablation(const Dataset& data, const RedscanConfig& net, const TrainConfig& config,
                                            std::ostream* log) {
    std::vector<AblationRow> rows;
    for (int ca = 0; ca < 2; ++ca)
        for (int sa = 0; sa < 2; ++sa) {
            RedscanConfig n = net;
            n.use_ca = ca != 0;
            n.use_sa = sa != 0;
            rows.push_back(run_one(data, n, config,
                                   std::string("CA=") + (ca ? "on" : "off") + " SA=" + (sa ? "on" : "off"), log));
        }
    return rows;
}

std::string format_z_curve(const std::vector<AblationRow>& rows) {
    std::string out = "Z\tPSNR\tSSIM\n";
    char buf[96];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%zu\t%.4f\t%.5f\n", r.z, r.test.psnr.mean, r.test.ssim.mean);
        out += buf;
    }
    return out;
}

std::string format_attention_table(const std::vector<AblationRow>& rows) {
    std::string out = "CA   SA   " + pad("PSNR", 15) + "SSIM\n";
    for (const auto& r : rows)
        out += pad(r.use_ca ? "on" : "off", 5) + pad(r.use_sa ? "on" : "off", 5) + pad(pm(r.test.psnr, "%.2f±%.2f"), 15) +
               pm(r.test.ssim, "%.4f±%.4f") + "\n";
    return out;
}

} // namespace lvr
