#pragma once

#include <string>
#include <vector>

#include "lvr/dataset.hpp"
#include "lvr/metrics.hpp"
#include "lvr/trainer.hpp"

namespace lvr {

/// A reconstruction method to score. Without a model the method is the
/// FBP baseline, i.e. the stored initial reconstruction I_u.
struct Method {
    std::string name;
    const RedscanModel<float>* model = nullptr;
    InferenceOptions options;
};

struct SampleScore {
    std::size_t index = 0;
    double psnr = 0.0;
    double ssim = 0.0;
};

struct SplitTable {
    std::string method;
    std::vector<SampleScore> rows;
    MeanStd psnr;
    MeanStd ssim;
};

SplitTable evaluate_method(const Method& method, const DatasetManifest& manifest, const std::vector<Sample>& split);

/// FBP, single-pass RedSCAN (Z=1, no consistency layer) and the full
/// recurrent model. Null models drop the corresponding row.
std::vector<Method> standard_methods(const RedscanModel<float>* single, const RedscanModel<float>* recurrent,
                                     const InferenceOptions& full);

std::vector<SplitTable> evaluate_split(const std::vector<Method>& methods, const DatasetManifest& manifest,
                                       const std::vector<Sample>& split);

/// "sample\tpsnr\tssim" header, one row per sample, then a MEAN±STD row.
std::string format_rows(const SplitTable& table);
/// One aligned line per method with mean±std PSNR and SSIM.
std::string format_summary(const std::vector<SplitTable>& tables);

struct AblationRow {
    std::string label;
    std::size_t z = 1;
    bool use_ca = true;
    bool use_sa = true;
    SplitTable test;
    double seconds = 0.0;
};

/// Trains one model per Z with otherwise identical settings and scores it on
/// the test split.
std::vector<AblationRow> z_sweep(const Dataset& data, const RedscanConfig& net, const TrainConfig& config,
                                 const std::vector<std::size_t>& zs, std::ostream* log = nullptr);

/// The four CA/SA on/off combinations at the configured Z.
std::vector<AblationRow> attention_ablation(const Dataset& data, const RedscanConfig& net, const TrainConfig& config,
                                            std::ostream* log = nullptr);

/// "Z  PSNR  SSIM" curve, one line per depth.
std::string format_z_curve(const std::vector<AblationRow>& rows);
/// "CA  SA  PSNR  SSIM" table with on/off marks.
std::string format_attention_table(const std::vector<AblationRow>& rows);

} // namespace lvr
