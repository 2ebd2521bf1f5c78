#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cwbc/dataset.hpp"
#include "cwbc/evaluator.hpp"
#include "cwbc/trainer.hpp"
#include "cwbc/weighting.hpp"
#include "json.hpp"

namespace cwbc {

inline constexpr const char* kVersion = "cwbc 0.1.0";

// FNV-1a 64 over the file bytes, hex.
std::string file_digest(const std::string& path);

// Every CLI command drops one of these next to its outputs: the resolved
// configuration, input digests, and produced files. Deliberately free of
// timestamps so replays are byte-identical.
struct RunManifest {
    std::string command;
    std::string version = kVersion;
    std::uint64_t seed = 0;
    nlohmann::json config;
    std::vector<std::pair<std::string, std::string>> inputs;  // path, digest
    std::vector<std::string> outputs;
};

void write_manifest(const RunManifest& manifest, const std::string& path);

// Columns: bin_index, mean_return, frequency, probability — the return
// histogram before and after re-weighting.
void write_histogram_csv(const OfflineDataset& dataset, const WeightingConfig& weighting,
                         const std::string& path);

// Columns: target, mean, std, normalized.
void write_curve_csv(const ReliabilityCurve& curve, const std::string& path);

void write_comparison_csvs(const ComparisonReport& report, const std::string& out_dir);

struct AblationRequest {
    std::string parameter;  // kappa | lambda | q | alpha | sigma
    std::vector<double> values;
    TrainConfig base_config;
    EvalConfig eval_config;
    std::vector<std::uint64_t> seeds;
};

struct AblationCell {
    double value = 0.0;
    std::uint64_t seed = 0;
    bool failed = false;
    std::string error;
    double expert_mean = 0.0;
    double ood_ratio = 0.0;
    ReliabilityCurve curve;
};

// One training per (value, seed); a failing cell is recorded and the grid
// keeps going. Writes ablation_summary.csv, a pooled curve per value, and —
// for the histogram-shaping knobs kappa/lambda — the per-value histogram.
std::vector<AblationCell> run_ablation(const OfflineDataset& dataset, const EnvSpec& spec,
                                       const AblationRequest& request, const std::string& out_dir);

}  // namespace cwbc
