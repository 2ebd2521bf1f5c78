#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cwbc/conservatism.hpp"
#include "cwbc/dataset.hpp"
#include "cwbc/nn.hpp"
#include "cwbc/policy.hpp"
#include "cwbc/weighting.hpp"

namespace cwbc {

// base  — plain return-conditioned imitation, uniform trajectory sampling
// w     — adds binned trajectory re-weighting
// c     — adds the high-return conditioning regularizer
// wc    — both
// f     — trains only on the top fraction of trajectories by return
// fc    — filtering plus the regularizer
enum class Variant { kBase, kW, kC, kWC, kF, kFC };

Variant variant_from_string(const std::string& name);
std::string variant_name(Variant v);
bool variant_uses_weighting(Variant v);
bool variant_uses_conservatism(Variant v);
bool variant_uses_filtering(Variant v);

struct TrainConfig {
    Variant variant = Variant::kBase;
    long iterations = 20000;
    int batch_size = 64;
    std::vector<int> hidden_sizes = {64, 64};
    double dropout = 0.0;
    AdamConfig optimizer;
    WeightingConfig weighting;
    // noise_std <= 0 asks for the dataset default: best return minus median
    // return.
    ConservatismConfig conservatism;
    double filter_fraction = 0.1;
    BatchReduction reduction = BatchReduction::kPerTrajectoryMean;
    int max_timesteps_per_traj = 0;
    std::uint64_t seed = 0;
    long log_interval = 100;
};

struct TrainRecord {
    long iter = 0;
    double bc_loss = 0.0;
    double cons_loss = 0.0;
    double total_loss = 0.0;
    double ms = 0.0;  // wall clock since training start
};

struct TrainLog {
    std::vector<TrainRecord> records;
};

struct TrainResult {
    RvsPolicy policy;
    TrainLog log;
    // Values actually used after resolution; zero when the knob is inactive.
    double resolved_kappa = 0.0;
    double resolved_sigma = 0.0;
    double r_star = 0.0;
    std::size_t effective_trajectories = 0;
};

TrainResult train(const OfflineDataset& dataset, const TrainConfig& config);

// Columns: iter, bc_loss, cons_loss, total_loss, ms.
void write_train_log_csv(const TrainLog& log, const std::string& path);

}  // namespace cwbc
