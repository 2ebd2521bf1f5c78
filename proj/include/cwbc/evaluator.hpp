#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cwbc/env.hpp"
#include "cwbc/policy.hpp"
#include "cwbc/trainer.hpp"

namespace cwbc {

struct EvalConfig {
    int episodes = 10;
    int reference_episodes = 100;
    // Sweep grid: multiples of the best dataset return, then multiples of
    // the expert reference return.
    std::vector<double> max_multipliers = {0.2, 0.4, 0.6, 0.8, 1.0, 1.25, 1.5, 2.0};
    std::vector<double> expert_multipliers = {1.0, 2.0};
    std::uint64_t seed = 0;
};

struct RolloutStep {
    double omega = 0.0;
    double reward = 0.0;
};

struct RolloutTrace {
    double target = 0.0;
    std::vector<RolloutStep> steps;
};

// One conditioned episode: the remaining target is averaged over the steps
// left, fed to the policy, and decremented by each observed reward. Returns
// the achieved return.
double rollout_conditioned(const RvsPolicy& policy, const EnvSpec& spec, double target, Rng& rng,
                           RolloutTrace* trace = nullptr);

struct EvalPointResult {
    double mean = 0.0;
    double stddev = 0.0;  // population, over episodes
    std::vector<double> returns;
};

EvalPointResult evaluate_at(const RvsPolicy& policy, const EnvSpec& spec, double target,
                            int episodes, std::uint64_t seed);

// 100 * (raw - random_ref) / (expert_ref - random_ref).
double normalized_score(double raw, double random_ref, double expert_ref);

struct CurvePoint {
    std::string basis;        // "max" or "expert"
    double multiplier = 0.0;  // of the basis value
    double target = 0.0;
    double mean = 0.0;
    double stddev = 0.0;
    double normalized = 0.0;
};

struct ReliabilityCurve {
    std::vector<CurvePoint> points;
    double r_star = 0.0;
    double random_ref = 0.0;
    double expert_ref = 0.0;
};

ReliabilityCurve sweep_targets(const RvsPolicy& policy, const EnvSpec& spec, double r_star,
                               const EvalConfig& config);

// Mean return when asking for twice the best dataset return, divided by the
// best mean anywhere on the sweep. Near 1 = conditioning stays reliable out
// of range; near 0 = it collapses.
double ood_drop_ratio(const ReliabilityCurve& curve);

struct CompareCell {
    Variant variant = Variant::kBase;
    std::uint64_t seed = 0;
    bool failed = false;
    std::string error;
    double expert_mean = 0.0;  // return at the expert-reference target
    double expert_normalized = 0.0;
    double ood_ratio = 0.0;
    ReliabilityCurve curve;
};

struct ComparisonReport {
    std::vector<CompareCell> cells;
    std::vector<Variant> variants;
    std::vector<std::uint64_t> seeds;
    double random_ref = 0.0;
    double expert_ref = 0.0;
};

// Trains and sweeps every variant at every seed; a failing cell is recorded
// and the rest of the grid still runs.
ComparisonReport compare_variants(const OfflineDataset& dataset, const EnvSpec& spec,
                                  const std::vector<Variant>& variants,
                                  const std::vector<std::uint64_t>& seeds,
                                  const TrainConfig& base_config, const EvalConfig& eval_config);

}  // namespace cwbc
