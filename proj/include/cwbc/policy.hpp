#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cwbc/conservatism.hpp"
#include "cwbc/dataset.hpp"
#include "cwbc/nn.hpp"
#include "json.hpp"

namespace cwbc {

// Action predictor conditioned on (state, remaining-horizon average return).
// States are standardized with dataset moments; the conditioning scalar is
// appended raw as the last input feature.
struct RvsPolicy {
    DenseNet net;
    int state_dim = 0;
    int action_dim = 0;
    int horizon = 0;
    Eigen::VectorXd state_mean;
    Eigen::VectorXd state_std;
};

RvsPolicy make_policy(int state_dim, int action_dim, int horizon,
                      const std::vector<int>& hidden_sizes, double dropout, std::uint64_t seed);

// Per-dimension mean and standard deviation over every logged state.
void fit_state_standardization(RvsPolicy& policy, const OfflineDataset& dataset);

Eigen::VectorXd predict_action(const RvsPolicy& policy, const Eigen::VectorXd& state, double omega);

// How a batch of trajectories is reduced to one scalar loss. The default
// averages per-trajectory means so long and short episodes count equally;
// the alternative averages over all timesteps pooled together.
enum class BatchReduction { kPerTrajectoryMean, kFlatTimestepMean };

struct BcOptions {
    BatchReduction reduction = BatchReduction::kPerTrajectoryMean;
    // 0 = use every timestep; otherwise cap rows per trajectory by even
    // subsampling.
    int max_timesteps_per_traj = 0;
    // Required by gradient computations when the net's dropout rate is > 0.
    Rng* dropout_rng = nullptr;
};

// Imitation loss over a batch of trajectory indices, each timestep
// conditioned on its own remaining-horizon average return. grads, when
// non-null, receive d(loss)/d(params).
double bc_loss(const RvsPolicy& policy, const OfflineDataset& dataset,
               const std::vector<std::size_t>& batch, const BcOptions& options = {},
               GradientSet* grads = nullptr);

// The regularizer rows for one batch with the random offsets frozen, so the
// loss becomes a deterministic function of the parameters (used both by
// training steps and by derivative checks).
struct ConservativeBatch {
    Eigen::MatrixXd inputs;
    Eigen::MatrixXd targets;
    Eigen::VectorXd row_weights;
    std::vector<std::size_t> qualifying;  // trajectory indices that beat the threshold
    std::vector<double> offsets;          // one per qualifying trajectory
};

ConservativeBatch build_conservative_batch(const RvsPolicy& policy, const OfflineDataset& dataset,
                                           const std::vector<std::size_t>& batch,
                                           double return_threshold, double r_star, double sigma,
                                           Rng& noise_rng, const BcOptions& options = {});

double conservative_loss_on_batch(const RvsPolicy& policy, const ConservativeBatch& cons,
                                  GradientSet* grads = nullptr);

struct ObjectiveResult {
    double total = 0.0;
    double bc = 0.0;
    double conservative = 0.0;
};

// total = bc + alpha * conservative. alpha = 0 takes exactly the bc-only
// code path and consumes no noise. grads, when non-null, receive the total's
// gradient.
ObjectiveResult combined_objective(const RvsPolicy& policy, const OfflineDataset& dataset,
                                   const std::vector<std::size_t>& batch,
                                   const ConservatismConfig& config, const DatasetStats& stats,
                                   Rng& noise_rng, const BcOptions& options = {},
                                   GradientSet* grads = nullptr);

// Same objective with a prebuilt regularizer batch (frozen offsets).
ObjectiveResult combined_objective_frozen(const RvsPolicy& policy, const OfflineDataset& dataset,
                                          const std::vector<std::size_t>& batch, double alpha,
                                          const ConservativeBatch& cons,
                                          const BcOptions& options = {},
                                          GradientSet* grads = nullptr);

// Checkpoint: net, dims, standardization moments, plus a caller-owned meta
// block (training provenance). Round trips bit for bit.
void save_policy(const RvsPolicy& policy, const nlohmann::json& meta, const std::string& path);
std::pair<RvsPolicy, nlohmann::json> load_policy(const std::string& path);

}  // namespace cwbc
