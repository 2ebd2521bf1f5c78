#include "cwbc/policy.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace cwbc {

RvsPolicy make_policy(int state_dim, int action_dim, int horizon,
                      const std::vector<int>& hidden_sizes, double dropout, std::uint64_t seed) {
    if (state_dim < 1 || action_dim < 1) throw std::invalid_argument("make_policy: bad dimensions");
    if (horizon < 1) throw std::invalid_argument("make_policy: horizon must be >= 1");
    std::vector<int> dims;
    dims.push_back(state_dim + 1);  // +1 for the return conditioning input
    for (int h : hidden_sizes) dims.push_back(h);
    dims.push_back(action_dim);

    RvsPolicy policy;
    policy.net = init_dense_net(dims, seed, dropout);
    policy.state_dim = state_dim;
    policy.action_dim = action_dim;
    policy.horizon = horizon;
    policy.state_mean = Eigen::VectorXd::Zero(state_dim);
    policy.state_std = Eigen::VectorXd::Ones(state_dim);
    return policy;
}

void fit_state_standardization(RvsPolicy& policy, const OfflineDataset& dataset) {
    if (dataset.state_dim != policy.state_dim)
        throw std::invalid_argument("fit_state_standardization: state dim mismatch");
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(policy.state_dim);
    std::size_t count = 0;
    for (const auto& traj : dataset.trajectories)
        for (const auto& tr : traj.transitions) {
            for (int i = 0; i < policy.state_dim; ++i) mean(i) += tr.state[static_cast<std::size_t>(i)];
            ++count;
        }
    if (count == 0) throw std::invalid_argument("fit_state_standardization: no states");
    mean /= static_cast<double>(count);

    Eigen::VectorXd var = Eigen::VectorXd::Zero(policy.state_dim);
    for (const auto& traj : dataset.trajectories)
        for (const auto& tr : traj.transitions)
            for (int i = 0; i < policy.state_dim; ++i) {
                const double d = tr.state[static_cast<std::size_t>(i)] - mean(i);
                var(i) += d * d;
            }
    var /= static_cast<double>(count);

    policy.state_mean = mean;
    // Floor keeps constant dimensions usable instead of dividing by zero.
    policy.state_std = var.cwiseSqrt().cwiseMax(1e-8);
}

Eigen::VectorXd predict_action(const RvsPolicy& policy, const Eigen::VectorXd& state, double omega) {
    if (state.size() != policy.state_dim)
        throw std::invalid_argument("predict_action: state dim mismatch");
    Eigen::VectorXd input(policy.state_dim + 1);
    input.head(policy.state_dim) = (state - policy.state_mean).cwiseQuotient(policy.state_std);
    input(policy.state_dim) = omega;
    return forward(policy.net, input, Mode::kInference);
}

namespace {

std::vector<std::size_t> select_rows(std::size_t len, int cap) {
    std::vector<std::size_t> rows;
    if (cap <= 0 || len <= static_cast<std::size_t>(cap)) {
        rows.resize(len);
        for (std::size_t t = 0; t < len; ++t) rows[t] = t;
    } else {
        // Even subsample: floor(j * len / cap) is strictly increasing when
        // cap <= len.
        const auto m = static_cast<std::size_t>(cap);
        rows.reserve(m);
        for (std::size_t j = 0; j < m; ++j) rows.push_back(j * len / m);
    }
    return rows;
}

void check_batch(const RvsPolicy& policy, const OfflineDataset& dataset,
                 const std::vector<std::size_t>& batch, const char* where) {
    if (batch.empty()) throw std::invalid_argument(std::string(where) + ": empty batch");
    if (dataset.horizon != policy.horizon)
        throw std::invalid_argument(std::string(where) + ": dataset/policy horizon mismatch");
    if (dataset.state_dim != policy.state_dim || dataset.action_dim != policy.action_dim)
        throw std::invalid_argument(std::string(where) + ": dataset/policy dimension mismatch");
    for (std::size_t idx : batch)
        if (idx >= dataset.size())
            throw std::out_of_range(std::string(where) + ": trajectory index out of range");
}

// Fills one trajectory's rows. omega_shift is added to every rtg entry
// before averaging (0 for plain imitation rows).
void fill_rows(const RvsPolicy& policy, const Trajectory& traj,
               const std::vector<std::size_t>& rows, double omega_shift, double row_weight,
               Eigen::MatrixXd& inputs, Eigen::MatrixXd& targets, Eigen::VectorXd& weights,
               Eigen::Index& cursor) {
    const int ds = policy.state_dim;
    for (std::size_t t : rows) {
        const auto& tr = traj.transitions[t];
        for (int i = 0; i < ds; ++i)
            inputs(cursor, i) =
                (tr.state[static_cast<std::size_t>(i)] - policy.state_mean(i)) / policy.state_std(i);
        inputs(cursor, ds) =
            average_rtg(traj.rtg[t] + omega_shift, static_cast<int>(t) + 1, policy.horizon);
        for (int i = 0; i < policy.action_dim; ++i)
            targets(cursor, i) = tr.action[static_cast<std::size_t>(i)];
        weights(cursor) = row_weight;
        ++cursor;
    }
}

}  // namespace

double bc_loss(const RvsPolicy& policy, const OfflineDataset& dataset,
               const std::vector<std::size_t>& batch, const BcOptions& options,
               GradientSet* grads) {
    check_batch(policy, dataset, batch, "bc_loss");

    std::size_t total_rows = 0;
    std::vector<std::vector<std::size_t>> selected(batch.size());
    for (std::size_t k = 0; k < batch.size(); ++k) {
        selected[k] = select_rows(dataset.trajectories[batch[k]].length(),
                                  options.max_timesteps_per_traj);
        total_rows += selected[k].size();
    }

    Eigen::MatrixXd inputs(total_rows, policy.state_dim + 1);
    Eigen::MatrixXd targets(total_rows, policy.action_dim);
    Eigen::VectorXd weights(total_rows);
    Eigen::Index cursor = 0;
    for (std::size_t k = 0; k < batch.size(); ++k) {
        const double row_weight =
            options.reduction == BatchReduction::kPerTrajectoryMean
                ? 1.0 / (static_cast<double>(batch.size()) * static_cast<double>(selected[k].size()))
                : 1.0 / static_cast<double>(total_rows);
        fill_rows(policy, dataset.trajectories[batch[k]], selected[k], 0.0, row_weight, inputs,
                  targets, weights, cursor);
    }

    if (grads)
        return weighted_squared_error_backward(policy.net, inputs, targets, weights, *grads,
                                               Mode::kTrain, options.dropout_rng);
    const Mode mode =
        (policy.net.dropout > 0.0 && options.dropout_rng) ? Mode::kTrain : Mode::kInference;
    const Eigen::MatrixXd out = forward_batch(policy.net, inputs, mode, options.dropout_rng);
    double loss = 0.0;
    for (Eigen::Index i = 0; i < out.rows(); ++i)
        loss += weights(i) * (out.row(i) - targets.row(i)).squaredNorm();
    return loss;
}

ConservativeBatch build_conservative_batch(const RvsPolicy& policy, const OfflineDataset& dataset,
                                           const std::vector<std::size_t>& batch,
                                           double return_threshold, double r_star, double sigma,
                                           Rng& noise_rng, const BcOptions& options) {
    check_batch(policy, dataset, batch, "build_conservative_batch");
    if (!(sigma > 0.0))
        throw std::invalid_argument("build_conservative_batch: sigma must be > 0");

    ConservativeBatch cons;
    std::vector<std::vector<std::size_t>> selected;
    std::size_t total_rows = 0;
    for (std::size_t idx : batch) {
        const auto& traj = dataset.trajectories[idx];
        if (!(traj.total_return() > return_threshold)) continue;
        cons.qualifying.push_back(idx);
        selected.push_back(select_rows(traj.length(), options.max_timesteps_per_traj));
        total_rows += selected.back().size();
    }

    cons.inputs.resize(total_rows, policy.state_dim + 1);
    cons.targets.resize(total_rows, policy.action_dim);
    cons.row_weights.resize(total_rows);
    if (cons.qualifying.empty()) return cons;

    Eigen::Index cursor = 0;
    for (std::size_t k = 0; k < cons.qualifying.size(); ++k) {
        const auto& traj = dataset.trajectories[cons.qualifying[k]];
        const NoiseBounds bounds = noise_bounds(traj.total_return(), r_star, sigma);
        const double eps = sample_noise(bounds, noise_rng);
        cons.offsets.push_back(eps);
        const double row_weight =
            options.reduction == BatchReduction::kPerTrajectoryMean
                ? 1.0 / (static_cast<double>(cons.qualifying.size()) *
                         static_cast<double>(selected[k].size()))
                : 1.0 / static_cast<double>(total_rows);
        fill_rows(policy, traj, selected[k], eps, row_weight, cons.inputs, cons.targets,
                  cons.row_weights, cursor);
    }
    return cons;
}

double conservative_loss_on_batch(const RvsPolicy& policy, const ConservativeBatch& cons,
                                  GradientSet* grads) {
    if (cons.qualifying.empty()) {
        if (grads) *grads = zero_gradients(policy.net);
        return 0.0;
    }
    if (grads)
        return weighted_squared_error_backward(policy.net, cons.inputs, cons.targets,
                                               cons.row_weights, *grads, Mode::kTrain, nullptr);
    const Eigen::MatrixXd out = forward_batch(policy.net, cons.inputs, Mode::kInference);
    double loss = 0.0;
    for (Eigen::Index i = 0; i < out.rows(); ++i)
        loss += cons.row_weights(i) * (out.row(i) - cons.targets.row(i)).squaredNorm();
    return loss;
}

ObjectiveResult combined_objective_frozen(const RvsPolicy& policy, const OfflineDataset& dataset,
                                          const std::vector<std::size_t>& batch, double alpha,
                                          const ConservativeBatch& cons, const BcOptions& options,
                                          GradientSet* grads) {
    ObjectiveResult result;
    result.bc = bc_loss(policy, dataset, batch, options, grads);
    if (alpha == 0.0) {
        result.total = result.bc;
        return result;
    }
    GradientSet cons_grads;
    result.conservative =
        conservative_loss_on_batch(policy, cons, grads ? &cons_grads : nullptr);
    if (grads) grads->axpy(alpha, cons_grads);
    result.total = result.bc + alpha * result.conservative;
    return result;
}

ObjectiveResult combined_objective(const RvsPolicy& policy, const OfflineDataset& dataset,
                                   const std::vector<std::size_t>& batch,
                                   const ConservatismConfig& config, const DatasetStats& stats,
                                   Rng& noise_rng, const BcOptions& options, GradientSet* grads) {
    if (config.alpha < 0.0) throw std::invalid_argument("combined_objective: alpha must be >= 0");
    if (config.alpha == 0.0) {
        // Exactly the plain imitation path; no thresholds resolved, no noise
        // drawn.
        ObjectiveResult result;
        result.bc = bc_loss(policy, dataset, batch, options, grads);
        result.total = result.bc;
        return result;
    }
    const double threshold = stats.percentile(config.percentile_q);
    const ConservativeBatch cons =
        build_conservative_batch(policy, dataset, batch, threshold, stats.max_return,
                                 config.noise_std, noise_rng, options);
    return combined_objective_frozen(policy, dataset, batch, config.alpha, cons, options, grads);
}

void save_policy(const RvsPolicy& policy, const nlohmann::json& meta, const std::string& path) {
    nlohmann::json j;
    j["format"] = "cwbc-policy";
    j["version"] = 1;
    j["state_dim"] = policy.state_dim;
    j["action_dim"] = policy.action_dim;
    j["horizon"] = policy.horizon;
    j["state_mean"] = std::vector<double>(policy.state_mean.data(),
                                          policy.state_mean.data() + policy.state_mean.size());
    j["state_std"] = std::vector<double>(policy.state_std.data(),
                                         policy.state_std.data() + policy.state_std.size());
    j["net"] = net_to_json(policy.net);
    j["meta"] = meta;

    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_policy: cannot open " + path);
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("save_policy: write failed for " + path);
}

std::pair<RvsPolicy, nlohmann::json> load_policy(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_policy: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error(std::string("load_policy: bad checkpoint: ") + e.what());
    }
    if (!j.contains("format") || j["format"] != "cwbc-policy" || j.value("version", 0) != 1)
        throw std::runtime_error("load_policy: not a policy checkpoint: " + path);

    RvsPolicy policy;
    policy.net = net_from_json(j.at("net"));
    policy.state_dim = j.at("state_dim").get<int>();
    policy.action_dim = j.at("action_dim").get<int>();
    policy.horizon = j.at("horizon").get<int>();
    const auto mean = j.at("state_mean").get<std::vector<double>>();
    const auto sd = j.at("state_std").get<std::vector<double>>();
    if (mean.size() != static_cast<std::size_t>(policy.state_dim) || mean.size() != sd.size())
        throw std::runtime_error("load_policy: standardization size mismatch");
    policy.state_mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), policy.state_dim);
    policy.state_std = Eigen::Map<const Eigen::VectorXd>(sd.data(), policy.state_dim);
    if (policy.net.input_dim() != policy.state_dim + 1 ||
        policy.net.output_dim() != policy.action_dim)
        throw std::runtime_error("load_policy: net shape inconsistent with dimensions");
    return {std::move(policy), j.value("meta", nlohmann::json::object())};
}

}  // namespace cwbc
