#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cwbc/rng.hpp"
#include "json.hpp"

namespace cwbc {

enum class Mode { kTrain, kInference };

// Fully connected net: affine layers with ReLU between them, identity on the
// output. dims runs input..output. Weights are (fan_out x fan_in).
struct DenseNet {
    std::vector<int> dims;
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
    double dropout = 0.0;

    int num_layers() const { return static_cast<int>(weights.size()); }
    int input_dim() const { return dims.front(); }
    int output_dim() const { return dims.back(); }
    std::size_t parameter_count() const;
};

// Uniform(-sqrt(6/fan_in), +sqrt(6/fan_in)) weights, zero biases. Same seed,
// same net, bit for bit.
DenseNet init_dense_net(const std::vector<int>& dims, std::uint64_t seed, double dropout = 0.0);

// Rows are samples. Dropout (train mode, rate > 0) zeroes entries of every
// affine layer's input and rescales survivors by 1/(1-rate); it draws from
// dropout_rng, which must then be non-null. rate = 0 consumes no randomness.
Eigen::MatrixXd forward_batch(const DenseNet& net, const Eigen::MatrixXd& inputs, Mode mode,
                              Rng* dropout_rng = nullptr);
Eigen::VectorXd forward(const DenseNet& net, const Eigen::VectorXd& input, Mode mode,
                        Rng* dropout_rng = nullptr);

struct GradientSet {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;

    void set_zero();
    void axpy(double a, const GradientSet& other);  // this += a * other
};

GradientSet zero_gradients(const DenseNet& net);

// loss = sum_i sample_weights[i] * ||net(x_i) - y_i||^2. Gradients overwrite
// grads. Row counts of inputs, targets and sample_weights must agree.
double weighted_squared_error_backward(const DenseNet& net, const Eigen::MatrixXd& inputs,
                                       const Eigen::MatrixXd& targets,
                                       const Eigen::VectorXd& sample_weights, GradientSet& grads,
                                       Mode mode = Mode::kTrain, Rng* dropout_rng = nullptr);

// Mean over samples of the squared-error sum across output dimensions.
double backward(const DenseNet& net, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                GradientSet& grads);

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double weight_decay = 1e-4;  // decoupled: applied to parameters, not gradients
};

struct AdamState {
    AdamConfig config;
    GradientSet first_moment;
    GradientSet second_moment;
    long step = 0;
};

AdamState make_adam_state(const DenseNet& net, const AdamConfig& config);
void adam_step(DenseNet& net, const GradientSet& grads, AdamState& state);

// Parameter order: per layer, weight rows then bias. Shared by the finite
// difference harness and checkpoints.
std::vector<double> flatten_parameters(const DenseNet& net);
void set_parameters(DenseNet& net, const std::vector<double>& flat);
std::vector<double> flatten_gradients(const GradientSet& grads);

// FNV-1a over the raw parameter bytes in flatten order.
std::string parameter_fingerprint(const DenseNet& net);

nlohmann::json net_to_json(const DenseNet& net);
DenseNet net_from_json(const nlohmann::json& j);

}  // namespace cwbc
