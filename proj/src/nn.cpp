#include "cwbc/nn.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace cwbc {

std::size_t DenseNet::parameter_count() const {
    std::size_t count = 0;
    for (int l = 0; l < num_layers(); ++l)
        count += static_cast<std::size_t>(weights[l].size()) +
                 static_cast<std::size_t>(biases[l].size());
    return count;
}

DenseNet init_dense_net(const std::vector<int>& dims, std::uint64_t seed, double dropout) {
    if (dims.size() < 2) throw std::invalid_argument("init_dense_net: need at least input and output");
    for (int d : dims)
        if (d < 1) throw std::invalid_argument("init_dense_net: layer sizes must be >= 1");
    if (dropout < 0.0 || dropout >= 1.0)
        throw std::invalid_argument("init_dense_net: dropout must be in [0, 1)");

    DenseNet net;
    net.dims = dims;
    net.dropout = dropout;
    Rng rng = Rng::stream(seed, streams::kInit);
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const int fan_in = dims[l];
        const int fan_out = dims[l + 1];
        const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
        Eigen::MatrixXd w(fan_out, fan_in);
        for (int r = 0; r < fan_out; ++r)
            for (int c = 0; c < fan_in; ++c) w(r, c) = rng.uniform(-bound, bound);
        net.weights.push_back(std::move(w));
        net.biases.push_back(Eigen::VectorXd::Zero(fan_out));
    }
    return net;
}

namespace {

// Inverted dropout mask with entries 0 or 1/(1-rate), drawn row-major so the
// consumed random sequence is well defined.
Eigen::MatrixXd dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, Rng& rng) {
    Eigen::MatrixXd mask(rows, cols);
    const double keep_scale = 1.0 / (1.0 - rate);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c)
            mask(r, c) = (rng.uniform() < rate) ? 0.0 : keep_scale;
    return mask;
}

struct ForwardCache {
    // dropped[l]: layer l's affine input after dropout; pre[l]: its
    // pre-activation; masks[l]: the dropout mask used (empty when inactive).
    std::vector<Eigen::MatrixXd> dropped;
    std::vector<Eigen::MatrixXd> pre;
    std::vector<Eigen::MatrixXd> masks;
};

Eigen::MatrixXd run_forward(const DenseNet& net, const Eigen::MatrixXd& inputs, Mode mode,
                            Rng* dropout_rng, ForwardCache* cache) {
    if (inputs.cols() != net.input_dim())
        throw std::invalid_argument("forward: input width does not match net input dim");
    const bool use_dropout = (mode == Mode::kTrain) && net.dropout > 0.0;
    if (use_dropout && dropout_rng == nullptr)
        throw std::invalid_argument("forward: dropout active but no rng supplied");

    Eigen::MatrixXd act = inputs;
    const int layers = net.num_layers();
    for (int l = 0; l < layers; ++l) {
        if (use_dropout) {
            Eigen::MatrixXd mask = dropout_mask(act.rows(), act.cols(), net.dropout, *dropout_rng);
            act = act.cwiseProduct(mask);
            if (cache) cache->masks.push_back(std::move(mask));
        }
        if (cache) cache->dropped.push_back(act);
        Eigen::MatrixXd pre = act * net.weights[l].transpose();
        pre.rowwise() += net.biases[l].transpose();
        if (l + 1 < layers) {
            if (cache) cache->pre.push_back(pre);
            act = pre.cwiseMax(0.0);
        } else {
            act = std::move(pre);
        }
    }
    return act;
}

}  // namespace

Eigen::MatrixXd forward_batch(const DenseNet& net, const Eigen::MatrixXd& inputs, Mode mode,
                              Rng* dropout_rng) {
    return run_forward(net, inputs, mode, dropout_rng, nullptr);
}

Eigen::VectorXd forward(const DenseNet& net, const Eigen::VectorXd& input, Mode mode,
                        Rng* dropout_rng) {
    Eigen::MatrixXd row = input.transpose();
    return run_forward(net, row, mode, dropout_rng, nullptr).row(0).transpose();
}

void GradientSet::set_zero() {
    for (auto& w : weights) w.setZero();
    for (auto& b : biases) b.setZero();
}

void GradientSet::axpy(double a, const GradientSet& other) {
    if (weights.size() != other.weights.size())
        throw std::invalid_argument("GradientSet::axpy: shape mismatch");
    for (std::size_t l = 0; l < weights.size(); ++l) {
        weights[l] += a * other.weights[l];
        biases[l] += a * other.biases[l];
    }
}

GradientSet zero_gradients(const DenseNet& net) {
    GradientSet g;
    for (int l = 0; l < net.num_layers(); ++l) {
        g.weights.emplace_back(Eigen::MatrixXd::Zero(net.weights[l].rows(), net.weights[l].cols()));
        g.biases.emplace_back(Eigen::VectorXd::Zero(net.biases[l].size()));
    }
    return g;
}

double weighted_squared_error_backward(const DenseNet& net, const Eigen::MatrixXd& inputs,
                                       const Eigen::MatrixXd& targets,
                                       const Eigen::VectorXd& sample_weights, GradientSet& grads,
                                       Mode mode, Rng* dropout_rng) {
    if (inputs.rows() != targets.rows() || inputs.rows() != sample_weights.size())
        throw std::invalid_argument("weighted_squared_error_backward: row count mismatch");
    if (targets.cols() != net.output_dim())
        throw std::invalid_argument("weighted_squared_error_backward: target width mismatch");
    if (grads.weights.size() != static_cast<std::size_t>(net.num_layers()))
        grads = zero_gradients(net);

    ForwardCache cache;
    const Eigen::MatrixXd out = run_forward(net, inputs, mode, dropout_rng, &cache);

    Eigen::MatrixXd err = out - targets;
    double loss = 0.0;
    for (Eigen::Index i = 0; i < err.rows(); ++i)
        loss += sample_weights(i) * err.row(i).squaredNorm();

    // dL/dout = 2 w_i err; then walk the layers backwards.
    Eigen::MatrixXd delta = 2.0 * (err.array().colwise() * sample_weights.array()).matrix();
    const int layers = net.num_layers();
    const bool use_dropout = (mode == Mode::kTrain) && net.dropout > 0.0;
    for (int l = layers - 1; l >= 0; --l) {
        grads.weights[l] = delta.transpose() * cache.dropped[static_cast<std::size_t>(l)];
        grads.biases[l] = delta.colwise().sum().transpose();
        if (l == 0) break;
        Eigen::MatrixXd back = delta * net.weights[l];
        if (use_dropout) back = back.cwiseProduct(cache.masks[static_cast<std::size_t>(l)]);
        // ReLU gate: pass gradient where the pre-activation was positive.
        delta = (cache.pre[static_cast<std::size_t>(l - 1)].array() > 0.0)
                    .select(back, Eigen::MatrixXd::Zero(back.rows(), back.cols()));
    }
    return loss;
}

double backward(const DenseNet& net, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                GradientSet& grads) {
    const Eigen::Index n = inputs.rows();
    if (n == 0) throw std::invalid_argument("backward: empty batch");
    Eigen::VectorXd w = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
    return weighted_squared_error_backward(net, inputs, targets, w, grads, Mode::kTrain, nullptr);
}

AdamState make_adam_state(const DenseNet& net, const AdamConfig& config) {
    AdamState state;
    state.config = config;
    state.first_moment = zero_gradients(net);
    state.second_moment = zero_gradients(net);
    return state;
}

namespace {

void adam_update(Eigen::Ref<Eigen::MatrixXd> param, const Eigen::MatrixXd& grad,
                 Eigen::MatrixXd& m, Eigen::MatrixXd& v, const AdamConfig& c, double bc1,
                 double bc2) {
    m = c.beta1 * m + (1.0 - c.beta1) * grad;
    v = c.beta2 * v + (1.0 - c.beta2) * grad.cwiseProduct(grad);
    const Eigen::MatrixXd m_hat = m / bc1;
    const Eigen::MatrixXd v_hat = v / bc2;
    param.array() -= c.learning_rate *
                     (m_hat.array() / (v_hat.array().sqrt() + c.epsilon) +
                      c.weight_decay * param.array());
}

}  // namespace

void adam_step(DenseNet& net, const GradientSet& grads, AdamState& state) {
    if (grads.weights.size() != static_cast<std::size_t>(net.num_layers()))
        throw std::invalid_argument("adam_step: gradient shape mismatch");
    ++state.step;
    const auto& c = state.config;
    const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
    for (int l = 0; l < net.num_layers(); ++l) {
        adam_update(net.weights[l], grads.weights[l], state.first_moment.weights[l],
                    state.second_moment.weights[l], c, bc1, bc2);
        Eigen::MatrixXd gb = grads.biases[l];
        Eigen::MatrixXd mb = state.first_moment.biases[l];
        Eigen::MatrixXd vb = state.second_moment.biases[l];
        Eigen::MatrixXd pb = net.biases[l];
        adam_update(pb, gb, mb, vb, c, bc1, bc2);
        net.biases[l] = pb.col(0);
        state.first_moment.biases[l] = mb.col(0);
        state.second_moment.biases[l] = vb.col(0);
    }
}

std::vector<double> flatten_parameters(const DenseNet& net) {
    std::vector<double> flat;
    flat.reserve(net.parameter_count());
    for (int l = 0; l < net.num_layers(); ++l) {
        const auto& w = net.weights[l];
        for (Eigen::Index r = 0; r < w.rows(); ++r)
            for (Eigen::Index c = 0; c < w.cols(); ++c) flat.push_back(w(r, c));
        for (Eigen::Index i = 0; i < net.biases[l].size(); ++i) flat.push_back(net.biases[l](i));
    }
    return flat;
}

void set_parameters(DenseNet& net, const std::vector<double>& flat) {
    if (flat.size() != net.parameter_count())
        throw std::invalid_argument("set_parameters: size mismatch");
    std::size_t k = 0;
    for (int l = 0; l < net.num_layers(); ++l) {
        auto& w = net.weights[l];
        for (Eigen::Index r = 0; r < w.rows(); ++r)
            for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = flat[k++];
        for (Eigen::Index i = 0; i < net.biases[l].size(); ++i) net.biases[l](i) = flat[k++];
    }
}

std::vector<double> flatten_gradients(const GradientSet& grads) {
    std::vector<double> flat;
    for (std::size_t l = 0; l < grads.weights.size(); ++l) {
        const auto& w = grads.weights[l];
        for (Eigen::Index r = 0; r < w.rows(); ++r)
            for (Eigen::Index c = 0; c < w.cols(); ++c) flat.push_back(w(r, c));
        for (Eigen::Index i = 0; i < grads.biases[l].size(); ++i) flat.push_back(grads.biases[l](i));
    }
    return flat;
}

std::string parameter_fingerprint(const DenseNet& net) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](const void* data, std::size_t len) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < len; ++i) {
            h ^= p[i];
            h *= 0x100000001b3ULL;
        }
    };
    for (double v : flatten_parameters(net)) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        mix(&bits, sizeof bits);
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

nlohmann::json net_to_json(const DenseNet& net) {
    nlohmann::json j;
    j["dims"] = net.dims;
    j["dropout"] = net.dropout;
    j["params"] = flatten_parameters(net);
    j["fingerprint"] = parameter_fingerprint(net);
    return j;
}

DenseNet net_from_json(const nlohmann::json& j) {
    for (const char* key : {"dims", "dropout", "params"})
        if (!j.contains(key)) throw std::runtime_error(std::string("net_from_json: missing ") + key);
    DenseNet net;
    net.dims = j["dims"].get<std::vector<int>>();
    if (net.dims.size() < 2) throw std::runtime_error("net_from_json: bad dims");
    net.dropout = j["dropout"].get<double>();
    for (std::size_t l = 0; l + 1 < net.dims.size(); ++l) {
        net.weights.emplace_back(Eigen::MatrixXd::Zero(net.dims[l + 1], net.dims[l]));
        net.biases.emplace_back(Eigen::VectorXd::Zero(net.dims[l + 1]));
    }
    const auto flat = j["params"].get<std::vector<double>>();
    set_parameters(net, flat);
    if (j.contains("fingerprint") && j["fingerprint"].get<std::string>() != parameter_fingerprint(net))
        throw std::runtime_error("net_from_json: fingerprint mismatch, checkpoint corrupt");
    return net;
}

}  // namespace cwbc
