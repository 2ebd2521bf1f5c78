#include "cwbc/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cwbc/csv.hpp"
#include "cwbc/nn.hpp"
#include "cwbc/policy.hpp"

namespace cwbc::oracle {

std::vector<double> reference_bin_probabilities(const std::vector<double>& frequency,
                                                const std::vector<double>& mean_return,
                                                double lambda, double kappa, double r_star) {
    if (frequency.size() != mean_return.size() || frequency.empty())
        throw std::invalid_argument("reference_bin_probabilities: bad inputs");
    if (kappa <= 0.0) throw std::invalid_argument("reference_bin_probabilities: kappa must be > 0");

    std::vector<long double> weights(frequency.size());
    for (std::size_t i = 0; i < frequency.size(); ++i) {
        const long double f = frequency[i];
        const long double d = fabsl(static_cast<long double>(mean_return[i]) -
                                    static_cast<long double>(r_star));
        weights[i] = f / (f + static_cast<long double>(lambda)) *
                     expl(-d / static_cast<long double>(kappa));
    }
    // Compensated summation.
    long double sum = 0.0L, comp = 0.0L;
    for (long double w : weights) {
        const long double y = w - comp;
        const long double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    if (!(sum > 0.0L)) throw std::runtime_error("reference_bin_probabilities: zero weight sum");
    std::vector<double> probs(frequency.size());
    for (std::size_t i = 0; i < frequency.size(); ++i)
        probs[i] = static_cast<double>(weights[i] / sum);
    return probs;
}

std::vector<double> central_difference_gradient(
    const std::function<double(const std::vector<double>&)>& fn, const std::vector<double>& at,
    double step) {
    if (!(step > 0.0)) throw std::invalid_argument("central_difference_gradient: step must be > 0");
    std::vector<double> grad(at.size());
    std::vector<double> point = at;
    for (std::size_t i = 0; i < at.size(); ++i) {
        point[i] = at[i] + step;
        const double up = fn(point);
        point[i] = at[i] - step;
        const double down = fn(point);
        point[i] = at[i];
        grad[i] = (up - down) / (2.0 * step);
    }
    return grad;
}

double sampler_total_variation(const BinLayout& layout, long draws, Rng& rng) {
    if (draws < 1) throw std::invalid_argument("sampler_total_variation: draws must be >= 1");
    if (!layout.has_probabilities())
        throw std::invalid_argument("sampler_total_variation: layout lacks probabilities");

    std::vector<std::size_t> index_to_bin(layout.total);
    for (std::size_t b = 0; b < layout.num_bins(); ++b)
        for (std::size_t idx : layout.bins[b]) index_to_bin[idx] = b;

    std::vector<long> counts(layout.num_bins(), 0);
    for (long i = 0; i < draws; ++i) ++counts[index_to_bin[sample_trajectory(layout, rng)]];

    double tv = 0.0;
    for (std::size_t b = 0; b < layout.num_bins(); ++b)
        tv += std::abs(static_cast<double>(counts[b]) / static_cast<double>(draws) -
                       layout.probability[b]);
    return 0.5 * tv;
}

SampleMoments noise_sample_moments(const NoiseBounds& bounds, long draws, Rng& rng) {
    if (draws < 1) throw std::invalid_argument("noise_sample_moments: draws must be >= 1");
    SampleMoments m;
    double mean = 0.0, m2 = 0.0;
    for (long i = 0; i < draws; ++i) {
        const double x = sample_noise(bounds, rng);
        if (i == 0) {
            m.min = m.max = x;
        } else {
            m.min = std::min(m.min, x);
            m.max = std::max(m.max, x);
        }
        // Welford update.
        const double delta = x - mean;
        mean += delta / static_cast<double>(i + 1);
        m2 += delta * (x - mean);
    }
    m.count = draws;
    m.mean = mean;
    m.stddev = std::sqrt(m2 / static_cast<double>(draws));
    return m;
}

namespace {

// Tiny handmade dataset for derivative checks of the full objective.
OfflineDataset fuzz_dataset(Rng& rng, std::size_t n, int horizon, int state_dim, int action_dim) {
    OfflineDataset ds;
    ds.horizon = horizon;
    ds.state_dim = state_dim;
    ds.action_dim = action_dim;
    for (std::size_t k = 0; k < n; ++k) {
        Trajectory traj;
        const auto len = static_cast<std::size_t>(horizon);
        traj.transitions.resize(len);
        for (auto& tr : traj.transitions) {
            tr.state.resize(static_cast<std::size_t>(state_dim));
            for (double& s : tr.state) s = rng.uniform(-1.0, 1.0);
            tr.action.resize(static_cast<std::size_t>(action_dim));
            for (double& a : tr.action) a = rng.uniform(-1.0, 1.0);
            tr.reward = rng.uniform(0.0, 1.0);
        }
        ds.trajectories.push_back(std::move(traj));
    }
    finalize_dataset(ds);
    return ds;
}

double relative_gap(const std::vector<double>& a, const std::vector<double>& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - b[i]) * (a[i] - b[i]);
        den += b[i] * b[i];
    }
    return std::sqrt(num) / std::max(std::sqrt(den), 1e-12);
}

// The rows the imitation term conditions on: standardized state plus the
// remaining-horizon average return, one row per timestep.
Eigen::MatrixXd imitation_inputs(const RvsPolicy& policy, const OfflineDataset& ds,
                                 const std::vector<std::size_t>& batch) {
    std::size_t rows = 0;
    for (std::size_t idx : batch) rows += ds.trajectories[idx].length();
    Eigen::MatrixXd inputs(static_cast<Eigen::Index>(rows), policy.state_dim + 1);
    Eigen::Index r = 0;
    for (std::size_t idx : batch) {
        const auto& traj = ds.trajectories[idx];
        for (std::size_t t = 0; t < traj.length(); ++t, ++r) {
            for (int i = 0; i < policy.state_dim; ++i)
                inputs(r, i) = (traj.transitions[t].state[static_cast<std::size_t>(i)] -
                                policy.state_mean(i)) /
                               policy.state_std(i);
            inputs(r, policy.state_dim) =
                average_rtg(traj.rtg[t], static_cast<int>(t) + 1, policy.horizon);
        }
    }
    return inputs;
}

// Smallest |pre-activation| over the hidden layers. Central differences are
// meaningless within a step of a relu corner (the loss is not differentiable
// there), so fixtures that close to a corner are resampled, not compared.
double relu_corner_margin(const DenseNet& net, const Eigen::MatrixXd& inputs) {
    double margin = std::numeric_limits<double>::infinity();
    Eigen::MatrixXd z = inputs;
    for (int l = 0; l + 1 < net.num_layers(); ++l) {
        const Eigen::MatrixXd pre =
            (z * net.weights[static_cast<std::size_t>(l)].transpose()).rowwise() +
            net.biases[static_cast<std::size_t>(l)].transpose();
        margin = std::min(margin, pre.cwiseAbs().minCoeff());
        z = pre.cwiseMax(0.0);
    }
    return margin;
}

}  // namespace

std::vector<Report> run_verification(std::uint64_t seed) {
    std::vector<Report> reports;

    // 1. Bin probabilities along two arithmetic paths agree.
    {
        Rng rng = Rng::stream(seed, 101);
        double worst = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            const auto bins = static_cast<std::size_t>(2 + rng.uniform_index(29));
            BinLayout layout;
            layout.total = bins;  // sizes are irrelevant for the formula
            layout.frequency.resize(bins);
            layout.mean_return.resize(bins);
            layout.bins.assign(bins, {0});
            double fsum = 0.0;
            for (auto& f : layout.frequency) {
                f = rng.uniform(0.01, 1.0);
                fsum += f;
            }
            for (auto& f : layout.frequency) f /= fsum;
            double r = rng.uniform(-50.0, 50.0);
            for (auto& m : layout.mean_return) {
                m = r;
                r += rng.uniform(0.1, 10.0);
            }
            const double lambda =
                trial % 10 == 0 ? 0.0 : std::pow(10.0, rng.uniform(-6.0, 9.0));
            const double kappa = std::pow(10.0, rng.uniform(-3.0, 3.0));
            const double r_star = layout.mean_return.back() + rng.uniform(-5.0, 5.0);

            const auto fast = bin_probabilities(layout, lambda, kappa, r_star);
            const auto ref =
                reference_bin_probabilities(layout.frequency, layout.mean_return, lambda, kappa, r_star);
            for (std::size_t i = 0; i < fast.size(); ++i) {
                const double rel = std::abs(fast[i] - ref[i]) / std::max(ref[i], 1e-300);
                worst = std::max(worst, rel);
            }
        }
        reports.push_back({"bin-probs-dual-path", "100 fuzz cases, max relative gap", worst, 1e-10,
                           worst <= 1e-10});
    }

    // 2. The finite-difference probe itself, against a hand-differentiated
    // function.
    {
        Rng rng = Rng::stream(seed, 102);
        std::vector<double> x(6);
        for (double& v : x) v = rng.uniform(-2.0, 2.0);
        auto fn = [](const std::vector<double>& p) {
            double v = 0.0;
            for (std::size_t i = 0; i < p.size(); ++i) v += (static_cast<double>(i) + 1.0) * p[i] * p[i];
            return v + 0.5 * p[0] * p[1];
        };
        std::vector<double> exact(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) exact[i] = 2.0 * (static_cast<double>(i) + 1.0) * x[i];
        exact[0] += 0.5 * x[1];
        exact[1] += 0.5 * x[0];
        const auto fd = central_difference_gradient(fn, x, 1e-6);
        const double gap = relative_gap(fd, exact);
        reports.push_back({"fd-probe-quadratic", "central differences vs closed form", gap, 1e-8,
                           gap <= 1e-8});
    }

    // 3. Training-objective gradient vs finite differences, offsets frozen.
    {
        Rng data_rng = Rng::stream(seed, 103);
        double worst = 0.0;
        int accepted = 0;
        for (int attempts = 0; accepted < 3 && attempts < 40; ++attempts) {
            const OfflineDataset ds = fuzz_dataset(data_rng, 6, 5, 2, 2);
            RvsPolicy policy =
                make_policy(2, 2, 5, {8, 8}, 0.0, seed + static_cast<std::uint64_t>(attempts));
            fit_state_standardization(policy, ds);
            std::vector<std::size_t> batch = {0, 1, 2, 3, 4, 5};
            Rng noise_rng = Rng::stream(seed, 104, static_cast<std::uint64_t>(attempts));
            const ConservativeBatch cons = build_conservative_batch(
                policy, ds, batch, ds.stats.percentile(50), ds.stats.max_return, 1.0, noise_rng);
            if (std::min(relu_corner_margin(policy.net, imitation_inputs(policy, ds, batch)),
                         relu_corner_margin(policy.net, cons.inputs)) < 1e-3)
                continue;
            ++accepted;

            GradientSet grads;
            combined_objective_frozen(policy, ds, batch, 1.0, cons, {}, &grads);
            const auto analytic = flatten_gradients(grads);

            RvsPolicy probe = policy;
            auto loss_fn = [&](const std::vector<double>& params) {
                set_parameters(probe.net, params);
                return combined_objective_frozen(probe, ds, batch, 1.0, cons).total;
            };
            const auto fd =
                central_difference_gradient(loss_fn, flatten_parameters(policy.net), 1e-5);
            worst = std::max(worst, relative_gap(analytic, fd));
        }
        reports.push_back({"objective-grad-fd", "3 nets, analytic vs central differences", worst,
                           1e-4, accepted == 3 && worst <= 1e-4});
    }

    // 4. Two-stage sampler follows the stated bin law.
    {
        Rng rng = Rng::stream(seed, 105);
        BinLayout layout;
        layout.total = 60;
        layout.bins.resize(6);
        std::size_t idx = 0;
        for (auto& bin : layout.bins) {
            bin.resize(10);
            for (auto& v : bin) v = idx++;
        }
        layout.frequency.assign(6, 10.0 / 60.0);
        layout.mean_return = {5, 15, 25, 35, 45, 55};
        apply_bin_probabilities(layout, 0.01, 20.0, 55.0);
        const double tv = sampler_total_variation(layout, 200000, rng);
        reports.push_back({"sampler-tv", "6 bins, 200k draws", tv, 0.01, tv <= 0.01});
    }

    // 5. Conditioning offsets: support and spread.
    {
        Rng rng = Rng::stream(seed, 106);
        const double sigma = 10.0;
        const NoiseBounds bounds = noise_bounds(90.0, 100.0, sigma);
        const SampleMoments m = noise_sample_moments(bounds, 1000000, rng);
        const double violations =
            (m.min < bounds.lower ? 1.0 : 0.0) + (m.max > bounds.upper ? 1.0 : 0.0);
        reports.push_back({"noise-support", "1e6 draws inside stated interval", violations, 0.0,
                           violations == 0.0});
        const double std_gap = std::abs(m.stddev - sigma) / sigma;
        reports.push_back({"noise-std", "relative gap to requested sigma", std_gap, 0.02,
                           std_gap <= 0.02});
        const double mid = 0.5 * (bounds.lower + bounds.upper);
        const double mean_gap = std::abs(m.mean - mid) / (bounds.upper - bounds.lower);
        reports.push_back({"noise-mean", "gap to interval midpoint over width", mean_gap, 0.01,
                           mean_gap <= 0.01});
    }

    return reports;
}

void write_reports_csv(const std::vector<Report>& reports, const std::string& path) {
    CsvWriter csv(path);
    csv.row({"check", "detail", "measured", "bound", "pass"});
    for (const auto& r : reports)
        csv.row({r.check, r.detail, format_double(r.measured), format_double(r.bound),
                 r.pass ? "1" : "0"});
}

}  // namespace cwbc::oracle
