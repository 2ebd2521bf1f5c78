#include "cwbc/weighting.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace cwbc {

BinLayout build_bins(const OfflineDataset& dataset, int num_bins) {
    const std::size_t n = dataset.size();
    if (n == 0) throw std::invalid_argument("build_bins: empty dataset");
    if (num_bins < 1) throw std::invalid_argument("build_bins: num_bins must be >= 1");
    if (static_cast<std::size_t>(num_bins) > n)
        throw std::invalid_argument("build_bins: more bins than trajectories");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    const auto& trajs = dataset.trajectories;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return trajs[a].total_return() < trajs[b].total_return();
    });

    const std::size_t b = static_cast<std::size_t>(num_bins);
    const std::size_t base = n / b;
    const std::size_t extra = n % b;  // lowest-return bins absorb the remainder

    BinLayout layout;
    layout.total = n;
    layout.bins.resize(b);
    layout.mean_return.resize(b);
    layout.frequency.resize(b);
    std::size_t pos = 0;
    for (std::size_t i = 0; i < b; ++i) {
        const std::size_t size = base + (i < extra ? 1 : 0);
        layout.bins[i].assign(order.begin() + pos, order.begin() + pos + size);
        pos += size;
        double sum = 0.0;
        for (std::size_t idx : layout.bins[i]) sum += trajs[idx].total_return();
        layout.mean_return[i] = sum / static_cast<double>(size);
        layout.frequency[i] = static_cast<double>(size) / static_cast<double>(n);
    }
    return layout;
}

BinLayout uniform_layout(std::size_t count) {
    if (count == 0) throw std::invalid_argument("uniform_layout: empty dataset");
    BinLayout layout;
    layout.total = count;
    layout.bins.resize(1);
    layout.bins[0].resize(count);
    std::iota(layout.bins[0].begin(), layout.bins[0].end(), 0);
    layout.mean_return = {0.0};
    layout.frequency = {1.0};
    layout.probability = {1.0};
    return layout;
}

double density_weight(double r, double hist_density, double lambda, double kappa, double r_star) {
    if (kappa <= 0.0) throw std::invalid_argument("density_weight: kappa must be > 0");
    if (lambda < 0.0) throw std::invalid_argument("density_weight: lambda must be >= 0");
    if (hist_density < 0.0) throw std::invalid_argument("density_weight: negative density");
    if (hist_density == 0.0) return 0.0;
    return hist_density / (hist_density + lambda) * std::exp(-std::abs(r - r_star) / kappa);
}

std::vector<double> bin_probabilities(const BinLayout& layout, double lambda, double kappa,
                                      double r_star) {
    if (layout.num_bins() == 0) throw std::invalid_argument("bin_probabilities: empty layout");
    if (kappa <= 0.0) throw std::invalid_argument("bin_probabilities: kappa must be > 0");
    if (lambda < 0.0) throw std::invalid_argument("bin_probabilities: lambda must be >= 0");

    const std::size_t b = layout.num_bins();
    // Shift distances by the minimum before exponentiating; this leaves the
    // normalized result unchanged but keeps tiny-kappa cases from
    // underflowing to an all-zero weight vector.
    double dmin = std::abs(layout.mean_return[0] - r_star);
    for (std::size_t i = 1; i < b; ++i)
        dmin = std::min(dmin, std::abs(layout.mean_return[i] - r_star));

    std::vector<double> probs(b);
    double sum = 0.0;
    for (std::size_t i = 0; i < b; ++i) {
        const double f = layout.frequency[i];
        const double d = std::abs(layout.mean_return[i] - r_star);
        probs[i] = f / (f + lambda) * std::exp(-(d - dmin) / kappa);
        sum += probs[i];
    }
    if (!(sum > 0.0) || !std::isfinite(sum))
        throw std::runtime_error("bin_probabilities: degenerate weight sum");
    for (double& p : probs) p /= sum;
    return probs;
}

void apply_bin_probabilities(BinLayout& layout, double lambda, double kappa, double r_star) {
    layout.probability = bin_probabilities(layout, lambda, kappa, r_star);
}

double resolve_kappa(const DatasetStats& stats, const KappaSpec& spec) {
    if (spec.is_explicit) {
        if (spec.value <= 0.0) throw std::invalid_argument("resolve_kappa: explicit kappa must be > 0");
        return spec.value;
    }
    const double gap = stats.max_return - stats.percentile(spec.z);
    const double floor = 1e-6 * std::max(std::abs(stats.max_return), 1.0);
    return std::max(gap, floor);
}

std::size_t sample_trajectory(const BinLayout& layout, Rng& rng) {
    if (!layout.has_probabilities())
        throw std::logic_error("sample_trajectory: probabilities not computed");

    const double u = rng.uniform();
    double cum = 0.0;
    std::size_t chosen = layout.num_bins();
    for (std::size_t i = 0; i < layout.num_bins(); ++i) {
        cum += layout.probability[i];
        if (u < cum) {
            chosen = i;
            break;
        }
    }
    if (chosen == layout.num_bins()) {
        // Rounding pushed the cumulative sum below u; fall back to the last
        // bin that carries mass.
        for (std::size_t i = layout.num_bins(); i-- > 0;) {
            if (layout.probability[i] > 0.0) {
                chosen = i;
                break;
            }
        }
        if (chosen == layout.num_bins())
            throw std::runtime_error("sample_trajectory: no bin carries probability mass");
    }
    const auto& bin = layout.bins[chosen];
    return bin[rng.uniform_index(bin.size())];
}

OfflineDataset filter_top_fraction(const OfflineDataset& dataset, double fraction) {
    const std::size_t n = dataset.size();
    if (n == 0) throw std::invalid_argument("filter_top_fraction: empty dataset");
    if (!(fraction > 0.0) || fraction > 1.0)
        throw std::invalid_argument("filter_top_fraction: fraction must be in (0, 1]");

    // ceil(fraction * n) with a tolerance so that decimal fractions whose
    // binary form lands a hair above an integer (0.1 * 2000) do not round up.
    const double x = fraction * static_cast<double>(n);
    long long keep = static_cast<long long>(std::ceil(x - 1e-9));
    if (keep < 1) keep = 1;
    if (keep > static_cast<long long>(n)) keep = static_cast<long long>(n);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    const auto& trajs = dataset.trajectories;
    // Stable sort: among equal returns the earlier trajectory wins a slot.
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return trajs[a].total_return() > trajs[b].total_return();
    });
    order.resize(static_cast<std::size_t>(keep));
    std::sort(order.begin(), order.end());

    OfflineDataset out;
    out.horizon = dataset.horizon;
    out.state_dim = dataset.state_dim;
    out.action_dim = dataset.action_dim;
    out.trajectories.reserve(order.size());
    for (std::size_t idx : order) out.trajectories.push_back(dataset.trajectories[idx]);
    out.stats = build_stats(out);
    return out;
}

}  // namespace cwbc
