#include "cwbc/trainer.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "cwbc/csv.hpp"

namespace cwbc {

Variant variant_from_string(const std::string& name) {
    if (name == "base") return Variant::kBase;
    if (name == "w") return Variant::kW;
    if (name == "c") return Variant::kC;
    if (name == "wc") return Variant::kWC;
    if (name == "f") return Variant::kF;
    if (name == "fc") return Variant::kFC;
    throw std::invalid_argument("unknown variant: " + name);
}

std::string variant_name(Variant v) {
    switch (v) {
        case Variant::kBase: return "base";
        case Variant::kW: return "w";
        case Variant::kC: return "c";
        case Variant::kWC: return "wc";
        case Variant::kF: return "f";
        case Variant::kFC: return "fc";
    }
    throw std::logic_error("variant_name: bad enum");
}

bool variant_uses_weighting(Variant v) { return v == Variant::kW || v == Variant::kWC; }

bool variant_uses_conservatism(Variant v) {
    return v == Variant::kC || v == Variant::kWC || v == Variant::kFC;
}

bool variant_uses_filtering(Variant v) { return v == Variant::kF || v == Variant::kFC; }

TrainResult train(const OfflineDataset& dataset, const TrainConfig& config) {
    if (dataset.size() == 0) throw std::invalid_argument("train: empty dataset");
#if defined(__GLIBC__)
    // The per-iteration batch matrices are freed and reallocated every step;
    // stop glibc from returning that memory to the kernel each time, which
    // otherwise costs more in page faults than the math itself.
    mallopt(M_MMAP_THRESHOLD, 64 * 1024 * 1024);
    mallopt(M_TRIM_THRESHOLD, 64 * 1024 * 1024);
    mallopt(M_TOP_PAD, 16 * 1024 * 1024);
#endif
    if (config.iterations < 1) throw std::invalid_argument("train: iterations must be >= 1");
    if (config.batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
    if (config.log_interval < 1) throw std::invalid_argument("train: log_interval must be >= 1");

    // Filtering happens once, before anything else sees the data.
    OfflineDataset filtered;
    const OfflineDataset* data = &dataset;
    if (variant_uses_filtering(config.variant)) {
        filtered = filter_top_fraction(dataset, config.filter_fraction);
        data = &filtered;
    }
    const DatasetStats& stats = data->stats;

    // Every variant samples through a bin layout; unweighted ones use a
    // single bin, which is uniform over trajectories.
    BinLayout layout;
    double resolved_kappa = 0.0;
    if (variant_uses_weighting(config.variant)) {
        layout = build_bins(*data, config.weighting.num_bins);
        resolved_kappa = resolve_kappa(stats, config.weighting.kappa);
        apply_bin_probabilities(layout, config.weighting.lambda, resolved_kappa,
                                stats.max_return);
    } else {
        layout = build_bins(*data, 1);
        layout.probability.assign(1, 1.0);
    }

    ConservatismConfig cons = config.conservatism;
    double resolved_sigma = 0.0;
    if (variant_uses_conservatism(config.variant)) {
        if (cons.alpha < 0.0) throw std::invalid_argument("train: alpha must be >= 0");
        if (cons.noise_std <= 0.0) {
            // Dataset default spread: gap between the best and the median
            // return, floored like the weighting temperature.
            const double gap = stats.max_return - stats.percentile(50);
            cons.noise_std = std::max(gap, 1e-6 * std::max(std::abs(stats.max_return), 1.0));
        }
        resolved_sigma = cons.noise_std;
    } else {
        // Takes the exact plain-imitation code path inside the objective.
        cons.alpha = 0.0;
    }

    RvsPolicy policy = make_policy(data->state_dim, data->action_dim, data->horizon,
                                   config.hidden_sizes, config.dropout, config.seed);
    fit_state_standardization(policy, *data);
    AdamState adam = make_adam_state(policy.net, config.optimizer);

    // Independent streams: toggling one feature never shifts the draws of
    // another.
    Rng sampler_rng = Rng::stream(config.seed, streams::kSampler);
    Rng noise_rng = Rng::stream(config.seed, streams::kNoise);
    Rng dropout_rng = Rng::stream(config.seed, streams::kDropout);

    BcOptions options;
    options.reduction = config.reduction;
    options.max_timesteps_per_traj = config.max_timesteps_per_traj;
    options.dropout_rng = config.dropout > 0.0 ? &dropout_rng : nullptr;

    TrainResult result;
    const auto start = std::chrono::steady_clock::now();
    std::vector<std::size_t> batch(static_cast<std::size_t>(config.batch_size));
    GradientSet grads = zero_gradients(policy.net);

    for (long iter = 1; iter <= config.iterations; ++iter) {
        for (auto& idx : batch) idx = sample_trajectory(layout, sampler_rng);

        const ObjectiveResult losses =
            combined_objective(policy, *data, batch, cons, stats, noise_rng, options, &grads);
        if (!std::isfinite(losses.total))
            throw std::runtime_error("train: non-finite loss at iteration " + std::to_string(iter) +
                                     "; lower the learning rate or check the data");
        adam_step(policy.net, grads, adam);

        if (iter == 1 || iter % config.log_interval == 0 || iter == config.iterations) {
            const double ms = std::chrono::duration<double, std::milli>(
                                  std::chrono::steady_clock::now() - start)
                                  .count();
            result.log.records.push_back({iter, losses.bc, losses.conservative, losses.total, ms});
        }
    }

    result.policy = std::move(policy);
    result.resolved_kappa = resolved_kappa;
    result.resolved_sigma = resolved_sigma;
    result.r_star = stats.max_return;
    result.effective_trajectories = data->size();
    return result;
}

void write_train_log_csv(const TrainLog& log, const std::string& path) {
    CsvWriter csv(path);
    csv.row({"iter", "bc_loss", "cons_loss", "total_loss", "ms"});
    for (const auto& rec : log.records)
        csv.row({format_int(rec.iter), format_double(rec.bc_loss), format_double(rec.cons_loss),
                 format_double(rec.total_loss), format_double(rec.ms)});
}

}  // namespace cwbc
