#pragma once

#include <cstddef>
#include <vector>

#include "cwbc/dataset.hpp"
#include "cwbc/rng.hpp"

namespace cwbc {

// Temperature for the exponential tilt toward high returns. Either an
// explicit positive value or the gap between the best return and the z-th
// return percentile, floored so degenerate datasets stay usable.
struct KappaSpec {
    static KappaSpec explicit_value(double kappa) { return {true, kappa, 0}; }
    static KappaSpec percentile_gap(int z) { return {false, 0.0, z}; }

    bool is_explicit = false;
    double value = 0.0;
    int z = 90;
};

struct WeightingConfig {
    int num_bins = 20;
    double lambda = 0.01;
    KappaSpec kappa = KappaSpec::percentile_gap(90);
};

// Trajectories grouped into contiguous return bins (ascending). When N is
// not divisible by the bin count, the lowest-return bins take the extras.
struct BinLayout {
    std::vector<std::vector<std::size_t>> bins;  // trajectory indices per bin
    std::vector<double> mean_return;
    std::vector<double> frequency;    // bin size / N
    std::vector<double> probability;  // empty until probabilities applied
    std::size_t total = 0;

    std::size_t num_bins() const { return bins.size(); }
    bool has_probabilities() const { return !probability.empty(); }
};

BinLayout build_bins(const OfflineDataset& dataset, int num_bins);

// Degenerate single-bin layout: sampling from it is uniform over the
// dataset. Used so every training variant goes through the same sampler.
BinLayout uniform_layout(std::size_t count);

// Per-bin sampling weights frequency/(frequency+lambda) * exp(-|mean - r_star|/kappa),
// normalized to sum to one.
std::vector<double> bin_probabilities(const BinLayout& layout, double lambda, double kappa,
                                      double r_star);
void apply_bin_probabilities(BinLayout& layout, double lambda, double kappa, double r_star);

// Un-normalized weight of a single return under the same rule; hist_density
// plays the role of the bin frequency.
double density_weight(double r, double hist_density, double lambda, double kappa, double r_star);

double resolve_kappa(const DatasetStats& stats, const KappaSpec& spec);

// Two-stage draw: bin by probability, then uniform within the bin.
std::size_t sample_trajectory(const BinLayout& layout, Rng& rng);

// Keeps the ceil(fraction * N) highest-return trajectories, original order.
OfflineDataset filter_top_fraction(const OfflineDataset& dataset, double fraction);

}  // namespace cwbc
