#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace cwbc {

struct Transition {
    std::vector<double> state;
    std::vector<double> action;
    double reward = 0.0;
};

// One episode. rtg[t] is the sum of rewards from step t to the end, so
// rtg[0] is the episode return. Recomputed on load, never persisted.
struct Trajectory {
    std::vector<Transition> transitions;
    std::vector<double> rtg;

    std::size_t length() const { return transitions.size(); }
    double total_return() const { return rtg.empty() ? 0.0 : rtg.front(); }
};

struct DatasetStats {
    std::size_t count = 0;
    double min_return = 0.0;
    double max_return = 0.0;
    // Nearest-rank return percentiles for q = 0..100.
    std::array<double, 101> percentile_table{};

    double percentile(int q) const;
};

struct OfflineDataset {
    std::vector<Trajectory> trajectories;
    DatasetStats stats;
    int horizon = 0;  // maximum episode length, set by the generator / loader
    int state_dim = 0;
    int action_dim = 0;

    std::size_t size() const { return trajectories.size(); }
};

// Suffix sums of the reward sequence. Empty input is rejected.
std::vector<double> compute_rtg(const std::vector<double>& rewards);

// Remaining-horizon average g / (H - t + 1) with 1-based step index t.
double average_rtg(double g, int t, int horizon);

// Nearest-rank percentile: the ceil(q/100 * N)-th smallest value, with q = 0
// mapping to the minimum. q outside 0..100 or an empty sample is rejected.
double percentile(std::vector<double> values, int q);

std::vector<double> dataset_returns(const OfflineDataset& dataset);

DatasetStats build_stats(const OfflineDataset& dataset);

// Validates shape consistency against (horizon, state_dim, action_dim) and
// fills in rtg for every trajectory, then rebuilds stats.
void finalize_dataset(OfflineDataset& dataset);

// JSONL on disk: one header object, then one object per trajectory.
OfflineDataset load_dataset(const std::string& path);
void save_dataset(const OfflineDataset& dataset, const std::string& path);

}  // namespace cwbc
