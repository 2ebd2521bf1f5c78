#pragma once

#include <cstddef>
#include <vector>

#include "cwbc/dataset.hpp"
#include "cwbc/rng.hpp"

namespace cwbc {

struct RvsPolicy;

// Settings for the high-return regularizer: trajectories whose return beats
// the q-th dataset percentile get their return-to-go series shifted by a
// random positive offset, and the policy is asked to keep predicting the
// logged actions there. alpha scales the term in the training objective.
struct ConservatismConfig {
    int percentile_q = 95;
    double noise_std = 0.0;  // uniform offset spread; must be > 0 when the term is active
    double alpha = 1.0;
};

struct NoiseBounds {
    double lower = 0.0;
    double upper = 0.0;
};

// Offset interval for a trajectory with return r_tau: starts at the gap to
// the best return r_star and spans sqrt(12) * sigma, so the offset's
// standard deviation is sigma.
NoiseBounds noise_bounds(double r_tau, double r_star, double sigma);

double sample_noise(const NoiseBounds& bounds, Rng& rng);

// Adds the same offset to every return-to-go entry.
std::vector<double> perturb_rtgs(const std::vector<double>& rtg, double eps);

// Mean over qualifying batch trajectories of the per-trajectory mean squared
// action error under offset conditioning. Zero when nothing qualifies; the
// rng is consumed once per qualifying trajectory.
double conservative_loss(const RvsPolicy& policy, const OfflineDataset& dataset,
                         const std::vector<std::size_t>& batch, const ConservatismConfig& config,
                         const DatasetStats& stats, Rng& noise_rng);

}  // namespace cwbc
