#include "cwbc/conservatism.hpp"

#include <cmath>
#include <stdexcept>

#include "cwbc/policy.hpp"

namespace cwbc {

NoiseBounds noise_bounds(double r_tau, double r_star, double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("noise_bounds: sigma must be > 0");
    NoiseBounds bounds;
    bounds.lower = r_star - r_tau;
    // A uniform variable on an interval of width sqrt(12)*sigma has standard
    // deviation sigma.
    bounds.upper = bounds.lower + std::sqrt(12.0) * sigma;
    return bounds;
}

double sample_noise(const NoiseBounds& bounds, Rng& rng) {
    if (!(bounds.upper >= bounds.lower)) throw std::invalid_argument("sample_noise: empty interval");
    return rng.uniform(bounds.lower, bounds.upper);
}

std::vector<double> perturb_rtgs(const std::vector<double>& rtg, double eps) {
    std::vector<double> out(rtg.size());
    for (std::size_t i = 0; i < rtg.size(); ++i) out[i] = rtg[i] + eps;
    return out;
}

double conservative_loss(const RvsPolicy& policy, const OfflineDataset& dataset,
                         const std::vector<std::size_t>& batch, const ConservatismConfig& config,
                         const DatasetStats& stats, Rng& noise_rng) {
    const double threshold = stats.percentile(config.percentile_q);
    const ConservativeBatch cons = build_conservative_batch(
        policy, dataset, batch, threshold, stats.max_return, config.noise_std, noise_rng);
    return conservative_loss_on_batch(policy, cons, nullptr);
}

}  // namespace cwbc
