#include "cwbc/evaluator.hpp"

#include <cmath>
#include <stdexcept>

namespace cwbc {

double rollout_conditioned(const RvsPolicy& policy, const EnvSpec& spec, double target, Rng& rng,
                           RolloutTrace* trace) {
    validate_env(spec);
    if (spec.dim != policy.state_dim || spec.dim != policy.action_dim)
        throw std::invalid_argument("rollout_conditioned: env/policy dimension mismatch");
    if (spec.horizon != policy.horizon)
        throw std::invalid_argument("rollout_conditioned: env/policy horizon mismatch");

    if (trace) {
        trace->target = target;
        trace->steps.clear();
    }

    std::vector<double> state = sample_start_state(spec, rng);
    Eigen::VectorXd s(spec.dim);
    std::vector<double> action(static_cast<std::size_t>(spec.dim));
    double remaining = target;
    double achieved = 0.0;
    for (int t = 1; t <= spec.horizon; ++t) {
        const double omega = average_rtg(remaining, t, spec.horizon);
        for (int i = 0; i < spec.dim; ++i) s(i) = state[static_cast<std::size_t>(i)];
        const Eigen::VectorXd a = predict_action(policy, s, omega);
        for (int i = 0; i < spec.dim; ++i) {
            if (!std::isfinite(a(i)))
                throw std::runtime_error("rollout_conditioned: non-finite action at step " +
                                         std::to_string(t));
            action[static_cast<std::size_t>(i)] = a(i);
        }
        StepResult step = env_step(spec, state, action, rng);
        if (trace) trace->steps.push_back({omega, step.reward});
        achieved += step.reward;
        remaining -= step.reward;
        state = std::move(step.next_state);
    }
    return achieved;
}

EvalPointResult evaluate_at(const RvsPolicy& policy, const EnvSpec& spec, double target,
                            int episodes, std::uint64_t seed) {
    if (episodes < 1) throw std::invalid_argument("evaluate_at: episodes must be >= 1");
    EvalPointResult result;
    result.returns.reserve(static_cast<std::size_t>(episodes));
    for (int e = 0; e < episodes; ++e) {
        Rng rng = Rng::stream(seed, streams::kRollout, static_cast<std::uint64_t>(e));
        result.returns.push_back(rollout_conditioned(policy, spec, target, rng));
    }
    double sum = 0.0;
    for (double r : result.returns) sum += r;
    result.mean = sum / episodes;
    double var = 0.0;
    for (double r : result.returns) var += (r - result.mean) * (r - result.mean);
    result.stddev = std::sqrt(var / episodes);
    return result;
}

double normalized_score(double raw, double random_ref, double expert_ref) {
    if (expert_ref == random_ref)
        throw std::invalid_argument("normalized_score: reference returns coincide");
    return 100.0 * (raw - random_ref) / (expert_ref - random_ref);
}

ReliabilityCurve sweep_targets(const RvsPolicy& policy, const EnvSpec& spec, double r_star,
                               const EvalConfig& config) {
    ReliabilityCurve curve;
    curve.r_star = r_star;
    const ReferenceReturns refs =
        reference_returns(spec, config.reference_episodes, config.seed);
    curve.random_ref = refs.random_ref;
    curve.expert_ref = refs.expert_ref;

    std::uint64_t point_index = 0;
    auto add_point = [&](const std::string& basis, double multiplier, double target) {
        // Each grid point gets its own episode seeds, derived from the eval
        // seed only, so different policies face identical conditions.
        const EvalPointResult r = evaluate_at(policy, spec, target, config.episodes,
                                              mix_seed(config.seed, ++point_index));
        CurvePoint p;
        p.basis = basis;
        p.multiplier = multiplier;
        p.target = target;
        p.mean = r.mean;
        p.stddev = r.stddev;
        p.normalized = normalized_score(r.mean, curve.random_ref, curve.expert_ref);
        curve.points.push_back(p);
    };
    for (double m : config.max_multipliers) add_point("max", m, m * r_star);
    for (double m : config.expert_multipliers) add_point("expert", m, m * refs.expert_ref);
    return curve;
}

double ood_drop_ratio(const ReliabilityCurve& curve) {
    const CurvePoint* ood = nullptr;
    double best = 0.0;
    bool any = false;
    for (const auto& p : curve.points) {
        if (p.basis == "max" && p.multiplier == 2.0) ood = &p;
        if (!any || p.mean > best) {
            best = p.mean;
            any = true;
        }
    }
    if (!ood) throw std::invalid_argument("ood_drop_ratio: sweep lacks the 2x max-return point");
    if (!(best > 0.0)) return 0.0;
    return ood->mean / best;
}

ComparisonReport compare_variants(const OfflineDataset& dataset, const EnvSpec& spec,
                                  const std::vector<Variant>& variants,
                                  const std::vector<std::uint64_t>& seeds,
                                  const TrainConfig& base_config, const EvalConfig& eval_config) {
    if (variants.empty() || seeds.empty())
        throw std::invalid_argument("compare_variants: need at least one variant and one seed");

    ComparisonReport report;
    report.variants = variants;
    report.seeds = seeds;
    const ReferenceReturns refs =
        reference_returns(spec, eval_config.reference_episodes, eval_config.seed);
    report.random_ref = refs.random_ref;
    report.expert_ref = refs.expert_ref;

    for (Variant v : variants) {
        for (std::uint64_t seed : seeds) {
            CompareCell cell;
            cell.variant = v;
            cell.seed = seed;
            try {
                TrainConfig cfg = base_config;
                cfg.variant = v;
                cfg.seed = seed;
                const TrainResult trained = train(dataset, cfg);
                cell.curve = sweep_targets(trained.policy, spec, trained.r_star, eval_config);
                cell.ood_ratio = ood_drop_ratio(cell.curve);
                for (const auto& p : cell.curve.points)
                    if (p.basis == "expert" && p.multiplier == 1.0) {
                        cell.expert_mean = p.mean;
                        cell.expert_normalized = p.normalized;
                    }
            } catch (const std::exception& e) {
                cell.failed = true;
                cell.error = e.what();
            }
            report.cells.push_back(std::move(cell));
        }
    }
    return report;
}

}  // namespace cwbc
