#include "cwbc/env.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "cwbc/csv.hpp"

namespace cwbc {

EnvSpec lineworld() {
    EnvSpec spec;
    spec.name = "lineworld";
    spec.dim = 1;
    spec.horizon = 20;
    spec.goal = {0.6};
    spec.start_center = {-0.6};
    spec.start_spread = 0.2;
    spec.goal_start_fraction = 0.0;
    spec.step_size = 0.1;
    spec.noise_std = 0.04;
    return spec;
}

EnvSpec planeworld() {
    return EnvSpec{};  // defaults describe it
}

double env_diameter(const EnvSpec& spec) {
    return 2.0 * std::sqrt(static_cast<double>(spec.dim));
}

void validate_env(const EnvSpec& spec) {
    if (spec.dim < 1) throw std::invalid_argument("env: dim must be >= 1");
    if (spec.horizon < 1) throw std::invalid_argument("env: horizon must be >= 1");
    if (spec.goal.size() != static_cast<std::size_t>(spec.dim))
        throw std::invalid_argument("env: goal dimension mismatch");
    for (double g : spec.goal)
        if (g < -1.0 || g > 1.0) throw std::invalid_argument("env: goal outside the box");
    if (spec.start_center.size() != static_cast<std::size_t>(spec.dim))
        throw std::invalid_argument("env: start_center dimension mismatch");
    for (double c : spec.start_center)
        if (c < -1.0 || c > 1.0) throw std::invalid_argument("env: start_center outside the box");
    if (spec.start_spread < 0.0) throw std::invalid_argument("env: start_spread must be >= 0");
    if (spec.goal_start_fraction < 0.0 || spec.goal_start_fraction > 1.0)
        throw std::invalid_argument("env: goal_start_fraction must be in [0, 1]");
    if (!(spec.step_size > 0.0)) throw std::invalid_argument("env: step_size must be > 0");
    if (spec.noise_std < 0.0) throw std::invalid_argument("env: noise_std must be >= 0");
    if (spec.reward_rule != "dense-goal")
        throw std::invalid_argument("env: unknown reward rule " + spec.reward_rule);
}

EnvSpec load_env_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_env_spec: cannot open " + path);
    EnvSpec spec;
    spec.goal.clear();
    spec.start_center.clear();
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "name") spec.name = value;
        else if (key == "dim") spec.dim = std::stoi(value);
        else if (key == "horizon") spec.horizon = std::stoi(value);
        else if (key == "step_size") spec.step_size = parse_double(value);
        else if (key == "noise_std") spec.noise_std = parse_double(value);
        else if (key == "start_spread") spec.start_spread = parse_double(value);
        else if (key == "goal_start_fraction") spec.goal_start_fraction = parse_double(value);
        else if (key == "reward_rule") spec.reward_rule = value;
        else if (key == "goal") {
            spec.goal.clear();
            for (const auto& cell : split_csv_line(value))
                spec.goal.push_back(parse_double(trim(cell)));
        } else if (key == "start_center") {
            spec.start_center.clear();
            for (const auto& cell : split_csv_line(value))
                spec.start_center.push_back(parse_double(trim(cell)));
        } else {
            throw std::runtime_error("load_env_spec: unknown key " + key);
        }
    }
    if (spec.goal.empty()) spec.goal.assign(static_cast<std::size_t>(spec.dim), 0.0);
    if (spec.start_center.empty())
        spec.start_center.assign(static_cast<std::size_t>(spec.dim), 0.0);
    validate_env(spec);
    return spec;
}

EnvSpec resolve_env(const std::string& name_or_path) {
    if (name_or_path == "lineworld") return lineworld();
    if (name_or_path == "planeworld") return planeworld();
    return load_env_spec(name_or_path);
}

StepResult env_step(const EnvSpec& spec, const std::vector<double>& state,
                    const std::vector<double>& action, Rng& rng) {
    const auto d = static_cast<std::size_t>(spec.dim);
    if (state.size() != d || action.size() != d)
        throw std::invalid_argument("env_step: state/action dimension mismatch");

    StepResult result;
    result.next_state.resize(d);
    double dist_sq = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        const double a = std::clamp(action[i], -1.0, 1.0);
        double next = state[i] + spec.step_size * a;
        if (spec.noise_std > 0.0) next += spec.noise_std * rng.normal();
        next = std::clamp(next, -1.0, 1.0);
        result.next_state[i] = next;
        const double gap = next - spec.goal[i];
        dist_sq += gap * gap;
    }
    result.reward = 1.0 - std::sqrt(dist_sq) / env_diameter(spec);
    return result;
}

std::vector<double> sample_start_state(const EnvSpec& spec, Rng& rng) {
    // Short-circuit so q=0 environments never consume the mixing draw.
    const bool near_goal =
        spec.goal_start_fraction > 0.0 && rng.uniform() < spec.goal_start_fraction;
    const std::vector<double>& center = near_goal ? spec.goal : spec.start_center;
    std::vector<double> state(static_cast<std::size_t>(spec.dim));
    for (std::size_t i = 0; i < state.size(); ++i) {
        state[i] = std::clamp(rng.uniform(center[i] - spec.start_spread, center[i] + spec.start_spread),
                              -1.0, 1.0);
    }
    return state;
}

std::vector<double> behavior_action(double quality, const std::vector<double>& state,
                                    const std::vector<double>& goal, Rng& rng) {
    if (quality < 0.0 || quality > 1.0)
        throw std::invalid_argument("behavior_action: quality must be in [0, 1]");
    if (state.size() != goal.size())
        throw std::invalid_argument("behavior_action: state/goal dimension mismatch");

    // One mixing draw always happens, so episodes with different quality
    // levels consume randomness in lockstep.
    const double u = rng.uniform();
    std::vector<double> action(state.size());
    if (u < quality) {
        double dist_sq = 0.0;
        for (std::size_t i = 0; i < state.size(); ++i) {
            action[i] = goal[i] - state[i];
            dist_sq += action[i] * action[i];
        }
        const double dist = std::sqrt(dist_sq);
        if (dist > 0.0)
            for (double& a : action) a /= dist;
        // At the goal the directed action is zero.
    } else {
        for (double& a : action) a = rng.uniform(-1.0, 1.0);
    }
    return action;
}

Trajectory rollout_behavior(const EnvSpec& spec, double quality, Rng& rng) {
    Trajectory traj;
    traj.transitions.resize(static_cast<std::size_t>(spec.horizon));
    std::vector<double> state = sample_start_state(spec, rng);
    std::vector<double> rewards(static_cast<std::size_t>(spec.horizon));
    for (int t = 0; t < spec.horizon; ++t) {
        auto& tr = traj.transitions[static_cast<std::size_t>(t)];
        tr.state = state;
        tr.action = behavior_action(quality, state, spec.goal, rng);
        StepResult step = env_step(spec, state, tr.action, rng);
        tr.reward = step.reward;
        rewards[static_cast<std::size_t>(t)] = step.reward;
        state = std::move(step.next_state);
    }
    traj.rtg = compute_rtg(rewards);
    return traj;
}

DatasetRecipe make_recipe(const EnvSpec& env, const std::string& mixture_name,
                          std::size_t num_trajectories, std::uint64_t seed) {
    if (num_trajectories == 0) throw std::invalid_argument("make_recipe: need at least 1 trajectory");
    validate_env(env);

    std::vector<double> qualities;
    if (mixture_name == "medium") qualities = {0.4};
    else if (mixture_name == "medium-replay") qualities = {0.1, 0.2, 0.3, 0.4, 0.5};
    else if (mixture_name == "medium-expert") qualities = {0.4, 1.0};
    else throw std::invalid_argument("make_recipe: unknown mixture " + mixture_name);

    DatasetRecipe recipe;
    recipe.env = env;
    recipe.seed = seed;
    const std::size_t parts = qualities.size();
    const std::size_t base = num_trajectories / parts;
    const std::size_t extra = num_trajectories % parts;
    for (std::size_t i = 0; i < parts; ++i)
        recipe.mixture.push_back({qualities[i], base + (i < extra ? 1 : 0)});
    return recipe;
}

OfflineDataset generate_dataset(const DatasetRecipe& recipe) {
    validate_env(recipe.env);
    if (recipe.mixture.empty()) throw std::invalid_argument("generate_dataset: empty mixture");

    OfflineDataset ds;
    ds.horizon = recipe.env.horizon;
    ds.state_dim = recipe.env.dim;
    ds.action_dim = recipe.env.dim;

    std::uint64_t index = 0;
    for (const auto& component : recipe.mixture) {
        for (std::size_t k = 0; k < component.count; ++k, ++index) {
            // Independent stream per episode: the dataset is reproducible and
            // insensitive to mixture reordering of other components.
            Rng rng = Rng::stream(recipe.seed, streams::kDatagen, index);
            ds.trajectories.push_back(rollout_behavior(recipe.env, component.quality, rng));
        }
    }
    if (ds.trajectories.empty()) throw std::invalid_argument("generate_dataset: zero trajectories");
    finalize_dataset(ds);
    return ds;
}

ReferenceReturns reference_returns(const EnvSpec& spec, int episodes, std::uint64_t seed) {
    if (episodes < 1) throw std::invalid_argument("reference_returns: episodes must be >= 1");
    validate_env(spec);
    ReferenceReturns refs;
    for (int e = 0; e < episodes; ++e) {
        Rng rand_rng = Rng::stream(seed, streams::kReference, static_cast<std::uint64_t>(e));
        refs.random_ref += rollout_behavior(spec, 0.0, rand_rng).total_return();
        Rng expert_rng = Rng::stream(seed, streams::kReference,
                                     static_cast<std::uint64_t>(episodes + e));
        refs.expert_ref += rollout_behavior(spec, 1.0, expert_rng).total_return();
    }
    refs.random_ref /= episodes;
    refs.expert_ref /= episodes;
    return refs;
}

}  // namespace cwbc
