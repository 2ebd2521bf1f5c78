#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cwbc/dataset.hpp"
#include "cwbc/rng.hpp"

namespace cwbc {

// Point-mass box world: states and actions live in [-1,1]^dim, the agent
// drifts by step_size * action plus Gaussian noise, and each step pays
// 1 - dist(next_state, goal) / diameter. Episodes start near start_center
// (uniform within +-start_spread per coordinate, clamped to the box), so
// returns reflect how well the agent travels to and then holds the goal
// rather than where it happened to spawn. Setting goal_start_fraction > 0
// spawns that share of episodes inside the same-size box around the goal
// instead; those lucky spawns collect high returns no matter how the agent
// behaves, giving datasets a deceptive high-return tail like the replay
// buffers of real training runs.
struct EnvSpec {
    std::string name = "planeworld";
    int dim = 2;  // states and actions share this dimensionality
    int horizon = 30;
    std::vector<double> goal = {0.7, 0.7};
    std::vector<double> start_center = {-0.7, -0.7};
    double start_spread = 0.2;
    double goal_start_fraction = 0.0;
    double step_size = 0.1;
    double noise_std = 0.06;
    std::string reward_rule = "dense-goal";
};

EnvSpec lineworld();
EnvSpec planeworld();

// Builtin name, else a key=value spec file path.
EnvSpec resolve_env(const std::string& name_or_path);
EnvSpec load_env_spec(const std::string& path);

// Largest possible distance inside the box; normalizes the reward.
double env_diameter(const EnvSpec& spec);

void validate_env(const EnvSpec& spec);

struct StepResult {
    std::vector<double> next_state;
    double reward = 0.0;
};

// Actions are clipped to the box before integrating. Consumes dim normal
// draws when noise_std > 0, none otherwise.
StepResult env_step(const EnvSpec& spec, const std::vector<double>& state,
                    const std::vector<double>& action, Rng& rng);

// Consumes one mixing draw when goal_start_fraction > 0, none otherwise,
// then dim uniforms for the coordinates.
std::vector<double> sample_start_state(const EnvSpec& spec, Rng& rng);

// With probability quality: a unit step toward the goal (zero at the goal).
// Otherwise a uniform random action. quality must be in [0, 1].
std::vector<double> behavior_action(double quality, const std::vector<double>& state,
                                    const std::vector<double>& goal, Rng& rng);

// One fixed-horizon episode under the scripted behavior.
Trajectory rollout_behavior(const EnvSpec& spec, double quality, Rng& rng);

struct MixtureComponent {
    double quality = 0.0;
    std::size_t count = 0;
};

struct DatasetRecipe {
    EnvSpec env;
    std::vector<MixtureComponent> mixture;
    std::uint64_t seed = 0;
};

// Named mixtures: "medium" (all 0.4), "medium-replay" (equal fifths of
// 0.1..0.5), "medium-expert" (half 0.4, half 1.0). Remainders go to the
// earlier components.
DatasetRecipe make_recipe(const EnvSpec& env, const std::string& mixture_name,
                          std::size_t num_trajectories, std::uint64_t seed);

OfflineDataset generate_dataset(const DatasetRecipe& recipe);

struct ReferenceReturns {
    double random_ref = 0.0;
    double expert_ref = 0.0;
};

// Mean returns of the quality-0 and quality-1 behaviors, for score
// normalization.
ReferenceReturns reference_returns(const EnvSpec& spec, int episodes, std::uint64_t seed);

}  // namespace cwbc
