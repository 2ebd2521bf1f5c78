#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <vector>

#include "cwbc/env.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace cwbc;

TEST_CASE("builtin specs validate and resolve by name") {
    validate_env(planeworld());
    validate_env(lineworld());
    CHECK(resolve_env("planeworld").dim == 2);
    CHECK(resolve_env("lineworld").dim == 1);
    CHECK(env_diameter(planeworld()) == doctest::Approx(2.0 * std::sqrt(2.0)));
    CHECK(env_diameter(lineworld()) == doctest::Approx(2.0));
}

TEST_CASE("validate_env rejects malformed specs") {
    EnvSpec spec = planeworld();
    spec.goal = {0.1};
    CHECK_THROWS_AS(validate_env(spec), std::invalid_argument);
    spec = planeworld();
    spec.goal = {2.0, 0.0};
    CHECK_THROWS_AS(validate_env(spec), std::invalid_argument);
    spec = planeworld();
    spec.step_size = 0.0;
    CHECK_THROWS_AS(validate_env(spec), std::invalid_argument);
    spec = planeworld();
    spec.noise_std = -0.1;
    CHECK_THROWS_AS(validate_env(spec), std::invalid_argument);
    spec = planeworld();
    spec.start_center = {0.0};
    CHECK_THROWS_AS(validate_env(spec), std::invalid_argument);
    spec = planeworld();
    spec.start_spread = -0.5;
    CHECK_THROWS_AS(validate_env(spec), std::invalid_argument);
    spec = planeworld();
    spec.reward_rule = "sparse";
    CHECK_THROWS_AS(validate_env(spec), std::invalid_argument);
    spec = planeworld();
    spec.horizon = 0;
    CHECK_THROWS_AS(validate_env(spec), std::invalid_argument);
}

TEST_CASE("env files parse key=value lines with comments") {
    const std::string path = testutil::tmp_path("env.cfg");
    std::FILE* f = std::fopen(path.c_str(), "w");
    std::fputs("# toy world\nname = toy\ndim = 2\nhorizon = 5\n", f);
    std::fputs("goal = 0.25, -0.5\nstart_center = -0.25, 0.5\nstart_spread = 0.1\n", f);
    std::fputs("step_size = 0.2 # inline comment\nnoise_std = 0\n", f);
    std::fputs("goal_start_fraction = 0.25\n", f);
    std::fclose(f);

    const EnvSpec spec = load_env_spec(path);
    CHECK(spec.name == "toy");
    CHECK(spec.dim == 2);
    CHECK(spec.horizon == 5);
    CHECK(spec.goal == std::vector<double>{0.25, -0.5});
    CHECK(spec.start_center == std::vector<double>{-0.25, 0.5});
    CHECK(spec.start_spread == doctest::Approx(0.1));
    CHECK(spec.goal_start_fraction == doctest::Approx(0.25));
    CHECK(spec.step_size == doctest::Approx(0.2));
    CHECK(spec.noise_std == 0.0);

    std::FILE* bad = std::fopen(path.c_str(), "w");
    std::fputs("dim = 1\nwhatever = 3\n", bad);
    std::fclose(bad);
    CHECK_THROWS_WITH_AS(load_env_spec(path), doctest::Contains("whatever"),
                         std::runtime_error);
    CHECK_THROWS_AS(load_env_spec(testutil::tmp_path("missing.cfg")), std::runtime_error);
}

TEST_CASE("env_step: drift, clamp, noise bookkeeping, reward rule") {
    EnvSpec spec = planeworld();
    spec.noise_std = 0.0;
    Rng rng(1);

    // Zero action, zero noise: state unchanged.
    const std::vector<double> state = {0.25, -0.5};
    const StepResult still = env_step(spec, state, {0.0, 0.0}, rng);
    CHECK(still.next_state == state);
    CHECK(still.reward ==
          doctest::Approx(1.0 - std::hypot(0.25 - 0.7, -0.5 - 0.7) / env_diameter(spec)));

    // At the goal with no movement: reward exactly 1.
    const StepResult at_goal = env_step(spec, spec.goal, {0.0, 0.0}, rng);
    CHECK(at_goal.reward == doctest::Approx(1.0));

    // Action components clamp to [-1, 1]; states clamp to the box.
    const StepResult pushed = env_step(spec, {0.99, 0.0}, {5.0, 0.0}, rng);
    CHECK(pushed.next_state[0] == doctest::Approx(1.0));  // 0.99 + 0.1 clamped
    CHECK(pushed.next_state[1] == doctest::Approx(0.0));

    // Reward never exceeds 1.
    Rng noisy_rng(2);
    EnvSpec noisy = planeworld();
    for (int i = 0; i < 200; ++i) {
        const StepResult r =
            env_step(noisy, {noisy_rng.uniform(-1.0, 1.0), noisy_rng.uniform(-1.0, 1.0)},
                     {noisy_rng.uniform(-2.0, 2.0), noisy_rng.uniform(-2.0, 2.0)}, noisy_rng);
        CHECK(r.reward <= 1.0);
        CHECK(r.reward > -1.0);
        CHECK(std::abs(r.next_state[0]) <= 1.0);
        CHECK(std::abs(r.next_state[1]) <= 1.0);
    }

    // Zero-noise steps draw nothing from the rng.
    Rng counting(3);
    const std::uint64_t first = Rng(3).next_u64();
    env_step(spec, state, {0.1, 0.1}, counting);
    CHECK(counting.next_u64() == first);

    CHECK_THROWS_AS(env_step(spec, {0.0}, {0.0, 0.0}, rng), std::invalid_argument);
}

namespace {

bool inside_box(const std::vector<double>& s, const std::vector<double>& center,
                double spread) {
    for (std::size_t d = 0; d < s.size(); ++d) {
        if (s[d] < std::max(center[d] - spread, -1.0)) return false;
        if (s[d] > std::min(center[d] + spread, 1.0)) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("start states sit inside center +- spread, clamped to the box") {
    EnvSpec spec = planeworld();
    spec.goal_start_fraction = 0.0;
    Rng rng(4);
    for (int i = 0; i < 500; ++i) {
        const std::vector<double> s = sample_start_state(spec, rng);
        REQUIRE(s.size() == 2);
        CHECK(inside_box(s, spec.start_center, spec.start_spread));
    }

    // Zero mixing fraction consumes exactly dim uniforms per start.
    Rng counted(11), manual(11);
    sample_start_state(spec, counted);
    manual.uniform(0.0, 1.0);
    manual.uniform(0.0, 1.0);
    CHECK(counted.next_u64() == manual.next_u64());

    EnvSpec edge = spec;
    edge.start_center = {-1.0, -1.0};
    edge.start_spread = 0.5;
    for (int i = 0; i < 200; ++i) {
        const std::vector<double> s = sample_start_state(edge, rng);
        CHECK(s[0] >= -1.0);
        CHECK(s[1] >= -1.0);
    }
}

TEST_CASE("a goal_start_fraction of starts spawn inside the goal box") {
    EnvSpec spec = planeworld();
    spec.goal_start_fraction = 0.25;
    Rng rng(12);
    int near_goal = 0;
    const int n = 5000;
    for (int i = 0; i < n; ++i) {
        const std::vector<double> s = sample_start_state(spec, rng);
        const bool in_start = inside_box(s, spec.start_center, spec.start_spread);
        const bool in_goal = inside_box(s, spec.goal, spec.start_spread);
        REQUIRE((in_start || in_goal));
        if (in_goal) ++near_goal;
    }
    // Frequency matches the mixing weight within 3 sigma.
    const double freq = static_cast<double>(near_goal) / n;
    const double sigma = std::sqrt(spec.goal_start_fraction * (1.0 - spec.goal_start_fraction) / n);
    CHECK(std::abs(freq - spec.goal_start_fraction) < 3.0 * sigma);

    EnvSpec bad = spec;
    bad.goal_start_fraction = 1.5;
    CHECK_THROWS_AS(validate_env(bad), std::invalid_argument);
    bad.goal_start_fraction = -0.1;
    CHECK_THROWS_AS(validate_env(bad), std::invalid_argument);
}

TEST_CASE("behavior_action blends goal pursuit with uniform noise") {
    const std::vector<double> goal = {0.5, 0.5};
    Rng rng(5);

    // quality 1: always the unit step toward the goal.
    for (int i = 0; i < 50; ++i) {
        const auto a = behavior_action(1.0, {-0.5, 0.5}, goal, rng);
        CHECK(a[0] == doctest::Approx(1.0));
        CHECK(a[1] == doctest::Approx(0.0));
    }
    // At the goal the directed action is zero.
    const auto stay = behavior_action(1.0, goal, goal, rng);
    CHECK(stay[0] == 0.0);
    CHECK(stay[1] == 0.0);

    // quality 0: uniform in the box.
    for (int i = 0; i < 200; ++i) {
        const auto a = behavior_action(0.0, {0.0, 0.0}, goal, rng);
        CHECK(std::abs(a[0]) <= 1.0);
        CHECK(std::abs(a[1]) <= 1.0);
    }

    CHECK_THROWS_AS(behavior_action(1.5, {0.0, 0.0}, goal, rng), std::invalid_argument);
    CHECK_THROWS_AS(behavior_action(0.5, {0.0}, goal, rng), std::invalid_argument);
}

TEST_CASE("mean return increases strictly with behavior quality") {
    const EnvSpec spec = planeworld();
    double previous = -1e9;
    for (double p : {0.1, 0.5, 0.9}) {
        double total = 0.0;
        for (int e = 0; e < 1000; ++e) {
            Rng rng = Rng::stream(123, streams::kDatagen, static_cast<std::uint64_t>(e));
            total += rollout_behavior(spec, p, rng).total_return();
        }
        const double mean = total / 1000.0;
        CHECK(mean > previous);
        previous = mean;
    }
}

TEST_CASE("make_recipe spreads remainders over the earlier components") {
    const EnvSpec spec = planeworld();
    const DatasetRecipe r = make_recipe(spec, "medium-replay", 7, 1);
    REQUIRE(r.mixture.size() == 5);
    CHECK(r.mixture[0].quality == doctest::Approx(0.1));
    CHECK(r.mixture[0].count == 2);
    CHECK(r.mixture[1].count == 2);
    CHECK(r.mixture[2].count == 1);
    CHECK(r.mixture[4].count == 1);

    const DatasetRecipe medium = make_recipe(spec, "medium", 3, 1);
    REQUIRE(medium.mixture.size() == 1);
    CHECK(medium.mixture[0].quality == doctest::Approx(0.4));
    CHECK(medium.mixture[0].count == 3);

    const DatasetRecipe me = make_recipe(spec, "medium-expert", 5, 1);
    REQUIRE(me.mixture.size() == 2);
    CHECK(me.mixture[0].count == 3);
    CHECK(me.mixture[1].quality == doctest::Approx(1.0));
    CHECK(me.mixture[1].count == 2);

    CHECK_THROWS_AS(make_recipe(spec, "bogus", 5, 1), std::invalid_argument);
    CHECK_THROWS_AS(make_recipe(spec, "medium", 0, 1), std::invalid_argument);
}

TEST_CASE("generated datasets are reproducible and fixed-horizon") {
    EnvSpec spec = lineworld();
    const DatasetRecipe recipe = make_recipe(spec, "medium-replay", 25, 9);
    const OfflineDataset a = generate_dataset(recipe);
    const OfflineDataset b = generate_dataset(recipe);

    REQUIRE(a.size() == 25);
    CHECK(a.horizon == spec.horizon);
    for (const auto& traj : a.trajectories)
        CHECK(traj.length() == static_cast<std::size_t>(spec.horizon));

    const std::string pa = testutil::tmp_path("gen_a.jsonl");
    const std::string pb = testutil::tmp_path("gen_b.jsonl");
    save_dataset(a, pa);
    save_dataset(b, pb);
    CHECK(testutil::read_file(pa) == testutil::read_file(pb));

    // Round trip through the loader is bit exact.
    const OfflineDataset loaded = load_dataset(pa);
    const std::string pc = testutil::tmp_path("gen_c.jsonl");
    save_dataset(loaded, pc);
    CHECK(testutil::read_file(pa) == testutil::read_file(pc));
}

TEST_CASE("expert beats random on the shipped specs, reproducibly") {
    for (const EnvSpec& spec : {planeworld(), lineworld()}) {
        const ReferenceReturns refs = reference_returns(spec, 50, 7);
        CHECK(refs.expert_ref > refs.random_ref);
        const ReferenceReturns again = reference_returns(spec, 50, 7);
        CHECK(refs.expert_ref == again.expert_ref);
        CHECK(refs.random_ref == again.random_ref);
    }
    CHECK_THROWS_AS(reference_returns(planeworld(), 0, 7), std::invalid_argument);
}

TEST_CASE("med-replay returns concentrate below the expert reference") {
    const EnvSpec spec = planeworld();
    const DatasetRecipe recipe = make_recipe(spec, "medium-replay", 2000, 42);
    const OfflineDataset ds = generate_dataset(recipe);
    const ReferenceReturns refs = reference_returns(spec, 100, 7);
    CHECK(ds.stats.percentile(90) < 0.9 * refs.expert_ref);
}

TEST_CASE("a single expert trajectory pins the dataset maximum") {
    EnvSpec spec = lineworld();
    DatasetRecipe recipe;
    recipe.env = spec;
    recipe.seed = 3;
    recipe.mixture = {{1.0, 1}};
    const OfflineDataset ds = generate_dataset(recipe);
    REQUIRE(ds.size() == 1);
    CHECK(ds.stats.max_return == doctest::Approx(ds.trajectories[0].total_return()));
}
