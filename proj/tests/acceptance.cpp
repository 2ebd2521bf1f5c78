// End-to-end acceptance battery. Each numbered check prints one [PASS] line
// with its measured values; the first violation prints [FAIL] and exits
// nonzero. Build with the library, run with CWBC_BIN pointing at the CLI.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "cwbc/conservatism.hpp"
#include "cwbc/dataset.hpp"
#include "cwbc/env.hpp"
#include "cwbc/evaluator.hpp"
#include "cwbc/nn.hpp"
#include "cwbc/oracle.hpp"
#include "cwbc/policy.hpp"
#include "cwbc/trainer.hpp"
#include "cwbc/weighting.hpp"

using namespace cwbc;

#define REQUIRE(cond, msg)                                                          \
    do {                                                                            \
        if (!(cond)) {                                                              \
            std::cerr << "[FAIL] " << __FILE__ << ":" << __LINE__ << " " << msg     \
                      << "\n";                                                      \
            std::exit(1);                                                           \
        }                                                                           \
    } while (0)

namespace {

double seconds_since(const std::chrono::steady_clock::time_point& start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(double v) {
    std::ostringstream out;
    out << v;
    return out.str();
}

// The shared workload: the medium-replay planeworld fixture, trained at full
// scale for three variants over five seeds, swept over the target grid.
struct TrendRun {
    std::vector<double> base_ratio, wc_ratio, fc_ratio;  // return at 2x best / best sweep mean
    std::vector<double> wc_std2x, fc_std2x;              // episode-return spread at the 2x target
    double seconds = 0.0;
};

TrendRun run_trend_block(const OfflineDataset& dataset, const EnvSpec& spec) {
    const auto start = std::chrono::steady_clock::now();
    TrendRun out;

    TrainConfig cfg;
    cfg.iterations = 20000;
    cfg.batch_size = 64;
    cfg.hidden_sizes = {64, 64};

    EvalConfig eval;
    eval.episodes = 10;
    eval.seed = 99;

    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        for (const Variant v : {Variant::kBase, Variant::kWC, Variant::kFC}) {
            TrainConfig c = cfg;
            c.variant = v;
            c.seed = seed;
            const TrainResult trained = train(dataset, c);
            const ReliabilityCurve curve = sweep_targets(trained.policy, spec, trained.r_star, eval);
            const double ratio = ood_drop_ratio(curve);
            double std2x = 0.0;
            for (const auto& p : curve.points)
                if (p.basis == "max" && p.multiplier == 2.0) std2x = p.stddev;
            if (v == Variant::kBase) out.base_ratio.push_back(ratio);
            if (v == Variant::kWC) {
                out.wc_ratio.push_back(ratio);
                out.wc_std2x.push_back(std2x);
            }
            if (v == Variant::kFC) {
                out.fc_ratio.push_back(ratio);
                out.fc_std2x.push_back(std2x);
            }
        }
    }
    out.seconds = seconds_since(start);
    return out;
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

std::string join(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += " ";
        s += fmt(v[i]);
    }
    return s;
}

int run_cmd(const std::string& cmd) { return std::system(cmd.c_str()); }

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good(), "cannot read " << path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Drops the final column of every row; the training log's last column is
// wall-clock milliseconds, the one deliberately non-reproducible output.
std::string strip_last_column(const std::string& csv) {
    std::istringstream in(csv);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line)) {
        const auto comma = line.rfind(',');
        out << (comma == std::string::npos ? line : line.substr(0, comma)) << '\n';
    }
    return out.str();
}

}  // namespace

int main() {
    const EnvSpec spec = planeworld();
    const OfflineDataset fixture =
        generate_dataset(make_recipe(spec, "medium-replay", 2000, 42));

    // ------------------------------------------------------------------ 1
    {
        const auto start = std::chrono::steady_clock::now();
        const double kappa =
            fixture.stats.max_return - fixture.stats.percentile(90);
        BinLayout layout = build_bins(fixture, 20);
        apply_bin_probabilities(layout, 0.01, kappa, fixture.stats.max_return);
        const std::vector<double> reference = oracle::reference_bin_probabilities(
            layout.frequency, layout.mean_return, 0.01, kappa, fixture.stats.max_return);

        const long draws = 200000;
        std::vector<double> counts(layout.num_bins(), 0.0);
        std::vector<int> bin_of(fixture.size());
        for (std::size_t b = 0; b < layout.num_bins(); ++b)
            for (std::size_t idx : layout.bins[b]) bin_of[idx] = static_cast<int>(b);
        Rng rng(2024);
        for (long i = 0; i < draws; ++i) counts[static_cast<std::size_t>(
            bin_of[sample_trajectory(layout, rng)])] += 1.0;
        double tv = 0.0;
        for (std::size_t b = 0; b < layout.num_bins(); ++b)
            tv += std::abs(counts[b] / static_cast<double>(draws) - reference[b]);
        tv *= 0.5;
        const double secs = seconds_since(start);
        REQUIRE(tv <= 0.01, "sampler total variation " << tv << " > 0.01");
        REQUIRE(secs < 10.0, "sampler check took " << secs << " s (budget 10)");
        std::cout << "[PASS] 1. trajectory sampler follows the stated bin law: tv=" << tv
                  << " over 200k draws, B=20, " << secs << " s\n";
    }

    // ------------------------------------------------------------------ 2
    {
        BinLayout layout = build_bins(fixture, 20);
        const double kappa =
            fixture.stats.max_return - fixture.stats.percentile(90);
        const double r_star = fixture.stats.max_return;

        // lambda = 0: frequencies drop out entirely.
        const auto p0 = bin_probabilities(layout, 0.0, kappa, r_star);
        double norm = 0.0;
        std::vector<double> expect(layout.num_bins());
        for (std::size_t b = 0; b < layout.num_bins(); ++b) {
            expect[b] = std::exp(-std::abs(layout.mean_return[b] - r_star) / kappa);
            norm += expect[b];
        }
        double worst0 = 0.0;
        for (std::size_t b = 0; b < layout.num_bins(); ++b)
            worst0 = std::max(worst0, std::abs(p0[b] - expect[b] / norm) /
                                          std::max(expect[b] / norm, 1e-300));
        REQUIRE(worst0 <= 1e-12, "lambda=0 identity off by " << worst0);

        // lambda huge: weights become frequency * tilt.
        const auto p9 = bin_probabilities(layout, 1e9, kappa, r_star);
        norm = 0.0;
        for (std::size_t b = 0; b < layout.num_bins(); ++b) {
            expect[b] = layout.frequency[b] *
                        std::exp(-std::abs(layout.mean_return[b] - r_star) / kappa);
            norm += expect[b];
        }
        double worst9 = 0.0;
        for (std::size_t b = 0; b < layout.num_bins(); ++b)
            worst9 = std::max(worst9, std::abs(p9[b] - expect[b] / norm) /
                                          std::max(expect[b] / norm, 1e-300));
        REQUIRE(worst9 <= 1e-6, "lambda=1e9 identity off by " << worst9);
        std::cout << "[PASS] 2. weighting limit identities: lambda=0 rel err " << worst0
                  << ", lambda=1e9 rel err " << worst9 << "\n";
    }

    // ------------------------------------------------------------------ 3
    {
        const auto start = std::chrono::steady_clock::now();
        Rng data_rng(77);
        double worst = 0.0;
        for (int trial = 0; trial < 24; ++trial) {
            // Small randomized dataset; returns vary so some trajectories
            // clear the regularizer threshold.
            OfflineDataset ds;
            ds.horizon = 5;
            ds.state_dim = 2;
            ds.action_dim = 2;
            for (int k = 0; k < 6; ++k) {
                Trajectory traj;
                traj.transitions.resize(5);
                for (auto& tr : traj.transitions) {
                    tr.state = {data_rng.uniform(-1.0, 1.0), data_rng.uniform(-1.0, 1.0)};
                    tr.action = {data_rng.uniform(-1.0, 1.0), data_rng.uniform(-1.0, 1.0)};
                    tr.reward = data_rng.uniform(0.0, 1.0);
                }
                ds.trajectories.push_back(std::move(traj));
            }
            finalize_dataset(ds);

            const std::vector<int> hidden = trial % 3 == 0 ? std::vector<int>{8}
                                                           : std::vector<int>{8, 8};
            RvsPolicy policy =
                make_policy(2, 2, 5, hidden, 0.0, 1000 + static_cast<std::uint64_t>(trial));
            fit_state_standardization(policy, ds);
            const std::vector<std::size_t> batch = {0, 1, 2, 3, 4, 5};
            Rng noise_rng(3000 + static_cast<std::uint64_t>(trial));
            const ConservativeBatch cons =
                build_conservative_batch(policy, ds, batch, ds.stats.percentile(50),
                                         ds.stats.max_return, 1.0, noise_rng);

            GradientSet grads;
            combined_objective_frozen(policy, ds, batch, 1.0, cons, {}, &grads);
            const std::vector<double> analytic = flatten_gradients(grads);

            RvsPolicy probe = policy;
            auto loss_fn = [&](const std::vector<double>& params) {
                set_parameters(probe.net, params);
                return combined_objective_frozen(probe, ds, batch, 1.0, cons).total;
            };
            const std::vector<double> fd = oracle::central_difference_gradient(
                loss_fn, flatten_parameters(policy.net), 1e-5);

            double num = 0.0, den = 0.0;
            for (std::size_t i = 0; i < fd.size(); ++i) {
                num += (analytic[i] - fd[i]) * (analytic[i] - fd[i]);
                den += fd[i] * fd[i];
            }
            worst = std::max(worst, std::sqrt(num) / std::max(std::sqrt(den), 1e-12));
        }
        const double secs = seconds_since(start);
        REQUIRE(worst <= 1e-4, "objective gradient vs finite differences: " << worst);
        REQUIRE(secs < 60.0, "gradient check took " << secs << " s (budget 60)");
        std::cout << "[PASS] 3. objective gradient matches central differences: rel err "
                  << worst << " over 24 fuzzed nets, " << secs << " s\n";
    }

    // ------------------------------------------------------------------ 4
    {
        const auto start = std::chrono::steady_clock::now();
        Rng fuzz(55);
        double worst_std_gap = 0.0;
        long total_draws = 0;
        for (int fixture_i = 0; fixture_i < 5; ++fixture_i) {
            const double r_star = fuzz.uniform(10.0, 100.0);
            const double r_tau = r_star - fuzz.uniform(0.5, 30.0);
            const double sigma = fuzz.uniform(0.1, 20.0);
            const NoiseBounds bounds = noise_bounds(r_tau, r_star, sigma);
            Rng draw_rng(900 + static_cast<std::uint64_t>(fixture_i));
            const oracle::SampleMoments m =
                oracle::noise_sample_moments(bounds, 1000000, draw_rng);
            total_draws += m.count;
            // Exact in offset space: every draw inside [lower, upper].
            REQUIRE(m.min >= bounds.lower && m.max <= bounds.upper,
                    "offset left its stated interval");
            // Shifted return stays inside [r_star, r_star + sqrt(12) sigma];
            // the slack only absorbs floating-point re-association.
            REQUIRE(r_tau + m.min >= r_star - 1e-9,
                    "perturbed return fell below the best return");
            REQUIRE(r_tau + m.max <= r_star + std::sqrt(12.0) * sigma + 1e-9,
                    "perturbed return exceeded the stated ceiling");
            worst_std_gap = std::max(worst_std_gap, std::abs(m.stddev - sigma) / sigma);
        }
        const double secs = seconds_since(start);
        REQUIRE(worst_std_gap <= 0.02,
                "offset std off by " << worst_std_gap << " relative");
        REQUIRE(secs < 30.0, "support check took " << secs << " s (budget 30)");
        std::cout << "[PASS] 4. conditioning offsets respect support and spread: "
                  << total_draws << " draws, worst std gap " << worst_std_gap << ", " << secs
                  << " s\n";
    }

    // ------------------------------------------------------------------ 5
    {
        // (a) no qualifying trajectory => regularizer exactly zero.
        OfflineDataset low;
        low.horizon = 3;
        low.state_dim = 1;
        low.action_dim = 1;
        for (int k = 0; k < 4; ++k) {
            Trajectory traj;
            traj.transitions.resize(3);
            for (auto& tr : traj.transitions) {
                tr.state = {0.1 * k};
                tr.action = {0.2};
                tr.reward = 1.0;  // identical returns: nothing is strictly above the cutoff
            }
            low.trajectories.push_back(std::move(traj));
        }
        finalize_dataset(low);
        RvsPolicy policy = make_policy(1, 1, 3, {4}, 0.0, 9);
        fit_state_standardization(policy, low);
        ConservatismConfig cons;
        cons.percentile_q = 95;
        cons.noise_std = 1.0;
        cons.alpha = 1.0;
        Rng noise(5);
        const double c =
            conservative_loss(policy, low, {0, 1, 2, 3}, cons, low.stats, noise);
        REQUIRE(c == 0.0, "empty-qualifier regularizer returned " << c);

        // (b) alpha = 0 reduces to plain imitation, gradient for gradient.
        Rng ds_rng(31);
        OfflineDataset ds;
        ds.horizon = 4;
        ds.state_dim = 2;
        ds.action_dim = 2;
        for (int k = 0; k < 6; ++k) {
            Trajectory traj;
            traj.transitions.resize(4);
            for (auto& tr : traj.transitions) {
                tr.state = {ds_rng.uniform(-1.0, 1.0), ds_rng.uniform(-1.0, 1.0)};
                tr.action = {ds_rng.uniform(-1.0, 1.0), ds_rng.uniform(-1.0, 1.0)};
                tr.reward = ds_rng.uniform(0.0, 1.0);
            }
            ds.trajectories.push_back(std::move(traj));
        }
        finalize_dataset(ds);
        RvsPolicy p2 = make_policy(2, 2, 4, {8}, 0.0, 17);
        fit_state_standardization(p2, ds);
        const std::vector<std::size_t> batch = {0, 1, 2, 3, 4, 5};

        ConservatismConfig zero = cons;
        zero.alpha = 0.0;
        Rng noise2(8);
        GradientSet combined_grads;
        const ObjectiveResult r =
            combined_objective(p2, ds, batch, zero, ds.stats, noise2, {}, &combined_grads);
        GradientSet bc_grads;
        const double bc = bc_loss(p2, ds, batch, {}, &bc_grads);
        REQUIRE(r.conservative == 0.0, "alpha=0 left a regularizer residue");
        REQUIRE(r.total == bc, "alpha=0 objective differs from plain imitation");
        const std::vector<double> a = flatten_gradients(combined_grads);
        const std::vector<double> b = flatten_gradients(bc_grads);
        for (std::size_t i = 0; i < a.size(); ++i)
            REQUIRE(a[i] == b[i], "alpha=0 gradient differs at coordinate " << i);
        std::cout << "[PASS] 5. gating reductions: empty qualifier set gives exactly 0, "
                     "alpha=0 matches plain imitation bit for bit ("
                  << a.size() << " coordinates)\n";
    }

    // ------------------------------------------------------------------ 6
    {
        RvsPolicy policy = make_policy(spec.dim, spec.dim, spec.horizon, {8}, 0.0, 3);
        fit_state_standardization(policy, fixture);
        long rollouts = 0, steps = 0;
        for (int e = 0; e < 1200; ++e) {
            Rng rng = Rng::stream(42, streams::kRollout, static_cast<std::uint64_t>(e));
            RolloutTrace trace;
            const double target = 0.05 * static_cast<double>(e % 700);
            rollout_conditioned(policy, spec, target, rng, &trace);
            REQUIRE(trace.steps.size() == static_cast<std::size_t>(spec.horizon),
                    "rollout step count mismatch");
            double remaining = target;
            for (int t = 1; t <= spec.horizon; ++t) {
                const auto& step = trace.steps[static_cast<std::size_t>(t - 1)];
                const double expect = remaining / static_cast<double>(spec.horizon - t + 1);
                REQUIRE(step.omega == expect,
                        "conditioning scalar drifted at rollout " << e << " step " << t);
                remaining -= step.reward;
                ++steps;
            }
            ++rollouts;
        }
        std::cout << "[PASS] 6. remaining-return bookkeeping exact: " << rollouts
                  << " rollouts, " << steps << " steps, zero drift\n";
    }

    // ------------------------------------------------------------- 7 and 8
    const TrendRun trend = run_trend_block(fixture, spec);
    {
        int wins = 0;
        for (std::size_t i = 0; i < 5; ++i)
            if (trend.wc_ratio[i] > trend.base_ratio[i]) ++wins;
        const double wc_mean = mean_of(trend.wc_ratio);
        REQUIRE(wins >= 4, "re-weighting + regularizer held its out-of-range return above "
                           "plain conditioning in only "
                               << wins << "/5 seeds (base: " << join(trend.base_ratio)
                               << "; wc: " << join(trend.wc_ratio) << ")");
        REQUIRE(wc_mean >= 0.8, "wc out-of-range ratio mean " << wc_mean << " < 0.8");
        REQUIRE(trend.seconds < 900.0,
                "trend block took " << trend.seconds << " s (budget 900)");
        std::cout << "[PASS] 7. out-of-range crash and rescue: base ratios ["
                  << join(trend.base_ratio) << "], wc ratios [" << join(trend.wc_ratio)
                  << "], wins " << wins << "/5, wc mean " << wc_mean << ", "
                  << trend.seconds << " s for the shared 15-training block\n";
    }
    {
        const OfflineDataset kept = filter_top_fraction(fixture, 0.1);
        const std::size_t expect =
            static_cast<std::size_t>(std::ceil(0.1 * static_cast<double>(fixture.size())));
        REQUIRE(kept.size() == expect,
                "top-fraction filter kept " << kept.size() << " of " << fixture.size());
        // Everything kept outranks everything dropped.
        double kept_min = kept.trajectories.front().total_return();
        for (const auto& t : kept.trajectories)
            kept_min = std::min(kept_min, t.total_return());
        std::vector<double> all = dataset_returns(fixture);
        std::sort(all.begin(), all.end());
        const double cutoff = all[all.size() - expect];
        REQUIRE(kept_min >= cutoff, "filter kept a below-cutoff trajectory");

        const double fc_std = mean_of(trend.fc_std2x);
        const double wc_std = mean_of(trend.wc_std2x);
        REQUIRE(fc_std > wc_std, "filtering variant came out steadier than re-weighting: fc "
                                     << fc_std << " vs wc " << wc_std);
        std::cout << "[PASS] 8. hard filtering: keeps exactly " << expect
                  << " top trajectories; out-of-range return spread fc [" << join(trend.fc_std2x)
                  << "] mean " << fc_std << " > wc [" << join(trend.wc_std2x) << "] mean "
                  << wc_std << "\n";
    }

    // ------------------------------------------------------------------ 9
    {
        const char* bin = std::getenv("CWBC_BIN");
        REQUIRE(bin != nullptr, "CWBC_BIN must point at the command-line binary");
        namespace fs = std::filesystem;
        const fs::path root = fs::temp_directory_path() / "cwbc-acceptance";
        fs::remove_all(root);
        const fs::path a = root / "a", b = root / "b";
        fs::create_directories(a);
        fs::create_directories(b);

        const std::vector<std::string> commands = {
            std::string(bin) + " gen-data --env lineworld --mixture medium-replay --n 80"
                               " --seed 5 --out data.jsonl",
            std::string(bin) + " train --data data.jsonl --variant wc --iterations 400"
                               " --batch-size 16 --hidden 16 --bins 5 --seed 3"
                               " --out policy.json --log train_log.csv",
            std::string(bin) + " sweep --ckpt policy.json --env lineworld --episodes 3"
                               " --seed 9 --out sweep.csv",
            std::string(bin) + " report-hist --data data.jsonl --bins 5 --out hist.csv",
            std::string(bin) + " verify --seed 11 --out verify.csv",
        };
        for (const auto& dir : {a, b})
            for (const auto& cmd : commands) {
                const int rc = run_cmd("cd " + dir.string() + " && " + cmd + " > /dev/null");
                REQUIRE(rc == 0, "command failed: " << cmd);
            }

        const std::vector<std::string> identical = {
            "data.jsonl",        "policy.json", "sweep.csv",
            "hist.csv",          "verify.csv",  "data.jsonl.manifest.json",
            "policy.json.manifest.json", "sweep.csv.manifest.json"};
        for (const auto& name : identical)
            REQUIRE(slurp((a / name).string()) == slurp((b / name).string()),
                    name << " differs between identical runs");
        REQUIRE(strip_last_column(slurp((a / "train_log.csv").string())) ==
                    strip_last_column(slurp((b / "train_log.csv").string())),
                "train_log.csv differs beyond its wall-clock column");
        std::cout << "[PASS] 9. replays are byte-identical: " << identical.size()
                  << " files compared, training log equal up to wall-clock\n";
    }

    std::cout << "all acceptance checks passed\n";
    return 0;
}
