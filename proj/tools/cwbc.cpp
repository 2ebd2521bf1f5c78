// Command line front end: dataset generation, training, evaluation, sweeps,
// variant comparisons, ablations, histogram reports, and the verification
// battery. Every command writes a manifest next to its outputs.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cwbc/csv.hpp"
#include "cwbc/dataset.hpp"
#include "cwbc/env.hpp"
#include "cwbc/evaluator.hpp"
#include "cwbc/oracle.hpp"
#include "cwbc/policy.hpp"
#include "cwbc/report.hpp"
#include "cwbc/trainer.hpp"
#include "cwbc/weighting.hpp"

namespace fs = std::filesystem;
using namespace cwbc;

namespace {

// CWBC_SEED beats both config files and flags.
void apply_env_seed(std::uint64_t& seed) {
    const char* env = std::getenv("CWBC_SEED");
    if (!env) return;
    try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(env, &used);
        if (used != std::string(env).size()) throw std::invalid_argument("");
        seed = v;
    } catch (const std::exception&) {
        throw std::invalid_argument("CWBC_SEED must be an unsigned integer, got: " +
                                    std::string(env));
    }
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    for (const auto& cell : split_csv_line(text)) seeds.push_back(std::stoull(cell));
    if (seeds.empty()) throw std::invalid_argument("empty seed list");
    return seeds;
}

std::vector<double> parse_doubles(const std::string& text) {
    std::vector<double> values;
    for (const auto& cell : split_csv_line(text)) values.push_back(parse_double(cell));
    if (values.empty()) throw std::invalid_argument("empty value list");
    return values;
}

std::vector<int> parse_ints(const std::string& text) {
    std::vector<int> values;
    for (const auto& cell : split_csv_line(text)) values.push_back(std::stoi(cell));
    return values;
}

std::vector<Variant> parse_variants(const std::string& text) {
    std::vector<Variant> variants;
    for (const auto& cell : split_csv_line(text)) variants.push_back(variant_from_string(cell));
    if (variants.empty()) throw std::invalid_argument("empty variant list");
    return variants;
}

void ensure_parent_dir(const std::string& path) {
    const fs::path parent = fs::path(path).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
}

// Shared train-flag bundle; train, compare and ablate all accept these.
struct TrainFlags {
    std::string variant = "base";
    long iterations = 20000;
    int batch_size = 64;
    std::string hidden = "64,64";
    double dropout = 0.0;
    double learning_rate = 1e-3;
    double weight_decay = 1e-4;
    int bins = 20;
    double lambda = 0.01;
    double kappa = 0.0;  // 0 = use the percentile-gap rule
    int kappa_percentile = 90;
    int q = 95;
    double sigma = 0.0;  // 0 = dataset default
    double alpha = 1.0;
    double filter_fraction = 0.1;
    std::string reduction = "traj";
    int max_timesteps = 0;
    std::uint64_t seed = 0;
    long log_interval = 100;
};

void add_train_flags(CLI::App* cmd, TrainFlags& f) {
    cmd->add_option("--variant", f.variant, "base|w|c|wc|f|fc");
    cmd->add_option("--iterations", f.iterations, "gradient steps");
    cmd->add_option("--batch-size", f.batch_size, "trajectories per step");
    cmd->add_option("--hidden", f.hidden, "hidden layer sizes, e.g. 64,64");
    cmd->add_option("--dropout", f.dropout, "dropout rate");
    cmd->add_option("--learning-rate", f.learning_rate, "Adam learning rate");
    cmd->add_option("--weight-decay", f.weight_decay, "decoupled weight decay");
    cmd->add_option("--bins", f.bins, "return bins for re-weighting");
    cmd->add_option("--lambda", f.lambda, "low-frequency suppression");
    cmd->add_option("--kappa", f.kappa, "explicit temperature (overrides percentile rule)");
    cmd->add_option("--kappa-percentile", f.kappa_percentile,
                    "temperature = best return minus this return percentile");
    cmd->add_option("--q", f.q, "return percentile gating the regularizer");
    cmd->add_option("--sigma", f.sigma, "offset spread (0 = best minus median return)");
    cmd->add_option("--alpha", f.alpha, "regularizer weight");
    cmd->add_option("--filter-fraction", f.filter_fraction, "kept fraction for f/fc");
    cmd->add_option("--reduction", f.reduction, "traj|flat batch reduction");
    cmd->add_option("--max-timesteps", f.max_timesteps, "cap rows per trajectory (0 = all)");
    cmd->add_option("--seed", f.seed, "master seed");
    cmd->add_option("--log-interval", f.log_interval, "iterations between log rows");
}

TrainConfig build_train_config(const TrainFlags& f) {
    TrainConfig cfg;
    cfg.variant = variant_from_string(f.variant);
    cfg.iterations = f.iterations;
    cfg.batch_size = f.batch_size;
    cfg.hidden_sizes = parse_ints(f.hidden);
    cfg.dropout = f.dropout;
    cfg.optimizer.learning_rate = f.learning_rate;
    cfg.optimizer.weight_decay = f.weight_decay;
    cfg.weighting.num_bins = f.bins;
    cfg.weighting.lambda = f.lambda;
    cfg.weighting.kappa = f.kappa > 0.0 ? KappaSpec::explicit_value(f.kappa)
                                        : KappaSpec::percentile_gap(f.kappa_percentile);
    cfg.conservatism.percentile_q = f.q;
    cfg.conservatism.noise_std = f.sigma;
    cfg.conservatism.alpha = f.alpha;
    cfg.filter_fraction = f.filter_fraction;
    if (f.reduction == "traj") cfg.reduction = BatchReduction::kPerTrajectoryMean;
    else if (f.reduction == "flat") cfg.reduction = BatchReduction::kFlatTimestepMean;
    else throw std::invalid_argument("unknown reduction: " + f.reduction);
    cfg.max_timesteps_per_traj = f.max_timesteps;
    cfg.seed = f.seed;
    cfg.log_interval = f.log_interval;
    return cfg;
}

nlohmann::json train_config_json(const TrainConfig& cfg) {
    nlohmann::json j;
    j["variant"] = variant_name(cfg.variant);
    j["iterations"] = cfg.iterations;
    j["batch_size"] = cfg.batch_size;
    j["hidden"] = cfg.hidden_sizes;
    j["dropout"] = cfg.dropout;
    j["learning_rate"] = cfg.optimizer.learning_rate;
    j["weight_decay"] = cfg.optimizer.weight_decay;
    j["reduction"] =
        cfg.reduction == BatchReduction::kPerTrajectoryMean ? "traj" : "flat";
    j["max_timesteps"] = cfg.max_timesteps_per_traj;
    j["seed"] = cfg.seed;
    if (variant_uses_weighting(cfg.variant)) {
        j["bins"] = cfg.weighting.num_bins;
        j["lambda"] = cfg.weighting.lambda;
        if (cfg.weighting.kappa.is_explicit) j["kappa"] = cfg.weighting.kappa.value;
        else j["kappa_percentile"] = cfg.weighting.kappa.z;
    }
    if (variant_uses_conservatism(cfg.variant)) {
        j["q"] = cfg.conservatism.percentile_q;
        j["sigma"] = cfg.conservatism.noise_std;
        j["alpha"] = cfg.conservatism.alpha;
    }
    if (variant_uses_filtering(cfg.variant)) j["filter_fraction"] = cfg.filter_fraction;
    return j;
}

// "expert", "expert:2", "max:1.5", "absolute:25".
double resolve_target(const std::string& spec_text, double r_star, double expert_ref,
                      bool have_r_star) {
    std::string basis = spec_text;
    double value = 1.0;
    const auto colon = spec_text.find(':');
    if (colon != std::string::npos) {
        basis = spec_text.substr(0, colon);
        value = parse_double(spec_text.substr(colon + 1));
    }
    if (basis == "expert") return value * expert_ref;
    if (basis == "max") {
        if (!have_r_star)
            throw std::invalid_argument("target basis 'max' needs a checkpoint with recorded "
                                        "best dataset return");
        return value * r_star;
    }
    if (basis == "absolute") {
        if (colon == std::string::npos)
            throw std::invalid_argument("target 'absolute' needs a value, e.g. absolute:25");
        return value;
    }
    throw std::invalid_argument("unknown target basis: " + basis);
}

int run_gen_data(const std::string& env_name, const std::string& mixture, std::size_t n,
                 std::uint64_t seed, const std::string& out) {
    apply_env_seed(seed);
    const EnvSpec spec = resolve_env(env_name);
    const DatasetRecipe recipe = make_recipe(spec, mixture, n, seed);
    const OfflineDataset ds = generate_dataset(recipe);
    ensure_parent_dir(out);
    save_dataset(ds, out);

    RunManifest manifest;
    manifest.command = "gen-data";
    manifest.seed = seed;
    manifest.config = {{"env", spec.name},       {"mixture", mixture},
                       {"trajectories", n},      {"horizon", spec.horizon},
                       {"dim", spec.dim},        {"step_size", spec.step_size},
                       {"noise_std", spec.noise_std}};
    manifest.outputs = {out};
    write_manifest(manifest, out + ".manifest.json");

    std::cout << "wrote " << ds.size() << " trajectories to " << out
              << " (best return " << format_double(ds.stats.max_return) << ")\n";
    return 0;
}

int run_train(const std::string& data_path, TrainFlags flags, const std::string& out,
              const std::string& log_path) {
    apply_env_seed(flags.seed);
    const OfflineDataset ds = load_dataset(data_path);
    TrainConfig cfg = build_train_config(flags);
    const TrainResult result = train(ds, cfg);

    nlohmann::json meta = train_config_json(cfg);
    meta["dataset"] = {{"path", data_path},
                       {"digest", file_digest(data_path)},
                       {"trajectories", ds.size()},
                       {"horizon", ds.horizon}};
    meta["r_star"] = result.r_star;
    meta["effective_trajectories"] = result.effective_trajectories;
    if (result.resolved_kappa > 0.0) meta["resolved_kappa"] = result.resolved_kappa;
    if (result.resolved_sigma > 0.0) meta["resolved_sigma"] = result.resolved_sigma;

    ensure_parent_dir(out);
    save_policy(result.policy, meta, out);
    if (!log_path.empty()) {
        ensure_parent_dir(log_path);
        write_train_log_csv(result.log, log_path);
    }

    RunManifest manifest;
    manifest.command = "train";
    manifest.seed = cfg.seed;
    manifest.config = train_config_json(cfg);
    manifest.inputs = {{data_path, file_digest(data_path)}};
    manifest.outputs = {out};
    if (!log_path.empty()) manifest.outputs.push_back(log_path);
    write_manifest(manifest, out + ".manifest.json");

    const auto& last = result.log.records.back();
    std::cout << "trained " << variant_name(cfg.variant) << " for " << cfg.iterations
              << " iterations; final loss " << format_double(last.total_loss) << "; saved to "
              << out << "\n";
    return 0;
}

int run_eval(const std::string& ckpt, const std::string& env_name, const std::string& target_spec,
             int episodes, std::uint64_t seed, const std::string& out) {
    apply_env_seed(seed);
    auto [policy, meta] = load_policy(ckpt);
    const EnvSpec spec = resolve_env(env_name);
    const ReferenceReturns refs = reference_returns(spec, 100, seed);
    const bool have_r_star = meta.contains("r_star");
    const double r_star = have_r_star ? meta["r_star"].get<double>() : 0.0;
    const double target = resolve_target(target_spec, r_star, refs.expert_ref, have_r_star);

    const EvalPointResult r = evaluate_at(policy, spec, target, episodes, seed);
    const double norm = normalized_score(r.mean, refs.random_ref, refs.expert_ref);

    ensure_parent_dir(out);
    CsvWriter csv(out);
    csv.row({"target", "mean", "std", "normalized"});
    csv.row({format_double(target), format_double(r.mean), format_double(r.stddev),
             format_double(norm)});
    csv.close();

    RunManifest manifest;
    manifest.command = "eval";
    manifest.seed = seed;
    manifest.config = {{"checkpoint", ckpt}, {"env", spec.name},      {"target", target_spec},
                       {"episodes", episodes}, {"resolved_target", target}};
    manifest.inputs = {{ckpt, file_digest(ckpt)}};
    manifest.outputs = {out};
    write_manifest(manifest, out + ".manifest.json");

    std::cout << "target " << format_double(target) << ": mean return " << format_double(r.mean)
              << " (std " << format_double(r.stddev) << ", normalized " << format_double(norm)
              << ")\n";
    return 0;
}

int run_sweep(const std::string& ckpt, const std::string& env_name, int episodes,
              std::uint64_t seed, const std::string& out) {
    apply_env_seed(seed);
    auto [policy, meta] = load_policy(ckpt);
    const EnvSpec spec = resolve_env(env_name);
    if (!meta.contains("r_star"))
        throw std::invalid_argument("sweep: checkpoint lacks the recorded best dataset return");

    EvalConfig cfg;
    cfg.episodes = episodes;
    cfg.seed = seed;
    const ReliabilityCurve curve = sweep_targets(policy, spec, meta["r_star"].get<double>(), cfg);

    ensure_parent_dir(out);
    write_curve_csv(curve, out);

    RunManifest manifest;
    manifest.command = "sweep";
    manifest.seed = seed;
    manifest.config = {{"checkpoint", ckpt},
                       {"env", spec.name},
                       {"episodes", episodes},
                       {"r_star", curve.r_star},
                       {"random_ref", curve.random_ref},
                       {"expert_ref", curve.expert_ref}};
    manifest.inputs = {{ckpt, file_digest(ckpt)}};
    manifest.outputs = {out};
    write_manifest(manifest, out + ".manifest.json");

    std::cout << "swept " << curve.points.size() << " targets; out-of-range drop ratio "
              << format_double(ood_drop_ratio(curve)) << "\n";
    return 0;
}

int run_compare(const std::string& data_path, const std::string& env_name,
                const std::string& variants_text, const std::string& seeds_text, TrainFlags flags,
                int episodes, const std::string& out_dir) {
    std::uint64_t env_seed_probe = flags.seed;
    apply_env_seed(env_seed_probe);
    flags.seed = env_seed_probe;

    const OfflineDataset ds = load_dataset(data_path);
    const EnvSpec spec = resolve_env(env_name);
    const std::vector<Variant> variants = parse_variants(variants_text);
    const std::vector<std::uint64_t> seeds = parse_seeds(seeds_text);

    TrainConfig base_cfg = build_train_config(flags);
    EvalConfig eval_cfg;
    eval_cfg.episodes = episodes;
    eval_cfg.seed = flags.seed;

    fs::create_directories(out_dir);
    const ComparisonReport report =
        compare_variants(ds, spec, variants, seeds, base_cfg, eval_cfg);
    write_comparison_csvs(report, out_dir);

    RunManifest manifest;
    manifest.command = "compare";
    manifest.seed = flags.seed;
    manifest.config = train_config_json(base_cfg);
    manifest.config["variants"] = variants_text;
    manifest.config["seeds"] = seeds_text;
    manifest.config["episodes"] = episodes;
    manifest.inputs = {{data_path, file_digest(data_path)}};
    manifest.outputs = {out_dir + "/compare_summary.csv"};
    write_manifest(manifest, out_dir + "/manifest.json");

    int failures = 0;
    for (const auto& cell : report.cells)
        if (cell.failed) {
            ++failures;
            std::cout << "cell " << variant_name(cell.variant) << "/seed" << cell.seed
                      << " failed: " << cell.error << "\n";
        }
    std::cout << "compared " << variants.size() << " variants x " << seeds.size() << " seeds ("
              << failures << " failed cells); results in " << out_dir << "\n";
    return 0;
}

int run_ablate(const std::string& data_path, const std::string& env_name,
               const std::string& parameter, const std::string& values_text,
               const std::string& seeds_text, TrainFlags flags, int episodes,
               const std::string& out_dir) {
    std::uint64_t env_seed_probe = flags.seed;
    apply_env_seed(env_seed_probe);
    flags.seed = env_seed_probe;

    const OfflineDataset ds = load_dataset(data_path);
    const EnvSpec spec = resolve_env(env_name);

    AblationRequest request;
    request.parameter = parameter;
    request.values = parse_doubles(values_text);
    request.base_config = build_train_config(flags);
    request.eval_config.episodes = episodes;
    request.eval_config.seed = flags.seed;
    request.seeds = parse_seeds(seeds_text);

    fs::create_directories(out_dir);
    const auto cells = run_ablation(ds, spec, request, out_dir);

    RunManifest manifest;
    manifest.command = "ablate";
    manifest.seed = flags.seed;
    manifest.config = train_config_json(request.base_config);
    manifest.config["parameter"] = parameter;
    manifest.config["values"] = values_text;
    manifest.config["seeds"] = seeds_text;
    manifest.inputs = {{data_path, file_digest(data_path)}};
    manifest.outputs = {out_dir + "/ablation_summary.csv"};
    write_manifest(manifest, out_dir + "/manifest.json");

    int failures = 0;
    for (const auto& cell : cells)
        if (cell.failed) ++failures;
    std::cout << "ablated " << parameter << " over " << request.values.size() << " values ("
              << failures << " failed cells); results in " << out_dir << "\n";
    return 0;
}

int run_report_hist(const std::string& data_path, int bins, double lambda, double kappa,
                    int kappa_percentile, const std::string& out) {
    const OfflineDataset ds = load_dataset(data_path);
    WeightingConfig w;
    w.num_bins = bins;
    w.lambda = lambda;
    w.kappa = kappa > 0.0 ? KappaSpec::explicit_value(kappa)
                          : KappaSpec::percentile_gap(kappa_percentile);
    ensure_parent_dir(out);
    write_histogram_csv(ds, w, out);

    RunManifest manifest;
    manifest.command = "report-hist";
    manifest.config = {{"bins", bins}, {"lambda", lambda}};
    manifest.inputs = {{data_path, file_digest(data_path)}};
    manifest.outputs = {out};
    write_manifest(manifest, out + ".manifest.json");

    std::cout << "wrote histogram report to " << out << "\n";
    return 0;
}

int run_verify(std::uint64_t seed, const std::string& out) {
    apply_env_seed(seed);
    const auto reports = oracle::run_verification(seed);
    if (!out.empty()) {
        ensure_parent_dir(out);
        oracle::write_reports_csv(reports, out);
    }
    int failed = 0;
    for (const auto& r : reports) {
        std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.check << ": " << r.detail
                  << " (measured " << format_double(r.measured) << ", bound "
                  << format_double(r.bound) << ")\n";
        if (!r.pass) ++failed;
    }
    std::cout << (failed == 0 ? "all checks passed\n" : "some checks FAILED\n");
    return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Return-conditioned imitation with trajectory re-weighting and "
                 "high-return conditioning regularization"};
    app.require_subcommand(1);
    app.set_config("--config", "", "sectioned key=value config file");

    // gen-data
    std::string gd_env = "planeworld", gd_mixture = "medium-replay", gd_out = "dataset.jsonl";
    std::size_t gd_n = 1000;
    std::uint64_t gd_seed = 0;
    auto* gen = app.add_subcommand("gen-data", "generate a synthetic offline dataset");
    gen->add_option("--env", gd_env, "builtin name (lineworld, planeworld) or spec file");
    gen->add_option("--mixture", gd_mixture, "medium|medium-replay|medium-expert");
    gen->add_option("--n", gd_n, "number of trajectories");
    gen->add_option("--seed", gd_seed, "generation seed");
    gen->add_option("--out", gd_out, "output JSONL path");
    gen->set_config("--config");

    // train
    std::string tr_data, tr_out = "policy.json", tr_log;
    TrainFlags tr_flags;
    auto* tr = app.add_subcommand("train", "train a conditioned policy");
    tr->add_option("--data", tr_data, "dataset JSONL")->required();
    tr->add_option("--out", tr_out, "checkpoint path");
    tr->add_option("--log", tr_log, "training log CSV path");
    add_train_flags(tr, tr_flags);
    tr->set_config("--config");

    // eval
    std::string ev_ckpt, ev_env = "planeworld", ev_target = "expert", ev_out = "eval.csv";
    int ev_episodes = 10;
    std::uint64_t ev_seed = 0;
    auto* ev = app.add_subcommand("eval", "evaluate a checkpoint at one target");
    ev->add_option("--ckpt", ev_ckpt, "policy checkpoint")->required();
    ev->add_option("--env", ev_env, "environment");
    ev->add_option("--target", ev_target, "expert[:m] | max:m | absolute:v");
    ev->add_option("--episodes", ev_episodes, "rollouts per target");
    ev->add_option("--seed", ev_seed, "evaluation seed");
    ev->add_option("--out", ev_out, "output CSV");
    ev->set_config("--config");

    // sweep
    std::string sw_ckpt, sw_env = "planeworld", sw_out = "sweep.csv";
    int sw_episodes = 10;
    std::uint64_t sw_seed = 0;
    auto* sw = app.add_subcommand("sweep", "reliability curve over a target grid");
    sw->add_option("--ckpt", sw_ckpt, "policy checkpoint")->required();
    sw->add_option("--env", sw_env, "environment");
    sw->add_option("--episodes", sw_episodes, "rollouts per target");
    sw->add_option("--seed", sw_seed, "evaluation seed");
    sw->add_option("--out", sw_out, "output CSV");
    sw->set_config("--config");

    // compare
    std::string cp_data, cp_env = "planeworld", cp_variants = "base,wc", cp_seeds = "0,1,2",
                cp_out = "compare_out";
    TrainFlags cp_flags;
    int cp_episodes = 10;
    auto* cp = app.add_subcommand("compare", "train and sweep several variants");
    cp->add_option("--data", cp_data, "dataset JSONL")->required();
    cp->add_option("--env", cp_env, "environment");
    cp->add_option("--variants", cp_variants, "comma list of variants");
    cp->add_option("--seeds", cp_seeds, "comma list of seeds");
    cp->add_option("--episodes", cp_episodes, "rollouts per target");
    cp->add_option("--out", cp_out, "output directory");
    add_train_flags(cp, cp_flags);
    cp->set_config("--config");

    // ablate
    std::string ab_data, ab_env = "planeworld", ab_param = "lambda", ab_values = "0,0.01,1e9",
                ab_seeds = "0", ab_out = "ablate_out";
    TrainFlags ab_flags;
    ab_flags.variant = "wc";
    int ab_episodes = 10;
    auto* ab = app.add_subcommand("ablate", "sweep one knob over a value grid");
    ab->add_option("--data", ab_data, "dataset JSONL")->required();
    ab->add_option("--env", ab_env, "environment");
    ab->add_option("--param", ab_param, "kappa|lambda|q|alpha|sigma");
    ab->add_option("--values", ab_values, "comma list of values");
    ab->add_option("--seeds", ab_seeds, "comma list of seeds");
    ab->add_option("--episodes", ab_episodes, "rollouts per target");
    ab->add_option("--out", ab_out, "output directory");
    add_train_flags(ab, ab_flags);
    ab->set_config("--config");

    // report-hist
    std::string rh_data, rh_out = "hist.csv";
    int rh_bins = 20, rh_kappa_percentile = 90;
    double rh_lambda = 0.01, rh_kappa = 0.0;
    auto* rh = app.add_subcommand("report-hist", "return histogram before/after re-weighting");
    rh->add_option("--data", rh_data, "dataset JSONL")->required();
    rh->add_option("--bins", rh_bins, "return bins");
    rh->add_option("--lambda", rh_lambda, "low-frequency suppression");
    rh->add_option("--kappa", rh_kappa, "explicit temperature");
    rh->add_option("--kappa-percentile", rh_kappa_percentile, "percentile-gap temperature");
    rh->add_option("--out", rh_out, "output CSV");
    rh->set_config("--config");

    // verify
    std::uint64_t vf_seed = 0;
    std::string vf_out = "verify.csv";
    auto* vf = app.add_subcommand("verify", "run the numeric verification battery");
    vf->add_option("--seed", vf_seed, "fuzzing seed");
    vf->add_option("--out", vf_out, "report CSV path (empty = stdout only)");
    vf->set_config("--config");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return run_gen_data(gd_env, gd_mixture, gd_n, gd_seed, gd_out);
        if (tr->parsed()) return run_train(tr_data, tr_flags, tr_out, tr_log);
        if (ev->parsed()) return run_eval(ev_ckpt, ev_env, ev_target, ev_episodes, ev_seed, ev_out);
        if (sw->parsed()) return run_sweep(sw_ckpt, sw_env, sw_episodes, sw_seed, sw_out);
        if (cp->parsed())
            return run_compare(cp_data, cp_env, cp_variants, cp_seeds, cp_flags, cp_episodes,
                               cp_out);
        if (ab->parsed())
            return run_ablate(ab_data, ab_env, ab_param, ab_values, ab_seeds, ab_flags,
                              ab_episodes, ab_out);
        if (rh->parsed())
            return run_report_hist(rh_data, rh_bins, rh_lambda, rh_kappa, rh_kappa_percentile,
                                   rh_out);
        if (vf->parsed()) return run_verify(vf_seed, vf_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    std::cerr << "error: no subcommand\n";
    return 1;
}
