#include "cwbc/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>

#include "cwbc/csv.hpp"

namespace cwbc {

std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("file_digest: cannot open " + path);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[8192];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
    }
    char out[17];
    std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
    return std::string(out);
}

void write_manifest(const RunManifest& manifest, const std::string& path) {
    nlohmann::json j;
    j["command"] = manifest.command;
    j["version"] = manifest.version;
    j["seed"] = manifest.seed;
    j["config"] = manifest.config;
    nlohmann::json inputs = nlohmann::json::array();
    for (const auto& [file, digest] : manifest.inputs)
        inputs.push_back({{"path", file}, {"digest", digest}});
    j["inputs"] = inputs;
    j["outputs"] = manifest.outputs;

    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_manifest: cannot open " + path);
    out << j.dump(2) << '\n';
}

void write_histogram_csv(const OfflineDataset& dataset, const WeightingConfig& weighting,
                         const std::string& path) {
    BinLayout layout = build_bins(dataset, weighting.num_bins);
    const double kappa = resolve_kappa(dataset.stats, weighting.kappa);
    apply_bin_probabilities(layout, weighting.lambda, kappa, dataset.stats.max_return);

    CsvWriter csv(path);
    csv.row({"bin_index", "mean_return", "frequency", "probability"});
    for (std::size_t b = 0; b < layout.num_bins(); ++b)
        csv.row({format_int(static_cast<long long>(b)), format_double(layout.mean_return[b]),
                 format_double(layout.frequency[b]), format_double(layout.probability[b])});
}

void write_curve_csv(const ReliabilityCurve& curve, const std::string& path) {
    CsvWriter csv(path);
    csv.row({"target", "mean", "std", "normalized"});
    for (const auto& p : curve.points)
        csv.row({format_double(p.target), format_double(p.mean), format_double(p.stddev),
                 format_double(p.normalized)});
}

namespace {

std::string value_tag(double v) {
    std::string tag = format_double(v);
    // Keep filenames tame.
    for (char& c : tag)
        if (c == '+') c = 'p';
        else if (c == '-') c = 'm';
        else if (c == '.') c = '_';
    return tag;
}

struct PointAccumulator {
    std::string basis;
    double multiplier = 0.0;
    double target = 0.0;
    std::vector<double> returns;  // pooled across seeds (episode means are
                                  // unavailable here, so pool point means)
};

// Pools per-seed curve points that share a grid slot.
std::vector<CurvePoint> pool_curves(const std::vector<const ReliabilityCurve*>& curves,
                                    double random_ref, double expert_ref) {
    std::vector<PointAccumulator> slots;
    for (const auto* curve : curves) {
        for (std::size_t i = 0; i < curve->points.size(); ++i) {
            const auto& p = curve->points[i];
            if (slots.size() <= i) slots.push_back({p.basis, p.multiplier, p.target, {}});
            slots[i].returns.push_back(p.mean);
        }
    }
    std::vector<CurvePoint> pooled;
    for (const auto& slot : slots) {
        CurvePoint p;
        p.basis = slot.basis;
        p.multiplier = slot.multiplier;
        p.target = slot.target;
        double sum = 0.0;
        for (double r : slot.returns) sum += r;
        p.mean = sum / static_cast<double>(slot.returns.size());
        double var = 0.0;
        for (double r : slot.returns) var += (r - p.mean) * (r - p.mean);
        p.stddev = std::sqrt(var / static_cast<double>(slot.returns.size()));
        p.normalized = normalized_score(p.mean, random_ref, expert_ref);
        pooled.push_back(p);
    }
    return pooled;
}

}  // namespace

void write_comparison_csvs(const ComparisonReport& report, const std::string& out_dir) {
    // Per-variant aggregates.
    CsvWriter summary(out_dir + "/compare_summary.csv");
    summary.row({"variant", "seeds", "expert_mean", "expert_std", "expert_normalized",
                 "ood_ratio_mean", "wins_vs_base", "failures"});

    const bool have_base =
        std::find(report.variants.begin(), report.variants.end(), Variant::kBase) !=
        report.variants.end();

    auto cells_of = [&](Variant v) {
        std::vector<const CompareCell*> cells;
        for (const auto& cell : report.cells)
            if (cell.variant == v) cells.push_back(&cell);
        return cells;
    };

    for (Variant v : report.variants) {
        const auto cells = cells_of(v);
        std::vector<double> means, ratios;
        int failures = 0;
        for (const auto* cell : cells) {
            if (cell->failed) {
                ++failures;
                continue;
            }
            means.push_back(cell->expert_mean);
            ratios.push_back(cell->ood_ratio);
        }
        double mean = 0.0, stddev = 0.0, ratio_mean = 0.0;
        if (!means.empty()) {
            for (double m : means) mean += m;
            mean /= static_cast<double>(means.size());
            for (double m : means) stddev += (m - mean) * (m - mean);
            stddev = std::sqrt(stddev / static_cast<double>(means.size()));
            for (double r : ratios) ratio_mean += r;
            ratio_mean /= static_cast<double>(ratios.size());
        }

        int wins = 0;
        if (have_base && v != Variant::kBase) {
            for (std::uint64_t seed : report.seeds) {
                const CompareCell *mine = nullptr, *base = nullptr;
                for (const auto& cell : report.cells) {
                    if (cell.seed != seed || cell.failed) continue;
                    if (cell.variant == v) mine = &cell;
                    if (cell.variant == Variant::kBase) base = &cell;
                }
                if (mine && base && mine->expert_mean > base->expert_mean) ++wins;
            }
        }

        summary.row({variant_name(v), format_int(static_cast<long long>(report.seeds.size())),
                     format_double(mean), format_double(stddev),
                     means.empty() ? "nan"
                                   : format_double(normalized_score(mean, report.random_ref,
                                                                    report.expert_ref)),
                     format_double(ratio_mean),
                     (have_base && v != Variant::kBase) ? format_int(wins) : "na",
                     format_int(failures)});

        // Pooled reliability curve per variant, plus the per-seed curves.
        std::vector<const ReliabilityCurve*> curves;
        for (const auto* cell : cells)
            if (!cell->failed) curves.push_back(&cell->curve);
        if (!curves.empty()) {
            ReliabilityCurve pooled;
            pooled.random_ref = report.random_ref;
            pooled.expert_ref = report.expert_ref;
            pooled.r_star = curves.front()->r_star;
            pooled.points = pool_curves(curves, report.random_ref, report.expert_ref);
            write_curve_csv(pooled, out_dir + "/curve_" + variant_name(v) + ".csv");
        }
        for (const auto* cell : cells)
            if (!cell->failed)
                write_curve_csv(cell->curve, out_dir + "/curve_" + variant_name(v) + "_seed" +
                                                 std::to_string(cell->seed) + ".csv");
    }
}

std::vector<AblationCell> run_ablation(const OfflineDataset& dataset, const EnvSpec& spec,
                                       const AblationRequest& request, const std::string& out_dir) {
    const std::string& param = request.parameter;
    if (param != "kappa" && param != "lambda" && param != "q" && param != "alpha" &&
        param != "sigma")
        throw std::invalid_argument("run_ablation: unknown parameter " + param);
    if (request.values.empty()) throw std::invalid_argument("run_ablation: no values");
    if (request.seeds.empty()) throw std::invalid_argument("run_ablation: no seeds");

    std::vector<AblationCell> cells;
    CsvWriter summary(out_dir + "/ablation_summary.csv");
    summary.row({"parameter", "value", "seed", "expert_mean", "ood_ratio", "error"});

    for (double value : request.values) {
        std::vector<const ReliabilityCurve*> curves;
        for (std::uint64_t seed : request.seeds) {
            AblationCell cell;
            cell.value = value;
            cell.seed = seed;
            try {
                TrainConfig cfg = request.base_config;
                cfg.seed = seed;
                if (param == "kappa") cfg.weighting.kappa = KappaSpec::explicit_value(value);
                else if (param == "lambda") cfg.weighting.lambda = value;
                else if (param == "q") cfg.conservatism.percentile_q = static_cast<int>(value);
                else if (param == "alpha") cfg.conservatism.alpha = value;
                else cfg.conservatism.noise_std = value;

                const TrainResult trained = train(dataset, cfg);
                cell.curve = sweep_targets(trained.policy, spec, trained.r_star, request.eval_config);
                cell.ood_ratio = ood_drop_ratio(cell.curve);
                for (const auto& p : cell.curve.points)
                    if (p.basis == "expert" && p.multiplier == 1.0) cell.expert_mean = p.mean;
                summary.row({param, format_double(value), format_int(static_cast<long long>(seed)),
                             format_double(cell.expert_mean), format_double(cell.ood_ratio), ""});
            } catch (const std::exception& e) {
                cell.failed = true;
                cell.error = e.what();
                summary.row({param, format_double(value), format_int(static_cast<long long>(seed)),
                             "nan", "nan", cell.error});
            }
            cells.push_back(cell);
        }

        for (const auto& cell : cells)
            if (cell.value == value && !cell.failed) curves.push_back(&cell.curve);
        if (!curves.empty()) {
            ReliabilityCurve pooled;
            pooled.random_ref = curves.front()->random_ref;
            pooled.expert_ref = curves.front()->expert_ref;
            pooled.r_star = curves.front()->r_star;
            pooled.points = pool_curves(curves, pooled.random_ref, pooled.expert_ref);
            write_curve_csv(pooled, out_dir + "/ablate_" + param + "_" + value_tag(value) + ".csv");
        }

        // The histogram-shaping knobs also get the before/after view.
        if (param == "kappa" || param == "lambda") {
            try {
                WeightingConfig w = request.base_config.weighting;
                if (param == "kappa") w.kappa = KappaSpec::explicit_value(value);
                else w.lambda = value;
                write_histogram_csv(dataset, w,
                                    out_dir + "/hist_" + param + "_" + value_tag(value) + ".csv");
            } catch (const std::exception&) {
                // Invalid knob values already produced a failed cell above.
            }
        }
    }
    return cells;
}

}  // namespace cwbc
