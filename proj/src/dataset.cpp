#include "cwbc/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "cwbc/csv.hpp"
#include "json.hpp"

namespace cwbc {

using nlohmann::json;

double DatasetStats::percentile(int q) const {
    if (q < 0 || q > 100) throw std::invalid_argument("percentile: q must be in 0..100");
    if (count == 0) throw std::invalid_argument("percentile: empty stats");
    return percentile_table[static_cast<std::size_t>(q)];
}

std::vector<double> compute_rtg(const std::vector<double>& rewards) {
    if (rewards.empty()) throw std::invalid_argument("compute_rtg: empty reward sequence");
    std::vector<double> rtg(rewards.size());
    double acc = 0.0;
    for (std::size_t i = rewards.size(); i-- > 0;) {
        acc += rewards[i];
        rtg[i] = acc;
    }
    return rtg;
}

double average_rtg(double g, int t, int horizon) {
    if (horizon < 1) throw std::invalid_argument("average_rtg: horizon must be >= 1");
    if (t < 1 || t > horizon) throw std::invalid_argument("average_rtg: t must be in 1..horizon");
    return g / static_cast<double>(horizon - t + 1);
}

double percentile(std::vector<double> values, int q) {
    if (values.empty()) throw std::invalid_argument("percentile: empty sample");
    if (q < 0 || q > 100) throw std::invalid_argument("percentile: q must be in 0..100");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    // Nearest-rank index ceil(q*n/100), clamped to at least 1; q = 0 gives
    // the minimum.
    std::size_t rank = (static_cast<std::size_t>(q) * n + 99) / 100;
    if (rank < 1) rank = 1;
    if (rank > n) rank = n;
    return values[rank - 1];
}

std::vector<double> dataset_returns(const OfflineDataset& dataset) {
    std::vector<double> returns;
    returns.reserve(dataset.size());
    for (const auto& traj : dataset.trajectories) returns.push_back(traj.total_return());
    return returns;
}

DatasetStats build_stats(const OfflineDataset& dataset) {
    if (dataset.size() == 0) throw std::invalid_argument("build_stats: empty dataset");
    std::vector<double> returns = dataset_returns(dataset);
    std::sort(returns.begin(), returns.end());
    DatasetStats stats;
    stats.count = returns.size();
    stats.min_return = returns.front();
    stats.max_return = returns.back();
    const std::size_t n = returns.size();
    for (int q = 0; q <= 100; ++q) {
        std::size_t rank = (static_cast<std::size_t>(q) * n + 99) / 100;
        if (rank < 1) rank = 1;
        if (rank > n) rank = n;
        stats.percentile_table[static_cast<std::size_t>(q)] = returns[rank - 1];
    }
    return stats;
}

void finalize_dataset(OfflineDataset& dataset) {
    if (dataset.horizon < 1) throw std::invalid_argument("finalize_dataset: horizon must be >= 1");
    if (dataset.state_dim < 1 || dataset.action_dim < 1)
        throw std::invalid_argument("finalize_dataset: dimensions must be >= 1");
    for (auto& traj : dataset.trajectories) {
        if (traj.transitions.empty())
            throw std::invalid_argument("finalize_dataset: empty trajectory");
        if (traj.transitions.size() > static_cast<std::size_t>(dataset.horizon))
            throw std::invalid_argument("finalize_dataset: trajectory longer than horizon");
        std::vector<double> rewards;
        rewards.reserve(traj.transitions.size());
        for (const auto& tr : traj.transitions) {
            if (tr.state.size() != static_cast<std::size_t>(dataset.state_dim))
                throw std::invalid_argument("finalize_dataset: state dimension mismatch");
            if (tr.action.size() != static_cast<std::size_t>(dataset.action_dim))
                throw std::invalid_argument("finalize_dataset: action dimension mismatch");
            rewards.push_back(tr.reward);
        }
        traj.rtg = compute_rtg(rewards);
    }
    dataset.stats = build_stats(dataset);
}

namespace {

std::vector<double> json_to_vector(const json& arr, const char* what) {
    if (!arr.is_array()) throw std::runtime_error(std::string("dataset: ") + what + " is not an array");
    std::vector<double> v;
    v.reserve(arr.size());
    for (const auto& x : arr) {
        if (!x.is_number()) throw std::runtime_error(std::string("dataset: ") + what + " has a non-number");
        v.push_back(x.get<double>());
    }
    return v;
}

}  // namespace

OfflineDataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_dataset: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("load_dataset: missing header line");

    json header;
    try {
        header = json::parse(line);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("load_dataset: bad header: ") + e.what());
    }
    for (const char* key : {"version", "horizon", "state_dim", "action_dim"}) {
        if (!header.contains(key))
            throw std::runtime_error(std::string("load_dataset: header missing field ") + key);
    }
    if (header["version"].get<int>() != 1)
        throw std::runtime_error("load_dataset: unsupported version");

    OfflineDataset ds;
    ds.horizon = header["horizon"].get<int>();
    ds.state_dim = header["state_dim"].get<int>();
    ds.action_dim = header["action_dim"].get<int>();

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::parse_error& e) {
            throw std::runtime_error("load_dataset: bad record at line " + std::to_string(line_no) +
                                     ": " + e.what());
        }
        for (const char* key : {"states", "actions", "rewards"}) {
            if (!rec.contains(key))
                throw std::runtime_error("load_dataset: record at line " + std::to_string(line_no) +
                                         " missing field " + key);
        }
        const auto& states = rec["states"];
        const auto& actions = rec["actions"];
        const auto& rewards = rec["rewards"];
        if (!states.is_array() || !actions.is_array() || !rewards.is_array())
            throw std::runtime_error("load_dataset: record fields must be arrays (line " +
                                     std::to_string(line_no) + ")");
        const std::size_t len = rewards.size();
        if (states.size() != len || actions.size() != len)
            throw std::runtime_error("load_dataset: ragged record at line " + std::to_string(line_no));
        if (len == 0)
            throw std::runtime_error("load_dataset: empty trajectory at line " + std::to_string(line_no));

        Trajectory traj;
        traj.transitions.resize(len);
        for (std::size_t t = 0; t < len; ++t) {
            traj.transitions[t].state = json_to_vector(states[t], "state");
            traj.transitions[t].action = json_to_vector(actions[t], "action");
            if (!rewards[t].is_number())
                throw std::runtime_error("load_dataset: non-number reward at line " +
                                         std::to_string(line_no));
            traj.transitions[t].reward = rewards[t].get<double>();
        }
        ds.trajectories.push_back(std::move(traj));
    }
    if (ds.trajectories.empty()) throw std::runtime_error("load_dataset: no trajectories in " + path);
    finalize_dataset(ds);
    return ds;
}

void save_dataset(const OfflineDataset& dataset, const std::string& path) {
    if (dataset.size() == 0) throw std::invalid_argument("save_dataset: empty dataset");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_dataset: cannot open " + path);

    // Numbers are written in shortest round-trip form so that load followed
    // by save reproduces the file byte for byte.
    out << "{\"version\":1,\"horizon\":" << dataset.horizon
        << ",\"state_dim\":" << dataset.state_dim
        << ",\"action_dim\":" << dataset.action_dim << "}\n";

    for (const auto& traj : dataset.trajectories) {
        out << "{\"states\":[";
        for (std::size_t t = 0; t < traj.length(); ++t) {
            if (t) out << ',';
            out << '[';
            for (std::size_t i = 0; i < traj.transitions[t].state.size(); ++i) {
                if (i) out << ',';
                out << format_double(traj.transitions[t].state[i]);
            }
            out << ']';
        }
        out << "],\"actions\":[";
        for (std::size_t t = 0; t < traj.length(); ++t) {
            if (t) out << ',';
            out << '[';
            for (std::size_t i = 0; i < traj.transitions[t].action.size(); ++i) {
                if (i) out << ',';
                out << format_double(traj.transitions[t].action[i]);
            }
            out << ']';
        }
        out << "],\"rewards\":[";
        for (std::size_t t = 0; t < traj.length(); ++t) {
            if (t) out << ',';
            out << format_double(traj.transitions[t].reward);
        }
        out << "]}\n";
    }
    if (!out) throw std::runtime_error("save_dataset: write failed for " + path);
}

}  // namespace cwbc
