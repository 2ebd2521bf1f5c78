#pragma once

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "cwbc/dataset.hpp"

namespace testutil {

// Fresh path under the system temp dir; removed lazily by the OS.
inline std::string tmp_path(const std::string& stem) {
    static int counter = 0;
    const auto dir = std::filesystem::temp_directory_path() / "cwbc-tests";
    std::filesystem::create_directories(dir);
    return (dir / (stem + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++)))
        .string();
}

// Dataset with one trajectory per requested return: horizon steps of
// constant reward total/horizon, states and actions filled with small
// deterministic values so standardization stays well behaved.
inline cwbc::OfflineDataset make_dataset(const std::vector<double>& returns, int horizon = 4,
                                         int state_dim = 2, int action_dim = 2) {
    cwbc::OfflineDataset ds;
    ds.horizon = horizon;
    ds.state_dim = state_dim;
    ds.action_dim = action_dim;
    for (std::size_t k = 0; k < returns.size(); ++k) {
        cwbc::Trajectory traj;
        traj.transitions.resize(static_cast<std::size_t>(horizon));
        for (int t = 0; t < horizon; ++t) {
            auto& tr = traj.transitions[static_cast<std::size_t>(t)];
            tr.state.resize(static_cast<std::size_t>(state_dim));
            for (int i = 0; i < state_dim; ++i)
                tr.state[static_cast<std::size_t>(i)] =
                    0.1 * static_cast<double>(k) + 0.01 * static_cast<double>(t) +
                    0.001 * static_cast<double>(i);
            tr.action.resize(static_cast<std::size_t>(action_dim));
            for (int i = 0; i < action_dim; ++i)
                tr.action[static_cast<std::size_t>(i)] =
                    0.05 * static_cast<double>(k) - 0.02 * static_cast<double>(i);
            tr.reward = returns[k] / static_cast<double>(horizon);
        }
        ds.trajectories.push_back(std::move(traj));
    }
    cwbc::finalize_dataset(ds);
    return ds;
}

inline std::string read_file(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) return {};
    std::string content;
    char buf[4096];
    std::size_t got;
    while ((got = std::fread(buf, 1, sizeof buf, f)) > 0) content.append(buf, got);
    std::fclose(f);
    return content;
}

}  // namespace testutil
