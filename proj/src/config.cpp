#include "cwbc/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cwbc {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

}  // namespace

ConfigMap parse_config_text(const std::string& text) {
    ConfigMap config;
    std::istringstream in(text);
    std::string line;
    std::string section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::runtime_error("config: unterminated section at line " +
                                         std::to_string(line_no));
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config: expected key=value at line " +
                                     std::to_string(line_no));
        const std::string key = trim(line.substr(0, eq));
        if (key.empty())
            throw std::runtime_error("config: empty key at line " + std::to_string(line_no));
        const std::string full = section.empty() ? key : section + "." + key;
        config[full] = trim(line.substr(eq + 1));
    }
    return config;
}

ConfigMap parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str());
}

ConfigMap merge_configs(const ConfigMap& base, const ConfigMap& override_map) {
    ConfigMap merged = base;
    for (const auto& [key, value] : override_map) merged[key] = value;
    return merged;
}

const std::string& config_get(const ConfigMap& config, const std::string& key,
                              const std::string& fallback) {
    const auto it = config.find(key);
    return it == config.end() ? fallback : it->second;
}

}  // namespace cwbc
