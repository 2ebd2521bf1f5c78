#pragma once

#include <map>
#include <string>

namespace cwbc {

// Flat key=value files with optional [section] headers; keys are exposed as
// "section.key". '#' starts a comment. Values keep their text form; the
// consumer parses numbers.
using ConfigMap = std::map<std::string, std::string>;

ConfigMap parse_config_file(const std::string& path);
ConfigMap parse_config_text(const std::string& text);

// Later maps win.
ConfigMap merge_configs(const ConfigMap& base, const ConfigMap& override_map);

const std::string& config_get(const ConfigMap& config, const std::string& key,
                              const std::string& fallback);

}  // namespace cwbc
