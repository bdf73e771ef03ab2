#pragma once

#include <string>
#include <string_view>

#include "cbb/harness.hpp"

namespace cbb {

/// Parse a YAML experiment file. Missing keys keep the desk-preset defaults;
/// unknown keys and every invariant violation are reported together.
ExperimentConfig parse_config(std::string_view yaml_text);
ExperimentConfig load_config(const std::string& path);

/// Resolved config plus version string, as pretty-printed JSON.
std::string metadata_json(const ExperimentConfig& cfg);

}  // namespace cbb
