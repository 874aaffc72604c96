#pragma once

#include "icd/engine.hpp"

#include <filesystem>
#include <string>

namespace icd {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// JSON <-> config. load_config runs every module validator and reports the
// violated condition by name; to_json/from_json round-trip exactly.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig config_from_json_text(const std::string& text);
std::string config_to_json_text(const ExperimentConfig& cfg);
void save_config(const ExperimentConfig& cfg, const std::filesystem::path& path);

std::string mode_name(RunMode mode);
RunMode mode_from_name(const std::string& name);

}  // namespace icd
