// SPDX-License-Identifier: Apache-2.0
//
// Run configuration: flat `key = value` documents with dotted namespaces,
// '#' comments, and command-line overrides applied on top.
#pragma once

#include "bdloc/experiments.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace bdloc {

inline constexpr const char* kOutputDirEnv = "BDLOC_OUTPUT_DIR";

struct RunConfig
{
    std::string command;
    ExperimentConfig experiment;

    std::vector<double> sweep_p;
    std::vector<double> sweep_dc_wl;
    std::vector<int> sweep_n;
    std::optional<NoiseMode> sweep_noise_mode;  // unset: emit both

    HeatmapSpec heatmap;
    double pattern_target_deg = 60.0;
    std::size_t pattern_points = 1801;

    std::filesystem::path output_dir = ".";
    std::string output_prefix;

    // Every recognized key with its effective value, in canonical order.
    std::vector<std::pair<std::string, std::string>> resolved() const;
};

using Overrides = std::vector<std::pair<std::string, std::string>>;

// Splits "key=value"; throws ValidationError on a missing '='.
std::pair<std::string, std::string> split_assignment(const std::string& text);

// Parses a config document. Overrides win over document values; keys absent
// from both take the defaults of the selected scenario.
RunConfig parse_config_text(const std::string& text, const Overrides& overrides = {});
// Empty path: defaults plus overrides only.
RunConfig parse_config(const std::filesystem::path& path, const Overrides& overrides = {});

std::vector<std::string> known_keys();

// "a:step:b" (inclusive) or "v1,v2,...".
std::vector<double> parse_list(const std::string& key, const std::string& text);

} // namespace bdloc
