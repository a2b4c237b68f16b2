#pragma once

#include "elca/analysis.hpp"
#include "elca/simulate.hpp"

#include <map>
#include <string>
#include <vector>

namespace elca {

// Flat key=value config text: one `key = value` per line, `#` comments,
// `[section]` headers allowed and ignored. Later keys override earlier ones.
std::map<std::string, std::string> parse_key_value_file(const std::string& path);

std::vector<std::string> split_list(const std::string& csv);

/// Applies config-file keys onto an AnalysisConfig (CLI flags win later).
/// Keys: input, outcome, arm, covariates, arm-labels, pi, link, aux,
/// standardize, level, test, format, json, seed.
void apply_analysis_config(AnalysisConfig& config,
                           const std::map<std::string, std::string>& kv);

/// Reads a custom scenario preset from a config file. Keys: kind, sigma,
/// intercepts, slopes-x0[, slopes-x1], quadratic, n, pi, aux, label, power.
SimPreset scenario_preset_from_file(const std::string& path);

} // namespace elca
