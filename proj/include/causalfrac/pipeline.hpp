#pragma once

#include <string>
#include <vector>

namespace causalfrac {

inline constexpr const char* kToolVersion = "0.1.0";

/// Run the end-to-end pipeline described by a JSON config document:
/// synth|load -> standardize -> discover -> roles -> fit -> explain ->
/// compare, writing the PAG edge list, trace, SHAP report, trend table,
/// metrics table and a config echo into the output directory. Returns the
/// list of files written. Throws ConfigError on malformed configs and lets
/// stage errors propagate with the stage name prefixed.
std::vector<std::string> run_pipeline(const std::string& config_path);

/// Same, from an in-memory config document.
std::vector<std::string> run_pipeline_json(const std::string& config_json,
                                           const std::string& base_dir);

}  // namespace causalfrac
