#pragma once

#include <string>
#include <vector>

#include "agora/harness.hpp"

namespace agora {

// Versioned scenario file schema. Decoding reports missing or ill-typed
// fields by path; semantic violations are the job of ScenarioConfig::valid.
std::string scenario_to_json(const ScenarioConfig& config);
ScenarioConfig scenario_from_json(const std::string& json_text);

// Bundled scenarios shipped with the CLI: "appendix-e", "theorem1",
// "default-market".
std::vector<std::string> bundled_scenario_names();
ScenarioConfig bundled_scenario(const std::string& name);

// Writes <dir>/<name>.json for every bundled scenario.
void write_bundled_scenarios(const std::string& dir);

}  // namespace agora
