#pragma once

// Scenario config documents (JSON). Every key is optional and falls back to
// the struct defaults; unknown keys are rejected with their full path.

#include <filesystem>
#include <string>

#include "json.hpp"

#include "edgesim/model.hpp"

namespace edgesim {

nlohmann::json to_json(const ScenarioConfig& config);

/// Throws InvalidConfig listing every unknown key and mistyped value.
ScenarioConfig scenario_from_json(const nlohmann::json& doc);

ScenarioConfig load_scenario(const std::filesystem::path& path);

/// Canonical single-line dump used for fingerprints.
std::string canonical_dump(const ScenarioConfig& config);

}  // namespace edgesim
