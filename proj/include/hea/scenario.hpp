#pragma once

#include <stdexcept>
#include <string>

#include "hea/mpc.hpp"

namespace hea {

/// Configuration-level failure: unreadable file, schema violation, bad
/// value. The CLI maps this to exit code 2.
struct ScenarioLoadError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr int kScenarioSchemaVersion = 1;

/// Load a scenario document (JSON, `schema-version` key required). Unknown
/// keys are rejected at every nesting level; omitted keys fall back to the
/// built-in defaults; file paths resolve relative to the document.
Scenario load_scenario(const std::string& path);

/// Schema check without loading the referenced data files.
void validate_scenario_file(const std::string& path);

}  // namespace hea
