#pragma once

// Scenario files: one JSON document with the sections mzm, drift, chain,
// controller and sim. See docs/scenario_format.md for the schema.

#include "mzmbias/controller.hpp"
#include "mzmbias/device_model.hpp"
#include "mzmbias/drift_models.hpp"
#include "mzmbias/signal_chain.hpp"
#include "mzmbias/sim_engine.hpp"

#include <filesystem>
#include <string>

namespace mzmbias {

struct Scenario {
    std::string description;
    MzmParams mzm;
    DriftScenario drift;
    SignalChainConfig chain;
    ControllerConfig controller;
    SimConfig sim;
};

/// Parse and validate. Throws ConfigError whose field() is the dotted path of
/// the offending entry, or "line L, column C" for malformed JSON.
[[nodiscard]] Scenario parse_scenario(const std::string& text);

/// Throws IoError when the file cannot be read, ConfigError otherwise.
[[nodiscard]] Scenario load_scenario(const std::filesystem::path& path);

/// Cross-section and per-section invariants.
void validate(const Scenario& scenario);

}  // namespace mzmbias
