#pragma once

#include "json.hpp"

#include "mvt/counter.hpp"
#include "mvt/presets.hpp"

namespace mvt {

/// Executes one run request and returns the report.  The request carries the
/// command name, an optional preset or spec/curve text, an overrides object
/// and an optional cache directory; the report carries the resolved system,
/// the results, any verdicts, a CSV payload for ladder commands, the exit
/// code the CLI should use, and a metadata object that is excluded from the
/// byte-stability contract.  Throws mvt::Error on invalid requests.
nlohmann::json run_request(const nlohmann::json& request);

/// Shared helpers between the run entry point and the C API.
CountOptions count_options_from_json(const nlohmann::json& j);
void apply_preset_overrides(PresetConfig& cfg, const nlohmann::json& overrides);

} // namespace mvt
