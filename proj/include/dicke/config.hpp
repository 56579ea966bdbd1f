#pragma once

#include "dicke/model.hpp"

#include <json.hpp>

#include <optional>
#include <string>

namespace dicke {

using json = nlohmann::json;

/// Model parameters in user units (kHz over 2pi, s^-1) plus a label. This is
/// the only place where lab units are converted.
struct RunConfig {
    ModelParams params;
    std::string label;
    std::string preset;

    /// Canonical echo in user units with n_max resolved.
    json to_json() const;
};

/// Named parameter sets. "fig3": the experimental regime (N=75, delta -1 kHz,
/// nbar 6, 60 s^-1 dephasing). "fig5": N=20, delta -4 kHz, vacuum.
std::optional<json> preset_config(const std::string& name);

/// Merges `base` with `overrides` (overrides win), fills defaults, and
/// validates. Every problem is reported in one ValidationError. A "preset"
/// key supplies values beneath both.
RunConfig parse_config(const json& base, const json& overrides = json::object());

/// Reads a JSON file; missing or malformed files raise ValidationError.
json read_json_file(const std::string& path);

/// Positive thread count from the flag, else DICKE_RAMP_THREADS, else the
/// number of available cores.
int resolve_threads(std::optional<int> flag);

} // namespace dicke
