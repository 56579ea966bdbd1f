#pragma once

#include "dicke/config.hpp"
#include "dicke/dynamics.hpp"
#include "dicke/protocols.hpp"
#include "dicke/spectral.hpp"

#include <string>

namespace dicke {

/// 12 significant digits; NaN becomes an empty field.
std::string fmt12(double x);

inline constexpr const char* kTrajectoryHeader =
    "t_ms,bx_khz,sx,sy,sz,abs_sz,parity,nph,energy_khz,fidelity,qfi";

// Spin expectations are in half-spin units (not divided by N).
std::string trajectory_csv(const Trajectory& traj);
std::string gap_csv(const GapScan& scan);
/// Long format, one row per cell, b_hold-major.
std::string sweep_csv(const SweepResult& result, const ModelParams& params);
std::string comparison_csv(const Comparison& cmp);
std::string scaling_csv(const std::vector<ScalingRow>& rows);
std::string robustness_csv(const std::vector<RobustnessSample>& samples);
std::string distribution_csv(const SpinDistribution& dist);

/// Hex FNV-1a of the canonical config echo.
std::string params_hash(const RunConfig& cfg);
std::string content_hash(const std::string& content);

/// Pretty JSON with a trailing newline; key order is deterministic.
std::string dump_json(const json& j);

/// Writes through a temporary file and renames it into place.
void write_file(const std::string& path, const std::string& content);

/// Text form of a pure state together with the parameters it belongs to.
std::string serialize_state(const QuantumState& psi, const RunConfig& cfg);

struct LoadedState {
    RunConfig config;
    QuantumState psi;
};
LoadedState deserialize_state(const std::string& text);

} // namespace dicke
