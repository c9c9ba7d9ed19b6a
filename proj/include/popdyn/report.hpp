#pragma once

#include "popdyn/calibration.hpp"
#include "popdyn/experiments.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace popdyn {

// Non-finite numbers are written as JSON null.
[[nodiscard]] nlohmann::json to_json(const MetricsReport& r);
[[nodiscard]] nlohmann::json to_json(const SolverDiagnostics& d);
[[nodiscard]] nlohmann::json to_json(const ErgodicityVerdict& v);
[[nodiscard]] nlohmann::json to_json(const CalibrationReport& r);
[[nodiscard]] nlohmann::json to_json(const std::vector<Table3Column>& cols, const std::string& config_hash,
                                     std::uint64_t seed);
[[nodiscard]] nlohmann::json to_json(const ValidationReport& v);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);

/// influencer, y, f, F for every influencer with a stationary solution.
void write_pdf_csv(const std::filesystem::path& path, const MetricsReport& r);
/// influencer, bin_lo, bin_hi, occupation_days, density.
void write_occupation_csv(const std::filesystem::path& path, const MetricsReport& r);
/// Per-influencer solver diagnostics.
void write_solver_json(const std::filesystem::path& path, const MetricsReport& r);
/// Long format: one row per (value, influencer).
void write_sweep_csv(const std::filesystem::path& path, const std::string& param, const std::vector<SweepRow>& rows,
                     const std::string& config_hash, std::uint64_t seed);
/// gamma, theta, kappa_sum.
void write_kappa_surface_csv(const std::filesystem::path& path, const GridSearchResult& g);
/// influencer_id, time_days, kind, x_before, jump, x_after.
void write_events_csv(const std::filesystem::path& path, const JointTrajectory& traj);

} // namespace popdyn
