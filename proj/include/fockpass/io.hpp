// io.hpp: CSV / JSON serialization of surfaces, intersections, trajectories
// and scans. Numbers are written as the shortest decimal string that parses
// back to the same double ('.' separator, locale independent).

#pragma once

#include "fockpass/dynamics.hpp"
#include "fockpass/explore.hpp"
#include "fockpass/spectra.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace fockpass::io {

std::string format_double(double value);
double parse_double(std::string_view text);

// Writes `contents` to a sibling temporary file and renames it over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& contents);

// --- surfaces.csv: g,omega,sheet_index,energy[,energy_plus_g] --------------
// A grid that already carries the display offset is written with an
// `energy_plus_g` value column instead of `energy`.
void write_surfaces_csv(std::ostream& os, const SurfaceGrid& grid, bool display_column);
SurfaceGrid read_surfaces_csv(std::istream& is);

// --- intersections.csv: plane,field_value,sheet_lower,sheet_upper,residual_gap,energy
void write_intersections_csv(std::ostream& os, const std::vector<IntersectionRecord>& records);
std::vector<IntersectionRecord> read_intersections_csv(std::istream& is);

// --- trajectory.csv: t,P_minus_0,P_plus_0,...,norm_drift --------------------
void write_trajectory_csv(std::ostream& os, const TrajectoryRecord& record);
TrajectoryRecord read_trajectory_csv(std::istream& is);

// --- scan.csv (long format): g_max,omega_max,population,predicted_n --------
void write_scan_csv(std::ostream& os, const ScanResult& scan);
// Restores axes, population and predictor maps; the plateau is recomputed.
ScanResult read_scan_csv(std::istream& is, int target_n);

// --- JSON ------------------------------------------------------------------
nlohmann::json to_json(const Plateau& plateau);
Plateau plateau_from_json(const nlohmann::json& j);
nlohmann::json scan_summary(const ScanResult& scan);

nlohmann::json to_json(const ModelParams& params);
nlohmann::json to_json(const PulseSchedule& schedule);
nlohmann::json to_json(const AdiabaticityReport& report);
nlohmann::json to_json(const TransferPrediction& prediction);
nlohmann::json to_json(const TruncationReport& report);
nlohmann::json to_json(const PulseDesign& design);

}  // namespace fockpass::io
