#pragma once

#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "fisim/experiments.hpp"
#include "fisim/propositions.hpp"

// Deterministic serialization of sweep results and verification reports.
// All numbers are rounded to 6 significant digits before export (CSV and
// JSON alike), so re-exports of the same results are byte-identical and the
// two formats agree field by field.
namespace fisim {

inline constexpr const char* tool_name = "fisim";
inline constexpr const char* tool_version = "1.0.0";

// %.6g formatting; the canonical number rendering for all artifacts.
std::string format_g6(double value);
// The double nearest to format_g6(value), used when a number must be stored
// rather than printed.
double round_g6(double value);

// Fixed column order: cell parameters, baseline_*, insured_*, pct_change_*,
// gamma_star, utility_gain_pct, converged. Three input slots; unused slots
// are left empty. Header row included.
std::string records_to_csv(std::span<const SweepRecord> records);

// Array of objects mirroring the CSV fields (unused input slots omitted).
nlohmann::json records_to_json(std::span<const SweepRecord> records);

nlohmann::json sign_reports_to_json(std::span<const SignReport> reports);

// Run manifest: tool/version, command, effective configuration, seed, and
// cell failure accounting. Deliberately excludes timestamps and host data so
// identical runs produce identical manifests.
nlohmann::json make_manifest(const std::string& command, const nlohmann::json& config,
                             std::size_t total_cells, std::size_t failed_cells);

// Serializes with sorted keys and 2-space indentation, trailing newline.
std::string json_to_string(const nlohmann::json& j);

void write_text_file(const std::string& path, const std::string& contents);

} // namespace fisim
