#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qct/codes.hpp"
#include "qct/estimators.hpp"
#include "qct/measurement.hpp"
#include "qct/model_selection.hpp"

namespace qct::io {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Files and digests
// ---------------------------------------------------------------------------

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

/// FNV-1a 64-bit digest, 16 hex characters.
std::string fnv1a_hex(const std::string& bytes);
std::string file_digest(const std::string& path);

/// Doubles in CSV output carry 17 significant digits.
std::string format_double(double v);

// ---------------------------------------------------------------------------
// Settings file:  {"L": 7, "settings": ["XXYZZXY", ...]}
// ---------------------------------------------------------------------------

void write_settings_json(const std::string& path, const SettingEnsemble& ens);
SettingEnsemble read_settings_json(const std::string& path);

// ---------------------------------------------------------------------------
// Counts file (CSV): header `setting,outcome_index,count,shots`. Zero-count
// rows may be omitted; per-setting counts must sum to the shots column.
// ---------------------------------------------------------------------------

void write_counts_csv(const std::string& path, const std::vector<MeasurementRecord>& records);
std::vector<MeasurementRecord> read_counts_csv(const std::string& path);

SettingEnsemble ensemble_from_records(const std::vector<MeasurementRecord>& records);
DataVector frequencies_from_records(const std::vector<MeasurementRecord>& records);

// ---------------------------------------------------------------------------
// Pure state file: {"label": ..., "L": ..., "amplitudes": [[re, im], ...]}
// ---------------------------------------------------------------------------

void write_state_json(const std::string& path, const LogicalState& state);
LogicalState read_state_json(const std::string& path);

/// Hermitian matrices are embedded as {"dim": d, "entries": [re, im, ...]}
/// with row-major real/imag interleaving.
json hermitian_to_json(const HermitianMatrix& h);
HermitianMatrix hermitian_from_json(const json& j);

void write_density_json(const std::string& path, const HermitianMatrix& h);
HermitianMatrix read_density_json(const std::string& path);

// ---------------------------------------------------------------------------
// Estimate export
// ---------------------------------------------------------------------------

void write_estimate_json(const std::string& path, const std::string& estimator_name,
                         const EstimateResult& result, const Spectrum& spectrum,
                         std::optional<double> fidelity_to_reference);

// ---------------------------------------------------------------------------
// Threshold report
// ---------------------------------------------------------------------------

void write_threshold_report_json(const std::string& path, const ThresholdReport& report,
                                 std::optional<int> guta_rank);

// ---------------------------------------------------------------------------
// Grid CSV: true_rank,n_settings,m,trial,selected_rank,risk,estimator,seed
// ---------------------------------------------------------------------------

std::string grid_csv_header();
std::string grid_row_csv(const GridRow& row);
std::vector<GridRow> read_grid_csv(const std::string& path);

// ---------------------------------------------------------------------------
// Correlator CSV: setting,correlator,shots
// ---------------------------------------------------------------------------

void write_correlators_csv(const std::string& path,
                           const std::vector<MeasurementRecord>& records);

// ---------------------------------------------------------------------------
// Run manifest
// ---------------------------------------------------------------------------

struct ManifestData {
  std::string command;
  std::string version;
  std::string timestamp_utc;
  json config;
  json seeds;
  std::vector<std::pair<std::string, std::string>> inputs;  // (path, digest)
  std::vector<std::string> outputs;
};

json manifest_to_json(const ManifestData& m);
void write_manifest_json(const std::string& path, const ManifestData& m);

// ---------------------------------------------------------------------------
// Minimal JSON-schema checking (type/properties/required/items/enum bounds);
// enough to validate every document this tool emits.
// ---------------------------------------------------------------------------

void validate_schema(const json& doc, const json& schema, const std::string& where = "$");

}  // namespace qct::io
