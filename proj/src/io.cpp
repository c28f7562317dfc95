#include "qct/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "qct/errors.hpp"

namespace qct::io {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

std::int64_t parse_int(const std::string& s, const std::string& what, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const std::int64_t v = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError("line " + std::to_string(line_no) + ": cannot parse " + what + " '" + s + "'");
  }
}

json parse_json_file(const std::string& path) {
  const std::string text = read_file(path);
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw DataError(path + ": invalid JSON");
  return j;
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << content;
  if (!out) throw DataError("write failed for " + path);
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= static_cast<std::uint64_t>(c);
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return std::string(buf);
}

std::string file_digest(const std::string& path) { return fnv1a_hex(read_file(path)); }

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

// --------------------------- settings ---------------------------------------

void write_settings_json(const std::string& path, const SettingEnsemble& ens) {
  ens.validate();
  json j;
  j["L"] = ens.num_qubits;
  json list = json::array();
  for (const auto& s : ens.settings) list.push_back(s.str());
  j["settings"] = std::move(list);
  write_file(path, j.dump(2) + "\n");
}

SettingEnsemble read_settings_json(const std::string& path) {
  const json j = parse_json_file(path);
  if (!j.is_object() || !j.contains("L") || !j.contains("settings"))
    throw DataError(path + ": settings file needs keys L and settings");
  SettingEnsemble ens;
  ens.num_qubits = j.at("L").get<int>();
  for (const auto& item : j.at("settings")) {
    try {
      ens.settings.push_back(MeasurementSetting::from_string(item.get<std::string>()));
    } catch (const std::invalid_argument& e) {
      throw DataError(path + ": " + e.what());
    }
  }
  try {
    ens.validate();
  } catch (const std::invalid_argument& e) {
    throw DataError(path + ": " + e.what());
  }
  return ens;
}

// --------------------------- counts -----------------------------------------

void write_counts_csv(const std::string& path, const std::vector<MeasurementRecord>& records) {
  std::ostringstream out;
  out << "setting,outcome_index,count,shots\n";
  for (const auto& rec : records) {
    const std::string name = rec.setting.str();
    for (std::size_t k = 0; k < rec.counts.size(); ++k)
      out << name << ',' << k << ',' << rec.counts[k] << ',' << rec.shots << '\n';
  }
  write_file(path, out.str());
}

std::vector<MeasurementRecord> read_counts_csv(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t line_no = 0;

  if (!std::getline(in, line)) throw DataError(path + ": empty counts file");
  ++line_no;
  if (strip_cr(line) != "setting,outcome_index,count,shots")
    throw DataError(path + ": line 1: expected header setting,outcome_index,count,shots");

  struct Block {
    MeasurementRecord rec;
    std::vector<std::size_t> row_lines;
    std::vector<bool> seen;
  };
  std::vector<Block> blocks;
  std::map<std::string, std::size_t> index_of;
  int num_qubits = -1;

  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 4)
      throw DataError(path + ": line " + std::to_string(line_no) + ": expected 4 fields");

    MeasurementSetting setting;
    try {
      setting = MeasurementSetting::from_string(fields[0]);
    } catch (const std::invalid_argument& e) {
      throw DataError(path + ": line " + std::to_string(line_no) + ": " + e.what());
    }
    if (num_qubits < 0) num_qubits = setting.num_qubits();
    if (setting.num_qubits() != num_qubits)
      throw DataError(path + ": line " + std::to_string(line_no) +
                      ": setting length differs from earlier rows");
    const Eigen::Index dim = Eigen::Index(1) << num_qubits;

    const std::int64_t outcome = parse_int(fields[1], "outcome_index", line_no);
    const std::int64_t count = parse_int(fields[2], "count", line_no);
    const std::int64_t shots = parse_int(fields[3], "shots", line_no);
    if (outcome < 0 || outcome >= dim)
      throw DataError(path + ": line " + std::to_string(line_no) + ": outcome_index " +
                      std::to_string(outcome) + " outside [0, 2^L)");
    if (count < 0)
      throw DataError(path + ": line " + std::to_string(line_no) + ": negative count");
    if (shots < 1)
      throw DataError(path + ": line " + std::to_string(line_no) + ": shots must be >= 1");

    const std::string name = setting.str();
    auto it = index_of.find(name);
    if (it == index_of.end()) {
      it = index_of.emplace(name, blocks.size()).first;
      Block b;
      b.rec.setting = setting;
      b.rec.shots = shots;
      b.rec.counts.assign(static_cast<std::size_t>(dim), 0);
      b.seen.assign(static_cast<std::size_t>(dim), false);
      blocks.push_back(std::move(b));
    }
    Block& b = blocks[it->second];
    if (b.rec.shots != shots)
      throw DataError(path + ": line " + std::to_string(line_no) + ": shots differ within setting " +
                      name);
    if (b.seen[static_cast<std::size_t>(outcome)])
      throw DataError(path + ": line " + std::to_string(line_no) + ": duplicate outcome " +
                      std::to_string(outcome) + " for setting " + name);
    b.seen[static_cast<std::size_t>(outcome)] = true;
    b.rec.counts[static_cast<std::size_t>(outcome)] = count;
    b.row_lines.push_back(line_no);
  }

  if (blocks.empty()) throw DataError(path + ": no count rows");

  std::vector<MeasurementRecord> records;
  records.reserve(blocks.size());
  for (const auto& b : blocks) {
    std::int64_t total = 0;
    for (const auto c : b.rec.counts) total += c;
    if (total != b.rec.shots) {
      std::string rows;
      for (std::size_t i = 0; i < b.row_lines.size(); ++i)
        rows += (i ? "," : "") + std::to_string(b.row_lines[i]);
      throw DataError(path + ": setting " + b.rec.setting.str() + " (rows " + rows +
                      "): counts sum to " + std::to_string(total) + " but shots is " +
                      std::to_string(b.rec.shots));
    }
    records.push_back(b.rec);
  }
  return records;
}

SettingEnsemble ensemble_from_records(const std::vector<MeasurementRecord>& records) {
  if (records.empty()) throw DataError("counts: no records");
  SettingEnsemble ens;
  ens.num_qubits = records.front().setting.num_qubits();
  for (const auto& rec : records) ens.settings.push_back(rec.setting);
  try {
    ens.validate();
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("counts: ") + e.what());
  }
  return ens;
}

DataVector frequencies_from_records(const std::vector<MeasurementRecord>& records) {
  const SettingEnsemble ens = ensemble_from_records(records);
  const Eigen::Index d = ens.hilbert_dim();
  DataVector y(ens.data_length());
  for (std::size_t j = 0; j < records.size(); ++j)
    y.segment(static_cast<Eigen::Index>(j) * d, d) = records[j].frequencies();
  return y;
}

// --------------------------- states -----------------------------------------

void write_state_json(const std::string& path, const LogicalState& state) {
  json j;
  j["label"] = state.label;
  int num_qubits = 0;
  while ((Eigen::Index(1) << num_qubits) < state.vector.size()) ++num_qubits;
  j["L"] = num_qubits;
  json amps = json::array();
  for (Eigen::Index i = 0; i < state.vector.size(); ++i)
    amps.push_back({state.vector(i).real(), state.vector(i).imag()});
  j["amplitudes"] = std::move(amps);
  write_file(path, j.dump(2) + "\n");
}

LogicalState read_state_json(const std::string& path) {
  const json j = parse_json_file(path);
  if (!j.is_object() || !j.contains("amplitudes"))
    throw DataError(path + ": state file needs an amplitudes array");
  const auto& amps = j.at("amplitudes");
  if (!amps.is_array() || amps.empty()) throw DataError(path + ": amplitudes must be non-empty");
  Eigen::VectorXcd v(static_cast<Eigen::Index>(amps.size()));
  for (std::size_t i = 0; i < amps.size(); ++i) {
    const auto& a = amps[i];
    if (!a.is_array() || a.size() != 2)
      throw DataError(path + ": amplitude " + std::to_string(i) + " must be [re, im]");
    v(static_cast<Eigen::Index>(i)) = {a[0].get<double>(), a[1].get<double>()};
  }
  if ((v.size() & (v.size() - 1)) != 0)
    throw DataError(path + ": amplitude count must be a power of two");
  const double norm = v.norm();
  if (std::abs(norm - 1.0) > 1e-6)
    throw DataError(path + ": state norm " + std::to_string(norm) + " is not 1");
  v /= norm;
  LogicalState state;
  state.label = j.value("label", std::string("reference"));
  state.vector = std::move(v);
  return state;
}

json hermitian_to_json(const HermitianMatrix& h) {
  json j;
  j["dim"] = h.dim();
  json entries = json::array();
  for (Eigen::Index i = 0; i < h.dim(); ++i) {
    for (Eigen::Index k = 0; k < h.dim(); ++k) {
      entries.push_back(h.mat()(i, k).real());
      entries.push_back(h.mat()(i, k).imag());
    }
  }
  j["entries"] = std::move(entries);
  return j;
}

HermitianMatrix hermitian_from_json(const json& j) {
  if (!j.is_object() || !j.contains("dim") || !j.contains("entries"))
    throw DataError("matrix JSON needs keys dim and entries");
  const Eigen::Index d = j.at("dim").get<Eigen::Index>();
  const auto& entries = j.at("entries");
  if (static_cast<Eigen::Index>(entries.size()) != 2 * d * d)
    throw DataError("matrix JSON: entries length must be 2*dim^2");
  Eigen::MatrixXcd m(d, d);
  std::size_t pos = 0;
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index k = 0; k < d; ++k) {
      const double re = entries[pos].get<double>();
      const double im = entries[pos + 1].get<double>();
      m(i, k) = {re, im};
      pos += 2;
    }
  }
  return HermitianMatrix(m);
}

void write_density_json(const std::string& path, const HermitianMatrix& h) {
  write_file(path, hermitian_to_json(h).dump(2) + "\n");
}

HermitianMatrix read_density_json(const std::string& path) {
  return hermitian_from_json(parse_json_file(path));
}

// --------------------------- estimate ---------------------------------------

void write_estimate_json(const std::string& path, const std::string& estimator_name,
                         const EstimateResult& result, const Spectrum& spectrum,
                         std::optional<double> fidelity_to_reference) {
  json j;
  j["estimator"] = estimator_name;
  j["dim"] = result.rho_hat.dim();
  j["eigenvalues"] = std::vector<double>(
      spectrum.eigenvalues.data(), spectrum.eigenvalues.data() + spectrum.eigenvalues.size());
  j["objective_trace"] = result.objective_trace;
  j["iterations"] = result.iterations;
  j["converged"] = result.converged;
  j["residual"] = result.residual;
  if (fidelity_to_reference) {
    // raw value can undershoot 0 by round-off; reports clip to [0, 1]
    j["fidelity"] = std::min(std::max(*fidelity_to_reference, 0.0), 1.0);
  }
  j["matrix"] = hermitian_to_json(result.rho_hat);
  write_file(path, j.dump(2) + "\n");
}

// --------------------------- threshold report -------------------------------

void write_threshold_report_json(const std::string& path, const ThresholdReport& report,
                                 std::optional<int> guta_rank) {
  json j;
  j["dim"] = report.truncated_state.dim();
  j["eigenvalues"] = std::vector<double>(
      report.eigenvalues.data(), report.eigenvalues.data() + report.eigenvalues.size());
  j["mean_overlaps"] = std::vector<double>(
      report.mean_overlaps.data(), report.mean_overlaps.data() + report.mean_overlaps.size());
  j["e_d"] = report.e_d;
  j["selected_rank"] = report.selected_rank;
  j["normalization"] = report.normalization;
  j["degenerate"] = report.degenerate;
  if (guta_rank) j["guta_rank"] = *guta_rank;
  j["truncated_matrix"] = hermitian_to_json(report.truncated_state);
  write_file(path, j.dump(2) + "\n");
}

// --------------------------- grid CSV ---------------------------------------

std::string grid_csv_header() {
  return "true_rank,n_settings,m,trial,selected_rank,risk,estimator,seed\n";
}

std::string grid_row_csv(const GridRow& row) {
  std::ostringstream out;
  out << row.cell.true_rank << ',' << row.cell.n_settings << ',' << row.cell.m << ',' << row.trial
      << ',' << row.selected_rank << ',' << format_double(row.risk) << ',' << row.estimator << ','
      << row.seed << '\n';
  return out.str();
}

std::vector<GridRow> read_grid_csv(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw DataError(path + ": empty grid file");
  ++line_no;
  if (strip_cr(line) + "\n" != grid_csv_header())
    throw DataError(path + ": unexpected grid header");

  std::vector<GridRow> rows;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 8)
      throw DataError(path + ": line " + std::to_string(line_no) + ": expected 8 fields");
    GridRow row;
    row.cell.true_rank = static_cast<int>(parse_int(fields[0], "true_rank", line_no));
    row.cell.n_settings = static_cast<int>(parse_int(fields[1], "n_settings", line_no));
    row.cell.m = parse_int(fields[2], "m", line_no);
    row.trial = static_cast<int>(parse_int(fields[3], "trial", line_no));
    row.selected_rank = static_cast<int>(parse_int(fields[4], "selected_rank", line_no));
    try {
      row.risk = std::stod(fields[5]);
    } catch (const std::exception&) {
      throw DataError(path + ": line " + std::to_string(line_no) + ": cannot parse risk");
    }
    row.estimator = fields[6];
    row.seed = static_cast<std::uint64_t>(std::stoull(fields[7]));
    rows.push_back(std::move(row));
  }
  return rows;
}

// --------------------------- correlators ------------------------------------

void write_correlators_csv(const std::string& path,
                           const std::vector<MeasurementRecord>& records) {
  std::ostringstream out;
  out << "setting,correlator,shots\n";
  for (const auto& rec : records)
    out << rec.setting.str() << ',' << format_double(pauli_correlator(rec)) << ',' << rec.shots
        << '\n';
  write_file(path, out.str());
}

// --------------------------- manifest ---------------------------------------

json manifest_to_json(const ManifestData& m) {
  json j;
  j["command"] = m.command;
  j["version"] = m.version;
  j["timestamp_utc"] = m.timestamp_utc;
  j["config"] = m.config;
  j["seeds"] = m.seeds;
  json inputs = json::object();
  for (const auto& [path, digest] : m.inputs) inputs[path] = digest;
  j["inputs"] = std::move(inputs);
  j["outputs"] = m.outputs;
  return j;
}

void write_manifest_json(const std::string& path, const ManifestData& m) {
  write_file(path, manifest_to_json(m).dump(2) + "\n");
}

// --------------------------- schema checking --------------------------------

namespace {

bool type_matches(const json& doc, const std::string& type) {
  if (type == "object") return doc.is_object();
  if (type == "array") return doc.is_array();
  if (type == "string") return doc.is_string();
  if (type == "number") return doc.is_number();
  if (type == "integer") return doc.is_number_integer();
  if (type == "boolean") return doc.is_boolean();
  if (type == "null") return doc.is_null();
  throw DataError("schema: unsupported type '" + type + "'");
}

}  // namespace

void validate_schema(const json& doc, const json& schema, const std::string& where) {
  if (schema.contains("type")) {
    const auto& t = schema.at("type");
    bool ok = false;
    if (t.is_string()) {
      ok = type_matches(doc, t.get<std::string>());
    } else {
      for (const auto& item : t) ok = ok || type_matches(doc, item.get<std::string>());
    }
    if (!ok) throw DataError(where + ": type mismatch (expected " + t.dump() + ")");
  }
  if (schema.contains("enum")) {
    bool ok = false;
    for (const auto& v : schema.at("enum")) ok = ok || v == doc;
    if (!ok) throw DataError(where + ": value not in enum");
  }
  if (schema.contains("minimum") && doc.is_number()) {
    if (doc.get<double>() < schema.at("minimum").get<double>())
      throw DataError(where + ": below minimum");
  }
  if (schema.contains("maximum") && doc.is_number()) {
    if (doc.get<double>() > schema.at("maximum").get<double>())
      throw DataError(where + ": above maximum");
  }
  if (doc.is_object()) {
    if (schema.contains("required")) {
      for (const auto& key : schema.at("required")) {
        if (!doc.contains(key.get<std::string>()))
          throw DataError(where + ": missing required key " + key.get<std::string>());
      }
    }
    if (schema.contains("properties")) {
      for (const auto& [key, sub] : schema.at("properties").items()) {
        if (doc.contains(key)) validate_schema(doc.at(key), sub, where + "." + key);
      }
    }
    if (schema.contains("additionalProperties") &&
        schema.at("additionalProperties").is_boolean() &&
        !schema.at("additionalProperties").get<bool>()) {
      const auto& props = schema.contains("properties") ? schema.at("properties") : json::object();
      for (const auto& [key, value] : doc.items()) {
        (void)value;
        if (!props.contains(key)) throw DataError(where + ": unexpected key " + key);
      }
    }
  }
  if (doc.is_array()) {
    if (schema.contains("minItems") && doc.size() < schema.at("minItems").get<std::size_t>())
      throw DataError(where + ": too few items");
    if (schema.contains("items")) {
      for (std::size_t i = 0; i < doc.size(); ++i)
        validate_schema(doc[i], schema.at("items"), where + "[" + std::to_string(i) + "]");
    }
  }
}

}  // namespace qct::io
