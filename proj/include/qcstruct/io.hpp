// Copyright 2026 The qcstruct Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// JSON channel files and decomposition reports. Requires nlohmann/json.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qcstruct/channel.hpp"
#include "qcstruct/error.hpp"
#include "qcstruct/numerics.hpp"
#include "qcstruct/structure/decompose.hpp"
#include "qcstruct/structure/enclosure.hpp"

namespace qcstruct::io {

using json = nlohmann::json;

inline constexpr const char* kReportFormat = "qcstruct-report";
inline constexpr int kReportVersion = 1;

struct ChannelFile {
  Index dim = 0;
  std::vector<ComplexMatrix> kraus;
  std::string name;
  std::string description;
};

// ---- primitive encoders -------------------------------------------------

inline json to_json(Complex z) { return json::array({z.real(), z.imag()}); }

inline json to_json(const ComplexMatrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(to_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline json to_json(const Subspace& s) { return json{{"dim", s.dim()}, {"frame", to_json(s.frame())}}; }

inline double number_at(const json& j, const std::string& where) {
  if (!j.is_number()) throw ParseError(where + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ParseError(where + ": non-finite number");
  return v;
}

inline Complex complex_from(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) throw ParseError(where + ": expected [re, im]");
  return {number_at(j[0], where), number_at(j[1], where)};
}

inline const json& field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw ParseError(where + ": missing field '" + key + "'");
  return j.at(key);
}

/// Rows of [re, im] entries. `cols` < 0 accepts any consistent width.
inline ComplexMatrix matrix_from(const json& j, Index rows, Index cols, const std::string& where) {
  if (!j.is_array() || static_cast<Index>(j.size()) != rows) {
    std::ostringstream os;
    os << where << ": expected " << rows << " rows";
    throw ParseError(os.str());
  }
  if (rows == 0) return ComplexMatrix(0, std::max<Index>(cols, 0));
  const Index width = cols >= 0 ? cols : static_cast<Index>(j[0].is_array() ? j[0].size() : 0);
  ComplexMatrix m(rows, width);
  for (Index i = 0; i < rows; ++i) {
    const json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != width) {
      std::ostringstream os;
      os << where << ": row " << i << " must have " << width << " entries";
      throw ParseError(os.str());
    }
    for (Index k = 0; k < width; ++k) m(i, k) = complex_from(row[static_cast<std::size_t>(k)], where);
  }
  return m;
}

inline json parse_text(const std::string& text, const std::string& where) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(where + ": malformed JSON (" + e.what() + ")");
  }
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open file");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError(path + ": cannot open file for writing");
  out << text;
}

/// Canonical serialization: two-space indent, shortest round-trip floats,
/// trailing newline.
inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

// ---- channel files ------------------------------------------------------

inline ChannelFile channel_from_json(const json& j) {
  const std::string where = "channel";
  ChannelFile f;
  const json& dim = field(j, "dim", where);
  if (!dim.is_number_integer() || dim.get<long long>() <= 0) throw ParseError("channel: 'dim' must be a positive integer");
  f.dim = static_cast<Index>(dim.get<long long>());
  const json& kraus = field(j, "kraus", where);
  if (!kraus.is_array() || kraus.empty()) throw ParseError("channel: 'kraus' must be a non-empty array");
  for (std::size_t k = 0; k < kraus.size(); ++k) {
    f.kraus.push_back(matrix_from(kraus[k], f.dim, f.dim, "channel: kraus[" + std::to_string(k) + "]"));
  }
  if (j.contains("name")) {
    if (!j["name"].is_string()) throw ParseError("channel: 'name' must be a string");
    f.name = j["name"].get<std::string>();
  }
  if (j.contains("description")) {
    if (!j["description"].is_string()) throw ParseError("channel: 'description' must be a string");
    f.description = j["description"].get<std::string>();
  }
  return f;
}

inline json to_json(const ChannelFile& f) {
  json j;
  j["dim"] = f.dim;
  if (!f.name.empty()) j["name"] = f.name;
  if (!f.description.empty()) j["description"] = f.description;
  json kraus = json::array();
  for (const ComplexMatrix& m : f.kraus) kraus.push_back(to_json(m));
  j["kraus"] = std::move(kraus);
  return j;
}

inline ChannelFile channel_file(const KrausChannel& ch, std::string name = {}, std::string description = {}) {
  return {ch.dim(), ch.kraus(), std::move(name), std::move(description)};
}

inline ChannelFile read_channel_file(const std::string& path) {
  return channel_from_json(parse_text(read_text(path), path));
}

/// Markov matrix files hold either an array of rows or {"matrix": rows}.
inline RealMatrix markov_matrix_from_json(const json& j) {
  const json& rows = j.is_object() ? field(j, "matrix", "markov") : j;
  if (!rows.is_array() || rows.empty()) throw ParseError("markov: expected a non-empty array of rows");
  const auto n = static_cast<Index>(rows.size());
  RealMatrix p(n, n);
  for (Index i = 0; i < n; ++i) {
    const json& row = rows[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != n) throw ParseError("markov: matrix must be square");
    for (Index k = 0; k < n; ++k) p(i, k) = number_at(row[static_cast<std::size_t>(k)], "markov");
  }
  return p;
}

/// A vector given as plain reals or as [re, im] pairs.
inline ComplexVector vector_from_json(const json& j, Index dim) {
  if (!j.is_array() || static_cast<Index>(j.size()) != dim) {
    std::ostringstream os;
    os << "vector: expected " << dim << " entries";
    throw ParseError(os.str());
  }
  ComplexVector v(dim);
  for (Index i = 0; i < dim; ++i) {
    const json& e = j[static_cast<std::size_t>(i)];
    v(i) = e.is_array() ? complex_from(e, "vector") : Complex(number_at(e, "vector"), 0.0);
  }
  return v;
}

// ---- reports ------------------------------------------------------------

inline json to_json(const Tolerance& t) {
  return json{{"rank_tol", t.rank_tol}, {"eig_cluster_tol", t.eig_cluster_tol}, {"psd_tol", t.psd_tol}};
}

inline json to_json(const DecompositionReport& r) {
  json j;
  j["format"] = kReportFormat;
  j["version"] = kReportVersion;
  j["dim"] = r.dim;
  j["rng_seed"] = r.rng_seed;
  j["tolerances"] = to_json(r.tolerance);
  j["fixed_space_dim"] = r.fixed_space_dim;
  json spectrum = json::array();
  for (Complex z : r.peripheral_spectrum) spectrum.push_back(to_json(z));
  j["peripheral_spectrum"] = std::move(spectrum);
  j["recurrent"] = to_json(r.recurrent);
  j["transient"] = to_json(r.transient);
  json alpha = json::array();
  for (const AlphaBlock& a : r.alpha_blocks) {
    alpha.push_back(json{{"enclosure", to_json(a.enclosure)}, {"invariant_state", to_json(a.invariant_state)}});
  }
  j["alpha_blocks"] = std::move(alpha);
  json beta = json::array();
  for (const BetaBlock& b : r.beta_blocks) {
    json encl = json::array();
    json isos = json::array();
    for (const Subspace& e : b.enclosures) encl.push_back(to_json(e));
    for (const ComplexMatrix& q : b.isometries) isos.push_back(to_json(q));
    beta.push_back(json{{"enclosures", std::move(encl)},
                        {"isometries", std::move(isos)},
                        {"reference_state", to_json(b.reference_state)}});
  }
  j["beta_blocks"] = std::move(beta);
  j["transport_residual"] = r.transport_residual;
  j["warnings"] = r.warnings;
  return j;
}

inline Subspace subspace_from(const json& j, Index dim, const std::string& where) {
  const json& k = field(j, "dim", where);
  if (!k.is_number_integer() || k.get<long long>() < 0 || k.get<long long>() > dim) {
    throw ParseError(where + ": invalid subspace dimension");
  }
  const ComplexMatrix frame = matrix_from(field(j, "frame", where), dim, static_cast<Index>(k.get<long long>()), where);
  try {
    return Subspace::from_frame(frame, 1e-8);
  } catch (const Error& e) {
    throw ParseError(where + ": " + e.message());
  }
}

/// Parses a report and re-verifies the orthonormality of every frame.
inline DecompositionReport report_from_json(const json& j) {
  const std::string where = "report";
  if (field(j, "format", where) != kReportFormat) throw ParseError("report: unknown format");
  if (field(j, "version", where) != kReportVersion) throw ParseError("report: unsupported version");
  DecompositionReport r;
  const json& dim = field(j, "dim", where);
  if (!dim.is_number_integer() || dim.get<long long>() <= 0) throw ParseError("report: 'dim' must be positive");
  r.dim = static_cast<Index>(dim.get<long long>());
  const json& seed = field(j, "rng_seed", where);
  if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0)) {
    throw ParseError("report: 'rng_seed' must be a nonnegative integer");
  }
  r.rng_seed = seed.get<std::uint64_t>();
  const json& tol = field(j, "tolerances", where);
  r.tolerance.rank_tol = number_at(field(tol, "rank_tol", where), "report: rank_tol");
  r.tolerance.eig_cluster_tol = number_at(field(tol, "eig_cluster_tol", where), "report: eig_cluster_tol");
  r.tolerance.psd_tol = number_at(field(tol, "psd_tol", where), "report: psd_tol");
  const json& fsd = field(j, "fixed_space_dim", where);
  if (!fsd.is_number_integer()) throw ParseError("report: 'fixed_space_dim' must be an integer");
  r.fixed_space_dim = static_cast<Index>(fsd.get<long long>());
  const json& spectrum = field(j, "peripheral_spectrum", where);
  if (!spectrum.is_array()) throw ParseError("report: 'peripheral_spectrum' must be an array");
  for (const json& z : spectrum) r.peripheral_spectrum.push_back(complex_from(z, "report: peripheral_spectrum"));
  r.recurrent = subspace_from(field(j, "recurrent", where), r.dim, "report: recurrent");
  r.transient = subspace_from(field(j, "transient", where), r.dim, "report: transient");
  const json& alpha = field(j, "alpha_blocks", where);
  if (!alpha.is_array()) throw ParseError("report: 'alpha_blocks' must be an array");
  for (const json& a : alpha) {
    AlphaBlock b;
    b.enclosure = subspace_from(field(a, "enclosure", where), r.dim, "report: alpha enclosure");
    b.invariant_state = matrix_from(field(a, "invariant_state", where), r.dim, r.dim, "report: alpha state");
    r.alpha_blocks.push_back(std::move(b));
  }
  const json& beta = field(j, "beta_blocks", where);
  if (!beta.is_array()) throw ParseError("report: 'beta_blocks' must be an array");
  for (const json& bj : beta) {
    BetaBlock b;
    const json& encl = field(bj, "enclosures", where);
    const json& isos = field(bj, "isometries", where);
    if (!encl.is_array() || !isos.is_array() || encl.size() != isos.size() || encl.size() < 2) {
      throw ParseError("report: B-block needs at least two enclosures and one isometry each");
    }
    for (const json& e : encl) b.enclosures.push_back(subspace_from(e, r.dim, "report: beta enclosure"));
    for (const json& q : isos) b.isometries.push_back(matrix_from(q, r.dim, r.dim, "report: isometry"));
    b.reference_state = matrix_from(field(bj, "reference_state", where), r.dim, r.dim, "report: reference state");
    r.beta_blocks.push_back(std::move(b));
  }
  r.transport_residual = number_at(field(j, "transport_residual", where), "report: transport_residual");
  const json& warnings = field(j, "warnings", where);
  if (!warnings.is_array()) throw ParseError("report: 'warnings' must be an array");
  for (const json& w : warnings) {
    if (!w.is_string()) throw ParseError("report: warnings must be strings");
    r.warnings.push_back(w.get<std::string>());
  }
  return r;
}

inline DecompositionReport read_report_file(const std::string& path) {
  return report_from_json(parse_text(read_text(path), path));
}

/// Re-checks a loaded report against its channel: every listed enclosure
/// passes the enclosure predicate and the pieces tile the space orthogonally.
inline void verify_report(const DecompositionReport& r, const KrausChannel& ch) {
  if (r.dim != ch.dim()) throw Error("verify_report", "report and channel dimensions differ");
  detail::check_report_geometry(ch, r, r.tolerance);
}

inline json error_json(const Error& e) {
  return json{{"error", {{"stage", e.stage()}, {"message", e.message()}, {"diagnostics", e.diagnostics()}}}};
}

}  // namespace qcstruct::io
