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

// Command-line front end: validate, decompose, build and query channels.
// Exit codes: 0 success, 1 domain failure, 2 input or parse failure.

#include <cstdint>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "qcstruct/io.hpp"
#include "qcstruct/qcstruct.hpp"

namespace {

using qcstruct::io::json;

constexpr int kOk = 0;
constexpr int kDomainFailure = 1;
constexpr int kInputFailure = 2;

struct TolFlags {
  qcstruct::Tolerance tol;

  void attach(CLI::App* app) {
    app->add_option("--tol-rank", tol.rank_tol, "relative rank cutoff")->capture_default_str();
    app->add_option("--tol-eig", tol.eig_cluster_tol, "eigenvalue clustering distance")->capture_default_str();
    app->add_option("--tol-psd", tol.psd_tol, "admissible negative eigenvalue")->capture_default_str();
  }
};

// Bad tolerance flags are input errors, not analysis failures.
const qcstruct::Tolerance& checked(const qcstruct::Tolerance& tol) {
  try {
    tol.validate();
  } catch (const qcstruct::Error& e) {
    throw qcstruct::ParseError(e.what());
  }
  return tol;
}

void emit(const json& j, const std::string& out_path) {
  const std::string text = qcstruct::io::dump(j);
  if (out_path.empty()) {
    std::cout << text;
  } else {
    qcstruct::io::write_text(out_path, text);
  }
}

qcstruct::KrausChannel load_channel(const std::string& path, const qcstruct::Tolerance& tol, bool checked) {
  const qcstruct::io::ChannelFile f = qcstruct::io::read_channel_file(path);
  try {
    if (checked) return qcstruct::KrausChannel(f.kraus, tol);
    return qcstruct::KrausChannel::unchecked(f.kraus);
  } catch (const qcstruct::Error& e) {
    // Shape problems are input errors; a failed trace check is a domain error.
    if (e.stage() == "channel" && checked && e.message().find("trace preserving") != std::string::npos) throw;
    throw qcstruct::ParseError(path + ": " + e.what());
  }
}

int run_validate(const std::string& path, const qcstruct::Tolerance& tol) {
  const qcstruct::KrausChannel ch = load_channel(path, checked(tol), false);
  const qcstruct::ValidationReport v = qcstruct::validate(ch, tol);
  emit(json{{"dim", ch.dim()},
            {"kraus_count", ch.kraus().size()},
            {"trace_deviation", v.trace_deviation},
            {"spectral_radius", v.spectral_radius},
            {"trace_preserving", v.trace_preserving},
            {"spectrum_bounded", v.spectrum_bounded},
            {"passed", v.passed}},
       {});
  return v.passed ? kOk : kDomainFailure;
}

int run_decompose(const std::string& path, std::uint64_t seed, const qcstruct::Tolerance& tol, bool unchecked,
                  const std::string& out) {
  const qcstruct::KrausChannel ch = load_channel(path, checked(tol), !unchecked);
  emit(qcstruct::io::to_json(qcstruct::decompose(ch, seed, tol)), out);
  return kOk;
}

int run_query(const std::string& what, const std::string& path, const std::string& vector_text,
              const qcstruct::Tolerance& tol) {
  const qcstruct::KrausChannel ch = load_channel(path, checked(tol), false);
  json j;
  j["query"] = what;
  if (what == "enclosure") {
    const qcstruct::ComplexVector x =
        qcstruct::io::vector_from_json(qcstruct::io::parse_text(vector_text, "vector"), ch.dim());
    if (x.norm() == 0.0) throw qcstruct::ParseError("vector: must be nonzero");
    const qcstruct::Subspace s = qcstruct::enclosure_generated(ch, x, tol);
    j["enclosure"] = qcstruct::io::to_json(s);
  } else if (what == "irreducible") {
    const qcstruct::PerronFrobeniusCertificate c = qcstruct::perron_frobenius_certificate(ch, tol);
    j["irreducible"] = c.simple_and_faithful;
    j["certificate"] = {{"eigenvalue_1_multiplicity", c.eigenvalue_1_multiplicity},
                        {"invariant_state_rank", c.invariant_state_rank}};
  } else if (what == "fixed-points") {
    const qcstruct::FixedSpace f = qcstruct::fixed_space(ch, tol);
    json basis = json::array();
    for (const auto& h : f.hermitian_basis) basis.push_back(qcstruct::io::to_json(h));
    j["dimension"] = f.dimension();
    j["hermitian_basis"] = std::move(basis);
    j["warnings"] = f.warnings;
  } else {
    const qcstruct::PeripheralData p = qcstruct::peripheral_analysis(ch.kraus(), tol);
    json values = json::array();
    for (auto z : p.eigenvalues) values.push_back(qcstruct::io::to_json(z));
    j["peripheral_spectrum"] = std::move(values);
    j["spectral_radius"] = p.spectral_radius;
    j["warnings"] = p.warnings;
  }
  emit(j, {});
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structure analysis of quantum channels given in Kraus form"};
  app.require_subcommand(1);

  std::string path;
  std::string out;
  std::uint64_t seed = 0;
  bool unchecked = false;
  TolFlags validate_tol;
  TolFlags decompose_tol;
  TolFlags query_tol;

  auto* validate = app.add_subcommand("validate", "check trace preservation and spectral bounds");
  validate->add_option("path", path, "channel file")->required();
  validate_tol.attach(validate);

  auto* decompose = app.add_subcommand("decompose", "recurrent/transient split and block decomposition");
  decompose->add_option("path", path, "channel file")->required();
  decompose->add_option("--seed", seed, "random seed for the algebra sampling")->capture_default_str();
  decompose->add_option("--out", out, "write the report here instead of standard output");
  decompose->add_flag("--unchecked", unchecked, "skip the trace-preservation check");
  decompose_tol.attach(decompose);

  auto* build = app.add_subcommand("build", "write a channel file for a standard construction");
  build->require_subcommand(1);
  std::string matrix_path;
  auto* markov = build->add_subcommand("markov", "classical chain from a column-stochastic matrix");
  markov->add_option("--matrix", matrix_path, "JSON matrix file")->required();
  markov->add_option("--out", out, "write the channel here instead of standard output");
  double p = 0.0;
  double q = 0.0;
  std::size_t sites = 0;
  auto* oqrw = build->add_subcommand("oqrw", "three-level open quantum random walk, reflecting truncation");
  oqrw->add_option("--p", p, "right-jump parameter, 0 < p < 1/2")->required();
  oqrw->add_option("--q", q, "third-level parameter, p + q < 1")->required();
  oqrw->add_option("--sites", sites, "truncation N; sites 0..N")->required();
  oqrw->add_option("--out", out, "write the channel here instead of standard output");

  auto* query = app.add_subcommand("query", "enclosures, irreducibility, fixed points, spectrum");
  query->add_option("path", path, "channel file")->required();
  query->require_subcommand(1);
  query_tol.attach(query);
  std::string vector_text;
  auto* enclosure = query->add_subcommand("enclosure", "smallest enclosure containing a vector");
  enclosure->add_option("--vector", vector_text, "JSON array of reals or [re, im] pairs")->required();
  query->add_subcommand("irreducible", "irreducibility with its spectral certificate");
  query->add_subcommand("fixed-points", "Hermitian basis of the fixed space");
  query->add_subcommand("spectrum", "peripheral eigenvalues");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputFailure;
  }

  try {
    if (*validate) return run_validate(path, validate_tol.tol);
    if (*decompose) return run_decompose(path, seed, decompose_tol.tol, unchecked, out);
    if (*markov) {
      const qcstruct::RealMatrix m =
          qcstruct::io::markov_matrix_from_json(qcstruct::io::parse_text(qcstruct::io::read_text(matrix_path), matrix_path));
      emit(qcstruct::io::to_json(qcstruct::io::channel_file(qcstruct::from_markov_chain(m), "markov")), out);
      return kOk;
    }
    if (*oqrw) {
      const auto ch = qcstruct::from_oqrw(qcstruct::three_level_walk(p, q), sites, qcstruct::OqrwBoundary::kReflecting);
      std::ostringstream desc;
      desc << "three-level open quantum random walk, p=" << p << " q=" << q << " sites 0.." << sites;
      emit(qcstruct::io::to_json(qcstruct::io::channel_file(ch, "oqrw", desc.str())), out);
      return kOk;
    }
    for (const auto* sub : query->get_subcommands()) {
      return run_query(sub->get_name(), path, vector_text, query_tol.tol);
    }
  } catch (const qcstruct::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputFailure;
  } catch (const qcstruct::Error& e) {
    std::cout << qcstruct::io::dump(qcstruct::io::error_json(e));
    return kDomainFailure;
  }
  return kInputFailure;
}
