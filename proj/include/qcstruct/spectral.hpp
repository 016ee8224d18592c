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

#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include "qcstruct/channel.hpp"
#include "qcstruct/numerics.hpp"
#include "qcstruct/peripheral.hpp"

namespace qcstruct {

/// Invariant elements F(Φ) = {X : Φ(X) = X}.
struct FixedSpace {
  Index dim_ambient = 0;
  std::vector<ComplexMatrix> basis;
  /// Hilbert-Schmidt orthonormal Hermitian basis of the same complex span.
  std::vector<ComplexMatrix> hermitian_basis;
  std::vector<std::string> warnings;

  Index dimension() const { return static_cast<Index>(basis.size()); }
};

/// H = R ⊕ D with R the support of the maximal invariant state.
struct RecurrentSplit {
  Subspace recurrent;
  Subspace transient;
  ComplexMatrix rho_max;
  std::vector<std::string> warnings;
};

struct PerronFrobeniusCertificate {
  Index eigenvalue_1_multiplicity = 0;
  Index invariant_state_rank = 0;
  bool simple_and_faithful = false;
};

/// Everything the structure stages need from one peripheral eigen-analysis.
struct SpectralAnalysis {
  PeripheralData peripheral;
  FixedSpace fixed;
  /// Hermitian basis of the fixed points of Φ*.
  std::vector<ComplexMatrix> adjoint_fixed;
  RecurrentSplit split;
};

namespace detail {

inline std::vector<ComplexMatrix> unvec_columns(const ComplexMatrix& cols, Index d) {
  std::vector<ComplexMatrix> out;
  for (Index k = 0; k < cols.cols(); ++k) out.push_back(unvec(cols.col(k), d));
  return out;
}

inline std::vector<ComplexMatrix> hermitian_basis_checked(const std::vector<ComplexMatrix>& xs, Index count,
                                                          const Tolerance& tol, std::vector<std::string>& warnings,
                                                          const ComplexMatrix* leading = nullptr) {
  double weakest = 1.0;
  double residue = 0.0;
  auto out = hermitian_basis(xs, count, leading, &weakest, &residue);
  if (count > 0 && (weakest < tol.rank_tol || residue > tol.geometry_tol())) {
    std::ostringstream os;
    os << "Hermitian re-extraction is rank-ambiguous (weakest " << weakest << ", residue " << residue << ")";
    warnings.push_back(os.str());
  }
  return out;
}

inline RecurrentSplit split_from(const PeripheralData& p, const Tolerance& tol) {
  const Index d = p.dim;
  RecurrentSplit out;
  ComplexMatrix rho = unit_projection(p, ComplexMatrix::Identity(d, d) / static_cast<double>(d));
  rho = hermitian_part(rho);
  const double tr = rho.trace().real();
  if (!(tr > 0.0)) throw Error("recurrent_split", "spectral projection of the maximally mixed state vanished");
  rho /= tr;
  out.rho_max = rho;
  out.recurrent = support(rho, tol);
  out.transient = orthogonal_complement(out.recurrent, tol);
  if (p.cluster_gap < 10.0 * tol.eig_cluster_tol) {
    std::ostringstream os;
    os << "eigenvalue-1 cluster is ill-separated (gap " << p.cluster_gap << ")";
    out.warnings.push_back(os.str());
  }
  for (const auto& w : p.warnings) out.warnings.push_back(w);
  return out;
}

}  // namespace detail

inline SpectralAnalysis analyze_spectrum(const KrausChannel& ch, const Tolerance& tol = {},
                                         const SolverOptions& opts = {}) {
  SpectralAnalysis a;
  a.peripheral = peripheral_analysis(ch.kraus(), tol, opts);
  const Index d = ch.dim();
  const Index k = a.peripheral.unit_multiplicity();
  a.fixed.dim_ambient = d;
  a.fixed.basis = detail::unvec_columns(a.peripheral.right, d);
  a.fixed.hermitian_basis = detail::hermitian_basis_checked(a.fixed.basis, k, tol, a.fixed.warnings);
  const ComplexMatrix id = ComplexMatrix::Identity(d, d);
  a.adjoint_fixed =
      detail::hermitian_basis_checked(detail::unvec_columns(a.peripheral.left, d), k, tol, a.fixed.warnings, &id);
  if (k == 0) throw Error("fixed_space", "no eigenvalue within eig_cluster_tol of 1; is the map trace preserving?");
  a.split = detail::split_from(a.peripheral, tol);
  return a;
}

inline FixedSpace fixed_space(const KrausChannel& ch, const Tolerance& tol = {}, const SolverOptions& opts = {}) {
  return analyze_spectrum(ch, tol, opts).fixed;
}

/// Ψ_n(ρ) = (1/n) Σ_{k<n} Φ^k(ρ).
inline ComplexMatrix cesaro_average(const KrausChannel& ch, const ComplexMatrix& rho, std::size_t n) {
  if (n == 0) throw Error("cesaro_average", "n must be positive");
  ComplexMatrix acc = ComplexMatrix::Zero(ch.dim(), ch.dim());
  ComplexMatrix cur = rho;
  for (std::size_t k = 0; k < n; ++k) {
    acc += cur;
    if (k + 1 < n) cur = qcstruct::apply(ch, cur);
  }
  return acc / static_cast<double>(n);
}

inline RecurrentSplit recurrent_split(const KrausChannel& ch, const Tolerance& tol = {},
                                      const SolverOptions& opts = {}) {
  return analyze_spectrum(ch, tol, opts).split;
}

/// Spectral projection onto the eigenvalue-1 cluster (limit of Ψ_n).
inline ComplexMatrix unit_spectral_projection(const KrausChannel& ch, const ComplexMatrix& rho,
                                              const Tolerance& tol = {}, const SolverOptions& opts = {}) {
  return unit_projection(peripheral_analysis(ch.kraus(), tol, opts), rho);
}

/// Eigenvalues of modulus >= 1 - eig_cluster_tol, sorted by argument.
inline std::vector<Complex> peripheral_spectrum(const KrausChannel& ch, const Tolerance& tol = {},
                                                const SolverOptions& opts = {}) {
  return peripheral_analysis(ch.kraus(), tol, opts).eigenvalues;
}

inline PerronFrobeniusCertificate certificate_from(const SpectralAnalysis& a) {
  PerronFrobeniusCertificate c;
  c.eigenvalue_1_multiplicity = a.fixed.dimension();
  c.invariant_state_rank = a.split.recurrent.dim();
  c.simple_and_faithful = c.eigenvalue_1_multiplicity == 1 && c.invariant_state_rank == a.fixed.dim_ambient;
  return c;
}

inline PerronFrobeniusCertificate perron_frobenius_certificate(const KrausChannel& ch, const Tolerance& tol = {},
                                                               const SolverOptions& opts = {}) {
  return certificate_from(analyze_spectrum(ch, tol, opts));
}

}  // namespace qcstruct
