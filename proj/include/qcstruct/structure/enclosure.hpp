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

#include <cmath>
#include <cstddef>
#include <vector>

#include "qcstruct/channel.hpp"
#include "qcstruct/numerics.hpp"
#include "qcstruct/spectral.hpp"

namespace qcstruct {

/// Smallest subspace containing x and invariant under every Kraus operator,
/// grown by applying the Kraus family to the newest directions until nothing
/// new appears.
inline Subspace enclosure_generated(const KrausChannel& ch, const ComplexVector& x, const Tolerance& tol = {}) {
  if (x.size() != ch.dim()) throw Error("enclosure_generated", "vector has wrong dimension");
  if (x.norm() == 0.0) throw Error("enclosure_generated", "zero vector generates the zero space");
  const Index d = ch.dim();
  Subspace current = orthonormal_basis(ComplexMatrix(x / x.norm()), tol);
  ComplexMatrix frontier = current.frame();
  const auto n_ops = static_cast<Index>(ch.kraus().size());
  while (frontier.cols() > 0 && current.dim() < d) {
    ComplexMatrix images(d, frontier.cols() * n_ops);
    for (Index i = 0; i < n_ops; ++i) {
      images.middleCols(i * frontier.cols(), frontier.cols()) = ch.kraus()[static_cast<std::size_t>(i)] * frontier;
    }
    // Components orthogonal to what is already spanned.
    const ComplexMatrix fresh = images - current.frame() * (current.frame().adjoint() * images);
    const double scale = std::max(1.0, images.norm());
    if (fresh.norm() <= tol.rank_tol * scale) break;
    const auto svd = checked_svd(fresh, true, false);
    const RealVector& s = svd.s;
    Index rank = 0;
    while (rank < s.size() && s(rank) >= tol.rank_tol * scale) ++rank;
    if (rank == 0) break;
    ComplexMatrix add = svd.u.leftCols(rank);
    // Re-orthogonalize once against the current frame.
    add -= current.frame() * (current.frame().adjoint() * add);
    add = detail::orthonormalize(add);
    ComplexMatrix frame(d, current.dim() + rank);
    frame << current.frame(), add;
    current = Subspace::from_frame(frame, tol.geometry_tol());
    frontier = add;
  }
  return current;
}

/// Enc(x) as the span of the supports of Φⁿ(|x⟩⟨x|), n = 0..d-1.
inline Subspace enclosure_by_support_closure(const KrausChannel& ch, const ComplexVector& x,
                                             const Tolerance& tol = {}) {
  if (x.size() != ch.dim()) throw Error("enclosure_by_support_closure", "vector has wrong dimension");
  if (x.norm() == 0.0) throw Error("enclosure_by_support_closure", "zero vector generates the zero space");
  const ComplexVector u = x / x.norm();
  ComplexMatrix rho = u * u.adjoint();
  Subspace acc = support(rho, tol);
  for (Index n = 1; n < ch.dim(); ++n) {
    rho = qcstruct::apply(ch, rho);
    acc = subspace_sum(acc, support(rho, tol), tol);
  }
  return acc;
}

/// Largest eigenvalue of Σ Fᴴ Vᴴ (I - P) V F: the squared leak of S under the
/// Kraus family.
inline double enclosure_leak(const KrausChannel& ch, const Subspace& s) {
  if (s.ambient_dim() != ch.dim()) throw Error("is_enclosure", "ambient dimension mismatch");
  if (s.dim() == 0) return 0.0;
  const ComplexMatrix& f = s.frame();
  ComplexMatrix g = ComplexMatrix::Zero(s.dim(), s.dim());
  for (const ComplexMatrix& v : ch.kraus()) {
    const ComplexMatrix vf = v * f;
    const ComplexMatrix out = vf - f * (f.adjoint() * vf);
    g.noalias() += out.adjoint() * out;
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(g), Eigen::EigenvaluesOnly);
  return std::max(0.0, es.eigenvalues()(s.dim() - 1));
}

/// Vᵢ S ⊆ S for every Kraus operator. The threshold matches is_subharmonic:
/// the compression of Φ*(P) - P to S equals minus the leak operator.
inline bool is_enclosure(const KrausChannel& ch, const Subspace& s, const Tolerance& tol = {}) {
  return enclosure_leak(ch, s) <= tol.psd_tol;
}

/// Φ*(P) >= P for an orthogonal projection P.
inline bool is_subharmonic(const KrausChannel& ch, const ComplexMatrix& p, const Tolerance& tol = {}) {
  if (p.rows() != ch.dim() || p.cols() != ch.dim()) throw Error("is_subharmonic", "shape mismatch");
  if (!is_hermitian(p, tol.geometry_tol()) || max_abs(p * p - p) > tol.geometry_tol()) {
    throw Error("is_subharmonic", "input is not an orthogonal projection");
  }
  const ComplexMatrix ph = hermitian_part(p);
  return loewner_geq(hermitian_part(qcstruct::apply_adjoint(ch, ph)), ph, tol);
}

/// y ∈ Enc(x).
inline bool accessible(const KrausChannel& ch, const ComplexVector& x, const ComplexVector& y,
                       const Tolerance& tol = {}) {
  if (y.size() != ch.dim()) throw Error("accessible", "vector has wrong dimension");
  if (x.norm() == 0.0 || y.norm() == 0.0) throw Error("accessible", "zero vector");
  return enclosure_generated(ch, x, tol).contains(ComplexVector(y / y.norm()), tol.geometry_tol());
}

/// Enc(x) = Enc(y).
inline bool communicates(const KrausChannel& ch, const ComplexVector& x, const ComplexVector& y,
                         const Tolerance& tol = {}) {
  if (x.norm() == 0.0 || y.norm() == 0.0) throw Error("communicates", "zero vector");
  return enclosure_generated(ch, x, tol).equals(enclosure_generated(ch, y, tol), tol.geometry_tol());
}

/// Spectral decision: eigenvalue 1 simple with a faithful invariant state.
inline bool is_irreducible(const KrausChannel& ch, const Tolerance& tol = {}, const SolverOptions& opts = {}) {
  return perron_frobenius_certificate(ch, tol, opts).simple_and_faithful;
}

/// Positivity of the truncated series Σ_{k<=terms} t^k Φ^k(ρ)/k!. Diagnostic
/// only; irreducibility is decided spectrally.
inline bool ergodicity_probe(const KrausChannel& ch, const ComplexMatrix& rho, double t, std::size_t terms,
                             const Tolerance& tol = {}) {
  if (!(t > 0.0)) throw Error("ergodicity_probe", "t must be positive");
  ComplexMatrix term = rho;
  ComplexMatrix acc = rho;
  for (std::size_t k = 1; k <= terms; ++k) {
    term = qcstruct::apply(ch, term) * (t / static_cast<double>(k));
    acc += term;
  }
  return min_eigenvalue(acc) > tol.psd_tol;
}

}  // namespace qcstruct
