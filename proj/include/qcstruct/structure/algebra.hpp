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

#include <cstdint>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qcstruct/channel.hpp"
#include "qcstruct/numerics.hpp"
#include "qcstruct/spectral.hpp"
#include "qcstruct/structure/enclosure.hpp"

namespace qcstruct {

/// Fixed points of X -> P_R Φ*(X) P_R on operators supported by R, written
/// in the coordinates of R's frame. The first basis element is Id_R/√dim R.
struct FixedPointAlgebra {
  Subspace recurrent;
  std::vector<ComplexMatrix> hermitian_basis;
  std::vector<std::string> warnings;

  Index dimension() const { return static_cast<Index>(hermitian_basis.size()); }
};

/// Kraus operators compressed to an enclosure, Fᴴ V F. Trace preserving on
/// the enclosure because V F = P V F.
inline std::vector<ComplexMatrix> compressed_kraus(const KrausChannel& ch, const Subspace& s) {
  std::vector<ComplexMatrix> out;
  out.reserve(ch.kraus().size());
  for (const ComplexMatrix& v : ch.kraus()) out.push_back(s.frame().adjoint() * v * s.frame());
  return out;
}

inline KrausChannel restrict_channel(const KrausChannel& ch, const Subspace& s, const Tolerance& tol = {}) {
  if (s.dim() == 0) throw Error("restrict_channel", "cannot restrict to the zero subspace");
  if (!is_enclosure(ch, s, tol)) throw Error("restrict_channel", "subspace is not an enclosure");
  return KrausChannel::unchecked(compressed_kraus(ch, s));
}

namespace detail {

/// Compressions of the Φ* fixed points to R. Every fixed point of the
/// compressed adjoint arises this way, and the correspondence is one to one,
/// so the compressed family spans the algebra.
inline FixedPointAlgebra algebra_from(const std::vector<ComplexMatrix>& adjoint_fixed, const Subspace& r,
                                      const Tolerance& tol) {
  FixedPointAlgebra alg;
  alg.recurrent = r;
  const ComplexMatrix& f = r.frame();
  std::vector<ComplexMatrix> compressed;
  compressed.reserve(adjoint_fixed.size());
  for (const ComplexMatrix& y : adjoint_fixed) compressed.push_back(f.adjoint() * y * f);
  const ComplexMatrix id = ComplexMatrix::Identity(r.dim(), r.dim());
  alg.hermitian_basis = hermitian_basis_checked(compressed, static_cast<Index>(adjoint_fixed.size()), tol,
                                                alg.warnings, &id);
  return alg;
}

inline ComplexMatrix compressed_adjoint(const std::vector<ComplexMatrix>& w, const ComplexMatrix& x) {
  ComplexMatrix out = ComplexMatrix::Zero(x.rows(), x.cols());
  for (const ComplexMatrix& v : w) out.noalias() += v.adjoint() * x * v;
  return out;
}

/// Real dimension of the span of Hermitian matrices.
inline Index hermitian_rank(const std::vector<ComplexMatrix>& xs, double rel_tol) {
  if (xs.empty()) return 0;
  const Index n = xs.front().size();
  RealMatrix coords(2 * n, static_cast<Index>(xs.size()));
  double scale = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const ComplexVector v = vec(xs[k]);
    coords.col(static_cast<Index>(k)) << v.real(), v.imag();
    scale = std::max(scale, v.norm());
  }
  if (scale == 0.0) return 0;
  const RealVector s = checked_svd(coords, false, false).s;
  Index rank = 0;
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) > rel_tol * scale) ++rank;
  }
  return rank;
}

}  // namespace detail

inline FixedPointAlgebra fixed_point_algebra_on_R(const KrausChannel& ch, const RecurrentSplit& split,
                                                  const Tolerance& tol = {}, const SolverOptions& opts = {}) {
  const SpectralAnalysis a = analyze_spectrum(ch, tol, opts);
  return detail::algebra_from(a.adjoint_fixed, split.recurrent, tol);
}

/// Same algebra from an existing spectral analysis, without a new eigensolve.
inline FixedPointAlgebra fixed_point_algebra_on_R(const SpectralAnalysis& a, const Tolerance& tol = {}) {
  return detail::algebra_from(a.adjoint_fixed, a.split.recurrent, tol);
}

/// Minimal enclosures inside R as eigenprojections of a random Hermitian
/// element of the fixed-point algebra. Each candidate is checked for
/// invariance and minimality; a degenerate draw is retried with seed + 1.
inline std::vector<Subspace> minimal_enclosures(const KrausChannel& ch, const FixedPointAlgebra& alg,
                                                std::uint64_t rng_seed, const Tolerance& tol = {}) {
  const Subspace& r = alg.recurrent;
  const Index dr = r.dim();
  if (dr == 0) throw Error("minimal_enclosures", "recurrent subspace is empty");
  const std::vector<ComplexMatrix> w = compressed_kraus(ch, r);
  std::ostringstream diag;
  constexpr int kAttempts = 8;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    std::mt19937_64 rng(rng_seed + static_cast<std::uint64_t>(attempt));
    std::normal_distribution<double> g;
    ComplexMatrix x = ComplexMatrix::Zero(dr, dr);
    for (const ComplexMatrix& h : alg.hermitian_basis) x += g(rng) * h;
    x = hermitian_part(x);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(x);
    const RealVector& ev = es.eigenvalues();
    const double cluster = tol.eig_cluster_tol * std::max(1.0, ev.cwiseAbs().maxCoeff());

    std::vector<std::pair<Index, Index>> clusters;  // (first column, count)
    Index start = 0;
    double min_gap = std::numeric_limits<double>::infinity();
    for (Index i = 1; i <= dr; ++i) {
      if (i == dr || ev(i) - ev(i - 1) > cluster) {
        clusters.emplace_back(start, i - start);
        if (i < dr) min_gap = std::min(min_gap, ev(i) - ev(i - 1));
        start = i;
      }
    }

    bool ok = true;
    std::vector<Subspace> out;
    for (const auto& [first, count] : clusters) {
      const ComplexMatrix u = es.eigenvectors().middleCols(first, count);
      const ComplexMatrix p = u * u.adjoint();
      if (max_abs(detail::compressed_adjoint(w, p) - p) > tol.geometry_tol()) {
        ok = false;
        break;
      }
      std::vector<ComplexMatrix> corners;
      for (const ComplexMatrix& h : alg.hermitian_basis) corners.push_back(hermitian_part(u.adjoint() * h * u));
      if (detail::hermitian_rank(corners, tol.geometry_tol()) != 1) {
        ok = false;
        break;
      }
      Subspace e = Subspace::from_frame(r.frame() * u, tol.geometry_tol());
      if (!is_enclosure(ch, e, tol)) {
        ok = false;
        break;
      }
      out.push_back(std::move(e));
    }
    if (ok) return out;
    diag << "attempt " << attempt << ": " << clusters.size() << " eigenvalue clusters, smallest gap " << min_gap
         << "; ";
  }
  throw Error("minimal_enclosures", "degenerate algebra sampling", diag.str());
}

struct BlockGrouping {
  std::vector<Subspace> alpha;
  std::vector<std::vector<Subspace>> beta;
};

/// Links two minimal enclosures when some algebra element has a nonzero
/// off-diagonal corner between them. Singletons are A-blocks; larger
/// connected components are B-blocks.
inline BlockGrouping group_into_blocks(const std::vector<Subspace>& enclosures, const FixedPointAlgebra& alg,
                                       const Tolerance& tol = {}) {
  (void)tol;
  const std::size_t m = enclosures.size();
  std::vector<ComplexMatrix> local;
  for (const Subspace& e : enclosures) local.push_back(alg.recurrent.frame().adjoint() * e.frame());
  std::vector<std::size_t> parent(m);
  std::iota(parent.begin(), parent.end(), 0);
  const auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  constexpr double kLinkThreshold = 1e-6;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      for (const ComplexMatrix& y : alg.hermitian_basis) {
        if ((local[j].adjoint() * y * local[i]).norm() > kLinkThreshold * y.norm()) {
          parent[find(j)] = find(i);
          break;
        }
      }
    }
  }
  std::vector<std::vector<std::size_t>> comps;
  std::vector<long> slot(m, -1);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t root = find(i);
    if (slot[root] < 0) {
      slot[root] = static_cast<long>(comps.size());
      comps.emplace_back();
    }
    comps[static_cast<std::size_t>(slot[root])].push_back(i);
  }
  BlockGrouping g;
  for (const auto& c : comps) {
    if (c.size() == 1) {
      g.alpha.push_back(enclosures[c.front()]);
      continue;
    }
    std::vector<Subspace> members;
    for (std::size_t i : c) {
      if (enclosures[i].dim() != enclosures[c.front()].dim()) {
        throw Error("group_into_blocks", "algebra/tolerance inconsistency: linked enclosures differ in dimension");
      }
      members.push_back(enclosures[i]);
    }
    g.beta.push_back(std::move(members));
  }
  return g;
}

/// Partial isometry Q from `from` onto `to` (ambient d x d matrix with
/// QᴴQ = P_from and QQᴴ = P_to), read off the polar part of the off-diagonal
/// corner of an algebra element. Phase gauge: the largest-magnitude entry of
/// Q in the given frames is real positive.
inline ComplexMatrix partial_isometry(const FixedPointAlgebra& alg, const Subspace& from, const Subspace& to,
                                      const Tolerance& tol = {}) {
  if (from.equals(to, tol.geometry_tol())) return from.projector();
  if (from.dim() != to.dim()) throw Error("partial_isometry", "enclosures differ in dimension");
  const ComplexMatrix& fr = alg.recurrent.frame();
  const ComplexMatrix ui = fr.adjoint() * from.frame();
  const ComplexMatrix uj = fr.adjoint() * to.frame();
  ComplexMatrix best;
  double best_norm = 0.0;
  for (const ComplexMatrix& y : alg.hermitian_basis) {
    const ComplexMatrix b = uj.adjoint() * y * ui;
    const double nb = b.norm();
    if (nb > best_norm && nb > 1e-6 * y.norm()) {
      best_norm = nb;
      best = b;
    }
  }
  if (best_norm == 0.0) throw Error("partial_isometry", "no algebra element links the two enclosures");
  const auto svd = checked_svd(best, true, true, true);
  const RealVector& s = svd.s;
  if (s(s.size() - 1) < (1.0 - 1e-6) * s(0)) {
    std::ostringstream os;
    os << "singular values spread from " << s(s.size() - 1) << " to " << s(0);
    throw Error("partial_isometry", "block not minimal at tolerance", os.str());
  }
  ComplexMatrix local = svd.u * svd.v.adjoint();
  Index bi = 0;
  Index bj = 0;
  local.cwiseAbs().maxCoeff(&bi, &bj);
  const Complex phase = local(bi, bj) / std::abs(local(bi, bj));
  local *= std::conj(phase);
  return to.frame() * local * from.frame().adjoint();
}

/// Unique invariant state of the channel restricted to a minimal enclosure,
/// embedded in the ambient space.
inline ComplexMatrix block_invariant_state(const KrausChannel& ch, const Subspace& v, const Tolerance& tol = {},
                                           const SolverOptions& opts = {}) {
  const KrausChannel restricted = restrict_channel(ch, v, tol);
  const SpectralAnalysis a = analyze_spectrum(restricted, tol, opts);
  const PerronFrobeniusCertificate c = certificate_from(a);
  if (!c.simple_and_faithful) {
    std::ostringstream os;
    os << "restriction has eigenvalue-1 multiplicity " << c.eigenvalue_1_multiplicity << " and invariant state rank "
       << c.invariant_state_rank << " of " << v.dim();
    throw Error("block_invariant_state", "V not minimal", os.str());
  }
  ComplexMatrix rho = v.frame() * a.split.rho_max * v.frame().adjoint();
  rho = hermitian_part(rho);
  return rho / rho.trace().real();
}

}  // namespace qcstruct
