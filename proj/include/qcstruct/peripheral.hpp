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

// Peripheral eigen-analysis of a map given by Kraus operators: the
// eigenvalues of modulus (close to) one and the right/left eigenspaces of the
// eigenvalue-1 cluster. Small problems use a dense eigendecomposition of the
// d² x d² superoperator; larger ones use block subspace iteration driven by
// Kraus products, which never forms the superoperator.

#pragma once

#include <Eigen/Sparse>

#include <algorithm>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qcstruct/numerics.hpp"

namespace qcstruct {

struct SolverOptions {
  /// Superoperators of size up to dense_limit use the dense route.
  Index dense_limit = 576;
  Index initial_block = 16;
  int power_steps = 4;
  int max_iterations = 40000;
  double residual_tol = 1e-12;
  std::uint64_t start_seed = 0x5eedULL;
};

/// Dense d² x d² matrix of X -> Σ V X Vᴴ under column stacking, i.e.
/// Σ conj(V) ⊗ V.
inline ComplexMatrix dense_superoperator(const std::vector<ComplexMatrix>& kraus) {
  if (kraus.empty()) return {};
  const Index d = kraus.front().rows();
  ComplexMatrix s = ComplexMatrix::Zero(d * d, d * d);
  for (const ComplexMatrix& v : kraus) {
    const ComplexMatrix vc = v.conjugate();
    for (Index a = 0; a < d; ++a) {
      for (Index b = 0; b < d; ++b) {
        if (vc(a, b) == Complex(0.0)) continue;
        s.block(a * d, b * d, d, d) += vc(a, b) * v;
      }
    }
  }
  return s;
}

/// Applies X -> Σ V X Vᴴ (or the adjoint X -> Σ Vᴴ X V) to each column of a
/// block of vectorized matrices. Sparse Kraus operators are stored sparse.
class KrausMap {
 public:
  KrausMap(const std::vector<ComplexMatrix>& kraus, bool adjoint) {
    if (kraus.empty()) throw Error("kraus_map", "empty Kraus family");
    d_ = kraus.front().rows();
    for (const ComplexMatrix& v0 : kraus) {
      const ComplexMatrix v = adjoint ? ComplexMatrix(v0.adjoint()) : v0;
      const Index nnz = (v.array() != Complex(0.0)).count();
      if (nnz * 4 <= v.size()) {
        Eigen::SparseMatrix<Complex> sv = v.sparseView();
        sv.makeCompressed();
        Eigen::SparseMatrix<Complex> svh = sv.adjoint();
        sparse_.push_back({std::move(sv), std::move(svh)});
      } else {
        dense_.push_back(v);
      }
    }
  }

  Index size() const { return d_ * d_; }
  Index dim() const { return d_; }

  ComplexMatrix apply_matrix(const ComplexMatrix& x) const {
    ComplexMatrix out = ComplexMatrix::Zero(d_, d_);
    for (const auto& [v, vh] : sparse_) {
      const ComplexMatrix vx = v * x;
      out += vx * vh;
    }
    for (const ComplexMatrix& v : dense_) out.noalias() += v * x * v.adjoint();
    return out;
  }

  ComplexMatrix operator()(const ComplexMatrix& block) const {
    ComplexMatrix out(block.rows(), block.cols());
    for (Index c = 0; c < block.cols(); ++c) {
      const ComplexMatrix x = Eigen::Map<const ComplexMatrix>(block.col(c).data(), d_, d_);
      const ComplexMatrix y = apply_matrix(x);
      out.col(c) = Eigen::Map<const ComplexVector>(y.data(), y.size());
    }
    return out;
  }

 private:
  struct SparsePair {
    Eigen::SparseMatrix<Complex> v;
    Eigen::SparseMatrix<Complex> vh;
  };
  Index d_ = 0;
  std::vector<SparsePair> sparse_;
  std::vector<ComplexMatrix> dense_;
};

namespace detail {

inline ComplexMatrix random_block(Index n, Index m, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  ComplexMatrix x(n, m);
  for (Index j = 0; j < m; ++j) {
    for (Index i = 0; i < n; ++i) x(i, j) = Complex(g(rng), g(rng));
  }
  return x;
}

inline ComplexMatrix orthonormalize(const ComplexMatrix& x) {
  Eigen::HouseholderQR<ComplexMatrix> qr(x);
  return qr.householderQ() * ComplexMatrix::Identity(x.rows(), x.cols());
}

inline std::vector<Complex> sorted_by_modulus(const Eigen::VectorXcd& ev) {
  std::vector<Complex> out(ev.data(), ev.data() + ev.size());
  std::stable_sort(out.begin(), out.end(),
                   [](Complex a, Complex b) { return std::abs(a) > std::abs(b); });
  return out;
}

/// Null space of (h - shift I) of exactly `count` dimensions (smallest
/// singular directions). Robust for semisimple clusters where eigenvector
/// back-substitution is not.
inline ComplexMatrix cluster_null_space(const ComplexMatrix& h, Complex shift, Index count,
                                        bool left, double* worst_singular = nullptr) {
  const Index m = h.rows();
  ComplexMatrix a = h - shift * ComplexMatrix::Identity(m, m);
  const auto svd = checked_svd(a, left, !left, true);
  if (worst_singular) *worst_singular = count > 0 ? svd.s(m - count) : 0.0;
  return left ? ComplexMatrix(svd.u.rightCols(count)) : ComplexMatrix(svd.v.rightCols(count));
}

/// Groups values whose mutual distance chains within `tol`.
inline std::vector<std::vector<Complex>> cluster_values(std::vector<Complex> values, double tol) {
  std::vector<std::vector<Complex>> clusters;
  for (Complex v : values) {
    bool placed = false;
    for (auto& c : clusters) {
      for (Complex w : c) {
        if (std::abs(v - w) <= tol) {
          c.push_back(v);
          placed = true;
          break;
        }
      }
      if (placed) break;
    }
    if (!placed) clusters.push_back({v});
  }
  return clusters;
}

inline Complex mean(const std::vector<Complex>& c) {
  Complex s = 0.0;
  for (Complex v : c) s += v;
  return s / static_cast<double>(c.size());
}

}  // namespace detail

/// Result of block subspace iteration: an orthonormal basis of the dominant
/// invariant subspace and the projected operator on it.
struct DominantSubspace {
  ComplexMatrix basis;
  ComplexMatrix projected;
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;
};

/// Block subspace iteration with Rayleigh-Ritz for all eigenvalues within
/// `floor_margin` of the spectral radius in modulus (peripheral candidates).
/// The block grows until it holds every candidate plus a guard band.
template <class Op>
DominantSubspace dominant_subspace(const Op& op, Index n, double floor_margin, const SolverOptions& opts) {
  std::mt19937_64 rng(opts.start_seed);
  Index m = std::min(n, std::max<Index>(opts.initial_block, 1));
  ComplexMatrix q = detail::orthonormalize(detail::random_block(n, m, rng));
  DominantSubspace out;
  const int check_every = std::max(1, 5 * opts.power_steps);
  int it = 0;
  while (true) {
    for (int s = 0; s < opts.power_steps; ++s) q = op(q);
    q = detail::orthonormalize(q);
    it += opts.power_steps;
    if (it % check_every != 0 && it < opts.max_iterations) continue;

    const ComplexMatrix aq = op(q);
    const ComplexMatrix h = q.adjoint() * aq;
    Eigen::ComplexEigenSolver<ComplexMatrix> es(h, false);
    const std::vector<Complex> theta = detail::sorted_by_modulus(es.eigenvalues());
    const double radius = theta.empty() ? 0.0 : std::abs(theta.front());
    const double floor = radius - floor_margin;
    std::vector<Complex> candidates;
    for (Complex t : theta) {
      if (std::abs(t) >= floor && radius > 0.0) candidates.push_back(t);
    }
    const Index count = static_cast<Index>(candidates.size());
    const Index guard = std::max<Index>(4, m / 4);
    if (count > m - guard && m < n) {
      const Index grown = std::min(n, 2 * m);
      ComplexMatrix wider(n, grown);
      wider << q, detail::random_block(n, grown - m, rng);
      q = detail::orthonormalize(wider);
      m = grown;
      continue;
    }

    // Residual of the candidate invariant subspace.
    double residual = 0.0;
    if (count > 0 && m < n) {
      std::vector<ComplexMatrix> parts;
      Index cols = 0;
      for (const auto& c : detail::cluster_values(candidates, 1e-6)) {
        parts.push_back(detail::cluster_null_space(h, detail::mean(c), static_cast<Index>(c.size()), false));
        cols += parts.back().cols();
      }
      ComplexMatrix y(m, cols);
      Index at = 0;
      for (const auto& p : parts) {
        y.middleCols(at, p.cols()) = p;
        at += p.cols();
      }
      y = detail::orthonormalize(y);
      const ComplexMatrix z = q * y;
      const ComplexMatrix az = aq * y;
      residual = (az - z * (z.adjoint() * az)).norm();
    }
    out.residual = residual;
    out.iterations = it;
    if (residual <= opts.residual_tol * std::max(1.0, radius) * std::sqrt(std::max<double>(1.0, count))) {
      out.converged = true;
      out.basis = q;
      out.projected = h;
      return out;
    }
    if (it >= opts.max_iterations) {
      out.basis = q;
      out.projected = h;
      return out;
    }
  }
}

/// Peripheral spectrum and eigenvalue-1 eigenspaces of X -> Σ V X Vᴴ.
struct PeripheralData {
  Index dim = 0;
  /// Eigenvalues with modulus >= 1 - eig_cluster_tol, sorted by argument.
  std::vector<Complex> eigenvalues;
  /// Orthonormal basis of vectorized right eigenvectors (fixed points of Φ).
  ComplexMatrix right;
  /// Orthonormal basis of vectorized left eigenvectors (fixed points of Φ*).
  ComplexMatrix left;
  double spectral_radius = 0.0;
  /// Distance from 1 to the nearest eigenvalue outside the unit cluster.
  double cluster_gap = 0.0;
  bool iterative = false;
  std::vector<std::string> warnings;

  Index unit_multiplicity() const { return right.cols(); }
};

namespace detail {

inline void sort_by_argument(std::vector<Complex>& values) {
  std::stable_sort(values.begin(), values.end(), [](Complex a, Complex b) {
    const double pa = std::abs(a.imag()) < 1e-14 && a.real() > 0 ? 0.0 : std::arg(a);
    const double pb = std::abs(b.imag()) < 1e-14 && b.real() > 0 ? 0.0 : std::arg(b);
    return pa < pb;
  });
}

inline void summarize_spectrum(const std::vector<Complex>& all, const Tolerance& tol, PeripheralData& out,
                               Index& unit_count) {
  unit_count = 0;
  out.cluster_gap = 2.0;
  out.spectral_radius = 0.0;
  Index metastable = 0;
  for (Complex v : all) {
    out.spectral_radius = std::max(out.spectral_radius, std::abs(v));
    const double dist = std::abs(v - 1.0);
    if (dist <= tol.eig_cluster_tol) {
      ++unit_count;
    } else {
      out.cluster_gap = std::min(out.cluster_gap, dist);
      if (dist <= 10.0 * tol.eig_cluster_tol) ++metastable;
    }
    if (std::abs(v) >= 1.0 - tol.eig_cluster_tol) out.eigenvalues.push_back(v);
  }
  sort_by_argument(out.eigenvalues);
  if (metastable > 0) {
    std::ostringstream os;
    os << metastable << " eigenvalue(s) within 10x eig_cluster_tol of 1 were not absorbed into the fixed-point cluster";
    out.warnings.push_back(os.str());
  }
}

}  // namespace detail

inline PeripheralData peripheral_analysis(const std::vector<ComplexMatrix>& kraus, const Tolerance& tol = {},
                                          const SolverOptions& opts = {}) {
  tol.validate();
  if (kraus.empty()) throw Error("peripheral_analysis", "empty Kraus family");
  PeripheralData out;
  out.dim = kraus.front().rows();
  const Index n = out.dim * out.dim;
  Index k = 0;
  if (n <= opts.dense_limit) {
    const ComplexMatrix s = dense_superoperator(kraus);
    Eigen::ComplexEigenSolver<ComplexMatrix> es(s, false);
    const Eigen::VectorXcd& ev = es.eigenvalues();
    detail::summarize_spectrum(std::vector<Complex>(ev.data(), ev.data() + ev.size()), tol, out, k);
    double worst = 0.0;
    out.right = detail::cluster_null_space(s, 1.0, k, false, &worst);
    out.left = detail::cluster_null_space(s, 1.0, k, true);
    if (worst > std::sqrt(tol.eig_cluster_tol)) {
      out.warnings.push_back("eigenvalue-1 cluster is not semisimple at the cluster tolerance");
    }
    return out;
  }

  out.iterative = true;
  const double margin = std::max(1e-3, 100.0 * tol.eig_cluster_tol);
  const KrausMap forward(kraus, false);
  const KrausMap backward(kraus, true);
  const DominantSubspace fr = dominant_subspace(forward, n, margin, opts);
  const DominantSubspace bk = dominant_subspace(backward, n, margin, opts);
  for (const DominantSubspace* run : {&fr, &bk}) {
    if (!run->converged) {
      std::ostringstream os;
      os << "subspace iteration stopped after " << run->iterations << " iterations with residual "
         << run->residual;
      out.warnings.push_back(os.str());
    }
  }
  Eigen::ComplexEigenSolver<ComplexMatrix> es(fr.projected, false);
  const Eigen::VectorXcd& ev = es.eigenvalues();
  detail::summarize_spectrum(std::vector<Complex>(ev.data(), ev.data() + ev.size()), tol, out, k);
  Eigen::ComplexEigenSolver<ComplexMatrix> esb(bk.projected, false);
  Index kb = 0;
  for (Index i = 0; i < esb.eigenvalues().size(); ++i) {
    if (std::abs(esb.eigenvalues()(i) - 1.0) <= tol.eig_cluster_tol) ++kb;
  }
  if (kb != k) {
    out.warnings.push_back("left and right eigenvalue-1 multiplicities disagree; using the smaller");
    k = std::min(k, kb);
  }
  out.right = fr.basis * detail::orthonormalize(detail::cluster_null_space(fr.projected, 1.0, k, false));
  out.left = bk.basis * detail::orthonormalize(detail::cluster_null_space(bk.projected, 1.0, k, false));
  return out;
}

/// Spectral projection onto the eigenvalue-1 cluster, applied to a matrix:
/// right (leftᴴ right)⁻¹ leftᴴ vec(x).
inline ComplexMatrix unit_projection(const PeripheralData& p, const ComplexMatrix& x) {
  if (p.right.cols() == 0) return ComplexMatrix::Zero(x.rows(), x.cols());
  const ComplexMatrix gram = p.left.adjoint() * p.right;
  const ComplexVector coeff = gram.fullPivLu().solve(p.left.adjoint() * vec(x));
  return unvec(p.right * coeff, x.rows());
}

}  // namespace qcstruct
