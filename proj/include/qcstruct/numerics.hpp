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

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qcstruct/error.hpp"

namespace qcstruct {

using Index = Eigen::Index;
using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr Complex kI{0.0, 1.0};

/// The single tolerance policy consumed by every analysis stage.
///
/// rank_tol is a relative singular-value cutoff, eig_cluster_tol the distance
/// used to group eigenvalues (|lambda - 1| for the fixed-point cluster) and
/// psd_tol the admissible magnitude of a negative eigenvalue.
struct Tolerance {
  double rank_tol = 1e-9;
  double eig_cluster_tol = 1e-8;
  double psd_tol = 1e-9;

  void validate() const {
    for (double v : {rank_tol, eig_cluster_tol, psd_tol}) {
      if (!(v > 0.0) || v > 1e-2) {
        throw Error("tolerance", "tolerances must lie in (0, 1e-2]");
      }
    }
  }

  /// Threshold for geometric comparisons between subspaces (containment,
  /// projector equality, hermiticity of inputs).
  double geometry_tol() const { return 1e3 * rank_tol; }
};

inline double max_abs(const ComplexMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline bool all_finite(const ComplexMatrix& m) {
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = 0; i < m.rows(); ++i) {
      if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) return false;
    }
  }
  return true;
}

/// Singular value decomposition with a consistency check. Eigen's
/// divide-and-conquer solver occasionally returns non-finite or inaccurate
/// factors on rank-deficient input; those results fall back to the one-sided
/// Jacobi solver.
template <class Mat>
struct SvdFactors {
  Mat u;
  RealVector s;
  Mat v;
};

namespace detail {

template <class Mat>
bool svd_consistent(const Mat& a, const SvdFactors<Mat>& f, bool want_u, bool want_v) {
  const RealVector& s = f.s;
  if (!s.allFinite() || (want_u && !f.u.allFinite()) || (want_v && !f.v.allFinite())) return false;
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) < 0.0 || (i > 0 && s(i) > s(i - 1) * (1.0 + 1e-12) + 1e-300)) return false;
  }
  const double norm = a.norm();
  const double slack = 1e-9 * std::max(norm, 1e-300) + 1e-300;
  if (std::abs(s.norm() - norm) > slack) return false;
  const Index k = s.size();
  // Singular value paired with column i of U or V; zero beyond the thin part.
  const auto sigma = [&](Index i) { return i < k ? s(i) : 0.0; };
  if (want_u) {
    const Mat gram = f.u.adjoint() * f.u;
    if ((gram - Mat::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() > 1e-9) return false;
    const Mat proj = f.u.adjoint() * a;
    for (Index i = 0; i < proj.rows(); ++i) {
      if (std::abs(proj.row(i).norm() - sigma(i)) > slack) return false;
    }
  }
  if (want_v) {
    const Mat gram = f.v.adjoint() * f.v;
    if ((gram - Mat::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() > 1e-9) return false;
    const Mat image = a * f.v;
    for (Index i = 0; i < image.cols(); ++i) {
      if (std::abs(image.col(i).norm() - sigma(i)) > slack) return false;
    }
    if (want_u && (image.leftCols(k) - f.u.leftCols(k) * s.asDiagonal()).norm() > slack) return false;
  }
  return true;
}

template <class Solver, class Mat>
SvdFactors<Mat> svd_with(const Mat& a, unsigned int options, bool want_u, bool want_v) {
  Solver svd(a, options);
  SvdFactors<Mat> f;
  f.s = svd.singularValues();
  if (want_u) f.u = svd.matrixU();
  if (want_v) f.v = svd.matrixV();
  return f;
}

}  // namespace detail

template <class Mat>
SvdFactors<Mat> checked_svd(const Mat& a, bool want_u, bool want_v, bool full = false) {
  unsigned int options = 0;
  if (want_u) options |= full ? Eigen::ComputeFullU : Eigen::ComputeThinU;
  if (want_v) options |= full ? Eigen::ComputeFullV : Eigen::ComputeThinV;
  if (a.size() == 0) return detail::svd_with<Eigen::JacobiSVD<Mat>>(a, options, want_u, want_v);
  SvdFactors<Mat> f = detail::svd_with<Eigen::BDCSVD<Mat>>(a, options, want_u, want_v);
  if (detail::svd_consistent(a, f, want_u, want_v)) return f;
  return detail::svd_with<Eigen::JacobiSVD<Mat>>(a, options, want_u, want_v);
}

inline ComplexMatrix hermitian_part(const ComplexMatrix& x) { return 0.5 * (x + x.adjoint()); }

inline bool is_hermitian(const ComplexMatrix& x, double tol) {
  if (x.rows() != x.cols()) return false;
  return max_abs(x - x.adjoint()) <= tol * std::max(1.0, max_abs(x));
}

/// Column-stacking vectorization: entry (i, j) of a d x d matrix lands at
/// position i + j * d.
inline ComplexVector vec(const ComplexMatrix& x) {
  return Eigen::Map<const ComplexVector>(x.data(), x.size());
}

inline ComplexMatrix unvec(const ComplexVector& v, Index d) {
  if (v.size() != d * d) throw Error("unvec", "vector length is not d^2");
  return Eigen::Map<const ComplexMatrix>(v.data(), d, d);
}

/// A closed subspace of C^n stored through an orthonormal column frame.
/// Frames are gauge-dependent; compare subspaces through `equals`.
class Subspace {
 public:
  Subspace() = default;

  static Subspace zero(Index ambient) { return Subspace(ambient, ComplexMatrix(ambient, 0)); }

  static Subspace full(Index ambient) {
    return Subspace(ambient, ComplexMatrix::Identity(ambient, ambient));
  }

  /// Wraps a frame after checking orthonormality within `check_tol`.
  static Subspace from_frame(ComplexMatrix frame, double check_tol = 1e-8) {
    const Index k = frame.cols();
    if (k > frame.rows()) throw Error("subspace", "frame has more columns than rows");
    if (!all_finite(frame)) throw Error("subspace", "frame has non-finite entries");
    const double dev = max_abs(frame.adjoint() * frame - ComplexMatrix::Identity(k, k));
    if (dev > check_tol) {
      std::ostringstream os;
      os << "frame is not orthonormal (deviation " << dev << ")";
      throw Error("subspace", os.str());
    }
    const Index n = frame.rows();
    return Subspace(n, std::move(frame));
  }

  Index ambient_dim() const { return ambient_; }
  Index dim() const { return frame_.cols(); }
  const ComplexMatrix& frame() const { return frame_; }

  ComplexMatrix projector() const { return frame_ * frame_.adjoint(); }

  /// Norm of the component of x orthogonal to this subspace.
  double distance(const ComplexVector& x) const {
    return (x - frame_ * (frame_.adjoint() * x)).norm();
  }

  bool contains(const ComplexVector& x, double tol) const {
    return distance(x) <= tol * std::max(1.0, x.norm());
  }

  bool contains(const Subspace& other, double tol) const {
    if (other.ambient_ != ambient_) return false;
    const ComplexMatrix& f = other.frame_;
    return (f - frame_ * (frame_.adjoint() * f)).norm() <= tol * std::max<double>(1.0, f.cols());
  }

  bool equals(const Subspace& other, double tol) const {
    return other.ambient_ == ambient_ && dim() == other.dim() &&
           max_abs(projector() - other.projector()) <= tol;
  }

 private:
  Subspace(Index ambient, ComplexMatrix frame) : ambient_(ambient), frame_(std::move(frame)) {}

  Index ambient_ = 0;
  ComplexMatrix frame_;
};

/// Span of the columns of `columns`, numerical rank decided by singular values
/// at least rank_tol times the largest one.
inline Subspace orthonormal_basis(const ComplexMatrix& columns, const Tolerance& tol = {}) {
  const Index n = columns.rows();
  if (columns.cols() == 0) return Subspace::zero(n);
  if (!all_finite(columns)) throw Error("orthonormal_basis", "non-finite input");
  const auto svd = checked_svd(columns, true, false);
  const RealVector& s = svd.s;
  if (s.size() == 0 || s(0) == 0.0) return Subspace::zero(n);
  Index rank = 0;
  while (rank < s.size() && s(rank) >= tol.rank_tol * s(0)) ++rank;
  return Subspace::from_frame(svd.u.leftCols(rank), 10.0 * std::max(tol.rank_tol, 1e-12));
}

inline Subspace orthonormal_basis(const std::vector<ComplexVector>& vectors,
                                  const Tolerance& tol = {},
                                  std::optional<Index> ambient_dim = std::nullopt) {
  if (vectors.empty()) {
    if (!ambient_dim) throw Error("orthonormal_basis", "ambient dimension required");
    return Subspace::zero(*ambient_dim);
  }
  const Index n = vectors.front().size();
  if (ambient_dim && *ambient_dim != n) throw Error("orthonormal_basis", "ambient dimension mismatch");
  ComplexMatrix m(n, static_cast<Index>(vectors.size()));
  for (std::size_t j = 0; j < vectors.size(); ++j) {
    if (vectors[j].size() != n) throw Error("orthonormal_basis", "vectors differ in dimension");
    m.col(static_cast<Index>(j)) = vectors[j];
  }
  return orthonormal_basis(m, tol);
}

inline ComplexMatrix projector(const Subspace& s) { return s.projector(); }

inline Subspace subspace_sum(const Subspace& a, const Subspace& b, const Tolerance& tol = {}) {
  if (a.ambient_dim() != b.ambient_dim()) throw Error("subspace_sum", "ambient dimension mismatch");
  ComplexMatrix m(a.ambient_dim(), a.dim() + b.dim());
  m << a.frame(), b.frame();
  return orthonormal_basis(m, tol);
}

/// S1 ∩ S2 as the eigenspace of P1 + P2 at eigenvalue 2.
inline Subspace subspace_intersection(const Subspace& a, const Subspace& b, const Tolerance& tol = {}) {
  if (a.ambient_dim() != b.ambient_dim()) {
    throw Error("subspace_intersection", "ambient dimension mismatch");
  }
  const Index n = a.ambient_dim();
  if (a.dim() == 0 || b.dim() == 0) return Subspace::zero(n);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(a.projector() + b.projector());
  const RealVector& ev = es.eigenvalues();
  Index count = 0;
  for (Index i = n - 1; i >= 0 && ev(i) >= 2.0 - tol.eig_cluster_tol; --i) ++count;
  return Subspace::from_frame(es.eigenvectors().rightCols(count), tol.geometry_tol());
}

/// S ∩ W⊥ for W ⊆ S.
inline Subspace relative_orthocomplement(const Subspace& s, const Subspace& w, const Tolerance& tol = {}) {
  if (s.ambient_dim() != w.ambient_dim()) {
    throw Error("relative_orthocomplement", "ambient dimension mismatch");
  }
  if (!s.contains(w, tol.geometry_tol())) throw Error("relative_orthocomplement", "W not contained in S");
  const Index ks = s.dim();
  const Index kw = w.dim();
  if (kw == 0) return s;
  if (ks == kw) return Subspace::zero(s.ambient_dim());
  // Null space of Fwᴴ Fs inside the coordinates of S.
  const ComplexMatrix overlap = w.frame().adjoint() * s.frame();
  const auto svd = checked_svd(overlap, false, true, true);
  const ComplexMatrix frame = s.frame() * svd.v.rightCols(ks - kw);
  return Subspace::from_frame(frame, tol.geometry_tol());
}

inline Subspace orthogonal_complement(const Subspace& s, const Tolerance& tol = {}) {
  return relative_orthocomplement(Subspace::full(s.ambient_dim()), s, tol);
}

inline double min_eigenvalue(const ComplexMatrix& hermitian) {
  if (hermitian.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(hermitian), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

/// Operator order X >= Y up to psd_tol.
inline bool loewner_geq(const ComplexMatrix& x, const ComplexMatrix& y, const Tolerance& tol = {}) {
  if (x.rows() != y.rows() || x.cols() != y.cols()) throw Error("loewner_geq", "shape mismatch");
  if (!is_hermitian(x, tol.geometry_tol()) || !is_hermitian(y, tol.geometry_tol())) {
    throw Error("loewner_geq", "non-Hermitian input");
  }
  return min_eigenvalue(x - y) >= -tol.psd_tol;
}

/// Range of a positive semidefinite matrix: eigenvectors whose eigenvalue is
/// at least rank_tol times the largest one.
inline Subspace support(const ComplexMatrix& psd, const Tolerance& tol = {}) {
  const Index n = psd.rows();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(psd));
  const RealVector& ev = es.eigenvalues();
  if (n == 0 || ev(n - 1) <= 0.0) return Subspace::zero(n);
  Index count = 0;
  for (Index i = n - 1; i >= 0 && ev(i) >= tol.rank_tol * ev(n - 1); --i) ++count;
  return Subspace::from_frame(es.eigenvectors().rightCols(count), tol.geometry_tol());
}

/// Orthonormal (Hilbert-Schmidt) basis of Hermitian matrices for the real span
/// of the Hermitian and anti-Hermitian parts of `candidates`.
///
/// Exactly `count` elements are returned: the leading singular directions of
/// the real coordinate matrix. `leading` (optional) is placed first and the
/// remaining elements are orthogonal to it. `weakest` receives the smallest
/// retained singular value relative to the candidate scale, and `residue` the
/// first discarded one, so callers can detect a mismatched count.
inline std::vector<ComplexMatrix> hermitian_basis(const std::vector<ComplexMatrix>& candidates,
                                                  Index count,
                                                  const ComplexMatrix* leading = nullptr,
                                                  double* weakest = nullptr,
                                                  double* residue = nullptr) {
  std::vector<ComplexMatrix> out;
  if (count <= 0) return out;
  const Index d = candidates.empty() ? (leading ? leading->rows() : 0) : candidates.front().rows();
  const Index n = d * d;
  RealVector lead_coords;
  if (leading) {
    const ComplexMatrix l = hermitian_part(*leading) / hermitian_part(*leading).norm();
    out.push_back(l);
    lead_coords.resize(2 * n);
    const ComplexVector v = vec(l);
    lead_coords << v.real(), v.imag();
  }
  const Index remaining = count - (leading ? 1 : 0);
  double scale = 0.0;
  RealMatrix coords(2 * n, 2 * static_cast<Index>(candidates.size()));
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const ComplexMatrix& x = candidates[k];
    scale = std::max(scale, x.norm());
    const ComplexMatrix parts[2] = {hermitian_part(x), (x - x.adjoint()) / (2.0 * kI)};
    for (int p = 0; p < 2; ++p) {
      const ComplexVector v = vec(hermitian_part(parts[p]));
      RealVector c(2 * n);
      c << v.real(), v.imag();
      if (leading) c -= lead_coords * lead_coords.dot(c);
      coords.col(2 * static_cast<Index>(k) + p) = c;
    }
  }
  if (remaining <= 0) {
    if (residue) *residue = coords.size() ? coords.norm() / std::max(scale, 1e-300) : 0.0;
    if (weakest) *weakest = 1.0;
    return out;
  }
  if (coords.cols() == 0) throw Error("hermitian_basis", "no candidates");
  const auto svd = checked_svd(coords, true, false);
  const RealVector& s = svd.s;
  const Index take = std::min<Index>(remaining, s.size());
  if (weakest) *weakest = take > 0 ? s(take - 1) / std::max(scale, 1e-300) : 0.0;
  if (residue) *residue = s.size() > take ? s(take) / std::max(scale, 1e-300) : 0.0;
  for (Index k = 0; k < take; ++k) {
    const RealVector u = svd.u.col(k);
    ComplexVector v(n);
    v.real() = u.head(n);
    v.imag() = u.tail(n);
    out.push_back(hermitian_part(unvec(v, d)));
  }
  return out;
}

}  // namespace qcstruct
