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

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <sstream>
#include <utility>
#include <vector>

#include "qcstruct/numerics.hpp"
#include "qcstruct/peripheral.hpp"

namespace qcstruct {

/// max |Σ Vᴴ V - I| over entries.
inline double trace_deviation(const std::vector<ComplexMatrix>& kraus) {
  if (kraus.empty()) return 0.0;
  const Index d = kraus.front().rows();
  ComplexMatrix acc = -ComplexMatrix::Identity(d, d);
  for (const ComplexMatrix& v : kraus) acc.noalias() += v.adjoint() * v;
  return max_abs(acc);
}

/// A completely positive map in Kraus form, Φ(ρ) = Σ V ρ Vᴴ.
///
/// The regular constructor rejects families that are not trace preserving at
/// psd_tol; `unchecked` skips that test. All-zero Kraus operators are dropped.
class KrausChannel {
 public:
  explicit KrausChannel(std::vector<ComplexMatrix> kraus, const Tolerance& tol = {})
      : KrausChannel(UncheckedTag{}, std::move(kraus)) {
    const double dev = trace_deviation(kraus_);
    if (dev > tol.psd_tol) {
      std::ostringstream os;
      os << "Kraus family is not trace preserving (max deviation " << dev << ")";
      throw Error("channel", os.str());
    }
  }

  static KrausChannel unchecked(std::vector<ComplexMatrix> kraus) {
    return KrausChannel(UncheckedTag{}, std::move(kraus));
  }

  Index dim() const { return dim_; }
  const std::vector<ComplexMatrix>& kraus() const { return kraus_; }

 private:
  struct UncheckedTag {};

  KrausChannel(UncheckedTag, std::vector<ComplexMatrix> kraus) {
    if (kraus.empty()) throw Error("channel", "empty Kraus family");
    dim_ = kraus.front().rows();
    for (ComplexMatrix& v : kraus) {
      if (v.rows() != dim_ || v.cols() != dim_) throw Error("channel", "Kraus operators must be square and of equal size");
      if (!all_finite(v)) throw Error("channel", "non-finite Kraus entry");
      if ((v.array() != Complex(0.0)).any()) kraus_.push_back(std::move(v));
    }
    if (kraus_.empty()) throw Error("channel", "every Kraus operator is zero");
  }

  Index dim_ = 0;
  std::vector<ComplexMatrix> kraus_;
};

inline ComplexMatrix apply(const KrausChannel& ch, const ComplexMatrix& rho) {
  if (rho.rows() != ch.dim() || rho.cols() != ch.dim()) throw Error("apply", "shape mismatch");
  ComplexMatrix out = ComplexMatrix::Zero(ch.dim(), ch.dim());
  for (const ComplexMatrix& v : ch.kraus()) out.noalias() += v * rho * v.adjoint();
  return out;
}

/// Heisenberg-picture dual, X -> Σ Vᴴ X V.
inline ComplexMatrix apply_adjoint(const KrausChannel& ch, const ComplexMatrix& x) {
  if (x.rows() != ch.dim() || x.cols() != ch.dim()) throw Error("apply_adjoint", "shape mismatch");
  ComplexMatrix out = ComplexMatrix::Zero(ch.dim(), ch.dim());
  for (const ComplexMatrix& v : ch.kraus()) out.noalias() += v.adjoint() * x * v;
  return out;
}

inline ComplexMatrix apply_power(const KrausChannel& ch, ComplexMatrix rho, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) rho = qcstruct::apply(ch, rho);
  return rho;
}

/// Matrix of Φ acting on column-stacked vectors: matrix * vec(ρ) = vec(Φ(ρ)).
struct Superoperator {
  Index dim = 0;
  ComplexMatrix matrix;
};

inline Superoperator superoperator(const KrausChannel& ch) {
  return Superoperator{ch.dim(), dense_superoperator(ch.kraus())};
}

/// Density-matrix predicate: Hermitian, PSD up to psd_tol, unit trace.
inline bool is_state(const ComplexMatrix& rho, const Tolerance& tol = {}) {
  if (rho.rows() != rho.cols() || rho.rows() == 0) return false;
  if (!is_hermitian(rho, tol.geometry_tol())) return false;
  const Complex tr = rho.trace();
  if (std::abs(tr.real() - 1.0) > 1e-8 || std::abs(tr.imag()) > 1e-8) return false;
  return min_eigenvalue(rho) >= -tol.psd_tol;
}

struct ValidationReport {
  double trace_deviation = 0.0;
  double spectral_radius = 0.0;
  bool trace_preserving = false;
  bool spectrum_bounded = false;
  bool passed = false;
};

inline ValidationReport validate(const KrausChannel& ch, const Tolerance& tol = {}, const SolverOptions& opts = {}) {
  ValidationReport r;
  r.trace_deviation = trace_deviation(ch.kraus());
  r.trace_preserving = r.trace_deviation <= tol.psd_tol;
  if (ch.dim() * ch.dim() <= opts.dense_limit) {
    Eigen::ComplexEigenSolver<ComplexMatrix> es(dense_superoperator(ch.kraus()), false);
    r.spectral_radius = es.eigenvalues().cwiseAbs().maxCoeff();
  } else {
    const KrausMap op(ch.kraus(), false);
    const DominantSubspace ds = dominant_subspace(op, op.size(), 1e-3, opts);
    Eigen::ComplexEigenSolver<ComplexMatrix> es(ds.projected, false);
    r.spectral_radius = es.eigenvalues().cwiseAbs().maxCoeff();
  }
  r.spectrum_bounded = r.spectral_radius <= 1.0 + tol.eig_cluster_tol;
  r.passed = r.trace_preserving && r.spectrum_bounded;
  return r;
}

/// Channel of a Markov chain with column-stochastic transition matrix
/// p(i, j) = P(next = i | current = j), Kraus operators √p(i,j) |i⟩⟨j|.
inline KrausChannel from_markov_chain(const RealMatrix& p) {
  if (p.rows() != p.cols() || p.rows() == 0) throw Error("from_markov_chain", "transition matrix must be square");
  const Index n = p.rows();
  for (Index j = 0; j < n; ++j) {
    double col = 0.0;
    for (Index i = 0; i < n; ++i) {
      if (!std::isfinite(p(i, j)) || p(i, j) < 0.0) throw Error("from_markov_chain", "entries must be finite and nonnegative");
      col += p(i, j);
    }
    if (std::abs(col - 1.0) > 1e-12) {
      std::ostringstream os;
      os << "column " << j << " sums to " << col << ", expected 1";
      throw Error("from_markov_chain", os.str());
    }
  }
  std::vector<ComplexMatrix> kraus;
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      if (p(i, j) == 0.0) continue;
      ComplexMatrix v = ComplexMatrix::Zero(n, n);
      v(i, j) = std::sqrt(p(i, j));
      kraus.push_back(std::move(v));
    }
  }
  return KrausChannel(std::move(kraus));
}

/// Transition operators of an open quantum random walk on the half line:
/// op(to, from) acts on the internal space C^local_dim, zero when absent.
struct OqrwTransitions {
  Index local_dim = 0;
  std::function<ComplexMatrix(std::size_t to, std::size_t from)> op;
};

enum class OqrwBoundary { kReflecting };

/// Three-level walk with drift toward the origin. Requires 0 < p < 1/2,
/// q > 0 and p + q < 1. The third level is transient: from any site j >= 1 it
/// leaks into (e1 + e2) with rate 1 - p - q.
inline OqrwTransitions three_level_walk(double p, double q) {
  if (!(p > 0.0 && p < 0.5) || !(q > 0.0) || !(p + q < 1.0)) {
    throw Error("three_level_walk", "parameters must satisfy 0 < p < 1/2, q > 0, p + q < 1");
  }
  OqrwTransitions t;
  t.local_dim = 3;
  t.op = [p, q](std::size_t to, std::size_t from) -> ComplexMatrix {
    ComplexMatrix l = ComplexMatrix::Zero(3, 3);
    if (from == 0 && to == 0) {
      l = std::sqrt(1.0 - p) * ComplexMatrix::Identity(3, 3);
    } else if (to == from + 1) {
      l = std::sqrt(p) * ComplexMatrix::Identity(3, 3);
    } else if (from >= 1 && to + 1 == from) {
      l(0, 0) = std::sqrt(1.0 - p);
      l(1, 1) = std::sqrt(1.0 - p);
      l(2, 2) = std::sqrt(q);
    } else if (from >= 1 && to == from) {
      const double c = std::sqrt((1.0 - p - q) / 2.0);
      l(0, 2) = c;
      l(1, 2) = c;
    }
    return l;
  };
  return t;
}

/// Open quantum random walk truncated to sites 0..last_site, as a channel on
/// C^n ⊗ C^(N+1) with basis index k * (N + 1) + site. Kraus operators are
/// L(i, j) ⊗ |i⟩⟨j|.
///
/// Reflecting truncation: the jump from the last site to last_site + 1 is
/// removed and L(N-1, N) is rescaled on the right by the nonnegative diagonal
/// factor that restores Σ_i L(i,N)ᴴ L(i,N) = I.
inline KrausChannel from_oqrw(const OqrwTransitions& walk, std::size_t last_site,
                              OqrwBoundary boundary = OqrwBoundary::kReflecting) {
  (void)boundary;
  const Index n = walk.local_dim;
  if (n <= 0 || !walk.op) throw Error("from_oqrw", "empty transition family");
  const std::size_t sites = last_site + 1;
  const Index d = n * static_cast<Index>(sites);
  const ComplexMatrix id = ComplexMatrix::Identity(n, n);
  const auto normalization_gap = [&](const std::vector<std::pair<std::size_t, ComplexMatrix>>& ops) {
    ComplexMatrix acc = -id;
    for (const auto& [i, l] : ops) acc += l.adjoint() * l;
    return acc;
  };

  std::vector<ComplexMatrix> kraus;
  for (std::size_t j = 0; j < sites; ++j) {
    std::vector<std::pair<std::size_t, ComplexMatrix>> ops;
    for (std::size_t i = 0; i <= sites; ++i) {
      ComplexMatrix l = walk.op(i, j);
      if (l.rows() != n || l.cols() != n) throw Error("from_oqrw", "transition operator has wrong shape");
      if ((l.array() != Complex(0.0)).any()) ops.emplace_back(i, std::move(l));
    }
    if (max_abs(normalization_gap(ops)) > 1e-12) {
      std::ostringstream os;
      os << "transition operators out of site " << j << " are not normalized";
      throw Error("from_oqrw", os.str());
    }
    if (j == last_site) {
      std::erase_if(ops, [&](const auto& e) { return e.first == sites; });
      const ComplexMatrix gap = normalization_gap(ops);
      if (max_abs(gap) > 1e-12) {
        auto left = std::find_if(ops.begin(), ops.end(), [&](const auto& e) { return j >= 1 && e.first + 1 == j; });
        if (left == ops.end()) throw Error("from_oqrw", "no leftward jump available to reflect the boundary");
        const ComplexMatrix g = left->second.adjoint() * left->second;
        const ComplexMatrix target = g - gap;
        ComplexMatrix scale = ComplexMatrix::Zero(n, n);
        for (Index k = 0; k < n; ++k) {
          const double gk = g(k, k).real();
          const double tk = target(k, k).real();
          if (tk < -1e-12 || (gk <= 0.0 && tk > 1e-12)) throw Error("from_oqrw", "boundary rescaling does not exist");
          scale(k, k) = gk > 0.0 ? std::sqrt(std::max(tk, 0.0) / gk) : 0.0;
        }
        left->second = left->second * scale;
        if (max_abs(normalization_gap(ops)) > 1e-12) {
          throw Error("from_oqrw", "normalization failure after boundary adjustment");
        }
      }
    }
    for (const auto& [i, l] : ops) {
      ComplexMatrix v = ComplexMatrix::Zero(d, d);
      for (Index a = 0; a < n; ++a) {
        for (Index b = 0; b < n; ++b) {
          v(a * static_cast<Index>(sites) + static_cast<Index>(i), b * static_cast<Index>(sites) + static_cast<Index>(j)) = l(a, b);
        }
      }
      kraus.push_back(std::move(v));
    }
  }
  return KrausChannel(std::move(kraus));
}

/// Affine action on Bloch vectors of a qubit map: Φ((I + u·σ)/2) =
/// (I + (b + A u)·σ)/2 with σ the Pauli matrices.
struct BlochForm {
  Eigen::Vector3d b;
  Eigen::Matrix3d a;
};

inline std::array<ComplexMatrix, 4> pauli_matrices() {
  ComplexMatrix s0 = ComplexMatrix::Identity(2, 2);
  ComplexMatrix s1(2, 2), s2(2, 2), s3(2, 2);
  s1 << 0, 1, 1, 0;
  s2 << 0, -kI, kI, 0;
  s3 << 1, 0, 0, -1;
  return {s0, s1, s2, s3};
}

inline BlochForm qubit_bloch_form(const KrausChannel& ch) {
  if (ch.dim() != 2) throw Error("qubit_bloch_form", "channel is not a qubit channel");
  const auto s = pauli_matrices();
  BlochForm f;
  double imag = 0.0;
  for (int k = 0; k < 3; ++k) {
    const Complex bk = 0.5 * (s[k + 1] * qcstruct::apply(ch, s[0])).trace();
    f.b(k) = bk.real();
    imag = std::max(imag, std::abs(bk.imag()));
    for (int l = 0; l < 3; ++l) {
      const Complex akl = 0.5 * (s[k + 1] * qcstruct::apply(ch, s[l + 1])).trace();
      f.a(k, l) = akl.real();
      imag = std::max(imag, std::abs(akl.imag()));
    }
  }
  if (imag > 1e-10) throw Error("qubit_bloch_form", "map does not preserve Hermiticity");
  return f;
}

inline Eigen::Vector3d bloch_vector(const ComplexMatrix& rho) {
  const auto s = pauli_matrices();
  Eigen::Vector3d u;
  for (int k = 0; k < 3; ++k) u(k) = (s[k + 1] * rho).trace().real();
  return u;
}

}  // namespace qcstruct
