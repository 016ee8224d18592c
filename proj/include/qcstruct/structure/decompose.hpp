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
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "qcstruct/channel.hpp"
#include "qcstruct/numerics.hpp"
#include "qcstruct/spectral.hpp"
#include "qcstruct/structure/algebra.hpp"
#include "qcstruct/structure/enclosure.hpp"

namespace qcstruct {

struct AlphaBlock {
  Subspace enclosure;
  ComplexMatrix invariant_state;
};

/// Minimal enclosures linked by partial isometries. isometries[0] is the
/// projector onto enclosures[0]; isometries[g] maps enclosures[0] onto
/// enclosures[g].
struct BetaBlock {
  std::vector<Subspace> enclosures;
  std::vector<ComplexMatrix> isometries;
  ComplexMatrix reference_state;

  std::size_t size() const { return enclosures.size(); }
  ComplexMatrix transported_state(std::size_t g) const {
    return isometries[g] * reference_state * isometries[g].adjoint();
  }
};

struct DecompositionReport {
  Index dim = 0;
  Subspace recurrent;
  Subspace transient;
  std::vector<AlphaBlock> alpha_blocks;
  std::vector<BetaBlock> beta_blocks;
  Tolerance tolerance;
  std::uint64_t rng_seed = 0;
  Index fixed_space_dim = 0;
  std::vector<Complex> peripheral_spectrum;
  std::vector<std::string> warnings;
  /// Largest ‖ρ_γ − Q_γ ρ_1 Q_γᴴ‖_max over all B-blocks.
  double transport_residual = 0.0;

  /// |A| + Σ_β |C_β|², the dimension the block structure predicts for F(Φ).
  Index predicted_fixed_space_dim() const {
    Index n = static_cast<Index>(alpha_blocks.size());
    for (const auto& b : beta_blocks) n += static_cast<Index>(b.size() * b.size());
    return n;
  }
};

struct InvariantStateParameters {
  std::vector<double> alpha_weights;
  std::vector<ComplexMatrix> beta_coefficients;
};

namespace detail {

inline void check_report_geometry(const KrausChannel& ch, const DecompositionReport& r, const Tolerance& tol) {
  const double gt = tol.geometry_tol();
  std::vector<const Subspace*> parts;
  parts.push_back(&r.transient);
  for (const auto& a : r.alpha_blocks) parts.push_back(&a.enclosure);
  for (const auto& b : r.beta_blocks) {
    for (const auto& e : b.enclosures) parts.push_back(&e);
  }
  Index total = 0;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    total += parts[i]->dim();
    if (i > 0 && !is_enclosure(ch, *parts[i], tol)) {
      std::ostringstream os;
      os << "enclosure " << i << " leaks " << std::sqrt(enclosure_leak(ch, *parts[i]));
      throw Error("decompose", "listed subspace fails the enclosure predicate", os.str());
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (parts[i]->dim() == 0 || parts[j]->dim() == 0) continue;
      const double overlap = max_abs(parts[i]->frame().adjoint() * parts[j]->frame());
      if (overlap > gt) {
        std::ostringstream os;
        os << "subspaces " << j << " and " << i << " overlap by " << overlap;
        throw Error("decompose", "decomposition is not orthogonal", os.str());
      }
    }
  }
  if (total != r.dim) {
    std::ostringstream os;
    os << "dimensions sum to " << total << " instead of " << r.dim;
    throw Error("decompose", "decomposition does not span the space", os.str());
  }
  for (const auto& b : r.beta_blocks) {
    const ComplexMatrix p0 = b.enclosures[0].projector();
    for (std::size_t g = 0; g < b.size(); ++g) {
      const ComplexMatrix& q = b.isometries[g];
      if (max_abs(q.adjoint() * q - p0) > gt || max_abs(q * q.adjoint() - b.enclosures[g].projector()) > gt) {
        throw Error("decompose", "partial isometry fails QᴴQ = P_1 or QQᴴ = P_γ");
      }
    }
  }
}

}  // namespace detail

/// Decomposition reusing a spectral analysis of `ch` computed with `tol` and
/// `opts`.
inline DecompositionReport decompose(const KrausChannel& ch, const SpectralAnalysis& a, std::uint64_t rng_seed = 0,
                                     const Tolerance& tol = {}, const SolverOptions& opts = {}) {
  tol.validate();
  if (a.peripheral.dim != ch.dim()) throw Error("decompose", "spectral analysis belongs to a different dimension");
  DecompositionReport r;
  r.dim = ch.dim();
  r.tolerance = tol;
  r.rng_seed = rng_seed;

  r.recurrent = a.split.recurrent;
  r.transient = a.split.transient;
  r.fixed_space_dim = a.fixed.dimension();
  r.peripheral_spectrum = a.peripheral.eigenvalues;
  for (const auto& w : a.fixed.warnings) r.warnings.push_back(w);
  for (const auto& w : a.split.warnings) r.warnings.push_back(w);

  const FixedPointAlgebra alg = detail::algebra_from(a.adjoint_fixed, r.recurrent, tol);
  for (const auto& w : alg.warnings) r.warnings.push_back(w);
  const std::vector<Subspace> minimal = minimal_enclosures(ch, alg, rng_seed, tol);
  const BlockGrouping groups = group_into_blocks(minimal, alg, tol);

  for (const Subspace& v : groups.alpha) r.alpha_blocks.push_back({v, block_invariant_state(ch, v, tol, opts)});
  for (const auto& members : groups.beta) {
    BetaBlock b;
    b.enclosures = members;
    for (const Subspace& v : members) b.isometries.push_back(partial_isometry(alg, members[0], v, tol));
    b.reference_state = block_invariant_state(ch, members[0], tol, opts);
    for (std::size_t g = 1; g < members.size(); ++g) {
      const ComplexMatrix rho_g = block_invariant_state(ch, members[g], tol, opts);
      r.transport_residual = std::max(r.transport_residual, max_abs(rho_g - b.transported_state(g)));
    }
    r.beta_blocks.push_back(std::move(b));
  }
  constexpr double kTransportTol = 1e-7;
  if (r.transport_residual > kTransportTol) {
    std::ostringstream os;
    os << "residual " << r.transport_residual;
    throw Error("decompose", "invariant states are not related by the partial isometries", os.str());
  }
  detail::check_report_geometry(ch, r, tol);
  if (r.predicted_fixed_space_dim() != r.fixed_space_dim) {
    std::ostringstream os;
    os << "fixed space has dimension " << r.fixed_space_dim << " but the blocks account for "
       << r.predicted_fixed_space_dim();
    r.warnings.push_back(os.str());
  }
  return r;
}

/// Orthogonal decomposition H = D ⊕ (⊕_α V_α) ⊕ (⊕_β ⊕_γ V_{β,γ}) with the
/// invariant state of every minimal enclosure.
inline DecompositionReport decompose(const KrausChannel& ch, std::uint64_t rng_seed = 0, const Tolerance& tol = {},
                                     const SolverOptions& opts = {}) {
  tol.validate();
  return decompose(ch, analyze_spectrum(ch, tol, opts), rng_seed, tol, opts);
}

/// Σ_α t_α ρ_α + Σ_β Σ_{γ,γ'} M^β_{γγ'} Q_γ ρ_1 Q_γ'ᴴ.
inline ComplexMatrix build_invariant_state(const DecompositionReport& r, const InvariantStateParameters& params) {
  const Tolerance& tol = r.tolerance;
  if (params.alpha_weights.size() != r.alpha_blocks.size()) {
    throw Error("build_invariant_state", "one weight per A-block required");
  }
  if (params.beta_coefficients.size() != r.beta_blocks.size()) {
    throw Error("build_invariant_state", "one coefficient matrix per B-block required");
  }
  double total = 0.0;
  ComplexMatrix rho = ComplexMatrix::Zero(r.dim, r.dim);
  for (std::size_t i = 0; i < r.alpha_blocks.size(); ++i) {
    const double t = params.alpha_weights[i];
    if (!std::isfinite(t) || t < -tol.psd_tol) throw Error("build_invariant_state", "A-block weights must be nonnegative");
    total += t;
    rho += t * r.alpha_blocks[i].invariant_state;
  }
  for (std::size_t i = 0; i < r.beta_blocks.size(); ++i) {
    const BetaBlock& b = r.beta_blocks[i];
    const ComplexMatrix& m = params.beta_coefficients[i];
    const auto n = static_cast<Index>(b.size());
    if (m.rows() != n || m.cols() != n) throw Error("build_invariant_state", "coefficient matrix has wrong shape");
    if (!all_finite(m) || !is_hermitian(m, tol.geometry_tol()) || min_eigenvalue(hermitian_part(m)) < -tol.psd_tol) {
      throw Error("build_invariant_state", "coefficient matrix must be positive semidefinite");
    }
    total += m.trace().real();
    for (Index g = 0; g < n; ++g) {
      for (Index h = 0; h < n; ++h) {
        if (m(g, h) == Complex(0.0, 0.0)) continue;
        rho += m(g, h) * b.isometries[static_cast<std::size_t>(g)] * b.reference_state *
               b.isometries[static_cast<std::size_t>(h)].adjoint();
      }
    }
  }
  if (std::abs(total - 1.0) > 1e-8) {
    std::ostringstream os;
    os << "weights sum to " << total;
    throw Error("build_invariant_state", "parameters do not describe a state", os.str());
  }
  if (!is_state(rho, tol)) throw Error("build_invariant_state", "result is not a state");
  return rho;
}

struct ParameterFit {
  InvariantStateParameters params;
  /// Frobenius norm of ρ − build(params).
  double residual = 0.0;
  /// Frobenius norm of the blocks that must vanish for an invariant state:
  /// everything touching D and every cross block between distinct components.
  double forbidden_block_norm = 0.0;
  std::vector<std::string> warnings;
};

inline ParameterFit extract_parameters(const DecompositionReport& r, const ComplexMatrix& rho) {
  if (rho.rows() != r.dim || rho.cols() != r.dim) throw Error("extract_parameters", "state has wrong shape");
  ParameterFit fit;
  ComplexMatrix allowed = ComplexMatrix::Zero(r.dim, r.dim);
  ComplexMatrix rebuilt = ComplexMatrix::Zero(r.dim, r.dim);
  for (const AlphaBlock& a : r.alpha_blocks) {
    const ComplexMatrix p = a.enclosure.projector();
    const double t = (p * rho).trace().real();
    fit.params.alpha_weights.push_back(t);
    allowed += p * rho * p;
    rebuilt += t * a.invariant_state;
  }
  for (const BetaBlock& b : r.beta_blocks) {
    const auto n = static_cast<Index>(b.size());
    const double norm2 = (b.reference_state * b.reference_state).trace().real();
    ComplexMatrix m(n, n);
    ComplexMatrix pc = ComplexMatrix::Zero(r.dim, r.dim);
    for (const Subspace& e : b.enclosures) pc += e.projector();
    allowed += pc * rho * pc;
    for (Index g = 0; g < n; ++g) {
      const ComplexMatrix& qg = b.isometries[static_cast<std::size_t>(g)];
      for (Index h = 0; h < n; ++h) {
        const ComplexMatrix& qh = b.isometries[static_cast<std::size_t>(h)];
        const ComplexMatrix basis = qg * b.reference_state * qh.adjoint();
        m(g, h) = basis.conjugate().cwiseProduct(rho).sum() / norm2;
        rebuilt += m(g, h) * basis;
      }
    }
    fit.params.beta_coefficients.push_back(m);
  }
  fit.residual = (rho - rebuilt).norm();
  fit.forbidden_block_norm = (rho - allowed).norm();
  constexpr double kFitTol = 1e-7;
  if (fit.residual > kFitTol || fit.forbidden_block_norm > kFitTol) {
    std::ostringstream os;
    os << "state is not described by the decomposition (residual " << fit.residual << ", forbidden blocks "
       << fit.forbidden_block_norm << ")";
    fit.warnings.push_back(os.str());
  }
  return fit;
}

}  // namespace qcstruct
