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

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "test_support.hpp"

namespace qcstruct {
namespace {

using testing::amplitude_example;
using testing::coordinate_span;
using testing::identity_channel;
using testing::Rng;

std::vector<const Subspace*> pieces(const DecompositionReport& r) {
  std::vector<const Subspace*> out;
  for (const auto& a : r.alpha_blocks) out.push_back(&a.enclosure);
  for (const auto& b : r.beta_blocks) {
    for (const auto& e : b.enclosures) out.push_back(&e);
  }
  return out;
}

void expect_report_invariants(const KrausChannel& ch, const DecompositionReport& r) {
  auto parts = pieces(r);
  Index total = r.transient.dim();
  for (const Subspace* p : parts) {
    total += p->dim();
    EXPECT_TRUE(is_enclosure(ch, *p));
    EXPECT_LE(max_abs(p->frame().adjoint() * r.transient.frame()), 1e-8);
  }
  EXPECT_EQ(total, ch.dim());
  for (std::size_t i = 0; i < parts.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      EXPECT_LE(max_abs(parts[i]->frame().adjoint() * parts[j]->frame()), 1e-8);
      // Sums of enclosures are enclosures.
      EXPECT_TRUE(is_enclosure(ch, subspace_sum(*parts[i], *parts[j])));
    }
  }
  EXPECT_LE(r.transport_residual, 1e-7);
  for (const auto& b : r.beta_blocks) {
    EXPECT_GE(b.size(), 2u);
    const ComplexMatrix p0 = b.enclosures[0].projector();
    for (std::size_t g = 0; g < b.size(); ++g) {
      EXPECT_EQ(b.enclosures[g].dim(), b.enclosures[0].dim());
      const ComplexMatrix& q = b.isometries[g];
      EXPECT_LE(max_abs(q.adjoint() * q - p0), 1e-8);
      EXPECT_LE(max_abs(q * q.adjoint() - b.enclosures[g].projector()), 1e-8);
      const ComplexMatrix rho_g = block_invariant_state(ch, b.enclosures[g]);
      EXPECT_LE(max_abs(rho_g - b.transported_state(g)), 1e-7);
    }
  }
  for (const auto& a : r.alpha_blocks) {
    EXPECT_TRUE(is_state(a.invariant_state));
    EXPECT_LE(max_abs(qcstruct::apply(ch, a.invariant_state) - a.invariant_state), 1e-8);
  }
}

InvariantStateParameters random_parameters(const DecompositionReport& r, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  InvariantStateParameters p;
  double total = 0.0;
  for (std::size_t i = 0; i < r.alpha_blocks.size(); ++i) {
    p.alpha_weights.push_back(u(rng));
    total += p.alpha_weights.back();
  }
  for (const auto& b : r.beta_blocks) {
    const auto n = static_cast<Index>(b.size());
    const ComplexMatrix g = testing::gaussian(n, n, rng);
    ComplexMatrix m = g * g.adjoint();
    p.beta_coefficients.push_back(m);
    total += m.trace().real();
  }
  for (auto& t : p.alpha_weights) t /= total;
  for (auto& m : p.beta_coefficients) m /= total;
  return p;
}

TEST(Decompose, AmplitudeExample) {
  for (double p : {0.1, 0.5, 0.9}) {
    const KrausChannel ch = amplitude_example(p);
    const DecompositionReport r = decompose(ch);
    EXPECT_TRUE(r.recurrent.equals(coordinate_span(2, {0}), 1e-10));
    EXPECT_TRUE(r.transient.equals(coordinate_span(2, {1}), 1e-10));
    ASSERT_EQ(r.alpha_blocks.size(), 1u);
    EXPECT_TRUE(r.beta_blocks.empty());
    ComplexMatrix e11 = ComplexMatrix::Zero(2, 2);
    e11(0, 0) = 1.0;
    EXPECT_LE(max_abs(r.alpha_blocks[0].invariant_state - e11), 1e-10);
    expect_report_invariants(ch, r);
  }
}

TEST(Decompose, IdentityChannelIsOneBetaBlock) {
  const KrausChannel ch = identity_channel(3);
  const DecompositionReport r = decompose(ch);
  EXPECT_EQ(r.fixed_space_dim, 9);
  EXPECT_TRUE(r.alpha_blocks.empty());
  ASSERT_EQ(r.beta_blocks.size(), 1u);
  EXPECT_EQ(r.beta_blocks[0].size(), 3u);
  expect_report_invariants(ch, r);
}

TEST(Decompose, TwoClassMarkovChainWithTransientState) {
  Rng rng(41);
  const auto chain = testing::planted_chain({2, 2}, 1, rng);
  const KrausChannel ch = from_markov_chain(chain.p);
  const DecompositionReport r = decompose(ch);
  EXPECT_TRUE(r.transient.equals(coordinate_span(ch.dim(), chain.transient), 1e-9));
  EXPECT_EQ(r.alpha_blocks.size(), 2u);
  EXPECT_TRUE(r.beta_blocks.empty());
  expect_report_invariants(ch, r);
}

TEST(Decompose, DeterministicForFixedSeed) {
  Rng rng(42);
  const auto planted = testing::planted_channel({{2, 2}, {1, 1}}, 1, rng);
  const KrausChannel ch(planted.kraus);
  const DecompositionReport a = decompose(ch, 9);
  const DecompositionReport b = decompose(ch, 9);
  ASSERT_EQ(a.beta_blocks.size(), b.beta_blocks.size());
  for (std::size_t i = 0; i < a.beta_blocks.size(); ++i) {
    for (std::size_t g = 0; g < a.beta_blocks[i].size(); ++g) {
      EXPECT_EQ(a.beta_blocks[i].isometries[g], b.beta_blocks[i].isometries[g]);
    }
  }
}

TEST(BuildInvariantState, Examples) {
  const KrausChannel amp = amplitude_example(0.3);
  const DecompositionReport r = decompose(amp);
  InvariantStateParameters one;
  one.alpha_weights = {1.0};
  EXPECT_LE(max_abs(build_invariant_state(r, one) - r.alpha_blocks[0].invariant_state), 1e-15);

  // Identity channel on C²: a rank-one M gives a pure state.
  const DecompositionReport id = decompose(identity_channel(2));
  ASSERT_EQ(id.beta_blocks.size(), 1u);
  InvariantStateParameters pure;
  pure.beta_coefficients = {ComplexMatrix::Constant(2, 2, 0.5)};
  const ComplexMatrix rho = build_invariant_state(id, pure);
  const auto& b = id.beta_blocks[0];
  const ComplexVector f1 = b.enclosures[0].frame().col(0);
  const ComplexVector f2 = b.isometries[1] * f1;
  const ComplexVector psi = (f1 + f2) / std::sqrt(2.0);
  EXPECT_LE(max_abs(rho - psi * psi.adjoint()), 1e-12);

  InvariantStateParameters bad;
  bad.alpha_weights = {0.5};
  EXPECT_THROW(build_invariant_state(r, bad), Error);
  bad.alpha_weights = {-0.1};
  EXPECT_THROW(build_invariant_state(r, bad), Error);
  InvariantStateParameters indefinite;
  indefinite.beta_coefficients = {ComplexMatrix::Identity(2, 2) * 0.5};
  indefinite.beta_coefficients[0](0, 1) = indefinite.beta_coefficients[0](1, 0) = 0.9;
  EXPECT_THROW(build_invariant_state(id, indefinite), Error);
}

TEST(ExtractParameters, Examples) {
  const KrausChannel amp = amplitude_example(0.3);
  const DecompositionReport r = decompose(amp);
  ComplexMatrix e11 = ComplexMatrix::Zero(2, 2);
  e11(0, 0) = 1.0;
  const ParameterFit fit = extract_parameters(r, e11);
  ASSERT_EQ(fit.params.alpha_weights.size(), 1u);
  EXPECT_NEAR(fit.params.alpha_weights[0], 1.0, 1e-12);
  EXPECT_LE(fit.residual, 1e-10);
  EXPECT_LE(fit.forbidden_block_norm, 1e-10);
  EXPECT_TRUE(fit.warnings.empty());

  // A state with weight on D is not invariant and is flagged.
  const ParameterFit off = extract_parameters(r, ComplexMatrix::Identity(2, 2) / 2.0);
  EXPECT_GT(off.forbidden_block_norm, 0.1);
  EXPECT_FALSE(off.warnings.empty());
}

class DecomposeProperties : public ::testing::TestWithParam<int> {};

TEST_P(DecomposeProperties, PlantedStructureRoundTrips) {
  Rng rng(static_cast<std::uint64_t>(500 + GetParam()));
  std::uniform_int_distribution<int> pick(0, 3);
  std::vector<testing::PlantedBlock> blocks;
  const int count = 1 + pick(rng) % 3;
  for (int k = 0; k < count; ++k) blocks.push_back({1 + pick(rng) % 3, 1 + pick(rng) % 3});
  const auto planted = testing::planted_channel(blocks, pick(rng) % 3, rng);
  const KrausChannel ch(planted.kraus);
  const DecompositionReport r = decompose(ch, static_cast<std::uint64_t>(GetParam()));
  EXPECT_EQ(r.fixed_space_dim, planted.fixed_dim);
  EXPECT_EQ(r.predicted_fixed_space_dim(), r.fixed_space_dim);
  EXPECT_EQ(static_cast<Index>(r.alpha_blocks.size()), planted.alpha);
  EXPECT_EQ(r.beta_blocks.size(), planted.beta_sizes.size());
  EXPECT_EQ(r.transient.dim(), planted.transient);
  expect_report_invariants(ch, r);

  for (int draw = 0; draw < 100; ++draw) {
    const InvariantStateParameters p = random_parameters(r, rng);
    const ComplexMatrix rho = build_invariant_state(r, p);
    EXPECT_LE(max_abs(qcstruct::apply(ch, rho) - rho), 1e-8);
    const ParameterFit fit = extract_parameters(r, rho);
    EXPECT_LE(fit.residual, 1e-8);
    EXPECT_LE(fit.forbidden_block_norm, 1e-8);
    for (std::size_t i = 0; i < p.alpha_weights.size(); ++i) {
      EXPECT_NEAR(fit.params.alpha_weights[i], p.alpha_weights[i], 1e-8);
    }
    for (std::size_t i = 0; i < p.beta_coefficients.size(); ++i) {
      EXPECT_LE(max_abs(fit.params.beta_coefficients[i] - p.beta_coefficients[i]), 1e-8);
    }
  }
  // The maximal invariant state is described by the decomposition.
  const ParameterFit fit = extract_parameters(r, recurrent_split(ch).rho_max);
  EXPECT_LE(fit.residual, 1e-7);
  EXPECT_LE(fit.forbidden_block_norm, 1e-7);
}

INSTANTIATE_TEST_SUITE_P(RandomPlanted, DecomposeProperties, ::testing::Range(0, 15));

}  // namespace
}  // namespace qcstruct
