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

using testing::basis_vector;
using testing::coordinate_span;
using testing::Rng;

ComplexVector cvec(std::initializer_list<Complex> xs) {
  ComplexVector v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (Complex x : xs) v(i++) = x;
  return v;
}

double frame_defect(const Subspace& s) {
  return max_abs(s.frame().adjoint() * s.frame() - ComplexMatrix::Identity(s.dim(), s.dim()));
}

TEST(Tolerance, DefaultsAndValidation) {
  const Tolerance t;
  EXPECT_EQ(t.rank_tol, 1e-9);
  EXPECT_EQ(t.eig_cluster_tol, 1e-8);
  EXPECT_EQ(t.psd_tol, 1e-9);
  EXPECT_NO_THROW(t.validate());
  Tolerance bad;
  bad.psd_tol = 0.0;
  EXPECT_THROW(bad.validate(), Error);
  bad = Tolerance{};
  bad.rank_tol = 0.5;
  EXPECT_THROW(bad.validate(), Error);
}

TEST(OrthonormalBasis, CollinearVectorsGiveLine) {
  const Subspace s = orthonormal_basis(std::vector<ComplexVector>{cvec({1, 0}), cvec({2, 0})});
  EXPECT_EQ(s.dim(), 1);
  EXPECT_TRUE(s.equals(coordinate_span(2, {0}), 1e-12));
}

TEST(OrthonormalBasis, CanonicalBasisGivesFullSpace) {
  const Subspace s = orthonormal_basis(std::vector<ComplexVector>{cvec({1, 0}), cvec({0, 1})});
  EXPECT_EQ(s.dim(), 2);
}

TEST(OrthonormalBasis, ThreeVectorsInPlane) {
  const double r = 1.0 / std::sqrt(2.0);
  const std::vector<ComplexVector> vs = {cvec({r, r, 0}), cvec({r, -r, 0}), cvec({1, 0, 0})};
  // Independent rank: singular values of the stacked matrix.
  ComplexMatrix stacked(3, 3);
  for (Index k = 0; k < 3; ++k) stacked.col(k) = vs[static_cast<std::size_t>(k)];
  Eigen::JacobiSVD<ComplexMatrix> oracle(stacked);
  const Index oracle_rank = (oracle.singularValues().array() > 1e-9 * oracle.singularValues()(0)).count();
  const Subspace s = orthonormal_basis(vs);
  EXPECT_EQ(s.dim(), oracle_rank);
  EXPECT_EQ(s.dim(), 2);
  EXPECT_TRUE(s.equals(coordinate_span(3, {0, 1}), 1e-12));
}

TEST(OrthonormalBasis, EmptyListNeedsAmbient) {
  EXPECT_THROW(orthonormal_basis(std::vector<ComplexVector>{}), Error);
  const Subspace z = orthonormal_basis(std::vector<ComplexVector>{}, Tolerance{}, Index{3});
  EXPECT_EQ(z.dim(), 0);
  EXPECT_EQ(z.ambient_dim(), 3);
}

TEST(SubspaceSum, Examples) {
  EXPECT_TRUE(subspace_sum(coordinate_span(2, {0}), coordinate_span(2, {1})).equals(Subspace::full(2), 1e-12));
  EXPECT_EQ(subspace_sum(coordinate_span(2, {0}), coordinate_span(2, {0})).dim(), 1);
  const Subspace diag = orthonormal_basis(ComplexMatrix(cvec({1, 1, 0})));
  EXPECT_EQ(subspace_sum(coordinate_span(3, {0}), diag).dim(), 2);
  EXPECT_THROW(subspace_sum(coordinate_span(2, {0}), coordinate_span(3, {0})), Error);
}

TEST(SubspaceIntersection, Examples) {
  const Subspace a = coordinate_span(3, {0, 1});
  const Subspace b = coordinate_span(3, {1, 2});
  EXPECT_TRUE(subspace_intersection(a, b).equals(coordinate_span(3, {1}), 1e-10));
  EXPECT_TRUE(subspace_intersection(a, a).equals(a, 1e-10));

  const double r = 1.0 / std::sqrt(2.0);
  ComplexMatrix f(3, 2);
  f << 1, 0, 0, r, 0, r;
  const Subspace s = Subspace::from_frame(f);
  const Subspace meet = subspace_intersection(s, b);
  // Oracle: x = s.frame() a = b.frame() c, null space of [F_s, -F_b].
  ComplexMatrix stacked(3, 4);
  stacked << f, -b.frame();
  Eigen::FullPivLU<ComplexMatrix> lu(stacked);
  const ComplexMatrix ker = lu.kernel();
  ASSERT_EQ(ker.cols(), 1);
  const ComplexVector x = f * ker.col(0).head(2);
  EXPECT_EQ(meet.dim(), 1);
  EXPECT_TRUE(meet.contains(ComplexVector(x / x.norm()), 1e-10));
  EXPECT_TRUE(meet.contains(cvec({0, r, r}), 1e-10));
  EXPECT_THROW(subspace_intersection(a, coordinate_span(2, {0})), Error);
}

TEST(RelativeOrthocomplement, Examples) {
  EXPECT_TRUE(relative_orthocomplement(Subspace::full(2), coordinate_span(2, {0})).equals(coordinate_span(2, {1}), 1e-12));
  EXPECT_EQ(relative_orthocomplement(coordinate_span(3, {0, 2}), coordinate_span(3, {0, 2})).dim(), 0);
  const Subspace s = orthonormal_basis(std::vector<ComplexVector>{cvec({1, 0, 0}), cvec({1, 1, 0})});
  // Gram–Schmidt oracle: e2 is what is left of (e1 + e2) after removing e1.
  ComplexVector gs = cvec({1, 1, 0});
  gs -= basis_vector(3, 0) * basis_vector(3, 0).dot(gs);
  gs.normalize();
  const Subspace rest = relative_orthocomplement(s, coordinate_span(3, {0}));
  EXPECT_EQ(rest.dim(), 1);
  EXPECT_TRUE(rest.contains(gs, 1e-12));
  try {
    relative_orthocomplement(coordinate_span(3, {0}), coordinate_span(3, {1}));
    FAIL() << "expected containment error";
  } catch (const Error& e) {
    EXPECT_EQ(e.message(), "W not contained in S");
  }
}

TEST(Projector, Examples) {
  ComplexMatrix expected = ComplexMatrix::Zero(2, 2);
  expected(0, 0) = 1.0;
  EXPECT_LE(max_abs(projector(coordinate_span(2, {0})) - expected), 1e-15);
  EXPECT_LE(max_abs(projector(Subspace::full(3)) - ComplexMatrix::Identity(3, 3)), 1e-15);
  const Subspace diag = orthonormal_basis(ComplexMatrix(cvec({1, 1})));
  EXPECT_LE(max_abs(projector(diag) - ComplexMatrix::Constant(2, 2, 0.5)), 1e-15);
}

TEST(LoewnerGeq, Examples) {
  const ComplexMatrix id = ComplexMatrix::Identity(2, 2);
  const ComplexMatrix zero = ComplexMatrix::Zero(2, 2);
  EXPECT_TRUE(loewner_geq(id, zero));
  EXPECT_FALSE(loewner_geq(zero, id));

  ComplexMatrix x = ComplexMatrix::Zero(2, 2);
  x(0, 0) = 1.0;
  x(1, 1) = 0.5;
  const ComplexMatrix y = ComplexMatrix::Constant(2, 2, 0.5);
  // Characteristic polynomial of X - Y = [[1/2, -1/2], [-1/2, 0]]:
  // λ² - λ/2 - 1/4, roots (1 ± √5)/4. The smaller root is negative.
  const double smallest = (1.0 - std::sqrt(5.0)) / 4.0;
  EXPECT_NEAR(min_eigenvalue(x - y), smallest, 1e-14);
  EXPECT_FALSE(loewner_geq(x, y));
  EXPECT_TRUE(loewner_geq(x - smallest * id, y));

  ComplexMatrix skew = zero;
  skew(0, 1) = 1.0;
  EXPECT_THROW(loewner_geq(skew, zero), Error);
  EXPECT_THROW(loewner_geq(id, ComplexMatrix::Identity(3, 3)), Error);
}

TEST(Support, RankAtTolerance) {
  ComplexMatrix rho = ComplexMatrix::Zero(3, 3);
  rho(0, 0) = 0.7;
  rho(2, 2) = 0.3;
  rho(1, 1) = 1e-14;
  EXPECT_TRUE(support(rho).equals(coordinate_span(3, {0, 2}), 1e-12));
}

TEST(VecUnvec, ColumnStacking) {
  ComplexMatrix m(2, 2);
  m << 1, 2, 3, 4;
  const ComplexVector v = vec(m);
  EXPECT_EQ(v(1), Complex(3.0));
  EXPECT_EQ(v(2), Complex(2.0));
  EXPECT_EQ(unvec(v, 2), m);
}

TEST(HermitianBasis, SpansSameRealSpace) {
  Rng rng(11);
  // A complex span of two non-Hermitian matrices whose adjoints lie in the span.
  const ComplexMatrix a = testing::random_hermitian(3, rng);
  const ComplexMatrix b = testing::random_hermitian(3, rng);
  const std::vector<ComplexMatrix> xs = {a + kI * b, a - kI * b};
  double weakest = 0.0;
  double residue = 1.0;
  const auto basis = hermitian_basis(xs, 2, nullptr, &weakest, &residue);
  ASSERT_EQ(basis.size(), 2u);
  EXPECT_GT(weakest, 1e-3);
  EXPECT_LT(residue, 1e-12);
  for (const auto& h : basis) {
    EXPECT_TRUE(is_hermitian(h, 1e-14));
    EXPECT_NEAR(h.norm(), 1.0, 1e-12);
  }
  EXPECT_NEAR(std::abs((basis[0].adjoint() * basis[1]).trace()), 0.0, 1e-12);
  // a lies in the real span of the basis.
  ComplexMatrix rest = a;
  for (const auto& h : basis) rest -= (h.adjoint() * a).trace().real() * h;
  EXPECT_LT(rest.norm(), 1e-12);
}

TEST(CheckedSvd, RankDeficientInputsAreConsistent) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const ComplexMatrix low = testing::gaussian(18, 3, rng) * testing::gaussian(3, 18, rng);
    const auto f = checked_svd(low, true, true);
    EXPECT_TRUE(f.u.allFinite());
    EXPECT_LE((low - f.u * f.s.asDiagonal() * f.v.adjoint()).norm(), 1e-10 * low.norm());
    EXPECT_LE(f.s(3), 1e-10 * f.s(0));
  }
}

// Properties over random pairs of subspaces.
class SubspaceProperties : public ::testing::TestWithParam<int> {};

TEST_P(SubspaceProperties, SumIntersectionDimensionsAndCommutativity) {
  Rng rng(static_cast<std::uint64_t>(GetParam()));
  std::uniform_int_distribution<int> dim(0, 4);
  const Index d = 6;
  // Share a random common part so intersections are nontrivial.
  const ComplexMatrix common = testing::gaussian(d, dim(rng) / 2, rng);
  const ComplexMatrix a_extra = testing::gaussian(d, dim(rng) / 2, rng);
  const ComplexMatrix b_extra = testing::gaussian(d, dim(rng) / 2, rng);
  ComplexMatrix af(d, common.cols() + a_extra.cols());
  af << common, a_extra;
  ComplexMatrix bf(d, common.cols() + b_extra.cols());
  bf << common, b_extra;
  const Subspace a = orthonormal_basis(af);
  const Subspace b = orthonormal_basis(bf);
  const Subspace sum = subspace_sum(a, b);
  const Subspace meet = subspace_intersection(a, b);
  EXPECT_EQ(sum.dim() + meet.dim(), a.dim() + b.dim());
  EXPECT_TRUE(sum.equals(subspace_sum(b, a), 1e-9));
  EXPECT_TRUE(meet.equals(subspace_intersection(b, a), 1e-9));
  for (const Subspace* s : {&a, &b, &sum, &meet}) {
    EXPECT_LE(frame_defect(*s), 1e-8);
    const ComplexMatrix p = s->projector();
    EXPECT_LE(max_abs(p - p.adjoint()), 1e-8);
    EXPECT_LE(max_abs(p * p - p), 1e-8);
  }
}

INSTANTIATE_TEST_SUITE_P(RandomPairs, SubspaceProperties, ::testing::Range(0, 25));

}  // namespace
}  // namespace qcstruct
