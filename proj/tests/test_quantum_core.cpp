// Copyright 2026 The Catoptron Authors
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

#include "test_util.hpp"

namespace catoptron {
namespace {

using testing::random_state;
using testing::random_vector;

TEST(Operators, AnnihilationEntries) {
  const CMatrix a = annihilation_op(FockSpace(3)).matrix();
  CMatrix expect = CMatrix::Zero(3, 3);
  expect(0, 1) = 1.0;
  expect(1, 2) = std::sqrt(2.0);
  EXPECT_LT((a - expect).norm(), 1e-15);
}

TEST(Operators, LadderAction) {
  const FockSpace s(6);
  const OperatorMatrix a = annihilation_op(s);
  EXPECT_LT((a * StateVector::basis(s, 0)).amplitudes().norm(), 1e-15);
  const CVector got = (a * StateVector::basis(s, 2)).amplitudes();
  EXPECT_LT((got - std::sqrt(2.0) * StateVector::basis(s, 1).amplitudes()).norm(), 1e-14);
}

TEST(Operators, EmbedActsOnOscillatorOnly) {
  const CompositeSpace cs(FockSpace(5));
  EXPECT_LT((embed_ho_op(identity_op(FockSpace(5)), cs).matrix() - CMatrix::Identity(10, 10)).norm(), 1e-15);
  std::mt19937_64 rng(3);
  const CVector b = random_vector(rng, 2);
  const CVector psi = detail::kron(b, StateVector::basis(FockSpace(5), 2).amplitudes());
  const CVector expect = std::sqrt(2.0) * detail::kron(b, StateVector::basis(FockSpace(5), 1).amplitudes());
  EXPECT_LT((embed_ho_op(annihilation_op(FockSpace(5)), cs).matrix() * psi - expect).norm(), 1e-14);
}

TEST(States, CoherentStateMoments) {
  const FockSpace s(40);
  EXPECT_LT((coherent_state(0.0, s).amplitudes() - StateVector::basis(s, 0).amplitudes()).norm(), 1e-15);
  const Complex alpha(1.0, 0.5);
  // Fock-series oracle: c_n = e^{-|a|^2/2} a^n / sqrt(n!) via lgamma.
  CVector c(40);
  for (int n = 0; n < 40; ++n)
    c(n) = std::exp(-0.5 * std::norm(alpha) - 0.5 * std::lgamma(n + 1.0)) * std::pow(alpha, n);
  const CVector psi = coherent_state(alpha, s).amplitudes();
  EXPECT_LT(std::abs(psi.dot(c)) - 1.0, 1e-10);
  EXPECT_GT(std::abs(psi.dot(c)), 1.0 - 1e-10);
  EXPECT_LT(std::abs(expectation(annihilation_op(s), coherent_state(alpha, s)) - alpha), 1e-6);
  EXPECT_NEAR(expectation(number_op(s), coherent_state(1.5, s)).real(), 2.25, 1e-6);
}

TEST(States, TruncationIsReported) {
  EXPECT_THROW(coherent_state(4.0, FockSpace(6)), TruncationError);
}

TEST(States, CatNormalizationAndParity) {
  EXPECT_NEAR(cat_normalization(1.5, 0.0), std::sqrt(2.0 * (1.0 + std::exp(-4.5))), 1e-12);
  const FockSpace s(30);
  auto [even, odd] = parity_projectors(s);
  for (double alpha : {0.7, 1.5, 2.2}) {
    const StateVector c0 = cat_state({alpha, 0.0}, s), c1 = cat_state({alpha, M_PI}, s);
    EXPECT_LT(std::abs(expectation(odd, c0)), 1e-12);
    EXPECT_LT(((even * c0).amplitudes() - c0.amplitudes()).norm(), 1e-12);
    EXPECT_LT(((odd * c1).amplitudes() - c1.amplitudes()).norm(), 1e-12);
    EXPECT_NEAR(c0.norm(), 1.0, 1e-10);
    EXPECT_NEAR(c1.norm(), 1.0, 1e-10);
  }
  EXPECT_THROW(cat_state({1e-10, M_PI}, s), DegenerateCatError);
}

TEST(States, ParityProjectorAlgebra) {
  auto [p, m] = parity_projectors(FockSpace(9));
  const CMatrix P = p.matrix(), M = m.matrix();
  EXPECT_LT((P * P - P).norm(), 1e-15);
  EXPECT_LT((P * M).norm(), 1e-15);
  EXPECT_LT((P + M - CMatrix::Identity(9, 9)).norm(), 1e-15);
  EXPECT_LT((P * StateVector::basis(FockSpace(9), 3).amplitudes()).norm(), 1e-15);
}

TEST(Entropy, ReferenceValues) {
  const Space q = CompositeSpace(FockSpace(2));
  CMatrix d = CMatrix::Zero(2, 2);
  d(0, 0) = 0.7;
  d(1, 1) = 0.3;
  EXPECT_NEAR(purity(d), 0.58, 1e-14);
  EXPECT_NEAR(1.0 - purity(d), 0.42, 1e-14);
  EXPECT_NEAR(von_neumann_entropy(d), -(0.7 * std::log(0.7) + 0.3 * std::log(0.3)), 1e-14);
  EXPECT_NEAR(von_neumann_entropy(d), 0.6109, 1e-4);
  EXPECT_NEAR(von_neumann_entropy(CMatrix(0.5 * CMatrix::Identity(2, 2))), std::log(2.0), 1e-14);

  // (|0,0> + |1,1>)/sqrt2 on qubit (x) 2-level oscillator.
  CVector bell = CVector::Zero(4);
  bell(0) = bell(3) = 1.0 / std::sqrt(2.0);
  const DensityMatrix rb = DensityMatrix::from_pure(StateVector(q, bell));
  EXPECT_NEAR(purity(partial_trace(rb, Factor::qubit)), 0.5, 1e-14);
  EXPECT_NEAR(mutual_information(rb), 2.0 * std::log(2.0), 1e-12);
  CMatrix mix = CMatrix::Zero(4, 4);
  mix(0, 0) = mix(3, 3) = 0.5;
  EXPECT_NEAR(mutual_information(DensityMatrix(q, mix)), std::log(2.0), 1e-12);
  EXPECT_NEAR(mutual_information(DensityMatrix::from_pure(StateVector::basis(q, 1))), 0.0, 1e-12);
}

TEST(Entropy, PureBipartiteProperties) {
  std::mt19937_64 rng(11);
  const CompositeSpace cs(FockSpace(6));
  for (int trial = 0; trial < 20; ++trial) {
    const StateVector psi = random_state(rng, cs);
    const CMatrix rho_ho = reduced_ho(psi.amplitudes(), cs), rho_q = reduced_qubit(psi.amplitudes(), cs);
    EXPECT_NEAR(purity(rho_ho), purity(rho_q), 1e-10);
    // Schmidt coefficients from the singular values of the 2 x n coefficient matrix.
    const CMatrix m = detail::as_qubit_by_ho(psi.amplitudes(), 6);
    Eigen::JacobiSVD<CMatrix> svd(m);
    double s_ent = 0.0;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
      const double p = svd.singularValues()(i) * svd.singularValues()(i);
      if (p > 1e-14) s_ent -= p * std::log(p);
    }
    const double mi = mutual_information(DensityMatrix::from_pure(psi));
    EXPECT_NEAR(mi, 2.0 * s_ent, 1e-9);
    EXPECT_GE(mi, -1e-12);
  }
}

TEST(Entropy, SigmaZConvention) {
  const CompositeSpace cs(FockSpace(3));
  const OperatorMatrix sz = embed_qubit_op(qubit::sigma_z(), cs);
  EXPECT_NEAR(expectation(sz, StateVector::basis(cs, 0)).real(), -1.0, 1e-15);
  EXPECT_NEAR(expectation(sz, StateVector::basis(cs, 3)).real(), 1.0, 1e-15);
  EXPECT_NEAR(expectation(number_op(FockSpace(4)), StateVector::basis(FockSpace(4), 2)).real(), 2.0, 1e-15);
}

TEST(EntangledCats, AppendixCForm) {
  // Any unitary mixing of cat+ and cat- across an orthonormal qubit basis
  // gives an entangled state with reduced purity 1/2 whose oscillator
  // eigenvectors lie in span{|alpha>, |-alpha>}.
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const CompositeSpace cs(FockSpace(30));
  for (int trial = 0; trial < 20; ++trial) {
    const Complex alpha = std::polar(0.6 + 1.4 * u(rng), 2.0 * M_PI * u(rng));
    const StateVector psi = testing::general_entangled_cat(alpha, testing::random_unitary2(rng),
                                                           testing::random_unitary2(rng), cs);
    EXPECT_NEAR(psi.norm(), 1.0, 1e-10);
    const CMatrix rho_ho = reduced_ho(psi.amplitudes(), cs);
    EXPECT_NEAR(purity(rho_ho), 0.5, 1e-8);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(rho_ho);
    CMatrix span(30, 2);
    span.col(0) = coherent_state(alpha, cs.ho()).amplitudes();
    span.col(1) = coherent_state(-alpha, cs.ho()).amplitudes();
    const Eigen::HouseholderQR<CMatrix> qr(span);
    const CMatrix q = qr.householderQ() * CMatrix::Identity(30, 2);
    for (int k = 28; k < 30; ++k) {
      const CVector v = es.eigenvectors().col(k);
      EXPECT_LT((v - q * (q.adjoint() * v)).norm(), 1e-8);
    }
  }
}

TEST(Constructors, NormsAreUnit) {
  const FockSpace s(25);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int trial = 0; trial < 20; ++trial) {
    const Complex a(u(rng), u(rng));
    EXPECT_NEAR(coherent_state(a, s).norm(), 1.0, 1e-10);
    EXPECT_NEAR(cat_state({a, u(rng) * 2.0}, s).norm(), 1.0, 1e-10);
    EXPECT_NEAR(entangled_cat_state(a, QubitBasis::from_angles(u(rng), u(rng), u(rng)), CompositeSpace(s)).norm(),
                1.0, 1e-10);
  }
}

TEST(Errors, DimensionMismatch) {
  EXPECT_THROW(StateVector(FockSpace(4), CVector::Zero(5)), DimensionError);
  EXPECT_THROW(FockSpace(1), DimensionError);
}

}  // namespace
}  // namespace catoptron
