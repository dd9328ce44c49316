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

const FockSpace kFock(30);
const CompositeSpace kComp(FockSpace(30));

StateVector fock_superposition(const Space& s, std::initializer_list<std::pair<int, Complex>> amps) {
  CVector v = CVector::Zero(s.dim());
  for (auto [i, c] : amps) v(i) = c;
  return {s, v.normalized()};
}

StateVector product(const Eigen::Vector2cd& b, const StateVector& ho) {
  return {CompositeSpace(ho.space().ho()), detail::kron(b, ho.amplitudes())};
}

TEST(CoherentStateTerm, Values) {
  for (auto [a, phi] : {std::pair{1.5, 0.0}, {0.8, M_PI}, {2.0, 1.1}}) {
    const StateVector c = cat_state({std::polar(a, 0.3), phi}, kFock);
    EXPECT_NEAR(j_cs_variance(c), 0.0, 1e-10);
    EXPECT_NEAR(j_cs_normalized(c), 0.0, 1e-10);
  }
  EXPECT_NEAR(j_cs_variance(coherent_state(Complex(1.0, 0.4), kFock)), 0.0, 1e-10);
  const StateVector two = StateVector::basis(kFock, 2);
  EXPECT_NEAR(j_cs_variance(two), 2.0, 1e-12);
  EXPECT_NEAR(j_cs_normalized(two), 1.0, 1e-12);
  EXPECT_NEAR(j_cs_normalized(fock_superposition(kFock, {{0, 1.0}, {2, 1.0}})), 0.5, 1e-12);
  // No two-photon content: the normalized term saturates at 1.
  EXPECT_EQ(j_cs_normalized(StateVector::basis(kFock, 1)), 1.0);
}

TEST(ParityTerm, Values) {
  EXPECT_NEAR(j_cat_parity(cat_state({1.5, 0.0}, kFock), Parity::even), 0.0, 1e-12);
  EXPECT_NEAR(j_cat_parity(StateVector::basis(kFock, 1), Parity::even), 1.0, 1e-12);
  EXPECT_NEAR(j_cat_parity(fock_superposition(kFock, {{0, 1.0}, {1, 1.0}}), Parity::even), 0.75, 1e-12);
}

TEST(PhaseTerm, Values) {
  for (double phi : {0.0, M_PI / 3.0, M_PI})
    EXPECT_NEAR(j_cat_phase(cat_state({1.5, phi}, kFock)), 0.0, 1e-9);
  EXPECT_NEAR(j_cat_phase(coherent_state(Complex(1.2, -0.7), kFock)), 4.0, 1e-8);

  // 0.9|a>' + 0.436|-a>' with the primes denoting the orthonormalized pair.
  const CVector p = coherent_state(2.0, kFock).amplitudes();
  CVector m = coherent_state(-2.0, kFock).amplitudes();
  m = (m - p * p.dot(m)).normalized();
  const StateVector psi(kFock, (0.9 * p + 0.436 * m).normalized());
  // Direct oracle: 4 [Re(<a>/sqrt(<a^2>))]^2 with the principal root.
  const CMatrix a = annihilation_op(kFock).matrix();
  const Complex u = psi.amplitudes().dot(a * psi.amplitudes());
  const Complex s = psi.amplitudes().dot(a * a * psi.amplitudes());
  const double oracle = 4.0 * std::pow((u / std::sqrt(s)).real(), 2);
  EXPECT_GT(oracle, 0.1);
  EXPECT_NEAR(j_cat_phase(psi), oracle, 1e-10);
  EXPECT_THROW(j_cat_phase(StateVector::basis(kFock, 0)), DegenerateDenominator);
}

TEST(OverlapTerm, Values) {
  const StateVector t = cat_state({1.5, 0.0}, kFock);
  EXPECT_NEAR(j_ss(t, t), 0.0, 1e-12);
  EXPECT_NEAR(j_ss(StateVector::basis(kFock, 1), t), 1.0, 1e-12);
  const StateVector a = StateVector::basis(kFock, 0), b = StateVector::basis(kFock, 1);
  EXPECT_NEAR(j_ss(StateVector(kFock, 0.6 * a.amplitudes() + 0.8 * b.amplitudes()), a), 0.4, 1e-12);
}

TEST(BipartiteTerms, Values) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 5; ++trial) {
    const QubitBasis qb = QubitBasis::from_angles(0.3 * trial, 0.7, -0.2 * trial);
    const StateVector e = entangled_cat_state(std::polar(1.0 + 0.2 * trial, 0.5 * trial), qb, kComp);
    EXPECT_NEAR(j_cs_bipartite(e), 0.0, 1e-9);
    EXPECT_NEAR(j_cs_bipartite_normalized(e), 0.0, 1e-9);
    EXPECT_NEAR(j_cat_purity(e), 0.0, 1e-10);
    const StateVector g = testing::general_entangled_cat(std::polar(1.3, 0.2 * trial), testing::random_unitary2(rng),
                                                         testing::random_unitary2(rng), kComp);
    EXPECT_NEAR(j_cs_bipartite(g), 0.0, 1e-9);
  }
  const Eigen::Vector2cd b(0.6, Complex(0.0, 0.8));
  const StateVector b2 = product(b, StateVector::basis(kFock, 2));
  EXPECT_NEAR(j_cs_bipartite(b2), 2.0, 1e-12);
  EXPECT_NEAR(j_cat_purity(b2), 1.0, 1e-12);
  EXPECT_NEAR(j_cat_purity(product(b, cat_state({1.5, 0.0}, kFock))), 1.0, 1e-12);
}

TEST(RadiusTerm, Values) {
  EXPECT_NEAR(alpha_estimate(entangled_cat_state(2.0, QubitBasis::computational(), kComp)), 2.0, 1e-6);
  EXPECT_NEAR(alpha_estimate(StateVector::basis(kComp, 0)), 0.0, 1e-15);
  const StateVector b2 = product(Eigen::Vector2cd(1.0, 0.0), StateVector::basis(kFock, 2));
  EXPECT_NEAR(alpha_estimate(b2), std::pow(2.0, 0.25), 1e-12);
  EXPECT_NEAR(radius_error(b2, RadiusTarget(2.0)), 2.0 - std::pow(2.0, 0.25), 1e-12);
  EXPECT_NEAR(radius_error(StateVector::basis(kComp, 0), RadiusTarget(2.0)), 2.0, 1e-12);
  EXPECT_NEAR(RadiusTerm::cost(1.0, 2.0), 1.12890625, 1e-12);
  EXPECT_NEAR(RadiusTerm::cost(0.0, 1.7), 2.0, 1e-12);
  EXPECT_EQ(RadiusTerm::cost(1.3, 1.3), 0.0);
  EXPECT_NEAR(j_alpha(StateVector::basis(kComp, 0), RadiusTarget(1.0)), 2.0, 1e-12);
  EXPECT_NEAR(j_alpha(b2, RadiusTarget(std::pow(2.0, 0.25))), 0.0, 1e-12);
  EXPECT_THROW(RadiusTarget(0.0), ConfigError);
}

TEST(DensityTerms, Values) {
  const QubitBasis qb = QubitBasis::from_angles(0.4, 1.0, 0.3);
  const StateVector e = entangled_cat_state(Complex(1.2, 0.5), qb, kComp);
  const DensityMatrix re = DensityMatrix::from_pure(e);
  EXPECT_NEAR(j_cs_dm(re), 0.0, 1e-9);
  EXPECT_NEAR(j_cat_mutualinfo_dm(re), 0.0, 1e-10);

  const StateVector b2 = product(Eigen::Vector2cd(0.6, 0.8), StateVector::basis(kFock, 2));
  EXPECT_NEAR(j_cs_dm(DensityMatrix::from_pure(b2)), 1.0, 1e-12);
  EXPECT_NEAR(j_cat_mutualinfo_dm(DensityMatrix::from_pure(b2)), 1.0, 1e-12);

  // 1/2 (|b+,cat+><.| + |b-,cat-><.|)
  const StateVector p = product(qb.plus, cat_state({1.2, 0.0}, kFock));
  const StateVector m = product(qb.minus, cat_state({1.2, M_PI}, kFock));
  const DensityMatrix mix(kComp, 0.5 * (DensityMatrix::from_pure(p).matrix() + DensityMatrix::from_pure(m).matrix()));
  EXPECT_NEAR(j_cs_dm(mix), 0.0, 1e-9);
  EXPECT_NEAR(j_cat_mutualinfo_dm(mix), 0.5, 1e-10);
}

TEST(DensityTerms, AgreeWithPureCounterparts) {
  std::mt19937_64 rng(21);
  const CompositeSpace cs(FockSpace(8));
  TermParameters params;
  params.alpha_tgt = 1.3;
  params.target = testing::random_vector(rng, cs.dim());
  params.projector = params.target * params.target.adjoint();
  const std::vector<std::pair<std::string, std::string>> pairs{
      {"cs_bipartite", "cs_dm"}, {"cat_purity", "cat_mutualinfo_dm"}, {"alpha", "alpha_dm"}, {"ss", "ss_dm"},
      {"projector", "projector_dm"}};
  for (int trial = 0; trial < 10; ++trial) {
    const StateVector psi = testing::random_state(rng, cs);
    const DensityMatrix rho = DensityMatrix::from_pure(psi);
    for (const auto& [pn, dn] : pairs) {
      const PureTerm pt = make_pure_term(pn, cs, params);
      const DensityTerm dt = make_density_term(dn, cs, params);
      EXPECT_NEAR(pt.value(psi.amplitudes()), dt.value(rho.matrix()), 1e-10) << pn;
    }
    EXPECT_NEAR(j_cs_dm(rho), j_cs_bipartite_normalized(psi), 1e-10);
  }
}

TEST(Composite, WeightedSums) {
  std::mt19937_64 rng(4);
  const Space s = kComp;
  TermParameters params;
  params.alpha_tgt = 1.5;
  PureFunctional f;
  f.add(make_pure_term("cs_bipartite", s, params, 0.5))
      .add(make_pure_term("cat_purity", s, params, 2.0))
      .add(make_pure_term("alpha", s, params, 1.5));
  const StateVector psi = testing::random_state(rng, s);
  const auto ev = f.evaluate(psi);
  EXPECT_NEAR(ev.total,
              0.5 * j_cs_bipartite_normalized(psi) + 2.0 * j_cat_purity(psi) + 1.5 * j_alpha(psi, RadiusTarget(1.5)),
              1e-12);
  CVector chi = CVector::Zero(s.dim());
  for (const auto& t : f.terms()) chi += t.weight * t.costate(psi.amplitudes());
  EXPECT_LT((f.costate(psi) - chi).norm(), 1e-14);
  EXPECT_THROW(make_pure_term("cs_bipartite", s, params, -1.0), ConfigError);
  EXPECT_THROW(make_pure_term("nope", s, params), ConfigError);
  EXPECT_THROW(make_pure_term("cat_purity", kFock, params), SpaceError);
}

TEST(Composite, InactiveTermsAreSkipped) {
  PureFunctional f;
  f.add(make_pure_term("cs", kFock, {})).add(make_pure_term("cat_phase", kFock, {}));
  const auto ev = f.evaluate(StateVector::basis(kFock, 0));
  ASSERT_EQ(ev.terms.size(), 2u);
  EXPECT_TRUE(ev.terms[0].active);
  EXPECT_FALSE(ev.terms[1].active);
  EXPECT_EQ(ev.total, 1.0);
  EXPECT_LT(f.costate(StateVector::basis(kFock, 0)).norm(), 1e-15);
}

}  // namespace
}  // namespace catoptron
