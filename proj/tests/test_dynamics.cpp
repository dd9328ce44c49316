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

ControlPulse random_pulse(std::mt19937_64& rng, const TimeGrid& g, double scale) {
  std::normal_distribution<double> n;
  ControlPulse p(g);
  for (int k = 0; k < g.n_steps(); ++k) p[k] = scale * Complex(n(rng), n(rng));
  return p;
}

TEST(Propagation, StepMatchesEigendecomposition) {
  std::mt19937_64 rng(1);
  const JCModel m(1.0, CompositeSpace(FockSpace(12)));
  const HilbertStepper stepper(m);
  for (int trial = 0; trial < 10; ++trial) {
    const CVector psi = testing::random_vector(rng, 24);
    const Complex eps(0.7 * trial - 3.0, 0.4);
    const double dt = 0.05 + 0.1 * trial;
    const CVector oracle = testing::unitary_oracle(m.hamiltonian(eps), dt) * psi;
    EXPECT_LT((stepper.forward(psi, eps, dt) - oracle).norm(), 1e-12);
    const CVector back = testing::unitary_oracle(m.hamiltonian(eps), -dt) * psi;
    EXPECT_LT((stepper.backward(psi, eps, dt) - back).norm(), 1e-12);
  }
}

TEST(Propagation, KerrPhaseOfFockTwo) {
  const KerrModel m(1.0, FockSpace(8));
  const TimeGrid g(1.7, 50);
  const StateVector two = StateVector::basis(m.space(), 2);
  const auto traj = propagate_state(m, ControlPulse(g), two, true);
  for (int k = 0; k <= 50; k += 10) {
    const Complex expect = std::exp(I * 2.0 * g.t(k));
    EXPECT_LT(std::abs(overlap(two, traj.snapshots[k]) - expect), 1e-12);
  }
}

TEST(Propagation, VacuumRabiTransfer) {
  const double g = 1.0;
  const CompositeSpace cs(FockSpace(6));
  const JCModel m(g, cs);
  const auto traj = propagate_state(m, ControlPulse(TimeGrid(M_PI / (2.0 * g), 40)), StateVector::basis(cs, cs.index(1, 0)));
  EXPECT_NEAR(std::norm(traj.final().amplitudes()(cs.index(0, 1))), 1.0, 1e-8);
}

TEST(Propagation, NormDrift) {
  std::mt19937_64 rng(2);
  const JCModel jc(1.0, CompositeSpace(FockSpace(20)));
  const KerrModel kerr(1.0, FockSpace(20));
  for (const LinearControlModel* m : {static_cast<const LinearControlModel*>(&jc), static_cast<const LinearControlModel*>(&kerr)}) {
    const ControlPulse p = random_pulse(rng, TimeGrid(6.0, 300), 0.3);
    const auto traj = propagate_state(*m, p, StateVector::basis(m->space(), 0), true);
    double drift = 0.0;
    for (const auto& s : traj.snapshots) drift = std::max(drift, std::abs(s.norm() - 1.0));
    EXPECT_LT(drift, 1e-10);
  }
}

TEST(Propagation, TraceDriftAndPositivity) {
  std::mt19937_64 rng(3);
  const CompositeSpace cs(FockSpace(10));
  const JCModel m(1.0, cs);
  const ControlPulse p = random_pulse(rng, TimeGrid(5.0, 200), 0.3);
  const auto traj = propagate_density(m, LindbladSpec::oscillator_decay(0.2, cs), p, DensityMatrix::from_pure(StateVector::basis(cs, 0)));
  double drift = 0.0;
  for (const auto& r : traj.snapshots) {
    drift = std::max(drift, std::abs(r.trace().real() - 1.0));
    EXPECT_LT((r.matrix() - r.matrix().adjoint()).norm(), 1e-12);
  }
  EXPECT_LT(drift, 1e-9);
  EXPECT_GT(detail::min_eigenvalue(traj.final().matrix()), -1e-10);
}

TEST(Propagation, FreeDecayLaw) {
  const FockSpace s(16);
  const KerrModel m(1.0, s);
  const double kappa = 0.3;
  const TimeGrid g(4.0, 80);
  const DensityMatrix rho0 = DensityMatrix::from_pure(coherent_state(1.2, s));
  const auto traj = propagate_density(m, LindbladSpec::oscillator_decay(kappa, s), ControlPulse(g), rho0);
  const OperatorMatrix n = number_op(s);
  const double n0 = expectation(n, rho0).real();
  for (int k = 0; k <= g.n_steps(); ++k) {
    const double expect = n0 * std::exp(-kappa * g.t(k));
    EXPECT_LT(std::abs(expectation(n, traj.snapshots[k]).real() - expect) / expect, 1e-8);
  }
  const Table t = observables_timeseries(traj, {"n"});
  EXPECT_NEAR(t.data(g.n_steps(), 1), n0 * std::exp(-kappa * 4.0), 1e-8 * n0);
}

TEST(Propagation, DiscreteAdjointIdentityPure) {
  std::mt19937_64 rng(4);
  const CompositeSpace cs(FockSpace(12));
  const JCModel m(1.0, cs);
  const ControlPulse p = random_pulse(rng, TimeGrid(4.0, 120), 0.5);
  const StateVector psi0 = testing::random_state(rng, cs), chi_t = testing::random_state(rng, cs);
  const auto fwd = propagate_state(m, p, psi0, false);
  const auto bwd = propagate_costate_backward(m, p, chi_t);
  const Complex lhs = overlap(chi_t, fwd.final());
  const Complex rhs = overlap(bwd.snapshots.front(), psi0);
  EXPECT_LT(std::abs(lhs - rhs), 1e-10);
}

TEST(Propagation, DiscreteAdjointIdentityDensity) {
  std::mt19937_64 rng(5);
  const CompositeSpace cs(FockSpace(6));
  const JCModel m(1.0, cs);
  const LindbladSpec diss = LindbladSpec::oscillator_decay(0.25, cs);
  const ControlPulse p = random_pulse(rng, TimeGrid(3.0, 60), 0.5);
  const DensityMatrix rho0 = testing::random_density(rng, cs);
  const CMatrix chi_t = testing::random_density(rng, cs).matrix() + I * testing::random_density(rng, cs).matrix();
  const auto fwd = propagate_density(m, diss, p, rho0, false);
  const auto bwd = propagate_codm_backward(m, diss, p, chi_t);
  const Complex lhs = hs_inner(chi_t, fwd.final().matrix());
  const Complex rhs = hs_inner(bwd.snapshots.front(), rho0.matrix());
  EXPECT_LT(std::abs(lhs - rhs), 1e-10);
}

TEST(Propagation, ZeroCostateStaysZero) {
  const CompositeSpace cs(FockSpace(4));
  const JCModel m(1.0, cs);
  const ControlPulse p(TimeGrid(1.0, 10), std::vector<Complex>(10, Complex(0.3, 0.1)));
  for (const auto& s : propagate_costate_backward(m, p, StateVector(cs, CVector::Zero(8))).snapshots)
    EXPECT_EQ(s.amplitudes().norm(), 0.0);
  for (const auto& s : propagate_codm_backward(m, LindbladSpec::oscillator_decay(0.1, cs), p, CMatrix::Zero(8, 8)).snapshots)
    EXPECT_EQ(s.norm(), 0.0);
}

TEST(Propagation, SecondOrderInStepSize) {
  const KerrModel m(1.0, FockSpace(14));
  const double T = 2.0;
  auto smooth = [&](int n) {
    const TimeGrid g(T, n);
    ControlPulse p(g);
    for (int k = 0; k < n; ++k) p[k] = 0.6 * std::sin(M_PI * g.midpoint(k) / T) * std::exp(I * g.midpoint(k));
    return propagate_state(m, p, StateVector::basis(m.space(), 0), false).final().amplitudes();
  };
  const CVector ref = smooth(1600);
  const double e1 = (smooth(50) - ref).norm(), e2 = (smooth(100) - ref).norm();
  EXPECT_GT(std::log2(e1 / e2), 1.9);
}

TEST(Propagation, RejectsMismatchedShapes) {
  const KerrModel m(1.0, FockSpace(4));
  EXPECT_THROW(propagate_state(m, ControlPulse(TimeGrid(1.0, 4)), StateVector::basis(FockSpace(5), 0)), DimensionError);
}

}  // namespace
}  // namespace catoptron
