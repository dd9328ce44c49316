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

/// <x|n> by the Hermite-function recurrence.
RVector hermite_functions(double x, int d) {
  RVector h(d);
  h(0) = std::pow(M_PI, -0.25) * std::exp(-0.5 * x * x);
  if (d > 1) h(1) = std::sqrt(2.0) * x * h(0);
  for (int n = 2; n < d; ++n) h(n) = std::sqrt(2.0 / n) * x * h(n - 1) - std::sqrt((n - 1.0) / n) * h(n - 2);
  return h;
}

PhaseSpaceGrid square_grid(double r, int n) {
  PhaseSpaceGrid g;
  g.x_min = g.p_min = -r;
  g.x_max = g.p_max = r;
  g.n_x = g.n_p = n;
  return g;
}

TEST(Wigner, VacuumAndParityAtOrigin) {
  const FockSpace s(20);
  PhaseSpaceGrid g = square_grid(1.0, 21);
  EXPECT_NEAR(wigner(StateVector::basis(s, 0), g).values(10, 10), 1.0 / M_PI, 1e-6);
  EXPECT_NEAR(wigner(cat_state({1.5, M_PI}, s), g).values(10, 10), -1.0 / M_PI, 1e-4);
  std::mt19937_64 rng(3);
  auto [even, odd] = parity_projectors(s);
  for (int trial = 0; trial < 10; ++trial) {
    const StateVector psi = testing::random_state(rng, s);
    const double parity = (expectation(even, psi) - expectation(odd, psi)).real();
    EXPECT_NEAR(M_PI * wigner(psi, g).values(10, 10), parity, 1e-6);
  }
}

TEST(Wigner, CoherentStateGaussian) {
  // Checks the orientation of both axes: x = sqrt2 Re(alpha), p = sqrt2 Im(alpha).
  const FockSpace s(30);
  const Complex alpha(0.6, -0.9);
  const PhaseSpaceGrid g = square_grid(4.0, 33);
  const WignerMap w = wigner(coherent_state(alpha, s), g);
  const double x0 = std::sqrt(2.0) * alpha.real(), p0 = std::sqrt(2.0) * alpha.imag();
  double worst = 0.0;
  for (int i = 0; i < g.n_x; ++i)
    for (int j = 0; j < g.n_p; ++j) {
      const double dx = g.x(i) - x0, dp = g.p(j) - p0;
      worst = std::max(worst, std::abs(w.values(i, j) - std::exp(-dx * dx - dp * dp) / M_PI));
    }
  EXPECT_LT(worst, 1e-6);
}

TEST(Wigner, MarginalMatchesPositionDensity) {
  std::mt19937_64 rng(6);
  const FockSpace s(10);
  PhaseSpaceGrid g;
  g.x_min = -3.0, g.x_max = 3.0, g.n_x = 25;
  g.p_min = -9.0, g.p_max = 9.0, g.n_p = 721;
  for (int trial = 0; trial < 3; ++trial) {
    const StateVector psi = testing::random_state(rng, s);
    const WignerMap w = wigner(psi, g);
    const double dp = (g.p_max - g.p_min) / (g.n_p - 1);
    for (int i = 0; i < g.n_x; ++i) {
      double marginal = 0.0;
      for (int j = 0; j < g.n_p; ++j) marginal += (j == 0 || j == g.n_p - 1 ? 0.5 : 1.0) * w.values(i, j) * dp;
      const Complex amp = hermite_functions(g.x(i), 10).cast<Complex>().dot(psi.amplitudes());
      EXPECT_NEAR(marginal, std::norm(amp), 1e-3);
    }
  }
}

TEST(Wigner, EvenCatLobes) {
  const FockSpace s(30);
  PhaseSpaceGrid g;
  g.x_min = -4.0, g.x_max = 4.0, g.n_x = 801;
  g.p_min = -0.01, g.p_max = 0.01, g.n_p = 16;  // p index 7/8 straddle zero
  const WignerMap w = wigner(cat_state({1.5, 0.0}, s), g);
  Eigen::Index right, left;
  // Skip the central interference peak; search |x| >= 1 only.
  w.values.col(7).tail(300).maxCoeff(&right);
  w.values.col(7).head(300).maxCoeff(&left);
  const double target = std::sqrt(2.0) * 1.5;
  EXPECT_NEAR(g.x(int(right) + 501), target, 0.05 * target);
  EXPECT_NEAR(g.x(int(left)), -target, 0.05 * target);
  EXPECT_GT(w.values(int(right) + 501, 7), 0.0);
}

TEST(Wigner, FlagsTruncation) {
  const FockSpace s(6);
  EXPECT_TRUE(wigner(StateVector::basis(s, 5), square_grid(2.0, 16)).truncated);
  EXPECT_FALSE(wigner(StateVector::basis(s, 1), square_grid(2.0, 16)).truncated);
}

TEST(Spectrum, MonochromaticAndCosine) {
  const TimeGrid g(20.0, 400);
  const double w0 = 2.0 * M_PI * 10 / 20.0;  // on a DFT bin
  ControlPulse e(g), c(g);
  for (int k = 0; k < g.n_steps(); ++k) {
    e[k] = std::exp(I * w0 * g.midpoint(k));
    c[k] = std::cos(w0 * g.midpoint(k));
  }
  const Spectrum se = pulse_spectrum(e, 4);
  Eigen::Index j;
  se.magnitude.maxCoeff(&j);
  EXPECT_NEAR(se.omega(j), w0, 1e-9);
  EXPECT_NEAR(se.bin_width(), 2.0 * M_PI / (4 * 20.0), 1e-12);
  const Spectrum sc = pulse_spectrum(c, 1);
  const int m = int(sc.omega.size());
  for (int k = 1; k < m; ++k) EXPECT_NEAR(sc.magnitude(k), sc.magnitude(m - k), 1e-9);
  sc.magnitude.maxCoeff(&j);
  EXPECT_NEAR(std::abs(sc.omega(j)), w0, 1e-9);
  // All power in one bin: the 99% width is a single bin.
  EXPECT_NEAR(spectral_width(pulse_spectrum(e, 1)), 2.0 * M_PI / 20.0, 1e-9);
}

TEST(Spectrum, WidthOfGaussianPulse) {
  const TimeGrid g(40.0, 2000);
  const double s = 2.0;
  ControlPulse p(g);
  for (int k = 0; k < g.n_steps(); ++k) p[k] = std::exp(-std::pow(g.midpoint(k) - 20.0, 2) / (2 * s * s));
  // |FT|^2 ~ exp(-omega^2 s^2): 99% of the power lies within |omega| < 1.8214 / s.
  EXPECT_NEAR(spectral_width(pulse_spectrum(p, 8), 0.99), 2.0 * 1.82139 / s, 0.05);
}

TEST(Gabor, MonochromaticRidgeIsFlat) {
  const TimeGrid g(30.0, 600);
  ControlPulse p(g);
  for (int k = 0; k < g.n_steps(); ++k) p[k] = std::exp(I * 1.7 * g.midpoint(k));
  GaborConfig cfg;
  cfg.omega_min = -4.0, cfg.omega_max = 4.0, cfg.n_omega = 801;
  const RVector ridge = gabor_ridge(gabor(p, cfg));
  for (int i = 0; i < ridge.size(); ++i) EXPECT_NEAR(ridge(i), 1.7, 0.011);
}

TEST(Gabor, ChirpRidgeIsLinear) {
  const double T = 60.0, w0 = 0.5, rate = 0.05;
  const TimeGrid g(T, 3000);
  ControlPulse p(g);
  for (int k = 0; k < g.n_steps(); ++k) {
    const double t = g.midpoint(k);
    p[k] = std::exp(I * (w0 * t + 0.5 * rate * t * t));
  }
  GaborConfig cfg;
  cfg.n_tau = 41;
  cfg.omega_min = -1.0, cfg.omega_max = 5.0, cfg.n_omega = 1201;
  const GaborMap m = gabor(p, cfg);
  const RVector ridge = gabor_ridge(m);
  for (int i = 0; i < ridge.size(); ++i) {
    if (i > 0) {
      EXPECT_GE(ridge(i), ridge(i - 1));
    }
    // Away from the edges the ridge follows the instantaneous frequency.
    if (m.tau(i) > 0.2 * T && m.tau(i) < 0.8 * T) {
      EXPECT_NEAR(ridge(i), w0 + rate * m.tau(i), 0.05);
    }
  }
}

TEST(Gabor, WideWindowRecoversSpectrum) {
  const TimeGrid g(10.0, 400);
  ControlPulse p(g);
  for (int k = 0; k < g.n_steps(); ++k) {
    const double t = g.midpoint(k);
    p[k] = std::sin(M_PI * t / 10.0) * (std::exp(I * 2.0 * t) + 0.5 * std::exp(-I * 3.5 * t));
  }
  GaborConfig cfg;
  cfg.sigma = 1e4;
  cfg.n_tau = 1;
  cfg.omega_min = -6.0, cfg.omega_max = 6.0, cfg.n_omega = 121;
  const GaborMap m = gabor(p, cfg);
  RVector gab = m.values.row(0).cwiseAbs().transpose();
  RVector ft(cfg.n_omega);
  for (int j = 0; j < cfg.n_omega; ++j) {
    Complex acc{};
    for (int k = 0; k < g.n_steps(); ++k) acc += p[k] * std::exp(-I * m.omega(j) * g.midpoint(k)) * g.dt();
    ft(j) = std::abs(acc);
  }
  gab /= gab.maxCoeff();
  ft /= ft.maxCoeff();
  EXPECT_LT((gab - ft).cwiseAbs().maxCoeff(), 0.02);
}

TEST(CatInfidelityPure, MembersOfTheFamily) {
  const FockSpace s(30);
  const CatFit f = cat_infidelity_pure(cat_state({1.3, M_PI / 2.0}, s));
  EXPECT_LT(f.infidelity, 1e-8);
  // (alpha, phi) and (-alpha, -phi) describe the same state up to phase.
  const bool direct = std::abs(f.argmin.alpha - Complex(1.3)) < 1e-4 && std::abs(std::remainder(f.argmin.phase - M_PI / 2, 2 * M_PI)) < 1e-4;
  const bool mirror = std::abs(f.argmin.alpha + Complex(1.3)) < 1e-4 && std::abs(std::remainder(f.argmin.phase + M_PI / 2, 2 * M_PI)) < 1e-4;
  EXPECT_TRUE(direct || mirror) << f.argmin.alpha << " " << f.argmin.phase;

  std::mt19937_64 rng(50);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const CatStateSpec spec{std::polar(0.5 + 2.0 * u(rng), 2 * M_PI * u(rng)), 2 * M_PI * u(rng)};
    const StateVector c = cat_state(spec, s);
    EXPECT_LT(cat_infidelity_pure(c).infidelity, 1e-8) << spec.alpha << " " << spec.phase;
    const Complex phase = std::polar(1.0, 2 * M_PI * u(rng));
    EXPECT_NEAR(cat_infidelity_pure(StateVector(s, phase * c.amplitudes())).infidelity,
                cat_infidelity_pure(c).infidelity, 1e-12);
  }
}

TEST(CatInfidelityPure, CoherentState) {
  const double expect = 1.0 - (1.0 + std::exp(-8.0)) / (std::sqrt(2.0) * std::sqrt(1.0 + std::exp(-16.0)));
  EXPECT_NEAR(cat_infidelity_pure(coherent_state(2.0, FockSpace(40))).infidelity, expect, 1e-3);
}

TEST(CatInfidelityPure, FockOneAgainstGridOracle) {
  const FockSpace s(40);
  const StateVector one = StateVector::basis(s, 1);
  // |<cat(r, pi)|1>| depends on |alpha| = r only; brute force over 10^4 radii.
  double best = 0.0;
  for (int i = 1; i <= 10000; ++i) {
    const double r = 3.0 * i / 10000;
    best = std::max(best, std::abs(cat_state({r, M_PI}, s).amplitudes()(1)));
  }
  EXPECT_NEAR(cat_infidelity_pure(one).infidelity, 1.0 - best, 1e-4);
}

TEST(CatInfidelityEntangled, MembersAndBounds) {
  const CompositeSpace cs(FockSpace(30));
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    const QubitBasis qb = QubitBasis::from_angles(M_PI * u(rng), 2 * M_PI * u(rng), 2 * M_PI * u(rng));
    const StateVector e = entangled_cat_state(std::polar(2.0, 2 * M_PI * u(rng)), qb, cs);
    EXPECT_LT(cat_infidelity_entangled(e).infidelity, 1e-6);
    EXPECT_LT(cat_infidelity_entangled(DensityMatrix::from_pure(e)).infidelity, 1e-6);
    const EntangledCatFit fit = cat_infidelity_entangled(e);
    const StateVector rebuilt = entangled_cat_state(fit.alpha, fit.basis, cs);
    EXPECT_GT(std::abs(overlap(rebuilt, e)), 1.0 - 1e-6);
  }
  const StateVector prod(cs, detail::kron(Eigen::Vector2cd(0.6, 0.8), cat_state({1.5, 0.0}, cs.ho()).amplitudes()));
  EXPECT_GE(cat_infidelity_entangled(prod).infidelity, 1.0 - 1.0 / std::sqrt(2.0) - 1e-6);
  const CompositeSpace small(FockSpace(6));
  EXPECT_NEAR(cat_infidelity_entangled(DensityMatrix::maximally_mixed(small)).infidelity, 1.0 - 1.0 / std::sqrt(12.0),
              1e-8);
}

TEST(CatInfidelityEntangled, MixedStateFidelityMatchesUhlmann) {
  std::mt19937_64 rng(13);
  const CompositeSpace cs(FockSpace(3));
  for (int trial = 0; trial < 20; ++trial) {
    const DensityMatrix rho = testing::random_density(rng, cs);
    const CVector psi = testing::random_vector(rng, 6);
    const double reduced = std::sqrt(psi.dot(rho.matrix() * psi).real());
    EXPECT_NEAR(reduced, testing::uhlmann_fidelity(rho.matrix(), psi * psi.adjoint()), 1e-10);
  }
}

TEST(Diagnostics, BlochAndPurityError) {
  CMatrix g = CMatrix::Zero(2, 2);
  g(0, 0) = 1.0;
  BlochVector b = bloch_coords(g);
  EXPECT_NEAR(b.z, -1.0, 1e-15);
  EXPECT_NEAR(b.x, 0.0, 1e-15);
  b = bloch_coords(CMatrix(0.5 * CMatrix::Identity(2, 2)));
  EXPECT_NEAR(b.length(), 0.0, 1e-15);
  const CVector plus = CVector::Ones(2) / std::sqrt(2.0);
  b = bloch_coords(CMatrix(plus * plus.adjoint()));
  EXPECT_NEAR(b.x, 1.0, 1e-15);
  EXPECT_NEAR(b.y, 0.0, 1e-15);
  const CompositeSpace cs(FockSpace(4));
  EXPECT_NEAR(purity_error(DensityMatrix::from_pure(StateVector::basis(cs, 2))), 0.0, 1e-15);
  EXPECT_NEAR(purity_error(DensityMatrix::maximally_mixed(cs)), 1.0 - 1.0 / 8.0, 1e-15);
}

TEST(Observables, UnitaryAndRabiColumns) {
  const CompositeSpace cs(FockSpace(6));
  const JCModel m(1.0, cs);
  const TimeGrid g(2.0 * M_PI, 400);
  const auto traj = propagate_density(m, LindbladSpec::oscillator_decay(0.0, cs), ControlPulse(g),
                                      DensityMatrix::from_pure(StateVector::basis(cs, cs.index(1, 0))));
  const Table t = observables_timeseries(traj, {"sigma_z", "purity", "n"});
  for (int k = 0; k <= g.n_steps(); ++k) {
    // Vacuum Rabi: <sigma_z>(t) = cos(2 g t), period pi/g.
    EXPECT_NEAR(t.data(k, 1), std::cos(2.0 * g.t(k)), 1e-9);
    EXPECT_NEAR(t.data(k, 2), 1.0, 1e-9);
    EXPECT_NEAR(t.data(k, 3), std::pow(std::sin(g.t(k)), 2), 1e-9);
  }
  EXPECT_THROW(observables_timeseries(traj, {"bogus"}), ConfigError);
}

}  // namespace
}  // namespace catoptron
