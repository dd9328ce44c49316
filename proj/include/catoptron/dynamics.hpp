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

#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "catoptron/models.hpp"

namespace catoptron {

/// Snapshots at the grid points t_0..t_N (all of them when stored, otherwise
/// only the initial and final value).
template <class T>
struct Trajectory {
  TimeGrid grid;
  std::vector<T> snapshots;
  /// Largest population found in the top two oscillator levels along the
  /// forward trajectory (0 for costates).
  double max_truncation_weight = 0.0;

  const T& initial() const { return snapshots.front(); }
  const T& final() const { return snapshots.back(); }
  bool stored() const { return int(snapshots.size()) == grid.n_steps() + 1; }
};

using StateTrajectory = Trajectory<StateVector>;
using DensityTrajectory = Trajectory<DensityMatrix>;
using CostateTrajectory = Trajectory<StateVector>;
using CoDensityTrajectory = Trajectory<CMatrix>;

namespace detail {

/// Degree and substep count of a truncated Taylor series for exp(h A) with
/// ||A|| <= norm_bound. The plan depends only on (norm_bound, h), so a forward
/// step and its adjoint use the same polynomial and are exact adjoints.
struct TaylorPlan {
  int substeps = 1;
  int degree = 0;
  double h = 0.0;  // substep length
};

inline TaylorPlan taylor_plan(double norm_bound, double dt) {
  TaylorPlan p;
  const double x = norm_bound * std::abs(dt);
  p.substeps = std::max(1, int(std::ceil(x)));
  p.h = dt / p.substeps;
  const double y = x / p.substeps;
  // remainder <= y^{m+1}/(m+1)! e^y
  double term = 1.0;
  const double ey = std::exp(y);
  while (p.degree < 40) {
    term *= y / (p.degree + 1);
    if (term * ey < 1e-17) break;
    ++p.degree;
  }
  return p;
}

/// exp(h A) x for a linear map `apply` given as a callable.
template <class Vec, class Apply>
Vec taylor_exp(const TaylorPlan& plan, const Vec& x, Apply&& apply) {
  Vec out = x;
  Vec term;
  for (int s = 0; s < plan.substeps; ++s) {
    term = out;
    for (int k = 1; k <= plan.degree; ++k) {
      term = apply(term);
      term *= plan.h / k;
      out += term;
    }
  }
  return out;
}

inline double one_norm(const CMatrix& m) { return m.cwiseAbs().colwise().sum().maxCoeff(); }
inline double inf_norm(const CMatrix& m) { return m.cwiseAbs().rowwise().sum().maxCoeff(); }
inline double spectral_bound(const CMatrix& m) { return std::sqrt(one_norm(m) * inf_norm(m)); }

inline bool all_finite(const CVector& v) { return v.allFinite(); }
inline bool all_finite(const CMatrix& m) { return m.allFinite(); }

}  // namespace detail

// ---------------------------------------------------------------------------
// Steppers: one interval of constant control, forward and adjoint.
// ---------------------------------------------------------------------------

/// psi -> exp(-i H(eps) dt) psi and its adjoint chi -> exp(+i H(eps) dt) chi.
class HilbertStepper {
 public:
  using State = CVector;
  using Costate = CVector;

  explicit HilbertStepper(const LinearControlModel& model)
      : model_(&model),
        n0_(detail::spectral_bound(model.drift())),
        nre_(detail::spectral_bound(model.derivative(Quadrature::re))),
        nim_(detail::spectral_bound(model.derivative(Quadrature::im))) {}

  const LinearControlModel& model() const { return *model_; }

  CVector forward(const CVector& psi, Complex eps, double dt) const { return step(psi, eps, dt, -1.0); }
  CVector backward(const CVector& chi, Complex eps, double dt) const { return step(chi, eps, dt, +1.0); }

  /// Im <chi| dH/dq |psi>
  double gradient_pairing(const CVector& chi, const CVector& psi, Quadrature q) const {
    return chi.dot(model_->derivative(q) * psi).imag();
  }

 private:
  double bound(Complex eps) const { return n0_ + std::abs(eps.real()) * nre_ + std::abs(eps.imag()) * nim_; }

  CVector step(const CVector& v, Complex eps, double dt, double sign) const {
    const CMatrix h = model_->hamiltonian(eps);
    const detail::TaylorPlan plan = detail::taylor_plan(bound(eps), dt);
    const Complex f = sign * I;
    return detail::taylor_exp(plan, v, [&](const CVector& x) -> CVector { return f * (h * x); });
  }

  const LinearControlModel* model_;
  double n0_, nre_, nim_;
};

/// rho -> exp(L(eps) dt) rho and chi -> exp(L(eps)^+ dt) chi, with
/// L rho = K rho + rho K^+ + kappa C rho C^+ and K = -iH - kappa C^+C / 2.
class LiouvilleStepper {
 public:
  using State = CMatrix;
  using Costate = CMatrix;

  LiouvilleStepper(const LinearControlModel& model, const LindbladSpec& diss)
      : model_(&model),
        kappa_(diss.kappa),
        c_(diss.collapse.matrix()),
        cd_(c_.adjoint()),
        decay_(0.5 * diss.kappa * (cd_ * c_)),
        n0_(detail::spectral_bound(model.drift())),
        nre_(detail::spectral_bound(model.derivative(Quadrature::re))),
        nim_(detail::spectral_bound(model.derivative(Quadrature::im))),
        nd_(detail::spectral_bound(decay_) + diss.kappa * std::pow(detail::spectral_bound(c_), 2)) {
    if (c_.rows() != model.dim()) throw DimensionError("LiouvilleStepper: collapse operator dimension mismatch");
  }

  const LinearControlModel& model() const { return *model_; }

  CMatrix forward(const CMatrix& rho, Complex eps, double dt) const {
    const CMatrix k = -I * model_->hamiltonian(eps) - decay_;
    const CMatrix kd = k.adjoint();
    const auto plan = detail::taylor_plan(bound(eps), dt);
    return detail::taylor_exp(plan, rho, [&](const CMatrix& x) -> CMatrix {
      CMatrix y = k * x;
      y.noalias() += x * kd;
      if (kappa_ > 0.0) y.noalias() += kappa_ * (c_ * x * cd_);
      return y;
    });
  }

  CMatrix backward(const CMatrix& chi, Complex eps, double dt) const {
    const CMatrix k = -I * model_->hamiltonian(eps) - decay_;
    const CMatrix kd = k.adjoint();
    const auto plan = detail::taylor_plan(bound(eps), dt);
    return detail::taylor_exp(plan, chi, [&](const CMatrix& x) -> CMatrix {
      CMatrix y = kd * x;
      y.noalias() += x * k;
      if (kappa_ > 0.0) y.noalias() += kappa_ * (cd_ * x * c_);
      return y;
    });
  }

  /// Re <chi, dL/dq rho> with dL/dq rho = -i [dH/dq, rho]
  double gradient_pairing(const CMatrix& chi, const CMatrix& rho, Quadrature q) const {
    const CMatrix& dh = model_->derivative(q);
    const CMatrix comm = -I * (dh * rho - rho * dh);
    return chi.conjugate().cwiseProduct(comm).sum().real();
  }

 private:
  double bound(Complex eps) const {
    return 2.0 * (n0_ + std::abs(eps.real()) * nre_ + std::abs(eps.imag()) * nim_ + nd_);
  }

  const LinearControlModel* model_;
  double kappa_;
  CMatrix c_, cd_, decay_;
  double n0_, nre_, nim_, nd_;
};

// ---------------------------------------------------------------------------
// Propagation over a pulse
// ---------------------------------------------------------------------------

namespace detail {

inline void check_pulse(const LinearControlModel& model, const ControlPulse& pulse, Eigen::Index state_dim) {
  if (state_dim != model.dim()) throw DimensionError("propagation: state dimension does not match the model");
  if (pulse.size() != pulse.grid.n_steps()) throw DimensionError("propagation: pulse and grid disagree");
}

inline double min_eigenvalue(const CMatrix& rho) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

/// Aborts on positivity loss beyond -1e-6 (time step too coarse).
inline void check_positivity(const CMatrix& rho) {
  const double lam = min_eigenvalue(rho);
  if (lam < -1e-6)
    throw PositivityError("density propagation: eigenvalue " + std::to_string(lam) +
                          " below -1e-6; reduce the time step");
}

}  // namespace detail

inline StateTrajectory propagate_state(const LinearControlModel& model, const ControlPulse& pulse,
                                       const StateVector& psi0, bool store = true) {
  detail::check_pulse(model, pulse, psi0.amplitudes().size());
  const HilbertStepper stepper(model);
  const double dt = pulse.grid.dt();
  StateTrajectory traj{pulse.grid, {psi0}, truncation_weight(psi0)};
  if (store) traj.snapshots.reserve(pulse.size() + 1);
  CVector psi = psi0.amplitudes();
  for (int k = 0; k < pulse.size(); ++k) {
    psi = stepper.forward(psi, pulse[k], dt);
    StateVector snap(model.space(), psi);
    traj.max_truncation_weight = std::max(traj.max_truncation_weight, truncation_weight(snap));
    if (store) traj.snapshots.push_back(std::move(snap));
  }
  if (!detail::all_finite(psi)) throw NonFiniteError("propagate_state: amplitudes are no longer finite");
  if (!store) traj.snapshots.emplace_back(model.space(), psi);
  return traj;
}

inline CostateTrajectory propagate_costate_backward(const LinearControlModel& model, const ControlPulse& pulse,
                                                    const StateVector& chi_t) {
  detail::check_pulse(model, pulse, chi_t.amplitudes().size());
  if (!detail::all_finite(chi_t.amplitudes())) throw NonFiniteError("propagate_costate_backward: non-finite chi(T)");
  const HilbertStepper stepper(model);
  const double dt = pulse.grid.dt();
  std::vector<CVector> back(pulse.size() + 1);
  back[pulse.size()] = chi_t.amplitudes();
  for (int k = pulse.size() - 1; k >= 0; --k) back[k] = stepper.backward(back[k + 1], pulse[k], dt);
  CostateTrajectory traj{pulse.grid, {}, 0.0};
  traj.snapshots.reserve(back.size());
  for (auto& v : back) traj.snapshots.emplace_back(model.space(), std::move(v));
  return traj;
}

inline DensityTrajectory propagate_density(const LinearControlModel& model, const LindbladSpec& diss,
                                           const ControlPulse& pulse, const DensityMatrix& rho0, bool store = true) {
  detail::check_pulse(model, pulse, rho0.matrix().rows());
  const LiouvilleStepper stepper(model, diss);
  const double dt = pulse.grid.dt();
  DensityTrajectory traj{pulse.grid, {rho0}, truncation_weight(rho0)};
  if (store) traj.snapshots.reserve(pulse.size() + 1);
  CMatrix rho = rho0.matrix();
  for (int k = 0; k < pulse.size(); ++k) {
    rho = stepper.forward(rho, pulse[k], dt);
    DensityMatrix snap(model.space(), rho);
    traj.max_truncation_weight = std::max(traj.max_truncation_weight, truncation_weight(snap));
    if (store) traj.snapshots.push_back(std::move(snap));
  }
  if (!detail::all_finite(rho)) throw NonFiniteError("propagate_density: matrix entries are no longer finite");
  detail::check_positivity(rho);
  if (!store) traj.snapshots.emplace_back(model.space(), rho);
  return traj;
}

inline CoDensityTrajectory propagate_codm_backward(const LinearControlModel& model, const LindbladSpec& diss,
                                                   const ControlPulse& pulse, const CMatrix& chi_t) {
  detail::check_pulse(model, pulse, chi_t.rows());
  if (!detail::all_finite(chi_t)) throw NonFiniteError("propagate_codm_backward: non-finite chi(T)");
  const LiouvilleStepper stepper(model, diss);
  const double dt = pulse.grid.dt();
  CoDensityTrajectory traj{pulse.grid, std::vector<CMatrix>(pulse.size() + 1), 0.0};
  traj.snapshots[pulse.size()] = chi_t;
  for (int k = pulse.size() - 1; k >= 0; --k) traj.snapshots[k] = stepper.backward(traj.snapshots[k + 1], pulse[k], dt);
  return traj;
}

/// Hilbert-Schmidt inner product Tr(a^+ b).
inline Complex hs_inner(const CMatrix& a, const CMatrix& b) { return a.conjugate().cwiseProduct(b).sum(); }

}  // namespace catoptron
