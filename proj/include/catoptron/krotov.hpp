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

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "catoptron/dynamics.hpp"
#include "catoptron/functionals.hpp"

namespace catoptron {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

/// Plateau of height 1 with sin^2 switch-on and switch-off flanks, each
/// covering flank_fraction of the total duration.
struct ShapeFunction {
  double flank_fraction = 0.1;

  void validate() const {
    if (!(flank_fraction > 0.0 && flank_fraction <= 0.5))
      throw ConfigError("ShapeFunction: flank_fraction must lie in (0, 0.5]");
  }

  double operator()(double t, double duration) const {
    if (t <= 0.0 || t >= duration) return 0.0;
    const double w = flank_fraction * duration;
    const double edge = std::min(t, duration - t);
    if (edge >= w) return 1.0;
    const double s = std::sin(0.5 * std::numbers::pi * edge / w);
    return s * s;
  }
};

/// S at the grid points t_0..t_N.
inline RVector shape_eval(const ShapeFunction& shape, const TimeGrid& grid) {
  shape.validate();
  RVector s(grid.n_steps() + 1);
  for (int k = 0; k <= grid.n_steps(); ++k) s(k) = shape(grid.t(k), grid.duration());
  s(0) = 0.0;
  s(grid.n_steps()) = 0.0;
  return s;
}

/// S at the interval midpoints, i.e. where the pulse samples live.
inline RVector shape_samples(const ShapeFunction& shape, const TimeGrid& grid) {
  shape.validate();
  RVector s(grid.n_steps());
  for (int k = 0; k < grid.n_steps(); ++k) s(k) = shape(grid.midpoint(k), grid.duration());
  return s;
}

struct LineSearch {
  bool enabled = false;
  double factor = 2.0;  // lambda *= factor after a rejected trial
  int max_trials = 12;
  double relax = 0.5;  // lambda *= relax after an accepted step
};

struct KrotovConfig {
  double lambda_a = 1.0;
  ShapeFunction shape;
  int max_iters = 100;
  double j_tol = 0.0;
  double dj_tol = 0.0;
  LineSearch line_search;
  /// Floor for lambda relaxation; nonpositive means lambda_a.
  double lambda_min = 0.0;

  double lambda_floor() const { return lambda_min > 0.0 ? lambda_min : lambda_a; }

  void validate() const {
    if (!(lambda_a > 0.0) || !std::isfinite(lambda_a)) throw ConfigError("krotov: lambda_a must be positive");
    if (max_iters < 0) throw ConfigError("krotov: max_iters must be >= 0");
    if (j_tol < 0.0 || dj_tol < 0.0) throw ConfigError("krotov: tolerances must be >= 0");
    if (line_search.enabled) {
      if (!(line_search.factor > 1.0)) throw ConfigError("krotov: line-search factor must exceed 1");
      if (!(line_search.relax > 0.0 && line_search.relax <= 1.0))
        throw ConfigError("krotov: line-search relax factor must lie in (0, 1]");
      if (line_search.max_trials < 1) throw ConfigError("krotov: line-search max_trials must be >= 1");
    }
    shape.validate();
  }
};

struct IterationRecord {
  int iter = 0;
  std::map<std::string, double> terms;
  double J_total = 0.0;
  double lambda_used = 0.0;
  double pulse_change_norm = 0.0;
  bool non_monotonic = false;
  int trials = 1;
};

enum class StopReason { j_tol, dj_tol, max_iters, line_search_exhausted };

inline std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::j_tol: return "j_tol";
    case StopReason::dj_tol: return "dj_tol";
    case StopReason::max_iters: return "max_iters";
    case StopReason::line_search_exhausted: return "line_search_exhausted";
  }
  return "unknown";
}

template <class State>
struct KrotovResult {
  ControlPulse pulse;  // best pulse seen
  State final_state;   // under `pulse`
  FunctionalEvaluation evaluation;
  std::vector<IterationRecord> records;  // records[0] describes the guess
  StopReason stop_reason = StopReason::max_iters;
  int iterations = 0;  // accepted updates
};

// ---------------------------------------------------------------------------
// Guess pulses
// ---------------------------------------------------------------------------

/// amplitude * S(t) * exp(i phi(t)), with phi a sum of `modes` random
/// sinusoids of total depth `modulation` drawn from `seed`.
struct GuessSpec {
  Complex amplitude{1.0, 0.0};
  double modulation = 0.0;
  int modes = 4;
  std::uint64_t seed = 0;
};

inline ControlPulse guess_pulse(const GuessSpec& spec, const ShapeFunction& shape, const TimeGrid& grid) {
  const RVector s = shape_samples(shape, grid);
  std::vector<double> amp, freq, phase;
  if (spec.modulation != 0.0) {
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int m = 0; m < spec.modes; ++m) {
      amp.push_back(spec.modulation * (2.0 * u(rng) - 1.0) / spec.modes);
      freq.push_back(1.0 + m + u(rng));
      phase.push_back(2.0 * std::numbers::pi * u(rng));
    }
  }
  ControlPulse p(grid);
  for (int k = 0; k < grid.n_steps(); ++k) {
    const double x = grid.midpoint(k) / grid.duration();
    double phi = 0.0;
    for (std::size_t m = 0; m < amp.size(); ++m) phi += amp[m] * std::sin(std::numbers::pi * freq[m] * x + phase[m]);
    p[k] = spec.amplitude * s(k) * std::exp(I * phi);
  }
  return p;
}

// ---------------------------------------------------------------------------
// Sweeps, generic over the stepper (Hilbert or Liouville space)
// ---------------------------------------------------------------------------

namespace detail {

template <class Stepper>
typename Stepper::State forward_final(const Stepper& stepper, const ControlPulse& pulse,
                                      const typename Stepper::State& x0) {
  typename Stepper::State x = x0;
  const double dt = pulse.grid.dt();
  for (int k = 0; k < pulse.size(); ++k) x = stepper.forward(x, pulse[k], dt);
  if (!all_finite(x)) throw NonFiniteError("forward propagation produced non-finite values");
  return x;
}

template <class Stepper>
std::vector<typename Stepper::Costate> backward_all(const Stepper& stepper, const ControlPulse& pulse,
                                                    typename Stepper::Costate chi_t) {
  if (!all_finite(chi_t)) throw NonFiniteError("costate at final time is not finite");
  std::vector<typename Stepper::Costate> chi(pulse.size() + 1);
  chi[pulse.size()] = std::move(chi_t);
  const double dt = pulse.grid.dt();
  for (int k = pulse.size() - 1; k >= 0; --k) chi[k] = stepper.backward(chi[k + 1], pulse[k], dt);
  return chi;
}

template <class Stepper>
struct SweepResult {
  ControlPulse pulse;
  typename Stepper::State final_state;
  double change_norm = 0.0;
};

/// First-order update with the costate interpolated to the interval midpoint
/// and the updated state predicted there by a half step under the old sample.
template <class Stepper>
SweepResult<Stepper> forward_sweep(const Stepper& stepper, const ControlPulse& old_pulse,
                                   const typename Stepper::State& x0,
                                   const std::vector<typename Stepper::Costate>& chi, const RVector& shape,
                                   double lambda) {
  const double dt = old_pulse.grid.dt();
  ControlPulse next = old_pulse;
  typename Stepper::State x = x0;
  double change = 0.0;
  for (int k = 0; k < old_pulse.size(); ++k) {
    const double s = shape(k) / lambda;
    Complex delta{};
    if (s != 0.0) {
      const typename Stepper::Costate chi_mid = 0.5 * (chi[k] + chi[k + 1]);
      const typename Stepper::State x_mid = stepper.forward(x, old_pulse[k], 0.5 * dt);
      delta = s * Complex(stepper.gradient_pairing(chi_mid, x_mid, Quadrature::re),
                          stepper.gradient_pairing(chi_mid, x_mid, Quadrature::im));
    }
    next[k] = old_pulse[k] + delta;
    change += std::norm(delta);
    x = stepper.forward(x, next[k], dt);
  }
  if (!all_finite(x)) throw NonFiniteError("forward sweep produced non-finite values");
  for (const auto& c : next.samples)
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) throw NonFiniteError("pulse update is not finite");
  return {std::move(next), std::move(x), std::sqrt(change * dt)};
}

template <class Stepper, class Functional>
SweepResult<Stepper> krotov_step(const Stepper& stepper, const ControlPulse& pulse,
                                 const typename Stepper::State& x0, const typename Stepper::State& x_t,
                                 const Functional& functional, const RVector& shape, double lambda) {
  auto chi = backward_all(stepper, pulse, functional.costate(x_t));
  return forward_sweep(stepper, pulse, x0, chi, shape, lambda);
}

inline bool improved(const FunctionalEvaluation& before, const FunctionalEvaluation& after) {
  const auto [a, b] = FunctionalEvaluation::common_totals(before, after);
  return b <= a;
}

template <class Stepper, class Functional, class State>
KrotovResult<State> optimize(const Stepper& stepper, const Space& space, const ControlPulse& guess,
                             const Functional& functional, const typename Stepper::State& x0,
                             const KrotovConfig& config, const std::function<void(const IterationRecord&)>& observer) {
  config.validate();
  if (functional.empty()) throw ConfigError("krotov: functional has no terms");
  const RVector shape = shape_samples(config.shape, guess.grid);

  ControlPulse pulse = guess;
  typename Stepper::State x_t = forward_final(stepper, pulse, x0);
  FunctionalEvaluation ev = functional.evaluate(x_t);
  double lambda = config.lambda_a;

  KrotovResult<State> out{pulse, State(space, x_t), ev, {}, StopReason::max_iters, 0};
  auto emit = [&](IterationRecord r) {
    if (observer) observer(r);
    out.records.push_back(std::move(r));
  };
  emit({0, ev.by_name(), ev.total, lambda, 0.0, false, 0});
  if (ev.total < config.j_tol) {
    out.stop_reason = StopReason::j_tol;
    return out;
  }

  auto chi = backward_all(stepper, pulse, functional.costate(x_t));
  for (int iter = 1; iter <= config.max_iters; ++iter) {
    int trials = 0;
    std::optional<SweepResult<Stepper>> accepted;
    FunctionalEvaluation next_ev;
    bool non_monotonic = false;
    while (true) {
      ++trials;
      auto sweep = forward_sweep(stepper, pulse, x0, chi, shape, lambda);
      next_ev = functional.evaluate(sweep.final_state);
      const bool ok = improved(ev, next_ev);
      if (ok || !config.line_search.enabled) {
        non_monotonic = !ok;
        accepted = std::move(sweep);
        break;
      }
      if (trials >= config.line_search.max_trials) break;
      lambda *= config.line_search.factor;
    }
    if (!accepted) {
      out.stop_reason = StopReason::line_search_exhausted;
      break;
    }

    const double previous = ev.total;
    pulse = std::move(accepted->pulse);
    x_t = std::move(accepted->final_state);
    ev = next_ev;
    out.iterations = iter;
    emit({iter, ev.by_name(), ev.total, lambda, accepted->change_norm, non_monotonic, trials});
    if (ev.total <= out.evaluation.total) {
      out.pulse = pulse;
      out.final_state = State(space, x_t);
      out.evaluation = ev;
    }
    if (config.line_search.enabled) lambda = std::max(lambda * config.line_search.relax, config.lambda_floor());

    if (ev.total < config.j_tol) {
      out.stop_reason = StopReason::j_tol;
      break;
    }
    if (config.dj_tol > 0.0 && std::abs(previous - ev.total) < config.dj_tol) {
      out.stop_reason = StopReason::dj_tol;
      break;
    }
    if (iter < config.max_iters) chi = backward_all(stepper, pulse, functional.costate(x_t));
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Public entry points
// ---------------------------------------------------------------------------

using Observer = std::function<void(const IterationRecord&)>;

/// One Krotov iteration at fixed lambda_a (no line search).
inline std::pair<ControlPulse, IterationRecord> krotov_iterate_pure(const LinearControlModel& model,
                                                                    const ControlPulse& pulse,
                                                                    const PureFunctional& functional,
                                                                    const StateVector& psi0,
                                                                    const KrotovConfig& config) {
  config.validate();
  detail::check_pulse(model, pulse, psi0.amplitudes().size());
  const HilbertStepper stepper(model);
  const CVector x_t = detail::forward_final(stepper, pulse, psi0.amplitudes());
  const auto before = functional.evaluate(x_t);
  auto sweep = detail::krotov_step(stepper, pulse, psi0.amplitudes(), x_t, functional,
                                   shape_samples(config.shape, pulse.grid), config.lambda_a);
  const auto after = functional.evaluate(sweep.final_state);
  IterationRecord rec{1, after.by_name(), after.total, config.lambda_a, sweep.change_norm,
                      !detail::improved(before, after), 1};
  return {std::move(sweep.pulse), std::move(rec)};
}

inline std::pair<ControlPulse, IterationRecord> krotov_iterate_dm(const LinearControlModel& model,
                                                                  const LindbladSpec& diss, const ControlPulse& pulse,
                                                                  const DensityFunctional& functional,
                                                                  const DensityMatrix& rho0,
                                                                  const KrotovConfig& config) {
  config.validate();
  detail::check_pulse(model, pulse, rho0.matrix().rows());
  const LiouvilleStepper stepper(model, diss);
  const CMatrix x_t = detail::forward_final(stepper, pulse, rho0.matrix());
  const auto before = functional.evaluate(x_t);
  auto sweep = detail::krotov_step(stepper, pulse, rho0.matrix(), x_t, functional,
                                   shape_samples(config.shape, pulse.grid), config.lambda_a);
  const auto after = functional.evaluate(sweep.final_state);
  IterationRecord rec{1, after.by_name(), after.total, config.lambda_a, sweep.change_norm,
                      !detail::improved(before, after), 1};
  return {std::move(sweep.pulse), std::move(rec)};
}

using PureResult = KrotovResult<StateVector>;
using DensityResult = KrotovResult<DensityMatrix>;

inline PureResult run_optimization(const LinearControlModel& model, const ControlPulse& guess,
                                   const PureFunctional& functional, const StateVector& psi0,
                                   const KrotovConfig& config, const Observer& observer = {}) {
  detail::check_pulse(model, guess, psi0.amplitudes().size());
  const HilbertStepper stepper(model);
  return detail::optimize<HilbertStepper, PureFunctional, StateVector>(stepper, model.space(), guess, functional,
                                                                       psi0.amplitudes(), config, observer);
}

inline DensityResult run_optimization(const LinearControlModel& model, const LindbladSpec& diss,
                                      const ControlPulse& guess, const DensityFunctional& functional,
                                      const DensityMatrix& rho0, const KrotovConfig& config,
                                      const Observer& observer = {}) {
  detail::check_pulse(model, guess, rho0.matrix().rows());
  const LiouvilleStepper stepper(model, diss);
  return detail::optimize<LiouvilleStepper, DensityFunctional, DensityMatrix>(stepper, model.space(), guess,
                                                                              functional, rho0.matrix(), config,
                                                                              observer);
}

}  // namespace catoptron
