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
#include <string>
#include <vector>

#include "catoptron/quantum_core.hpp"

namespace catoptron {

// ---------------------------------------------------------------------------
// Time discretization and controls
// ---------------------------------------------------------------------------

/// Uniform grid t_k = k * T / n_steps, k = 0..n_steps.
class TimeGrid {
 public:
  TimeGrid(double duration, int n_steps) : duration_(duration), n_steps_(n_steps) {
    if (!(duration > 0.0) || !std::isfinite(duration)) throw ConfigError("TimeGrid: duration must be positive");
    if (n_steps < 2) throw ConfigError("TimeGrid: n_steps must be >= 2");
  }
  double duration() const noexcept { return duration_; }
  int n_steps() const noexcept { return n_steps_; }
  double dt() const noexcept { return duration_ / n_steps_; }
  double t(int k) const noexcept { return k * dt(); }
  double midpoint(int k) const noexcept { return (k + 0.5) * dt(); }
  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

 private:
  double duration_;
  int n_steps_;
};

/// Piecewise-constant complex control; samples[k] acts on [t_k, t_{k+1}).
struct ControlPulse {
  TimeGrid grid;
  std::vector<Complex> samples;

  explicit ControlPulse(TimeGrid g) : grid(g), samples(g.n_steps(), Complex{}) {}
  ControlPulse(TimeGrid g, std::vector<Complex> s) : grid(g), samples(std::move(s)) {
    if (int(samples.size()) != grid.n_steps())
      throw DimensionError("ControlPulse: sample count must equal the number of intervals");
    for (const auto& c : samples)
      if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) throw NonFiniteError("ControlPulse: non-finite sample");
  }

  int size() const noexcept { return int(samples.size()); }
  Complex operator[](int k) const { return samples[k]; }
  Complex& operator[](int k) { return samples[k]; }

  /// sqrt(sum |eps_k|^2 dt)
  double l2_norm() const {
    double s = 0.0;
    for (const auto& c : samples) s += std::norm(c);
    return std::sqrt(s * grid.dt());
  }
};

enum class Quadrature { re, im };

// ---------------------------------------------------------------------------
// Models. Every model is linear in the control:
//   H(eps) = H_0 + Re(eps) dH/dRe + Im(eps) dH/dIm.
// ---------------------------------------------------------------------------

class LinearControlModel {
 public:
  LinearControlModel(Space space, CMatrix drift, CMatrix d_re, CMatrix d_im)
      : space_(space), drift_(std::move(drift)), d_re_(std::move(d_re)), d_im_(std::move(d_im)) {
    const int d = space_.dim();
    for (const CMatrix* m : {&drift_, &d_re_, &d_im_})
      if (m->rows() != d || m->cols() != d) throw DimensionError("LinearControlModel: operator shape mismatch");
  }

  const Space& space() const noexcept { return space_; }
  int dim() const noexcept { return space_.dim(); }
  const CMatrix& drift() const noexcept { return drift_; }
  const CMatrix& derivative(Quadrature q) const noexcept { return q == Quadrature::re ? d_re_ : d_im_; }

  CMatrix hamiltonian(Complex eps) const { return drift_ + eps.real() * d_re_ + eps.imag() * d_im_; }

 private:
  Space space_;
  CMatrix drift_, d_re_, d_im_;
};

namespace detail {

inline CMatrix kerr_drift(double k, const FockSpace& s) {
  CMatrix h = CMatrix::Zero(s.dim(), s.dim());
  for (int n = 0; n < s.dim(); ++n) h(n, n) = -k * double(n) * double(n - 1);
  return h;
}

inline CMatrix jc_drift(double g, const CompositeSpace& s) {
  const CMatrix a = annihilation_op(s.ho()).matrix();
  const CMatrix sp = qubit::sigma_plus(), sm = qubit::sigma_minus();
  return g * (kron(sp, a) + kron(sm, a.adjoint()));
}

}  // namespace detail

/// H/hbar = -K a+ a+ a a + eps a^2 + eps* (a+)^2, times in units of 1/K.
class KerrModel : public LinearControlModel {
 public:
  KerrModel(double kerr, FockSpace space)
      : LinearControlModel(space, detail::kerr_drift(check(kerr), space), two_photon_re(space), two_photon_im(space)),
        kerr_(kerr) {}
  double kerr() const noexcept { return kerr_; }
  const FockSpace& fock() const noexcept { return space().ho(); }

 private:
  static double check(double k) {
    if (!(k > 0.0)) throw ConfigError("KerrModel: K must be positive");
    return k;
  }
  static CMatrix two_photon_re(const FockSpace& s) {
    const CMatrix a = annihilation_op(s).matrix();
    const CMatrix a2 = a * a;
    return a2 + a2.adjoint();
  }
  static CMatrix two_photon_im(const FockSpace& s) {
    const CMatrix a = annihilation_op(s).matrix();
    const CMatrix a2 = a * a;
    return I * (a2 - a2.adjoint());
  }

  double kerr_;
};

/// H/hbar = g (s+ (x) a + s- (x) a+) + eps* s- (x) 1 + eps s+ (x) 1, times in units of 1/g.
class JCModel : public LinearControlModel {
 public:
  JCModel(double g, CompositeSpace space)
      : LinearControlModel(space, detail::jc_drift(check(g), space),
                           embed_qubit_op(qubit::sigma_minus() + qubit::sigma_plus(), space).matrix(),
                           embed_qubit_op(I * (qubit::sigma_plus() - qubit::sigma_minus()), space).matrix()),
        g_(g) {}
  double coupling() const noexcept { return g_; }
  const CompositeSpace& composite() const { return space().composite(); }

 private:
  static double check(double g) {
    if (!(g > 0.0)) throw ConfigError("JCModel: g must be positive");
    return g;
  }

  double g_;
};

/// Driven qubit H = Re(eps) sigma_x / 2 on a 2-level space; used by the toy problems.
inline LinearControlModel two_level_model() {
  const FockSpace q(2);
  const CMatrix sx = qubit::sigma_x();
  return {q, CMatrix::Zero(2, 2), 0.5 * sx, CMatrix::Zero(2, 2)};
}

inline OperatorMatrix kerr_hamiltonian(const KerrModel& model, Complex eps) {
  return {model.space(), model.hamiltonian(eps), true};
}

inline OperatorMatrix jc_hamiltonian(const JCModel& model, Complex eps) {
  return {model.space(), model.hamiltonian(eps), true};
}

inline OperatorMatrix control_derivative(const LinearControlModel& model, Quadrature q) {
  return {model.space(), model.derivative(q), true};
}

// ---------------------------------------------------------------------------
// Jaynes-Cummings spectrum
// ---------------------------------------------------------------------------

enum class TransitionType { ground, type_i, type_ii };

inline std::string to_string(TransitionType t) {
  switch (t) {
    case TransitionType::ground: return "ground";
    case TransitionType::type_i: return "i";
    case TransitionType::type_ii: return "ii";
  }
  return "?";
}

struct Transition {
  double frequency;  // units of g, positive
  TransitionType type;
  int n;  // lower doublet index; -1 for the ground state
};

/// Doublet n is (|0>|n+1> +- |1>|n>)/sqrt(2) with energies +-g sqrt(n+1); the
/// ground state |0>|0> has energy 0. The qubit drive connects doublet n to
/// n+1, giving g (sqrt(n+2) + sqrt(n+1)) (type i) and g (sqrt(n+2) - sqrt(n+1))
/// (type ii), plus g for ground -> doublet 0.
inline std::vector<Transition> jc_transition_frequencies(const JCModel& model, int n_max) {
  (void)model;  // frequencies are reported in units of g
  std::vector<Transition> out{{1.0, TransitionType::ground, -1}};
  for (int n = 0; n < n_max; ++n) {
    const double lo = std::sqrt(double(n + 1)), hi = std::sqrt(double(n + 2));
    out.push_back({hi + lo, TransitionType::type_i, n});
    out.push_back({hi - lo, TransitionType::type_ii, n});
  }
  std::sort(out.begin(), out.end(), [](const Transition& a, const Transition& b) { return a.frequency < b.frequency; });
  return out;
}

struct DressedState {
  int n;
  int sign;  // +1 / -1
  double energy;
  StateVector state;
};

/// Diagonalizes the undriven Hamiltonian inside each two-dimensional
/// excitation block {|0>|n+1>, |1>|n>}.
inline std::vector<DressedState> jc_dressed_states(const JCModel& model, int n_max) {
  const CompositeSpace& cs = model.composite();
  if (n_max + 1 >= cs.ho().dim()) throw DimensionError("jc_dressed_states: n_max exceeds truncation");
  std::vector<DressedState> out;
  for (int n = 0; n <= n_max; ++n) {
    const int i0 = cs.index(0, n + 1), i1 = cs.index(1, n);
    Eigen::Matrix2cd block;
    block << model.drift()(i0, i0), model.drift()(i0, i1), model.drift()(i1, i0), model.drift()(i1, i1);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(block);
    for (int j = 1; j >= 0; --j) {
      CVector v = CVector::Zero(cs.dim());
      v(i0) = es.eigenvectors()(0, j);
      v(i1) = es.eigenvectors()(1, j);
      // fix the phase so the |0>|n+1> component is real positive
      v *= std::polar(1.0, -std::arg(v(i0)));
      out.push_back({n, j == 1 ? +1 : -1, es.eigenvalues()(j), StateVector(cs, std::move(v))});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Lindblad dissipator
// ---------------------------------------------------------------------------

struct LindbladSpec {
  double kappa = 0.0;
  OperatorMatrix collapse;

  LindbladSpec(double k, OperatorMatrix l) : kappa(k), collapse(std::move(l)) {
    if (!std::isfinite(kappa) || kappa < 0.0) throw ConfigError("LindbladSpec: kappa must be finite and >= 0");
  }

  /// Oscillator decay L = 1 (x) a on a composite space (or L = a on a bare oscillator).
  static LindbladSpec oscillator_decay(double kappa, const Space& space) {
    const OperatorMatrix a = annihilation_op(space.ho());
    if (space.is_composite()) return {kappa, embed_ho_op(a, space.composite())};
    return {kappa, a};
  }
};

namespace detail {

inline void check_shapes(const CMatrix& h, const LindbladSpec& diss, const CMatrix& x) {
  const auto d = h.rows();
  if (h.cols() != d || x.rows() != d || x.cols() != d || diss.collapse.matrix().rows() != d)
    throw DimensionError("Liouvillian: operand dimensions differ");
}

}  // namespace detail

/// -i[H, rho] + kappa (L rho L+ - {L+L, rho}/2)
inline CMatrix liouvillian_apply(const CMatrix& h, const LindbladSpec& diss, const CMatrix& rho) {
  detail::check_shapes(h, diss, rho);
  const CMatrix& l = diss.collapse.matrix();
  CMatrix out = -I * (h * rho - rho * h);
  if (diss.kappa > 0.0) {
    const CMatrix ldl = l.adjoint() * l;
    out += diss.kappa * (l * rho * l.adjoint() - 0.5 * (ldl * rho + rho * ldl));
  }
  return out;
}

/// Hilbert-Schmidt adjoint: +i[H, chi] + kappa (L+ chi L - {L+L, chi}/2)
inline CMatrix adjoint_liouvillian_apply(const CMatrix& h, const LindbladSpec& diss, const CMatrix& chi) {
  detail::check_shapes(h, diss, chi);
  const CMatrix& l = diss.collapse.matrix();
  CMatrix out = I * (h * chi - chi * h);
  if (diss.kappa > 0.0) {
    const CMatrix ldl = l.adjoint() * l;
    out += diss.kappa * (l.adjoint() * chi * l - 0.5 * (ldl * chi + chi * ldl));
  }
  return out;
}

inline CMatrix liouvillian_apply(const OperatorMatrix& h, const LindbladSpec& diss, const DensityMatrix& rho) {
  return liouvillian_apply(h.matrix(), diss, rho.matrix());
}

}  // namespace catoptron
