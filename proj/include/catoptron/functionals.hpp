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

// Final-time cost terms and their costates.
//
// Costate conventions. For a pure state the costate is the Wirtinger
// derivative chi = -dJ/d<psi| of J as written (no implicit normalization),
// so dJ = -2 Re <chi|d psi>. For a density matrix the costate is
// chi = -G/2, where G is the Hermitian Hilbert-Schmidt gradient
// (dJ = Re Tr(G^+ d rho)). With this scaling the density-matrix update
// Re <chi, dL rho> coincides with the pure-state update Im <chi|dH|psi>
// on pure states.

#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "catoptron/quantum_core.hpp"

namespace catoptron {

/// Below this, <B^+B> or |<a^2>| is treated as zero.
inline constexpr double denominator_floor = 1e-10;

namespace detail {

/// a on a Fock space, 1 (x) a on a composite space.
inline CMatrix lowering(const Space& space) {
  const OperatorMatrix a = annihilation_op(space.ho());
  if (space.is_composite()) return embed_ho_op(a, space.composite()).matrix();
  return a.matrix();
}

inline void require_composite(const Space& s, const char* who) {
  if (!s.is_composite()) throw SpaceError(std::string(who) + ": requires a qubit (x) oscillator state");
}

inline void require_fock(const Space& s, const char* who) {
  if (s.is_composite()) throw SpaceError(std::string(who) + ": requires a single-mode state");
}

inline CMatrix hermitian_part(const CMatrix& m) { return 0.5 * (m + m.adjoint()); }

}  // namespace detail

// ---------------------------------------------------------------------------
// Coherent-state (variance) terms
// ---------------------------------------------------------------------------

/// <B^+B> - |<B>|^2 and its costate, for a fixed operator B (usually a^2).
class VarianceTerm {
 public:
  VarianceTerm(Space space, CMatrix b) : space_(space), b_(std::move(b)), bd_(b_.adjoint()) {}

  /// B = a^2 (Fock) or (1 (x) a)^2 (composite).
  static VarianceTerm two_photon(const Space& space) {
    const CMatrix a = detail::lowering(space);
    return {space, a * a};
  }

  const CMatrix& op() const noexcept { return b_; }

  double value(const CVector& psi) const {
    const CVector bpsi = b_ * psi;
    return bpsi.squaredNorm() - std::norm(psi.dot(bpsi));
  }
  CVector costate(const CVector& psi) const {
    const CVector bpsi = b_ * psi, bdpsi = bd_ * psi;
    const Complex z = psi.dot(bpsi);
    return -(bd_ * bpsi - std::conj(z) * bpsi - z * bdpsi);
  }

  /// 1 - |<B>|^2 / <B^+B>; equals 1 with a zero costate when <B^+B> vanishes.
  double normalized_value(const CVector& psi) const {
    const CVector bpsi = b_ * psi;
    const double w = bpsi.squaredNorm();
    if (w < denominator_floor) return 1.0;
    return 1.0 - std::norm(psi.dot(bpsi)) / w;
  }
  CVector normalized_costate(const CVector& psi) const {
    const CVector bpsi = b_ * psi;
    const double w = bpsi.squaredNorm();
    if (w < denominator_floor) return CVector::Zero(psi.size());
    const CVector bdpsi = bd_ * psi;
    const Complex z = psi.dot(bpsi);
    return (std::conj(z) * bpsi + z * bdpsi) / w - (std::norm(z) / (w * w)) * (bd_ * bpsi);
  }

  // Density-matrix form: 1 - |Tr(B rho)|^2 / Tr(B^+B rho).
  double normalized_value(const CMatrix& rho) const {
    const double w = (bd_ * b_ * rho).trace().real();
    if (w < denominator_floor) return 1.0;
    return 1.0 - std::norm((b_ * rho).trace()) / w;
  }
  CMatrix normalized_costate(const CMatrix& rho) const {
    const CMatrix bdb = bd_ * b_;
    const double w = (bdb * rho).trace().real();
    if (w < denominator_floor) return CMatrix::Zero(rho.rows(), rho.cols());
    const Complex z = (b_ * rho).trace();
    return 0.5 * ((z * bd_ + std::conj(z) * b_) / w - (std::norm(z) / (w * w)) * bdb);
  }

 private:
  Space space_;
  CMatrix b_, bd_;
};

inline double j_cs_variance(const StateVector& psi) {
  detail::require_fock(psi.space(), "j_cs_variance");
  return VarianceTerm::two_photon(psi.space()).value(psi.amplitudes());
}

inline double j_cs_normalized(const StateVector& psi) {
  detail::require_fock(psi.space(), "j_cs_normalized");
  return VarianceTerm::two_photon(psi.space()).normalized_value(psi.amplitudes());
}

inline double j_cs_bipartite(const StateVector& psi) {
  detail::require_composite(psi.space(), "j_cs_bipartite");
  return VarianceTerm::two_photon(psi.space()).value(psi.amplitudes());
}

inline double j_cs_bipartite_normalized(const StateVector& psi) {
  detail::require_composite(psi.space(), "j_cs_bipartite_normalized");
  return VarianceTerm::two_photon(psi.space()).normalized_value(psi.amplitudes());
}

inline double j_cs_dm(const DensityMatrix& rho) {
  detail::require_composite(rho.space(), "j_cs_dm");
  return VarianceTerm::two_photon(rho.space()).normalized_value(rho.matrix());
}

// ---------------------------------------------------------------------------
// Cat terms
// ---------------------------------------------------------------------------

enum class Parity { even, odd };

/// 1 - <psi|Pi|psi>^2
class ParityTerm {
 public:
  ParityTerm(const FockSpace& space, Parity parity) {
    auto [even, odd] = parity_projectors(space);
    proj_ = (parity == Parity::even ? even : odd).matrix().diagonal().real();
  }
  double value(const CVector& psi) const {
    const double p = expectation(psi);
    return 1.0 - p * p;
  }
  CVector costate(const CVector& psi) const {
    return (2.0 * expectation(psi)) * proj_.cast<Complex>().cwiseProduct(psi);
  }

 private:
  double expectation(const CVector& psi) const { return proj_.dot(psi.cwiseAbs2()); }
  RVector proj_;
};

inline double j_cat_parity(const StateVector& psi, Parity parity) {
  detail::require_fock(psi.space(), "j_cat_parity");
  return ParityTerm(psi.space().ho(), parity).value(psi.amplitudes());
}

/// Phase-free cat term 4 [Re(<a>/abar)]^2 with abar = sqrt(<a^2>), evaluated in
/// the branch-free form 2 Re(<a>^2/<a^2>) + 2 |<a>|^2 / |<a^2>|.
class PhaseTerm {
 public:
  explicit PhaseTerm(const FockSpace& space)
      : a_(annihilation_op(space).matrix()), ad_(a_.adjoint()), a2_(a_ * a_), a2d_(a2_.adjoint()) {}

  double value(const CVector& psi) const {
    const auto [u, s] = moments(psi);
    return 2.0 * (u * u / s).real() + 2.0 * std::norm(u) / std::abs(s);
  }

  CVector costate(const CVector& psi) const {
    const auto [u, s] = moments(psi);
    const CVector apsi = a_ * psi, adpsi = ad_ * psi, a2psi = a2_ * psi, a2dpsi = a2d_ * psi;
    const Complex uc = std::conj(u), sc = std::conj(s);
    const double abs_s = std::abs(s);
    const CVector d1 = (2.0 * u / s) * apsi - (u * u / (s * s)) * a2psi + (2.0 * uc / sc) * adpsi -
                       (uc * uc / (sc * sc)) * a2dpsi;
    const CVector d2 = (2.0 / abs_s) * (uc * apsi + u * adpsi) -
                       (std::norm(u) / (abs_s * abs_s * abs_s)) * (sc * a2psi + s * a2dpsi);
    return -(d1 + d2);
  }

 private:
  std::pair<Complex, Complex> moments(const CVector& psi) const {
    const Complex u = psi.dot(a_ * psi);
    const Complex s = psi.dot(a2_ * psi);
    if (std::abs(s) < denominator_floor)
      throw DegenerateDenominator("j_cat_phase: |<a^2>| below " + std::to_string(denominator_floor));
    return {u, s};
  }

  CMatrix a_, ad_, a2_, a2d_;
};

inline double j_cat_phase(const StateVector& psi) {
  detail::require_fock(psi.space(), "j_cat_phase");
  return PhaseTerm(psi.space().ho()).value(psi.amplitudes());
}

/// 2 Tr(rho_HO^2) - 1 for a pure bipartite state; costate -4 (1 (x) rho_HO) Psi.
class PurityTerm {
 public:
  explicit PurityTerm(const CompositeSpace& space) : space_(space) {}

  double value(const CVector& psi) const { return 2.0 * purity(reduced_ho(psi, space_)) - 1.0; }

  CVector costate(const CVector& psi) const {
    const CMatrix rho_ho = reduced_ho(psi, space_);
    const int n = space_.ho().dim();
    CVector chi(psi.size());
    for (int q = 0; q < 2; ++q) chi.segment(q * n, n) = -4.0 * (rho_ho * psi.segment(q * n, n));
    return chi;
  }

 private:
  CompositeSpace space_;
};

inline double j_cat_purity(const StateVector& psi) {
  detail::require_composite(psi.space(), "j_cat_purity");
  return PurityTerm(psi.space().composite()).value(psi.amplitudes());
}

/// P(rho_HO) + P(rho_qubit) - P(rho)
class MutualPurityTerm {
 public:
  explicit MutualPurityTerm(const CompositeSpace& space) : space_(space) {}

  double value(const CMatrix& rho) const {
    return purity(reduced_ho(rho, space_)) + purity(reduced_qubit(rho, space_)) - purity(rho);
  }

  CMatrix costate(const CMatrix& rho) const {
    const int n = space_.ho().dim();
    const CMatrix rho_ho = reduced_ho(rho, space_);
    const CMatrix rho_q = reduced_qubit(rho, space_);
    CMatrix chi = detail::hermitian_part(rho);
    for (int p = 0; p < 2; ++p) {
      chi.block(p * n, p * n, n, n) -= rho_ho;
      for (int q = 0; q < 2; ++q) chi.block(p * n, q * n, n, n).diagonal().array() -= rho_q(p, q);
    }
    return chi;
  }

 private:
  CompositeSpace space_;
};

inline double j_cat_mutualinfo_dm(const DensityMatrix& rho) {
  detail::require_composite(rho.space(), "j_cat_mutualinfo_dm");
  return MutualPurityTerm(rho.space().composite()).value(rho.matrix());
}

// ---------------------------------------------------------------------------
// State-to-state and projector terms
// ---------------------------------------------------------------------------

/// 1 - |<psi|target>|; costate (<t|psi>/|<t|psi>|) t / 2.
class OverlapTerm {
 public:
  explicit OverlapTerm(CVector target) : t_(std::move(target)) {}

  double value(const CVector& psi) const { return 1.0 - std::abs(t_.dot(psi)); }
  CVector costate(const CVector& psi) const {
    const Complex z = t_.dot(psi);
    const Complex phase = std::abs(z) < 1e-12 ? Complex(1.0) : z / std::abs(z);
    return (0.5 * phase) * t_;
  }

  double value(const CMatrix& rho) const { return 1.0 - std::sqrt(std::max(fidelity_sq(rho), 0.0)); }
  CMatrix costate(const CMatrix& rho) const {
    const double f = std::max(std::sqrt(std::max(fidelity_sq(rho), 0.0)), 1e-12);
    return (t_ * t_.adjoint()) / (4.0 * f);
  }

 private:
  double fidelity_sq(const CMatrix& rho) const { return t_.dot(rho * t_).real(); }
  CVector t_;
};

inline double j_ss(const StateVector& psi, const StateVector& target) {
  if (!(psi.space() == target.space())) throw DimensionError("j_ss: state and target spaces differ");
  return OverlapTerm(target.amplitudes()).value(psi.amplitudes());
}

/// 1 - <P> for a Hermitian P (typically a projector).
class ProjectorTerm {
 public:
  explicit ProjectorTerm(CMatrix p) : p_(std::move(p)) {}
  double value(const CVector& psi) const { return 1.0 - psi.dot(p_ * psi).real(); }
  CVector costate(const CVector& psi) const { return p_ * psi; }
  double value(const CMatrix& rho) const { return 1.0 - (p_ * rho).trace().real(); }
  CMatrix costate(const CMatrix&) const { return 0.5 * p_; }

 private:
  CMatrix p_;
};

// ---------------------------------------------------------------------------
// Cat radius
// ---------------------------------------------------------------------------

struct RadiusTarget {
  double alpha_abs;

  explicit RadiusTarget(double a) : alpha_abs(a) {
    if (!(a > 0.0)) throw ConfigError("RadiusTarget: |alpha_tgt| must be positive");
  }
};

/// |alpha| = Tr[(A^+)^2 A^2 rho]^{1/4}, fed through
/// f = (|a|^4 - t^4)^2 / t^8 + (|a| - t)^2 / t^2.
class RadiusTerm {
 public:
  RadiusTerm(const Space& space, RadiusTarget target) : tgt_(target.alpha_abs) {
    const CMatrix a = detail::lowering(space);
    const CMatrix a2 = a * a;
    n2_ = a2.adjoint() * a2;
  }

  static double estimate_from_moment(double w) { return std::pow(std::max(w, 0.0), 0.25); }

  static double cost(double r, double t) {
    const double t4 = t * t * t * t;
    const double d4 = r * r * r * r - t4;
    return d4 * d4 / (t4 * t4) + (r - t) * (r - t) / (t * t);
  }

  double moment(const CVector& psi) const { return psi.dot(n2_ * psi).real(); }
  double moment(const CMatrix& rho) const { return (n2_ * rho).trace().real(); }

  double value(const CVector& psi) const { return cost(estimate_from_moment(moment(psi)), tgt_); }
  double value(const CMatrix& rho) const { return cost(estimate_from_moment(moment(rho)), tgt_); }

  CVector costate(const CVector& psi) const { return -slope(moment(psi)) * (n2_ * psi); }
  CMatrix costate(const CMatrix& rho) const { return (-0.5 * slope(moment(rho))) * n2_; }

 private:
  /// df/dw with w = |alpha|^4; |alpha| is floored in the 1/|alpha|^3 factor.
  double slope(double w) const {
    const double t = tgt_, t2 = t * t, t4 = t2 * t2;
    const double r = estimate_from_moment(w);
    const double rf = std::max(r, std::pow(denominator_floor, 0.25));
    return 2.0 * (r * r * r * r - t4) / (t4 * t4) + (r - t) / (2.0 * t2 * rf * rf * rf);
  }

  double tgt_;
  CMatrix n2_;
};

inline double alpha_estimate(const StateVector& psi) {
  const CMatrix a = detail::lowering(psi.space());
  return RadiusTerm::estimate_from_moment((a * a * psi.amplitudes()).squaredNorm());
}

inline double alpha_estimate(const DensityMatrix& rho) {
  const CMatrix a = detail::lowering(rho.space());
  const CMatrix a2 = a * a;
  return RadiusTerm::estimate_from_moment((a2.adjoint() * a2 * rho.matrix()).trace().real());
}

inline double j_alpha(const StateVector& psi, RadiusTarget tgt) {
  return RadiusTerm::cost(alpha_estimate(psi), tgt.alpha_abs);
}

inline double j_alpha(const DensityMatrix& rho, RadiusTarget tgt) {
  return RadiusTerm::cost(alpha_estimate(rho), tgt.alpha_abs);
}

// ---------------------------------------------------------------------------
// Terms and composites
// ---------------------------------------------------------------------------

template <class State>
struct CostateOf;
template <>
struct CostateOf<StateVector> {
  using type = CVector;
  static const CVector& raw(const StateVector& s) { return s.amplitudes(); }
};
template <>
struct CostateOf<DensityMatrix> {
  using type = CMatrix;
  static const CMatrix& raw(const DensityMatrix& s) { return s.matrix(); }
};

enum class StateKind { pure, density };

template <class State>
struct FunctionalTerm {
  using Costate = typename CostateOf<State>::type;
  using Raw = Costate;  // raw amplitudes / matrix of the state

  std::string name;
  double weight = 1.0;
  std::function<double(const Raw&)> value;
  std::function<Costate(const Raw&)> costate;

  static constexpr StateKind kind = std::is_same_v<State, StateVector> ? StateKind::pure : StateKind::density;

  /// Wraps any object exposing value(raw) and costate(raw).
  template <class Impl>
  static FunctionalTerm from(std::string name, Impl impl, double weight = 1.0) {
    if (!(weight > 0.0)) throw ConfigError("functional term '" + name + "': weight must be positive");
    auto shared = std::make_shared<const Impl>(std::move(impl));
    return {std::move(name), weight, [shared](const Raw& x) { return shared->value(x); },
            [shared](const Raw& x) -> Costate { return shared->costate(x); }};
  }
};

using PureTerm = FunctionalTerm<StateVector>;
using DensityTerm = FunctionalTerm<DensityMatrix>;

struct TermValue {
  std::string name;
  double weight;
  double value;  // NaN when inactive
  bool active;
};

struct FunctionalEvaluation {
  std::vector<TermValue> terms;
  double total = 0.0;  // sum of weight * value over active terms

  /// Total over the terms active in both evaluations.
  static std::pair<double, double> common_totals(const FunctionalEvaluation& a, const FunctionalEvaluation& b) {
    double ta = 0.0, tb = 0.0;
    for (std::size_t i = 0; i < a.terms.size() && i < b.terms.size(); ++i) {
      if (a.terms[i].active && b.terms[i].active) {
        ta += a.terms[i].weight * a.terms[i].value;
        tb += b.terms[i].weight * b.terms[i].value;
      }
    }
    return {ta, tb};
  }

  std::map<std::string, double> by_name() const {
    std::map<std::string, double> m;
    for (const auto& t : terms) m[t.name] = t.value;
    return m;
  }
};

/// Weighted sum of terms sharing one state kind. A term whose evaluation
/// raises DegenerateDenominator is inactive for that state: it contributes
/// neither value nor costate.
template <class State>
class CompositeFunctional {
 public:
  using Term = FunctionalTerm<State>;
  using Costate = typename Term::Costate;
  using Raw = typename Term::Raw;

  CompositeFunctional() = default;
  explicit CompositeFunctional(std::vector<Term> terms) : terms_(std::move(terms)) {}

  CompositeFunctional& add(Term t) {
    terms_.push_back(std::move(t));
    return *this;
  }
  const std::vector<Term>& terms() const noexcept { return terms_; }
  bool empty() const noexcept { return terms_.empty(); }

  FunctionalEvaluation evaluate(const Raw& x) const {
    FunctionalEvaluation ev;
    for (const auto& t : terms_) {
      try {
        const double v = t.value(x);
        ev.terms.push_back({t.name, t.weight, v, true});
        ev.total += t.weight * v;
      } catch (const DegenerateDenominator&) {
        ev.terms.push_back({t.name, t.weight, std::numeric_limits<double>::quiet_NaN(), false});
      }
    }
    return ev;
  }
  FunctionalEvaluation evaluate(const State& s) const { return evaluate(CostateOf<State>::raw(s)); }

  Costate costate(const Raw& x) const {
    Costate chi;
    for (const auto& t : terms_) {
      try {
        Costate c = t.costate(x);
        if (chi.size() == 0)
          chi = t.weight * c;
        else
          chi += t.weight * c;
      } catch (const DegenerateDenominator&) {
      }
    }
    if (chi.size() == 0) {
      if constexpr (std::is_same_v<Costate, CVector>)
        chi = CVector::Zero(x.size());
      else
        chi = CMatrix::Zero(x.rows(), x.cols());
    }
    return chi;
  }
  Costate costate(const State& s) const { return costate(CostateOf<State>::raw(s)); }

 private:
  std::vector<Term> terms_;
};

using PureFunctional = CompositeFunctional<StateVector>;
using DensityFunctional = CompositeFunctional<DensityMatrix>;

// ---------------------------------------------------------------------------
// Named term factories (config and CLI use these names)
// ---------------------------------------------------------------------------

struct TermParameters {
  Parity parity = Parity::even;
  double alpha_tgt = 1.0;
  CVector target;  // state-to-state target amplitudes
  CMatrix projector;
};

inline PureTerm make_pure_term(const std::string& name, const Space& space, const TermParameters& p,
                               double weight = 1.0) {
  if (name == "cs") {
    detail::require_fock(space, "cs");
    struct Impl {
      VarianceTerm v;
      double value(const CVector& x) const { return v.normalized_value(x); }
      CVector costate(const CVector& x) const { return v.normalized_costate(x); }
    };
    return PureTerm::from(name, Impl{VarianceTerm::two_photon(space)}, weight);
  }
  if (name == "cs_variance" || name == "cs_bipartite_variance") {
    if (name == "cs_bipartite_variance") detail::require_composite(space, "cs_bipartite_variance");
    return PureTerm::from(name, VarianceTerm::two_photon(space), weight);
  }
  if (name == "cs_bipartite") {
    detail::require_composite(space, "cs_bipartite");
    struct Impl {
      VarianceTerm v;
      double value(const CVector& x) const { return v.normalized_value(x); }
      CVector costate(const CVector& x) const { return v.normalized_costate(x); }
    };
    return PureTerm::from(name, Impl{VarianceTerm::two_photon(space)}, weight);
  }
  if (name == "cat_parity") {
    detail::require_fock(space, "cat_parity");
    return PureTerm::from(name, ParityTerm(space.ho(), p.parity), weight);
  }
  if (name == "cat_phase") {
    detail::require_fock(space, "cat_phase");
    return PureTerm::from(name, PhaseTerm(space.ho()), weight);
  }
  if (name == "cat_purity") {
    detail::require_composite(space, "cat_purity");
    return PureTerm::from(name, PurityTerm(space.composite()), weight);
  }
  if (name == "alpha") return PureTerm::from(name, RadiusTerm(space, RadiusTarget(p.alpha_tgt)), weight);
  if (name == "ss") {
    if (p.target.size() != space.dim()) throw ConfigError("ss: target state dimension mismatch");
    return PureTerm::from(name, OverlapTerm(p.target), weight);
  }
  if (name == "projector") {
    if (p.projector.rows() != space.dim()) throw ConfigError("projector: dimension mismatch");
    return PureTerm::from(name, ProjectorTerm(p.projector), weight);
  }
  throw ConfigError("unknown pure-state functional term '" + name + "'");
}

inline DensityTerm make_density_term(const std::string& name, const Space& space, const TermParameters& p,
                                     double weight = 1.0) {
  if (name == "cs_dm") {
    detail::require_composite(space, "cs_dm");
    struct Impl {
      VarianceTerm v;
      double value(const CMatrix& x) const { return v.normalized_value(x); }
      CMatrix costate(const CMatrix& x) const { return v.normalized_costate(x); }
    };
    return DensityTerm::from(name, Impl{VarianceTerm::two_photon(space)}, weight);
  }
  if (name == "cat_mutualinfo_dm") {
    detail::require_composite(space, "cat_mutualinfo_dm");
    return DensityTerm::from(name, MutualPurityTerm(space.composite()), weight);
  }
  if (name == "alpha_dm" || name == "alpha")
    return DensityTerm::from("alpha_dm", RadiusTerm(space, RadiusTarget(p.alpha_tgt)), weight);
  if (name == "ss_dm") {
    if (p.target.size() != space.dim()) throw ConfigError("ss_dm: target state dimension mismatch");
    return DensityTerm::from(name, OverlapTerm(p.target), weight);
  }
  if (name == "projector_dm") {
    if (p.projector.rows() != space.dim()) throw ConfigError("projector_dm: dimension mismatch");
    return DensityTerm::from(name, ProjectorTerm(p.projector), weight);
  }
  throw ConfigError("unknown density-matrix functional term '" + name + "'");
}

}  // namespace catoptron
