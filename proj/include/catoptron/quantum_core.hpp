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
#include <utility>

#include "catoptron/types.hpp"

namespace catoptron {

// ---------------------------------------------------------------------------
// Value types
// ---------------------------------------------------------------------------

/// Amplitudes over a Fock or qubit (x) oscillator basis. Costates reuse this
/// type, so normalization is a property of the factories, not the type.
class StateVector {
 public:
  StateVector(Space space, CVector amplitudes) : space_(space), amps_(std::move(amplitudes)) {
    if (amps_.size() != space_.dim())
      throw DimensionError("StateVector: amplitude count " + std::to_string(amps_.size()) +
                           " does not match space dimension " + std::to_string(space_.dim()));
  }

  static StateVector basis(Space space, int index) {
    CVector v = CVector::Zero(space.dim());
    v(index) = 1.0;
    return {space, std::move(v)};
  }

  const Space& space() const noexcept { return space_; }
  const CVector& amplitudes() const noexcept { return amps_; }
  CVector& amplitudes() noexcept { return amps_; }
  double norm() const { return amps_.norm(); }
  Complex operator[](int i) const { return amps_(i); }

 private:
  Space space_;
  CVector amps_;
};

inline Complex overlap(const StateVector& bra, const StateVector& ket) {
  return bra.amplitudes().dot(ket.amplitudes());  // Eigen's dot conjugates the first argument
}

class DensityMatrix {
 public:
  DensityMatrix(Space space, CMatrix matrix) : space_(space), rho_(std::move(matrix)) {
    if (rho_.rows() != space_.dim() || rho_.cols() != space_.dim())
      throw DimensionError("DensityMatrix: matrix shape does not match space dimension");
  }

  static DensityMatrix from_pure(const StateVector& psi) {
    return {psi.space(), psi.amplitudes() * psi.amplitudes().adjoint()};
  }

  static DensityMatrix maximally_mixed(Space space) {
    return {space, CMatrix::Identity(space.dim(), space.dim()) / double(space.dim())};
  }

  const Space& space() const noexcept { return space_; }
  const CMatrix& matrix() const noexcept { return rho_; }
  CMatrix& matrix() noexcept { return rho_; }
  Complex trace() const { return rho_.trace(); }

  /// Throws NumericError unless Hermitian, unit trace and positive within
  /// the given tolerances.
  void validate(double herm_tol = 1e-12, double trace_tol = 1e-10, double eig_tol = 1e-10) const {
    const double herm = (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff();
    if (herm > herm_tol) throw NumericError("DensityMatrix: not Hermitian (" + std::to_string(herm) + ")");
    if (std::abs(rho_.trace() - 1.0) > trace_tol) throw NumericError("DensityMatrix: trace differs from 1");
    Eigen::SelfAdjointEigenSolver<CMatrix> es(rho_, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -eig_tol) throw PositivityError("DensityMatrix: negative eigenvalue");
  }

 private:
  Space space_;
  CMatrix rho_;
};

class OperatorMatrix {
 public:
  OperatorMatrix(Space space, CMatrix matrix, bool hermitian = false)
      : space_(space), m_(std::move(matrix)), hermitian_(hermitian) {
    if (m_.rows() != space_.dim() || m_.cols() != space_.dim())
      throw DimensionError("OperatorMatrix: matrix shape does not match space dimension");
  }

  const Space& space() const noexcept { return space_; }
  const CMatrix& matrix() const noexcept { return m_; }
  bool hermitian() const noexcept { return hermitian_; }

  OperatorMatrix adjoint() const { return {space_, m_.adjoint(), hermitian_}; }

  StateVector operator*(const StateVector& psi) const {
    if (!(psi.space() == space_)) throw DimensionError("OperatorMatrix: state lives on another space");
    return {space_, m_ * psi.amplitudes()};
  }
  OperatorMatrix operator*(const OperatorMatrix& o) const {
    if (!(o.space_ == space_)) throw DimensionError("OperatorMatrix: operand lives on another space");
    return {space_, m_ * o.m_};
  }

 private:
  Space space_;
  CMatrix m_;
  bool hermitian_;
};

/// alpha and the superposition phase of (|alpha> + e^{i phase}|-alpha>) / N.
struct CatStateSpec {
  Complex alpha;
  double phase = 0.0;
};

// ---------------------------------------------------------------------------
// Operators
// ---------------------------------------------------------------------------

inline OperatorMatrix annihilation_op(const FockSpace& space) {
  const int d = space.dim();
  CMatrix a = CMatrix::Zero(d, d);
  for (int n = 1; n < d; ++n) a(n - 1, n) = std::sqrt(double(n));
  return {space, std::move(a)};
}

inline OperatorMatrix creation_op(const FockSpace& space) { return annihilation_op(space).adjoint(); }

inline OperatorMatrix number_op(const FockSpace& space) {
  const int d = space.dim();
  CMatrix n = CMatrix::Zero(d, d);
  for (int k = 0; k < d; ++k) n(k, k) = double(k);
  return {space, std::move(n), true};
}

inline OperatorMatrix identity_op(const Space& space) {
  return {space, CMatrix::Identity(space.dim(), space.dim()), true};
}

namespace qubit {

// Basis |0> = ground, |1> = excited; sigma_z |1> = +|1>.
inline Eigen::Matrix2cd sigma_minus() {
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
  m(0, 1) = 1.0;
  return m;
}
inline Eigen::Matrix2cd sigma_plus() { return sigma_minus().adjoint(); }
inline Eigen::Matrix2cd sigma_x() { return sigma_plus() + sigma_minus(); }
inline Eigen::Matrix2cd sigma_y() { return I * (sigma_minus() - sigma_plus()); }
inline Eigen::Matrix2cd sigma_z() {
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
  m(0, 0) = -1.0;
  m(1, 1) = 1.0;
  return m;
}

}  // namespace qubit

namespace detail {

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace detail

/// 1 (x) op on the composite space.
inline OperatorMatrix embed_ho_op(const OperatorMatrix& op, const CompositeSpace& space) {
  if (op.space().is_composite() || !(op.space().ho() == space.ho()))
    throw DimensionError("embed_ho_op: operator does not live on the oscillator factor");
  return {space, detail::kron(CMatrix::Identity(2, 2), op.matrix()), op.hermitian()};
}

/// op (x) 1 for a 2x2 qubit operator.
inline OperatorMatrix embed_qubit_op(const Eigen::Matrix2cd& op, const CompositeSpace& space,
                                     bool hermitian = false) {
  const int n = space.ho().dim();
  return {space, detail::kron(op, CMatrix::Identity(n, n)), hermitian};
}

// ---------------------------------------------------------------------------
// Reference states
// ---------------------------------------------------------------------------

/// Exact coherent-state coefficients e^{-|a|^2/2} a^n / sqrt(n!) for n < dim,
/// without renormalization after truncation.
inline CVector coherent_coefficients(Complex alpha, int dim) {
  CVector c(dim);
  c(0) = std::exp(-0.5 * std::norm(alpha));
  for (int n = 0; n + 1 < dim; ++n) c(n + 1) = c(n) * alpha / std::sqrt(double(n + 1));
  return c;
}

/// Population in the highest `levels` Fock states of the oscillator factor.
inline double truncation_weight(const StateVector& psi, int levels = 2) {
  const int n = psi.space().ho().dim();
  const int blocks = psi.space().dim() / n;
  double w = 0.0;
  for (int b = 0; b < blocks; ++b)
    for (int k = n - levels; k < n; ++k) w += std::norm(psi[b * n + k]);
  return w;
}

inline double truncation_weight(const DensityMatrix& rho, int levels = 2) {
  const int n = rho.space().ho().dim();
  const int blocks = rho.space().dim() / n;
  double w = 0.0;
  for (int b = 0; b < blocks; ++b)
    for (int k = n - levels; k < n; ++k) w += rho.matrix()(b * n + k, b * n + k).real();
  return w;
}

inline StateVector coherent_state(Complex alpha, const FockSpace& space) {
  CVector c = coherent_coefficients(alpha, space.dim());
  if (std::norm(c(space.dim() - 1)) >= 1e-10)
    throw TruncationError("coherent_state: |alpha| = " + std::to_string(std::abs(alpha)) +
                          " is not representable in " + std::to_string(space.dim()) + " Fock levels");
  c.normalize();
  return {space, std::move(c)};
}

/// N_phi = sqrt(2 (1 + e^{-2|alpha|^2} cos phi)) of the infinite-dimensional cat.
inline double cat_normalization(Complex alpha, double phase) {
  const double x = 2.0 * std::norm(alpha);
  const double c = std::cos(phase);
  // 1 + e^{-x} cos(phase); written via expm1 so the odd cat near alpha = 0 keeps its digits.
  const double s = (1.0 + c) + c * std::expm1(-x);
  return std::sqrt(2.0 * std::max(s, 0.0));
}

inline StateVector cat_state(const CatStateSpec& spec, const FockSpace& space) {
  if (cat_normalization(spec.alpha, spec.phase) < 1e-8)
    throw DegenerateCatError("cat_state: normalization vanishes (alpha -> 0 with phase -> pi)");
  CVector plus = coherent_coefficients(spec.alpha, space.dim());
  CVector minus = coherent_coefficients(-spec.alpha, space.dim());
  if (std::norm(plus(space.dim() - 1)) >= 1e-10)
    throw TruncationError("cat_state: |alpha| too large for the Fock truncation");
  CVector c = plus + std::polar(1.0, spec.phase) * minus;
  c.normalize();
  return {space, std::move(c)};
}

inline std::pair<OperatorMatrix, OperatorMatrix> parity_projectors(const FockSpace& space) {
  const int d = space.dim();
  CMatrix even = CMatrix::Zero(d, d), odd = CMatrix::Zero(d, d);
  for (int j = 0; j < d; ++j) (j % 2 == 0 ? even : odd)(j, j) = 1.0;
  return {OperatorMatrix(space, std::move(even), true), OperatorMatrix(space, std::move(odd), true)};
}

/// Orthonormal pair of qubit states |b+>, |b->.
struct QubitBasis {
  Eigen::Vector2cd plus;
  Eigen::Vector2cd minus;

  static QubitBasis computational() {
    return {Eigen::Vector2cd(1.0, 0.0), Eigen::Vector2cd(0.0, 1.0)};
  }
  /// b+ = (cos t, e^{i p} sin t), b- = e^{i c} (-e^{-i p} sin t, cos t).
  static QubitBasis from_angles(double theta, double phi, double chi) {
    const double ct = std::cos(theta), st = std::sin(theta);
    return {Eigen::Vector2cd(ct, std::polar(st, phi)),
            std::polar(1.0, chi) * Eigen::Vector2cd(-std::polar(st, -phi), ct)};
  }
};

/// (|b+> (x) |cat+> + |b-> (x) |cat->) / sqrt(2), cat+- = even/odd cats.
inline StateVector entangled_cat_state(Complex alpha, const QubitBasis& basis, const CompositeSpace& space) {
  const Eigen::Matrix2cd u = (Eigen::Matrix2cd() << basis.plus, basis.minus).finished();
  if ((u.adjoint() * u - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() > 1e-10)
    throw NumericError("entangled_cat_state: qubit basis is not orthonormal");
  const StateVector even = cat_state({alpha, 0.0}, space.ho());
  const StateVector odd = cat_state({alpha, M_PI}, space.ho());
  const int n = space.ho().dim();
  CVector v(space.dim());
  for (int q = 0; q < 2; ++q)
    v.segment(q * n, n) = (basis.plus(q) * even.amplitudes() + basis.minus(q) * odd.amplitudes()) / std::sqrt(2.0);
  return {space, std::move(v)};
}

// ---------------------------------------------------------------------------
// Reduced states and entropies
// ---------------------------------------------------------------------------

enum class Factor { qubit, oscillator };

namespace detail {

/// Row q holds the oscillator amplitudes of qubit component q.
inline CMatrix as_qubit_by_ho(const CVector& psi, int ho_dim) {
  return Eigen::Map<const Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      psi.data(), 2, ho_dim);
}

}  // namespace detail

inline CMatrix reduced_ho(const CVector& psi, const CompositeSpace& space) {
  const CMatrix m = detail::as_qubit_by_ho(psi, space.ho().dim());
  return m.transpose() * m.conjugate();
}

inline CMatrix reduced_qubit(const CVector& psi, const CompositeSpace& space) {
  const CMatrix m = detail::as_qubit_by_ho(psi, space.ho().dim());
  return m * m.adjoint();
}

inline CMatrix reduced_ho(const CMatrix& rho, const CompositeSpace& space) {
  const int n = space.ho().dim();
  return rho.topLeftCorner(n, n) + rho.bottomRightCorner(n, n);
}

inline CMatrix reduced_qubit(const CMatrix& rho, const CompositeSpace& space) {
  const int n = space.ho().dim();
  CMatrix r(2, 2);
  for (int p = 0; p < 2; ++p)
    for (int q = 0; q < 2; ++q) r(p, q) = rho.block(p * n, q * n, n, n).trace();
  return r;
}

inline DensityMatrix partial_trace(const DensityMatrix& rho, Factor keep) {
  if (!rho.space().is_composite()) throw SpaceError("partial_trace: state is not on a composite space");
  const CompositeSpace& cs = rho.space().composite();
  if (keep == Factor::oscillator) return {cs.ho(), reduced_ho(rho.matrix(), cs)};
  // A 2-level reduced state is represented on a 2-dimensional Fock space.
  return {FockSpace(2), reduced_qubit(rho.matrix(), cs)};
}

inline double purity(const CMatrix& rho) {
  // Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho.
  return rho.cwiseAbs2().sum();
}
inline double purity(const DensityMatrix& rho) { return purity(rho.matrix()); }

inline double linear_entropy(const DensityMatrix& rho) { return 1.0 - purity(rho); }

inline constexpr double eigenvalue_floor = 1e-14;

inline double von_neumann_entropy(const CMatrix& rho) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(rho, Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (double lam : es.eigenvalues())
    if (lam > eigenvalue_floor) s -= lam * std::log(lam);
  return s;
}
inline double von_neumann_entropy(const DensityMatrix& rho) { return von_neumann_entropy(rho.matrix()); }

inline double mutual_information(const DensityMatrix& rho) {
  const CompositeSpace& cs = rho.space().composite();
  return von_neumann_entropy(reduced_ho(rho.matrix(), cs)) + von_neumann_entropy(reduced_qubit(rho.matrix(), cs)) -
         von_neumann_entropy(rho.matrix());
}

inline Complex expectation(const OperatorMatrix& op, const StateVector& psi) {
  if (!(op.space() == psi.space())) throw DimensionError("expectation: operator and state spaces differ");
  return psi.amplitudes().dot(op.matrix() * psi.amplitudes());
}

inline Complex expectation(const OperatorMatrix& op, const DensityMatrix& rho) {
  if (!(op.space() == rho.space())) throw DimensionError("expectation: operator and state spaces differ");
  return (op.matrix() * rho.matrix()).trace();
}

}  // namespace catoptron
