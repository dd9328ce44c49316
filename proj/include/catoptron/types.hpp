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

#include <complex>
#include <stdexcept>
#include <string>
#include <variant>

#include <Eigen/Dense>

namespace catoptron {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

inline constexpr Complex I{0.0, 1.0};

// ---------------------------------------------------------------------------
// Errors. Everything derives from Error so callers can catch the family;
// the CLI maps ConfigError to exit code 2 and NumericError to exit code 3.
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct NumericError : Error {
  using Error::Error;
};

struct DimensionError : NumericError {
  using NumericError::NumericError;
};

struct SpaceError : NumericError {
  using NumericError::NumericError;
};

struct TruncationError : NumericError {
  using NumericError::NumericError;
};

struct DegenerateCatError : NumericError {
  using NumericError::NumericError;
};

struct DegenerateDenominator : NumericError {
  using NumericError::NumericError;
};

struct NonFiniteError : NumericError {
  using NumericError::NumericError;
};

struct PositivityError : NumericError {
  using NumericError::NumericError;
};

// ---------------------------------------------------------------------------
// Hilbert spaces
// ---------------------------------------------------------------------------

/// Truncated oscillator space spanned by |0>, ..., |dim-1>.
class FockSpace {
 public:
  explicit FockSpace(int dim) : dim_(dim) {
    if (dim < 2) throw DimensionError("FockSpace: dim must be >= 2, got " + std::to_string(dim));
  }
  int dim() const noexcept { return dim_; }
  friend bool operator==(const FockSpace&, const FockSpace&) = default;

 private:
  int dim_;
};

/// Qubit (x) oscillator. The qubit is always the first tensor factor, so the
/// basis index of |q> (x) |n> is q * ho.dim() + n.
class CompositeSpace {
 public:
  static constexpr int qubit_dim = 2;

  explicit CompositeSpace(FockSpace ho) : ho_(ho) {}
  const FockSpace& ho() const noexcept { return ho_; }
  int dim() const noexcept { return qubit_dim * ho_.dim(); }
  int index(int qubit, int n) const noexcept { return qubit * ho_.dim() + n; }
  friend bool operator==(const CompositeSpace&, const CompositeSpace&) = default;

 private:
  FockSpace ho_;
};

/// Either a bare oscillator or a qubit (x) oscillator space.
class Space {
 public:
  Space(FockSpace s) : v_(s) {}        // NOLINT(google-explicit-constructor)
  Space(CompositeSpace s) : v_(s) {}   // NOLINT(google-explicit-constructor)

  bool is_composite() const noexcept { return std::holds_alternative<CompositeSpace>(v_); }
  int dim() const noexcept {
    return std::visit([](const auto& s) { return s.dim(); }, v_);
  }
  /// Oscillator factor; for a bare FockSpace this is the space itself.
  const FockSpace& ho() const noexcept {
    if (auto c = std::get_if<CompositeSpace>(&v_)) return c->ho();
    return std::get<FockSpace>(v_);
  }
  const CompositeSpace& composite() const {
    if (auto c = std::get_if<CompositeSpace>(&v_)) return *c;
    throw SpaceError("operation requires a qubit (x) oscillator space");
  }
  friend bool operator==(const Space&, const Space&) = default;

 private:
  std::variant<FockSpace, CompositeSpace> v_;
};

}  // namespace catoptron
