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
#include <numbers>
#include <string>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "catoptron/dynamics.hpp"
#include "catoptron/functionals.hpp"

namespace catoptron {

namespace detail {

struct SimplexResult {
  RVector x;
  double f = 0.0;
  int iterations = 0;
};

/// Derivative-free Nelder-Mead minimization. Stops when every vertex lies
/// within xtol (max-norm) of the best one, or the function spread vanishes.
template <class F>
SimplexResult nelder_mead(F&& f, const RVector& x0, const RVector& step, double xtol = 1e-10,
                          int max_iter = 4000) {
  const int n = int(x0.size());
  std::vector<RVector> x(n + 1, x0);
  std::vector<double> fx(n + 1);
  for (int i = 0; i < n; ++i) x[i + 1](i) += step(i);
  for (int i = 0; i <= n; ++i) fx[i] = f(x[i]);

  std::vector<int> order(n + 1);
  int it = 0;
  for (; it < max_iter; ++it) {
    for (int i = 0; i <= n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return fx[a] < fx[b]; });
    const int best = order.front(), worst = order.back(), second = order[n - 1];

    double size = 0.0;
    for (int i = 0; i <= n; ++i) size = std::max(size, (x[i] - x[best]).cwiseAbs().maxCoeff());
    if (size < xtol || fx[worst] - fx[best] <= 0.0) break;

    RVector centroid = RVector::Zero(n);
    for (int i = 0; i <= n; ++i)
      if (i != worst) centroid += x[i];
    centroid /= n;

    const RVector xr = centroid + (centroid - x[worst]);
    const double fr = f(xr);
    if (fr < fx[best]) {
      const RVector xe = centroid + 2.0 * (centroid - x[worst]);
      const double fe = f(xe);
      if (fe < fr) {
        x[worst] = xe, fx[worst] = fe;
      } else {
        x[worst] = xr, fx[worst] = fr;
      }
      continue;
    }
    if (fr < fx[second]) {
      x[worst] = xr, fx[worst] = fr;
      continue;
    }
    const bool outside = fr < fx[worst];
    const RVector xc = outside ? RVector(centroid + 0.5 * (xr - centroid)) : RVector(centroid + 0.5 * (x[worst] - centroid));
    const double fc = f(xc);
    if (fc < std::min(fr, fx[worst])) {
      x[worst] = xc, fx[worst] = fc;
      continue;
    }
    for (int i = 0; i <= n; ++i) {
      if (i == best) continue;
      x[i] = x[best] + 0.5 * (x[i] - x[best]);
      fx[i] = f(x[i]);
    }
  }
  const int best = int(std::min_element(fx.begin(), fx.end()) - fx.begin());
  return {x[best], fx[best], it};
}

inline CMatrix oscillator_density(const StateVector& psi) {
  if (psi.space().is_composite()) return reduced_ho(psi.amplitudes(), psi.space().composite());
  return psi.amplitudes() * psi.amplitudes().adjoint();
}

inline CMatrix oscillator_density(const DensityMatrix& rho) {
  if (rho.space().is_composite()) return reduced_ho(rho.matrix(), rho.space().composite());
  return rho.matrix();
}

inline double wrap_phase(double phi) {
  const double two_pi = 2.0 * std::numbers::pi;
  phi = std::fmod(phi, two_pi);
  return phi < 0.0 ? phi + two_pi : phi;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Wigner function
// ---------------------------------------------------------------------------

struct PhaseSpaceGrid {
  double x_min = -5.0, x_max = 5.0;
  double p_min = -5.0, p_max = 5.0;
  int n_x = 101, n_p = 101;

  void validate() const {
    if (!std::isfinite(x_min) || !std::isfinite(x_max) || !std::isfinite(p_min) || !std::isfinite(p_max) ||
        !(x_max > x_min) || !(p_max > p_min))
      throw ConfigError("PhaseSpaceGrid: ranges must be finite and nonempty");
    if (n_x < 16 || n_p < 16) throw ConfigError("PhaseSpaceGrid: at least 16 points per axis");
  }
  double x(int i) const { return x_min + (x_max - x_min) * i / (n_x - 1); }
  double p(int j) const { return p_min + (p_max - p_min) * j / (n_p - 1); }
  double dx() const { return (x_max - x_min) / (n_x - 1); }
  double dp() const { return (p_max - p_min) / (n_p - 1); }
};

struct WignerMap {
  PhaseSpaceGrid grid;
  RMatrix values;  // values(i, j) = W(x_i, p_j)
  double truncation_weight = 0.0;
  bool truncated = false;  // top Fock levels carry more than 1e-6 population
};

/// W(x,p) = (1/pi) int <x+y|rho|x-y> e^{-2ipy} dy with x = (a + a^+)/sqrt(2),
/// via the Laguerre-polynomial recurrence over the Fock basis.
inline WignerMap wigner(const CMatrix& rho, const PhaseSpaceGrid& grid) {
  grid.validate();
  const int d = int(rho.rows());
  WignerMap out{grid, RMatrix::Zero(grid.n_x, grid.n_p), 0.0, false};
  for (int k = std::max(0, d - 2); k < d; ++k) out.truncation_weight += rho(k, k).real();
  out.truncated = out.truncation_weight > 1e-6;

  std::vector<Complex> wl(d);
  for (int i = 0; i < grid.n_x; ++i) {
    for (int j = 0; j < grid.n_p; ++j) {
      const Complex a = Complex(grid.x(i), grid.p(j)) / std::sqrt(2.0);
      const Complex two_a = 2.0 * a, two_ac = 2.0 * std::conj(a);
      wl[0] = std::exp(-2.0 * std::norm(a)) / std::numbers::pi;
      double w = rho(0, 0).real() * wl[0].real();
      for (int n = 1; n < d; ++n) {
        wl[n] = two_a * wl[n - 1] / std::sqrt(double(n));
        w += 2.0 * (rho(0, n) * wl[n]).real();
      }
      for (int m = 1; m < d; ++m) {
        Complex temp = wl[m];
        const double sm = std::sqrt(double(m));
        wl[m] = (two_ac * temp - sm * wl[m - 1]) / sm;
        w += rho(m, m).real() * wl[m].real();
        for (int n = m + 1; n < d; ++n) {
          const Complex next = (two_a * wl[n - 1] - sm * temp) / std::sqrt(double(n));
          temp = wl[n];
          wl[n] = next;
          w += 2.0 * (rho(m, n) * wl[n]).real();
        }
      }
      out.values(i, j) = w;
    }
  }
  return out;
}

inline WignerMap wigner(const StateVector& psi, const PhaseSpaceGrid& grid) {
  return wigner(detail::oscillator_density(psi), grid);
}
inline WignerMap wigner(const DensityMatrix& rho, const PhaseSpaceGrid& grid) {
  return wigner(detail::oscillator_density(rho), grid);
}

// ---------------------------------------------------------------------------
// Spectra and Gabor transform. Both use the kernel e^{-i omega t}, so a pulse
// e^{+i w0 t} shows up at omega = +w0.
// ---------------------------------------------------------------------------

struct Spectrum {
  RVector omega;      // ascending angular frequencies
  RVector magnitude;  // |sum_k eps_k e^{-i omega t_k} dt|
  double bin_width() const { return omega.size() > 1 ? omega(1) - omega(0) : 0.0; }
};

/// DFT of the pulse samples (placed at interval midpoints), zero-padded to
/// `pad` times the pulse length, over negative and positive frequencies.
inline Spectrum pulse_spectrum(const ControlPulse& pulse, int pad = 1) {
  if (pad < 1) throw ConfigError("pulse_spectrum: pad must be >= 1");
  const int n = pulse.size();
  const int m = n * pad;
  const double dt = pulse.grid.dt();
  std::vector<Complex> in(m, Complex{}), out;
  std::copy(pulse.samples.begin(), pulse.samples.end(), in.begin());
  Eigen::FFT<double> fft;
  fft.fwd(out, in);
  Spectrum s{RVector(m), RVector(m)};
  const double dw = 2.0 * std::numbers::pi / (m * dt);
  const int half = m / 2;
  for (int j = 0; j < m; ++j) {
    const int k = j - half;  // frequency index in [-m/2, m/2)
    const int src = (k + m) % m;
    s.omega(j) = k * dw;
    s.magnitude(j) = std::abs(out[src]) * dt;
  }
  return s;
}

/// Width of the narrowest frequency interval holding `fraction` of the power.
inline double spectral_width(const Spectrum& s, double fraction = 0.99) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw ConfigError("spectral_width: fraction must lie in (0, 1]");
  const RVector p = s.magnitude.array().square();
  const double need = fraction * p.sum();
  if (need <= 0.0) return 0.0;
  const int m = int(p.size());
  int best_lo = 0, best_hi = m - 1;
  double acc = 0.0;
  for (int lo = 0, hi = 0; hi < m; ++hi) {
    acc += p(hi);
    while (lo < hi && acc - p(lo) >= need) acc -= p(lo++);
    if (acc >= need && hi - lo < best_hi - best_lo) best_lo = lo, best_hi = hi;
  }
  return s.omega(best_hi) - s.omega(best_lo) + s.bin_width();
}

struct GaborConfig {
  double sigma = 0.0;  // nonpositive: T / (4 sqrt(2 pi))
  int n_tau = 64;
  int n_omega = 256;
  double omega_min = 0.0, omega_max = 0.0;  // equal: full Nyquist band

  void validate() const {
    if (n_tau < 1 || n_omega < 2) throw ConfigError("GaborConfig: need n_tau >= 1 and n_omega >= 2");
    if (!std::isfinite(sigma)) throw ConfigError("GaborConfig: sigma must be finite");
  }
  double effective_sigma(const TimeGrid& g) const {
    return sigma > 0.0 ? sigma : g.duration() / (4.0 * std::sqrt(2.0 * std::numbers::pi));
  }
};

struct GaborMap {
  RVector tau, omega;
  CMatrix values;  // values(i, j) = G(tau_i, omega_j)
  double sigma = 0.0;
};

/// G(tau, omega) = sum_k w(t_k - tau) eps_k e^{-i omega t_k} dt with a
/// unit-L2 Gaussian window w(t) = (pi sigma^2)^{-1/4} e^{-t^2 / (2 sigma^2)}.
inline GaborMap gabor(const ControlPulse& pulse, const GaborConfig& cfg = {}) {
  cfg.validate();
  const TimeGrid& g = pulse.grid;
  const double sigma = cfg.effective_sigma(g);
  double w_lo = cfg.omega_min, w_hi = cfg.omega_max;
  if (!(w_hi > w_lo)) {
    w_hi = std::numbers::pi / g.dt();
    w_lo = -w_hi;
  }
  GaborMap out{RVector(cfg.n_tau), RVector(cfg.n_omega), CMatrix(cfg.n_tau, cfg.n_omega), sigma};
  for (int i = 0; i < cfg.n_tau; ++i)
    out.tau(i) = cfg.n_tau == 1 ? 0.5 * g.duration() : g.duration() * i / (cfg.n_tau - 1);
  for (int j = 0; j < cfg.n_omega; ++j) out.omega(j) = w_lo + (w_hi - w_lo) * j / (cfg.n_omega - 1);

  const int n = pulse.size();
  const double norm = std::pow(std::numbers::pi * sigma * sigma, -0.25) * g.dt();
  CMatrix kernel(n, cfg.n_omega);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < cfg.n_omega; ++j) kernel(k, j) = std::polar(1.0, -out.omega(j) * g.midpoint(k));
  CMatrix windowed(cfg.n_tau, n);
  for (int i = 0; i < cfg.n_tau; ++i)
    for (int k = 0; k < n; ++k) {
      const double u = (g.midpoint(k) - out.tau(i)) / sigma;
      windowed(i, k) = norm * std::exp(-0.5 * u * u) * pulse[k];
    }
  out.values = windowed * kernel;
  return out;
}

/// Frequency of maximal |G| at each tau.
inline RVector gabor_ridge(const GaborMap& g) {
  RVector r(g.tau.size());
  for (int i = 0; i < g.tau.size(); ++i) {
    Eigen::Index j;
    g.values.row(i).cwiseAbs().maxCoeff(&j);
    r(i) = g.omega(j);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Cat infidelities
// ---------------------------------------------------------------------------

struct CatFit {
  double infidelity = 1.0;
  CatStateSpec argmin{};
};

namespace detail {

/// |<cat(alpha, phi)|psi>| with exact truncated coherent coefficients and the
/// untruncated normalization; zero when the normalization degenerates.
class CatOverlap {
 public:
  explicit CatOverlap(const CVector& psi) : psi_(psi) {}

  /// Even/odd partial sums of <alpha|psi>.
  std::pair<Complex, Complex> parts(Complex alpha) const {
    const CVector c = coherent_coefficients(alpha, int(psi_.size()));
    Complex even{}, odd{};
    for (int n = 0; n < psi_.size(); ++n) (n % 2 == 0 ? even : odd) += std::conj(c(n)) * psi_(n);
    return {even, odd};
  }

  static double combine(std::pair<Complex, Complex> eo, Complex alpha, double phi) {
    const double nrm = cat_normalization(alpha, phi);
    if (nrm < 1e-8) return 0.0;
    const Complex e = std::polar(1.0, -phi);
    return std::abs(eo.first * (1.0 + e) + eo.second * (1.0 - e)) / nrm;
  }

  double operator()(Complex alpha, double phi) const { return combine(parts(alpha), alpha, phi); }

 private:
  const CVector& psi_;
};

inline double alpha_search_radius(const CMatrix& rho_ho) {
  double n = 0.0;
  for (int k = 0; k < rho_ho.rows(); ++k) n += k * rho_ho(k, k).real();
  return std::sqrt(std::max(n, 0.0)) + 2.0;
}

}  // namespace detail

/// min over (alpha, phi) of 1 - |<cat(alpha, phi)|psi>|: 32 x 32 x 16 grid in
/// (|alpha|, arg alpha, phi) followed by simplex refinement.
inline CatFit cat_infidelity_pure(const StateVector& psi) {
  if (psi.space().is_composite()) throw SpaceError("cat_infidelity_pure: requires a single-mode state");
  const CVector& v = psi.amplitudes();
  const detail::CatOverlap overlap(v);
  const double r_max = detail::alpha_search_radius(v * v.adjoint());
  constexpr int n_r = 32, n_arg = 32, n_phi = 16;
  const double two_pi = 2.0 * std::numbers::pi;

  double best = -1.0;
  Complex best_alpha{};
  double best_phi = 0.0;
  for (int i = 0; i < n_r; ++i) {
    const double r = r_max * (i + 1) / n_r;
    for (int j = 0; j < n_arg; ++j) {
      const Complex alpha = std::polar(r, two_pi * j / n_arg);
      const auto eo = overlap.parts(alpha);
      for (int k = 0; k < n_phi; ++k) {
        const double phi = two_pi * k / n_phi;
        const double f = detail::CatOverlap::combine(eo, alpha, phi);
        if (f > best + 1e-12) best = f, best_alpha = alpha, best_phi = phi;
      }
    }
  }

  auto objective = [&](const RVector& x) { return 1.0 - overlap(Complex(x(0), x(1)), x(2)); };
  const double h = r_max / n_r;
  const auto res = detail::nelder_mead(objective, RVector{{best_alpha.real(), best_alpha.imag(), best_phi}},
                                       RVector{{h, h, two_pi / n_phi}});
  CatFit fit;
  if (res.f < 1.0 - best) {
    fit.infidelity = std::max(res.f, 0.0);
    fit.argmin = {Complex(res.x(0), res.x(1)), detail::wrap_phase(res.x(2))};
  } else {
    fit.infidelity = std::max(1.0 - best, 0.0);
    fit.argmin = {best_alpha, best_phi};
  }
  return fit;
}

struct EntangledCatFit {
  double infidelity = 1.0;
  Complex alpha{};
  QubitBasis basis = QubitBasis::computational();
  double theta = 0.0, phi = 0.0, chi = 0.0;  // QubitBasis::from_angles parameters
};

namespace detail {

/// Even and odd cat vectors with the untruncated normalization.
inline std::pair<CVector, CVector> cat_pair(Complex alpha, int dim) {
  const CVector c = coherent_coefficients(alpha, dim);
  CVector even = CVector::Zero(dim), odd = CVector::Zero(dim);
  for (int n = 0; n < dim; ++n) (n % 2 == 0 ? even : odd)(n) = 2.0 * c(n);
  const double ne = cat_normalization(alpha, 0.0), no = cat_normalization(alpha, std::numbers::pi);
  even /= ne;
  odd = no < 1e-8 ? CVector::Zero(dim) : CVector(odd / no);
  return {even, odd};
}

/// Unitary factor of the polar decomposition.
inline Eigen::Matrix2cd polar_unitary(const Eigen::Matrix2cd& m) {
  Eigen::JacobiSVD<Eigen::Matrix2cd> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

/// Maximizes <Psi|rho|Psi> over the qubit basis for fixed alpha, where
/// Psi = (b+ (x) cat+ + b- (x) cat-) / sqrt(2). The quadratic form in the basis
/// matrix B = [b+ b-] is maximized by polar iterations, which increase a
/// convex objective monotonically; for a pure state one iteration is exact.
class EntangledOverlap {
 public:
  EntangledOverlap(const CMatrix* rho, const CVector* psi, const CompositeSpace& space)
      : rho_(rho), psi_(psi), n_(space.ho().dim()) {}

  /// 4x4 form Q over vec(B) with entries ordered (q, +), (q, -).
  Eigen::Matrix4cd form(Complex alpha) const {
    const auto [even, odd] = cat_pair(alpha, n_);
    CMatrix k = CMatrix::Zero(2 * n_, 4);
    for (int q = 0; q < 2; ++q) {
      k.block(q * n_, 2 * q, n_, 1) = even / std::sqrt(2.0);
      k.block(q * n_, 2 * q + 1, n_, 1) = odd / std::sqrt(2.0);
    }
    if (psi_) {
      const Eigen::Vector4cd w = k.adjoint() * (*psi_);
      return w * w.adjoint();
    }
    return k.adjoint() * (*rho_) * k;
  }

  static double value(const Eigen::Matrix4cd& q, const Eigen::Matrix2cd& b) {
    const Eigen::Vector4cd v = vec(b);
    return std::max(v.dot(q * v).real(), 0.0);
  }

  static std::pair<double, Eigen::Matrix2cd> maximize(const Eigen::Matrix4cd& q) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(q);
    Eigen::Matrix2cd b = polar_unitary(unvec(es.eigenvectors().col(3)));
    double f = value(q, b);
    for (int it = 0; it < 50; ++it) {
      const Eigen::Matrix2cd nb = polar_unitary(unvec(q * vec(b)));
      const double nf = value(q, nb);
      if (!(nf > f + 1e-15)) break;
      b = nb, f = nf;
    }
    return {f, b};
  }

  static Eigen::Vector4cd vec(const Eigen::Matrix2cd& b) { return {b(0, 0), b(0, 1), b(1, 0), b(1, 1)}; }
  static Eigen::Matrix2cd unvec(const Eigen::Vector4cd& v) {
    return (Eigen::Matrix2cd() << v(0), v(1), v(2), v(3)).finished();
  }

 private:
  const CMatrix* rho_;
  const CVector* psi_;
  int n_;
};

inline EntangledCatFit entangled_fit(const EntangledOverlap& ov, const CMatrix& rho_ho) {
  const double r_max = alpha_search_radius(rho_ho);
  constexpr int n_r = 32, n_arg = 32;
  const double two_pi = 2.0 * std::numbers::pi;
  double best = -1.0;
  Complex best_alpha{};
  for (int i = 0; i < n_r; ++i) {
    const double r = r_max * (i + 1) / n_r;
    for (int j = 0; j < n_arg; ++j) {
      const Complex alpha = std::polar(r, two_pi * j / n_arg);
      const double f = EntangledOverlap::maximize(ov.form(alpha)).first;
      if (f > best + 1e-12) best = f, best_alpha = alpha;
    }
  }
  auto objective = [&](const RVector& x) {
    return 1.0 - std::sqrt(EntangledOverlap::maximize(ov.form(Complex(x(0), x(1)))).first);
  };
  const double h = r_max / n_r;
  const auto res =
      nelder_mead(objective, RVector{{best_alpha.real(), best_alpha.imag()}}, RVector{{h, h}});
  const Complex alpha = res.f < 1.0 - std::sqrt(best) ? Complex(res.x(0), res.x(1)) : best_alpha;
  auto [f, b] = EntangledOverlap::maximize(ov.form(alpha));

  // Fix the global phase so that b+ has a real, nonnegative first component.
  const double g = std::arg(b(0, 0));
  if (std::abs(b(0, 0)) > 1e-12) b *= std::polar(1.0, -g);
  EntangledCatFit fit;
  fit.infidelity = std::max(1.0 - std::sqrt(f), 0.0);
  fit.alpha = alpha;
  fit.basis = {b.col(0), b.col(1)};
  fit.theta = std::atan2(std::abs(b(1, 0)), std::abs(b(0, 0)));
  fit.phi = wrap_phase(std::arg(b(1, 0)));
  fit.chi = wrap_phase(std::abs(b(1, 1)) > 1e-6 ? std::arg(b(1, 1)) : std::arg(-b(0, 1)) + fit.phi);
  return fit;
}

}  // namespace detail

/// min over the entangled-cat family of 1 - sqrt(<Psi|rho|Psi>).
inline EntangledCatFit cat_infidelity_entangled(const StateVector& psi) {
  const CompositeSpace& cs = psi.space().composite();
  const detail::EntangledOverlap ov(nullptr, &psi.amplitudes(), cs);
  return detail::entangled_fit(ov, reduced_ho(psi.amplitudes(), cs));
}

inline EntangledCatFit cat_infidelity_entangled(const DensityMatrix& rho) {
  const CompositeSpace& cs = rho.space().composite();
  const detail::EntangledOverlap ov(&rho.matrix(), nullptr, cs);
  return detail::entangled_fit(ov, reduced_ho(rho.matrix(), cs));
}

// ---------------------------------------------------------------------------
// Scalar diagnostics
// ---------------------------------------------------------------------------

inline double radius_error(const StateVector& psi, RadiusTarget tgt) {
  return std::abs(alpha_estimate(psi) - tgt.alpha_abs);
}
inline double radius_error(const DensityMatrix& rho, RadiusTarget tgt) {
  return std::abs(alpha_estimate(rho) - tgt.alpha_abs);
}

/// Deviation of the joint purity from 1, i.e. the linear entropy.
inline double purity_error(const DensityMatrix& rho) { return 1.0 - purity(rho); }

struct BlochVector {
  double x = 0.0, y = 0.0, z = 0.0;
  double length() const { return std::sqrt(x * x + y * y + z * z); }
};

inline BlochVector bloch_coords(const CMatrix& rho_qubit) {
  if (rho_qubit.rows() != 2 || rho_qubit.cols() != 2) throw DimensionError("bloch_coords: expects a 2x2 matrix");
  const Eigen::Matrix2cd r = rho_qubit;
  return {(qubit::sigma_x() * r).trace().real(), (qubit::sigma_y() * r).trace().real(),
          (qubit::sigma_z() * r).trace().real()};
}

inline BlochVector bloch_coords(const DensityMatrix& rho_qubit) { return bloch_coords(rho_qubit.matrix()); }

// ---------------------------------------------------------------------------
// Observables along a trajectory
// ---------------------------------------------------------------------------

struct Table {
  std::vector<std::string> columns;
  RMatrix data;  // one row per time point
};

/// Supported names: n, sigma_z, bloch_x, bloch_y, bloch_z, mutual_information,
/// purity, purity_ho, linear_entropy, alpha.
inline const std::vector<std::string>& known_observables() {
  static const std::vector<std::string> names{"n",       "sigma_z",   "bloch_x",        "bloch_y",
                                              "bloch_z", "mutual_information", "purity", "purity_ho",
                                              "linear_entropy", "alpha"};
  return names;
}

namespace detail {

inline double observable(const std::string& name, const CMatrix& rho, const Space& space) {
  const bool comp = space.is_composite();
  auto rho_ho = [&] { return comp ? reduced_ho(rho, space.composite()) : rho; };
  auto rho_q = [&]() -> CMatrix {
    if (!comp) throw SpaceError("observable '" + name + "' requires a qubit (x) oscillator state");
    return reduced_qubit(rho, space.composite());
  };
  if (name == "n") {
    const CMatrix r = rho_ho();
    double n = 0.0;
    for (int k = 0; k < r.rows(); ++k) n += k * r(k, k).real();
    return n;
  }
  if (name == "sigma_z" || name == "bloch_z") return bloch_coords(rho_q()).z;
  if (name == "bloch_x") return bloch_coords(rho_q()).x;
  if (name == "bloch_y") return bloch_coords(rho_q()).y;
  if (name == "mutual_information") return mutual_information(DensityMatrix(space, rho));
  if (name == "purity") return purity(rho);
  if (name == "purity_ho") return purity(rho_ho());
  if (name == "linear_entropy") return 1.0 - purity(rho);
  if (name == "alpha") return alpha_estimate(DensityMatrix(space, rho));
  throw ConfigError("unknown observable '" + name + "'");
}

}  // namespace detail

inline Table observables_timeseries(const DensityTrajectory& traj, const std::vector<std::string>& which) {
  if (!traj.stored()) throw ConfigError("observables_timeseries: trajectory was propagated without storage");
  Table t;
  t.columns.push_back("t");
  t.columns.insert(t.columns.end(), which.begin(), which.end());
  t.data.resize(Eigen::Index(traj.snapshots.size()), Eigen::Index(which.size() + 1));
  for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
    const DensityMatrix& rho = traj.snapshots[k];
    t.data(Eigen::Index(k), 0) = traj.grid.t(int(k));
    for (std::size_t c = 0; c < which.size(); ++c)
      t.data(Eigen::Index(k), Eigen::Index(c + 1)) = detail::observable(which[c], rho.matrix(), rho.space());
  }
  return t;
}

inline Table observables_timeseries(const StateTrajectory& traj, const std::vector<std::string>& which) {
  if (!traj.stored()) throw ConfigError("observables_timeseries: trajectory was propagated without storage");
  DensityTrajectory d{traj.grid, {}, traj.max_truncation_weight};
  d.snapshots.reserve(traj.snapshots.size());
  for (const auto& s : traj.snapshots) d.snapshots.push_back(DensityMatrix::from_pure(s));
  return observables_timeseries(d, which);
}

}  // namespace catoptron
