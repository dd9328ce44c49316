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

// File formats. Complex numbers are [re, im] pairs in JSON; every double is
// written with 17 significant digits so files round-trip exactly.

#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "catoptron/analysis.hpp"
#include "catoptron/krotov.hpp"

namespace catoptron::io {

using json = nlohmann::json;
namespace fs = std::filesystem;

inline std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// ---------------------------------------------------------------------------
// JSON encodings
// ---------------------------------------------------------------------------

inline json to_json(Complex c) { return json::array({c.real(), c.imag()}); }

inline Complex complex_from_json(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2) throw ConfigError("expected a complex number as [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline json to_json(const Space& s) {
  return {{"kind", s.is_composite() ? "qubit_oscillator" : "oscillator"}, {"ho_dim", s.ho().dim()}};
}

inline Space space_from_json(const json& j) {
  const FockSpace ho(j.at("ho_dim").get<int>());
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "oscillator") return ho;
  if (kind == "qubit_oscillator") return CompositeSpace(ho);
  throw ConfigError("unknown space kind '" + kind + "'");
}

inline json to_json(const CVector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(to_json(v(i)));
  return a;
}

inline CVector vector_from_json(const json& j) {
  CVector v(Eigen::Index(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(Eigen::Index(i)) = complex_from_json(j[i]);
  return v;
}

inline json to_json(const CMatrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(to_json(CVector(m.row(r).transpose())));
  return rows;
}

inline CMatrix matrix_from_json(const json& j) {
  const auto n = Eigen::Index(j.size());
  CMatrix m(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    if (j[r].size() != std::size_t(n)) throw ConfigError("matrix must be square");
    for (Eigen::Index c = 0; c < n; ++c) m(r, c) = complex_from_json(j[r][c]);
  }
  return m;
}

inline json to_json(const StateVector& s) {
  return {{"type", "state_vector"}, {"space", to_json(s.space())}, {"amplitudes", to_json(s.amplitudes())}};
}

inline json to_json(const DensityMatrix& r) {
  return {{"type", "density_matrix"}, {"space", to_json(r.space())}, {"matrix", to_json(r.matrix())}};
}

inline json to_json(const OperatorMatrix& o) {
  return {{"type", "operator"}, {"space", to_json(o.space())}, {"hermitian", o.hermitian()},
          {"matrix", to_json(o.matrix())}};
}

/// A loaded state file: exactly one of the two is set.
struct LoadedState {
  std::optional<StateVector> pure;
  std::optional<DensityMatrix> mixed;
  const Space& space() const { return pure ? pure->space() : mixed->space(); }
};

inline LoadedState state_from_json(const json& j) {
  try {
    const Space space = space_from_json(j.at("space"));
    const std::string type = j.at("type").get<std::string>();
    if (type == "state_vector") return {StateVector(space, vector_from_json(j.at("amplitudes"))), std::nullopt};
    if (type == "density_matrix") return {std::nullopt, DensityMatrix(space, matrix_from_json(j.at("matrix")))};
    throw ConfigError("unknown state type '" + type + "'");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed state JSON: ") + e.what());
  } catch (const DimensionError& e) {
    throw ConfigError(std::string("malformed state JSON: ") + e.what());
  }
}

inline json to_json(const IterationRecord& r) {
  return {{"iter", r.iter},
          {"terms", r.terms},
          {"J_total", r.J_total},
          {"lambda_used", r.lambda_used},
          {"pulse_change_norm", r.pulse_change_norm},
          {"non_monotonic", r.non_monotonic},
          {"trials", r.trials}};
}

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

inline void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

inline std::ofstream open_out(const fs::path& p) {
  ensure_parent(p);
  std::ofstream f(p);
  if (!f) throw ConfigError("cannot write '" + p.string() + "'");
  f.precision(17);
  return f;
}

inline void write_json(const fs::path& p, const json& j) {
  auto f = open_out(p);
  f << j.dump(2) << '\n';
}

inline json read_json(const fs::path& p) {
  std::ifstream f(p);
  if (!f) throw ConfigError("cannot read '" + p.string() + "'");
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    throw ConfigError("'" + p.string() + "' is not valid JSON: " + e.what());
  }
}

inline LoadedState read_state(const fs::path& p) { return state_from_json(read_json(p)); }

inline fs::path sidecar_path(const fs::path& csv) {
  fs::path s = csv;
  return s.replace_extension(".json");
}

/// CSV `t,re,im` with t the interval midpoint, plus a JSON sidecar holding
/// the grid and the time unit.
inline void write_pulse(const fs::path& csv, const ControlPulse& p, const std::string& time_unit) {
  auto f = open_out(csv);
  f << "t,re,im\n";
  for (int k = 0; k < p.size(); ++k)
    f << fmt(p.grid.midpoint(k)) << ',' << fmt(p[k].real()) << ',' << fmt(p[k].imag()) << '\n';
  write_json(sidecar_path(csv), {{"duration", p.grid.duration()},
                                 {"n_steps", p.grid.n_steps()},
                                 {"time_unit", time_unit},
                                 {"sample_time", "interval midpoint"},
                                 {"columns", {"t", "re", "im"}}});
}

inline std::vector<std::vector<double>> read_csv_numbers(const fs::path& p, std::string* header = nullptr) {
  std::ifstream f(p);
  if (!f) throw ConfigError("cannot read '" + p.string() + "'");
  std::string line;
  if (!std::getline(f, line)) throw ConfigError("'" + p.string() + "' is empty");
  if (header) *header = line;
  std::vector<std::vector<double>> rows;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ConfigError("'" + p.string() + "': cannot parse '" + cell + "' as a number");
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline ControlPulse read_pulse(const fs::path& csv) {
  const json meta = read_json(sidecar_path(csv));
  const TimeGrid grid(meta.at("duration").get<double>(), meta.at("n_steps").get<int>());
  const auto rows = read_csv_numbers(csv);
  if (int(rows.size()) != grid.n_steps())
    throw ConfigError("'" + csv.string() + "': row count does not match the sidecar n_steps");
  std::vector<Complex> s;
  s.reserve(rows.size());
  for (const auto& r : rows) {
    if (r.size() != 3) throw ConfigError("'" + csv.string() + "': expected columns t,re,im");
    s.emplace_back(r[1], r[2]);
  }
  return {grid, std::move(s)};
}

/// `iter,J_total,<term>...,lambda`
inline void write_iterations(const fs::path& csv, const std::vector<IterationRecord>& records) {
  auto f = open_out(csv);
  std::vector<std::string> names;
  if (!records.empty())
    for (const auto& [k, v] : records.front().terms) names.push_back(k);
  f << "iter,J_total";
  for (const auto& n : names) f << ",J_" << n;
  f << ",lambda\n";
  for (const auto& r : records) {
    f << r.iter << ',' << fmt(r.J_total);
    for (const auto& n : names) {
      auto it = r.terms.find(n);
      f << ',' << (it == r.terms.end() ? std::string("nan") : fmt(it->second));
    }
    f << ',' << fmt(r.lambda_used) << '\n';
  }
}

inline void write_table(const fs::path& csv, const Table& t) {
  auto f = open_out(csv);
  for (std::size_t c = 0; c < t.columns.size(); ++c) f << (c ? "," : "") << t.columns[c];
  f << '\n';
  for (Eigen::Index r = 0; r < t.data.rows(); ++r) {
    for (Eigen::Index c = 0; c < t.data.cols(); ++c) f << (c ? "," : "") << fmt(t.data(r, c));
    f << '\n';
  }
}

/// Matrix CSV (row i = x_i, column j = p_j) plus a JSON file with the axes.
inline void write_wigner(const fs::path& csv, const WignerMap& w) {
  auto f = open_out(csv);
  for (Eigen::Index i = 0; i < w.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < w.values.cols(); ++j) f << (j ? "," : "") << fmt(w.values(i, j));
    f << '\n';
  }
  json x = json::array(), p = json::array();
  for (int i = 0; i < w.grid.n_x; ++i) x.push_back(w.grid.x(i));
  for (int j = 0; j < w.grid.n_p; ++j) p.push_back(w.grid.p(j));
  write_json(sidecar_path(csv),
             {{"rows", "x"},
              {"cols", "p"},
              {"x", x},
              {"p", p},
              {"convention", "W(x,p) = (1/pi) int <x+y|rho|x-y> exp(-2ipy) dy, x = (a + a^+)/sqrt(2), hbar = 1"},
              {"truncation_weight", w.truncation_weight},
              {"truncated", w.truncated}});
}

inline void write_spectrum(const fs::path& csv, const Spectrum& s) {
  auto f = open_out(csv);
  f << "omega,magnitude\n";
  for (Eigen::Index j = 0; j < s.omega.size(); ++j) f << fmt(s.omega(j)) << ',' << fmt(s.magnitude(j)) << '\n';
}

inline void write_gabor(const fs::path& csv, const GaborMap& g) {
  auto f = open_out(csv);
  f << "tau,omega,re,im,abs\n";
  for (Eigen::Index i = 0; i < g.tau.size(); ++i)
    for (Eigen::Index j = 0; j < g.omega.size(); ++j) {
      const Complex v = g.values(i, j);
      f << fmt(g.tau(i)) << ',' << fmt(g.omega(j)) << ',' << fmt(v.real()) << ',' << fmt(v.imag()) << ','
        << fmt(std::abs(v)) << '\n';
    }
}

}  // namespace catoptron::io
