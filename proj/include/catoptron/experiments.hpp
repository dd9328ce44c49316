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

// Config-driven experiments. Every command takes a JSON config that is merged
// over the command's defaults; the merged ("effective") config is what runs
// and what gets embedded in the report.

#pragma once

#include <exception>
#include <functional>
#include <mutex>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "catoptron/analysis.hpp"
#include "catoptron/io.hpp"
#include "catoptron/krotov.hpp"

#ifndef CATOPTRON_VERSION
#define CATOPTRON_VERSION "0.1.0"
#endif

namespace catoptron::experiments {

using io::json;
namespace fs = std::filesystem;

inline const char* version() { return CATOPTRON_VERSION; }

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> c{"kerr-compare", "jc-optimize", "qsl-scan", "dissipative-reoptimize",
                                          "propagate", "analyze"};
  return c;
}

struct Context {
  fs::path out_dir;  // empty: nothing is written
  int workers = 1;
  std::function<void(const std::string&)> log;

  void say(const std::string& msg) const {
    if (log) log(msg);
  }
  bool writes() const { return !out_dir.empty(); }
};

// ---------------------------------------------------------------------------
// Defaults and config merging
// ---------------------------------------------------------------------------

namespace detail {

inline json krotov_defaults(double lambda, int iters) {
  return {{"lambda_a", lambda},
          {"flank_fraction", 0.1},
          {"max_iters", iters},
          {"j_tol", 0.0},
          {"dj_tol", 0.0},
          {"lambda_min", 0.0},
          {"line_search", {{"enabled", true}, {"factor", 2.0}, {"max_trials", 12}, {"relax", 0.5}}}};
}

inline json guess_defaults(double amplitude, double modulation) {
  return {{"amplitude", {amplitude, 0.0}}, {"modulation", modulation}, {"modes", 4}};
}

inline json jc_terms() {
  return json::array({{{"name", "cs_bipartite"}, {"weight", 1.0}},
                      {{"name", "cat_purity"}, {"weight", 1.0}},
                      {{"name", "alpha"}, {"weight", 1.0}}});
}

inline json wigner_defaults() { return {{"x_range", {-5.0, 5.0}}, {"p_range", {-5.0, 5.0}}, {"n", 101}}; }

inline json gabor_defaults() {
  return {{"sigma", 0.0}, {"n_tau", 64}, {"n_omega", 256}, {"omega_range", {-6.0, 6.0}}};
}

inline const std::vector<std::string>& default_observables() {
  static const std::vector<std::string> o{"n",       "sigma_z", "bloch_x",        "bloch_y",
                                          "bloch_z", "purity",  "linear_entropy", "mutual_information"};
  return o;
}

}  // namespace detail

/// Complete defaults for a command; doubles as the schema of accepted keys.
inline json default_config(const std::string& experiment) {
  using namespace detail;
  json c = {{"experiment", experiment}, {"seed", 0}, {"output_dir", "out/" + experiment}, {"workers", 1}};
  if (experiment == "kerr-compare") {
    c["model"] = {{"kind", "kerr"}, {"kerr", 1.0}, {"dim", 20}};
    c["grid"] = {{"duration", 3.0}, {"duration_unit", "model"}, {"n_steps", 300}};
    c["initial_state"] = "kerr_superposition";
    c["krotov"] = krotov_defaults(50.0, 600);
    c["guess"] = guess_defaults(1.0, 0.0);
    c["cat_functional"] = {{"terms", json::array({{{"name", "cs"}, {"weight", 1.0}},
                                                  {{"name", "cat_phase"}, {"weight", 1.0}}})}};
    c["state_to_state"] = {{"target_alpha", {1.5, 0.0}}, {"target_phase", 0.0}};
    c["analysis"] = {{"wigner", wigner_defaults()}, {"spectrum_pad", 8}, {"spectral_fraction", 0.99}};
  } else if (experiment == "jc-optimize") {
    c["model"] = {{"kind", "jc"}, {"g", 1.0}, {"dim", 30}};
    c["grid"] = {{"duration", 2.4}, {"duration_unit", "pi"}, {"n_steps", 400}};
    c["initial_state"] = "ground";
    c["krotov"] = krotov_defaults(10.0, 500);
    c["guess"] = guess_defaults(0.5, 0.0);
    c["functional"] = {{"alpha_tgt", 1.0}, {"terms", jc_terms()}};
    c["analysis"] = {{"wigner", wigner_defaults()},      {"spectrum_pad", 8}, {"gabor", gabor_defaults()},
                     {"transition_levels", 12},           {"peak_threshold", 0.1}};
  } else if (experiment == "qsl-scan") {
    c["model"] = {{"kind", "jc"}, {"g", 1.0}, {"dim", 20}};
    c["grid"] = {{"steps_per_unit_time", 48.0}, {"min_steps", 60}};
    c["initial_state"] = "ground";
    c["krotov"] = krotov_defaults(10.0, 300);
    c["guess"] = guess_defaults(0.5, 0.0);
    c["functional"] = {{"terms", jc_terms()}};
    c["sweep"] = {{"durations", {0.25, 0.5, 0.75, 1.0, 1.5, 2.0}},
                  {"duration_unit", "pi"},
                  {"alpha_targets", {1.0, 1.5}},
                  {"free_mode", false},
                  {"tolerance", 0.05}};
  } else if (experiment == "dissipative-reoptimize") {
    c["model"] = {{"kind", "jc"}, {"g", 1.0}, {"dim", 20}};
    c["grid"] = {{"duration", "auto"}, {"duration_unit", "pi"}, {"n_steps", "auto"}};
    c["initial_state"] = "ground";
    c["alpha_tgt"] = 1.5;
    c["coherent"] = {{"pulse", ""}, {"krotov", krotov_defaults(10.0, 1000)}, {"guess", guess_defaults(0.5, 0.5)},
                     {"terms", jc_terms()}};
    c["krotov"] = krotov_defaults(10.0, 20);
    c["functional"] = {{"terms", json::array({{{"name", "cs_dm"}, {"weight", 1.0}},
                                              {{"name", "cat_mutualinfo_dm"}, {"weight", 1.0}},
                                              {{"name", "alpha_dm"}, {"weight", 1.0}}})}};
    c["sweep"] = {{"kappa_times_tqsl", {0.01, 0.03, 0.1, 0.3}}, {"t_qsl", 1.0}, {"t_qsl_unit", "pi"}};
    c["observables"] = default_observables();
  } else if (experiment == "propagate") {
    c["model"] = {{"kind", "jc"}, {"g", 1.0}, {"kerr", 1.0}, {"dim", 20}, {"kappa", 0.0}};
    c["pulse"] = "";
    c["initial_state"] = "ground";
    c["store_trajectory"] = true;
    c["observables"] = json::array();
    c["alpha_tgt"] = 0.0;
  } else if (experiment == "analyze") {
    c["state"] = "";
    c["pulse"] = "";
    c["alpha_tgt"] = 0.0;
    c["analysis"] = {{"wigner", wigner_defaults()}, {"spectrum_pad", 8}, {"spectral_fraction", 0.99},
                     {"gabor", gabor_defaults()}};
  } else {
    throw ConfigError("unknown experiment '" + experiment + "'");
  }
  return c;
}

namespace detail {

inline void merge_into(json& base, const json& user, const std::string& where) {
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string key = where.empty() ? it.key() : where + "." + it.key();
    if (!base.contains(it.key())) throw ConfigError("unknown config key '" + key + "'");
    json& slot = base[it.key()];
    if (slot.is_object() && it.value().is_object())
      merge_into(slot, it.value(), key);
    else if (slot.is_object() != it.value().is_object())
      throw ConfigError("config key '" + key + "' has the wrong type");
    else
      slot = it.value();
  }
}

}  // namespace detail

/// Merges a user config over the defaults of its experiment. Unknown keys are
/// rejected so that typos cannot silently fall back to defaults.
inline json effective_config(const json& user, const std::string& command = "",
                             std::optional<std::uint64_t> seed = std::nullopt) {
  if (!user.is_object()) throw ConfigError("config must be a JSON object");
  std::string exp = command;
  if (user.contains("experiment")) {
    const std::string named = user.at("experiment").get<std::string>();
    if (!exp.empty() && named != exp)
      throw ConfigError("config is for '" + named + "' but the command is '" + exp + "'");
    exp = named;
  }
  if (exp.empty()) throw ConfigError("config does not name an experiment");
  json c = default_config(exp);
  detail::merge_into(c, user, "");
  if (seed) c["seed"] = *seed;
  return c;
}

// ---------------------------------------------------------------------------
// Typed views of config blocks
// ---------------------------------------------------------------------------

namespace detail {

template <class T>
T get(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

inline KrotovConfig krotov_from(const json& k) {
  KrotovConfig c;
  c.lambda_a = get<double>(k, "lambda_a");
  c.shape.flank_fraction = get<double>(k, "flank_fraction");
  c.max_iters = get<int>(k, "max_iters");
  c.j_tol = get<double>(k, "j_tol");
  c.dj_tol = get<double>(k, "dj_tol");
  c.lambda_min = get<double>(k, "lambda_min");
  const json& ls = k.at("line_search");
  c.line_search.enabled = get<bool>(ls, "enabled");
  c.line_search.factor = get<double>(ls, "factor");
  c.line_search.max_trials = get<int>(ls, "max_trials");
  c.line_search.relax = get<double>(ls, "relax");
  c.validate();
  return c;
}

inline GuessSpec guess_from(const json& g, std::uint64_t seed) {
  GuessSpec s;
  s.amplitude = io::complex_from_json(g.at("amplitude"));
  s.modulation = get<double>(g, "modulation");
  s.modes = get<int>(g, "modes");
  if (s.modes < 1) throw ConfigError("guess.modes must be >= 1");
  s.seed = seed;
  return s;
}

inline double time_scale(const std::string& unit) {
  if (unit == "model") return 1.0;
  if (unit == "pi") return std::numbers::pi;
  throw ConfigError("duration unit must be 'model' or 'pi', got '" + unit + "'");
}

/// Dissipative runs default to the durations used for the coherent reference
/// pulses: 2.4, 3.5 and 5 (pi/g) for |alpha_tgt| = 1, 1.5 and 2, with 150
/// steps per pi/g.
inline TimeGrid dissipative_grid_from(const json& g, double alpha_tgt) {
  double duration;
  if (g.at("duration").is_string()) {
    if (g.at("duration") != "auto") throw ConfigError("grid.duration must be a number or 'auto'");
    if (std::abs(alpha_tgt - 1.0) < 1e-12) duration = 2.4;
    else if (std::abs(alpha_tgt - 1.5) < 1e-12) duration = 3.5;
    else if (std::abs(alpha_tgt - 2.0) < 1e-12) duration = 5.0;
    else throw ConfigError("grid.duration 'auto' is only defined for alpha_tgt in {1, 1.5, 2}");
    if (g.at("duration_unit") != "pi") throw ConfigError("grid.duration 'auto' requires duration_unit 'pi'");
  } else {
    duration = get<double>(g, "duration");
  }
  duration *= time_scale(get<std::string>(g, "duration_unit"));
  int n;
  if (g.at("n_steps").is_string()) {
    if (g.at("n_steps") != "auto") throw ConfigError("grid.n_steps must be an integer or 'auto'");
    n = int(std::lround(150.0 * duration / std::numbers::pi));
  } else {
    n = get<int>(g, "n_steps");
  }
  return {duration, n};
}

inline TimeGrid grid_from(const json& g) {
  return {get<double>(g, "duration") * time_scale(get<std::string>(g, "duration_unit")), get<int>(g, "n_steps")};
}

using AnyModel = std::variant<KerrModel, JCModel>;

inline AnyModel model_from(const json& m) {
  const std::string kind = get<std::string>(m, "kind");
  const int dim = get<int>(m, "dim");
  if (dim < 2) throw ConfigError("model.dim must be >= 2");
  if (kind == "kerr") return KerrModel(get<double>(m, "kerr"), FockSpace(dim));
  if (kind == "jc") return JCModel(get<double>(m, "g"), CompositeSpace(FockSpace(dim)));
  throw ConfigError("model.kind must be 'kerr' or 'jc', got '" + kind + "'");
}

inline const LinearControlModel& base(const AnyModel& m) {
  return std::visit([](const auto& x) -> const LinearControlModel& { return x; }, m);
}

inline std::string time_unit(const AnyModel& m) { return std::holds_alternative<KerrModel>(m) ? "1/K" : "1/g"; }

inline StateVector initial_state_from(const json& spec, const Space& space) {
  const std::string s = spec.get<std::string>();
  if (s == "ground") return StateVector::basis(space, 0);
  if (s == "kerr_superposition") {
    if (space.is_composite()) throw ConfigError("initial_state 'kerr_superposition' needs a single-mode model");
    CVector v = CVector::Zero(space.dim());
    v(0) = v(1) = 1.0 / std::sqrt(2.0);
    return {space, v};
  }
  auto loaded = io::read_state(s);
  if (!loaded.pure) throw ConfigError("initial state file '" + s + "' must hold a state vector");
  if (!(loaded.pure->space() == space)) throw ConfigError("initial state file '" + s + "' has the wrong space");
  return *loaded.pure;
}

inline TermParameters term_params(double alpha_tgt) {
  TermParameters p;
  if (alpha_tgt > 0.0) p.alpha_tgt = alpha_tgt;
  return p;
}

inline PureFunctional pure_functional(const json& terms, const Space& space, const TermParameters& p) {
  PureFunctional f;
  for (const auto& t : terms) f.add(make_pure_term(get<std::string>(t, "name"), space, p, get<double>(t, "weight")));
  if (f.empty()) throw ConfigError("functional needs at least one term");
  return f;
}

inline DensityFunctional density_functional(const json& terms, const Space& space, const TermParameters& p) {
  DensityFunctional f;
  for (const auto& t : terms)
    f.add(make_density_term(get<std::string>(t, "name"), space, p, get<double>(t, "weight")));
  if (f.empty()) throw ConfigError("functional needs at least one term");
  return f;
}

inline PhaseSpaceGrid wigner_grid_from(const json& w) {
  PhaseSpaceGrid g;
  const auto xr = get<std::vector<double>>(w, "x_range"), pr = get<std::vector<double>>(w, "p_range");
  if (xr.size() != 2 || pr.size() != 2) throw ConfigError("wigner ranges must be [min, max]");
  g.x_min = xr[0], g.x_max = xr[1], g.p_min = pr[0], g.p_max = pr[1];
  g.n_x = g.n_p = get<int>(w, "n");
  g.validate();
  return g;
}

inline GaborConfig gabor_from(const json& g) {
  GaborConfig c;
  c.sigma = get<double>(g, "sigma");
  c.n_tau = get<int>(g, "n_tau");
  c.n_omega = get<int>(g, "n_omega");
  const auto r = get<std::vector<double>>(g, "omega_range");
  if (r.size() != 2) throw ConfigError("gabor.omega_range must be [min, max]");
  c.omega_min = r[0], c.omega_max = r[1];
  c.validate();
  return c;
}

/// Runs jobs 0..n-1 on up to `workers` threads. Results are indexed by job, so
/// the outcome does not depend on scheduling; the first failure (by index) is
/// rethrown.
inline void run_jobs(int n, int workers, const std::function<void(int)>& job) {
  if (workers < 1) throw ConfigError("workers must be >= 1");
  std::vector<std::exception_ptr> errors(n);
  if (workers == 1 || n <= 1) {
    for (int i = 0; i < n; ++i) {
      try {
        job(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::mutex m;
    int next = 0;
    auto worker = [&] {
      while (true) {
        int i;
        {
          std::lock_guard<std::mutex> lock(m);
          if (next >= n) return;
          i = next++;
        }
        try {
          job(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < std::min(workers, n); ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

inline Observer progress(const Context& ctx, const std::string& label, int every = 50) {
  if (!ctx.log) return {};
  return [&ctx, label, every](const IterationRecord& r) {
    if (r.iter % every == 0) ctx.say(label + " iter " + std::to_string(r.iter) + " J=" + io::fmt(r.J_total));
  };
}

template <class Result>
json run_summary(const Result& r) {
  json records = json::array();
  for (const auto& rec : r.records) records.push_back(io::to_json(rec));
  return {{"iterations", r.iterations},
          {"stop_reason", to_string(r.stop_reason)},
          {"J_final", r.evaluation.total},
          {"J_terms", r.evaluation.by_name()},
          {"records", records}};
}

template <class Result>
void write_run(const fs::path& dir, const Result& r, const std::string& time_unit) {
  io::write_pulse(dir / "pulse.csv", r.pulse, time_unit);
  io::write_iterations(dir / "iterations.csv", r.records);
  io::write_json(dir / "final_state.json", io::to_json(r.final_state));
}

inline json cat_fit_json(const CatFit& f) {
  return {{"infidelity", f.infidelity}, {"alpha", io::to_json(f.argmin.alpha)}, {"phase", f.argmin.phase}};
}

inline json entangled_fit_json(const EntangledCatFit& f) {
  return {{"infidelity", f.infidelity},
          {"alpha", io::to_json(f.alpha)},
          {"basis_plus", io::to_json(CVector(f.basis.plus))},
          {"basis_minus", io::to_json(CVector(f.basis.minus))},
          {"theta", f.theta},
          {"phi", f.phi},
          {"chi", f.chi}};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// kerr-compare
// ---------------------------------------------------------------------------

struct KerrRun {
  PureResult run;
  CatFit fit;
  double spectral_width = 0.0;  // in units of K
};

struct KerrCompareResult {
  KerrRun cat, state_to_state;
  json report;
};

inline KerrCompareResult cmd_kerr_compare(const json& cfg, const Context& ctx = {}) {
  using namespace detail;
  const auto model_any = model_from(cfg.at("model"));
  const auto* kerr = std::get_if<KerrModel>(&model_any);
  if (!kerr) throw ConfigError("kerr-compare needs model.kind = 'kerr'");
  const Space& space = kerr->space();
  const TimeGrid grid = grid_from(cfg.at("grid"));
  const KrotovConfig kc = krotov_from(cfg.at("krotov"));
  const StateVector psi0 = initial_state_from(cfg.at("initial_state"), space);
  const ControlPulse guess = guess_pulse(guess_from(cfg.at("guess"), cfg.at("seed").get<std::uint64_t>()), kc.shape, grid);

  PureFunctional cat_f = pure_functional(cfg.at("cat_functional").at("terms"), space, {});
  const json& ss = cfg.at("state_to_state");
  TermParameters ssp;
  ssp.target = cat_state({io::complex_from_json(ss.at("target_alpha")), get<double>(ss, "target_phase")}, space.ho())
                   .amplitudes();
  PureFunctional ss_f;
  ss_f.add(make_pure_term("ss", space, ssp));

  const json& an = cfg.at("analysis");
  const int pad = get<int>(an, "spectrum_pad");
  const double frac = get<double>(an, "spectral_fraction");

  const PureFunctional* functionals[] = {&cat_f, &ss_f};
  const char* names[] = {"cat", "state_to_state"};
  std::optional<KerrRun> runs[2];
  run_jobs(2, ctx.workers, [&](int i) {
    auto run = run_optimization(*kerr, guess, *functionals[i], psi0, kc, progress(ctx, names[i]));
    const CatFit fit = cat_infidelity_pure(run.final_state);
    const double width = spectral_width(pulse_spectrum(run.pulse, pad), frac) / kerr->kerr();
    runs[i] = KerrRun{std::move(run), fit, width};
  });
  KerrCompareResult out{std::move(*runs[0]), std::move(*runs[1]), {}};
  const KerrRun* jobs[] = {&out.cat, &out.state_to_state};

  json report = {{"version", version()}, {"config", cfg}};
  for (int i = 0; i < 2; ++i) {
    const KerrRun& r = *jobs[i];
    report[names[i]] = {{"cat_fit", cat_fit_json(r.fit)},
                        {"spectral_width_K", r.spectral_width},
                        {"max_truncation_weight", truncation_weight(r.run.final_state)},
                        {"optimization", run_summary(r.run)}};
  }
  if (ctx.writes()) {
    const PhaseSpaceGrid wg = wigner_grid_from(an.at("wigner"));
    for (int i = 0; i < 2; ++i) {
      const KerrRun& r = *jobs[i];
      const fs::path dir = ctx.out_dir / names[i];
      write_run(dir, r.run, "1/K");
      io::write_wigner(dir / "wigner.csv", wigner(r.run.final_state, wg));
      io::write_spectrum(dir / "spectrum.csv", pulse_spectrum(r.run.pulse, pad));
    }
    io::write_json(ctx.out_dir / "report.json", report);
  }
  out.report = std::move(report);
  return out;
}

// ---------------------------------------------------------------------------
// jc-optimize
// ---------------------------------------------------------------------------

struct SpectralPeak {
  double omega = 0.0;
  double magnitude = 0.0;
  Transition nearest{};
  double distance = 0.0;
};

/// Local maxima of the spectrum above threshold * max, each matched by |omega|
/// to the closest dressed-state transition.
inline std::vector<SpectralPeak> spectral_peaks(const Spectrum& s, const std::vector<Transition>& transitions,
                                                double threshold) {
  std::vector<SpectralPeak> peaks;
  const double top = s.magnitude.maxCoeff();
  for (Eigen::Index j = 1; j + 1 < s.omega.size(); ++j) {
    const double m = s.magnitude(j);
    if (m < threshold * top || m < s.magnitude(j - 1) || m <= s.magnitude(j + 1)) continue;
    SpectralPeak p{s.omega(j), m, transitions.front(), std::numeric_limits<double>::infinity()};
    for (const auto& t : transitions) {
      const double d = std::abs(std::abs(p.omega) - t.frequency);
      if (d < p.distance) p.distance = d, p.nearest = t;
    }
    peaks.push_back(p);
  }
  return peaks;
}

struct JcOptimizeResult {
  PureResult run;
  EntangledCatFit fit;
  Spectrum spectrum;
  std::vector<SpectralPeak> peaks;
  double dft_bin = 0.0;  // 2 pi / T
  RVector ridge;
  json report;
};

inline JcOptimizeResult cmd_jc_optimize(const json& cfg, const Context& ctx = {}) {
  using namespace detail;
  const auto model_any = model_from(cfg.at("model"));
  const auto* jc = std::get_if<JCModel>(&model_any);
  if (!jc) throw ConfigError("jc-optimize needs model.kind = 'jc'");
  const Space& space = jc->space();
  const TimeGrid grid = grid_from(cfg.at("grid"));
  const KrotovConfig kc = krotov_from(cfg.at("krotov"));
  const StateVector psi0 = initial_state_from(cfg.at("initial_state"), space);
  const ControlPulse guess = guess_pulse(guess_from(cfg.at("guess"), cfg.at("seed").get<std::uint64_t>()), kc.shape, grid);
  const double alpha_tgt = get<double>(cfg.at("functional"), "alpha_tgt");
  const PureFunctional f = pure_functional(cfg.at("functional").at("terms"), space, term_params(alpha_tgt));
  const json& an = cfg.at("analysis");

  JcOptimizeResult out{run_optimization(*jc, guess, f, psi0, kc, progress(ctx, "jc")), {}, {}, {}, 0.0, {}, {}};
  out.fit = cat_infidelity_entangled(out.run.final_state);
  out.spectrum = pulse_spectrum(out.run.pulse, get<int>(an, "spectrum_pad"));
  const auto transitions = jc_transition_frequencies(*jc, get<int>(an, "transition_levels"));
  std::vector<Transition> scaled = transitions;
  for (auto& t : scaled) t.frequency *= jc->coupling();
  out.peaks = spectral_peaks(out.spectrum, scaled, get<double>(an, "peak_threshold"));
  out.dft_bin = 2.0 * std::numbers::pi / grid.duration();
  const GaborMap gm = gabor(out.run.pulse, gabor_from(an.at("gabor")));
  out.ridge = gabor_ridge(gm);

  json peaks = json::array();
  bool all_match = true;
  for (const auto& p : out.peaks) {
    all_match = all_match && p.distance <= out.dft_bin;
    peaks.push_back({{"omega", p.omega},
                     {"magnitude", p.magnitude},
                     {"transition", {{"frequency", p.nearest.frequency}, {"type", to_string(p.nearest.type)}, {"n", p.nearest.n}}},
                     {"distance", p.distance}});
  }
  json report = {{"version", version()},
                 {"config", cfg},
                 {"entangled_cat_fit", entangled_fit_json(out.fit)},
                 {"alpha_estimate", alpha_estimate(out.run.final_state)},
                 {"radius_error", radius_error(out.run.final_state, RadiusTarget(alpha_tgt))},
                 {"max_truncation_weight", truncation_weight(out.run.final_state)},
                 {"spectral_peaks", peaks},
                 {"dft_bin", out.dft_bin},
                 {"peaks_match_transitions", all_match},
                 {"gabor_sigma", gm.sigma},
                 {"gabor_ridge", std::vector<double>(out.ridge.data(), out.ridge.data() + out.ridge.size())},
                 {"optimization", run_summary(out.run)}};
  if (ctx.writes()) {
    write_run(ctx.out_dir, out.run, "1/g");
    io::write_spectrum(ctx.out_dir / "spectrum.csv", out.spectrum);
    io::write_gabor(ctx.out_dir / "gabor.csv", gm);
    Table tt{{"frequency", "n"}, RMatrix(Eigen::Index(scaled.size()), 2)};
    {
      auto f = io::open_out(ctx.out_dir / "transitions.csv");
      f << "frequency,type,n\n";
      for (const auto& t : scaled) f << io::fmt(t.frequency) << ',' << to_string(t.type) << ',' << t.n << '\n';
    }
    io::write_wigner(ctx.out_dir / "wigner.csv", wigner(out.run.final_state, wigner_grid_from(an.at("wigner"))));
    io::write_json(ctx.out_dir / "report.json", report);
  }
  out.report = std::move(report);
  return out;
}

// ---------------------------------------------------------------------------
// qsl-scan
// ---------------------------------------------------------------------------

struct QslPoint {
  std::string mode;  // "pinned" (with the radius term) or "free"
  double alpha_tgt = 0.0;
  double duration = 0.0;
  double achieved_alpha = 0.0;
  double cat_infidelity = 1.0;
  double J = 0.0;
  int iterations = 0;
};

struct QslResult {
  std::vector<QslPoint> points;
  std::map<double, std::optional<double>> t_qsl;  // per pinned target
  json report;
};

/// Smallest duration from which on every achieved |alpha| stays within tol of the target.
inline std::optional<double> estimate_t_qsl(const std::vector<QslPoint>& pts, double tol) {
  std::optional<double> t;
  for (auto it = pts.rbegin(); it != pts.rend(); ++it) {
    if (std::abs(it->achieved_alpha - it->alpha_tgt) > tol) break;
    t = it->duration;
  }
  return t;
}

inline QslResult cmd_qsl_scan(const json& cfg, const Context& ctx = {}) {
  using namespace detail;
  const auto model_any = model_from(cfg.at("model"));
  const auto* jc = std::get_if<JCModel>(&model_any);
  if (!jc) throw ConfigError("qsl-scan needs model.kind = 'jc'");
  const Space& space = jc->space();
  const KrotovConfig kc = krotov_from(cfg.at("krotov"));
  const StateVector psi0 = initial_state_from(cfg.at("initial_state"), space);
  const GuessSpec gs = guess_from(cfg.at("guess"), cfg.at("seed").get<std::uint64_t>());
  const json& sw = cfg.at("sweep");
  const auto durations = get<std::vector<double>>(sw, "durations");
  const auto targets = get<std::vector<double>>(sw, "alpha_targets");
  const double scale = time_scale(get<std::string>(sw, "duration_unit"));
  const double tol = get<double>(sw, "tolerance");
  const bool free_mode = get<bool>(sw, "free_mode");
  if (durations.empty() || targets.empty()) throw ConfigError("qsl-scan needs nonempty durations and alpha_targets");
  const double steps_per_t = get<double>(cfg.at("grid"), "steps_per_unit_time");
  const int min_steps = get<int>(cfg.at("grid"), "min_steps");
  const json& terms = cfg.at("functional").at("terms");

  std::vector<QslPoint> points;
  for (double a : targets)
    for (double d : durations) points.push_back({"pinned", a, d * scale});
  if (free_mode)
    for (double d : durations) points.push_back({"free", 0.0, d * scale});

  run_jobs(int(points.size()), ctx.workers, [&](int i) {
    QslPoint& p = points[i];
    const TimeGrid grid(p.duration, std::max(min_steps, int(std::lround(steps_per_t * p.duration))));
    json t = json::array();
    for (const auto& term : terms)
      if (p.mode == "pinned" || term.at("name") != "alpha") t.push_back(term);
    const PureFunctional f = pure_functional(t, space, term_params(p.alpha_tgt));
    const auto run = run_optimization(*jc, guess_pulse(gs, kc.shape, grid), f, psi0, kc);
    p.achieved_alpha = alpha_estimate(run.final_state);
    p.cat_infidelity = cat_infidelity_entangled(run.final_state).infidelity;
    p.J = run.evaluation.total;
    p.iterations = run.iterations;
    ctx.say("qsl " + p.mode + " alpha_tgt=" + io::fmt(p.alpha_tgt) + " T=" + io::fmt(p.duration) +
            " |alpha|=" + io::fmt(p.achieved_alpha));
    if (ctx.writes()) {
      char name[96];
      std::snprintf(name, sizeof name, "%s_a%.3f_T%.4f", p.mode.c_str(), p.alpha_tgt, p.duration);
      write_run(ctx.out_dir / "runs" / name, run, "1/g");
    }
  });

  QslResult out;
  out.points = points;
  json tq = json::object();
  for (double a : targets) {
    std::vector<QslPoint> series;
    for (const auto& p : points)
      if (p.mode == "pinned" && p.alpha_tgt == a) series.push_back(p);
    out.t_qsl[a] = estimate_t_qsl(series, tol);
    tq[io::fmt(a)] = out.t_qsl[a] ? json(*out.t_qsl[a]) : json(nullptr);
  }
  Table table{{"alpha_tgt", "T", "achieved_alpha", "cat_infidelity", "J", "iterations", "free"},
              RMatrix(Eigen::Index(points.size()), 7)};
  json rows = json::array();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    table.data.row(Eigen::Index(i)) << p.alpha_tgt, p.duration, p.achieved_alpha, p.cat_infidelity, p.J,
        double(p.iterations), p.mode == "free" ? 1.0 : 0.0;
    rows.push_back({{"mode", p.mode}, {"alpha_tgt", p.alpha_tgt}, {"T", p.duration},
                    {"achieved_alpha", p.achieved_alpha}, {"cat_infidelity", p.cat_infidelity}, {"J", p.J},
                    {"iterations", p.iterations}});
  }
  out.report = {{"version", version()}, {"config", cfg}, {"points", rows}, {"t_qsl", tq}, {"time_unit", "1/g"}};
  if (ctx.writes()) {
    io::write_table(ctx.out_dir / "qsl.csv", table);
    io::write_json(ctx.out_dir / "report.json", out.report);
  }
  return out;
}

// ---------------------------------------------------------------------------
// dissipative-reoptimize
// ---------------------------------------------------------------------------

struct StateErrors {
  double J = 0.0;
  double purity_error = 0.0;
  double cat_infidelity = 1.0;
  double radius_error = 0.0;
};

struct KappaPoint {
  double kappa = 0.0;
  StateErrors coherent, reoptimized;
  int iterations = 0;
};

struct DissipativeResult {
  ControlPulse coherent_pulse{TimeGrid(1.0, 2)};
  std::vector<KappaPoint> points;
  json report;
};

inline DissipativeResult cmd_dissipative_reoptimize(const json& cfg, const Context& ctx = {}) {
  using namespace detail;
  const auto model_any = model_from(cfg.at("model"));
  const auto* jc = std::get_if<JCModel>(&model_any);
  if (!jc) throw ConfigError("dissipative-reoptimize needs model.kind = 'jc'");
  const Space& space = jc->space();
  const double alpha_tgt = get<double>(cfg, "alpha_tgt");
  const TimeGrid grid = dissipative_grid_from(cfg.at("grid"), alpha_tgt);
  const StateVector psi0 = initial_state_from(cfg.at("initial_state"), space);
  const RadiusTarget tgt(alpha_tgt);
  const std::uint64_t seed = cfg.at("seed").get<std::uint64_t>();

  DissipativeResult out;
  const json& coh = cfg.at("coherent");
  const std::string pulse_path = get<std::string>(coh, "pulse");
  json coherent_summary;
  if (!pulse_path.empty()) {
    out.coherent_pulse = io::read_pulse(pulse_path);
    if (!(out.coherent_pulse.grid == grid)) throw ConfigError("coherent pulse grid does not match the config grid");
  } else {
    const KrotovConfig ck = krotov_from(coh.at("krotov"));
    const PureFunctional f = pure_functional(coh.at("terms"), space, term_params(alpha_tgt));
    const auto run = run_optimization(*jc, guess_pulse(guess_from(coh.at("guess"), seed), ck.shape, grid), f, psi0,
                                      ck, progress(ctx, "coherent"));
    out.coherent_pulse = run.pulse;
    coherent_summary = run_summary(run);
    coherent_summary["entangled_cat_fit"] = entangled_fit_json(cat_infidelity_entangled(run.final_state));
    if (ctx.writes()) write_run(ctx.out_dir / "coherent", run, "1/g");
  }

  const KrotovConfig kc = krotov_from(cfg.at("krotov"));
  const DensityFunctional fd = density_functional(cfg.at("functional").at("terms"), space, term_params(alpha_tgt));
  const json& sw = cfg.at("sweep");
  const double t_qsl = get<double>(sw, "t_qsl") * time_scale(get<std::string>(sw, "t_qsl_unit"));
  const auto xs = get<std::vector<double>>(sw, "kappa_times_tqsl");
  if (xs.empty()) throw ConfigError("sweep.kappa_times_tqsl must be nonempty");
  const auto observables = get<std::vector<std::string>>(cfg, "observables");
  const DensityMatrix rho0 = DensityMatrix::from_pure(psi0);

  auto errors = [&](const DensityMatrix& rho, double J) {
    return StateErrors{J, purity_error(rho), cat_infidelity_entangled(rho).infidelity, radius_error(rho, tgt)};
  };

  out.points.resize(xs.size());
  std::vector<json> runs(xs.size());
  run_jobs(int(xs.size()), ctx.workers, [&](int i) {
    KappaPoint& p = out.points[i];
    p.kappa = xs[i] / t_qsl;
    const LindbladSpec diss = LindbladSpec::oscillator_decay(p.kappa, space);
    const auto run = run_optimization(*jc, diss, out.coherent_pulse, fd, rho0, kc,
                                      progress(ctx, "kappa=" + io::fmt(p.kappa), 5));
    const auto before = propagate_density(*jc, diss, out.coherent_pulse, rho0, true);
    const auto after = propagate_density(*jc, diss, run.pulse, rho0, true);
    p.coherent = errors(before.final(), run.records.front().J_total);
    p.reoptimized = errors(after.final(), run.evaluation.total);
    p.iterations = run.iterations;
    runs[i] = run_summary(run);
    ctx.say("kappa=" + io::fmt(p.kappa) + " purity error " + io::fmt(p.coherent.purity_error) + " -> " +
            io::fmt(p.reoptimized.purity_error));
    if (ctx.writes()) {
      char name[64];
      std::snprintf(name, sizeof name, "kappa_%.6g", p.kappa);
      const fs::path dir = ctx.out_dir / name;
      write_run(dir, run, "1/g");
      if (!observables.empty()) {
        io::write_table(dir / "observables_coherent.csv", observables_timeseries(before, observables));
        io::write_table(dir / "observables_reoptimized.csv", observables_timeseries(after, observables));
      }
    }
  });

  auto ej = [](const StateErrors& e) {
    return json{{"J", e.J}, {"purity_error", e.purity_error}, {"cat_infidelity", e.cat_infidelity},
                {"radius_error", e.radius_error}};
  };
  json pts = json::array();
  Table table{{"kappa", "kappa_times_tqsl", "J_coherent", "J_reoptimized", "purity_error_coherent",
               "purity_error_reoptimized", "cat_infidelity_coherent", "cat_infidelity_reoptimized",
               "radius_error_coherent", "radius_error_reoptimized"},
              RMatrix(Eigen::Index(xs.size()), 10)};
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const auto& p = out.points[i];
    pts.push_back({{"kappa", p.kappa}, {"kappa_times_tqsl", xs[i]}, {"coherent", ej(p.coherent)},
                   {"reoptimized", ej(p.reoptimized)}, {"optimization", runs[i]}});
    table.data.row(Eigen::Index(i)) << p.kappa, xs[i], p.coherent.J, p.reoptimized.J, p.coherent.purity_error,
        p.reoptimized.purity_error, p.coherent.cat_infidelity, p.reoptimized.cat_infidelity, p.coherent.radius_error,
        p.reoptimized.radius_error;
  }
  out.report = {{"version", version()}, {"config", cfg}, {"t_qsl", t_qsl}, {"points", pts}};
  if (!coherent_summary.is_null()) out.report["coherent_optimization"] = coherent_summary;
  if (ctx.writes()) {
    io::write_pulse(ctx.out_dir / "coherent_pulse.csv", out.coherent_pulse, "1/g");
    io::write_table(ctx.out_dir / "errors.csv", table);
    io::write_json(ctx.out_dir / "report.json", out.report);
  }
  return out;
}

// ---------------------------------------------------------------------------
// propagate / analyze
// ---------------------------------------------------------------------------

namespace detail {

inline json analyze_state(const io::LoadedState& s, double alpha_tgt) {
  json a;
  const Space& space = s.space();
  if (s.pure) {
    a["norm"] = s.pure->norm();
    a["alpha_estimate"] = alpha_estimate(*s.pure);
    a["truncation_weight"] = truncation_weight(*s.pure);
    if (space.is_composite()) {
      a["entangled_cat_fit"] = entangled_fit_json(cat_infidelity_entangled(*s.pure));
      a["oscillator_purity"] = purity(reduced_ho(s.pure->amplitudes(), space.composite()));
    } else {
      a["cat_fit"] = cat_fit_json(cat_infidelity_pure(*s.pure));
    }
    if (alpha_tgt > 0.0) a["radius_error"] = radius_error(*s.pure, RadiusTarget(alpha_tgt));
  } else {
    const DensityMatrix& rho = *s.mixed;
    a["trace"] = rho.matrix().trace().real();
    a["purity"] = purity(rho);
    a["purity_error"] = purity_error(rho);
    a["alpha_estimate"] = alpha_estimate(rho);
    a["truncation_weight"] = truncation_weight(rho);
    if (space.is_composite()) {
      a["entangled_cat_fit"] = entangled_fit_json(cat_infidelity_entangled(rho));
      a["mutual_information"] = mutual_information(rho);
      const BlochVector b = bloch_coords(reduced_qubit(rho.matrix(), space.composite()));
      a["bloch"] = {b.x, b.y, b.z};
    } else {
      // A single-mode mixed state is fitted through its dominant eigenvector.
      Eigen::SelfAdjointEigenSolver<CMatrix> es(rho.matrix());
      a["dominant_eigenvalue"] = es.eigenvalues()(es.eigenvalues().size() - 1);
      a["cat_fit_dominant"] =
          cat_fit_json(cat_infidelity_pure(StateVector(space, es.eigenvectors().col(es.eigenvectors().cols() - 1))));
    }
    if (alpha_tgt > 0.0) a["radius_error"] = radius_error(rho, RadiusTarget(alpha_tgt));
  }
  return a;
}

}  // namespace detail

struct PropagateResult {
  io::LoadedState final_state;
  json report;
};

inline PropagateResult cmd_propagate(const json& cfg, const Context& ctx = {}) {
  using namespace detail;
  const auto model_any = model_from(cfg.at("model"));
  const LinearControlModel& model = base(model_any);
  const std::string pulse_path = get<std::string>(cfg, "pulse");
  if (pulse_path.empty()) throw ConfigError("propagate needs a pulse file");
  const ControlPulse pulse = io::read_pulse(pulse_path);
  const StateVector psi0 = initial_state_from(cfg.at("initial_state"), model.space());
  const double kappa = get<double>(cfg.at("model"), "kappa");
  const bool store = get<bool>(cfg, "store_trajectory");
  const auto observables = get<std::vector<std::string>>(cfg, "observables");

  PropagateResult out;
  std::optional<Table> table;
  if (kappa > 0.0) {
    const LindbladSpec diss = LindbladSpec::oscillator_decay(kappa, model.space());
    const auto traj = propagate_density(model, diss, pulse, DensityMatrix::from_pure(psi0), store);
    out.final_state.mixed = traj.final();
    if (store && !observables.empty()) table = observables_timeseries(traj, observables);
  } else {
    const auto traj = propagate_state(model, pulse, psi0, store);
    out.final_state.pure = traj.final();
    if (store && !observables.empty()) table = observables_timeseries(traj, observables);
  }
  out.report = {{"version", version()},
                {"config", cfg},
                {"time_unit", time_unit(model_any)},
                {"analysis", analyze_state(out.final_state, get<double>(cfg, "alpha_tgt"))}};
  if (ctx.writes()) {
    io::write_json(ctx.out_dir / "final_state.json", out.final_state.pure ? io::to_json(*out.final_state.pure)
                                                                         : io::to_json(*out.final_state.mixed));
    if (table) io::write_table(ctx.out_dir / "trajectory.csv", *table);
    io::write_json(ctx.out_dir / "report.json", out.report);
  }
  return out;
}

struct AnalyzeResult {
  json report;
};

inline AnalyzeResult cmd_analyze(const json& cfg, const Context& ctx = {}) {
  using namespace detail;
  const std::string state_path = get<std::string>(cfg, "state");
  const std::string pulse_path = get<std::string>(cfg, "pulse");
  if (state_path.empty() && pulse_path.empty()) throw ConfigError("analyze needs a state file, a pulse file, or both");
  const json& an = cfg.at("analysis");
  AnalyzeResult out;
  out.report = {{"version", version()}, {"config", cfg}};
  if (!state_path.empty()) {
    const io::LoadedState s = io::read_state(state_path);
    out.report["state"] = analyze_state(s, get<double>(cfg, "alpha_tgt"));
    if (ctx.writes()) {
      const PhaseSpaceGrid wg = wigner_grid_from(an.at("wigner"));
      const WignerMap w = s.pure ? wigner(*s.pure, wg) : wigner(*s.mixed, wg);
      if (w.truncated) ctx.say("warning: state populates the top Fock levels (weight " + io::fmt(w.truncation_weight) + ")");
      io::write_wigner(ctx.out_dir / "wigner.csv", w);
    }
  }
  if (!pulse_path.empty()) {
    const ControlPulse p = io::read_pulse(pulse_path);
    const Spectrum s = pulse_spectrum(p, get<int>(an, "spectrum_pad"));
    out.report["pulse"] = {{"l2_norm", p.l2_norm()},
                           {"spectral_width", spectral_width(s, get<double>(an, "spectral_fraction"))},
                           {"spectral_fraction", get<double>(an, "spectral_fraction")}};
    if (ctx.writes()) {
      io::write_spectrum(ctx.out_dir / "spectrum.csv", s);
      io::write_gabor(ctx.out_dir / "gabor.csv", gabor(p, gabor_from(an.at("gabor"))));
    }
  }
  if (ctx.writes()) io::write_json(ctx.out_dir / "report.json", out.report);
  return out;
}

/// Dispatches on the command name; returns the report.
inline json run_command(const std::string& command, const json& cfg, const Context& ctx) {
  if (command == "kerr-compare") return cmd_kerr_compare(cfg, ctx).report;
  if (command == "jc-optimize") return cmd_jc_optimize(cfg, ctx).report;
  if (command == "qsl-scan") return cmd_qsl_scan(cfg, ctx).report;
  if (command == "dissipative-reoptimize") return cmd_dissipative_reoptimize(cfg, ctx).report;
  if (command == "propagate") return cmd_propagate(cfg, ctx).report;
  if (command == "analyze") return cmd_analyze(cfg, ctx).report;
  throw ConfigError("unknown command '" + command + "'");
}

}  // namespace catoptron::experiments
