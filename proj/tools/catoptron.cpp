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


// catoptron <command> --config FILE [--seed N] [--out DIR] [--workers K]
//
// Exit codes: 0 success, 1 usage, 2 config error, 3 numeric failure.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "catoptron/catoptron.hpp"

namespace {

namespace ex = catoptron::experiments;

int run(const std::string& command, const std::string& config_path, std::optional<std::uint64_t> seed,
        const std::string& out, std::optional<int> workers, bool quiet) {
  const ex::json user = catoptron::io::read_json(config_path);
  ex::json cfg = ex::effective_config(user, command, seed);
  if (!out.empty()) cfg["output_dir"] = out;
  if (workers) cfg["workers"] = *workers;

  ex::Context ctx;
  ctx.out_dir = cfg.at("output_dir").get<std::string>();
  ctx.workers = cfg.at("workers").get<int>();
  if (!quiet) ctx.log = [](const std::string& m) { std::cerr << m << std::endl; };

  const ex::json report = ex::run_command(command, cfg, ctx);
  std::cerr << "wrote " << (ctx.out_dir / "report.json").string() << '\n';
  (void)report;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Krotov optimal control towards cat-state families"};
  app.set_version_flag("--version", std::string(ex::version()));
  app.require_subcommand(1);

  std::string config, out;
  std::uint64_t seed = 0;
  int workers = 1;
  bool quiet = false;
  for (const auto& name : ex::commands()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config,-c", config, "JSON config file")->required();
    sub->add_option("--seed", seed, "overrides the config seed");
    sub->add_option("--out,-o", out, "output directory (overrides output_dir)");
    sub->add_option("--workers,-j", workers, "worker threads for sweeps")->check(CLI::PositiveNumber);
    sub->add_flag("--quiet,-q", quiet, "no progress output");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  CLI::App* sub = app.get_subcommands().front();
  std::optional<std::uint64_t> seed_override;
  if (sub->count("--seed")) seed_override = seed;
  std::optional<int> workers_override;
  if (sub->count("--workers")) workers_override = workers;

  try {
    return run(sub->get_name(), config, seed_override, out, workers_override, quiet);
  } catch (const catoptron::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const catoptron::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }
}
