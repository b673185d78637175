// Copyright 2026 The Authors.
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

// sortition-lab: run, list and validate experiment configs.
//
// Exit codes: 0 pass, 1 criterion failure, 2 usage or config error.

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sortition/experiments.h"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

int run_command(const std::string& config_path, std::optional<std::uint64_t> seed,
                std::optional<std::size_t> trials, std::optional<std::string> out) {
  auto config = sortition::load_config(config_path);
  if (seed) config.seed = *seed;
  if (trials) config.trials = *trials;
  if (out) config.output = *out;
  const auto result = sortition::run_experiment(config);
  if (config.output.empty()) {
    std::cout << result.csv;
  } else {
    sortition::write_file_atomically(config.output, result.csv);
  }
  std::cerr << result.summary << '\n';
  return result.pass ? kExitPass : kExitFail;
}

int list_command() {
  for (const auto& k : sortition::list_kinds()) {
    std::cout << k.kind << '\t' << k.params << '\t' << k.claim << '\n';
  }
  return kExitPass;
}

int validate_command(const std::string& config_path) {
  const auto config = sortition::load_config(config_path);
  sortition::validate_config(config);
  std::cout << config_path << ": ok (" << config.kind << ")\n";
  return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sortition panel-complexity laboratory"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run one experiment config");
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::optional<std::string> out;
  run->add_option("--config", config_path, "Experiment config (JSON)")->required();
  run->add_option("--seed", seed, "Override the config seed");
  run->add_option("--trials", trials, "Override the trial count");
  run->add_option("--out", out, "Override the CSV output path");

  auto* list = app.add_subcommand("list", "List experiment kinds");

  auto* validate = app.add_subcommand("validate", "Check a config without running it");
  std::string validate_path;
  validate->add_option("FILE", validate_path, "Experiment config (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitUsage;
  }

  try {
    if (*run) return run_command(config_path, seed, trials, out);
    if (*list) return list_command();
    if (*validate) return validate_command(validate_path);
  } catch (const sortition::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFail;
  }
  return kExitUsage;
}
