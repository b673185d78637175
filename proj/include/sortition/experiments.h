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

// Experiment configs, dispatch, and CSV output for the sortition-lab CLI.

#ifndef SORTITION_EXPERIMENTS_H_
#define SORTITION_EXPERIMENTS_H_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "sortition/json_io.h"

namespace sortition {

// Invalid config or parameters; the CLI maps it to exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ExperimentConfig {
  std::string kind;
  Json params = Json::object();
  std::uint64_t seed = 0;
  std::size_t trials = 2000;
  std::string output;  // empty: CSV goes to stdout
};

// {"kind": ..., "params": {...}, "seed": N, "trials": N, "output": "path"}.
// Only "kind" is required. Throws ConfigError.
ExperimentConfig parse_config(const Json& j);
ExperimentConfig load_config(const std::string& path);

// Checks the kind and its parameters without running anything.
void validate_config(const ExperimentConfig& config);

struct KindInfo {
  std::string kind;
  std::string params;  // parameters with defaults
  std::string claim;   // what the kind verifies
};

// Stable order; one row per kind.
const std::vector<KindInfo>& list_kinds();

struct RunResult {
  bool pass = false;
  std::string csv;
  std::string summary;  // one line ending in PASS or FAIL
};

RunResult run_experiment(const ExperimentConfig& config);

// Writes through a temporary file in the same directory and renames it.
void write_file_atomically(const std::string& path, const std::string& content);

// printf("%.9g").
std::string format_real(double v);

}  // namespace sortition

#endif  // SORTITION_EXPERIMENTS_H_
