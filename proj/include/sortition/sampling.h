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

// Panel draws, exact panel enumeration, and a seeded Monte Carlo engine.
//
// Every trial gets its own generator seeded from (seed XOR trial index), so
// results never depend on how trials are spread over workers. Per-trial
// values are reduced in trial order, which makes means bit-identical for any
// worker count.

#ifndef SORTITION_SAMPLING_H_
#define SORTITION_SAMPLING_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include <boost/rational.hpp>

#include "sortition/core_model.h"

namespace sortition {

using Rng = std::mt19937_64;
using Probability = boost::rational<std::int64_t>;

inline constexpr std::size_t kEnumerationCap = 1'000'000;

std::uint64_t splitmix64(std::uint64_t x);
Rng make_trial_rng(std::uint64_t seed, std::uint64_t trial);
// Unbiased integer in [0, n).
std::size_t uniform_index(Rng& rng, std::size_t n);
// Uniform double in [0, 1) with 53 random bits.
double uniform01(Rng& rng);

struct TrialPlan {
  std::size_t n = 0;
  std::size_t k = 0;
  SamplingMode mode = SamplingMode::kWithoutReplacement;
  std::size_t trials = 1;
  std::uint64_t seed = 0;

  // Throws std::invalid_argument when 1 <= k <= n (or k >= 1 with
  // replacement) or trials >= 1 fails.
  void validate() const;
};

struct EstimateWithCI {
  double mean = 0.0;
  double half_width_95 = 0.0;
  std::size_t trials = 0;
};

// A statistic failed; carries the (lowest) failing trial index.
class TrialError : public std::runtime_error {
 public:
  TrialError(std::size_t trial, const std::string& what);
  std::size_t trial() const { return trial_; }

 private:
  std::size_t trial_;
};

// Partial Fisher-Yates without replacement; k i.i.d. indices with.
Panel draw_panel(std::size_t n, std::size_t k, SamplingMode mode, Rng& rng);

// Multiplicity of every agent in the panel (length n).
std::vector<double> panel_weights(std::size_t n, const Panel& panel);

// Number of distinct panels enumerate_panels would visit: C(n, k) without
// replacement, C(n + k - 1, k) multisets with.
std::uint64_t panel_count(std::size_t n, std::size_t k, SamplingMode mode);

// Visits every distinct panel with its exact probability, in lexicographic
// order of member lists. Throws std::length_error above kEnumerationCap.
void for_each_panel(std::size_t n, std::size_t k, SamplingMode mode,
                    const std::function<void(const Panel&, const Probability&)>& visit);

struct WeightedPanel {
  Panel panel;
  Probability probability;
};
std::vector<WeightedPanel> enumerate_panels(std::size_t n, std::size_t k, SamplingMode mode);

// Worker count: SORTITION_THREADS if set and positive, else the hardware
// concurrency (at least 1).
std::size_t worker_count();

// Runs body(i) for i in [0, count) spread over worker_count() threads. The
// lowest-index exception is rethrown as TrialError.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

using PanelStatistic = std::function<double(const Panel&, Rng&)>;
using PanelStatistics = std::function<void(const Panel&, Rng&, std::span<double>)>;

// Per-trial values of `statistic` on independently drawn panels.
std::vector<double> run_trials(const TrialPlan& plan, const PanelStatistic& statistic);
// Row-major trials x dim matrix; the statistic fills one row per trial.
std::vector<double> run_trials(const TrialPlan& plan, std::size_t dim,
                               const PanelStatistics& statistic);

enum class Interval {
  kNormal,      // 1.96 sd / sqrt(n)
  kProportion,  // normal, or Wilson when fewer than 10 successes or failures
};

// Sample mean with a 95% half-width. kProportion expects 0/1 values; the
// Wilson half-width is the larger side of the score interval.
EstimateWithCI estimate(std::span<const double> values, Interval interval = Interval::kNormal);
// Column `col` of a row-major matrix with `dim` columns.
EstimateWithCI estimate_column(std::span<const double> matrix, std::size_t dim, std::size_t col,
                               Interval interval = Interval::kNormal);

EstimateWithCI monte_carlo(const TrialPlan& plan, const PanelStatistic& statistic,
                           Interval interval = Interval::kNormal);

}  // namespace sortition

#endif  // SORTITION_SAMPLING_H_
