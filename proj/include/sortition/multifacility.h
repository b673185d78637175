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

// Placing ell facilities; every agent is served by its nearest one.

#ifndef SORTITION_MULTIFACILITY_H_
#define SORTITION_MULTIFACILITY_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "sortition/facility.h"
#include "sortition/sampling.h"

namespace sortition {

inline constexpr std::size_t kSubsetCap = 1'000'000;

class MultiFacilityInstance {
 public:
  // Throws std::invalid_argument unless 1 <= ell <= |candidates|.
  MultiFacilityInstance(FacilityInstance base, std::size_t ell);

  const FacilityInstance& base() const { return base_; }
  std::size_t ell() const { return ell_; }

  friend bool operator==(const MultiFacilityInstance&, const MultiFacilityInstance&) = default;

 private:
  FacilityInstance base_;
  std::size_t ell_;
};

// sum_i w_i min_j d(x_i, y_j) / sum_i w_i. Throws std::invalid_argument when
// |y| != ell or a y_j is not a candidate.
double multi_cost(const MultiFacilityInstance& inst, const std::vector<Point>& y,
                  std::span<const double> weights);
// Same with facilities given as candidate indices.
double multi_cost_at(const MultiFacilityInstance& inst, std::span<const std::size_t> y,
                     std::span<const double> weights);
double multi_social_cost(const MultiFacilityInstance& inst, std::span<const std::size_t> y);

struct KMedianResult {
  double cost = 0.0;                   // weighted average distance
  std::vector<std::size_t> facilities;  // ascending candidate indices
};

// Exact weighted ell-median on the line. `candidates` must be strictly
// increasing; points may come in any order. Among optimal sets the
// lexicographically smallest index set is returned.
KMedianResult kmedian_line(std::span<const double> points, std::span<const double> weights,
                           std::span<const double> candidates, std::size_t ell);

// Exhaustive search over all C(|C|, ell) sets in lexicographic order.
// Throws std::length_error above kSubsetCap sets.
KMedianResult kmedian_brute(const MultiFacilityInstance& inst, std::span<const double> weights);

// Uses kmedian_line on a segment with increasing candidates, brute force
// otherwise.
KMedianResult kmedian(const MultiFacilityInstance& inst, std::span<const double> weights);
KMedianResult panel_multi_optimum(const MultiFacilityInstance& inst, const Panel& panel);
KMedianResult multi_social_opt(const MultiFacilityInstance& inst);

struct PanelBound {
  double lhs = 0.0;  // social cost of the panel-optimal facilities
  double rhs = 0.0;  // W(population, panel) + Panel-Opt
  double w = 0.0;
  double panel_opt = 0.0;
  bool ok = false;  // lhs <= rhs + 1e-9
};

PanelBound panel_bound_check(const MultiFacilityInstance& inst, const Panel& panel);

// Populations on [0,1] with C = {0, 1/2, 1} and ell = 2: n - 1 agents at 0
// and one agent at `outliers[i]`. Each has optimum 0.
struct ImpossibilityFamily {
  std::vector<double> outliers;
  std::vector<MultiFacilityInstance> populations;
};
ImpossibilityFamily impossibility_instance(std::size_t n = 8);

using PanelDecision = std::function<std::vector<std::size_t>(const Panel&)>;

// Exact E[SC(decision(S))] over all panels.
double exact_expected_social_cost(const MultiFacilityInstance& inst, std::size_t k,
                                  const PanelDecision& decision,
                                  SamplingMode mode = SamplingMode::kWithoutReplacement);

struct MultiTrialSummary {
  EstimateWithCI social_cost;  // SC of panel-optimal facilities
  EstimateWithCI w;            // W(population, panel)
  EstimateWithCI panel_opt;
};

MultiTrialSummary multi_panel_trials(const MultiFacilityInstance& inst, std::size_t k,
                                     std::size_t trials, std::uint64_t seed,
                                     SamplingMode mode = SamplingMode::kWithoutReplacement);

}  // namespace sortition

#endif  // SORTITION_MULTIFACILITY_H_
