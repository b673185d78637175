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

// Divisible participatory budgeting: m projects, allocations x in [0,1]^m
// with sum x_j <= B, and per-agent costs that fall as funding grows.

#ifndef SORTITION_BUDGETING_H_
#define SORTITION_BUDGETING_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "sortition/core_model.h"
#include "sortition/sampling.h"

namespace sortition {

using Allocation = std::vector<double>;

inline constexpr double kBudgetTolerance = 1e-12;
inline constexpr std::size_t kSimplexCoverCap = 10'000'000;

// max(offset - sum_j alpha_j x_j, 0). Without an explicit offset this is
// sum_j alpha_j (1 - x_j).
struct LinearCost {
  std::vector<double> alpha;
  std::optional<double> offset;

  friend bool operator==(const LinearCost&, const LinearCost&) = default;
};

// (1 / b2) sum_j max(b2 / m - x_j, 0); identically 0 when b2 == 0.
struct SaturatingShortfall {
  std::size_t m = 0;
  double b2 = 0.0;

  friend bool operator==(const SaturatingShortfall&, const SaturatingShortfall&) = default;
};

// Values on the uniform grid {0, 1/(p-1), ..., 1}^m, row-major with the last
// axis fastest, interpolated multilinearly.
struct GridTable {
  std::size_t m = 0;
  std::size_t points_per_axis = 2;
  std::vector<double> values;

  friend bool operator==(const GridTable&, const GridTable&) = default;
};

using CostModel = std::variant<LinearCost, SaturatingShortfall, GridTable>;

std::size_t cost_dimension(const CostModel& model);
// Throws std::invalid_argument when the model's range leaves [0,1], a grid
// table is not monotone, or (for linear and grid models) the l1 Lipschitz
// constant exceeds 1.
void validate_cost(const CostModel& model);
// Smallest L with |cost(x) - cost(y)| <= L ||x - y||_1.
double lipschitz_constant(const CostModel& model);

// Throws std::out_of_range when x leaves [0,1]^m.
double eval_cost(const CostModel& model, std::span<const double> x);

class PBInstance {
 public:
  // Requires m >= 2, 0 < B <= m, nonempty costs of dimension m.
  PBInstance(std::size_t m, double budget, std::vector<CostModel> costs);

  std::size_t m() const { return m_; }
  double budget() const { return budget_; }
  std::size_t n() const { return costs_.size(); }
  const std::vector<CostModel>& costs() const { return costs_; }
  bool all_plain_linear() const;

  friend bool operator==(const PBInstance&, const PBInstance&) = default;

 private:
  std::size_t m_;
  double budget_;
  std::vector<CostModel> costs_;
};

bool is_feasible(const PBInstance& inst, std::span<const double> x);

// Weighted average cost; uniform weights when `weights` is empty.
double pb_cost(const PBInstance& inst, std::span<const double> x,
               std::span<const double> weights = {});

// {0, step, 2 step, ..., 1}^m restricted to sum <= B, plus for every grid
// point and axis j the point with x_j raised to min(1, B - sum of the rest).
// Sorted lexicographically without duplicates. Throws std::length_error
// above kSimplexCoverCap points.
std::vector<Allocation> simplex_cover(std::size_t m, double budget, double step);

struct AllocationResult {
  Allocation x;
  double cost = 0.0;
};

// Plain linear instances use the greedy optimum (projects by descending
// aggregate weight, lower index first on ties). Anything else takes the
// first cover point of minimum cost.
AllocationResult optimal_allocation(const PBInstance& inst, std::span<const double> weights,
                                    std::span<const Allocation> cover);

struct CoreWitness {
  std::vector<std::size_t> coalition;  // agent indices
  Allocation x_prime;
};

// Scans the cover for x' such that the agents T with rho cost(x') + tau <
// cost(x) satisfy sum x'/B + eta <= w(T) / w(all). Returns the first hit.
// Only agents with positive weight take part; empty weights mean uniform.
std::optional<CoreWitness> core_check(const PBInstance& inst, std::span<const double> x,
                                      double eta, double tau, double rho,
                                      std::span<const Allocation> cover,
                                      std::span<const double> weights = {});

// First cover point with no witness against it, if any.
std::optional<Allocation> core_search(const PBInstance& inst, double eta, double tau, double rho,
                                      std::span<const Allocation> cover,
                                      std::span<const double> weights = {});

// Cover step used for population core checks.
double core_cover_step(double eps, double rho, double budget, std::size_t m);

struct WelfareReport {
  EstimateWithCI social_cost;  // SC of the panel decision
  double social_opt = 0.0;
  double gap = 0.0;    // mean SC - (rho Social-Opt + tau)
  double bound = 0.0;  // rho Social-Opt + tau + eps
  bool within = false;  // mean SC <= bound + 3 half-width
};

// Panel decision: the panel optimum when (rho, tau) == (1, 0); otherwise the
// costliest cover point whose panel cost is within rho Panel-Opt + tau.
WelfareReport welfare_experiment(const PBInstance& inst, std::size_t k, double eps, double rho,
                                 double tau, std::size_t trials, std::uint64_t seed,
                                 std::span<const Allocation> cover);

struct CoreFailure {
  std::size_t trial = 0;
  Allocation x;  // empty when the panel search found nothing
};

struct CoreReport {
  EstimateWithCI failure_rate;
  std::size_t unresolved = 0;  // panels with no core point at this resolution
  std::vector<CoreFailure> failures;
  double population_step = 0.0;
};

// Per trial: find a panel-core point on `panel_cover`, then test it against
// the population (eta + eps, tau + eps, rho)-core on a cover of step
// core_cover_step(eps, rho, B, m). Unresolved panels count as failures.
CoreReport core_extrapolation_experiment(const PBInstance& inst, std::size_t k, double eps,
                                         double eta, double tau, double rho, std::size_t trials,
                                         std::uint64_t seed,
                                         std::span<const Allocation> panel_cover);

// Linear costs alpha = e_{label - 1} for the camouflaged population; m = 2h
// unless a larger `m` pads unused projects; B = floor(m / 2).
PBInstance pb_lower_instance(std::span<const int> z, int h, int w, int r, std::size_t m = 0);

struct PBImpossibility {
  double b1 = 0.0, b2 = 0.0;
  PBInstance first;   // last agent has cost B1 + B2/m - x_1
  PBInstance second;  // last agent has cost B1 + B2/m - x_2
  Allocation zero_first;
  Allocation zero_second;
};

// n - 1 shortfall agents plus one linear agent. Requires 0 < B < m, n >= 2.
PBImpossibility pb_impossibility_family(std::size_t m, double budget, std::size_t n);

// n agents with alpha_j uniform and rescaled to sum at most 1.
PBInstance random_linear_instance(std::size_t n, std::size_t m, double budget, Rng& rng);

// Estimates P[||g - z||_1 <= h / 4] where g is the majority guess from a
// k-panel of the camouflaged population for z.
EstimateWithCI recovery_success(std::span<const int> z, int h, int w, int r, std::size_t k,
                                std::size_t trials, std::uint64_t seed);

}  // namespace sortition

#endif  // SORTITION_BUDGETING_H_
