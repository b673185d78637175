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

// Single-facility location over a finite candidate set.

#ifndef SORTITION_FACILITY_H_
#define SORTITION_FACILITY_H_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sortition/core_model.h"
#include "sortition/sampling.h"

namespace sortition {

inline constexpr std::size_t kCoverCap = 10'000'000;
inline constexpr double kTieTolerance = 1e-12;

class FacilityInstance {
 public:
  // Throws std::invalid_argument on an empty candidate list, no agents, or
  // points outside `space`.
  FacilityInstance(MetricSpace space, std::vector<Point> candidates, std::vector<Point> agents);

  const MetricSpace& space() const { return space_; }
  const std::vector<Point>& candidates() const { return candidates_; }
  const std::vector<Point>& agents() const { return agents_; }
  std::size_t n() const { return agents_.size(); }
  std::size_t num_candidates() const { return candidates_.size(); }

  // d(candidate c, agent i), precomputed.
  double dist(std::size_t c, std::size_t i) const { return dist_[c * agents_.size() + i]; }
  // Index of q in the candidate list; throws std::invalid_argument if absent.
  std::size_t candidate_index(const Point& q) const;

  friend bool operator==(const FacilityInstance& a, const FacilityInstance& b) {
    return a.space_ == b.space_ && a.candidates_ == b.candidates_ && a.agents_ == b.agents_;
  }

 private:
  MetricSpace space_;
  std::vector<Point> candidates_;
  std::vector<Point> agents_;
  std::vector<double> dist_;
};

double social_cost(const FacilityInstance& inst, const Point& q);
double social_cost_at(const FacilityInstance& inst, std::size_t c);
double panel_cost(const FacilityInstance& inst, const Point& q, const Panel& panel);
double panel_cost_at(const FacilityInstance& inst, std::size_t c, const Panel& panel);

// argmin over candidates. Costs within kTieTolerance of the best so far count
// as ties and go to the smallest index.
std::size_t panel_optimum_index(const FacilityInstance& inst, const Panel& panel);
Point panel_optimum(const FacilityInstance& inst, const Panel& panel);
std::size_t population_optimum_index(const FacilityInstance& inst);
double social_opt(const FacilityInstance& inst);

// ceil(2 ln(1/delta) / ln(T^2 / (4 (T - 1)))). Requires T > 2, delta in (0, 1).
std::size_t tail_panel_size(double T, double delta);

struct LineReduction {
  FacilityInstance instance;
  std::size_t q_star = 0;  // population optimum of the input
  double opt = 0.0;
  bool degenerate = false;  // Opt == 0
};

// Sends x to d(x, q*). Candidates become {0, T Opt} together with every
// mapped agent position >= T Opt; panel optima over the half-line
// {0} U [T Opt, inf) always lie in this set.
LineReduction metric_map_to_line(const FacilityInstance& inst, double T);

// min(x_i, cap) for every x.
std::vector<double> clamp_values(const std::vector<double>& xs, double cap);

// Line instance whose optimum is 0: agents clamped to T Opt and candidates
// {0, T Opt}, with Opt the social cost of 0. Opt == 0 returns the input
// unchanged and flagged.
LineReduction finite_interval_reduce(const FacilityInstance& line, double T);

// Grid cover of [0,1]^t: every point lies within r of a cover point.
// Throws std::length_error above kCoverCap points.
std::vector<Point> box_cover(int t, double r, Norm norm);

// n = 2k + 1 agents on [0,1]: k at 0, k at 1, then one more at 0. The
// candidates are listed as {1, 0}, so panel ties resolve towards 1.
FacilityInstance star_instance(int k);

struct LinfLowerInstance {
  FacilityInstance instance;
  std::vector<int> z;
  int t = 0, w = 0, r = 0;
  Point q_star;                     // c + sum_j (z_j / 2) e_j
  std::vector<int> agent_axis;      // axis j of the pair c +- e_j the agent sits on
};

// Box [0,1]^t under l_inf with c = (1/2, ..., 1/2) and e_j = (1/2) * unit_j.
// r (w + z_j) agents at c + e_j and r (w - z_j) at c - e_j; candidates are
// the grid {1/4, 1/4 + step, ..., 3/4}^t.
LinfLowerInstance linf_lower_instance(const std::vector<int>& z, int t, int w, int r,
                                      double step = 0.25);

// Share of the social cost of q contributed by agents on axis j.
double axis_cost(const LinfLowerInstance& li, const Point& q, int j);

// Agents i.i.d. uniform on [0,1]; candidates the (grid_points)-point grid.
FacilityInstance random_line_instance(std::size_t n, std::size_t grid_points, Rng& rng);

// Monte Carlo estimate of P[d(q(S), q*) <= T Opt].
EstimateWithCI tail_probability(const FacilityInstance& inst, std::size_t k, double T,
                                std::size_t trials, std::uint64_t seed,
                                SamplingMode mode = SamplingMode::kWithoutReplacement);

// Exact P[d(q(S), q*) >= threshold] over all panels.
Probability exact_far_probability(const FacilityInstance& inst, std::size_t k, double threshold,
                                  SamplingMode mode = SamplingMode::kWithoutReplacement);

// Monte Carlo estimate of SC(q(S)).
EstimateWithCI expected_panel_choice_cost(const FacilityInstance& inst, std::size_t k,
                                          std::size_t trials, std::uint64_t seed,
                                          SamplingMode mode = SamplingMode::kWithoutReplacement);

}  // namespace sortition

#endif  // SORTITION_FACILITY_H_
