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

#include "sortition/facility.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sortition {

FacilityInstance::FacilityInstance(MetricSpace space, std::vector<Point> candidates,
                                   std::vector<Point> agents)
    : space_(std::move(space)), candidates_(std::move(candidates)), agents_(std::move(agents)) {
  if (candidates_.empty()) throw std::invalid_argument("candidate set must be nonempty");
  if (agents_.empty()) throw std::invalid_argument("instance needs at least one agent");
  for (const auto& c : candidates_) {
    if (!space_.contains(c)) throw std::invalid_argument("candidate outside the space");
  }
  for (const auto& a : agents_) {
    if (!space_.contains(a)) throw std::invalid_argument("agent outside the space");
  }
  dist_.resize(candidates_.size() * agents_.size());
  for (std::size_t c = 0; c < candidates_.size(); ++c) {
    for (std::size_t i = 0; i < agents_.size(); ++i) {
      dist_[c * agents_.size() + i] = space_.distance(candidates_[c], agents_[i]);
    }
  }
}

std::size_t FacilityInstance::candidate_index(const Point& q) const {
  for (std::size_t c = 0; c < candidates_.size(); ++c) {
    if (candidates_[c].size() != q.size()) continue;
    bool same = true;
    for (std::size_t d = 0; d < q.size() && same; ++d) {
      same = std::fabs(candidates_[c][d] - q[d]) <= kMergeTolerance;
    }
    if (same) return c;
  }
  throw std::invalid_argument("point is not a candidate");
}

double social_cost_at(const FacilityInstance& inst, std::size_t c) {
  if (c >= inst.num_candidates()) throw std::out_of_range("candidate index");
  long double s = 0.0L;
  for (std::size_t i = 0; i < inst.n(); ++i) s += inst.dist(c, i);
  return static_cast<double>(s / static_cast<long double>(inst.n()));
}

double social_cost(const FacilityInstance& inst, const Point& q) {
  return social_cost_at(inst, inst.candidate_index(q));
}

double panel_cost_at(const FacilityInstance& inst, std::size_t c, const Panel& panel) {
  if (c >= inst.num_candidates()) throw std::out_of_range("candidate index");
  long double s = 0.0L;
  for (std::size_t m : panel.members()) {
    if (m >= inst.n()) throw std::out_of_range("panel member outside the population");
    s += inst.dist(c, m);
  }
  return static_cast<double>(s / static_cast<long double>(panel.k()));
}

double panel_cost(const FacilityInstance& inst, const Point& q, const Panel& panel) {
  return panel_cost_at(inst, inst.candidate_index(q), panel);
}

std::size_t panel_optimum_index(const FacilityInstance& inst, const Panel& panel) {
  std::size_t best = 0;
  double best_cost = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < inst.num_candidates(); ++c) {
    const double cost = panel_cost_at(inst, c, panel);
    if (cost < best_cost - kTieTolerance) {
      best_cost = cost;
      best = c;
    }
  }
  return best;
}

Point panel_optimum(const FacilityInstance& inst, const Panel& panel) {
  return inst.candidates()[panel_optimum_index(inst, panel)];
}

std::size_t population_optimum_index(const FacilityInstance& inst) {
  return panel_optimum_index(inst, Panel::everyone(inst.n()));
}

double social_opt(const FacilityInstance& inst) {
  return social_cost_at(inst, population_optimum_index(inst));
}

std::size_t tail_panel_size(double T, double delta) {
  if (!(T > 2.0)) throw std::invalid_argument("tail_panel_size needs T > 2");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  const double k = 2.0 * std::log(1.0 / delta) / std::log(T * T / (4.0 * (T - 1.0)));
  return static_cast<std::size_t>(std::max(1.0, std::ceil(k)));
}

LineReduction metric_map_to_line(const FacilityInstance& inst, double T) {
  if (!(T >= 1.0)) throw std::invalid_argument("T must be at least 1");
  const std::size_t q_star = population_optimum_index(inst);
  const double opt = social_cost_at(inst, q_star);
  std::vector<Point> agents;
  double hi = 0.0;
  for (std::size_t i = 0; i < inst.n(); ++i) {
    const double y = inst.dist(q_star, i);
    agents.push_back({y});
    hi = std::max(hi, y);
  }
  const double far = T * opt;
  std::vector<Point> candidates{{0.0}};
  if (opt > 0.0) {
    std::vector<double> far_points{far};
    for (const auto& a : agents) {
      if (a[0] >= far) far_points.push_back(a[0]);
    }
    std::sort(far_points.begin(), far_points.end());
    far_points.erase(std::unique(far_points.begin(), far_points.end()), far_points.end());
    for (double y : far_points) candidates.push_back({y});
    hi = std::max(hi, far);
  }
  const MetricSpace line = MetricSpace::segment(0.0, std::max(hi, 1.0));
  return LineReduction{FacilityInstance(line, std::move(candidates), std::move(agents)), q_star,
                       opt, opt == 0.0};
}

std::vector<double> clamp_values(const std::vector<double>& xs, double cap) {
  std::vector<double> out;
  out.reserve(xs.size());
  for (double x : xs) out.push_back(std::min(x, cap));
  return out;
}

LineReduction finite_interval_reduce(const FacilityInstance& line, double T) {
  if (!line.space().is_segment()) throw std::invalid_argument("finite_interval_reduce needs a line");
  if (!(T >= 1.0)) throw std::invalid_argument("T must be at least 1");
  std::vector<double> xs;
  for (const auto& a : line.agents()) {
    if (a[0] < 0.0) throw std::invalid_argument("line agents must be nonnegative");
    xs.push_back(a[0]);
  }
  long double sum = 0.0L;
  for (double x : xs) sum += x;
  const double opt = static_cast<double>(sum / static_cast<long double>(xs.size()));
  if (opt == 0.0) return LineReduction{line, 0, 0.0, true};
  const double cap = T * opt;
  std::vector<Point> agents;
  for (double y : clamp_values(xs, cap)) agents.push_back({y});
  const MetricSpace seg = MetricSpace::segment(0.0, cap);
  return LineReduction{FacilityInstance(seg, {{0.0}, {cap}}, std::move(agents)), 0, opt, false};
}

std::vector<Point> box_cover(int t, double r, Norm norm) {
  if (t < 1) throw std::invalid_argument("dimension must be positive");
  if (!(r > 0.0)) throw std::invalid_argument("cover radius must be positive");
  const double step = norm == Norm::kLinf ? 2.0 * r : 2.0 * r / t;
  const auto per_axis = static_cast<std::size_t>(std::max(1.0, std::ceil(1.0 / step - 1e-12)));
  double total = 1.0;
  for (int d = 0; d < t; ++d) total *= static_cast<double>(per_axis);
  if (total > static_cast<double>(kCoverCap)) {
    throw std::length_error("box cover would have more than 1e7 points");
  }
  std::vector<double> axis;
  for (std::size_t i = 0; i < per_axis; ++i) {
    axis.push_back((2.0 * static_cast<double>(i) + 1.0) / (2.0 * static_cast<double>(per_axis)));
  }
  std::vector<Point> out;
  out.reserve(static_cast<std::size_t>(total));
  std::vector<std::size_t> idx(static_cast<std::size_t>(t), 0);
  while (true) {
    Point p(static_cast<std::size_t>(t));
    for (int d = 0; d < t; ++d) p[d] = axis[idx[d]];
    out.push_back(std::move(p));
    int d = t - 1;
    while (d >= 0 && ++idx[d] == per_axis) idx[d--] = 0;
    if (d < 0) break;
  }
  return out;
}

FacilityInstance star_instance(int k) {
  if (k < 1) throw std::invalid_argument("star instance needs k >= 1");
  std::vector<Point> agents;
  for (int i = 0; i < k; ++i) agents.push_back({0.0});
  for (int i = 0; i < k; ++i) agents.push_back({1.0});
  agents.push_back({0.0});
  return FacilityInstance(MetricSpace::unit_interval(), {{1.0}, {0.0}}, std::move(agents));
}

LinfLowerInstance linf_lower_instance(const std::vector<int>& z, int t, int w, int r,
                                      double step) {
  if (t < 2 || w < 2 || r < 1) throw std::invalid_argument("need t, w >= 2 and r >= 1");
  if (z.size() != static_cast<std::size_t>(t)) throw std::invalid_argument("z must have length t");
  for (int zj : z) {
    if (zj != 1 && zj != -1) throw std::invalid_argument("z entries must be +1 or -1");
  }
  if (!(step > 0.0)) throw std::invalid_argument("grid step must be positive");
  std::vector<Point> agents;
  std::vector<int> axis_of;
  for (int j = 0; j < t; ++j) {
    Point plus(static_cast<std::size_t>(t), 0.5), minus(static_cast<std::size_t>(t), 0.5);
    plus[j] = 1.0;
    minus[j] = 0.0;
    for (int i = 0; i < r * (w + z[j]); ++i) {
      agents.push_back(plus);
      axis_of.push_back(j);
    }
    for (int i = 0; i < r * (w - z[j]); ++i) {
      agents.push_back(minus);
      axis_of.push_back(j);
    }
  }
  std::vector<double> axis;
  for (int i = 0;; ++i) {
    const double v = 0.25 + i * step;
    if (v > 0.75 + 1e-12) break;
    axis.push_back(std::min(v, 0.75));
  }
  if (axis.back() < 0.75 - 1e-12) axis.push_back(0.75);
  std::vector<Point> candidates;
  std::vector<std::size_t> idx(static_cast<std::size_t>(t), 0);
  while (true) {
    Point p(static_cast<std::size_t>(t));
    for (int d = 0; d < t; ++d) p[d] = axis[idx[d]];
    candidates.push_back(std::move(p));
    int d = t - 1;
    while (d >= 0 && ++idx[d] == axis.size()) idx[d--] = 0;
    if (d < 0) break;
    if (candidates.size() > kCoverCap) throw std::length_error("candidate grid too large");
  }
  Point q_star(static_cast<std::size_t>(t));
  for (int j = 0; j < t; ++j) q_star[j] = 0.5 + 0.25 * z[j];
  FacilityInstance inst(MetricSpace::box(t, Norm::kLinf), std::move(candidates), std::move(agents));
  return LinfLowerInstance{std::move(inst), z, t, w, r, std::move(q_star), std::move(axis_of)};
}

double axis_cost(const LinfLowerInstance& li, const Point& q, int j) {
  const auto& agents = li.instance.agents();
  long double s = 0.0L;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    if (li.agent_axis[i] == j) s += li.instance.space().distance(q, agents[i]);
  }
  return static_cast<double>(s / static_cast<long double>(agents.size()));
}

FacilityInstance random_line_instance(std::size_t n, std::size_t grid_points, Rng& rng) {
  if (grid_points < 2) throw std::invalid_argument("grid needs at least two points");
  std::vector<Point> agents;
  for (std::size_t i = 0; i < n; ++i) agents.push_back({uniform01(rng)});
  std::vector<Point> candidates;
  for (std::size_t g = 0; g < grid_points; ++g) {
    candidates.push_back({static_cast<double>(g) / static_cast<double>(grid_points - 1)});
  }
  return FacilityInstance(MetricSpace::unit_interval(), std::move(candidates), std::move(agents));
}

EstimateWithCI tail_probability(const FacilityInstance& inst, std::size_t k, double T,
                                std::size_t trials, std::uint64_t seed, SamplingMode mode) {
  const std::size_t q_star = population_optimum_index(inst);
  const double bound = T * social_cost_at(inst, q_star) + kMetricTolerance;
  const auto& cs = inst.candidates();
  return monte_carlo({inst.n(), k, mode, trials, seed}, [&](const Panel& p, Rng&) {
    const std::size_t q = panel_optimum_index(inst, p);
    return inst.space().distance(cs[q], cs[q_star]) <= bound ? 1.0 : 0.0;
  }, Interval::kProportion);
}

Probability exact_far_probability(const FacilityInstance& inst, std::size_t k, double threshold,
                                  SamplingMode mode) {
  const std::size_t q_star = population_optimum_index(inst);
  const auto& cs = inst.candidates();
  Probability total(0);
  for_each_panel(inst.n(), k, mode, [&](const Panel& p, const Probability& pr) {
    const std::size_t q = panel_optimum_index(inst, p);
    if (inst.space().distance(cs[q], cs[q_star]) >= threshold - kMetricTolerance) total += pr;
  });
  return total;
}

EstimateWithCI expected_panel_choice_cost(const FacilityInstance& inst, std::size_t k,
                                          std::size_t trials, std::uint64_t seed,
                                          SamplingMode mode) {
  return monte_carlo({inst.n(), k, mode, trials, seed}, [&](const Panel& p, Rng&) {
    return social_cost_at(inst, panel_optimum_index(inst, p));
  });
}

}  // namespace sortition
