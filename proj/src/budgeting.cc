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

#include "sortition/budgeting.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace sortition {
namespace {

constexpr double kValidationTolerance = 1e-12;
constexpr double kCoreBudgetSlack = 1e-9;
constexpr double kCoreStrictMargin = 1e-12;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::size_t grid_size(const GridTable& g) {
  std::size_t total = 1;
  for (std::size_t d = 0; d < g.m; ++d) {
    if (total > kSimplexCoverCap) throw std::length_error("grid table too large");
    total *= g.points_per_axis;
  }
  return total;
}

// Visits every adjacent pair (lo, hi) along every axis of a grid table.
template <class F>
void for_adjacent_pairs(const GridTable& g, F&& visit) {
  const std::size_t total = grid_size(g);
  const std::size_t p = g.points_per_axis;
  std::size_t stride = 1;
  for (std::size_t axis = 0; axis < g.m; ++axis) {
    for (std::size_t idx = 0; idx < total; ++idx) {
      if ((idx / stride) % p + 1 < p) visit(g.values[idx], g.values[idx + stride]);
    }
    stride *= p;
  }
}

double eval_grid(const GridTable& g, std::span<const double> x) {
  const std::size_t p = g.points_per_axis;
  const double cells = static_cast<double>(p - 1);
  std::vector<std::size_t> base(g.m);
  std::vector<double> frac(g.m);
  for (std::size_t d = 0; d < g.m; ++d) {
    const double pos = x[d] * cells;
    const auto i = std::min(static_cast<std::size_t>(std::floor(pos)), p - 2);
    base[d] = i;
    frac[d] = pos - static_cast<double>(i);
  }
  double acc = 0.0;
  for (std::size_t corner = 0; corner < (std::size_t{1} << g.m); ++corner) {
    double weight = 1.0;
    std::size_t idx = 0;
    for (std::size_t d = 0; d < g.m; ++d) {
      const bool up = (corner >> d) & 1U;
      weight *= up ? frac[d] : 1.0 - frac[d];
      idx = idx * p + base[d] + (up ? 1 : 0);
    }
    if (weight != 0.0) acc += weight * g.values[idx];
  }
  return acc;
}

struct Group {
  const CostModel* model;
  double weight;
  std::vector<std::size_t> agents;
};

std::vector<Group> group_agents(const PBInstance& inst, std::span<const double> weights) {
  if (!weights.empty() && weights.size() != inst.n()) {
    throw std::invalid_argument("one weight per agent");
  }
  std::vector<Group> groups;
  for (std::size_t i = 0; i < inst.n(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    if (w < 0.0) throw std::invalid_argument("weights must be nonnegative");
    if (w == 0.0) continue;
    const CostModel& c = inst.costs()[i];
    auto it = std::find_if(groups.begin(), groups.end(),
                           [&](const Group& g) { return *g.model == c; });
    if (it == groups.end()) {
      groups.push_back({&c, w, {i}});
    } else {
      it->weight += w;
      it->agents.push_back(i);
    }
  }
  if (groups.empty()) throw std::invalid_argument("weights must have positive total");
  return groups;
}

double total_weight(const std::vector<Group>& groups) {
  double s = 0.0;
  for (const auto& g : groups) s += g.weight;
  return s;
}

double grouped_cost(const std::vector<Group>& groups, std::span<const double> x) {
  long double s = 0.0L, w = 0.0L;
  for (const auto& g : groups) {
    s += static_cast<long double>(g.weight) * eval_cost(*g.model, x);
    w += g.weight;
  }
  return static_cast<double>(s / w);
}

std::optional<CoreWitness> grouped_core_check(const PBInstance& inst,
                                              const std::vector<Group>& groups,
                                              std::span<const double> x, double eta, double tau,
                                              double rho, std::span<const Allocation> cover) {
  const double total = total_weight(groups);
  std::vector<double> current;
  for (const auto& g : groups) current.push_back(eval_cost(*g.model, x));
  for (const auto& xp : cover) {
    const double spend = std::accumulate(xp.begin(), xp.end(), 0.0) / inst.budget() + eta;
    if (spend > 1.0 + kCoreBudgetSlack) continue;
    double share = 0.0;
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
      if (rho * eval_cost(*groups[gi].model, xp) + tau < current[gi] - kCoreStrictMargin) {
        share += groups[gi].weight;
      }
    }
    if (share > 0.0 && spend <= share / total + kCoreBudgetSlack) {
      CoreWitness w{{}, xp};
      for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        if (rho * eval_cost(*groups[gi].model, xp) + tau < current[gi] - kCoreStrictMargin) {
          w.coalition.insert(w.coalition.end(), groups[gi].agents.begin(),
                             groups[gi].agents.end());
        }
      }
      std::sort(w.coalition.begin(), w.coalition.end());
      return w;
    }
  }
  return std::nullopt;
}

std::optional<Allocation> grouped_core_search(const PBInstance& inst,
                                              const std::vector<Group>& groups, double eta,
                                              double tau, double rho,
                                              std::span<const Allocation> cover) {
  for (const auto& x : cover) {
    if (!grouped_core_check(inst, groups, x, eta, tau, rho, cover)) return x;
  }
  return std::nullopt;
}

AllocationResult greedy_linear(const PBInstance& inst, std::span<const double> weights) {
  const std::size_t m = inst.m();
  std::vector<long double> agg(m, 0.0L);
  for (std::size_t i = 0; i < inst.n(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    const auto& lin = std::get<LinearCost>(inst.costs()[i]);
    for (std::size_t j = 0; j < m; ++j) agg[j] += static_cast<long double>(w) * lin.alpha[j];
  }
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return agg[a] > agg[b]; });
  Allocation x(m, 0.0);
  double left = inst.budget();
  for (std::size_t j : order) {
    if (left <= 0.0) break;
    x[j] = std::min(1.0, left);
    left -= x[j];
  }
  const double cost = pb_cost(inst, x, weights);
  return {std::move(x), cost};
}

void check_unit_cube(std::span<const double> x) {
  for (double v : x) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::out_of_range("allocation outside [0,1]^m");
  }
}

}  // namespace

std::size_t cost_dimension(const CostModel& model) {
  return std::visit(Overloaded{[](const LinearCost& c) { return c.alpha.size(); },
                               [](const SaturatingShortfall& c) { return c.m; },
                               [](const GridTable& c) { return c.m; }},
                    model);
}

void validate_cost(const CostModel& model) {
  std::visit(
      Overloaded{
          [](const LinearCost& c) {
            if (c.alpha.empty()) throw std::invalid_argument("linear cost needs alpha");
            double sum = 0.0;
            for (double a : c.alpha) {
              if (!(a >= 0.0 && a <= 1.0)) {
                throw std::invalid_argument("linear weights must lie in [0, 1]");
              }
              sum += a;
            }
            if (c.offset) {
              if (!(*c.offset >= 0.0 && *c.offset <= 1.0 + kValidationTolerance)) {
                throw std::invalid_argument("linear offset must lie in [0, 1]");
              }
            } else if (sum > 1.0 + kValidationTolerance) {
              throw std::invalid_argument("linear weights must sum to at most 1");
            }
          },
          [](const SaturatingShortfall& c) {
            if (c.m < 1) throw std::invalid_argument("shortfall cost needs m >= 1");
            if (!(c.b2 >= 0.0 && c.b2 <= static_cast<double>(c.m))) {
              throw std::invalid_argument("shortfall level must lie in [0, m]");
            }
          },
          [](const GridTable& g) {
            if (g.m < 1 || g.points_per_axis < 2) {
              throw std::invalid_argument("grid table needs m >= 1 and two points per axis");
            }
            if (g.values.size() != grid_size(g)) {
              throw std::invalid_argument("grid table has the wrong number of values");
            }
            for (double v : g.values) {
              if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("grid value outside [0, 1]");
            }
            const double h = 1.0 / static_cast<double>(g.points_per_axis - 1);
            for_adjacent_pairs(g, [&](double lo, double hi) {
              if (hi > lo + kValidationTolerance) {
                throw std::invalid_argument("grid table is not monotone");
              }
              if (lo - hi > h + kValidationTolerance) {
                throw std::invalid_argument("grid table is not 1-Lipschitz");
              }
            });
          }},
      model);
}

double lipschitz_constant(const CostModel& model) {
  return std::visit(
      Overloaded{[](const LinearCost& c) { return *std::max_element(c.alpha.begin(), c.alpha.end()); },
                 [](const SaturatingShortfall& c) { return c.b2 > 0.0 ? 1.0 / c.b2 : 0.0; },
                 [](const GridTable& g) {
                   double worst = 0.0;
                   for_adjacent_pairs(g, [&](double lo, double hi) {
                     worst = std::max(worst, std::fabs(lo - hi));
                   });
                   return worst * static_cast<double>(g.points_per_axis - 1);
                 }},
      model);
}

double eval_cost(const CostModel& model, std::span<const double> x) {
  if (x.size() != cost_dimension(model)) throw std::invalid_argument("allocation dimension");
  check_unit_cube(x);
  return std::visit(
      Overloaded{[&](const LinearCost& c) {
                   if (!c.offset) {
                     double s = 0.0;
                     for (std::size_t j = 0; j < x.size(); ++j) s += c.alpha[j] * (1.0 - x[j]);
                     return s;
                   }
                   double s = 0.0;
                   for (std::size_t j = 0; j < x.size(); ++j) s += c.alpha[j] * x[j];
                   return std::max(*c.offset - s, 0.0);
                 },
                 [&](const SaturatingShortfall& c) {
                   if (c.b2 == 0.0) return 0.0;
                   const double level = c.b2 / static_cast<double>(c.m);
                   double s = 0.0;
                   for (double v : x) s += std::max(level - v, 0.0);
                   return s / c.b2;
                 },
                 [&](const GridTable& g) { return eval_grid(g, x); }},
      model);
}

PBInstance::PBInstance(std::size_t m, double budget, std::vector<CostModel> costs)
    : m_(m), budget_(budget), costs_(std::move(costs)) {
  if (m_ < 2) throw std::invalid_argument("need at least two projects");
  if (!(budget_ > 0.0 && budget_ <= static_cast<double>(m_))) {
    throw std::invalid_argument("budget must lie in (0, m]");
  }
  if (costs_.empty()) throw std::invalid_argument("instance needs at least one agent");
  for (const auto& c : costs_) {
    if (cost_dimension(c) != m_) throw std::invalid_argument("cost model dimension differs from m");
    validate_cost(c);
  }
}

bool PBInstance::all_plain_linear() const {
  return std::all_of(costs_.begin(), costs_.end(), [](const CostModel& c) {
    const auto* lin = std::get_if<LinearCost>(&c);
    return lin != nullptr && !lin->offset;
  });
}

bool is_feasible(const PBInstance& inst, std::span<const double> x) {
  if (x.size() != inst.m()) return false;
  double s = 0.0;
  for (double v : x) {
    if (!(v >= 0.0 && v <= 1.0)) return false;
    s += v;
  }
  return s <= inst.budget() + kBudgetTolerance;
}

double pb_cost(const PBInstance& inst, std::span<const double> x, std::span<const double> weights) {
  if (!weights.empty() && weights.size() != inst.n()) {
    throw std::invalid_argument("one weight per agent");
  }
  long double s = 0.0L, total = 0.0L;
  for (std::size_t i = 0; i < inst.n(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    if (w == 0.0) continue;
    s += static_cast<long double>(w) * eval_cost(inst.costs()[i], x);
    total += w;
  }
  if (total <= 0.0L) throw std::invalid_argument("weights must have positive total");
  return static_cast<double>(s / total);
}

std::vector<Allocation> simplex_cover(std::size_t m, double budget, double step) {
  if (m < 1) throw std::invalid_argument("need at least one project");
  if (!(step > 0.0)) throw std::invalid_argument("cover step must be positive");
  if (!(budget >= 0.0)) throw std::invalid_argument("budget must be nonnegative");
  std::vector<double> axis;
  for (std::size_t i = 0;; ++i) {
    const double v = static_cast<double>(i) * step;
    if (v >= 1.0 - 1e-12) break;
    axis.push_back(v);
  }
  axis.push_back(1.0);

  std::vector<Allocation> out;
  auto push = [&](Allocation p) {
    out.push_back(std::move(p));
    if (out.size() > kSimplexCoverCap) {
      throw std::length_error("simplex cover exceeds 1e7 points; use a coarser step");
    }
  };
  Allocation cur(m, 0.0);
  // Depth-first in lexicographic order, pruned by the running sum.
  auto rec = [&](auto&& self, std::size_t d, double sum) -> void {
    if (d == m) {
      push(cur);
      for (std::size_t j = 0; j < m; ++j) {
        if (cur[j] != 0.0) continue;
        const double raised = std::min(1.0, budget - (sum - cur[j]));
        if (raised > 0.0) {
          Allocation p = cur;
          p[j] = raised;
          push(std::move(p));
        }
      }
      return;
    }
    for (double v : axis) {
      if (sum + v > budget + kBudgetTolerance) break;
      cur[d] = v;
      self(self, d + 1, sum + v);
    }
    cur[d] = 0.0;
  };
  rec(rec, 0, 0.0);
  std::sort(out.begin(), out.end());
  auto near = [](const Allocation& a, const Allocation& b) {
    for (std::size_t j = 0; j < a.size(); ++j) {
      if (std::fabs(a[j] - b[j]) > 1e-12) return false;
    }
    return true;
  };
  out.erase(std::unique(out.begin(), out.end(), near), out.end());
  return out;
}

AllocationResult optimal_allocation(const PBInstance& inst, std::span<const double> weights,
                                    std::span<const Allocation> cover) {
  if (!weights.empty() && weights.size() != inst.n()) {
    throw std::invalid_argument("one weight per agent");
  }
  if (inst.all_plain_linear()) return greedy_linear(inst, weights);
  if (cover.empty()) throw std::invalid_argument("cover must be nonempty");
  const auto groups = group_agents(inst, weights);
  AllocationResult best{{}, std::numeric_limits<double>::infinity()};
  for (const auto& x : cover) {
    const double c = grouped_cost(groups, x);
    if (best.x.empty() || c < best.cost - kValidationTolerance) best = {x, c};
  }
  return best;
}

std::optional<CoreWitness> core_check(const PBInstance& inst, std::span<const double> x,
                                      double eta, double tau, double rho,
                                      std::span<const Allocation> cover,
                                      std::span<const double> weights) {
  if (!is_feasible(inst, x)) throw std::invalid_argument("allocation is not feasible");
  return grouped_core_check(inst, group_agents(inst, weights), x, eta, tau, rho, cover);
}

std::optional<Allocation> core_search(const PBInstance& inst, double eta, double tau, double rho,
                                      std::span<const Allocation> cover,
                                      std::span<const double> weights) {
  return grouped_core_search(inst, group_agents(inst, weights), eta, tau, rho, cover);
}

double core_cover_step(double eps, double rho, double budget, std::size_t m) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  return eps / (4.0 * std::max(rho, budget) * static_cast<double>(m));
}

WelfareReport welfare_experiment(const PBInstance& inst, std::size_t k, double eps, double rho,
                                 double tau, std::size_t trials, std::uint64_t seed,
                                 std::span<const Allocation> cover) {
  if (rho < 1.0 || tau < 0.0) throw std::invalid_argument("need rho >= 1 and tau >= 0");
  const bool exact = rho == 1.0 && tau == 0.0;
  WelfareReport rep;
  rep.social_opt = optimal_allocation(inst, {}, cover).cost;
  rep.social_cost = monte_carlo({inst.n(), k, SamplingMode::kWithoutReplacement, trials, seed},
                                [&](const Panel& p, Rng&) {
    const auto w = panel_weights(inst.n(), p);
    const auto opt = optimal_allocation(inst, w, cover);
    if (exact) return pb_cost(inst, opt.x, {});
    const auto groups = group_agents(inst, w);
    const double limit = rho * opt.cost + tau + kValidationTolerance;
    const Allocation* pick = &opt.x;
    double worst = -1.0;
    for (const auto& x : cover) {
      const double c = grouped_cost(groups, x);
      if (c <= limit && c > worst) {
        worst = c;
        pick = &x;
      }
    }
    return pb_cost(inst, *pick, {});
  });
  const double target = rho * rep.social_opt + tau;
  rep.gap = rep.social_cost.mean - target;
  rep.bound = target + eps;
  rep.within = rep.social_cost.mean <= rep.bound + 3.0 * rep.social_cost.half_width_95;
  return rep;
}

CoreReport core_extrapolation_experiment(const PBInstance& inst, std::size_t k, double eps,
                                         double eta, double tau, double rho, std::size_t trials,
                                         std::uint64_t seed,
                                         std::span<const Allocation> panel_cover) {
  CoreReport rep;
  rep.population_step = core_cover_step(eps, rho, inst.budget(), inst.m());
  const auto population_cover = simplex_cover(inst.m(), inst.budget(), rep.population_step);
  const auto everyone = group_agents(inst, {});
  const std::size_t m = inst.m();
  const std::size_t dim = 2 + m;
  const auto rows = run_trials({inst.n(), k, SamplingMode::kWithoutReplacement, trials, seed}, dim,
                               [&](const Panel& p, Rng&, std::span<double> row) {
    const auto groups = group_agents(inst, panel_weights(inst.n(), p));
    const auto found = grouped_core_search(inst, groups, eta, tau, rho, panel_cover);
    if (!found) {
      row[0] = 1.0;
      row[1] = 1.0;
      return;
    }
    const bool blocked =
        grouped_core_check(inst, everyone, *found, eta + eps, tau + eps, rho, population_cover)
            .has_value();
    row[0] = blocked ? 1.0 : 0.0;
    row[1] = 0.0;
    std::copy(found->begin(), found->end(), row.begin() + 2);
  });
  rep.failure_rate = estimate_column(rows, dim, 0, Interval::kProportion);
  for (std::size_t t = 0; t < trials; ++t) {
    const double* row = rows.data() + t * dim;
    if (row[1] == 1.0) {
      ++rep.unresolved;
      rep.failures.push_back({t, {}});
    } else if (row[0] == 1.0) {
      rep.failures.push_back({t, Allocation(row + 2, row + dim)});
    }
  }
  return rep;
}

PBInstance pb_lower_instance(std::span<const int> z, int h, int w, int r, std::size_t m) {
  const auto pop = make_camouflaged(z, h, w, r);
  const std::size_t projects = static_cast<std::size_t>(2 * h);
  if (m == 0) m = projects;
  if (m < projects) throw std::invalid_argument("m must be at least 2h");
  std::vector<CostModel> costs;
  for (int label : pop.labels()) {
    LinearCost c{std::vector<double>(m, 0.0), std::nullopt};
    c.alpha[static_cast<std::size_t>(label - 1)] = 1.0;
    costs.emplace_back(std::move(c));
  }
  return PBInstance(m, std::floor(static_cast<double>(m) / 2.0), std::move(costs));
}

PBImpossibility pb_impossibility_family(std::size_t m, double budget, std::size_t n) {
  const double md = static_cast<double>(m);
  if (m < 2) throw std::invalid_argument("need at least two projects");
  if (!(budget > 0.0 && budget < md)) throw std::invalid_argument("need 0 < B < m");
  if (n < 2) throw std::invalid_argument("need at least two agents");
  double b1 = budget, b2 = 0.0;
  if (budget >= 1.0) {
    b1 = (md - budget) / (md - 1.0);
    b2 = (md * budget - md) / (md - 1.0);
  }
  const double level = b2 / md;
  const double top = b1 + level;
  auto build = [&](std::size_t favoured) {
    std::vector<CostModel> costs(n - 1, SaturatingShortfall{m, b2});
    LinearCost last{std::vector<double>(m, 0.0), top};
    last.alpha[favoured] = 1.0;
    costs.emplace_back(std::move(last));
    return PBInstance(m, budget, std::move(costs));
  };
  auto zero = [&](std::size_t favoured) {
    Allocation x(m, level);
    x[favoured] = top;
    return x;
  };
  return PBImpossibility{b1, b2, build(0), build(1), zero(0), zero(1)};
}

PBInstance random_linear_instance(std::size_t n, std::size_t m, double budget, Rng& rng) {
  std::vector<CostModel> costs;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> alpha(m);
    double s = 0.0;
    for (auto& a : alpha) {
      a = uniform01(rng);
      s += a;
    }
    if (s > 1.0) {
      for (auto& a : alpha) a /= s;
    }
    costs.emplace_back(LinearCost{std::move(alpha), std::nullopt});
  }
  return PBInstance(m, budget, std::move(costs));
}

EstimateWithCI recovery_success(std::span<const int> z, int h, int w, int r, std::size_t k,
                                std::size_t trials, std::uint64_t seed) {
  const auto pop = make_camouflaged(z, h, w, r);
  const auto& labels = pop.labels();
  return monte_carlo({pop.n(), k, SamplingMode::kWithoutReplacement, trials, seed},
                     [&](const Panel& p, Rng&) {
    std::vector<int> values;
    for (std::size_t m : p.members()) values.push_back(labels[m]);
    const auto g = majority_estimator(values, h);
    int dist = 0;
    for (int j = 0; j < h; ++j) dist += std::abs(g[j] - z[j]);
    return static_cast<double>(dist) <= h / 4.0 ? 1.0 : 0.0;
  }, Interval::kProportion);
}

}  // namespace sortition
