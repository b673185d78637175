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

#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "oracles.h"

namespace sortition {
namespace {

using oracle::Rational;

PBInstance two_blocks(std::size_t half, double budget = 1.0) {
  std::vector<CostModel> costs;
  for (std::size_t i = 0; i < half; ++i) costs.push_back(LinearCost{{1.0, 0.0}, std::nullopt});
  for (std::size_t i = 0; i < half; ++i) costs.push_back(LinearCost{{0.0, 1.0}, std::nullopt});
  return PBInstance(2, budget, costs);
}

Allocation random_point(Rng& rng, std::size_t m) {
  Allocation x(m);
  for (auto& v : x) v = uniform01(rng);
  return x;
}

TEST(EvalCost, Examples) {
  const CostModel lin = LinearCost{{0.5, 0.5}, std::nullopt};
  EXPECT_DOUBLE_EQ(eval_cost(lin, std::vector<double>{1, 0}), 0.5);
  EXPECT_EQ(eval_cost(lin, std::vector<double>{1, 1}), 0.0);
  const CostModel sat = SaturatingShortfall{2, 1.0};
  EXPECT_DOUBLE_EQ(eval_cost(sat, std::vector<double>{0.5, 0}), 0.5);
  EXPECT_EQ(eval_cost(SaturatingShortfall{2, 0.0}, std::vector<double>{0, 0}), 0.0);
  const CostModel off = LinearCost{{1.0, 0.0}, 0.75};
  EXPECT_DOUBLE_EQ(eval_cost(off, std::vector<double>{0.5, 0}), 0.25);
  EXPECT_EQ(eval_cost(off, std::vector<double>{1, 0}), 0.0);
  EXPECT_THROW(eval_cost(lin, std::vector<double>{1.5, 0}), std::out_of_range);
  EXPECT_THROW(eval_cost(lin, std::vector<double>{1}), std::invalid_argument);
}

TEST(EvalCost, GridTableInterpolates) {
  // cost(x) = 1 - (x1 + x2) / 2 sampled on a 3 x 3 grid.
  GridTable g{2, 3, {}};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) g.values.push_back(1.0 - (i / 2.0 + j / 2.0) / 2.0);
  }
  EXPECT_NO_THROW(validate_cost(g));
  Rng rng(1);
  for (int rep = 0; rep < 100; ++rep) {
    const auto x = random_point(rng, 2);
    EXPECT_NEAR(eval_cost(g, x), 1.0 - (x[0] + x[1]) / 2.0, 1e-12);
  }
}

TEST(ValidateCost, RejectsBadModels) {
  EXPECT_THROW(validate_cost(LinearCost{{0.7, 0.7}, std::nullopt}), std::invalid_argument);
  EXPECT_THROW(validate_cost(LinearCost{{-0.1, 0.5}, std::nullopt}), std::invalid_argument);
  EXPECT_THROW(validate_cost(SaturatingShortfall{2, 3.0}), std::invalid_argument);
  // Increasing along the first axis.
  EXPECT_THROW(validate_cost(GridTable{2, 2, {0.0, 0.0, 0.5, 0.5}}), std::invalid_argument);
  // Drop of 1 over a step of 1/2: Lipschitz constant 2.
  EXPECT_THROW(validate_cost(GridTable{1, 3, {1.0, 0.0, 0.0}}), std::invalid_argument);
  EXPECT_THROW(validate_cost(GridTable{1, 3, {1.0, 0.5}}), std::invalid_argument);
  EXPECT_NO_THROW(validate_cost(GridTable{1, 3, {1.0, 0.5, 0.0}}));
}

TEST(CostProperties, LipschitzAndMonotone) {
  Rng rng(2);
  std::vector<CostModel> models{
      LinearCost{{0.2, 0.3, 0.5}, std::nullopt}, LinearCost{{1.0, 0.0, 0.0}, std::nullopt},
      LinearCost{{0.0, 1.0, 0.0}, 0.8},          SaturatingShortfall{3, 1.5},
      SaturatingShortfall{3, 3.0},               SaturatingShortfall{3, 0.0}};
  GridTable g{3, 3, {}};
  for (int i = 0; i < 27; ++i) {
    const int a = i / 9, b = (i / 3) % 3, c = i % 3;
    g.values.push_back(1.0 - (a + b) / 4.0 * 0.9 - (c == 2 ? 0.05 : 0.0));
  }
  models.push_back(g);
  for (const auto& model : models) {
    ASSERT_NO_THROW(validate_cost(model));
    const double L = lipschitz_constant(model);
    if (!std::holds_alternative<SaturatingShortfall>(model)) {
      EXPECT_LE(L, 1.0 + 1e-12);
    }
    for (int rep = 0; rep < 1000; ++rep) {
      const auto x = random_point(rng, 3), y = random_point(rng, 3);
      double l1 = 0.0;
      for (int j = 0; j < 3; ++j) l1 += std::fabs(x[j] - y[j]);
      const double cx = eval_cost(model, x), cy = eval_cost(model, y);
      EXPECT_LE(std::fabs(cx - cy), L * l1 + 1e-9);
      EXPECT_GE(cx, -1e-12);
      EXPECT_LE(cx, 1.0 + 1e-12);
      Allocation hi = x;
      for (int j = 0; j < 3; ++j) hi[j] = std::max(x[j], y[j]);
      EXPECT_LE(eval_cost(model, hi), cx + 1e-12);
    }
  }
  EXPECT_DOUBLE_EQ(lipschitz_constant(SaturatingShortfall{3, 1.5}), 1.0 / 1.5);
  EXPECT_EQ(lipschitz_constant(SaturatingShortfall{3, 0.0}), 0.0);
}

TEST(PBInstance, Validates) {
  EXPECT_THROW(PBInstance(1, 1.0, {LinearCost{{1.0}, std::nullopt}}), std::invalid_argument);
  EXPECT_THROW(PBInstance(2, 3.0, {LinearCost{{1.0, 0.0}, std::nullopt}}), std::invalid_argument);
  EXPECT_THROW(PBInstance(2, 0.0, {LinearCost{{1.0, 0.0}, std::nullopt}}), std::invalid_argument);
  EXPECT_THROW(PBInstance(2, 1.0, {}), std::invalid_argument);
  EXPECT_THROW(PBInstance(2, 1.0, {LinearCost{{1.0, 0.0, 0.0}, std::nullopt}}), std::invalid_argument);
  const auto inst = two_blocks(1);
  EXPECT_TRUE(is_feasible(inst, std::vector<double>{0.5, 0.5}));
  EXPECT_FALSE(is_feasible(inst, std::vector<double>{0.75, 0.5}));
}

TEST(SimplexCover, StepHalf) {
  const auto cover = simplex_cover(2, 1.0, 0.5);
  const std::vector<Allocation> expect{{0, 0}, {0, 0.5}, {0, 1}, {0.5, 0}, {0.5, 0.5}, {1, 0}};
  EXPECT_EQ(cover, expect);
}

TEST(SimplexCover, CoarseStepGivesCorners) {
  EXPECT_EQ(simplex_cover(2, 1.0, 1.0), (std::vector<Allocation>{{0, 0}, {0, 1}, {1, 0}}));
  EXPECT_EQ(simplex_cover(3, 1.0, 2.0),
            (std::vector<Allocation>{{0, 0, 0}, {0, 0, 1}, {0, 1, 0}, {1, 0, 0}}));
  EXPECT_THROW(simplex_cover(2, 1.0, 0.0), std::invalid_argument);
  EXPECT_THROW(simplex_cover(6, 3.0, 1e-3), std::length_error);
}

TEST(SimplexCover, CoveringRadius) {
  Rng rng(3);
  struct Case {
    std::size_t m;
    double budget, step;
  };
  for (const auto& c : {Case{2, 1.0, 0.1}, Case{3, 1.5, 0.2}, Case{3, 0.7, 0.25}, Case{2, 1.3, 0.3}}) {
    const auto cover = simplex_cover(c.m, c.budget, c.step);
    for (const auto& p : cover) EXPECT_LE(std::accumulate(p.begin(), p.end(), 0.0), c.budget + 1e-12);
    int found = 0;
    while (found < 10000 / 4) {
      const auto x = random_point(rng, c.m);
      if (std::accumulate(x.begin(), x.end(), 0.0) > c.budget) continue;
      ++found;
      double best = std::numeric_limits<double>::infinity();
      for (const auto& p : cover) {
        double d = 0.0;
        for (std::size_t j = 0; j < c.m; ++j) d += std::fabs(p[j] - x[j]);
        best = std::min(best, d);
      }
      EXPECT_LE(best, c.m * c.step / 2.0 + 1e-12);
    }
  }
}

TEST(OptimalAllocation, GreedyExample) {
  const PBInstance inst(2, 1.0, {LinearCost{{1.0, 0.0}, std::nullopt}, LinearCost{{0.0, 0.5}, std::nullopt}});
  const auto r = optimal_allocation(inst, {}, {});
  EXPECT_EQ(r.x, (Allocation{1.0, 0.0}));
  EXPECT_DOUBLE_EQ(r.cost, 0.25);
  const auto cover = simplex_cover(2, 1.0, 0.01);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& x : cover) best = std::min(best, pb_cost(inst, x));
  EXPECT_NEAR(best, 0.25, 1e-12);
}

TEST(OptimalAllocation, FullBudgetFundsEverything) {
  const PBInstance inst(3, 3.0, {LinearCost{{0.2, 0.3, 0.1}, std::nullopt}, LinearCost{{0.5, 0.0, 0.5}, std::nullopt}});
  const auto r = optimal_allocation(inst, {}, {});
  EXPECT_EQ(r.x, (Allocation{1.0, 1.0, 1.0}));
  EXPECT_EQ(r.cost, 0.0);
}

TEST(OptimalAllocation, GreedyMatchesGridSearch) {
  Rng rng(4);
  for (int rep = 0; rep < 30; ++rep) {
    const auto inst = random_linear_instance(5, 2, 0.3 + 1.4 * uniform01(rng), rng);
    const auto cover = simplex_cover(2, inst.budget(), 0.01);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& x : cover) best = std::min(best, pb_cost(inst, x));
    const auto r = optimal_allocation(inst, {}, {});
    EXPECT_LE(r.cost, best + 1e-12);
    EXPECT_NEAR(r.cost, pb_cost(inst, r.x), 1e-12);
    EXPECT_TRUE(is_feasible(inst, r.x));
  }
}

TEST(OptimalAllocation, ImpossibilityInstancesHaveZeroCostOptimum) {
  for (auto [m, B] : {std::pair<std::size_t, double>{2, 1.0}, {3, 2.0}, {4, 1.0}}) {
    const auto fam = pb_impossibility_family(m, B, 6);
    const auto cover = simplex_cover(m, B, 0.25);
    const auto a = optimal_allocation(fam.first, {}, cover);
    EXPECT_NEAR(a.cost, 0.0, 1e-12);
    EXPECT_NEAR(pb_cost(fam.first, fam.zero_first), 0.0, 1e-12);
    EXPECT_NEAR(pb_cost(fam.second, fam.zero_second), 0.0, 1e-12);
    EXPECT_NEAR(fam.zero_first[0], fam.b1 + fam.b2 / m, 1e-12);
    for (std::size_t j = 1; j < m; ++j) EXPECT_NEAR(fam.zero_first[j], fam.b2 / m, 1e-12);
  }
}

TEST(PBImpossibility, BudgetSplits) {
  auto f = pb_impossibility_family(2, 1.0, 4);
  EXPECT_DOUBLE_EQ(f.b1, 1.0);
  EXPECT_DOUBLE_EQ(f.b2, 0.0);
  f = pb_impossibility_family(3, 2.0, 4);
  EXPECT_DOUBLE_EQ(f.b1, 0.5);
  EXPECT_DOUBLE_EQ(f.b2, 1.5);
  EXPECT_NEAR(f.b1 + f.b2, 2.0, 1e-15);
  EXPECT_LE(f.b1 + f.b2 / 3, 1.0 + 1e-15);
  EXPECT_THROW(pb_impossibility_family(2, 2.0, 4), std::invalid_argument);
  EXPECT_THROW(pb_impossibility_family(2, 1.0, 1), std::invalid_argument);
}

TEST(PBImpossibility, EveryFixedDecisionFailsOnOneInstance) {
  for (auto [m, B] : {std::pair<std::size_t, double>{2, 1.0}, {3, 2.0}, {3, 1.0}}) {
    const auto cover = simplex_cover(m, B, 0.25);
    for (std::size_t k = 1; k <= 4; ++k) {
      const std::size_t n = k + 2;
      const auto fam = pb_impossibility_family(m, B, n);
      auto expected = [&](const PBInstance& inst, const Allocation& zero, const Allocation& fixed) {
        long double acc = 0.0L;
        for_each_panel(n, k, SamplingMode::kWithoutReplacement, [&](const Panel& p, const Probability& pr) {
          const bool sees_last = p.members().back() == n - 1;
          acc += boost::rational_cast<double>(pr) * pb_cost(inst, sees_last ? zero : fixed);
        });
        return static_cast<double>(acc);
      };
      for (const auto& x : cover) {
        const double worst = std::max(expected(fam.first, fam.zero_first, x),
                                      expected(fam.second, fam.zero_second, x));
        EXPECT_GT(worst, 1e-9) << "m=" << m << " k=" << k;
      }
    }
  }
}

TEST(CoreCheck, SingleAgentAtItsOptimum) {
  const PBInstance inst(2, 1.0, {LinearCost{{0.3, 0.7}, std::nullopt}});
  const auto x = optimal_allocation(inst, {}, {}).x;
  EXPECT_FALSE(core_check(inst, x, 0, 0, 1, simplex_cover(2, 1.0, 0.05)).has_value());
}

TEST(CoreCheck, TwoBlocksWitness) {
  const auto inst = two_blocks(3);
  const auto cover = simplex_cover(2, 1.0, 0.25);
  const auto w = core_check(inst, std::vector<double>{1, 0}, 0, 0, 1, cover);
  ASSERT_TRUE(w.has_value());
  EXPECT_EQ(w->coalition, (std::vector<std::size_t>{3, 4, 5}));
  EXPECT_EQ(w->x_prime, (Allocation{0, 0.25}));
  const std::vector<Allocation> half{{0, 0.5}};
  const auto w2 = core_check(inst, std::vector<double>{1, 0}, 0, 0, 1, half);
  ASSERT_TRUE(w2.has_value());
  EXPECT_EQ(w2->coalition, (std::vector<std::size_t>{3, 4, 5}));
}

TEST(CoreCheck, BalancedAllocationIsInTheCore) {
  const auto inst = two_blocks(3);
  EXPECT_FALSE(core_check(inst, std::vector<double>{0.5, 0.5}, 0, 0, 1, simplex_cover(2, 1.0, 0.25)));
  EXPECT_FALSE(core_check(inst, std::vector<double>{0.5, 0.5}, 0, 0, 1, simplex_cover(2, 1.0, 0.01)));
  EXPECT_EQ(core_search(inst, 0, 0, 1, simplex_cover(2, 1.0, 0.25)), (Allocation{0.5, 0.5}));
}

TEST(CoreCheck, WitnessesSurviveExactArithmetic) {
  Rng rng(5);
  const std::int64_t denom = 20;
  std::size_t witnesses = 0;
  for (int rep = 0; rep < 300; ++rep) {
    const std::size_t m = 2 + rep % 2, n = 2 + uniform_index(rng, 6);
    const double budget = static_cast<double>(1 + uniform_index(rng, 2 * m - 1)) / 2.0;
    std::vector<CostModel> costs;
    std::vector<std::vector<Rational>> alphas;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::int64_t> a(m);
      std::int64_t left = denom;
      for (auto& v : a) {
        v = static_cast<std::int64_t>(uniform_index(rng, left + 1));
        left -= v;
      }
      std::vector<double> ad;
      std::vector<Rational> ar;
      for (auto v : a) {
        ad.push_back(static_cast<double>(v) / denom);
        ar.push_back(Rational(v, denom));
      }
      costs.push_back(LinearCost{ad, std::nullopt});
      alphas.push_back(ar);
    }
    const PBInstance inst(m, budget, costs);
    const auto cover = simplex_cover(m, budget, 0.25);
    const auto& x = cover[uniform_index(rng, cover.size())];
    const double eta = static_cast<double>(uniform_index(rng, 3)) / 10.0;
    const double tau = static_cast<double>(uniform_index(rng, 3)) / 10.0;
    const double rho = 1.0 + static_cast<double>(uniform_index(rng, 2)) / 2.0;
    const auto w = core_check(inst, x, eta, tau, rho, cover);
    if (!w) continue;
    ++witnesses;
    auto exact_cost = [&](std::size_t i, const Allocation& y) {
      Rational c(0);
      for (std::size_t j = 0; j < m; ++j) c += alphas[i][j] * (Rational(1) - oracle::to_rational(y[j], 4));
      return c;
    };
    Rational spend(0);
    for (double v : w->x_prime) spend += oracle::to_rational(v, 4);
    spend /= oracle::to_rational(budget, 2);
    spend += oracle::to_rational(eta, 10);
    ASSERT_FALSE(w->coalition.empty());
    EXPECT_LE(spend, Rational(static_cast<std::int64_t>(w->coalition.size()), static_cast<std::int64_t>(n)));
    for (auto i : w->coalition) {
      EXPECT_LT(oracle::to_rational(rho, 2) * exact_cost(i, w->x_prime) + oracle::to_rational(tau, 10),
                exact_cost(i, x));
    }
  }
  EXPECT_GT(witnesses, 20u);
}

TEST(WelfareExperiment, IdenticalAgentsHaveNoGap) {
  const PBInstance inst(2, 1.0, std::vector<CostModel>(10, LinearCost{{0.6, 0.4}, std::nullopt}));
  const auto r = welfare_experiment(inst, 1, 0.1, 1.0, 0.0, 200, 1, {});
  EXPECT_NEAR(r.gap, 0.0, 1e-12);
  EXPECT_TRUE(r.within);
}

TEST(WelfareExperiment, FullPanelOnLowerInstance) {
  const std::vector<int> z{1, -1};
  const auto inst = pb_lower_instance(z, 2, 2, 2);
  const auto r = welfare_experiment(inst, inst.n(), 0.1, 1.0, 0.0, 50, 2, {});
  EXPECT_NEAR(r.gap, 0.0, 1e-12);
}

TEST(WelfareExperiment, RandomLinearWithinEps) {
  Rng rng(6);
  for (int rep = 0; rep < 5; ++rep) {
    const auto inst = random_linear_instance(200, 2, 1.0, rng);
    const auto r = welfare_experiment(inst, 64, 0.1, 1.0, 0.0, 1000, 10 + rep, {});
    EXPECT_LE(r.gap, 0.1 + 3 * r.social_cost.half_width_95);
    EXPECT_GE(r.gap, -1e-12);
  }
}

TEST(WelfareExperiment, GapShrinksWithK) {
  Rng rng(7);
  const auto inst = random_linear_instance(200, 2, 1.0, rng);
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t k : {2u, 16u, 128u}) {
    const auto r = welfare_experiment(inst, k, 0.1, 1.0, 0.0, 2000, 3, {});
    EXPECT_LE(r.gap, previous + 3 * r.social_cost.half_width_95);
    previous = r.gap;
  }
}

TEST(WelfareExperiment, PerturbedDecisionStaysWithinTheRelaxedBound) {
  Rng rng(8);
  const auto inst = random_linear_instance(100, 2, 1.0, rng);
  const auto cover = simplex_cover(2, 1.0, 0.05);
  const auto r = welfare_experiment(inst, 64, 0.1, 1.5, 0.05, 300, 4, cover);
  EXPECT_LE(r.gap, 0.1 + 3 * r.social_cost.half_width_95);
  const auto exact = welfare_experiment(inst, 64, 0.1, 1.0, 0.0, 300, 4, cover);
  EXPECT_GE(r.social_cost.mean, exact.social_cost.mean - 1e-12);
}

TEST(CoreExtrapolation, IdenticalAgentsNeverFail) {
  const PBInstance inst(2, 1.0, std::vector<CostModel>(20, LinearCost{{0.5, 0.5}, std::nullopt}));
  const auto r = core_extrapolation_experiment(inst, 4, 0.25, 0, 0, 1, 100, 1, simplex_cover(2, 1.0, 0.25));
  EXPECT_EQ(r.failure_rate.mean, 0.0);
  EXPECT_EQ(r.unresolved, 0u);
}

TEST(CoreExtrapolation, TwoBlocksRarelyFail) {
  const auto inst = two_blocks(100);
  const auto r = core_extrapolation_experiment(inst, 16, 0.25, 0, 0, 1, 300, 2, simplex_cover(2, 1.0, 0.05));
  EXPECT_LE(r.failure_rate.mean, 0.1 + r.failure_rate.half_width_95);
  EXPECT_DOUBLE_EQ(r.population_step, core_cover_step(0.25, 1.0, 1.0, 2));
}

TEST(CoreExtrapolation, FullPanelNeverFails) {
  const auto inst = two_blocks(5);
  const auto r = core_extrapolation_experiment(inst, 10, 0.1, 0, 0, 1, 20, 3, simplex_cover(2, 1.0, 0.05));
  EXPECT_EQ(r.failure_rate.mean, 0.0);
}

TEST(PBLower, OptimumFundsTheHeavySide) {
  const std::vector<int> z{1, 1};
  const auto inst = pb_lower_instance(z, 2, 2, 1);
  EXPECT_EQ(inst.n(), 8u);
  EXPECT_EQ(inst.m(), 4u);
  EXPECT_DOUBLE_EQ(inst.budget(), 2.0);
  const auto r = optimal_allocation(inst, {}, {});
  EXPECT_DOUBLE_EQ(r.cost, 0.25);
  for (const auto& zz : std::vector<std::vector<int>>{{1, -1, 1}, {-1, -1, 1}, {-1, 1, -1}}) {
    for (int w : {2, 3, 4}) {
      const auto in = pb_lower_instance(zz, 3, w, 2);
      const auto opt = optimal_allocation(in, {}, {});
      EXPECT_NEAR(opt.cost, 0.5 - 1.0 / (2.0 * w), 1e-12);
      for (int j = 0; j < 3; ++j) {
        EXPECT_EQ(opt.x[2 * j + 1], zz[j] == 1 ? 1.0 : 0.0);
        EXPECT_EQ(opt.x[2 * j], zz[j] == 1 ? 0.0 : 1.0);
      }
    }
  }
}

TEST(PBLower, OddProjectCountPads) {
  const std::vector<int> z{1, -1};
  const auto inst = pb_lower_instance(z, 2, 2, 1, 5);
  EXPECT_EQ(inst.m(), 5u);
  EXPECT_DOUBLE_EQ(inst.budget(), 2.0);
  EXPECT_THROW(pb_lower_instance(z, 2, 2, 1, 3), std::invalid_argument);
}

TEST(Recovery, SuccessGrowsWithK) {
  const std::vector<int> z{1, -1, 1, -1};
  double previous = -1.0;
  for (std::size_t k : {4u, 32u, 160u}) {
    const auto e = recovery_success(z, 4, 3, 8, k, 1000, 5);
    EXPECT_GE(e.mean, previous - 1e-12);
    previous = e.mean;
  }
  EXPECT_GT(previous, 6.0 / 7.0);
}

}  // namespace
}  // namespace sortition
