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

#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "oracles.h"

namespace sortition {
namespace {

FacilityInstance line(std::vector<double> xs, std::vector<double> cs,
                      MetricSpace space = MetricSpace::unit_interval()) {
  std::vector<Point> agents, candidates;
  for (double x : xs) agents.push_back({x});
  for (double c : cs) candidates.push_back({c});
  return FacilityInstance(space, candidates, agents);
}

Panel panel_of(std::size_t n, std::vector<std::size_t> members) {
  return Panel(n, std::move(members), SamplingMode::kWithoutReplacement);
}

TEST(FacilityInstance, Validates) {
  EXPECT_THROW(line({0.5}, {}), std::invalid_argument);
  EXPECT_THROW(line({}, {0.5}), std::invalid_argument);
  EXPECT_THROW(line({1.5}, {0.5}), std::invalid_argument);
  EXPECT_THROW(line({0.5}, {0.5}).candidate_index({0.25}), std::invalid_argument);
}

TEST(SocialCost, Examples) {
  const auto inst = line({0, 0, 1}, {0, 1});
  EXPECT_DOUBLE_EQ(social_cost(inst, {0.0}), 1.0 / 3);
  EXPECT_THROW(social_cost(inst, {0.5}), std::invalid_argument);
  EXPECT_DOUBLE_EQ(panel_cost(inst, {1.0}, panel_of(3, {2})), 0.0);
  const auto star = star_instance(2);
  EXPECT_DOUBLE_EQ(social_cost(star, {0.0}), 0.4);
  EXPECT_DOUBLE_EQ(social_opt(star), 0.4);
}

TEST(PanelCost, CountsMultiplicity) {
  const auto inst = line({0, 1}, {0, 1});
  EXPECT_DOUBLE_EQ(panel_cost(inst, {0.0}, Panel(2, {1, 1, 0}, SamplingMode::kWithReplacement)),
                   2.0 / 3);
}

TEST(PanelOptimum, Examples) {
  const auto inst = line({0, 0, 1}, {0, 1});
  EXPECT_EQ(panel_optimum(inst, Panel::everyone(3)), Point{0.0});
  EXPECT_EQ(panel_optimum(inst, panel_of(3, {2})), Point{1.0});
  EXPECT_EQ(panel_optimum_index(inst, panel_of(3, {0, 2})), 0u);
  EXPECT_EQ(panel_optimum_index(line({0, 1}, {1, 0}), Panel::everyone(2)), 0u);
}

TEST(PanelOptimum, MatchesExhaustiveScan) {
  Rng rng(4);
  for (int rep = 0; rep < 200; ++rep) {
    const auto inst = random_line_instance(20, 11, rng);
    const auto panel = draw_panel(20, 1 + uniform_index(rng, 20), SamplingMode::kWithoutReplacement, rng);
    std::size_t best = 0;
    double best_cost = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < 11; ++c) {
      double s = 0.0;
      for (auto m : panel.members()) s += std::fabs(inst.candidates()[c][0] - inst.agents()[m][0]);
      if (s < best_cost - 1e-12) {
        best_cost = s;
        best = c;
      }
    }
    EXPECT_EQ(panel_optimum_index(inst, panel), best);
  }
}

TEST(TailPanelSize, Examples) {
  EXPECT_EQ(tail_panel_size(3, 0.1), 40u);
  EXPECT_EQ(tail_panel_size(4, 0.1), 17u);
  EXPECT_EQ(tail_panel_size(4, 0.05), 21u);
  EXPECT_THROW(tail_panel_size(2, 0.1), std::invalid_argument);
  EXPECT_THROW(tail_panel_size(3, 1.0), std::invalid_argument);
}

TEST(TailPanelSize, SmallestKMeetingTheBound) {
  for (double T : {2.5, 3.0, 4.0, 6.0, 10.0}) {
    for (double delta : {0.3, 0.1, 0.05, 0.01}) {
      EXPECT_EQ(tail_panel_size(T, delta), oracle::smallest_tail_k(T, delta)) << T << " " << delta;
    }
  }
}

TEST(MetricMapToLine, IdentityOnTheHalfLine) {
  const auto r = metric_map_to_line(line({0, 0, 1}, {0, 1}), 3.0);
  EXPECT_FALSE(r.degenerate);
  EXPECT_EQ(r.q_star, 0u);
  ASSERT_EQ(r.instance.n(), 3u);
  EXPECT_EQ(r.instance.agents()[2], Point{1.0});
  EXPECT_EQ(r.instance.agents()[0], Point{0.0});
  EXPECT_EQ(r.instance.candidates().front(), Point{0.0});
  EXPECT_EQ(r.instance.candidates()[1], Point{1.0});
}

TEST(MetricMapToLine, FiniteMetricRow) {
  const std::vector<double> d{0, 1, 2, 2, 1, 0, 1, 2, 2, 1, 0, 1, 2, 2, 1, 0};
  const auto space = MetricSpace::finite(4, d);
  const FacilityInstance inst(space, {{0}, {1}, {2}, {3}}, {{0}, {1}, {2}, {3}, {1}});
  const auto r = metric_map_to_line(inst, 3.0);
  ASSERT_EQ(r.q_star, 1u);
  for (std::size_t i = 0; i < inst.n(); ++i) {
    const int agent = static_cast<int>(inst.agents()[i][0]);
    EXPECT_EQ(r.instance.agents()[i][0], space.as_finite().at(1, agent));
  }
}

TEST(MetricMapToLine, FlagsDegenerateInstances) {
  const auto r = metric_map_to_line(line({0.5, 0.5}, {0.5, 1}), 3.0);
  EXPECT_TRUE(r.degenerate);
  EXPECT_EQ(r.opt, 0.0);
}

TEST(MetricMapToLine, IsAContraction) {
  Rng rng(6);
  for (int rep = 0; rep < 100; ++rep) {
    const auto space = MetricSpace::box(2, rep % 2 ? Norm::kL1 : Norm::kLinf);
    std::vector<Point> agents(15);
    for (auto& a : agents) a = {uniform01(rng), uniform01(rng)};
    const FacilityInstance inst(space, box_cover(2, 0.125, Norm::kLinf), agents);
    const auto r = metric_map_to_line(inst, 3.0);
    for (std::size_t i = 0; i < agents.size(); ++i) {
      EXPECT_NEAR(r.instance.agents()[i][0], space.distance(inst.candidates()[r.q_star], agents[i]), 0);
      for (std::size_t j = 0; j < agents.size(); ++j) {
        EXPECT_LE(std::fabs(r.instance.agents()[i][0] - r.instance.agents()[j][0]),
                  space.distance(agents[i], agents[j]) + 1e-12);
      }
    }
    for (std::size_t c = 1; c < r.instance.num_candidates(); ++c) {
      EXPECT_GE(r.instance.candidates()[c][0], 3.0 * r.opt - 1e-12);
    }
    EXPECT_EQ(population_optimum_index(r.instance), 0u);
  }
}

TEST(FiniteIntervalReduce, ClampExample) {
  EXPECT_EQ(clamp_values({0, 2, 5, 7}, 3.0), (std::vector<double>{0, 2, 3, 3}));
  const auto big = MetricSpace::segment(0, 10);
  const auto r = finite_interval_reduce(line({0, 0, 0, 0, 0, 0, 2, 5, 7, 0}, {0, 3, 5}, big), 2.5);
  EXPECT_DOUBLE_EQ(r.opt, 1.4);
  ASSERT_EQ(r.instance.num_candidates(), 2u);
  EXPECT_DOUBLE_EQ(r.instance.candidates()[1][0], 3.5);
  EXPECT_DOUBLE_EQ(r.instance.agents()[8][0], 3.5);
  EXPECT_DOUBLE_EQ(r.instance.agents()[6][0], 2.0);
  EXPECT_LE(social_cost_at(r.instance, 0), social_cost_at(r.instance, 1));
}

TEST(FiniteIntervalReduce, AllAtZeroIsFlagged) {
  const auto in = line({0, 0, 0}, {0, 1});
  const auto r = finite_interval_reduce(in, 3.0);
  EXPECT_TRUE(r.degenerate);
  EXPECT_EQ(r.instance, in);
}

TEST(FiniteIntervalReduce, FarPanelsStayFar) {
  Rng rng(8);
  for (int rep = 0; rep < 40; ++rep) {
    const std::size_t n = 6 + uniform_index(rng, 7);
    std::vector<Point> agents(n);
    for (auto& a : agents) a = {uniform01(rng) < 0.6 ? 0.0 : uniform01(rng)};
    const FacilityInstance raw(MetricSpace::unit_interval(), {{0.0}, {0.5}, {1.0}}, agents);
    const double T = 2.5;
    const auto lined = metric_map_to_line(raw, T);
    if (lined.degenerate) continue;
    const auto reduced = finite_interval_reduce(lined.instance, T);
    ASSERT_FALSE(reduced.degenerate);
    EXPECT_EQ(population_optimum_index(reduced.instance), 0u);
    EXPECT_LE(social_opt(reduced.instance), lined.opt + 1e-12);
    for (std::size_t k = 1; k <= n; ++k) {
      for_each_panel(n, k, SamplingMode::kWithoutReplacement, [&](const Panel& p, const Probability&) {
        if (panel_optimum_index(lined.instance, p) != 0) {
          EXPECT_EQ(panel_optimum_index(reduced.instance, p), 1u);
        }
      });
    }
  }
}

TEST(BoxCover, Sizes) {
  EXPECT_EQ(box_cover(2, 0.25, Norm::kLinf).size(), 4u);
  const auto one = box_cover(3, 0.5, Norm::kLinf);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0], (Point{0.5, 0.5, 0.5}));
  EXPECT_EQ(box_cover(1, 0.7, Norm::kLinf).size(), 1u);
  EXPECT_EQ(box_cover(2, 0.25, Norm::kL1).size(), 16u);
  EXPECT_THROW(box_cover(2, 0.0, Norm::kLinf), std::invalid_argument);
  EXPECT_THROW(box_cover(8, 1e-3, Norm::kLinf), std::length_error);
}

TEST(BoxCover, CoversEveryPoint) {
  Rng rng(10);
  for (auto norm : {Norm::kLinf, Norm::kL1}) {
    for (int t : {1, 2, 3}) {
      for (double r : {0.3, 0.1, 0.07}) {
        const auto cover = box_cover(t, r, norm);
        if (norm == Norm::kLinf) {
          EXPECT_LE(cover.size(), std::pow(std::ceil(1.0 / (2 * r)), t));
        }
        const auto space = MetricSpace::box(t, norm);
        for (int s = 0; s < 10000 / 9; ++s) {
          Point p(t);
          for (auto& v : p) v = uniform01(rng);
          double best = std::numeric_limits<double>::infinity();
          for (const auto& c : cover) best = std::min(best, space.distance(p, c));
          EXPECT_LE(best, r + 1e-12);
        }
      }
    }
  }
}

TEST(StarInstance, Shape) {
  const auto s = star_instance(2);
  ASSERT_EQ(s.n(), 5u);
  const std::vector<double> expect{0, 0, 1, 1, 0};
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(s.agents()[i][0], expect[i]);
  for (int k = 1; k <= 8; ++k) {
    const auto st = star_instance(k);
    EXPECT_EQ(st.candidates()[population_optimum_index(st)], Point{0.0});
    EXPECT_LE(social_opt(st), 0.5);
  }
}

TEST(StarInstance, PanelsOftenPickTheFarSide) {
  for (int k = 1; k <= 6; ++k) {
    const auto st = star_instance(k);
    const auto far = exact_far_probability(st, k, 2.0 * social_opt(st));
    // Direct count: a panel picks 1 iff at least half its members sit at 1.
    std::int64_t hits = 0, total = 0;
    for_each_panel(st.n(), k, SamplingMode::kWithoutReplacement, [&](const Panel& p, const Probability&) {
      int ones = 0;
      for (auto m : p.members()) ones += st.agents()[m][0] == 1.0;
      hits += 2 * ones >= k;
      ++total;
    });
    EXPECT_EQ(far, Probability(hits, total));
    EXPECT_GE(far, Probability(1, 4));
  }
}

TEST(LinfLower, AgentCountsAndOptimum) {
  const auto li = linf_lower_instance({1, 1}, 2, 2, 1);
  EXPECT_EQ(li.instance.n(), 8u);
  for (int w : {2, 3, 5}) {
    for (int r : {1, 2}) {
      const std::vector<int> z{1, -1, 1};
      const auto l = linf_lower_instance(z, 3, w, r);
      EXPECT_EQ(l.instance.n(), static_cast<std::size_t>(2 * 3 * w * r));
      int plus0 = 0;
      for (const auto& a : l.instance.agents()) plus0 += a[0] == 1.0;
      EXPECT_EQ(plus0, r * (w + 1));
      EXPECT_NEAR(social_cost(l.instance, l.q_star), 0.5 - 1.0 / (4.0 * w), 1e-12);
      EXPECT_LE(social_opt(l.instance), 0.5 - 1.0 / (4.0 * w) + 1e-12);
    }
  }
}

TEST(LinfLower, WrongSideCoordinatesCostAtLeastTheFloor) {
  const std::vector<std::vector<int>> zs{{1, 1}, {1, -1}, {-1, 1, -1}, {1, 1, 1, -1}};
  for (const auto& z : zs) {
    const int t = static_cast<int>(z.size());
    for (int w : {2, 4}) {
      const auto li = linf_lower_instance(z, t, w, 1);
      const double n = li.instance.n();
      for (const auto& q : li.instance.candidates()) {
        for (int j = 0; j < t; ++j) {
          // Agents on axis j sit at coordinate 1 or 0 there, which dominates
          // the other coordinates' 1/4 offsets.
          const double closed = ((w + z[j]) * (1.0 - q[j]) + (w - z[j]) * q[j]) / n;
          EXPECT_NEAR(axis_cost(li, q, j), closed, 1e-12);
          if ((q[j] - 0.5) * z[j] <= 0) {
            EXPECT_GE(axis_cost(li, q, j), 1.0 / (2 * t) - 1e-12);
          }
        }
      }
    }
  }
}

TEST(FacilityProperties, FarAlternativesAreCostly) {
  Rng rng(12);
  const auto space = MetricSpace::segment(-50, 50);
  for (int rep = 0; rep < 500; ++rep) {
    std::vector<Point> agents(1 + uniform_index(rng, 20));
    for (auto& a : agents) a = {uniform01(rng) * 4 - 2};
    const double q1 = uniform01(rng) * 2 - 1;
    const double T = 1.0 + 4 * uniform01(rng);
    double sc1 = 0.0;
    for (const auto& a : agents) sc1 += std::fabs(a[0] - q1);
    sc1 /= agents.size();
    const double q2 = rep % 2 ? q1 + T * sc1 : q1 - T * sc1;
    const FacilityInstance inst(space, {{q1}, {q2}}, agents);
    EXPECT_GT(social_cost_at(inst, 1), (T - 1) * social_cost_at(inst, 0) - 1e-9);
  }
}

TEST(FacilityProperties, TailBoundHolds) {
  Rng rng(14);
  std::vector<FacilityInstance> instances{star_instance(50)};
  for (int i = 0; i < 20; ++i) instances.push_back(random_line_instance(100, 11, rng));
  for (auto [T, delta] : {std::pair{3.0, 0.1}, std::pair{4.0, 0.05}}) {
    const std::size_t k = tail_panel_size(T, delta);
    for (std::size_t i = 0; i < instances.size(); ++i) {
      const auto e = tail_probability(instances[i], k, T, 2000, 100 + i);
      EXPECT_GE(e.mean, 1 - delta - 3 * e.half_width_95) << "instance " << i;
    }
  }
}

}  // namespace
}  // namespace sortition
