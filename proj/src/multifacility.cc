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

#include "sortition/multifacility.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "sortition/representativeness.h"

namespace sortition {
namespace {

double weight_total(std::span<const double> weights) {
  long double s = 0.0L;
  for (double w : weights) {
    if (w < 0.0) throw std::invalid_argument("weights must be nonnegative");
    s += w;
  }
  if (s <= 0.0L) throw std::invalid_argument("weights must have positive total");
  return static_cast<double>(s);
}

}  // namespace

MultiFacilityInstance::MultiFacilityInstance(FacilityInstance base, std::size_t ell)
    : base_(std::move(base)), ell_(ell) {
  if (ell_ < 1 || ell_ > base_.num_candidates()) {
    throw std::invalid_argument("need 1 <= ell <= number of candidates");
  }
}

double multi_cost_at(const MultiFacilityInstance& inst, std::span<const std::size_t> y,
                     std::span<const double> weights) {
  const auto& base = inst.base();
  if (y.size() != inst.ell()) throw std::invalid_argument("wrong number of facilities");
  if (weights.size() != base.n()) throw std::invalid_argument("one weight per agent");
  for (std::size_t c : y) {
    if (c >= base.num_candidates()) throw std::out_of_range("facility index");
  }
  const double total = weight_total(weights);
  long double s = 0.0L;
  for (std::size_t i = 0; i < base.n(); ++i) {
    if (weights[i] == 0.0) continue;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t c : y) best = std::min(best, base.dist(c, i));
    s += static_cast<long double>(weights[i]) * best;
  }
  return static_cast<double>(s / total);
}

double multi_cost(const MultiFacilityInstance& inst, const std::vector<Point>& y,
                  std::span<const double> weights) {
  if (y.size() != inst.ell()) throw std::invalid_argument("wrong number of facilities");
  std::vector<std::size_t> idx;
  for (const auto& p : y) idx.push_back(inst.base().candidate_index(p));
  return multi_cost_at(inst, idx, weights);
}

double multi_social_cost(const MultiFacilityInstance& inst, std::span<const std::size_t> y) {
  const std::vector<double> w(inst.base().n(), 1.0);
  return multi_cost_at(inst, y, w);
}

KMedianResult kmedian_line(std::span<const double> points, std::span<const double> weights,
                           std::span<const double> candidates, std::size_t ell) {
  const std::size_t m = candidates.size();
  if (points.size() != weights.size()) throw std::invalid_argument("one weight per point");
  if (ell < 1 || ell > m) throw std::invalid_argument("need 1 <= ell <= number of candidates");
  for (std::size_t c = 1; c < m; ++c) {
    if (!(candidates[c - 1] < candidates[c])) {
      throw std::invalid_argument("candidates must be strictly increasing");
    }
  }
  const double total = weight_total(weights);

  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return points[a] < points[b]; });
  std::vector<double> xs(points.size());
  std::vector<long double> pw(points.size() + 1, 0.0L), pwx(points.size() + 1, 0.0L);
  for (std::size_t i = 0; i < order.size(); ++i) {
    xs[i] = points[order[i]];
    pw[i + 1] = pw[i] + weights[order[i]];
    pwx[i + 1] = pwx[i] + static_cast<long double>(weights[order[i]]) * xs[i];
  }
  // Points with sorted index in [lo, hi).
  auto below = [&](double v) {  // first index with x >= v
    return static_cast<std::size_t>(std::lower_bound(xs.begin(), xs.end(), v) - xs.begin());
  };
  auto upto = [&](double v) {  // first index with x > v
    return static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), v) - xs.begin());
  };
  auto serve_from_left = [&](double c, std::size_t lo, std::size_t hi) {
    return (pwx[hi] - pwx[lo]) - static_cast<long double>(c) * (pw[hi] - pw[lo]);
  };
  auto serve_from_right = [&](double c, std::size_t lo, std::size_t hi) {
    return static_cast<long double>(c) * (pw[hi] - pw[lo]) - (pwx[hi] - pwx[lo]);
  };
  const std::size_t npts = xs.size();
  auto left_cost = [&](std::size_t a) { return serve_from_right(candidates[a], 0, below(candidates[a])); };
  auto right_cost = [&](std::size_t b) { return serve_from_left(candidates[b], upto(candidates[b]), npts); };
  auto middle_cost = [&](std::size_t a, std::size_t b) {
    const double ca = candidates[a], cb = candidates[b];
    const std::size_t lo = below(ca), hi = upto(cb);
    const std::size_t split = upto(0.5 * (ca + cb));
    return serve_from_left(ca, lo, std::max(lo, split)) +
           serve_from_right(cb, std::min(std::max(lo, split), hi), hi);
  };

  // g[r][a]: cost of everything from c_a rightwards given a facility at a
  // and r more facilities to its right.
  const long double inf = std::numeric_limits<long double>::infinity();
  std::vector<std::vector<long double>> g(ell, std::vector<long double>(m, inf));
  for (std::size_t a = 0; a < m; ++a) g[0][a] = right_cost(a);
  std::vector<std::vector<long double>> mid(m, std::vector<long double>(m, 0.0L));
  if (ell > 1) {
    for (std::size_t a = 0; a < m; ++a) {
      for (std::size_t b = a + 1; b < m; ++b) mid[a][b] = middle_cost(a, b);
    }
  }
  for (std::size_t r = 1; r < ell; ++r) {
    for (std::size_t a = 0; a + r < m; ++a) {
      long double best = inf;
      for (std::size_t b = a + 1; b < m; ++b) best = std::min(best, mid[a][b] + g[r - 1][b]);
      g[r][a] = best;
    }
  }
  long double best = inf;
  for (std::size_t a = 0; a + ell <= m; ++a) best = std::min(best, left_cost(a) + g[ell - 1][a]);

  auto close = [&](long double v, long double target) {
    return v <= target + kTieTolerance * std::max<long double>(1.0L, std::fabs(target));
  };
  KMedianResult out;
  std::size_t a = 0;
  for (; a + ell <= m; ++a) {
    if (close(left_cost(a) + g[ell - 1][a], best)) break;
  }
  out.facilities.push_back(a);
  long double remaining = g[ell - 1][a];
  for (std::size_t r = ell - 1; r >= 1; --r) {
    std::size_t b = a + 1;
    for (; b < m; ++b) {
      if (close(mid[a][b] + g[r - 1][b], remaining)) break;
    }
    remaining = g[r - 1][b];
    a = b;
    out.facilities.push_back(a);
  }
  out.cost = static_cast<double>(std::max(best, 0.0L) / total);
  return out;
}

KMedianResult kmedian_brute(const MultiFacilityInstance& inst, std::span<const double> weights) {
  const std::size_t m = inst.base().num_candidates(), ell = inst.ell();
  if (panel_count(m, ell, SamplingMode::kWithoutReplacement) > kSubsetCap) {
    throw std::length_error("too many facility sets for exhaustive search");
  }
  std::vector<std::size_t> idx(ell);
  std::iota(idx.begin(), idx.end(), 0);
  KMedianResult out{std::numeric_limits<double>::infinity(), {}};
  while (true) {
    const double c = multi_cost_at(inst, idx, weights);
    if (c < out.cost - kTieTolerance * std::max(1.0, out.cost) || out.facilities.empty()) {
      out.cost = c;
      out.facilities = idx;
    }
    std::size_t i = ell;
    while (i > 0 && idx[i - 1] == m - ell + i - 1) --i;
    if (i == 0) break;
    ++idx[i - 1];
    for (std::size_t j = i; j < ell; ++j) idx[j] = idx[j - 1] + 1;
  }
  return out;
}

KMedianResult kmedian(const MultiFacilityInstance& inst, std::span<const double> weights) {
  const auto& base = inst.base();
  if (base.space().is_segment()) {
    std::vector<double> cs;
    bool increasing = true;
    for (const auto& c : base.candidates()) {
      if (!cs.empty() && !(cs.back() < c[0])) increasing = false;
      cs.push_back(c[0]);
    }
    if (increasing) {
      if (weights.size() != base.n()) throw std::invalid_argument("one weight per agent");
      std::vector<double> xs;
      for (const auto& a : base.agents()) xs.push_back(a[0]);
      return kmedian_line(xs, weights, cs, inst.ell());
    }
  }
  return kmedian_brute(inst, weights);
}

KMedianResult panel_multi_optimum(const MultiFacilityInstance& inst, const Panel& panel) {
  return kmedian(inst, panel_weights(inst.base().n(), panel));
}

KMedianResult multi_social_opt(const MultiFacilityInstance& inst) {
  const std::vector<double> w(inst.base().n(), 1.0);
  return kmedian(inst, w);
}

namespace {

double population_panel_w(const MultiFacilityInstance& inst, const Panel& panel) {
  const auto& base = inst.base();
  const Feature f(base.space(), base.agents());
  return panel_wasserstein(f, panel);
}

}  // namespace

PanelBound panel_bound_check(const MultiFacilityInstance& inst, const Panel& panel) {
  const auto chosen = panel_multi_optimum(inst, panel);
  PanelBound out;
  out.lhs = multi_social_cost(inst, chosen.facilities);
  out.panel_opt = chosen.cost;
  out.w = population_panel_w(inst, panel);
  out.rhs = out.w + out.panel_opt;
  out.ok = out.lhs <= out.rhs + 1e-9;
  return out;
}

ImpossibilityFamily impossibility_instance(std::size_t n) {
  if (n < 2) throw std::invalid_argument("need at least two agents");
  ImpossibilityFamily fam;
  fam.outliers = {0.0, 1.0, 0.5};
  for (double p : fam.outliers) {
    std::vector<Point> agents(n - 1, Point{0.0});
    agents.push_back({p});
    FacilityInstance base(MetricSpace::unit_interval(), {{0.0}, {0.5}, {1.0}}, std::move(agents));
    fam.populations.emplace_back(std::move(base), 2);
  }
  return fam;
}

double exact_expected_social_cost(const MultiFacilityInstance& inst, std::size_t k,
                                  const PanelDecision& decision, SamplingMode mode) {
  long double acc = 0.0L;
  for_each_panel(inst.base().n(), k, mode, [&](const Panel& p, const Probability& pr) {
    const auto y = decision(p);
    acc += static_cast<long double>(boost::rational_cast<double>(pr)) * multi_social_cost(inst, y);
  });
  return static_cast<double>(acc);
}

MultiTrialSummary multi_panel_trials(const MultiFacilityInstance& inst, std::size_t k,
                                     std::size_t trials, std::uint64_t seed, SamplingMode mode) {
  const auto& base = inst.base();
  std::optional<SegmentIndex> line;
  if (base.space().is_segment()) line.emplace(Feature(base.space(), base.agents()));
  const auto rows = run_trials({base.n(), k, mode, trials, seed}, 3,
                               [&](const Panel& p, Rng&, std::span<double> row) {
                                 const auto chosen = panel_multi_optimum(inst, p);
                                 row[0] = multi_social_cost(inst, chosen.facilities);
                                 row[1] = line ? line->wasserstein(p) : population_panel_w(inst, p);
                                 row[2] = chosen.cost;
                               });
  return {estimate_column(rows, 3, 0), estimate_column(rows, 3, 1), estimate_column(rows, 3, 2)};
}

}  // namespace sortition
