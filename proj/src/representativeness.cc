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

#include "sortition/representativeness.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "sortition/transport.h"

namespace sortition {
namespace {

void check_members(const Feature& feature, const Panel& panel) {
  for (std::size_t m : panel.members()) {
    if (m >= feature.size()) {
      throw std::out_of_range("panel member " + std::to_string(m) + " outside feature of size " +
                              std::to_string(feature.size()));
    }
  }
}

DiscreteDistribution counted_distribution(const Feature& feature,
                                          std::span<const std::size_t> members) {
  std::map<Point, std::size_t> mult;
  for (std::size_t m : members) ++mult[feature[m]];
  std::vector<Point> support;
  std::vector<double> masses;
  const double k = static_cast<double>(members.size());
  for (const auto& [p, c] : mult) {
    support.push_back(p);
    masses.push_back(static_cast<double>(c) / k);
  }
  return DiscreteDistribution(feature.space(), std::move(support), std::move(masses));
}

}  // namespace

DiscreteDistribution panel_distribution(const Feature& feature, const Panel& panel) {
  check_members(feature, panel);
  return counted_distribution(feature, panel.members());
}

DiscreteDistribution population_distribution(const Feature& feature) {
  if (feature.size() == 0) throw std::invalid_argument("empty feature");
  return panel_distribution(feature, Panel::everyone(feature.size()));
}

double panel_wasserstein(const Feature& feature, const Panel& panel) {
  check_members(feature, panel);
  if (feature.space().is_segment()) return SegmentIndex(feature).wasserstein(panel);
  return wasserstein(population_distribution(feature), panel_distribution(feature, panel));
}

Representativeness is_representative(const Feature& feature, const Panel& panel, double eps) {
  if (!(eps >= 0.0)) throw std::invalid_argument("eps must be nonnegative");
  const double w = panel_wasserstein(feature, panel);
  return {w <= eps + kRepresentativeSlack, w};
}

double mean_gap(const Feature& feature, const Panel& panel) {
  check_members(feature, panel);
  const auto xs = feature.scalars();
  long double pop = 0.0L, pan = 0.0L;
  for (double x : xs) pop += x;
  for (std::size_t m : panel.members()) pan += xs[m];
  pop /= static_cast<long double>(xs.size());
  pan /= static_cast<long double>(panel.k());
  return static_cast<double>(std::fabs(pop - pan));
}

SegmentIndex::SegmentIndex(const Feature& feature) {
  if (!feature.space().is_segment()) throw std::invalid_argument("SegmentIndex needs a segment");
  const auto vals = feature.scalars();
  xs_ = vals;
  std::sort(xs_.begin(), xs_.end());
  xs_.erase(std::unique(xs_.begin(), xs_.end()), xs_.end());
  counts_.assign(xs_.size(), 0);
  rank_.resize(vals.size());
  for (std::size_t i = 0; i < vals.size(); ++i) {
    rank_[i] = static_cast<std::size_t>(std::lower_bound(xs_.begin(), xs_.end(), vals[i]) -
                                        xs_.begin());
    ++counts_[rank_[i]];
  }
}

double SegmentIndex::wasserstein(const Panel& panel) const { return wasserstein(panel.members()); }

double SegmentIndex::wasserstein(std::span<const std::size_t> members) const {
  if (members.empty()) throw std::invalid_argument("empty panel");
  std::vector<std::int64_t> sub(xs_.size(), 0);
  for (std::size_t m : members) {
    if (m >= rank_.size()) throw std::out_of_range("panel member outside feature");
    ++sub[rank_[m]];
  }
  return wasserstein_1d_counts(xs_, counts_, xs_, sub);
}

std::vector<std::size_t> default_k_grid(std::size_t n) {
  std::vector<std::size_t> grid;
  for (std::size_t k = 2; k < n; k *= 2) grid.push_back(k);
  if (n >= 1) grid.push_back(n);
  return grid;
}

SweepResult min_k_sweep(std::span<const Feature> features, double eps, double delta,
                        std::span<const std::size_t> k_grid, std::size_t trials,
                        std::uint64_t seed, SamplingMode mode) {
  if (k_grid.empty()) throw std::invalid_argument("empty k grid");
  if (features.empty()) throw std::invalid_argument("no features");
  const std::size_t n = features.front().size();
  std::vector<SegmentIndex> index;
  for (const auto& f : features) {
    if (f.size() != n) throw std::invalid_argument("features must share n");
    if (!f.is_unit_real()) throw std::invalid_argument("features must be real-valued in [0, 1]");
    index.emplace_back(f);
  }
  SweepResult out;
  for (std::size_t k : k_grid) {
    const TrialPlan plan{n, k, mode, trials, seed};
    const auto est = monte_carlo(plan, [&](const Panel& p, Rng&) {
      for (const auto& ix : index) {
        if (ix.wasserstein(p) > eps + kRepresentativeSlack) return 1.0;
      }
      return 0.0;
    }, Interval::kProportion);
    out.rows.push_back({k, est.mean, est.half_width_95});
    if (est.mean <= delta && (!out.min_k || k < *out.min_k)) out.min_k = k;
  }
  return out;
}

}  // namespace sortition
