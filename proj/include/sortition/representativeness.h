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

#ifndef SORTITION_REPRESENTATIVENESS_H_
#define SORTITION_REPRESENTATIVENESS_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sortition/core_model.h"
#include "sortition/sampling.h"

namespace sortition {

inline constexpr double kRepresentativeSlack = 1e-12;

// Mass at x is (multiplicity of x among panel members) / k.
DiscreteDistribution panel_distribution(const Feature& feature, const Panel& panel);
DiscreteDistribution population_distribution(const Feature& feature);

// W between the population and panel distributions of `feature`.
double panel_wasserstein(const Feature& feature, const Panel& panel);

struct Representativeness {
  bool representative = false;
  double w = 0.0;
};

// representative iff W <= eps + kRepresentativeSlack.
Representativeness is_representative(const Feature& feature, const Panel& panel, double eps);

// |population mean - panel mean| of a real-valued feature.
double mean_gap(const Feature& feature, const Panel& panel);

// Precomputed view of a segment-valued feature for repeated panel queries.
class SegmentIndex {
 public:
  explicit SegmentIndex(const Feature& feature);

  std::size_t n() const { return rank_.size(); }
  double wasserstein(const Panel& panel) const;
  // Same as wasserstein() but for a plain member list (duplicates allowed).
  double wasserstein(std::span<const std::size_t> members) const;

 private:
  std::vector<double> xs_;            // distinct sorted values
  std::vector<std::int64_t> counts_;  // population multiplicities
  std::vector<std::size_t> rank_;     // agent -> index into xs_
};

struct SweepRow {
  std::size_t k = 0;
  double failure_rate = 0.0;
  double ci_half_width = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  // Smallest grid k whose estimated failure rate is <= delta.
  std::optional<std::size_t> min_k;
};

// {2, 4, 8, ...} below n, followed by n.
std::vector<std::size_t> default_k_grid(std::size_t n);

// Estimates P[some feature has W > eps] for every k in k_grid. Every k reuses
// `seed`, so neighbouring rows and runs with different eps are coupled.
SweepResult min_k_sweep(std::span<const Feature> features, double eps, double delta,
                        std::span<const std::size_t> k_grid, std::size_t trials,
                        std::uint64_t seed,
                        SamplingMode mode = SamplingMode::kWithoutReplacement);

}  // namespace sortition

#endif  // SORTITION_REPRESENTATIVENESS_H_
