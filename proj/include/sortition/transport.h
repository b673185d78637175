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

// Exact Wasserstein-1 distances between finitely supported distributions.
//
// Two independent routes are provided: the closed form on the line (L1
// distance between CDFs) and a min-cost flow on the bipartite support graph.
// Both first try to rescale the masses to integers over a common denominator
// so that CDF differences and flows are computed exactly.

#ifndef SORTITION_TRANSPORT_H_
#define SORTITION_TRANSPORT_H_

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "sortition/core_model.h"

namespace sortition {

inline constexpr std::int64_t kScalingCap = 1'000'000'000;

class ScalingOverflowError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Masses of two distributions written as integers over one denominator.
struct IntegerMasses {
  std::int64_t denominator = 1;
  std::vector<std::int64_t> a;
  std::vector<std::int64_t> b;
};

// Recovers every mass as a fraction (continued fractions, tolerance a few
// ulps) and rescales by the least common denominator. Returns nullopt when a
// mass is not recognisably rational or the denominator exceeds `cap`.
std::optional<IntegerMasses> common_integer_scaling(std::span<const double> a,
                                                    std::span<const double> b,
                                                    std::int64_t cap = kScalingCap);

// gamma is row-major with rows.size() x cols.size() entries.
struct Coupling {
  std::vector<Point> rows;
  std::vector<Point> cols;
  std::vector<double> gamma;

  double at(std::size_t i, std::size_t j) const { return gamma[i * cols.size() + j]; }
};

struct FlowResult {
  double value = 0.0;
  Coupling coupling;
};

enum class FlowMode {
  kAuto,      // integer scaling, falling back to exact rationals
  kInteger,   // integer scaling only; throws ScalingOverflowError otherwise
  kRational,  // arbitrary-precision rationals, exact for any double masses
};

// W1 on a segment as the integral of |F_phi - F_psi|. Throws
// std::invalid_argument when the spaces differ or are not segments.
double wasserstein_1d(const DiscreteDistribution& phi, const DiscreteDistribution& psi);

// Closed form on sorted, distinct support values with integer weights. The
// result is (sum_i |C_i| * gap_i) / (total_a * total_b) where C_i is the
// scaled CDF difference, so equal inputs give exactly zero.
double wasserstein_1d_counts(std::span<const double> xs_a, std::span<const std::int64_t> w_a,
                             std::span<const double> xs_b, std::span<const std::int64_t> w_b);

// Minimum-cost coupling by successive shortest paths on the support graph.
FlowResult wasserstein_flow(const DiscreteDistribution& phi, const DiscreteDistribution& psi,
                            FlowMode mode = FlowMode::kAuto);

// W between two distributions on any supported space: the closed form on a
// segment, min-cost flow otherwise.
double wasserstein(const DiscreteDistribution& phi, const DiscreteDistribution& psi);

// True iff W(phi, t psi1 + (1-t) psi2) <= t W(phi, psi1) + (1-t) W(phi, psi2)
// up to kMetricTolerance.
bool convexity_check(const DiscreteDistribution& phi, const DiscreteDistribution& psi1,
                     const DiscreteDistribution& psi2, double t);

}  // namespace sortition

#endif  // SORTITION_TRANSPORT_H_
