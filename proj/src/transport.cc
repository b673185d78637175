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

#include "sortition/transport.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/multiprecision/cpp_int.hpp>

namespace sortition {
namespace {

using BigRational = boost::multiprecision::cpp_rational;

// Smallest-denominator convergent of x within a few ulps, if its denominator
// stays below `cap`.
std::optional<std::pair<std::int64_t, std::int64_t>> to_fraction(double x, std::int64_t cap) {
  if (x == 0.0) return std::make_pair<std::int64_t, std::int64_t>(0, 1);
  const double tol = 4.0 * std::numeric_limits<double>::epsilon() * std::abs(x);
  long double r = x;
  std::int64_t h_prev = 1, h_prev2 = 0;
  std::int64_t k_prev = 0, k_prev2 = 1;
  for (int iter = 0; iter < 64; ++iter) {
    const long double a_ld = std::floor(r);
    if (a_ld > static_cast<long double>(cap)) return std::nullopt;
    const auto a = static_cast<std::int64_t>(a_ld);
    const __int128 h = static_cast<__int128>(a) * h_prev + h_prev2;
    const __int128 k = static_cast<__int128>(a) * k_prev + k_prev2;
    if (k > cap || h > static_cast<__int128>(cap) * 4) return std::nullopt;
    h_prev2 = h_prev;
    k_prev2 = k_prev;
    h_prev = static_cast<std::int64_t>(h);
    k_prev = static_cast<std::int64_t>(k);
    if (std::abs(x - static_cast<double>(h_prev) / static_cast<double>(k_prev)) <= tol) {
      return std::make_pair(h_prev, k_prev);
    }
    const long double frac = r - a_ld;
    if (frac == 0.0L) return std::nullopt;
    r = 1.0L / frac;
  }
  return std::nullopt;
}

void require_same_space(const DiscreteDistribution& phi, const DiscreteDistribution& psi) {
  if (!(phi.space() == psi.space())) {
    throw std::invalid_argument("distributions live in different metric spaces");
  }
}

std::vector<double> first_coords(const std::vector<Point>& pts) {
  std::vector<double> out;
  out.reserve(pts.size());
  for (const auto& p : pts) out.push_back(p[0]);
  return out;
}

// Successive shortest paths on source -> rows -> cols -> sink. Capacities of
// type Cap are exact, costs are doubles. Returns the row-major flow matrix.
template <typename Cap>
std::vector<Cap> min_cost_transport(const std::vector<Cap>& supply, const std::vector<Cap>& demand,
                                    const std::vector<double>& cost) {
  const std::size_t rows = supply.size();
  const std::size_t cols = demand.size();
  const std::size_t nodes = rows + cols + 2;
  const std::size_t source = rows + cols;
  const std::size_t sink = source + 1;

  std::vector<Cap> flow(rows * cols, Cap(0));
  std::vector<Cap> sup_left = supply;
  std::vector<Cap> dem_left = demand;
  std::vector<double> potential(nodes, 0.0);
  const double inf = std::numeric_limits<double>::infinity();

  // Residual arcs: source->row (if sup_left > 0), row->col (always),
  // col->row (if flow > 0), col->sink (if dem_left > 0).
  while (true) {
    std::vector<double> dist(nodes, inf);
    std::vector<std::size_t> parent(nodes, nodes);
    std::vector<bool> done(nodes, false);
    dist[source] = 0.0;
    auto relax = [&](std::size_t u, std::size_t v, double c) {
      const double reduced = std::max(0.0, c + potential[u] - potential[v]);
      if (dist[u] + reduced < dist[v]) {
        dist[v] = dist[u] + reduced;
        parent[v] = u;
      }
    };
    for (std::size_t iter = 0; iter < nodes; ++iter) {
      std::size_t u = nodes;
      for (std::size_t v = 0; v < nodes; ++v) {
        if (!done[v] && dist[v] < inf && (u == nodes || dist[v] < dist[u])) u = v;
      }
      if (u == nodes) break;
      done[u] = true;
      if (u == source) {
        for (std::size_t i = 0; i < rows; ++i) {
          if (sup_left[i] > 0) relax(source, i, 0.0);
        }
      } else if (u < rows) {
        for (std::size_t j = 0; j < cols; ++j) relax(u, rows + j, cost[u * cols + j]);
      } else if (u < rows + cols) {
        const std::size_t j = u - rows;
        for (std::size_t i = 0; i < rows; ++i) {
          if (flow[i * cols + j] > 0) relax(u, i, -cost[i * cols + j]);
        }
        if (dem_left[j] > 0) relax(u, sink, 0.0);
      }
    }
    if (dist[sink] == inf) break;
    // Unreachable nodes get the largest finite label so reduced costs of arcs
    // leaving them stay nonnegative.
    double reach_max = 0.0;
    for (double d : dist) {
      if (d < inf) reach_max = std::max(reach_max, d);
    }
    for (std::size_t v = 0; v < nodes; ++v) potential[v] += dist[v] < inf ? dist[v] : reach_max;

    // Bottleneck along the path.
    std::vector<std::size_t> path;
    for (std::size_t v = sink; v != source; v = parent[v]) path.push_back(v);
    path.push_back(source);
    std::reverse(path.begin(), path.end());
    Cap push = sup_left[path[1]];
    push = std::min(push, dem_left[path[path.size() - 2] - rows]);
    for (std::size_t p = 1; p + 2 < path.size(); ++p) {
      const std::size_t u = path[p];
      const std::size_t v = path[p + 1];
      if (u >= rows) {  // backward arc col -> row
        push = std::min(push, flow[v * cols + (u - rows)]);
      }
    }
    sup_left[path[1]] -= push;
    dem_left[path[path.size() - 2] - rows] -= push;
    for (std::size_t p = 1; p + 2 < path.size(); ++p) {
      const std::size_t u = path[p];
      const std::size_t v = path[p + 1];
      if (u < rows) {
        flow[u * cols + (v - rows)] += push;
      } else {
        flow[v * cols + (u - rows)] -= push;
      }
    }
  }
  return flow;
}

std::vector<double> cost_matrix(const DiscreteDistribution& phi, const DiscreteDistribution& psi) {
  std::vector<double> cost;
  cost.reserve(phi.size() * psi.size());
  for (const auto& x : phi.support()) {
    for (const auto& y : psi.support()) cost.push_back(phi.space().distance(x, y));
  }
  return cost;
}

FlowResult finish(const DiscreteDistribution& phi, const DiscreteDistribution& psi,
                  const std::vector<double>& cost, std::vector<double> gamma) {
  FlowResult out;
  double value = 0.0;
  for (std::size_t idx = 0; idx < gamma.size(); ++idx) value += gamma[idx] * cost[idx];
  out.value = value;
  out.coupling = Coupling{phi.support(), psi.support(), std::move(gamma)};
  return out;
}

FlowResult flow_integer(const DiscreteDistribution& phi, const DiscreteDistribution& psi,
                        const IntegerMasses& scaled) {
  const auto cost = cost_matrix(phi, psi);
  const auto flow = min_cost_transport<std::int64_t>(scaled.a, scaled.b, cost);
  // Accumulate in integer-weighted form and divide once.
  double weighted = 0.0;
  for (std::size_t idx = 0; idx < flow.size(); ++idx) {
    weighted += static_cast<double>(flow[idx]) * cost[idx];
  }
  std::vector<double> gamma(flow.size());
  const auto denom = static_cast<double>(scaled.denominator);
  for (std::size_t idx = 0; idx < flow.size(); ++idx) {
    gamma[idx] = static_cast<double>(flow[idx]) / denom;
  }
  FlowResult out = finish(phi, psi, cost, std::move(gamma));
  out.value = weighted / denom;
  return out;
}

FlowResult flow_rational(const DiscreteDistribution& phi, const DiscreteDistribution& psi) {
  auto to_exact = [](const std::vector<double>& masses) {
    std::vector<BigRational> out;
    BigRational total = 0;
    for (double m : masses) {
      out.emplace_back(m);
      total += out.back();
    }
    for (auto& v : out) v /= total;
    return out;
  };
  const auto supply = to_exact(phi.masses());
  const auto demand = to_exact(psi.masses());
  const auto cost = cost_matrix(phi, psi);
  const auto flow = min_cost_transport<BigRational>(supply, demand, cost);
  std::vector<double> gamma;
  gamma.reserve(flow.size());
  for (const auto& f : flow) gamma.push_back(static_cast<double>(f));
  return finish(phi, psi, cost, std::move(gamma));
}

}  // namespace

std::optional<IntegerMasses> common_integer_scaling(std::span<const double> a,
                                                    std::span<const double> b, std::int64_t cap) {
  std::vector<std::pair<std::int64_t, std::int64_t>> fa, fb;
  std::int64_t lcm = 1;
  auto collect = [&](std::span<const double> masses, auto& out) {
    for (double m : masses) {
      auto f = to_fraction(m, cap);
      if (!f) return false;
      out.push_back(*f);
      const __int128 next = static_cast<__int128>(lcm / std::gcd(lcm, f->second)) * f->second;
      if (next > cap) return false;
      lcm = static_cast<std::int64_t>(next);
    }
    return true;
  };
  if (!collect(a, fa) || !collect(b, fb)) return std::nullopt;
  IntegerMasses out;
  out.denominator = lcm;
  auto rescale = [&](const auto& fracs, std::vector<std::int64_t>& dst) {
    __int128 total = 0;
    for (const auto& [num, den] : fracs) {
      dst.push_back(num * (lcm / den));
      total += dst.back();
    }
    return total == lcm;
  };
  if (!rescale(fa, out.a) || !rescale(fb, out.b)) return std::nullopt;
  return out;
}

double wasserstein_1d_counts(std::span<const double> xs_a, std::span<const std::int64_t> w_a,
                             std::span<const double> xs_b, std::span<const std::int64_t> w_b) {
  const __int128 total_a = std::accumulate(w_a.begin(), w_a.end(), __int128{0});
  const __int128 total_b = std::accumulate(w_b.begin(), w_b.end(), __int128{0});
  // cdf_diff = total_b * count_a(<= x) - total_a * count_b(<= x)
  __int128 cdf_diff = 0;
  long double acc = 0.0L;
  std::size_t i = 0, j = 0;
  double x = 0.0;
  bool started = false;
  while (i < xs_a.size() || j < xs_b.size()) {
    const double next = (j >= xs_b.size() || (i < xs_a.size() && xs_a[i] <= xs_b[j])) ? xs_a[i]
                                                                                         : xs_b[j];
    if (started && cdf_diff != 0) {
      const __int128 mag = cdf_diff < 0 ? -cdf_diff : cdf_diff;
      acc += static_cast<long double>(mag) * static_cast<long double>(next - x);
    }
    while (i < xs_a.size() && xs_a[i] == next) cdf_diff += total_b * w_a[i++];
    while (j < xs_b.size() && xs_b[j] == next) cdf_diff -= total_a * w_b[j++];
    x = next;
    started = true;
  }
  return static_cast<double>(acc / static_cast<long double>(total_a * total_b));
}

double wasserstein_1d(const DiscreteDistribution& phi, const DiscreteDistribution& psi) {
  require_same_space(phi, psi);
  if (!phi.space().is_segment()) throw std::invalid_argument("wasserstein_1d needs a segment");
  const auto xa = first_coords(phi.support());
  const auto xb = first_coords(psi.support());
  if (auto scaled = common_integer_scaling(phi.masses(), psi.masses())) {
    return wasserstein_1d_counts(xa, scaled->a, xb, scaled->b);
  }
  // Irrational-looking masses: plain floating CDF sweep.
  double fa = 0.0, fb = 0.0, acc = 0.0, x = 0.0;
  std::size_t i = 0, j = 0;
  bool started = false;
  while (i < xa.size() || j < xb.size()) {
    const double next =
        (j >= xb.size() || (i < xa.size() && xa[i] <= xb[j])) ? xa[i] : xb[j];
    if (started) acc += std::abs(fa - fb) * (next - x);
    while (i < xa.size() && xa[i] == next) fa += phi.masses()[i++];
    while (j < xb.size() && xb[j] == next) fb += psi.masses()[j++];
    x = next;
    started = true;
  }
  return acc;
}

FlowResult wasserstein_flow(const DiscreteDistribution& phi, const DiscreteDistribution& psi,
                            FlowMode mode) {
  require_same_space(phi, psi);
  if (mode != FlowMode::kRational) {
    if (auto scaled = common_integer_scaling(phi.masses(), psi.masses())) {
      return flow_integer(phi, psi, *scaled);
    }
    if (mode == FlowMode::kInteger) {
      throw ScalingOverflowError(
          "masses do not share a denominator <= 1e9; retry with FlowMode::kRational");
    }
  }
  return flow_rational(phi, psi);
}

double wasserstein(const DiscreteDistribution& phi, const DiscreteDistribution& psi) {
  if (phi.space().is_segment()) return wasserstein_1d(phi, psi);
  return wasserstein_flow(phi, psi).value;
}

bool convexity_check(const DiscreteDistribution& phi, const DiscreteDistribution& psi1,
                     const DiscreteDistribution& psi2, double t) {
  const auto mix = DiscreteDistribution::mixture(psi1, psi2, t);
  const double lhs = wasserstein(phi, mix);
  const double rhs = t * wasserstein(phi, psi1) + (1.0 - t) * wasserstein(phi, psi2);
  return lhs <= rhs + kMetricTolerance;
}

}  // namespace sortition
