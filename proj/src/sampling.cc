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

#include "sortition/sampling.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

namespace sortition {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

Rng make_trial_rng(std::uint64_t seed, std::uint64_t trial) {
  return Rng(splitmix64(seed ^ trial));
}

std::size_t uniform_index(Rng& rng, std::size_t n) {
  // Lemire's multiply-shift with rejection.
  const std::uint64_t range = n;
  unsigned __int128 m = static_cast<unsigned __int128>(rng()) * range;
  auto low = static_cast<std::uint64_t>(m);
  if (low < range) {
    const std::uint64_t threshold = (0 - range) % range;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(rng()) * range;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::size_t>(m >> 64);
}

double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

void TrialPlan::validate() const {
  if (k < 1) throw std::invalid_argument("panel size must be at least 1");
  if (mode == SamplingMode::kWithoutReplacement && k > n) {
    throw std::invalid_argument("panel size exceeds population without replacement");
  }
  if (n < 1) throw std::invalid_argument("population must be nonempty");
  if (trials < 1) throw std::invalid_argument("need at least one trial");
}

TrialError::TrialError(std::size_t trial, const std::string& what)
    : std::runtime_error("trial " + std::to_string(trial) + ": " + what), trial_(trial) {}

Panel draw_panel(std::size_t n, std::size_t k, SamplingMode mode, Rng& rng) {
  TrialPlan{n, k, mode, 1, 0}.validate();
  std::vector<std::size_t> members;
  members.reserve(k);
  if (mode == SamplingMode::kWithReplacement) {
    for (std::size_t i = 0; i < k; ++i) members.push_back(uniform_index(rng, n));
  } else {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + uniform_index(rng, n - i);
      std::swap(perm[i], perm[j]);
      members.push_back(perm[i]);
    }
  }
  return Panel(n, std::move(members), mode);
}

std::vector<double> panel_weights(std::size_t n, const Panel& panel) {
  std::vector<double> w(n, 0.0);
  for (std::size_t m : panel.members()) {
    if (m >= n) throw std::out_of_range("panel member outside the population");
    w[m] += 1.0;
  }
  return w;
}

namespace {

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 acc = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    acc = acc * (n - k + i) / i;
    if (acc > static_cast<unsigned __int128>(UINT64_MAX)) return UINT64_MAX;
  }
  return static_cast<std::uint64_t>(acc);
}

std::int64_t checked_pow(std::int64_t base, std::size_t exp) {
  __int128 acc = 1;
  for (std::size_t i = 0; i < exp; ++i) {
    acc *= base;
    if (acc > INT64_MAX) throw std::length_error("n^k overflows the exact probability type");
  }
  return static_cast<std::int64_t>(acc);
}

}  // namespace

std::uint64_t panel_count(std::size_t n, std::size_t k, SamplingMode mode) {
  if (mode == SamplingMode::kWithoutReplacement) return binomial(n, k);
  return binomial(n + k - 1, k);
}

void for_each_panel(std::size_t n, std::size_t k, SamplingMode mode,
                    const std::function<void(const Panel&, const Probability&)>& visit) {
  TrialPlan{n, k, mode, 1, 0}.validate();
  const std::uint64_t count = panel_count(n, k, mode);
  if (count > kEnumerationCap) {
    throw std::length_error("panel enumeration of " + std::to_string(count) +
                            " panels exceeds the cap of 1e6");
  }
  std::vector<std::size_t> members(k);
  if (mode == SamplingMode::kWithoutReplacement) {
    const Probability p(1, static_cast<std::int64_t>(count));
    std::iota(members.begin(), members.end(), 0);
    while (true) {
      visit(Panel(n, members, mode), p);
      std::size_t i = k;
      while (i > 0 && members[i - 1] == n - k + i - 1) --i;
      if (i == 0) break;
      ++members[i - 1];
      for (std::size_t j = i; j < k; ++j) members[j] = members[j - 1] + 1;
    }
    return;
  }
  // Multisets in nondecreasing order; probability = multinomial / n^k.
  const std::int64_t total = checked_pow(static_cast<std::int64_t>(n), k);
  std::vector<std::int64_t> factorial(k + 1, 1);
  for (std::size_t i = 1; i <= k; ++i) factorial[i] = factorial[i - 1] * static_cast<std::int64_t>(i);
  std::fill(members.begin(), members.end(), 0);
  while (true) {
    // k! / prod(mult!) computed incrementally to avoid overflow of k!.
    std::int64_t ways = 1;
    std::size_t run = 0;
    for (std::size_t i = 0; i < k; ++i) {
      run = (i > 0 && members[i] == members[i - 1]) ? run + 1 : 1;
      ways = ways * static_cast<std::int64_t>(i + 1) / static_cast<std::int64_t>(run);
    }
    visit(Panel(n, members, mode), Probability(ways, total));
    std::size_t i = k;
    while (i > 0 && members[i - 1] == n - 1) --i;
    if (i == 0) break;
    ++members[i - 1];
    for (std::size_t j = i; j < k; ++j) members[j] = members[i - 1];
  }
}

std::vector<WeightedPanel> enumerate_panels(std::size_t n, std::size_t k, SamplingMode mode) {
  std::vector<WeightedPanel> out;
  for_each_panel(n, k, mode, [&](const Panel& p, const Probability& pr) {
    out.push_back(WeightedPanel{p, pr});
  });
  return out;
}

std::size_t worker_count() {
  if (const char* env = std::getenv("SORTITION_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min(worker_count(), std::max<std::size_t>(count, 1));
  std::mutex mu;
  std::size_t failed_index = count;
  std::exception_ptr failure;
  auto run_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (i < failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
        return;
      }
    }
  };
  if (workers <= 1) {
    run_range(0, count);
  } else {
    std::vector<std::jthread> threads;
    const std::size_t chunk = (count + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(count, begin + chunk);
      if (begin >= end) break;
      threads.emplace_back(run_range, begin, end);
    }
  }
  if (failure) {
    try {
      std::rethrow_exception(failure);
    } catch (const TrialError&) {
      throw;
    } catch (const std::exception& e) {
      throw TrialError(failed_index, e.what());
    }
  }
}

std::vector<double> run_trials(const TrialPlan& plan, std::size_t dim,
                               const PanelStatistics& statistic) {
  plan.validate();
  std::vector<double> out(plan.trials * dim, 0.0);
  parallel_for(plan.trials, [&](std::size_t t) {
    Rng rng = make_trial_rng(plan.seed, t);
    const Panel panel = draw_panel(plan.n, plan.k, plan.mode, rng);
    statistic(panel, rng, std::span<double>(out.data() + t * dim, dim));
  });
  return out;
}

std::vector<double> run_trials(const TrialPlan& plan, const PanelStatistic& statistic) {
  return run_trials(plan, 1, [&](const Panel& p, Rng& rng, std::span<double> row) {
    row[0] = statistic(p, rng);
  });
}

EstimateWithCI estimate_column(std::span<const double> matrix, std::size_t dim, std::size_t col,
                               Interval interval) {
  const std::size_t n = dim == 0 ? 0 : matrix.size() / dim;
  if (n == 0) throw std::invalid_argument("estimate of an empty sample");
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = matrix[i * dim + col];
    if (interval == Interval::kProportion && v != 0.0 && v != 1.0) {
      throw std::invalid_argument("proportion estimate needs 0/1 values");
    }
    sum += v;
  }
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = matrix[i * dim + col] - mean;
    ss += d * d;
  }
  const double nd = static_cast<double>(n);
  const double sd = n > 1 ? std::sqrt(ss / (nd - 1.0)) : 0.0;
  double half = 1.96 * sd / std::sqrt(nd);
  if (interval == Interval::kProportion && (sum < 10.0 || nd - sum < 10.0)) {
    const double z = 1.96;
    const double z2 = z * z;
    const double center = (mean + z2 / (2.0 * nd)) / (1.0 + z2 / nd);
    const double spread =
        z * std::sqrt(mean * (1.0 - mean) / nd + z2 / (4.0 * nd * nd)) / (1.0 + z2 / nd);
    half = std::max(mean - (center - spread), (center + spread) - mean);
  }
  return EstimateWithCI{mean, half, n};
}

EstimateWithCI estimate(std::span<const double> values, Interval interval) {
  return estimate_column(values, 1, 0, interval);
}

EstimateWithCI monte_carlo(const TrialPlan& plan, const PanelStatistic& statistic,
                           Interval interval) {
  const auto values = run_trials(plan, statistic);
  return estimate(values, interval);
}

}  // namespace sortition
