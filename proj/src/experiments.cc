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

#include "sortition/experiments.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "sortition/budgeting.h"
#include "sortition/facility.h"
#include "sortition/multifacility.h"
#include "sortition/representativeness.h"
#include "sortition/sampling.h"

namespace sortition {
namespace {

// Instance generators draw from streams far above any trial index.
constexpr std::uint64_t kInstanceStream = std::uint64_t{1} << 62;

Rng instance_rng(std::uint64_t seed, std::uint64_t i) {
  return make_trial_rng(seed, kInstanceStream + i);
}

class Params {
 public:
  Params(const Json& j, std::set<std::string> allowed) : j_(j) {
    if (!j_.is_object()) throw ConfigError("params must be an object");
    for (const auto& [key, value] : j_.items()) {
      if (!allowed.count(key)) throw ConfigError("unknown parameter \"" + key + "\"");
    }
  }

  template <class T>
  T get(const std::string& name, T fallback) const {
    auto it = j_.find(name);
    if (it == j_.end()) return fallback;
    try {
      return it->get<T>();
    } catch (const Json::exception& e) {
      throw ConfigError("parameter \"" + name + "\": " + e.what());
    }
  }

  bool has(const std::string& name) const { return j_.contains(name); }
  const Json& raw(const std::string& name) const { return j_.at(name); }

 private:
  const Json& j_;
};

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

class Csv {
 public:
  explicit Csv(const std::vector<std::string>& header) { line(header); }

  void line(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
  }

  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
};

std::string num(double v) { return format_real(v); }
std::string num(std::size_t v) { return std::to_string(v); }
std::string num(std::uint64_t v, int) { return std::to_string(v); }

std::string verdict(bool pass) { return pass ? "PASS" : "FAIL"; }

using Runner = std::function<RunResult(const ExperimentConfig&, bool dry)>;

// ---------------------------------------------------------------------------

RunResult rep_sweep(const ExperimentConfig& c, bool dry) {
  const Params p(c.params, {"n", "n_features", "eps", "delta", "k_grid", "mode"});
  const auto n = p.get<std::size_t>("n", 200);
  const auto ell = p.get<std::size_t>("n_features", 4);
  const auto eps = p.get<double>("eps", 0.2);
  const auto delta = p.get<double>("delta", 0.1);
  const auto mode = p.get<std::string>("mode", "without_replacement");
  require(n >= 1 && ell >= 1, "n and n_features must be positive");
  require(eps >= 0.0 && delta >= 0.0 && delta <= 1.0, "need eps >= 0 and delta in [0, 1]");
  SamplingMode sm{};
  try {
    sm = sampling_mode_from_string(mode);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  auto grid = p.get<std::vector<std::size_t>>("k_grid", default_k_grid(n));
  require(!grid.empty(), "k_grid must be nonempty");
  std::sort(grid.begin(), grid.end());
  for (std::size_t k : grid) {
    require(k >= 1 && (sm == SamplingMode::kWithReplacement || k <= n), "k_grid entries need 1 <= k <= n");
  }
  if (dry) return {};

  std::vector<Feature> features;
  for (std::size_t f = 0; f < ell; ++f) {
    Rng rng = instance_rng(c.seed, f);
    std::vector<double> values(n);
    for (auto& v : values) v = uniform01(rng);
    features.push_back(Feature::real(std::move(values)));
  }
  const auto res = min_k_sweep(features, eps, delta, grid, c.trials, c.seed, sm);
  Csv csv({"k", "failure_rate", "ci_half_width", "eps", "delta", "n_features", "seed"});
  bool monotone = true;
  for (std::size_t i = 0; i < res.rows.size(); ++i) {
    const auto& r = res.rows[i];
    csv.line({num(r.k), num(r.failure_rate), num(r.ci_half_width), num(eps), num(delta), num(ell),
              num(c.seed, 0)});
    if (i > 0) {
      const auto& prev = res.rows[i - 1];
      monotone = monotone && r.failure_rate <= prev.failure_rate + prev.ci_half_width + r.ci_half_width;
    }
  }
  const bool pass = monotone && res.min_k.has_value();
  std::string summary = "rep_sweep: min_k=" + (res.min_k ? std::to_string(*res.min_k) : "none") +
                        " eps=" + num(eps) + " delta=" + num(delta) +
                        (monotone ? "" : " (failure rate increased with k)") + ", " + verdict(pass);
  return {pass, csv.str(), summary};
}

RunResult sd_counterexample(const ExperimentConfig& c, bool dry) {
  const Params p(c.params, {"values", "k", "eps"});
  const auto values = p.get<std::vector<double>>("values", {0.0, 0.5, 0.5, 0.5, 1.0});
  const auto k = p.get<std::size_t>("k", 2);
  const auto eps = p.get<double>("eps", 0.2);
  require(!values.empty() && k >= 1 && k <= values.size(), "need 1 <= k <= len(values)");
  for (double v : values) require(v >= 0.0 && v <= 1.0, "values must lie in [0, 1]");
  require(eps >= 0.0, "eps must be nonnegative");
  if (dry) return {};

  const Feature f = Feature::real(values);
  const SegmentIndex index(f);
  Csv csv({"mode", "members", "probability", "w", "representative"});
  Probability pu(0), pr(0);
  for (auto mode : {SamplingMode::kWithoutReplacement, SamplingMode::kWithReplacement}) {
    Probability& acc = mode == SamplingMode::kWithoutReplacement ? pu : pr;
    for_each_panel(values.size(), k, mode, [&](const Panel& panel, const Probability& prob) {
      const double w = index.wasserstein(panel);
      const bool rep = w <= eps + kRepresentativeSlack;
      if (rep) acc += prob;
      std::string members;
      for (std::size_t m : panel.members()) members += (members.empty() ? "" : " ") + std::to_string(m);
      csv.line({to_string(mode), members, num(boost::rational_cast<double>(prob)), num(w),
                rep ? "1" : "0"});
    });
  }
  const bool pass = pu < pr;
  char buf[128];
  std::snprintf(buf, sizeof buf, "P_U=%.6f, P_R=%.6f, %s", boost::rational_cast<double>(pu),
                boost::rational_cast<double>(pr), verdict(pass).c_str());
  return {pass, csv.str(), buf};
}

RunResult concentration(const ExperimentConfig& c, bool dry) {
  const Params p(c.params, {"n", "features", "ks", "ts"});
  const auto n = p.get<std::size_t>("n", 200);
  const auto nf = p.get<std::size_t>("features", 5);
  const auto ks = p.get<std::vector<std::size_t>>("ks", {25, 100});
  const auto ts = p.get<std::vector<double>>("ts", {0.1, 0.2, 0.3});
  require(n >= 1 && nf >= 1 && !ks.empty() && !ts.empty(), "need n, features, ks and ts");
  for (std::size_t k : ks) require(k >= 1 && k <= n, "ks entries need 1 <= k <= n");
  for (double t : ts) require(t > 0.0, "ts entries must be positive");
  if (dry) return {};

  Csv csv({"feature", "k", "t", "mu_hat", "tail_rate", "ci", "bound", "seed"});
  bool pass = true;
  for (std::size_t f = 0; f < nf; ++f) {
    Rng rng = instance_rng(c.seed, f);
    std::vector<double> values(n);
    for (auto& v : values) v = uniform01(rng);
    const SegmentIndex index(Feature::real(values));
    for (std::size_t k : ks) {
      const auto ws = run_trials({n, k, SamplingMode::kWithoutReplacement, c.trials, c.seed},
                                 [&](const Panel& panel, Rng&) { return index.wasserstein(panel); });
      const double mu = estimate(ws).mean;
      for (double t : ts) {
        std::vector<double> hits(ws.size());
        for (std::size_t i = 0; i < ws.size(); ++i) hits[i] = ws[i] >= mu + t ? 1.0 : 0.0;
        const auto e = estimate(hits, Interval::kProportion);
        const double bound = std::exp(-t * t * static_cast<double>(k) / 4.0);
        pass = pass && e.mean <= bound + 3.0 * e.half_width_95;
        csv.line({num(f), num(k), num(t), num(mu), num(e.mean), num(e.half_width_95), num(bound),
                  num(c.seed, 0)});
      }
    }
  }
  return {pass, csv.str(), "concentration: tail rates vs exp(-t^2 k / 4), " + verdict(pass)};
}

RunResult facility_tail(const ExperimentConfig& c, bool dry) {
  const Params p(c.params, {"T", "delta", "star_k", "random_instances", "n", "grid_points"});
  const auto T = p.get<double>("T", 3.0);
  const auto delta = p.get<double>("delta", 0.1);
  const auto star_k = p.get<int>("star_k", 50);
  const auto count = p.get<std::size_t>("random_instances", 20);
  const auto n = p.get<std::size_t>("n", 100);
  const auto grid = p.get<std::size_t>("grid_points", 11);
  require(T > 2.0, "facility_tail requires T > 2");
  require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
  require(star_k >= 0 && grid >= 2, "need star_k >= 0 and grid_points >= 2");
  const std::size_t k = tail_panel_size(T, delta);
  if (star_k > 0) require(k <= static_cast<std::size_t>(2 * star_k + 1), "k exceeds the star population");
  if (count > 0) require(k <= n, "k exceeds the random instance population");
  if (dry) return {};

  std::vector<std::pair<std::string, FacilityInstance>> instances;
  if (star_k > 0) instances.emplace_back("star", star_instance(star_k));
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng = instance_rng(c.seed, i);
    instances.emplace_back("line_" + std::to_string(i), random_line_instance(n, grid, rng));
  }
  Csv csv({"instance", "T", "delta", "k", "p_within", "ci", "seed"});
  bool pass = true;
  double worst = 1.0;
  for (const auto& [name, inst] : instances) {
    const auto e = tail_probability(inst, k, T, c.trials, c.seed);
    pass = pass && e.mean >= 1.0 - delta - 3.0 * e.half_width_95;
    worst = std::min(worst, e.mean);
    csv.line({name, num(T), num(delta), num(k), num(e.mean), num(e.half_width_95), num(c.seed, 0)});
  }
  return {pass, csv.str(),
          "facility_tail: k=" + std::to_string(k) + " min p_within=" + num(worst) +
              " target=" + num(1.0 - delta) + ", " + verdict(pass)};
}

FacilityInstance random_box_instance(std::size_t t, Norm norm, std::size_t n, double step,
                                     Rng& rng) {
  std::vector<Point> agents(n, Point(t));
  for (auto& a : agents) {
    for (auto& v : a) v = uniform01(rng);
  }
  std::vector<double> axis;
  for (std::size_t i = 0;; ++i) {
    const double v = static_cast<double>(i) * step;
    if (v >= 1.0 - 1e-12) break;
    axis.push_back(v);
  }
  axis.push_back(1.0);
  std::vector<Point> candidates;
  std::vector<std::size_t> idx(t, 0);
  while (true) {
    Point q(t);
    for (std::size_t d = 0; d < t; ++d) q[d] = axis[idx[d]];
    candidates.push_back(std::move(q));
    std::size_t d = t;
    while (d > 0 && ++idx[d - 1] == axis.size()) idx[--d] = 0;
    if (d == 0) break;
  }
  return FacilityInstance(MetricSpace::box(static_cast<int>(t), norm), std::move(candidates),
                          std::move(agents));
}

RunResult facility_welfare(const ExperimentConfig& c, bool dry) {
  const Params p(c.params, {"dims", "eps", "c", "n", "grid_step", "norm"});
  const auto dims = p.get<std::vector<std::size_t>>("dims", {1, 2});
  const auto epss = p.get<std::vector<double>>("eps", {0.2, 0.1});
  const auto cc = p.get<double>("c", 4.0);
  const auto n = p.get<std::size_t>("n", 500);
  const auto step = p.get<double>("grid_step", 0.1);
  const auto norm_s = p.get<std::string>("norm", "l1");
  require(norm_s == "l1" || norm_s == "linf", "norm must be l1 or linf");
  require(!dims.empty() && !epss.empty() && cc > 0.0 && step > 0.0, "bad welfare parameters");
  for (std::size_t t : dims) require(t >= 1 && t <= 4, "dims entries must lie in 1..4");
  std::vector<std::size_t> ks;
  for (double e : epss) {
    require(e > 0.0, "eps entries must be positive");
    ks.push_back(static_cast<std::size_t>(std::ceil(cc / (e * e) - 1e-9)));
    require(ks.back() <= n, "k = c / eps^2 exceeds n");
  }
  if (dry) return {};

  const Norm norm = norm_s == "l1" ? Norm::kL1 : Norm::kLinf;
  Csv csv({"t", "eps", "k", "mean_sc", "opt", "gap", "ci", "seed"});
  bool pass = true;
  for (std::size_t t : dims) {
    Rng rng = instance_rng(c.seed, t);
    const auto inst = random_box_instance(t, norm, n, step, rng);
    const double opt = social_opt(inst);
    for (std::size_t i = 0; i < epss.size(); ++i) {
      const auto e = expected_panel_choice_cost(inst, ks[i], c.trials, c.seed);
      const double gap = e.mean - (1.0 + epss[i]) * opt;
      pass = pass && gap <= 3.0 * e.half_width_95;
      csv.line({num(t), num(epss[i]), num(ks[i]), num(e.mean), num(opt), num(gap),
                num(e.half_width_95), num(c.seed, 0)});
    }
  }
  return {pass, csv.str(), "facility_welfare: E[SC] vs (1+eps) Opt, " + verdict(pass)};
}

RunResult facility_star(const ExperimentConfig& c, bool dry) {
  const Params p(c.params, {"k_max"});
  const auto k_max = p.get<int>("k_max", 6);
  require(k_max >= 1 && k_max <= 8, "k_max must lie in 1..8");
  if (dry) return {};

  Csv csv({"k", "n", "opt", "p_far", "threshold", "ok"});
  bool pass = true;
  double worst = 1.0;
  for (int k = 1; k <= k_max; ++k) {
    const auto inst = star_instance(k);
    const double opt = social_opt(inst);
    const auto pf = exact_far_probability(inst, static_cast<std::size_t>(k), 2.0 * opt);
    const bool ok = pf >= Probability(1, 4);
    pass = pass && ok;
    worst = std::min(worst, boost::rational_cast<double>(pf));
    csv.line({std::to_string(k), num(inst.n()), num(opt), num(boost::rational_cast<double>(pf)),
              "0.25", ok ? "1" : "0"});
  }
  return {pass, csv.str(), "facility_star: min P[far]=" + num(worst) + ", " + verdict(pass)};
}

RunResult pb_welfare(const ExperimentConfig& c, bool dry) {
  const Params p(c.params,
                 {"n", "m", "budget", "instances", "ks", "eps", "rho", "tau", "cover_step"});
  const auto n = p.get<std::size_t>("n", 200);
  const auto m = p.get<std::size_t>("m", 2);
  const auto budget = p.get<double>("budget", 1.0);
  const auto count = p.get<std::size_t>("instances", 10);
  auto ks = p.get<std::vector<std::size_t>>("ks", {4, 16, 64});
  const auto eps = p.get<double>("eps", 0.1);
  const auto rho = p.get<double>("rho", 1.0);
  const auto tau = p.get<double>("tau", 0.0);
  const auto step = p.get<double>("cover_step", 0.05);
  require(m >= 2 && budget > 0.0 && budget <= static_cast<double>(m), "need m >= 2, 0 < B <= m");
  require(n >= 1 && count >= 1 && !ks.empty(), "need n, instances and ks");
  require(rho >= 1.0 && tau >= 0.0 && eps >= 0.0 && step > 0.0, "bad rho, tau, eps or step");
  std::sort(ks.begin(), ks.end());
  for (std::size_t k : ks) require(k >= 1 && k <= n, "ks entries need 1 <= k <= n");
  if (dry) return {};

  std::vector<Allocation> cover;
  if (rho != 1.0 || tau != 0.0) cover = simplex_cover(m, budget, step);
  Csv csv({"instance", "k", "eps", "eta", "tau", "rho", "gap_or_rate", "ci", "seed"});
  bool pass = true;
  std::vector<double> mean_gap(ks.size(), 0.0);
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng = instance_rng(c.seed, i);
    const auto inst = random_linear_instance(n, m, budget, rng);
    std::vector<WelfareReport> reps;
    for (std::size_t ki = 0; ki < ks.size(); ++ki) {
      reps.push_back(welfare_experiment(inst, ks[ki], eps, rho, tau, c.trials, c.seed, cover));
      const auto& r = reps.back();
      mean_gap[ki] += r.gap / static_cast<double>(count);
      csv.line({num(i), num(ks[ki]), num(eps), "0", num(tau), num(rho), num(r.gap),
                num(r.social_cost.half_width_95), num(c.seed, 0)});
      if (ki > 0) {
        const auto& a = reps[ki - 1];
        pass = pass && r.gap <= a.gap + a.social_cost.half_width_95 + r.social_cost.half_width_95;
      }
    }
    pass = pass && reps.back().within;
  }
  for (std::size_t ki = 1; ki < ks.size(); ++ki) pass = pass && mean_gap[ki] <= mean_gap[ki - 1];
  std::string gaps;
  for (std::size_t ki = 0; ki < ks.size(); ++ki) {
    gaps += (ki ? " " : "") + std::string("k=") + std::to_string(ks[ki]) + ":" + num(mean_gap[ki]);
  }
  return {pass, csv.str(), "pb_welfare: mean gaps " + gaps + ", " + verdict(pass)};
}

PBInstance two_block_instance(std::size_t n) {
  std::vector<CostModel> costs;
  for (std::size_t i = 0; i < n; ++i) {
    costs.emplace_back(LinearCost{i < n / 2 ? std::vector<double>{1.0, 0.0}
                                            : std::vector<double>{0.0, 1.0},
                                  std::nullopt});
  }
  return PBInstance(2, 1.0, std::move(costs));
}

RunResult pb_core(const ExperimentConfig& c, bool dry) {
  const Params p(c.params, {"n", "k", "eps", "eta", "tau", "rho", "panel_step", "delta",
                            "instance"});
  const auto n = p.get<std::size_t>("n", 200);
  const auto k = p.get<std::size_t>("k", 64);
  const auto eps = p.get<double>("eps", 0.25);
  const auto eta = p.get<double>("eta", 0.0);
  const auto tau = p.get<double>("tau", 0.0);
  const auto rho = p.get<double>("rho", 1.0);
  const auto step = p.get<double>("panel_step", 0.05);
  const auto delta = p.get<double>("delta", 0.1);
  require(eps > 0.0 && eta >= 0.0 && tau >= 0.0 && rho >= 1.0 && step > 0.0,
          "need eps > 0, eta, tau >= 0, rho >= 1, panel_step > 0");
  require(delta >= 0.0 && delta <= 1.0, "delta must lie in [0, 1]");
  std::optional<PBInstance> inst;
  try {
    inst = p.has("instance") ? pb_instance_from_json(p.raw("instance")) : two_block_instance(n);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  require(k >= 1 && k <= inst->n(), "need 1 <= k <= n");
  if (dry) return {};

  const auto cover = simplex_cover(inst->m(), inst->budget(), step);
  const auto rep = core_extrapolation_experiment(*inst, k, eps, eta, tau, rho, c.trials, c.seed, cover);
  Csv csv({"k", "eps", "eta", "tau", "rho", "gap_or_rate", "ci", "seed", "unresolved"});
  csv.line({num(k), num(eps), num(eta), num(tau), num(rho), num(rep.failure_rate.mean),
            num(rep.failure_rate.half_width_95), num(c.seed, 0), num(rep.unresolved)});
  const bool pass = rep.failure_rate.mean <= delta;
  return {pass, csv.str(),
          "pb_core: failure rate=" + num(rep.failure_rate.mean) + " (" +
              std::to_string(rep.unresolved) + " unresolved) delta=" + num(delta) + ", " +
              verdict(pass)};
}

RunResult pb_lower(const ExperimentConfig& c, bool dry) {
  const Params p(c.params, {"h", "w", "r", "z", "ks"});
  const auto h = p.get<int>("h", 4);
  const auto w = p.get<int>("w", 3);
  const auto r = p.get<int>("r", 4);
  auto z = p.get<std::vector<int>>("z", {});
  if (z.empty()) {
    for (int j = 0; j < h; ++j) z.push_back(j % 2 == 0 ? 1 : -1);
  }
  require(h >= 2 && w >= 2 && r >= 1, "need h, w >= 2 and r >= 1");
  require(z.size() == static_cast<std::size_t>(h), "z must have length h");
  for (int v : z) require(v == 1 || v == -1, "z entries must be +1 or -1");
  const std::size_t n = static_cast<std::size_t>(2 * h * w * r);
  auto ks = p.get<std::vector<std::size_t>>("ks", {});
  if (ks.empty()) {
    for (std::size_t k = 4; k < n; k *= 2) ks.push_back(k);
    ks.push_back(n);
  }
  for (std::size_t k : ks) require(k >= 1 && k <= n, "ks entries need 1 <= k <= n");
  if (dry) return {};

  const auto inst = pb_lower_instance(z, h, w, r);
  const auto best = optimal_allocation(inst, {}, {});
  const double closed = 0.5 - 1.0 / (2.0 * w);
  bool pattern = true;
  for (int j = 0; j < h; ++j) {
    const bool even_funded = best.x[static_cast<std::size_t>(2 * j + 1)] == 1.0;
    const bool odd_funded = best.x[static_cast<std::size_t>(2 * j)] == 1.0;
    pattern = pattern && even_funded == (z[j] == 1) && odd_funded == (z[j] == -1);
  }
  const bool opt_ok = std::fabs(best.cost - closed) <= 1e-12;
  Csv csv({"k", "success_rate", "ci", "h", "w", "r", "seed"});
  for (std::size_t k : ks) {
    const auto e = recovery_success(z, h, w, r, k, c.trials, c.seed);
    csv.line({num(k), num(e.mean), num(e.half_width_95), std::to_string(h), std::to_string(w),
              std::to_string(r), num(c.seed, 0)});
  }
  const bool pass = opt_ok && pattern;
  return {pass, csv.str(),
          "pb_lower: social_opt=" + num(best.cost) + " closed_form=" + num(closed) +
              (pattern ? " greedy recovers z" : " greedy misses z") + ", " + verdict(pass)};
}

RunResult multifacility_line(const ExperimentConfig& c, bool dry) {
  const Params p(c.params, {"eps", "c", "ells", "instances", "n", "grid_points"});
  const auto epss = p.get<std::vector<double>>("eps", {0.2, 0.1});
  const auto cc = p.get<double>("c", 4.0);
  const auto ells = p.get<std::vector<std::size_t>>("ells", {1, 2, 3});
  const auto count = p.get<std::size_t>("instances", 10);
  const auto n = p.get<std::size_t>("n", 500);
  const auto grid = p.get<std::size_t>("grid_points", 21);
  require(!epss.empty() && !ells.empty() && count >= 1 && cc > 0.0, "bad multifacility parameters");
  require(grid >= 2, "grid_points must be at least 2");
  for (std::size_t l : ells) require(l >= 1 && l <= grid, "ells entries need 1 <= ell <= grid_points");
  std::vector<std::size_t> ks;
  for (double e : epss) {
    require(e > 0.0, "eps entries must be positive");
    ks.push_back(static_cast<std::size_t>(std::ceil(cc / (e * e) - 1e-9)));
    require(ks.back() <= n, "k = c / eps^2 exceeds n");
  }
  if (dry) return {};

  Csv csv({"instance", "ell", "k", "eps", "mean_sc", "opt", "w_mean", "ci", "seed"});
  bool pass = true;
  std::string table;
  for (std::size_t ei = 0; ei < epss.size(); ++ei) {
    std::vector<EstimateWithCI> per_ell;
    for (std::size_t li = 0; li < ells.size(); ++li) {
      std::vector<double> gaps;
      for (std::size_t i = 0; i < count; ++i) {
        Rng rng = instance_rng(c.seed, i);
        const MultiFacilityInstance inst(random_line_instance(n, grid, rng), ells[li]);
        const double opt = multi_social_opt(inst).cost;
        const auto s = multi_panel_trials(inst, ks[ei], c.trials, c.seed);
        pass = pass && s.social_cost.mean - opt <= epss[ei] + 3.0 * s.social_cost.half_width_95;
        gaps.push_back(s.social_cost.mean - opt);
        csv.line({num(i), num(ells[li]), num(ks[ei]), num(epss[ei]), num(s.social_cost.mean),
                  num(opt), num(s.w.mean), num(s.social_cost.half_width_95), num(c.seed, 0)});
      }
      // Instance-level interval: the instances are themselves random draws.
      per_ell.push_back(estimate(gaps));
    }
    bool flat = true;
    for (const auto& a : per_ell) {
      pass = pass && a.mean <= epss[ei];
      for (const auto& b : per_ell) flat = flat && a.mean - b.mean <= a.half_width_95 + b.half_width_95;
    }
    pass = pass && flat;
    table += " eps=" + num(epss[ei]) + ":";
    for (std::size_t li = 0; li < ells.size(); ++li) {
      table += (li ? "/" : "") + num(per_ell[li].mean) + "+-" + num(per_ell[li].half_width_95);
    }
    table += flat ? " flat" : " not-flat";
  }
  return {pass, csv.str(), "multifacility_line: mean gap per ell" + table + ", " + verdict(pass)};
}

RunResult multifacility_impossible(const ExperimentConfig& c, bool dry) {
  const Params p(c.params, {"k_max", "extra"});
  const auto k_max = p.get<std::size_t>("k_max", 6);
  const auto extra = p.get<std::size_t>("extra", 2);
  require(k_max >= 1 && k_max <= 8 && extra >= 1, "need 1 <= k_max <= 8 and extra >= 1");
  if (dry) return {};

  const std::vector<std::vector<std::size_t>> decisions{{0, 0}, {0, 1}, {0, 2},
                                                        {1, 1}, {1, 2}, {2, 2}};
  const char* names[] = {"0", "0.5", "1"};
  Csv csv({"k", "n", "decision", "outlier", "expected_cost", "opt"});
  bool pass = true;
  for (std::size_t k = 1; k <= k_max; ++k) {
    const std::size_t n = k + extra;
    const auto fam = impossibility_instance(n);
    for (const auto& d : decisions) {
      bool defeated = false;
      for (std::size_t pi = 0; pi < fam.populations.size(); ++pi) {
        const auto& pop = fam.populations[pi];
        const double opt = multi_social_opt(pop).cost;
        const auto& agents = pop.base().agents();
        const double e = exact_expected_social_cost(pop, k, [&](const Panel& panel) {
          const bool all_zero = std::all_of(panel.members().begin(), panel.members().end(),
                                            [&](std::size_t m) { return agents[m][0] == 0.0; });
          return all_zero ? d : panel_multi_optimum(pop, panel).facilities;
        });
        pass = pass && opt == 0.0;
        defeated = defeated || (opt == 0.0 && e > 0.0);
        csv.line({num(k), num(n), std::string(names[d[0]]) + " " + names[d[1]],
                  num(fam.outliers[pi]), num(e), num(opt)});
      }
      pass = pass && defeated;
    }
  }
  return {pass, csv.str(),
          "multifacility_impossible: every all-zero-panel decision loses to some population, " +
              verdict(pass)};
}

struct Kind {
  KindInfo info;
  Runner run;
};

const std::vector<Kind>& kinds() {
  static const std::vector<Kind> table{
      {{"rep_sweep", "n=200 n_features=4 eps=0.2 delta=0.1 k_grid=[2,4,..,n] mode",
        "panel size for eps-representativeness of several real features"},
       rep_sweep},
      {{"sd_counterexample", "values=[0,.5,.5,.5,1] k=2 eps=0.2",
        "sampling without replacement does not stochastically dominate with replacement"},
       sd_counterexample},
      {{"concentration", "n=200 features=5 ks=[25,100] ts=[0.1,0.2,0.3]",
        "concentration: P[W >= mu + t] <= exp(-t^2 k / 4)"},
       concentration},
      {{"facility_tail", "T=3 delta=0.1 star_k=50 random_instances=20 n=100 grid_points=11",
        "tail bound: d(q(S), q*) <= T Opt with probability 1 - delta"},
       facility_tail},
      {{"facility_welfare", "dims=[1,2] eps=[0.2,0.1] c=4 n=500 grid_step=0.1 norm=l1",
        "box welfare: E[SC(q(S))] <= (1 + eps) Opt"},
       facility_welfare},
      {{"facility_star", "k_max=6", "star lower bound: P[d(q(S), q*) >= 2 Opt] >= 1/4"},
       facility_star},
      {{"pb_welfare", "n=200 m=2 budget=1 instances=10 ks=[4,16,64] eps=0.1 rho=1 tau=0 cover_step=0.05",
        "budgeting welfare: E[SC(x(S))] <= rho Social-Opt + tau + eps"},
       pb_welfare},
      {{"pb_core", "n=200 k=64 eps=0.25 eta=0 tau=0 rho=1 panel_step=0.05 delta=0.1 [instance]",
        "core extrapolation: a panel core point is in the (eta+eps, tau+eps, rho) population core"},
       pb_core},
      {{"pb_lower", "h=4 w=3 r=4 z=[+1,-1,..] ks=[4,8,..,n]",
        "budgeting lower bound: camouflaged instance optimum and recovery game"},
       pb_lower},
      {{"multifacility_line", "eps=[0.2,0.1] c=4 ells=[1,2,3] instances=10 n=500 grid_points=21",
        "line multi-facility: E[SC(y(S))] <= Opt + eps for every ell, gap flat in ell"},
       multifacility_line},
      {{"multifacility_impossible", "k_max=6 extra=2",
        "multi-facility impossibility: no multiplicative guarantee for ell = 2"},
       multifacility_impossible},
  };
  return table;
}

const Kind& find_kind(const std::string& name) {
  for (const auto& k : kinds()) {
    if (k.info.kind == name) return k;
  }
  throw ConfigError("unknown kind \"" + name + "\"; run `sortition-lab list`");
}

}  // namespace

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

ExperimentConfig parse_config(const Json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> allowed{"kind", "params", "seed", "trials", "output"};
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown config field \"" + key + "\"");
  }
  ExperimentConfig c;
  try {
    if (!j.contains("kind")) throw ConfigError("config needs a \"kind\"");
    c.kind = j.at("kind").get<std::string>();
    if (j.contains("params")) c.params = j.at("params");
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("trials")) c.trials = j.at("trials").get<std::size_t>();
    if (j.contains("output")) c.output = j.at("output").get<std::string>();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (c.trials < 1) throw ConfigError("trials must be at least 1");
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  try {
    return parse_config(Json::parse(in));
  } catch (const Json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void validate_config(const ExperimentConfig& config) {
  if (config.trials < 1) throw ConfigError("trials must be at least 1");
  find_kind(config.kind).run(config, true);
}

const std::vector<KindInfo>& list_kinds() {
  static const std::vector<KindInfo> infos = [] {
    std::vector<KindInfo> out;
    for (const auto& k : kinds()) out.push_back(k.info);
    return out;
  }();
  return infos;
}

RunResult run_experiment(const ExperimentConfig& config) {
  validate_config(config);
  return find_kind(config.kind).run(config, false);
}

void write_file_atomically(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
}

}  // namespace sortition
