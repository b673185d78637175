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

#include "sortition/core_model.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace sortition {
namespace {

bool is_index(double v, int n) {
  return v >= 0 && v < n && std::floor(v) == v;
}

std::string describe(const MetricViolation& v) {
  std::ostringstream os;
  switch (v.axiom) {
    case MetricViolation::Axiom::kShape:
      os << "distance matrix has wrong shape";
      break;
    case MetricViolation::Axiom::kIdentity:
      os << "d(" << v.i << "," << v.i << ") != 0";
      break;
    case MetricViolation::Axiom::kNonnegativity:
      os << "d(" << v.i << "," << v.j << ") < 0";
      break;
    case MetricViolation::Axiom::kSymmetry:
      os << "d(" << v.i << "," << v.j << ") != d(" << v.j << "," << v.i << ")";
      break;
    case MetricViolation::Axiom::kTriangle:
      os << "triangle inequality fails: d(" << v.i << "," << v.j << ") > d(" << v.i << "," << v.k
         << ") + d(" << v.k << "," << v.j << ")";
      break;
  }
  return os.str();
}

MetricViolation violation(MetricViolation::Axiom axiom, int i, int j, int k) {
  MetricViolation v{axiom, i, j, k, {}};
  v.message = describe(v);
  return v;
}

}  // namespace

std::optional<MetricViolation> validate_metric(int n, std::span<const double> dist,
                                               double tolerance) {
  if (n <= 0 || dist.size() != static_cast<std::size_t>(n) * n) {
    return violation(MetricViolation::Axiom::kShape, 0, 0, 0);
  }
  auto d = [&](int i, int j) { return dist[static_cast<std::size_t>(i) * n + j]; };
  for (int i = 0; i < n; ++i) {
    if (std::abs(d(i, i)) > tolerance) return violation(MetricViolation::Axiom::kIdentity, i, i, i);
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (!(d(i, j) >= -tolerance)) {
        return violation(MetricViolation::Axiom::kNonnegativity, i, j, 0);
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (std::abs(d(i, j) - d(j, i)) > tolerance) {
        return violation(MetricViolation::Axiom::kSymmetry, i, j, 0);
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        if (d(i, j) > d(i, k) + d(k, j) + tolerance) {
          return violation(MetricViolation::Axiom::kTriangle, i, j, k);
        }
      }
    }
  }
  return std::nullopt;
}

bool operator==(const Segment& a, const Segment& b) { return a.lo == b.lo && a.hi == b.hi; }
bool operator==(const Box& a, const Box& b) { return a.dim == b.dim && a.norm == b.norm; }
bool operator==(const FiniteMetric& a, const FiniteMetric& b) {
  return a.n_points == b.n_points && a.dist == b.dist;
}
bool operator==(const MetricSpace& a, const MetricSpace& b) { return a.space_ == b.space_; }

MetricSpace MetricSpace::segment(double lo, double hi) {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw std::invalid_argument("segment requires finite lo < hi");
  }
  return MetricSpace(Segment{lo, hi});
}

MetricSpace MetricSpace::box(int dim, Norm norm) {
  if (dim < 1) throw std::invalid_argument("box dimension must be positive");
  return MetricSpace(Box{dim, norm});
}

MetricSpace MetricSpace::finite(int n_points, std::vector<double> dist) {
  if (auto v = validate_metric(n_points, dist)) {
    throw std::invalid_argument("not a metric: " + v->message);
  }
  return MetricSpace(FiniteMetric{n_points, std::move(dist)});
}

int MetricSpace::point_dim() const {
  if (is_box()) return as_box().dim;
  return 1;
}

double MetricSpace::distance(const Point& a, const Point& b) const {
  if (const auto* box = std::get_if<Box>(&space_)) {
    double acc = 0.0;
    for (int i = 0; i < box->dim; ++i) {
      const double diff = std::abs(a[i] - b[i]);
      acc = box->norm == Norm::kL1 ? acc + diff : std::max(acc, diff);
    }
    return acc;
  }
  if (const auto* fm = std::get_if<FiniteMetric>(&space_)) {
    return fm->at(static_cast<int>(a[0]), static_cast<int>(b[0]));
  }
  return std::abs(a[0] - b[0]);
}

bool MetricSpace::contains(const Point& p) const {
  if (static_cast<int>(p.size()) != point_dim()) return false;
  if (const auto* seg = std::get_if<Segment>(&space_)) {
    return p[0] >= seg->lo && p[0] <= seg->hi;
  }
  if (const auto* fm = std::get_if<FiniteMetric>(&space_)) {
    return is_index(p[0], fm->n_points);
  }
  return std::all_of(p.begin(), p.end(), [](double c) { return c >= 0.0 && c <= 1.0; });
}

double MetricSpace::diameter() const {
  if (const auto* seg = std::get_if<Segment>(&space_)) return seg->hi - seg->lo;
  if (const auto* box = std::get_if<Box>(&space_)) {
    return box->norm == Norm::kL1 ? static_cast<double>(box->dim) : 1.0;
  }
  const auto& fm = as_finite();
  return fm.dist.empty() ? 0.0 : *std::max_element(fm.dist.begin(), fm.dist.end());
}

std::optional<MetricViolation> validate_metric(const MetricSpace& space) {
  if (space.is_finite()) {
    const auto& fm = space.as_finite();
    return validate_metric(fm.n_points, fm.dist);
  }
  return std::nullopt;
}

Feature::Feature(MetricSpace space, std::vector<Point> values)
    : space_(std::move(space)), values_(std::move(values)) {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!space_.contains(values_[i])) {
      throw std::invalid_argument("feature value " + std::to_string(i) + " lies outside the space");
    }
  }
}

Feature Feature::on_segment(const MetricSpace& segment, std::vector<double> values) {
  std::vector<Point> pts;
  pts.reserve(values.size());
  for (double v : values) pts.push_back({v});
  return Feature(segment, std::move(pts));
}

Feature Feature::real(std::vector<double> values) {
  return on_segment(MetricSpace::unit_interval(), std::move(values));
}

std::vector<double> Feature::scalars() const {
  if (!space_.is_segment()) throw std::logic_error("scalars() requires a segment feature");
  std::vector<double> out;
  out.reserve(values_.size());
  for (const auto& p : values_) out.push_back(p[0]);
  return out;
}

bool Feature::is_unit_real() const {
  if (!space_.is_segment()) return false;
  return std::all_of(values_.begin(), values_.end(),
                     [](const Point& p) { return p[0] >= 0.0 && p[0] <= 1.0; });
}

DiscreteDistribution::DiscreteDistribution(MetricSpace space, std::vector<Point> support,
                                           std::vector<double> masses)
    : space_(std::move(space)) {
  if (support.size() != masses.size() || support.empty()) {
    throw std::invalid_argument("distribution needs equally many (>0) points and masses");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (!space_.contains(support[i])) {
      throw std::invalid_argument("support point outside the space");
    }
    if (!(masses[i] >= 0.0)) throw std::invalid_argument("negative mass");
    total += masses[i];
  }
  if (std::abs(total - 1.0) > kMassTolerance) {
    throw std::invalid_argument("masses must sum to 1");
  }
  std::vector<std::size_t> order(support.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return support[a] < support[b]; });
  for (std::size_t idx : order) {
    const Point& p = support[idx];
    bool merged = false;
    // Sorted order means a segment point can only merge with the last one.
    const std::size_t first = space_.is_segment() && !support_.empty() ? support_.size() - 1 : 0;
    for (std::size_t j = first; j < support_.size(); ++j) {
      if (space_.distance(support_[j], p) < kMergeTolerance) {
        masses_[j] += masses[idx];
        merged = true;
        break;
      }
    }
    if (!merged) {
      support_.push_back(p);
      masses_.push_back(masses[idx]);
    }
  }
}

DiscreteDistribution DiscreteDistribution::dirac(MetricSpace space, Point p) {
  return DiscreteDistribution(std::move(space), {std::move(p)}, {1.0});
}

DiscreteDistribution DiscreteDistribution::mixture(const DiscreteDistribution& a,
                                                   const DiscreteDistribution& b, double t) {
  if (!(a.space() == b.space())) throw std::invalid_argument("mixture of mismatched spaces");
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("mixture weight outside [0, 1]");
  std::vector<Point> pts = a.support();
  pts.insert(pts.end(), b.support().begin(), b.support().end());
  std::vector<double> m;
  m.reserve(pts.size());
  for (double v : a.masses()) m.push_back(t * v);
  for (double v : b.masses()) m.push_back((1.0 - t) * v);
  return DiscreteDistribution(a.space(), std::move(pts), std::move(m));
}

const char* to_string(SamplingMode mode) {
  return mode == SamplingMode::kWithoutReplacement ? "without_replacement" : "with_replacement";
}

SamplingMode sampling_mode_from_string(const std::string& s) {
  if (s == "without_replacement") return SamplingMode::kWithoutReplacement;
  if (s == "with_replacement") return SamplingMode::kWithReplacement;
  throw std::invalid_argument("unknown sampling mode: " + s);
}

Panel::Panel(std::size_t n, std::vector<std::size_t> members, SamplingMode mode)
    : n_(n), members_(std::move(members)), mode_(mode) {
  std::sort(members_.begin(), members_.end());
  if (members_.empty()) throw std::invalid_argument("panel must be nonempty");
  if (members_.back() >= n_) throw std::invalid_argument("panel member out of range");
  if (mode_ == SamplingMode::kWithoutReplacement &&
      std::adjacent_find(members_.begin(), members_.end()) != members_.end()) {
    throw std::invalid_argument("duplicate member in a without-replacement panel");
  }
}

Panel Panel::everyone(std::size_t n) {
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);
  return Panel(n, std::move(all), SamplingMode::kWithoutReplacement);
}

CamouflagedPopulation::CamouflagedPopulation(int h, int w, int r, std::vector<int> z,
                                             std::vector<int> labels)
    : h_(h), w_(w), r_(r), z_(std::move(z)), labels_(std::move(labels)) {
  if (h_ < 2 || w_ < 2) throw std::invalid_argument("camouflaged population needs h, w >= 2");
  if (r_ < 1) throw std::invalid_argument("camouflaged population needs r >= 1");
  if (static_cast<int>(z_.size()) != h_) throw std::invalid_argument("len(z) must equal h");
  for (int s : z_) {
    if (s != 1 && s != -1) throw std::invalid_argument("z must be a +-1 vector");
  }
  if (labels_.size() != static_cast<std::size_t>(2) * h_ * w_ * r_) {
    throw std::invalid_argument("population size must be 2 h w r");
  }
  for (int v : labels_) {
    if (v < 1 || v > 2 * h_) throw std::invalid_argument("label out of range");
  }
  for (int j = 1; j <= h_; ++j) {
    const auto zj = static_cast<std::size_t>(w_ + z_[j - 1]);
    const auto zn = static_cast<std::size_t>(w_ - z_[j - 1]);
    if (count(2 * j) != r_ * zj || count(2 * j - 1) != r_ * zn) {
      throw std::invalid_argument("label counts do not match r (w +- z_j)");
    }
  }
}

std::size_t CamouflagedPopulation::count(int value) const {
  return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), value));
}

Feature CamouflagedPopulation::feature() const {
  const int m = 2 * h_;
  std::vector<double> dist(static_cast<std::size_t>(m) * m, 1.0);
  for (int i = 0; i < m; ++i) dist[static_cast<std::size_t>(i) * m + i] = 0.0;
  std::vector<Point> pts;
  pts.reserve(labels_.size());
  for (int v : labels_) pts.push_back({static_cast<double>(v - 1)});
  return Feature(MetricSpace::finite(m, std::move(dist)), std::move(pts));
}

CamouflagedPopulation make_camouflaged(std::span<const int> z, int h, int w, int r) {
  if (h < 2 || w < 2) throw std::invalid_argument("make_camouflaged requires h, w >= 2");
  if (r < 1) throw std::invalid_argument("make_camouflaged requires r >= 1");
  if (static_cast<int>(z.size()) != h) throw std::invalid_argument("len(z) must equal h");
  std::vector<int> labels;
  labels.reserve(static_cast<std::size_t>(2) * h * w * r);
  for (int j = 1; j <= h; ++j) {
    const int zj = z[j - 1];
    if (zj != 1 && zj != -1) throw std::invalid_argument("z must be a +-1 vector");
    labels.insert(labels.end(), static_cast<std::size_t>(r * (w - zj)), 2 * j - 1);
    labels.insert(labels.end(), static_cast<std::size_t>(r * (w + zj)), 2 * j);
  }
  return CamouflagedPopulation(h, w, r, std::vector<int>(z.begin(), z.end()), std::move(labels));
}

std::vector<int> majority_estimator(std::span<const int> panel_values, int h) {
  if (h < 1) throw std::invalid_argument("majority_estimator requires h >= 1");
  std::vector<long> even(static_cast<std::size_t>(h), 0);
  std::vector<long> odd(static_cast<std::size_t>(h), 0);
  for (int v : panel_values) {
    if (v < 1 || v > 2 * h) throw std::invalid_argument("panel value out of range");
    const auto j = static_cast<std::size_t>((v - 1) / 2);
    (v % 2 == 0 ? even : odd)[j] += 1;
  }
  std::vector<int> g(static_cast<std::size_t>(h));
  for (std::size_t j = 0; j < g.size(); ++j) g[j] = even[j] > odd[j] ? 1 : -1;
  return g;
}

}  // namespace sortition
