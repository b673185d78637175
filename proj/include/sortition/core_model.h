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

// Domain types shared by every part of the library: metric spaces, features,
// finitely supported distributions, panels and camouflaged populations.
//
// All types are immutable values once constructed. Constructors validate
// their invariants and throw std::invalid_argument on violation.

#ifndef SORTITION_CORE_MODEL_H_
#define SORTITION_CORE_MODEL_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace sortition {

// A point of a metric space. Segment points have one coordinate, box points
// have `dim` coordinates, and finite-metric points hold a single integral
// index stored as a double.
using Point = std::vector<double>;

inline constexpr double kMetricTolerance = 1e-9;
inline constexpr double kMergeTolerance = 1e-12;
inline constexpr double kMassTolerance = 1e-12;

enum class Norm { kL1, kLinf };

struct Segment {
  double lo = 0.0;
  double hi = 1.0;
};

struct Box {
  int dim = 1;
  Norm norm = Norm::kLinf;
};

// Row-major n x n distance matrix.
struct FiniteMetric {
  int n_points = 0;
  std::vector<double> dist;

  double at(int i, int j) const { return dist[static_cast<std::size_t>(i) * n_points + j]; }
};

// Which metric axiom failed, with the witnessing indices. For a triangle
// violation d(i, j) > d(i, k) + d(k, j).
struct MetricViolation {
  enum class Axiom { kShape, kIdentity, kNonnegativity, kSymmetry, kTriangle };
  Axiom axiom;
  int i = 0;
  int j = 0;
  int k = 0;
  std::string message;
};

// Checks the metric axioms of an explicit distance matrix. Returns the first
// violation found (scanning identity, sign, symmetry, then triangles in
// lexicographic (i, j, k) order), or nullopt.
std::optional<MetricViolation> validate_metric(int n_points, std::span<const double> dist,
                                               double tolerance = kMetricTolerance);

class MetricSpace {
 public:
  using Variant = std::variant<Segment, Box, FiniteMetric>;

  static MetricSpace segment(double lo, double hi);
  static MetricSpace unit_interval() { return segment(0.0, 1.0); }
  static MetricSpace box(int dim, Norm norm);
  // Throws std::invalid_argument carrying the violation when `dist` is not a
  // metric.
  static MetricSpace finite(int n_points, std::vector<double> dist);

  const Variant& variant() const { return space_; }
  bool is_segment() const { return std::holds_alternative<Segment>(space_); }
  bool is_box() const { return std::holds_alternative<Box>(space_); }
  bool is_finite() const { return std::holds_alternative<FiniteMetric>(space_); }
  const Segment& as_segment() const { return std::get<Segment>(space_); }
  const Box& as_box() const { return std::get<Box>(space_); }
  const FiniteMetric& as_finite() const { return std::get<FiniteMetric>(space_); }

  // Number of coordinates of a point of this space.
  int point_dim() const;
  double distance(const Point& a, const Point& b) const;
  bool contains(const Point& p) const;
  // Largest pairwise distance in the space (finite for all variants).
  double diameter() const;

  friend bool operator==(const MetricSpace& a, const MetricSpace& b);

 private:
  explicit MetricSpace(Variant v) : space_(std::move(v)) {}
  Variant space_;
};

bool operator==(const Segment& a, const Segment& b);
bool operator==(const Box& a, const Box& b);
bool operator==(const FiniteMetric& a, const FiniteMetric& b);

std::optional<MetricViolation> validate_metric(const MetricSpace& space);

// A feature assigns every agent a point of `space`.
class Feature {
 public:
  Feature(MetricSpace space, std::vector<Point> values);
  // Real-valued feature on [0, 1].
  static Feature real(std::vector<double> values);
  static Feature on_segment(const MetricSpace& segment, std::vector<double> values);

  const MetricSpace& space() const { return space_; }
  const std::vector<Point>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  const Point& operator[](std::size_t i) const { return values_[i]; }
  // Scalar values; only valid on a Segment.
  std::vector<double> scalars() const;
  bool is_unit_real() const;

  friend bool operator==(const Feature&, const Feature&) = default;

 private:
  MetricSpace space_;
  std::vector<Point> values_;
};

// Finitely supported probability distribution. Support points closer than
// kMergeTolerance are merged and the support is kept in lexicographic order.
class DiscreteDistribution {
 public:
  DiscreteDistribution(MetricSpace space, std::vector<Point> support, std::vector<double> masses);

  static DiscreteDistribution dirac(MetricSpace space, Point p);
  // Convex combination t * a + (1 - t) * b.
  static DiscreteDistribution mixture(const DiscreteDistribution& a, const DiscreteDistribution& b,
                                      double t);

  const MetricSpace& space() const { return space_; }
  const std::vector<Point>& support() const { return support_; }
  const std::vector<double>& masses() const { return masses_; }
  std::size_t size() const { return support_.size(); }

  friend bool operator==(const DiscreteDistribution&, const DiscreteDistribution&) = default;

 private:
  MetricSpace space_;
  std::vector<Point> support_;
  std::vector<double> masses_;
};

enum class SamplingMode { kWithoutReplacement, kWithReplacement };

const char* to_string(SamplingMode mode);
SamplingMode sampling_mode_from_string(const std::string& s);

class Panel {
 public:
  // Members are sorted on construction; the sorted list must then satisfy the
  // mode's invariant (distinct for kWithoutReplacement).
  Panel(std::size_t n, std::vector<std::size_t> members, SamplingMode mode);
  static Panel everyone(std::size_t n);

  std::size_t n() const { return n_; }
  std::size_t k() const { return members_.size(); }
  const std::vector<std::size_t>& members() const { return members_; }
  SamplingMode mode() const { return mode_; }

  friend bool operator==(const Panel&, const Panel&) = default;
  friend auto operator<=>(const Panel&, const Panel&) = default;

 private:
  std::size_t n_;
  std::vector<std::size_t> members_;
  SamplingMode mode_;
};

// Population whose feature takes values in {1, ..., 2h}; value 2j is held by
// r (w + z_j) agents and value 2j - 1 by r (w - z_j) agents.
class CamouflagedPopulation {
 public:
  CamouflagedPopulation(int h, int w, int r, std::vector<int> z, std::vector<int> labels);

  int h() const { return h_; }
  int w() const { return w_; }
  int r() const { return r_; }
  const std::vector<int>& z() const { return z_; }
  // labels()[i] is the value of agent i, in {1, ..., 2h}.
  const std::vector<int>& labels() const { return labels_; }
  std::size_t n() const { return labels_.size(); }
  std::size_t count(int value) const;
  // The labels as a Feature over the finite metric {1, ..., 2h} with the
  // discrete 0/1 distance; point index = value - 1.
  Feature feature() const;

  friend bool operator==(const CamouflagedPopulation&, const CamouflagedPopulation&) = default;

 private:
  int h_;
  int w_;
  int r_;
  std::vector<int> z_;
  std::vector<int> labels_;
};

// Deterministic construction: agents are assigned values 1, 2, ..., 2h in
// consecutive index blocks. Requires len(z) = h, h, w >= 2, r >= 1 and
// z in {-1, +1}^h.
CamouflagedPopulation make_camouflaged(std::span<const int> z, int h, int w, int r);

// Entry j is +1 iff value 2(j+1) occurs strictly more often than value
// 2(j+1) - 1 among `panel_values`; ties give -1.
std::vector<int> majority_estimator(std::span<const int> panel_values, int h);

}  // namespace sortition

#endif  // SORTITION_CORE_MODEL_H_
