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

#include "sortition/json_io.h"

#include <utility>

namespace sortition {
namespace {

const Json& field(const Json& j, const char* name) {
  if (!j.is_object()) throw SchemaError("expected an object holding \"" + std::string(name) + "\"");
  auto it = j.find(name);
  if (it == j.end()) throw SchemaError("missing field \"" + std::string(name) + "\"");
  return *it;
}

template <class T>
T get(const Json& j, const char* name) {
  try {
    return field(j, name).get<T>();
  } catch (const Json::exception& e) {
    throw SchemaError("field \"" + std::string(name) + "\": " + e.what());
  }
}

// Wraps model validation errors so callers see a single exception type.
template <class F>
auto build(const char* what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const SchemaError&) {
    throw;
  } catch (const std::exception& e) {
    throw SchemaError(std::string(what) + ": " + e.what());
  }
}

const char* norm_name(Norm n) { return n == Norm::kL1 ? "l1" : "linf"; }

Norm norm_from(const std::string& s) {
  if (s == "l1") return Norm::kL1;
  if (s == "linf") return Norm::kLinf;
  throw SchemaError("norm must be \"l1\" or \"linf\", got \"" + s + "\"");
}

}  // namespace

Json to_json(const MetricSpace& space) {
  if (space.is_segment()) {
    return {{"kind", "segment"}, {"lo", space.as_segment().lo}, {"hi", space.as_segment().hi}};
  }
  if (space.is_box()) {
    return {{"kind", "box"}, {"dim", space.as_box().dim}, {"norm", norm_name(space.as_box().norm)}};
  }
  return {{"kind", "finite"}, {"n", space.as_finite().n_points}, {"dist", space.as_finite().dist}};
}

MetricSpace metric_space_from_json(const Json& j) {
  const auto kind = get<std::string>(j, "kind");
  return build("metric space", [&] {
    if (kind == "segment") return MetricSpace::segment(get<double>(j, "lo"), get<double>(j, "hi"));
    if (kind == "box") {
      return MetricSpace::box(get<int>(j, "dim"), norm_from(get<std::string>(j, "norm")));
    }
    if (kind == "finite") {
      return MetricSpace::finite(get<int>(j, "n"), get<std::vector<double>>(j, "dist"));
    }
    throw SchemaError("unknown metric space kind \"" + kind + "\"");
  });
}

Json to_json(const Feature& feature) {
  return {{"space", to_json(feature.space())}, {"values", feature.values()}};
}

Feature feature_from_json(const Json& j) {
  auto space = metric_space_from_json(field(j, "space"));
  auto values = get<std::vector<Point>>(j, "values");
  return build("feature", [&] { return Feature(std::move(space), std::move(values)); });
}

Json to_json(const DiscreteDistribution& dist) {
  return {{"space", to_json(dist.space())},
          {"support", dist.support()},
          {"masses", dist.masses()}};
}

DiscreteDistribution distribution_from_json(const Json& j) {
  auto space = metric_space_from_json(field(j, "space"));
  auto support = get<std::vector<Point>>(j, "support");
  auto masses = get<std::vector<double>>(j, "masses");
  return build("distribution", [&] {
    return DiscreteDistribution(std::move(space), std::move(support), std::move(masses));
  });
}

Json to_json(const Panel& panel) {
  return {{"n", panel.n()}, {"members", panel.members()}, {"mode", to_string(panel.mode())}};
}

Panel panel_from_json(const Json& j) {
  const auto n = get<std::size_t>(j, "n");
  auto members = get<std::vector<std::size_t>>(j, "members");
  const auto mode = get<std::string>(j, "mode");
  return build("panel", [&] {
    return Panel(n, std::move(members), sampling_mode_from_string(mode));
  });
}

Json to_json(const CamouflagedPopulation& pop) {
  return {{"h", pop.h()}, {"w", pop.w()}, {"r", pop.r()}, {"z", pop.z()}, {"labels", pop.labels()}};
}

CamouflagedPopulation camouflaged_from_json(const Json& j) {
  return build("camouflaged population", [&] {
    return CamouflagedPopulation(get<int>(j, "h"), get<int>(j, "w"), get<int>(j, "r"),
                                 get<std::vector<int>>(j, "z"), get<std::vector<int>>(j, "labels"));
  });
}

Json to_json(const CostModel& cost) {
  if (const auto* lin = std::get_if<LinearCost>(&cost)) {
    Json j{{"type", "linear"}, {"alpha", lin->alpha}};
    if (lin->offset) j["offset"] = *lin->offset;
    return j;
  }
  if (const auto* sat = std::get_if<SaturatingShortfall>(&cost)) {
    return {{"type", "saturating_shortfall"}, {"m", sat->m}, {"b2", sat->b2}};
  }
  const auto& g = std::get<GridTable>(cost);
  return {{"type", "grid_table"},
          {"m", g.m},
          {"points_per_axis", g.points_per_axis},
          {"values", g.values}};
}

CostModel cost_model_from_json(const Json& j) {
  const auto type = get<std::string>(j, "type");
  CostModel model;
  if (type == "linear") {
    LinearCost c{get<std::vector<double>>(j, "alpha"), std::nullopt};
    if (j.contains("offset")) c.offset = get<double>(j, "offset");
    model = std::move(c);
  } else if (type == "saturating_shortfall") {
    model = SaturatingShortfall{get<std::size_t>(j, "m"), get<double>(j, "b2")};
  } else if (type == "grid_table") {
    model = GridTable{get<std::size_t>(j, "m"), get<std::size_t>(j, "points_per_axis"),
                      get<std::vector<double>>(j, "values")};
  } else {
    throw SchemaError("unknown cost model type \"" + type + "\"");
  }
  build("cost model", [&] { validate_cost(model); });
  return model;
}

Json to_json(const PBInstance& inst) {
  Json costs = Json::array();
  for (const auto& c : inst.costs()) costs.push_back(to_json(c));
  return {{"m", inst.m()}, {"budget", inst.budget()}, {"costs", costs}};
}

PBInstance pb_instance_from_json(const Json& j) {
  std::vector<CostModel> costs;
  const auto& arr = field(j, "costs");
  if (!arr.is_array()) throw SchemaError("field \"costs\" must be an array");
  for (const auto& c : arr) costs.push_back(cost_model_from_json(c));
  const auto m = get<std::size_t>(j, "m");
  const auto budget = get<double>(j, "budget");
  return build("pb instance", [&] { return PBInstance(m, budget, std::move(costs)); });
}

Json to_json(const FacilityInstance& inst) {
  return {{"space", to_json(inst.space())},
          {"candidates", inst.candidates()},
          {"agents", inst.agents()}};
}

FacilityInstance facility_instance_from_json(const Json& j) {
  auto space = metric_space_from_json(field(j, "space"));
  auto candidates = get<std::vector<Point>>(j, "candidates");
  auto agents = get<std::vector<Point>>(j, "agents");
  return build("facility instance", [&] {
    return FacilityInstance(std::move(space), std::move(candidates), std::move(agents));
  });
}

Json to_json(const MultiFacilityInstance& inst) {
  return {{"base", to_json(inst.base())}, {"ell", inst.ell()}};
}

MultiFacilityInstance multi_facility_instance_from_json(const Json& j) {
  auto base = facility_instance_from_json(field(j, "base"));
  const auto ell = get<std::size_t>(j, "ell");
  return build("multi-facility instance",
               [&] { return MultiFacilityInstance(std::move(base), ell); });
}

}  // namespace sortition
