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

// JSON encoding of the model types. The schemas are documented in README.md.

#ifndef SORTITION_JSON_IO_H_
#define SORTITION_JSON_IO_H_

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "sortition/budgeting.h"
#include "sortition/core_model.h"
#include "sortition/facility.h"
#include "sortition/multifacility.h"

namespace sortition {

using Json = nlohmann::json;

class SchemaError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

Json to_json(const MetricSpace& space);
Json to_json(const Feature& feature);
Json to_json(const DiscreteDistribution& dist);
Json to_json(const Panel& panel);
Json to_json(const CamouflagedPopulation& pop);
Json to_json(const CostModel& cost);
Json to_json(const PBInstance& inst);
Json to_json(const FacilityInstance& inst);
Json to_json(const MultiFacilityInstance& inst);

// All parsers throw SchemaError naming the offending field.
MetricSpace metric_space_from_json(const Json& j);
Feature feature_from_json(const Json& j);
DiscreteDistribution distribution_from_json(const Json& j);
Panel panel_from_json(const Json& j);
CamouflagedPopulation camouflaged_from_json(const Json& j);
CostModel cost_model_from_json(const Json& j);
PBInstance pb_instance_from_json(const Json& j);
FacilityInstance facility_instance_from_json(const Json& j);
MultiFacilityInstance multi_facility_instance_from_json(const Json& j);

}  // namespace sortition

#endif  // SORTITION_JSON_IO_H_
