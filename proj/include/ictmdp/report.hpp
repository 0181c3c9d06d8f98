#pragma once

// Serialization of results: one JSON metadata record per run plus CSV tables.

#include <iosfwd>
#include <optional>

#include <json.hpp>

#include "ictmdp/bellman.hpp"
#include "ictmdp/epidemic.hpp"
#include "ictmdp/model.hpp"
#include "ictmdp/simulator.hpp"

namespace ictmdp {

using Json = nlohmann::ordered_json;

Json to_json(const ValidationReport& report);
Json to_json(const CtmdpModel& model, const SolveReport& report, const StationaryPolicy& policy);
Json to_json(const CostEstimate& estimate);
Json to_json(const DynkinResult& result);
Json to_json(const epidemic::CarrierValue& cv);

/// state,value,mode,gradual_action,impulsive_action
void write_values_csv(std::ostream& out, const CtmdpModel& model, const ValueFunction& V,
                      const StationaryPolicy& policy);

/// c,v,first_expression,immunize
void write_carrier_csv(std::ostream& out, const epidemic::CarrierValue& cv);

}  // namespace ictmdp
