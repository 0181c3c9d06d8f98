#pragma once

// YAML model documents.
//
//   states: [s0, s1]
//   gradual_actions:   {s0: [wait], s1: [wait]}
//   impulsive_actions: {s1: [reset]}              # optional, states may be omitted
//   rates:
//     - {state: s1, action: wait, targets: {s0: 1.0}}
//     - {state: s0, action: wait, targets: {}}
//   impulse_rows:
//     - {state: s1, action: reset, probabilities: {s0: 1.0}}
//   costs:
//     gradual:   [{state: s0, action: wait, cost: 0.0}, ...]
//     impulsive: [{state: s1, action: reset, cost: 0.3}]
//   constants: {eta: 1.0, K_rate: 1.0, K_cost: 1.0, c_lower: 0.3}
//
// Unknown labels, duplicate rows and malformed values are parse errors (with
// line and field). Missing rows are left to validate_model().

#include <string>

#include "ictmdp/model.hpp"

namespace ictmdp {

CtmdpModel parse_model(const std::string& text);
CtmdpModel load_model(const std::string& path);

/// Reads a whole file; throws ParseError when it cannot be opened.
std::string read_file(const std::string& path);

}  // namespace ictmdp
