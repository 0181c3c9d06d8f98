#include "ictmdp/model_io.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "ictmdp/error.hpp"
#include "yaml_util.hpp"

namespace ictmdp {

namespace {

using detail::as;
using detail::get;
using detail::line_of;
using detail::require;

struct Catalog {
  std::vector<std::vector<std::string>> lists;

  ActionIndex resolve(StateIndex x, const YAML::Node& node, const std::string& field) const {
    const auto name = as<std::string>(node, field);
    const auto& list = lists[x];
    for (ActionIndex a = 0; a < list.size(); ++a)
      if (list[a] == name) return a;
    throw ParseError(field, line_of(node), "unknown action '" + name + "'");
  }
};

StateIndex resolve_state(const StateSpace& states, const YAML::Node& node,
                         const std::string& field) {
  const auto name = as<std::string>(node, field);
  auto found = states.find(name);
  if (!found) throw ParseError(field, line_of(node), "unknown state '" + name + "'");
  return *found;
}

Catalog read_catalog(const YAML::Node& node, const StateSpace& states, const std::string& field) {
  Catalog cat;
  cat.lists.resize(states.size());
  if (!node) return cat;
  if (node.IsNull()) return cat;
  if (!node.IsMap()) throw ParseError(field, line_of(node), "expected a mapping state -> [actions]");
  for (const auto& entry : node) {
    const StateIndex x = resolve_state(states, entry.first, field);
    const std::string sub = field + "." + states.label(x);
    if (entry.second.IsNull()) continue;
    cat.lists[x] = detail::as_list<std::string>(entry.second, sub);
  }
  return cat;
}

SparseRow read_row(const YAML::Node& node, const StateSpace& states, const std::string& field) {
  SparseRow row;
  if (!node || node.IsNull()) return row;
  if (!node.IsMap()) throw ParseError(field, line_of(node), "expected a mapping state -> weight");
  for (const auto& entry : node) {
    const StateIndex y = resolve_state(states, entry.first, field);
    row.push_back({y, as<double>(entry.second, field + "." + states.label(y))});
  }
  return row;
}

template <typename Value, typename Reader>
std::map<ActionKey, Value> read_keyed(const YAML::Node& node, const StateSpace& states,
                                      const Catalog& cat, const std::string& field,
                                      Reader&& read_value) {
  std::map<ActionKey, Value> out;
  if (!node || node.IsNull()) return out;
  if (!node.IsSequence()) throw ParseError(field, line_of(node), "expected a list");
  for (std::size_t k = 0; k < node.size(); ++k) {
    const std::string item = field + "[" + std::to_string(k) + "]";
    const YAML::Node& entry = node[k];
    const StateIndex x = resolve_state(states, require(entry, "state", item), item + ".state");
    const ActionIndex a = cat.resolve(x, require(entry, "action", item), item + ".action");
    if (out.contains({x, a}))
      throw ParseError(item, line_of(entry), "duplicate entry for this (state, action)");
    out.emplace(ActionKey{x, a}, read_value(entry, item));
  }
  return out;
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("", 0, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CtmdpModel parse_model(const std::string& text) {
  const YAML::Node doc = detail::load_yaml(text);
  if (!doc.IsMap()) throw ParseError("", line_of(doc), "model document must be a mapping");

  StateSpace states(detail::as_list<std::string>(require(doc, "states", ""), "states"));
  const Catalog gradual = read_catalog(require(doc, "gradual_actions", ""), states, "gradual_actions");
  const Catalog impulsive = read_catalog(doc["impulsive_actions"], states, "impulsive_actions");

  RateKernel rates;
  rates.rows = read_keyed<SparseRow>(
      require(doc, "rates", ""), states, gradual, "rates",
      [&](const YAML::Node& entry, const std::string& item) {
        return read_row(require(entry, "targets", item), states, item + ".targets");
      });

  ImpulseKernel impulses;
  impulses.rows = read_keyed<SparseRow>(
      doc["impulse_rows"], states, impulsive, "impulse_rows",
      [&](const YAML::Node& entry, const std::string& item) {
        return read_row(require(entry, "probabilities", item), states, item + ".probabilities");
      });

  CostModel costs;
  const YAML::Node cost_node = require(doc, "costs", "");
  auto read_cost = [](const YAML::Node& entry, const std::string& item) {
    return get<double>(entry, "cost", item);
  };
  costs.gradual = read_keyed<double>(require(cost_node, "gradual", "costs"), states, gradual,
                                     "costs.gradual", read_cost);
  costs.impulsive = read_keyed<double>(cost_node["impulsive"], states, impulsive,
                                       "costs.impulsive", read_cost);

  const YAML::Node constants = require(doc, "constants", "");
  costs.eta = get<double>(constants, "eta", "constants");
  rates.bound = get<double>(constants, "K_rate", "constants");
  costs.cost_bound = get<double>(constants, "K_cost", "constants");
  costs.impulse_floor = get<double>(constants, "c_lower", "constants");

  ActionCatalog actions{gradual.lists, impulsive.lists};
  return CtmdpModel(std::move(states), std::move(actions), std::move(rates), std::move(impulses),
                    std::move(costs));
}

CtmdpModel load_model(const std::string& path) { return parse_model(read_file(path)); }

}  // namespace ictmdp
