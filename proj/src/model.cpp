#include "ictmdp/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <fmt/format.h>

#include "ictmdp/error.hpp"

namespace ictmdp {

namespace {

constexpr double kRowSumTol = 1e-12;
// Relative slack for comparing summed rates against the declared bound.
constexpr double kBoundSlack = 1e-12;

bool exceeds(double value, double bound) {
  return value > bound + kBoundSlack * std::max(1.0, std::abs(bound));
}

class Reporter {
 public:
  Reporter(const CtmdpModel& model, ValidationReport& out) : model_(model), out_(out) {}

  void add(std::string rule, std::string message) {
    out_.push_back({std::move(rule), {}, {}, std::move(message)});
  }

  void add(std::string rule, StateIndex x, std::string action, std::string message) {
    std::string state = x < model_.size() ? model_.states().label(x) : fmt::format("#{}", x);
    out_.push_back({std::move(rule), std::move(state), std::move(action), std::move(message)});
  }

  std::string gradual_name(const ActionKey& key) const {
    const auto& cat = model_.actions().gradual;
    if (key.state < cat.size() && key.action < cat[key.state].size())
      return cat[key.state][key.action];
    return fmt::format("#{}", key.action);
  }

  std::string impulsive_name(const ActionKey& key) const {
    const auto& cat = model_.actions().impulsive;
    if (key.state < cat.size() && key.action < cat[key.state].size())
      return cat[key.state][key.action];
    return fmt::format("#{}", key.action);
  }

 private:
  const CtmdpModel& model_;
  ValidationReport& out_;
};

bool in_catalog(const std::vector<std::vector<std::string>>& cat, const ActionKey& key) {
  return key.state < cat.size() && key.action < cat[key.state].size();
}

template <typename Map>
void check_coverage(Reporter& rep, const std::vector<std::vector<std::string>>& cat,
                    const Map& map, const std::string& what, bool gradual) {
  for (StateIndex x = 0; x < cat.size(); ++x) {
    for (ActionIndex a = 0; a < cat[x].size(); ++a) {
      if (!map.contains(ActionKey{x, a}))
        rep.add("coverage", x, cat[x][a], fmt::format("missing {} entry", what));
    }
  }
  for (const auto& entry : map) {
    const ActionKey& key = entry.first;
    if (!in_catalog(cat, key)) {
      rep.add("coverage", key.state,
              gradual ? rep.gradual_name(key) : rep.impulsive_name(key),
              fmt::format("{} entry for an action outside the catalog", what));
    }
  }
}

}  // namespace

StateSpace::StateSpace(std::vector<std::string> labels) : labels_(std::move(labels)) {
  std::set<std::string> seen_dup;
  for (StateIndex i = 0; i < labels_.size(); ++i) {
    auto [it, inserted] = index_.emplace(labels_[i], i);
    if (!inserted && seen_dup.insert(labels_[i]).second) duplicates_.push_back(labels_[i]);
  }
}

std::optional<StateIndex> StateSpace::find(std::string_view label) const {
  auto it = index_.find(label);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

StateIndex StateSpace::index(std::string_view label) const {
  auto found = find(label);
  if (!found) throw KeyError(fmt::format("unknown state '{}'", label));
  return *found;
}

CtmdpModel::CtmdpModel(StateSpace states, ActionCatalog actions, RateKernel rates,
                       ImpulseKernel impulses, CostModel costs)
    : states_(std::move(states)),
      actions_(std::move(actions)),
      rates_(std::move(rates)),
      impulses_(std::move(impulses)),
      costs_(std::move(costs)) {
  K_ = std::max(rates_.bound, costs_.cost_bound);

  const std::size_t n = states_.size();
  gradual_.resize(n);
  impulsive_.resize(n);
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();

  for (StateIndex x = 0; x < n && x < actions_.gradual.size(); ++x) {
    for (ActionIndex a = 0; a < actions_.gradual[x].size(); ++a) {
      GradualOption opt;
      if (auto it = rates_.rows.find({x, a}); it != rates_.rows.end()) {
        opt.rates = it->second;
        std::sort(opt.rates.begin(), opt.rates.end(),
                  [](const Transition& l, const Transition& r) { return l.target < r.target; });
        for (const auto& t : opt.rates) opt.total_rate += t.weight;
      }
      auto c = costs_.gradual.find({x, a});
      opt.cost = c == costs_.gradual.end() ? nan : c->second;
      gradual_[x].push_back(std::move(opt));
    }
  }
  for (StateIndex x = 0; x < n && x < actions_.impulsive.size(); ++x) {
    for (ActionIndex a = 0; a < actions_.impulsive[x].size(); ++a) {
      ImpulsiveOption opt;
      if (auto it = impulses_.rows.find({x, a}); it != impulses_.rows.end()) {
        opt.distribution = it->second;
        std::sort(opt.distribution.begin(), opt.distribution.end(),
                  [](const Transition& l, const Transition& r) { return l.target < r.target; });
      }
      auto c = costs_.impulsive.find({x, a});
      opt.cost = c == costs_.impulsive.end() ? nan : c->second;
      impulsive_[x].push_back(std::move(opt));
    }
  }

  violations_ = validate_model(*this);
}

void CtmdpModel::require_valid() const {
  if (is_valid()) return;
  std::vector<std::string> details;
  for (const auto& v : violations_) {
    details.push_back(fmt::format("{} [{}{}{}]: {}", v.rule, v.state, v.action.empty() ? "" : ",",
                                  v.action, v.message));
  }
  std::string message = fmt::format("model has {} invariant violation(s); first: {}",
                                    violations_.size(), details.front());
  throw InvalidModelError(message, std::move(details));
}

const std::string& CtmdpModel::gradual_label(StateIndex x, ActionIndex a) const {
  return actions_.gradual.at(x).at(a);
}

const std::string& CtmdpModel::impulsive_label(StateIndex x, ActionIndex a) const {
  return actions_.impulsive.at(x).at(a);
}

ValidationReport validate_model(const CtmdpModel& model) {
  ValidationReport report;
  Reporter rep(model, report);
  const std::size_t n = model.size();
  const auto& cat = model.actions();
  const auto& costs = model.costs();

  if (n == 0) rep.add("state_labels", "state space is empty");
  for (const auto& dup : model.states().duplicates())
    rep.add("state_labels", fmt::format("duplicate state label '{}'", dup));

  if (cat.gradual.size() != n)
    rep.add("catalog_shape", fmt::format("gradual catalog has {} rows for {} states",
                                         cat.gradual.size(), n));
  if (cat.impulsive.size() != n)
    rep.add("catalog_shape", fmt::format("impulsive catalog has {} rows for {} states",
                                         cat.impulsive.size(), n));

  for (StateIndex x = 0; x < std::min(n, cat.gradual.size()); ++x) {
    if (cat.gradual[x].empty())
      rep.add("gradual_nonempty", x, "", "state has no gradual action");
    std::set<std::string> seen;
    for (const auto& a : cat.gradual[x])
      if (!seen.insert(a).second) rep.add("action_labels", x, a, "duplicate gradual action");
  }
  for (StateIndex x = 0; x < std::min(n, cat.impulsive.size()); ++x) {
    std::set<std::string> seen;
    for (const auto& a : cat.impulsive[x])
      if (!seen.insert(a).second) rep.add("action_labels", x, a, "duplicate impulsive action");
  }

  check_coverage(rep, cat.gradual, model.rates().rows, "rate row", true);
  check_coverage(rep, cat.gradual, costs.gradual, "gradual cost", true);
  check_coverage(rep, cat.impulsive, model.impulses().rows, "impulse row", false);
  check_coverage(rep, cat.impulsive, costs.impulsive, "impulse cost", false);

  const double rate_bound = model.rates().bound;
  if (!std::isfinite(costs.eta) || costs.eta <= 0.0)
    rep.add("discount", fmt::format("eta must be positive and finite, got {}", costs.eta));
  if (!std::isfinite(rate_bound) || rate_bound < 0.0)
    rep.add("declared_constants", fmt::format("K_rate must be finite and >= 0, got {}", rate_bound));
  if (!std::isfinite(costs.cost_bound) || costs.cost_bound < 0.0)
    rep.add("declared_constants",
            fmt::format("K_cost must be finite and >= 0, got {}", costs.cost_bound));
  if (!(model.K() > 0.0))
    rep.add("declared_constants", "max(K_rate, K_cost) must be positive");
  if (!std::isfinite(costs.impulse_floor) || costs.impulse_floor <= 0.0)
    rep.add("impulse_floor",
            fmt::format("c_lower must be positive and finite, got {}", costs.impulse_floor));

  for (const auto& [key, row] : model.rates().rows) {
    const std::string name = rep.gradual_name(key);
    double total = 0.0;
    std::set<StateIndex> targets;
    for (const auto& t : row) {
      if (t.target >= n) {
        rep.add("rate_target", key.state, name, fmt::format("target #{} out of range", t.target));
        continue;
      }
      if (!targets.insert(t.target).second)
        rep.add("rate_target", key.state, name,
                fmt::format("target '{}' listed twice", model.states().label(t.target)));
      if (t.target == key.state)
        rep.add("rate_self_loop", key.state, name, "rate row targets its own state");
      if (!std::isfinite(t.weight) || t.weight < 0.0)
        rep.add("rate_negative", key.state, name,
                fmt::format("rate to '{}' is {}", model.states().label(t.target), t.weight));
      total += t.weight;
    }
    if (exceeds(total, rate_bound))
      rep.add("rate_bound", key.state, name,
              fmt::format("total rate {} exceeds K_rate {}", total, rate_bound));
  }

  for (const auto& [key, cost] : costs.gradual) {
    if (!std::isfinite(cost) || exceeds(std::abs(cost), costs.cost_bound))
      rep.add("gradual_cost_bound", key.state, rep.gradual_name(key),
              fmt::format("|C^g| = {} exceeds K_cost {}", std::abs(cost), costs.cost_bound));
  }

  for (const auto& [key, row] : model.impulses().rows) {
    const std::string name = rep.impulsive_name(key);
    double total = 0.0;
    bool ok = true;
    for (const auto& t : row) {
      if (t.target >= n) {
        rep.add("impulse_row_stochastic", key.state, name,
                fmt::format("target #{} out of range", t.target));
        ok = false;
        continue;
      }
      if (!std::isfinite(t.weight) || t.weight < 0.0) {
        rep.add("impulse_row_stochastic", key.state, name,
                fmt::format("negative probability {}", t.weight));
        ok = false;
      }
      total += t.weight;
    }
    if (ok && std::abs(total - 1.0) > kRowSumTol)
      rep.add("impulse_row_stochastic", key.state, name,
              fmt::format("probabilities sum to {}", total));
  }

  for (const auto& [key, cost] : costs.impulsive) {
    if (!std::isfinite(cost) || cost < costs.impulse_floor)
      rep.add("impulse_cost_floor", key.state, rep.impulsive_name(key),
              fmt::format("c^i = {} is below c_lower {}", cost, costs.impulse_floor));
  }

  return report;
}

std::vector<double> uniformized_row(const CtmdpModel& model, StateIndex x, ActionIndex a) {
  if (x >= model.size() || a >= model.gradual(x).size())
    throw KeyError(fmt::format("unknown gradual pair (#{}, #{})", x, a));
  model.require_valid();
  const double K = model.K();
  const GradualOption& opt = model.gradual(x)[a];
  std::vector<double> row(model.size(), 0.0);
  for (const auto& t : opt.rates) row[t.target] += t.weight / K;
  row[x] += std::max(0.0, K - opt.total_rate) / K;
  return row;
}

StateIndex ModelBuilder::add_state(std::string label) {
  labels_.push_back(std::move(label));
  actions_.gradual.emplace_back();
  actions_.impulsive.emplace_back();
  return labels_.size() - 1;
}

ActionIndex ModelBuilder::add_gradual(StateIndex x, std::string label, double cost,
                                      SparseRow rates) {
  auto& list = actions_.gradual.at(x);
  list.push_back(std::move(label));
  const ActionKey key{x, list.size() - 1};
  rates_.rows[key] = std::move(rates);
  costs_.gradual[key] = cost;
  return key.action;
}

ActionIndex ModelBuilder::add_impulse(StateIndex x, std::string label, double cost,
                                      SparseRow distribution) {
  auto& list = actions_.impulsive.at(x);
  list.push_back(std::move(label));
  const ActionKey key{x, list.size() - 1};
  impulses_.rows[key] = std::move(distribution);
  costs_.impulsive[key] = cost;
  return key.action;
}

ModelBuilder& ModelBuilder::eta(double value) {
  costs_.eta = value;
  return *this;
}

ModelBuilder& ModelBuilder::rate_bound(double value) {
  rates_.bound = value;
  return *this;
}

ModelBuilder& ModelBuilder::cost_bound(double value) {
  costs_.cost_bound = value;
  return *this;
}

ModelBuilder& ModelBuilder::impulse_floor(double value) {
  costs_.impulse_floor = value;
  return *this;
}

CtmdpModel ModelBuilder::build() const {
  return CtmdpModel(StateSpace(labels_), actions_, rates_, impulses_, costs_);
}

}  // namespace ictmdp
