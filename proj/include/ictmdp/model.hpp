#pragma once

// Finite impulse-control CTMDP model: states, gradual/impulsive action
// catalogs, the off-diagonal rate kernel, the impulse kernel and costs.
//
// The model is immutable after construction. Construction never throws on
// invariant breaches; validate_model() reports them and every solver entry
// point calls CtmdpModel::require_valid().

#include <compare>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ictmdp {

using StateIndex = std::size_t;
using ActionIndex = std::size_t;

struct Transition {
  StateIndex target;
  double weight;
};

/// Sparse row of a kernel; weights are rates or probabilities depending on use.
using SparseRow = std::vector<Transition>;

/// (state, action) pair where the action index refers to the state's catalog.
struct ActionKey {
  StateIndex state;
  ActionIndex action;
  auto operator<=>(const ActionKey&) const = default;
};

class StateSpace {
 public:
  StateSpace() = default;
  explicit StateSpace(std::vector<std::string> labels);

  std::size_t size() const noexcept { return labels_.size(); }
  const std::string& label(StateIndex x) const { return labels_.at(x); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  std::optional<StateIndex> find(std::string_view label) const;
  /// Throws KeyError for unknown labels.
  StateIndex index(std::string_view label) const;

  /// Labels that occurred more than once; index() resolves to the first.
  const std::vector<std::string>& duplicates() const noexcept { return duplicates_; }

 private:
  std::vector<std::string> labels_;
  std::map<std::string, StateIndex, std::less<>> index_;
  std::vector<std::string> duplicates_;
};

struct ActionCatalog {
  std::vector<std::vector<std::string>> gradual;    // A^g(x), must be nonempty
  std::vector<std::vector<std::string>> impulsive;  // A^i(x), may be empty

  bool impulse_feasible(StateIndex x) const {
    return x < impulsive.size() && !impulsive[x].empty();
  }
};

/// Off-diagonal jump rates q(y|x,a), y != x, with the declared uniform bound.
struct RateKernel {
  std::map<ActionKey, SparseRow> rows;
  double bound = 0.0;
};

/// Post-impulse distributions Q(.|x,a).
struct ImpulseKernel {
  std::map<ActionKey, SparseRow> rows;
};

struct CostModel {
  std::map<ActionKey, double> gradual;    // cost rate C^g
  std::map<ActionKey, double> impulsive;  // one-shot cost c^i
  double eta = 0.0;                       // discount rate
  double cost_bound = 0.0;                // declared bound on |C^g|
  double impulse_floor = 0.0;             // declared lower bound on c^i
};

/// One reported invariant breach. `state`/`action` are labels when known.
struct Violation {
  std::string rule;
  std::string state;
  std::string action;
  std::string message;
};

using ValidationReport = std::vector<Violation>;

/// Flattened per-state view of a gradual action used by the solvers.
struct GradualOption {
  SparseRow rates;
  double total_rate = 0.0;
  double cost = 0.0;
};

struct ImpulsiveOption {
  SparseRow distribution;
  double cost = 0.0;
};

class CtmdpModel {
 public:
  CtmdpModel(StateSpace states, ActionCatalog actions, RateKernel rates,
             ImpulseKernel impulses, CostModel costs);

  const StateSpace& states() const noexcept { return states_; }
  const ActionCatalog& actions() const noexcept { return actions_; }
  const RateKernel& rates() const noexcept { return rates_; }
  const ImpulseKernel& impulses() const noexcept { return impulses_; }
  const CostModel& costs() const noexcept { return costs_; }

  std::size_t size() const noexcept { return states_.size(); }
  /// Single uniform constant max(rate bound, cost bound).
  double K() const noexcept { return K_; }
  double eta() const noexcept { return costs_.eta; }
  /// K / eta, the a-priori bound on any value function.
  double value_bound() const noexcept { return K_ / costs_.eta; }

  bool is_valid() const noexcept { return violations_.empty(); }
  const ValidationReport& violations() const noexcept { return violations_; }
  /// Throws InvalidModelError listing the violations when the model is invalid.
  void require_valid() const;

  std::span<const GradualOption> gradual(StateIndex x) const { return gradual_.at(x); }
  std::span<const ImpulsiveOption> impulsive(StateIndex x) const { return impulsive_.at(x); }
  bool impulse_feasible(StateIndex x) const { return !impulsive_.at(x).empty(); }

  const std::string& gradual_label(StateIndex x, ActionIndex a) const;
  const std::string& impulsive_label(StateIndex x, ActionIndex a) const;

 private:
  friend ValidationReport validate_model(const CtmdpModel& model);

  StateSpace states_;
  ActionCatalog actions_;
  RateKernel rates_;
  ImpulseKernel impulses_;
  CostModel costs_;
  double K_ = 0.0;

  std::vector<std::vector<GradualOption>> gradual_;
  std::vector<std::vector<ImpulsiveOption>> impulsive_;
  ValidationReport violations_;
};

/// Lists every violated model invariant. An empty report means the model is
/// usable downstream. Pure; never throws.
ValidationReport validate_model(const CtmdpModel& model);

/// Dense uniformized transition row
///   P(y|x,a) = (q(y|x,a) + [y == x](K - q(X|x,a))) / K.
/// Throws KeyError when (x, a) is not in the catalog.
std::vector<double> uniformized_row(const CtmdpModel& model, StateIndex x, ActionIndex a);

/// Convenience builder used by programmatic model construction and tests.
class ModelBuilder {
 public:
  StateIndex add_state(std::string label);
  ActionIndex add_gradual(StateIndex x, std::string label, double cost, SparseRow rates);
  ActionIndex add_impulse(StateIndex x, std::string label, double cost,
                          SparseRow distribution);

  ModelBuilder& eta(double value);
  ModelBuilder& rate_bound(double value);
  ModelBuilder& cost_bound(double value);
  ModelBuilder& impulse_floor(double value);

  std::size_t size() const noexcept { return labels_.size(); }

  CtmdpModel build() const;

 private:
  std::vector<std::string> labels_;
  ActionCatalog actions_;
  RateKernel rates_;
  ImpulseKernel impulses_;
  CostModel costs_;
};

}  // namespace ictmdp
