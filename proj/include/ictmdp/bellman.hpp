#pragma once

// Uniformized Bellman operator for the impulse-control CTMDP:
//
//   BF(x) = min_{a in A^g(x)} { K/(K+eta) * sum_y P(y|x,a) F(y) + C^g(x,a)/(K+eta) }
//         ^ min_{b in A^i(x)} { sum_y Q(y|x,b) F(y) + c^i(x,b) }
//
// together with the monotone value iterations started from +-K/eta, the
// gradual/impulsive partition, policy extraction and fixed-policy evaluation.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "ictmdp/model.hpp"

namespace ictmdp {

struct ValueFunction {
  std::vector<double> values;

  ValueFunction() = default;
  explicit ValueFunction(std::vector<double> v) : values(std::move(v)) {}
  static ValueFunction constant(std::size_t n, double c) {
    return ValueFunction(std::vector<double>(n, c));
  }

  std::size_t size() const noexcept { return values.size(); }
  double operator[](StateIndex x) const { return values[x]; }
  double& operator[](StateIndex x) { return values[x]; }

  double sup_norm() const;
};

/// sup_x |a(x) - b(x)|; sizes must match.
double sup_distance(const ValueFunction& a, const ValueFunction& b);

enum class Direction { FromAbove, FromBelow };

enum class StateMode : std::uint8_t { Gradual, Impulsive };

/// Stationary non-randomized strategy: wait under phi_g on Gradual states,
/// fire phi_i immediately on Impulsive states.
struct StationaryPolicy {
  std::vector<StateMode> partition;
  std::vector<ActionIndex> phi_g;                  // total
  std::vector<std::optional<ActionIndex>> phi_i;   // engaged exactly on Impulsive states

  std::size_t size() const noexcept { return partition.size(); }
  bool impulsive(StateIndex x) const { return partition[x] == StateMode::Impulsive; }

  /// Gradual everywhere with the first catalog action.
  static StationaryPolicy all_gradual(const CtmdpModel& model);
};

/// Throws InvalidModelError when the policy does not fit the model's catalog.
void check_policy(const CtmdpModel& model, const StationaryPolicy& policy);

/// Both branches of BF(x), with their lowest-index minimizers.
struct BranchValues {
  double gradual = 0.0;
  ActionIndex gradual_action = 0;
  std::optional<double> impulsive;
  std::optional<ActionIndex> impulsive_action;

  double value() const { return impulsive && *impulsive < gradual ? *impulsive : gradual; }
};

BranchValues branch_values(const CtmdpModel& model, const ValueFunction& F, StateIndex x);

ValueFunction bellman_apply(const CtmdpModel& model, const ValueFunction& F,
                            unsigned threads = 1);

struct IterationResult {
  ValueFunction V;
  std::size_t iterations = 0;
  double last_step = 0.0;
};

/// Iterates V <- BV from V_0 = +K/eta (FromAbove) or -K/eta (FromBelow) until
/// the a-posteriori bound last_step * K/eta drops below tol. Each iterate is
/// checked to move monotonically in the stated direction (std::logic_error
/// otherwise). Throws NonConvergenceError after max_iter sweeps.
IterationResult value_iterate(const CtmdpModel& model, Direction direction, double tol,
                              std::size_t max_iter = 1'000'000, unsigned threads = 1);

/// sup_x |BV(x) - V(x)|.
double bellman_residual(const CtmdpModel& model, const ValueFunction& V, unsigned threads = 1);

/// Gradual iff the gradual branch of BV(x) is <= V(x) + tol_set; ties go to
/// the lowest catalog index. Throws std::logic_error when a state would be
/// flagged Impulsive without any impulsive action.
StationaryPolicy extract_policy(const CtmdpModel& model, const ValueFunction& V,
                                double tol_set = 1e-8);

/// Value of a stationary policy: solves the linear fixed-point system of the
/// policy's own operator by iteration from 0. An impulse cycle that never
/// reaches a Gradual state surfaces as NonConvergenceError.
ValueFunction evaluate_policy(const CtmdpModel& model, const StationaryPolicy& policy,
                              double tol, std::size_t max_iter = 1'000'000,
                              unsigned threads = 1);

struct SolveOptions {
  double tol = 1e-10;
  std::size_t max_iter = 1'000'000;
  unsigned threads = 1;
};

struct SolveReport {
  ValueFunction V;  // limit of the iteration from below
  std::size_t iterations_above = 0;
  std::size_t iterations_below = 0;
  double residual = 0.0;  // sup |BV - V|
  double gap = 0.0;       // sup distance between the two limits
};

SolveReport solve(const CtmdpModel& model, const SolveOptions& options = {});

}  // namespace ictmdp
