#pragma once

// Sampling of the controlled jump process under a stationary policy.
// Interventions happen only at t = 0 and right after natural jumps: when the
// state (initial or post-jump) is Impulsive, the policy's intervention chain
// runs to completion before time moves on.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "ictmdp/bellman.hpp"
#include "ictmdp/intervention.hpp"
#include "ictmdp/model.hpp"
#include "ictmdp/rng.hpp"

namespace ictmdp {

struct Epoch {
  double time = 0.0;  // T_n; 0 for the initial epoch
  StateIndex pre_state = 0;
  StateIndex natural_target = 0;  // equals pre_state for the initial epoch
  std::optional<InterventionChain> chain;
  StateIndex post_state = 0;
  double settle_time = 0.0;  // when post_state is reached; > time only with spaced impulses
};

struct Trajectory {
  std::vector<Epoch> epochs;
  double discounted_gradual_cost = 0.0;
  double discounted_impulse_cost = 0.0;
  /// Time at which sampling stopped; +inf when the path was absorbed and
  /// the remaining gradual cost was added in closed form.
  double truncation_time = 0.0;
  bool absorbed = false;
  std::size_t natural_jumps = 0;
  /// Spaced runs only: a natural jump interrupted a wait and the rest of the
  /// path used gradual control without interventions.
  bool gradual_only = false;

  double total_cost() const { return discounted_gradual_cost + discounted_impulse_cost; }
  StateIndex final_state() const { return epochs.back().post_state; }
};

struct SimulationOptions {
  /// Stop once exp(-eta t) * (3K/eta + max expected chain cost) < tail_tol.
  /// Zero disables the tail stop.
  double tail_tol = 1e-8;
  /// Hard time horizon; costs accrue up to it.
  double horizon = std::numeric_limits<double>::infinity();
};

/// Binds a model and a proper policy. Construction runs analyze_chains and so
/// throws ImproperChainError for improper policies. Holds a reference to the
/// model, which must outlive the simulator.
class Simulator {
 public:
  Simulator(const CtmdpModel& model, StationaryPolicy policy);

  const CtmdpModel& model() const noexcept { return model_; }
  const StationaryPolicy& policy() const noexcept { return policy_; }
  const ChainAnalysis& chains() const noexcept { return chains_; }
  /// 3K/eta + max expected chain cost; the truncation rule's multiplier.
  double tail_bound() const noexcept { return tail_bound_; }

  Trajectory run(StateIndex x0, Rng& rng, const SimulationOptions& options = {}) const;

  /// Like run(), but the impulses of every chain are applied one at a time
  /// after waits deltas[0], deltas[1], ... (a single sequence consumed over
  /// the whole path; exhausted entries count as 0). phi_g is held during the
  /// waits. A natural jump during a wait switches the remainder of the path
  /// to gradual control without interventions.
  Trajectory run_spaced(StateIndex x0, Rng& rng, std::span<const double> deltas,
                        double tail_tol = 1e-8) const;

 private:
  struct Cursor;
  Trajectory simulate(StateIndex x0, Rng& rng, const SimulationOptions& options,
                      Cursor* spaced) const;
  void land(Trajectory& tr, Epoch epoch, double& t, Rng& rng, Cursor* spaced) const;
  void accrue(Trajectory& tr, double cost_rate, double from, double to) const;

  const CtmdpModel& model_;
  StationaryPolicy policy_;
  ChainAnalysis chains_;
  double tail_bound_ = 0.0;
};

Trajectory simulate_trajectory(const CtmdpModel& model, const StationaryPolicy& policy,
                               StateIndex x0, Rng& rng, double tail_tol = 1e-8);

Trajectory simulate_spaced(const CtmdpModel& model, const StationaryPolicy& policy,
                           StateIndex x0, Rng& rng, std::span<const double> deltas,
                           double tail_tol = 1e-8);

struct CostEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n_replications = 0;
  double confidence_level = 0.95;
  double half_width = 0.0;  // normal-approximation half width at confidence_level
  std::uint64_t seed = 0;
  double tail_tol = 0.0;
  double max_truncation_time = 0.0;  // over non-absorbed paths
  std::size_t absorbed = 0;
  double mean_epochs = 0.0;
};

struct EstimateOptions {
  std::size_t n_reps = 10'000;
  std::uint64_t seed = 20240501;
  double tail_tol = 1e-8;
  unsigned threads = 1;
  /// Spaced impulses; empty means instantaneous chains.
  std::vector<double> deltas;
};

/// Mean and standard error of i.i.d. discounted path costs. Replication r uses
/// Rng::substream(seed, r); results do not depend on the thread count.
CostEstimate estimate_cost(const CtmdpModel& model, const StationaryPolicy& policy,
                           StateIndex x0, const EstimateOptions& options);

struct DynkinResult {
  double lhs = 0.0;  // E[exp(-eta t) W(X_t)]
  double rhs = 0.0;  // W after the initial chain + compensator integral on [0, t]
  double diff = 0.0;
  double std_error = 0.0;  // of the per-path difference
  std::size_t n_replications = 0;
};

/// Discounted Dynkin identity on common sampled paths cut at time t:
///   E[e^{-eta t} W(X_t)] = E[W(X_0+)]
///     + E[ int_0^t e^{-eta s} ( -eta W(X_s) + sum_y q(y|X_s) Wbar(y) - q(X_s) W(X_s) ) ds ]
/// where Wbar(y) averages W over the landing distribution of the chain fired at y.
DynkinResult dynkin_check(const CtmdpModel& model, const StationaryPolicy& policy,
                          const ValueFunction& W, StateIndex x0, double t, std::size_t n_reps,
                          std::uint64_t seed, unsigned threads = 1);

/// CSV rows: epoch,time,pre_state,target,chain_length,chain_cost,post_state.
void write_trajectory_csv(std::ostream& out, const CtmdpModel& model, const Trajectory& tr);

}  // namespace ictmdp
