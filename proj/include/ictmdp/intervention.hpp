#pragma once

// Intervention chains: the finite runs of instantaneous impulses a stationary
// policy fires from an Impulsive state until it lands in a Gradual state.

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "ictmdp/bellman.hpp"
#include "ictmdp/model.hpp"
#include "ictmdp/rng.hpp"

namespace ictmdp {

struct ChainStep {
  StateIndex state;
  ActionIndex action;
  double cost;
};

struct InterventionChain {
  std::vector<ChainStep> steps;
  StateIndex landing = 0;
  double total_cost = 0.0;  // sum of the step costs

  std::size_t length() const noexcept { return steps.size(); }
};

struct ChainAnalysis {
  /// Expected total chain cost W(x); zero on Gradual states.
  std::vector<double> expected_cost;
  /// Landing distribution per state. Rows of Impulsive states put their mass
  /// on Gradual states only; a Gradual state's row is the point mass at itself.
  std::vector<SparseRow> landing_kernel;
  std::size_t sweeps = 0;

  double max_expected_cost() const;
};

/// Chain-length guard ceil(2K / (eta * c_lower)) * 10 + 100.
std::size_t chain_guard(const CtmdpModel& model);

/// Fires phi_i from x and samples the impulse kernel until the state is
/// Gradual. Throws ImproperChainError once the chain exceeds chain_guard().
/// When x is Gradual the chain is empty and lands at x.
InterventionChain sample_chain(const CtmdpModel& model, const StationaryPolicy& policy,
                               StateIndex x, Rng& rng);

/// Expected chain cost and landing kernel under the policy, by fixed-point
/// sweeps until both the cost increment and the unlanded mass drop below tol.
/// Throws ImproperChainError naming the state with the most unlanded mass when
/// the sweeps do not settle within 10 * chain_guard().
ChainAnalysis analyze_chains(const CtmdpModel& model, const StationaryPolicy& policy,
                             double tol = 1e-12);

/// CSV rows: step,state,action,cost.
void write_chain_csv(std::ostream& out, const CtmdpModel& model, const InterventionChain& chain);

}  // namespace ictmdp
