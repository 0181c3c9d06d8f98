#include "ictmdp/intervention.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "ictmdp/error.hpp"

namespace ictmdp {

namespace {

StateIndex sample_row(const SparseRow& row, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  StateIndex last = row.front().target;
  for (const auto& t : row) {
    if (t.weight <= 0.0) continue;
    acc += t.weight;
    last = t.target;
    if (u < acc) return t.target;
  }
  return last;  // rounding: u landed past the accumulated mass
}

}  // namespace

double ChainAnalysis::max_expected_cost() const {
  double m = 0.0;
  for (double w : expected_cost) m = std::max(m, w);
  return m;
}

std::size_t chain_guard(const CtmdpModel& model) {
  const double ratio = 2.0 * model.K() / (model.eta() * model.costs().impulse_floor);
  return static_cast<std::size_t>(std::ceil(ratio)) * 10 + 100;
}

InterventionChain sample_chain(const CtmdpModel& model, const StationaryPolicy& policy,
                               StateIndex x, Rng& rng) {
  const std::size_t guard = chain_guard(model);
  InterventionChain chain;
  StateIndex current = x;
  while (policy.impulsive(current)) {
    if (chain.steps.size() >= guard)
      throw ImproperChainError(
          fmt::format("intervention chain from '{}' did not land after {} impulses",
                      model.states().label(x), guard),
          x);
    const ActionIndex b = *policy.phi_i[current];
    const ImpulsiveOption& opt = model.impulsive(current)[b];
    chain.steps.push_back({current, b, opt.cost});
    chain.total_cost += opt.cost;
    current = sample_row(opt.distribution, rng);
  }
  chain.landing = current;
  return chain;
}

ChainAnalysis analyze_chains(const CtmdpModel& model, const StationaryPolicy& policy,
                             double tol) {
  model.require_valid();
  check_policy(model, policy);
  const std::size_t n = model.size();
  const std::size_t max_sweeps = 10 * chain_guard(model);

  ChainAnalysis out;
  out.expected_cost.assign(n, 0.0);
  out.landing_kernel.assign(n, {});

  std::vector<StateIndex> active;
  for (StateIndex x = 0; x < n; ++x) {
    if (policy.impulsive(x))
      active.push_back(x);
    else
      out.landing_kernel[x] = {{x, 1.0}};
  }
  if (active.empty()) return out;

  // landed[x]: mass that reached a Gradual state within the current sweep count
  std::vector<std::map<StateIndex, double>> landed(n);
  std::vector<double> unlanded(n, 0.0);
  for (std::size_t sweep = 1; sweep <= max_sweeps; ++sweep) {
    std::vector<double> next_cost(n, 0.0);
    std::vector<std::map<StateIndex, double>> next_landed(n);
    double cost_step = 0.0;
    double worst_unlanded = 0.0;
    StateIndex witness = active.front();
    for (StateIndex x : active) {
      const ImpulsiveOption& opt = model.impulsive(x)[*policy.phi_i[x]];
      double w = opt.cost;
      auto& row = next_landed[x];
      for (const auto& t : opt.distribution) {
        if (t.weight == 0.0) continue;
        if (policy.impulsive(t.target)) {
          w += t.weight * out.expected_cost[t.target];
          for (const auto& [z, p] : landed[t.target]) row[z] += t.weight * p;
        } else {
          row[t.target] += t.weight;
        }
      }
      double mass = 0.0;
      for (const auto& entry : row) mass += entry.second;
      unlanded[x] = std::max(0.0, 1.0 - mass);
      if (unlanded[x] > worst_unlanded) {
        worst_unlanded = unlanded[x];
        witness = x;
      }
      cost_step = std::max(cost_step, std::abs(w - out.expected_cost[x]));
      next_cost[x] = w;
    }
    for (StateIndex x : active) {
      out.expected_cost[x] = next_cost[x];
      landed[x] = std::move(next_landed[x]);
    }
    out.sweeps = sweep;
    if (cost_step < tol && worst_unlanded < tol) {
      for (StateIndex x : active) {
        SparseRow row;
        row.reserve(landed[x].size());
        for (const auto& [z, p] : landed[x]) row.push_back({z, p});
        out.landing_kernel[x] = std::move(row);
      }
      return out;
    }
    if (sweep == max_sweeps)
      throw ImproperChainError(
          fmt::format("impulse chains from '{}' do not settle after {} sweeps "
                      "(unlanded mass {}, cost step {})",
                      model.states().label(witness), max_sweeps, worst_unlanded, cost_step),
          witness);
  }
  return out;  // unreachable: max_sweeps >= 100
}

void write_chain_csv(std::ostream& out, const CtmdpModel& model,
                     const InterventionChain& chain) {
  out << "step,state,action,cost\n";
  for (std::size_t k = 0; k < chain.steps.size(); ++k) {
    const auto& s = chain.steps[k];
    fmt::print(out, "{},{},{},{}\n", k, model.states().label(s.state),
               model.impulsive_label(s.state, s.action), s.cost);
  }
}

}  // namespace ictmdp
