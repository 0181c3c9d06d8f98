#include "ictmdp/bellman.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

#include "ictmdp/error.hpp"
#include "ictmdp/parallel.hpp"

namespace ictmdp {

namespace {

// Gradual branch for a single action, written without dividing by K:
// K/(K+eta) * P F = (sum_y q(y) F(y) + (K - q(X)) F(x)) / (K+eta).
double gradual_term(const GradualOption& opt, const ValueFunction& F, StateIndex x, double K,
                    double eta) {
  double acc = 0.0;
  for (const auto& t : opt.rates) acc += t.weight * F[t.target];
  acc += std::max(0.0, K - opt.total_rate) * F[x];
  return (acc + opt.cost) / (K + eta);
}

double impulsive_term(const ImpulsiveOption& opt, const ValueFunction& F) {
  double acc = 0.0;
  for (const auto& t : opt.distribution) acc += t.weight * F[t.target];
  return acc + opt.cost;
}

void require_size(const CtmdpModel& model, const ValueFunction& F) {
  if (F.size() != model.size())
    throw std::invalid_argument(
        fmt::format("value function has {} entries, model has {} states", F.size(), model.size()));
}

// Slack for the monotone-iterate assertion; absorbs rounding in the first
// step from the constant bound.
double monotone_slack(const CtmdpModel& model) {
  return 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, model.value_bound());
}

}  // namespace

double ValueFunction::sup_norm() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

double sup_distance(const ValueFunction& a, const ValueFunction& b) {
  if (a.size() != b.size()) throw std::invalid_argument("sup_distance: size mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

StationaryPolicy StationaryPolicy::all_gradual(const CtmdpModel& model) {
  StationaryPolicy p;
  p.partition.assign(model.size(), StateMode::Gradual);
  p.phi_g.assign(model.size(), 0);
  p.phi_i.assign(model.size(), std::nullopt);
  return p;
}

void check_policy(const CtmdpModel& model, const StationaryPolicy& policy) {
  const std::size_t n = model.size();
  if (policy.partition.size() != n || policy.phi_g.size() != n || policy.phi_i.size() != n)
    throw InvalidModelError(fmt::format("policy covers {} states, model has {}",
                                        policy.partition.size(), n));
  for (StateIndex x = 0; x < n; ++x) {
    const auto& label = model.states().label(x);
    if (policy.phi_g[x] >= model.gradual(x).size())
      throw InvalidModelError(fmt::format("policy: gradual action #{} not available at '{}'",
                                          policy.phi_g[x], label));
    if (policy.impulsive(x)) {
      if (!policy.phi_i[x])
        throw InvalidModelError(
            fmt::format("policy: impulsive state '{}' has no impulsive action", label));
      if (*policy.phi_i[x] >= model.impulsive(x).size())
        throw InvalidModelError(fmt::format("policy: impulsive action #{} not available at '{}'",
                                            *policy.phi_i[x], label));
    } else if (policy.phi_i[x]) {
      throw InvalidModelError(
          fmt::format("policy: gradual state '{}' carries an impulsive action", label));
    }
  }
}

BranchValues branch_values(const CtmdpModel& model, const ValueFunction& F, StateIndex x) {
  const double K = model.K();
  const double eta = model.eta();
  BranchValues out;
  out.gradual = std::numeric_limits<double>::infinity();
  const auto gradual = model.gradual(x);
  for (ActionIndex a = 0; a < gradual.size(); ++a) {
    const double v = gradual_term(gradual[a], F, x, K, eta);
    if (v < out.gradual) {
      out.gradual = v;
      out.gradual_action = a;
    }
  }
  const auto impulsive = model.impulsive(x);
  for (ActionIndex b = 0; b < impulsive.size(); ++b) {
    const double v = impulsive_term(impulsive[b], F);
    if (!out.impulsive || v < *out.impulsive) {
      out.impulsive = v;
      out.impulsive_action = b;
    }
  }
  return out;
}

ValueFunction bellman_apply(const CtmdpModel& model, const ValueFunction& F, unsigned threads) {
  model.require_valid();
  require_size(model, F);
  ValueFunction out(std::vector<double>(model.size()));
  parallel_for(model.size(), threads,
               [&](std::size_t x) { out[x] = branch_values(model, F, x).value(); });
  return out;
}

IterationResult value_iterate(const CtmdpModel& model, Direction direction, double tol,
                              std::size_t max_iter, unsigned threads) {
  model.require_valid();
  if (!(tol > 0.0)) throw std::invalid_argument("value_iterate: tol must be positive");
  if (max_iter < 1) throw std::invalid_argument("value_iterate: max_iter must be >= 1");

  const double bound = model.value_bound();
  const double start = direction == Direction::FromAbove ? bound : -bound;
  const double slack = monotone_slack(model);
  // a-posteriori factor beta/(1-beta) of the uniformized gradual branch
  const double amplification = model.K() / model.eta();

  IterationResult result;
  result.V = ValueFunction::constant(model.size(), start);
  for (std::size_t it = 1; it <= max_iter; ++it) {
    ValueFunction next = bellman_apply(model, result.V, threads);
    double step = 0.0;
    for (StateIndex x = 0; x < model.size(); ++x) {
      const double delta = next[x] - result.V[x];
      const bool wrong_way = direction == Direction::FromAbove ? delta > slack : delta < -slack;
      if (wrong_way)
        throw std::logic_error(fmt::format(
            "value iteration lost monotonicity at state '{}' (iteration {}, delta {})",
            model.states().label(x), it, delta));
      step = std::max(step, std::abs(delta));
    }
    result.V = std::move(next);
    result.iterations = it;
    result.last_step = step;
    if (step * amplification < tol || step == 0.0) return result;
  }
  throw NonConvergenceError(
      fmt::format("value iteration ({}) did not reach tol {} in {} iterations (last step {})",
                  direction == Direction::FromAbove ? "from above" : "from below", tol, max_iter,
                  result.last_step),
      result.V.values, result.last_step, result.iterations);
}

double bellman_residual(const CtmdpModel& model, const ValueFunction& V, unsigned threads) {
  return sup_distance(bellman_apply(model, V, threads), V);
}

StationaryPolicy extract_policy(const CtmdpModel& model, const ValueFunction& V, double tol_set) {
  model.require_valid();
  require_size(model, V);
  StationaryPolicy p;
  const std::size_t n = model.size();
  p.partition.resize(n);
  p.phi_g.resize(n);
  p.phi_i.assign(n, std::nullopt);
  for (StateIndex x = 0; x < n; ++x) {
    const BranchValues b = branch_values(model, V, x);
    if (b.gradual <= V[x] + tol_set) {
      p.partition[x] = StateMode::Gradual;
      p.phi_g[x] = b.gradual_action;
      continue;
    }
    if (!b.impulsive_action)
      throw std::logic_error(fmt::format(
          "state '{}' fails the gradual test (branch {} > V {}) but has no impulsive action",
          model.states().label(x), b.gradual, V[x]));
    p.partition[x] = StateMode::Impulsive;
    p.phi_g[x] = 0;
    p.phi_i[x] = b.impulsive_action;
  }
  return p;
}

ValueFunction evaluate_policy(const CtmdpModel& model, const StationaryPolicy& policy, double tol,
                              std::size_t max_iter, unsigned threads) {
  model.require_valid();
  check_policy(model, policy);
  if (!(tol > 0.0)) throw std::invalid_argument("evaluate_policy: tol must be positive");

  const double K = model.K();
  const double eta = model.eta();
  const double amplification = K / eta;
  ValueFunction V = ValueFunction::constant(model.size(), 0.0);
  double step = 0.0;
  for (std::size_t it = 1; it <= max_iter; ++it) {
    ValueFunction next(std::vector<double>(model.size()));
    parallel_for(model.size(), threads, [&](std::size_t x) {
      next[x] = policy.impulsive(x)
                    ? impulsive_term(model.impulsive(x)[*policy.phi_i[x]], V)
                    : gradual_term(model.gradual(x)[policy.phi_g[x]], V, x, K, eta);
    });
    step = sup_distance(next, V);
    V = std::move(next);
    if (step * amplification < tol || step == 0.0) return V;
  }
  throw NonConvergenceError(
      fmt::format("policy evaluation did not reach tol {} in {} iterations (last step {}); "
                  "the policy's impulse chains are likely improper",
                  tol, max_iter, step),
      V.values, step, max_iter);
}

SolveReport solve(const CtmdpModel& model, const SolveOptions& options) {
  model.require_valid();
  IterationResult above =
      value_iterate(model, Direction::FromAbove, options.tol, options.max_iter, options.threads);
  IterationResult below =
      value_iterate(model, Direction::FromBelow, options.tol, options.max_iter, options.threads);
  SolveReport report;
  report.gap = sup_distance(above.V, below.V);
  report.iterations_above = above.iterations;
  report.iterations_below = below.iterations;
  report.V = std::move(below.V);
  report.residual = bellman_residual(model, report.V, options.threads);
  return report;
}

}  // namespace ictmdp
