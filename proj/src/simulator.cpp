#include "ictmdp/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "ictmdp/error.hpp"
#include "ictmdp/parallel.hpp"

namespace ictmdp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kZ95 = 1.959963984540054;

StateIndex sample_weighted(const SparseRow& row, double total, Rng& rng) {
  const double u = rng.uniform() * total;
  double acc = 0.0;
  StateIndex last = row.front().target;
  for (const auto& t : row) {
    if (t.weight <= 0.0) continue;
    acc += t.weight;
    last = t.target;
    if (u < acc) return t.target;
  }
  return last;
}

// integral of exp(-eta s) over [from, to]
double discount_integral(double eta, double from, double to) {
  if (to <= from) return 0.0;
  const double head = std::exp(-eta * from);
  if (std::isinf(to)) return head / eta;
  return -head * std::expm1(-eta * (to - from)) / eta;
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& xs) {
  MeanSe out;
  if (xs.empty()) return out;
  double sum = 0.0;
  for (double x : xs) sum += x;
  out.mean = sum / static_cast<double>(xs.size());
  if (xs.size() < 2) return out;
  double ss = 0.0;
  for (double x : xs) ss += (x - out.mean) * (x - out.mean);
  out.se = std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
  return out;
}

}  // namespace

struct Simulator::Cursor {
  std::span<const double> deltas;
  std::size_t next = 0;
  bool gradual_only = false;

  double take() { return next < deltas.size() ? deltas[next++] : 0.0; }
};

Simulator::Simulator(const CtmdpModel& model, StationaryPolicy policy)
    : model_(model), policy_(std::move(policy)) {
  model_.require_valid();
  chains_ = analyze_chains(model_, policy_);
  tail_bound_ = 3.0 * model_.value_bound() + chains_.max_expected_cost();
}

void Simulator::accrue(Trajectory& tr, double cost_rate, double from, double to) const {
  if (cost_rate == 0.0) return;
  tr.discounted_gradual_cost += cost_rate * discount_integral(model_.eta(), from, to);
}

void Simulator::land(Trajectory& tr, Epoch epoch, double& t, Rng& rng, Cursor* spaced) const {
  StateIndex x = epoch.natural_target;
  epoch.settle_time = t;
  if ((spaced && spaced->gradual_only) || !policy_.impulsive(x)) {
    epoch.post_state = x;
    tr.epochs.push_back(std::move(epoch));
    return;
  }
  if (!spaced) {
    InterventionChain chain = sample_chain(model_, policy_, x, rng);
    tr.discounted_impulse_cost += std::exp(-model_.eta() * t) * chain.total_cost;
    epoch.post_state = chain.landing;
    epoch.chain = std::move(chain);
    tr.epochs.push_back(std::move(epoch));
    return;
  }

  const std::size_t guard = chain_guard(model_);
  InterventionChain chain;
  while (policy_.impulsive(x)) {
    if (chain.steps.size() >= guard)
      throw ImproperChainError(
          fmt::format("spaced intervention chain from '{}' did not land after {} impulses",
                      model_.states().label(epoch.natural_target), guard),
          epoch.natural_target);
    const double delta = spaced->take();
    if (delta > 0.0) {
      const GradualOption& hold = model_.gradual(x)[policy_.phi_g[x]];
      const double wait = hold.total_rate > 0.0 ? rng.exponential(hold.total_rate) : kInf;
      if (wait < delta) {
        accrue(tr, hold.cost, t, t + wait);
        t += wait;
        chain.landing = x;
        epoch.post_state = x;
        epoch.settle_time = t;
        epoch.chain = std::move(chain);
        tr.epochs.push_back(std::move(epoch));

        spaced->gradual_only = true;
        tr.gradual_only = true;
        const StateIndex y = sample_weighted(hold.rates, hold.total_rate, rng);
        ++tr.natural_jumps;
        tr.epochs.push_back(Epoch{t, x, y, std::nullopt, y, t});
        return;
      }
      accrue(tr, hold.cost, t, t + delta);
      t += delta;
    }
    const ActionIndex b = *policy_.phi_i[x];
    const ImpulsiveOption& opt = model_.impulsive(x)[b];
    chain.steps.push_back({x, b, opt.cost});
    chain.total_cost += opt.cost;
    tr.discounted_impulse_cost += std::exp(-model_.eta() * t) * opt.cost;
    const double u = rng.uniform();
    double acc = 0.0;
    StateIndex next = opt.distribution.front().target;
    for (const auto& tr_entry : opt.distribution) {
      if (tr_entry.weight <= 0.0) continue;
      acc += tr_entry.weight;
      next = tr_entry.target;
      if (u < acc) break;
    }
    x = next;
  }
  chain.landing = x;
  epoch.post_state = x;
  epoch.settle_time = t;
  epoch.chain = std::move(chain);
  tr.epochs.push_back(std::move(epoch));
}

Trajectory Simulator::simulate(StateIndex x0, Rng& rng, const SimulationOptions& options,
                               Cursor* spaced) const {
  if (x0 >= model_.size()) throw KeyError(fmt::format("initial state #{} out of range", x0));
  if (options.tail_tol < 0.0) throw std::invalid_argument("tail_tol must be >= 0");
  if (options.tail_tol == 0.0 && std::isinf(options.horizon))
    throw std::invalid_argument("an infinite horizon needs a positive tail_tol");

  const double eta = model_.eta();
  Trajectory tr;
  double t = 0.0;
  land(tr, Epoch{0.0, x0, x0, std::nullopt, x0, 0.0}, t, rng, spaced);

  for (;;) {
    const StateIndex x = tr.epochs.back().post_state;
    if (t >= options.horizon) {
      tr.truncation_time = options.horizon;
      break;
    }
    if (options.tail_tol > 0.0 && std::exp(-eta * t) * tail_bound_ < options.tail_tol) {
      tr.truncation_time = t;
      break;
    }
    const GradualOption& opt = model_.gradual(x)[policy_.phi_g[x]];
    if (opt.total_rate <= 0.0) {
      accrue(tr, opt.cost, t, options.horizon);
      tr.absorbed = true;
      tr.truncation_time = options.horizon;
      break;
    }
    const double next_time = t + rng.exponential(opt.total_rate);
    if (next_time > options.horizon) {
      accrue(tr, opt.cost, t, options.horizon);
      tr.truncation_time = options.horizon;
      break;
    }
    accrue(tr, opt.cost, t, next_time);
    t = next_time;
    const StateIndex y = sample_weighted(opt.rates, opt.total_rate, rng);
    ++tr.natural_jumps;
    land(tr, Epoch{t, x, y, std::nullopt, y, t}, t, rng, spaced);
  }
  return tr;
}

Trajectory Simulator::run(StateIndex x0, Rng& rng, const SimulationOptions& options) const {
  return simulate(x0, rng, options, nullptr);
}

Trajectory Simulator::run_spaced(StateIndex x0, Rng& rng, std::span<const double> deltas,
                                 double tail_tol) const {
  for (double d : deltas)
    if (!(d >= 0.0) || std::isinf(d)) throw std::invalid_argument("deltas must be finite and >= 0");
  Cursor cursor{deltas};
  SimulationOptions options;
  options.tail_tol = tail_tol;
  return simulate(x0, rng, options, &cursor);
}

Trajectory simulate_trajectory(const CtmdpModel& model, const StationaryPolicy& policy,
                               StateIndex x0, Rng& rng, double tail_tol) {
  SimulationOptions options;
  options.tail_tol = tail_tol;
  return Simulator(model, policy).run(x0, rng, options);
}

Trajectory simulate_spaced(const CtmdpModel& model, const StationaryPolicy& policy,
                           StateIndex x0, Rng& rng, std::span<const double> deltas,
                           double tail_tol) {
  return Simulator(model, policy).run_spaced(x0, rng, deltas, tail_tol);
}

CostEstimate estimate_cost(const CtmdpModel& model, const StationaryPolicy& policy,
                           StateIndex x0, const EstimateOptions& options) {
  if (options.n_reps < 2) throw std::invalid_argument("estimate_cost needs n_reps >= 2");
  const Simulator sim(model, policy);
  std::vector<double> costs(options.n_reps);
  std::vector<double> truncation(options.n_reps);
  std::vector<std::size_t> epochs(options.n_reps);
  std::vector<char> absorbed(options.n_reps);

  parallel_for(
      options.n_reps, options.threads,
      [&](std::size_t r) {
        Rng rng = Rng::substream(options.seed, r);
        SimulationOptions so;
        so.tail_tol = options.tail_tol;
        const Trajectory tr = options.deltas.empty()
                                  ? sim.run(x0, rng, so)
                                  : sim.run_spaced(x0, rng, options.deltas, options.tail_tol);
        costs[r] = tr.total_cost();
        truncation[r] = tr.truncation_time;
        epochs[r] = tr.epochs.size();
        absorbed[r] = tr.absorbed ? 1 : 0;
      },
      64);

  const MeanSe stats = mean_se(costs);
  CostEstimate est;
  est.mean = stats.mean;
  est.std_error = stats.se;
  est.n_replications = options.n_reps;
  est.half_width = kZ95 * stats.se;
  est.seed = options.seed;
  est.tail_tol = options.tail_tol;
  double epoch_sum = 0.0;
  for (std::size_t r = 0; r < options.n_reps; ++r) {
    epoch_sum += static_cast<double>(epochs[r]);
    if (absorbed[r])
      ++est.absorbed;
    else
      est.max_truncation_time = std::max(est.max_truncation_time, truncation[r]);
  }
  est.mean_epochs = epoch_sum / static_cast<double>(options.n_reps);
  return est;
}

DynkinResult dynkin_check(const CtmdpModel& model, const StationaryPolicy& policy,
                          const ValueFunction& W, StateIndex x0, double t, std::size_t n_reps,
                          std::uint64_t seed, unsigned threads) {
  if (W.size() != model.size()) throw std::invalid_argument("dynkin_check: W has wrong size");
  if (!(t >= 0.0) || std::isinf(t)) throw std::invalid_argument("dynkin_check: t must be finite");
  if (n_reps < 2) throw std::invalid_argument("dynkin_check needs n_reps >= 2");
  const Simulator sim(model, policy);
  const double eta = model.eta();
  const std::size_t n = model.size();

  // W averaged over where an arrival at y ends up once its chain has run.
  std::vector<double> landed(n, 0.0);
  for (StateIndex y = 0; y < n; ++y)
    for (const auto& e : sim.chains().landing_kernel[y]) landed[y] += e.weight * W[e.target];

  // Integrand of the compensator while sitting in a Gradual state x.
  std::vector<double> generator(n, 0.0);
  for (StateIndex x = 0; x < n; ++x) {
    const GradualOption& opt = model.gradual(x)[policy.phi_g[x]];
    double jump = 0.0;
    for (const auto& e : opt.rates) jump += e.weight * landed[e.target];
    generator[x] = -eta * W[x] + jump - W[x] * opt.total_rate;
  }

  std::vector<double> lhs(n_reps), rhs(n_reps), diff(n_reps);
  parallel_for(
      n_reps, threads,
      [&](std::size_t r) {
        Rng rng = Rng::substream(seed, r);
        SimulationOptions so;
        so.tail_tol = 0.0;
        so.horizon = t;
        const Trajectory tr = sim.run(x0, rng, so);
        double right = W[tr.epochs.front().post_state];
        for (std::size_t k = 0; k < tr.epochs.size(); ++k) {
          const Epoch& e = tr.epochs[k];
          const double until = k + 1 < tr.epochs.size() ? tr.epochs[k + 1].time : t;
          right += generator[e.post_state] * discount_integral(eta, e.settle_time, until);
        }
        const double left = std::exp(-eta * t) * W[tr.final_state()];
        lhs[r] = left;
        rhs[r] = right;
        diff[r] = left - right;
      },
      64);

  DynkinResult out;
  out.n_replications = n_reps;
  out.lhs = mean_se(lhs).mean;
  out.rhs = mean_se(rhs).mean;
  const MeanSe d = mean_se(diff);
  out.diff = d.mean;
  out.std_error = d.se;
  return out;
}

void write_trajectory_csv(std::ostream& out, const CtmdpModel& model, const Trajectory& tr) {
  const auto& labels = model.states().labels();
  out << "epoch,time,pre_state,target,chain_length,chain_cost,post_state\n";
  for (std::size_t k = 0; k < tr.epochs.size(); ++k) {
    const Epoch& e = tr.epochs[k];
    const std::size_t len = e.chain ? e.chain->length() : 0;
    const double cost = e.chain ? e.chain->total_cost : 0.0;
    fmt::print(out, "{},{},{},{},{},{},{}\n", k, e.time, labels[e.pre_state],
               labels[e.natural_target], len, cost, labels[e.post_state]);
  }
}

}  // namespace ictmdp
