#include "ictmdp/epidemic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "ictmdp/error.hpp"

namespace ictmdp::epidemic {

namespace {

constexpr const char* kWait = "wait";
constexpr const char* kImmunize = "immunize";

void check_table(const RateTable& table, const char* name, std::vector<std::string>& problems) {
  if (table.values.empty()) {
    problems.push_back(fmt::format("{} table is empty", name));
    return;
  }
  for (std::size_t c = 0; c < table.values.size(); ++c) {
    const double v = table.values[c];
    if (!std::isfinite(v) || v < 0.0)
      problems.push_back(fmt::format("{}({}) = {} must be finite and >= 0", name, c, v));
  }
  if (table.values.front() != 0.0)
    problems.push_back(fmt::format("{}(0) must be 0, got {}", name, table.values.front()));
}

}  // namespace

double RateTable::at(int c) const {
  if (values.empty() || c < 0) return 0.0;
  const auto k = static_cast<std::size_t>(c);
  return k < values.size() ? values[k] : values.back();
}

void check_params(const Params& p) {
  std::vector<std::string> problems;
  if (p.S < 0) problems.push_back(fmt::format("S = {} must be >= 0", p.S));
  if (p.I < 0) problems.push_back(fmt::format("I = {} must be >= 0", p.I));
  if (p.c_max < 1) problems.push_back(fmt::format("C_max = {} must be >= 1", p.c_max));
  if (p.c0 < 0 || p.c0 > p.c_max)
    problems.push_back(fmt::format("c0 = {} must lie in [0, C_max = {}]", p.c0, p.c_max));
  check_table(p.rho_b, "rho_b", problems);
  check_table(p.rho_d, "rho_d", problems);
  check_table(p.kappa_i, "kappa_i", problems);
  if (!std::isfinite(p.kappa_r) || p.kappa_r < 0.0)
    problems.push_back(fmt::format("kappa_r = {} must be finite and >= 0", p.kappa_r));
  if (!std::isfinite(p.lambda) || p.lambda <= 0.0)
    problems.push_back(fmt::format("lambda = {} must be positive", p.lambda));
  if (!std::isfinite(p.eta) || p.eta <= 0.0)
    problems.push_back(fmt::format("eta = {} must be positive", p.eta));

  if (problems.empty() && p.require_monotone_ratios) {
    if (auto c = first_ratio_decrease(p))
      problems.push_back(fmt::format(
          "carrier ratios alpha_1..3 must be nondecreasing on [0, C_max]; first decrease at c = {}",
          *c));
  }
  if (!problems.empty()) {
    std::string message = "invalid epidemic parameters: " + problems.front();
    throw InvalidModelError(message, std::move(problems));
  }
}

CarrierRatios carrier_ratios(const Params& p, bool truncated) {
  CarrierRatios r;
  const auto n = static_cast<std::size_t>(p.c_max) + 1;
  r.alpha1.resize(n);
  r.alpha2.resize(n);
  r.alpha3.resize(n);
  for (int c = 0; c <= p.c_max; ++c) {
    const double birth = truncated && c == p.c_max ? 0.0 : p.rho_b.at(c);
    const double death = p.rho_d.at(c);
    const double infect = p.kappa_i.at(c);
    const double den = p.eta + birth + death + infect;
    const auto k = static_cast<std::size_t>(c);
    r.alpha1[k] = birth / den;
    r.alpha2[k] = death / den;
    r.alpha3[k] = infect / (p.eta + p.kappa_r) / den;
    r.d = std::max(r.d, r.alpha1[k] + r.alpha2[k]);
  }
  return r;
}

std::optional<int> first_ratio_decrease(const Params& p) {
  const CarrierRatios r = carrier_ratios(p, false);
  for (int c = 1; c <= p.c_max; ++c) {
    const auto k = static_cast<std::size_t>(c);
    if (r.alpha1[k] < r.alpha1[k - 1] || r.alpha2[k] < r.alpha2[k - 1] ||
        r.alpha3[k] < r.alpha3[k - 1])
      return c;
  }
  return std::nullopt;
}

StateLayout::StateLayout(const Params& p) : S_(p.S), I_(p.I), c_max_(p.c_max) {
  offset_.resize(static_cast<std::size_t>(S_) + 1);
  std::size_t at = 0;
  for (int s = 0; s <= S_; ++s) {
    offset_[static_cast<std::size_t>(s)] = at;
    at += static_cast<std::size_t>(c_max_ + 1) * static_cast<std::size_t>(S_ + I_ - s + 1);
  }
  size_ = at;
}

bool StateLayout::contains(int s, int c, int i) const {
  return s >= 0 && s <= S_ && c >= 0 && c <= c_max_ && i >= 0 && s + i <= S_ + I_;
}

StateIndex StateLayout::index(int s, int c, int i) const {
  if (!contains(s, c, i))
    throw DomainError(fmt::format("state ({}, {}, {}) outside the epidemic state set", s, c, i));
  const auto width = static_cast<std::size_t>(S_ + I_ - s + 1);
  return offset_[static_cast<std::size_t>(s)] + static_cast<std::size_t>(c) * width +
         static_cast<std::size_t>(i);
}

StateLayout::Triple StateLayout::decode(StateIndex x) const {
  if (x >= size_) throw DomainError(fmt::format("state index {} out of range", x));
  auto it = std::upper_bound(offset_.begin(), offset_.end(), x);
  const int s = static_cast<int>(std::distance(offset_.begin(), it)) - 1;
  const std::size_t rest = x - offset_[static_cast<std::size_t>(s)];
  const auto width = static_cast<std::size_t>(S_ + I_ - s + 1);
  return {s, static_cast<int>(rest / width), static_cast<int>(rest % width)};
}

std::string StateLayout::label(int s, int c, int i) { return fmt::format("{}:{}:{}", s, c, i); }

CtmdpModel build_epidemic_model(const Params& p) {
  check_params(p);
  const StateLayout layout(p);
  const std::size_t n = layout.size();

  std::vector<std::string> labels(n);
  ActionCatalog actions;
  actions.gradual.assign(n, {kWait});
  actions.impulsive.assign(n, {});
  RateKernel rates;
  ImpulseKernel impulses;
  CostModel costs;
  double max_rate = 0.0;

  for (StateIndex x = 0; x < n; ++x) {
    const auto [s, c, i] = layout.decode(x);
    labels[x] = StateLayout::label(s, c, i);
    SparseRow row;
    const double birth = c < p.c_max ? p.rho_b.at(c) : 0.0;
    const double death = c > 0 ? p.rho_d.at(c) : 0.0;
    const double infect = s * p.kappa_i.at(c);
    const double recover = i * p.kappa_r;
    if (birth > 0.0) row.push_back({layout.index(s, c + 1, i), birth});
    if (death > 0.0) row.push_back({layout.index(s, c - 1, i), death});
    if (infect > 0.0) row.push_back({layout.index(s - 1, c, i + 1), infect});
    if (recover > 0.0) row.push_back({layout.index(s, c, i - 1), recover});
    double total = 0.0;
    for (const auto& t : row) total += t.weight;
    max_rate = std::max(max_rate, total);
    rates.rows[{x, 0}] = std::move(row);
    costs.gradual[{x, 0}] = static_cast<double>(i);

    if (s >= 1) {
      actions.impulsive[x] = {kImmunize};
      impulses.rows[{x, 0}] = {{layout.index(s - 1, c, i), 1.0}};
      costs.impulsive[{x, 0}] = p.lambda;
    }
  }

  rates.bound = max_rate;
  costs.eta = p.eta;
  costs.cost_bound = static_cast<double>(std::max(1, p.S + p.I));
  costs.impulse_floor = p.lambda;
  return CtmdpModel(StateSpace(std::move(labels)), std::move(actions), std::move(rates),
                    std::move(impulses), std::move(costs));
}

CarrierValue solve_carrier_equation(const Params& p, double tol, std::size_t max_iter) {
  check_params(p);
  if (!(tol > 0.0)) throw std::invalid_argument("solve_carrier_equation: tol must be positive");
  const CarrierRatios r = carrier_ratios(p, true);
  if (!(r.d < 1.0))
    throw InvalidModelError(
        fmt::format("carrier equation is not a contraction: sup(alpha1 + alpha2) = {}", r.d));

  const auto n = r.alpha1.size();
  auto apply = [&](const std::vector<double>& w, std::vector<double>& first) {
    std::vector<double> out(n);
    for (std::size_t c = 0; c < n; ++c) {
      const double up = c + 1 < n ? w[c + 1] : 0.0;
      const double down = c > 0 ? w[c - 1] : 0.0;
      first[c] = r.alpha1[c] * up + r.alpha2[c] * down + r.alpha3[c];
      out[c] = std::min(first[c], p.lambda);
    }
    return out;
  };

  CarrierValue cv;
  cv.d = r.d;
  cv.lambda_star = lambda_star(p);
  cv.first_expression.assign(n, 0.0);
  std::vector<double> w(n, 0.0);
  const double factor = r.d / (1.0 - r.d);
  bool converged = false;
  double step = 0.0;
  for (std::size_t it = 1; it <= max_iter; ++it) {
    std::vector<double> next = apply(w, cv.first_expression);
    step = 0.0;
    for (std::size_t c = 0; c < n; ++c) step = std::max(step, std::abs(next[c] - w[c]));
    w = std::move(next);
    cv.iterations = it;
    if (step * factor <= tol) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw NonConvergenceError(
        fmt::format("carrier equation did not converge in {} iterations", max_iter), w, step,
        max_iter);

  // Re-evaluate the continuation value and residual at the returned v.
  const std::vector<double> image = apply(w, cv.first_expression);
  for (std::size_t c = 0; c < n; ++c) cv.residual = std::max(cv.residual, std::abs(image[c] - w[c]));
  cv.v = std::move(w);

  for (std::size_t c = 0; c < n; ++c) {
    if (cv.first_expression[c] > p.lambda) {
      cv.c_star = static_cast<int>(c);
      break;
    }
  }
  cv.certified = cv.c_star.has_value() || p.lambda >= cv.lambda_star;
  return cv;
}

double lambda_star(const Params& p) {
  const double k = p.kappa_i.at(p.c_max);
  return (k / (p.eta + p.kappa_r)) / (p.eta + k);
}

double analytic_value(const Params& p, const CarrierValue& cv, int s, int c, int i) {
  if (s < 0 || s > p.S || c < 0 || c > p.c_max || i < 0 || i > p.S + p.I)
    throw DomainError(fmt::format("({}, {}, {}) outside the state box", s, c, i));
  if (static_cast<std::size_t>(c) >= cv.v.size())
    throw DomainError(fmt::format("carrier value has no entry for c = {}", c));
  return s * cv.v[static_cast<std::size_t>(c)] + i / (p.eta + p.kappa_r);
}

StationaryPolicy threshold_policy(const Params& p, const CarrierValue& cv) {
  const StateLayout layout(p);
  StationaryPolicy policy;
  const std::size_t n = layout.size();
  policy.partition.assign(n, StateMode::Gradual);
  policy.phi_g.assign(n, 0);
  policy.phi_i.assign(n, std::nullopt);
  if (!cv.c_star) return policy;
  for (StateIndex x = 0; x < n; ++x) {
    const auto [s, c, i] = layout.decode(x);
    if (s >= 1 && c >= *cv.c_star) {
      policy.partition[x] = StateMode::Impulsive;
      policy.phi_i[x] = 0;
    }
  }
  return policy;
}

}  // namespace ictmdp::epidemic
