#pragma once

// Epidemic with carriers. State (s, c, i) counts susceptibles, carriers and
// infectives. Carriers follow a birth-death process, each susceptible is
// infected at rate kappa_i(c), each infective recovers at rate kappa_r and
// costs 1 per unit time. The only intervention immunizes one susceptible at
// price lambda; the optimal strategy immunizes everybody once c >= c*.
//
// The carrier count is truncated at c_max with a reflecting boundary
// (rho_b(c_max) := 0). The generic model and the scalar carrier equation use
// the same truncation, so V(s,c,i) = s v(c) + i/(eta+kappa_r) holds exactly on
// the truncated model as well.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ictmdp/bellman.hpp"
#include "ictmdp/model.hpp"

namespace ictmdp::epidemic {

/// Rate function tabulated on c = 0, 1, ..., size()-1 and constant beyond.
struct RateTable {
  std::vector<double> values;

  double at(int c) const;
};

struct Params {
  int S = 0;   // initial susceptibles
  int I = 0;   // initial infectives
  int c0 = 0;  // initial carriers
  RateTable rho_b;
  RateTable rho_d;
  RateTable kappa_i;
  double kappa_r = 0.0;
  double lambda = 0.0;  // price of one immunization
  double eta = 0.0;
  int c_max = 0;
  /// Reject parameter sets whose carrier ratios alpha_1..3 decrease somewhere
  /// on [0, c_max]. The threshold argument relies on monotone ratios; the
  /// separable value formula does not.
  bool require_monotone_ratios = true;
};

/// Throws InvalidModelError on broken invariants, naming the first offending
/// carrier count for a monotonicity failure.
void check_params(const Params& p);

/// alpha_1..3 on c = 0..c_max. `truncated` applies rho_b(c_max) := 0.
struct CarrierRatios {
  std::vector<double> alpha1, alpha2, alpha3;
  double d = 0.0;  // max_c alpha1 + alpha2
};

CarrierRatios carrier_ratios(const Params& p, bool truncated);

/// First carrier count where one of the untruncated ratios decreases.
std::optional<int> first_ratio_decrease(const Params& p);

/// Index layout of the closed state set {s <= S, c <= c_max, s + i <= S + I}.
class StateLayout {
 public:
  explicit StateLayout(const Params& p);

  std::size_t size() const noexcept { return size_; }
  bool contains(int s, int c, int i) const;
  StateIndex index(int s, int c, int i) const;  // throws DomainError

  struct Triple {
    int s, c, i;
  };
  Triple decode(StateIndex x) const;
  static std::string label(int s, int c, int i);

 private:
  int S_, I_, c_max_;
  std::vector<std::size_t> offset_;  // first index for each s
  std::size_t size_ = 0;
};

/// Generic impulse-control model of the epidemic: one gradual action "wait"
/// with cost rate i, one impulse "immunize" on s >= 1 landing at (s-1, c, i).
CtmdpModel build_epidemic_model(const Params& p);

struct CarrierValue {
  std::vector<double> v;                 // solution of the carrier equation on 0..c_max
  std::vector<double> first_expression;  // continuation value at the solution
  std::optional<int> c_star;             // nullopt = never immunize
  double lambda_star = 0.0;
  double d = 0.0;
  double residual = 0.0;  // sup |G v - v|
  std::size_t iterations = 0;
  /// False when no threshold was found although lambda < lambda_star,
  /// i.e. c_max is too small to exhibit it.
  bool certified = true;
};

/// Successive approximations w_{n+1} = G w_n from w_0 = 0 of
///   w(c) = min{ alpha1(c) w(c+1) + alpha2(c) w(c-1) + alpha3(c), lambda },
/// stopped once step * d / (1 - d) <= tol.
CarrierValue solve_carrier_equation(const Params& p, double tol = 1e-12,
                                    std::size_t max_iter = 10'000'000);

/// lim_c (kappa_i(c)/(eta+kappa_r)) / (eta + kappa_i(c)), taken at c_max.
/// Independent of the carrier birth and death rates.
double lambda_star(const Params& p);

/// s v(c) + i / (eta + kappa_r); throws DomainError outside the state box.
double analytic_value(const Params& p, const CarrierValue& cv, int s, int c, int i);

/// Impulsive exactly on {s >= 1, c >= c*} (with the immunize action).
StationaryPolicy threshold_policy(const Params& p, const CarrierValue& cv);

/// Reads the YAML parameter document. Throws ParseError with line and field.
Params load_params(const std::string& path);
Params parse_params(const std::string& text);

/// Optional list `sweep_lambdas` of the parameter document.
std::vector<double> load_sweep_lambdas(const std::string& path);

}  // namespace ictmdp::epidemic
