#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "ictmdp/epidemic.hpp"
#include "ictmdp/error.hpp"
#include "ictmdp/intervention.hpp"

using namespace ictmdp;
using namespace ictmdp::epidemic;

namespace {

RateTable saturating(int top) {
  RateTable t;
  for (int c = 0; c <= top; ++c) t.values.push_back(c);
  return t;
}

// Frozen carriers, infection rate min(c, 10).
Params static_desk(double lambda = 0.2) {
  Params p;
  p.S = 10;
  p.I = 2;
  p.c0 = 2;
  p.c_max = 30;
  p.eta = 1.0;
  p.kappa_r = 1.0;
  p.lambda = lambda;
  p.rho_b = RateTable{{0.0}};
  p.rho_d = RateTable{{0.0}};
  p.kappa_i = saturating(10);
  return p;
}

// Small instance whose ratios are monotone: rho_b = rho_d = kappa_i = min(c, 6).
Params small_monotone(double lambda) {
  Params p;
  p.S = 3;
  p.I = 1;
  p.c0 = 1;
  p.c_max = 12;
  p.eta = 1.0;
  p.kappa_r = 1.0;
  p.lambda = lambda;
  p.rho_b = saturating(6);
  p.rho_d = saturating(6);
  p.kappa_i = saturating(6);
  return p;
}

}  // namespace

TEST_CASE("rate tables are constant beyond their last entry") {
  const RateTable t{{0.0, 2.0, 3.0}};
  CHECK(t.at(0) == 0.0);
  CHECK(t.at(2) == 3.0);
  CHECK(t.at(50) == 3.0);
}

TEST_CASE("state layout round trip") {
  const auto p = small_monotone(0.1);
  const StateLayout layout(p);
  std::size_t count = 0;
  for (int s = 0; s <= p.S; ++s)
    for (int c = 0; c <= p.c_max; ++c)
      for (int i = 0; s + i <= p.S + p.I; ++i) {
        const auto x = layout.index(s, c, i);
        const auto t = layout.decode(x);
        CHECK(t.s == s);
        CHECK(t.c == c);
        CHECK(t.i == i);
        ++count;
      }
  CHECK(layout.size() == count);
  CHECK_THROWS_AS(layout.index(p.S + 1, 0, 0), DomainError);
  CHECK_THROWS_AS(layout.index(p.S, 0, p.I + 1), DomainError);
  CHECK(StateLayout::label(1, 2, 3) == "1:2:3");
}

TEST_CASE("static carriers: closed-form carrier value") {
  const auto p = static_desk();
  const auto cv = solve_carrier_equation(p);
  for (int c = 0; c <= p.c_max; ++c) {
    const double k = std::min(c, 10);
    const double expected = std::min((k / 2.0) / (1.0 + k), 0.2);
    CHECK(std::abs(cv.v[c] - expected) <= 1e-12);
  }
  REQUIRE(cv.c_star.has_value());
  CHECK(*cv.c_star == 1);
  CHECK(cv.lambda_star == doctest::Approx(5.0 / 11.0).epsilon(1e-15));
  CHECK(cv.certified);
}

TEST_CASE("price above the critical level never immunizes") {
  const auto cv = solve_carrier_equation(static_desk(0.5));
  CHECK_FALSE(cv.c_star.has_value());
  CHECK(cv.certified);
  for (int c = 0; c <= 30; ++c) CHECK(cv.v[c] <= 0.5);
}

TEST_CASE("no infection pressure") {
  auto p = static_desk();
  p.kappa_i = RateTable{{0.0}};
  const auto cv = solve_carrier_equation(p);
  for (double v : cv.v) CHECK(v == 0.0);
  CHECK_FALSE(cv.c_star.has_value());
  CHECK(lambda_star(p) == 0.0);

  const auto policy = threshold_policy(p, cv);
  CHECK(std::none_of(policy.partition.begin(), policy.partition.end(),
                     [](StateMode m) { return m == StateMode::Impulsive; }));
}

TEST_CASE("critical price ignores carrier birth and death") {
  auto p = small_monotone(0.1);
  const double base = lambda_star(p);
  CHECK(base == doctest::Approx((6.0 / 2.0) / 7.0));
  for (auto& v : p.rho_b.values) v *= 2.0;
  for (auto& v : p.rho_d.values) v *= 2.0;
  CHECK(lambda_star(p) == base);
}

TEST_CASE("carrier equation invariants") {
  for (double lambda : {0.05, 0.15, 0.3, 0.45}) {
    const auto p = small_monotone(lambda);
    const double tol = 1e-12;
    const auto cv = solve_carrier_equation(p, tol);
    CHECK(cv.residual <= 10 * tol);
    for (int c = 0; c <= p.c_max; ++c) {
      CHECK(cv.v[c] >= 0.0);
      CHECK(cv.v[c] <= lambda);
      if (c > 0) CHECK(cv.v[c] >= cv.v[c - 1] - 1e-12);
      const bool above = cv.first_expression[c] > lambda;
      CHECK(above == (cv.c_star && c >= *cv.c_star));
    }
    CHECK(cv.c_star.has_value() == (lambda < cv.lambda_star));
  }
}

TEST_CASE("parameter checks") {
  auto p = static_desk();
  p.rho_b = RateTable{{0.0, 1.0}};
  p.rho_d = RateTable{{0.0, 1.0}};
  CHECK(first_ratio_decrease(p) == 2);
  try {
    check_params(p);
    FAIL("expected rejection");
  } catch (const InvalidModelError& e) {
    CHECK(std::string(e.what()).find("c = 2") != std::string::npos);
  }
  p.require_monotone_ratios = false;
  CHECK_NOTHROW(check_params(p));

  auto q = static_desk();
  q.kappa_i = RateTable{{0.5, 1.0}};
  CHECK_THROWS_AS(check_params(q), InvalidModelError);
  q = static_desk();
  q.lambda = 0.0;
  CHECK_THROWS_AS(check_params(q), InvalidModelError);
}

TEST_CASE("generic model rate audit") {
  auto p = static_desk();
  p.rho_b = RateTable{{0.0, 1.0}};
  p.rho_d = RateTable{{0.0, 1.0}};
  p.require_monotone_ratios = false;
  const auto m = build_epidemic_model(p);
  REQUIRE(m.is_valid());
  // Largest total rate: s = 10, i = 2, 1 <= c < C_max with kappa_i = 10.
  CHECK(m.rates().bound == 1.0 + 1.0 + 100.0 + 2.0);
  CHECK(m.K() == 104.0);
  const StateLayout layout(p);
  const auto x = layout.index(2, 3, 1);
  const auto& opt = m.gradual(x)[0];
  CHECK(opt.cost == 1.0);
  CHECK(opt.total_rate == 1.0 + 1.0 + 2 * 3.0 + 1.0);
  const auto top = layout.index(0, p.c_max, 0);
  CHECK(m.gradual(top)[0].total_rate == 1.0);  // death only
  CHECK_FALSE(m.impulse_feasible(layout.index(0, 4, 4)));
  REQUIRE(m.impulse_feasible(x));
  CHECK(m.impulsive(x)[0].distribution[0].target == layout.index(1, 3, 1));
  CHECK(m.impulsive(x)[0].cost == 0.2);
}

TEST_CASE("no susceptibles: value is the recovery integral") {
  auto p = small_monotone(0.1);
  p.S = 0;
  p.I = 3;
  const auto m = build_epidemic_model(p);
  const auto r = solve(m);
  const StateLayout layout(p);
  for (StateIndex x = 0; x < m.size(); ++x) {
    const auto t = layout.decode(x);
    CHECK(std::abs(r.V[x] - t.i / 2.0) <= 1e-8);
    CHECK_FALSE(m.impulse_feasible(x));
  }
}

TEST_CASE("generic solve is separable and matches the threshold policy") {
  for (double lambda : {0.1, 0.25, 0.45}) {
    const auto p = small_monotone(lambda);
    const auto m = build_epidemic_model(p);
    const auto cv = solve_carrier_equation(p);
    const auto r = solve(m);
    const auto generic = extract_policy(m, r.V);
    const auto thresh = threshold_policy(p, cv);
    const StateLayout layout(p);
    for (StateIndex x = 0; x < m.size(); ++x) {
      const auto [s, c, i] = layout.decode(x);
      CHECK(std::abs(r.V[x] - analytic_value(p, cv, s, c, i)) <= 1e-7);
      if (c <= p.c_max / 2) CHECK(generic.partition[x] == thresh.partition[x]);
    }
  }
}

TEST_CASE("analytic value") {
  const auto p = static_desk();
  const auto cv = solve_carrier_equation(p);
  CHECK(analytic_value(p, cv, 0, 7, 3) == 1.5);
  CHECK(analytic_value(p, cv, 1, 5, 0) == cv.v[5]);
  CHECK(analytic_value(p, cv, 10, 5, 2) == doctest::Approx(10 * cv.v[5] + 1.0));
  CHECK_THROWS_AS(analytic_value(p, cv, 11, 0, 0), DomainError);
  CHECK_THROWS_AS(analytic_value(p, cv, 0, 31, 0), DomainError);
}

TEST_CASE("threshold chain immunizes every susceptible") {
  const auto p = static_desk();
  const auto cv = solve_carrier_equation(p);
  const auto m = build_epidemic_model(p);
  const auto policy = threshold_policy(p, cv);
  const StateLayout layout(p);
  Rng rng(1);
  const auto chain = sample_chain(m, policy, layout.index(3, 4, 2), rng);
  CHECK(chain.length() == 3);
  CHECK(chain.total_cost == doctest::Approx(3 * 0.2));
  CHECK(chain.landing == layout.index(0, 4, 2));
  CHECK(policy.partition[layout.index(3, 0, 2)] == StateMode::Gradual);
  CHECK(policy.partition[layout.index(0, 5, 2)] == StateMode::Gradual);
}
