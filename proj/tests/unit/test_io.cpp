#include <doctest.h>

#include <string>

#include "ictmdp/epidemic.hpp"
#include "ictmdp/error.hpp"
#include "ictmdp/model_io.hpp"

using namespace ictmdp;

namespace {

const std::string kTwoState = R"(states: [s0, s1]
gradual_actions:
  s0: [wait]
  s1: [wait]
impulsive_actions:
  s1: [reset]
rates:
  - {state: s0, action: wait, targets: {}}
  - {state: s1, action: wait, targets: {s0: 1.0}}
impulse_rows:
  - {state: s1, action: reset, probabilities: {s0: 1.0}}
costs:
  gradual:
    - {state: s0, action: wait, cost: 0.0}
    - {state: s1, action: wait, cost: 1.0}
  impulsive:
    - {state: s1, action: reset, cost: 0.3}
constants: {eta: 1.0, K_rate: 1.0, K_cost: 1.0, c_lower: 0.3}
)";

ParseError parse_error_of(const std::string& text) {
  try {
    parse_model(text);
  } catch (const ParseError& e) {
    return e;
  }
  FAIL("expected a parse error");
  return ParseError("", 0, "");
}

std::string replace(std::string s, const std::string& from, const std::string& to) {
  const auto pos = s.find(from);
  REQUIRE(pos != std::string::npos);
  return s.replace(pos, from.size(), to);
}

}  // namespace

TEST_CASE("model document round trip") {
  const auto m = parse_model(kTwoState);
  CHECK(m.is_valid());
  REQUIRE(m.size() == 2);
  CHECK(m.states().label(1) == "s1");
  CHECK(m.gradual(1)[0].total_rate == 1.0);
  CHECK(m.gradual(1)[0].cost == 1.0);
  REQUIRE(m.impulsive(1).size() == 1);
  CHECK(m.impulsive(1)[0].cost == 0.3);
  CHECK(m.impulsive_label(1, 0) == "reset");
  CHECK(m.eta() == 1.0);
  CHECK(m.costs().impulse_floor == 0.3);
}

TEST_CASE("parse errors carry line and field") {
  SUBCASE("unknown target state") {
    const auto e = parse_error_of(replace(kTwoState, "targets: {s0: 1.0}", "targets: {s9: 1.0}"));
    CHECK(e.line() == 9);
    CHECK(e.field() == "rates[1].targets");
  }
  SUBCASE("unknown action") {
    const auto e = parse_error_of(replace(kTwoState, "{state: s1, action: reset, cost", "{state: s1, action: jump, cost"));
    CHECK(e.line() == 17);
    CHECK(e.field() == "costs.impulsive[0].action");
  }
  SUBCASE("non-numeric constant") {
    const auto e = parse_error_of(replace(kTwoState, "eta: 1.0", "eta: fast"));
    CHECK(e.line() == 18);
    CHECK(e.field() == "constants.eta");
  }
  SUBCASE("missing section") {
    const auto e = parse_error_of(replace(kTwoState, "constants:", "konstants:"));
    CHECK(e.field() == "constants");
  }
  SUBCASE("duplicate row") {
    const auto e = parse_error_of(replace(kTwoState, "  - {state: s0, action: wait, targets: {}}",
                                          "  - {state: s1, action: wait, targets: {}}"));
    CHECK(e.field() == "rates[1]");
    CHECK(e.line() == 9);
  }
  SUBCASE("malformed yaml") {
    const auto e = parse_error_of("states: [s0, s1\n");
    CHECK(e.line() >= 1);
  }
}

TEST_CASE("missing rows are left to validation") {
  const auto m = parse_model(replace(kTwoState, "  - {state: s0, action: wait, targets: {}}\n", ""));
  REQUIRE_FALSE(m.is_valid());
  CHECK(m.violations()[0].rule == "coverage");
}

TEST_CASE("unreadable file") {
  CHECK_THROWS_AS(load_model("/nonexistent/model.yaml"), ParseError);
}

TEST_CASE("epidemic parameter document") {
  const std::string text = R"(S: 3
I: 1
c0: 2
C_max: 8
eta: 1.0
kappa_r: 1.0
lambda: 0.2
rho_b: 0.5
rho_d: [0, 0.5, 1.0]
kappa_i: [0, 1, 2]
)";
  const auto p = epidemic::parse_params(text);
  CHECK(p.S == 3);
  CHECK(p.c_max == 8);
  CHECK(p.rho_b.at(0) == 0.0);
  CHECK(p.rho_b.at(5) == 0.5);
  CHECK(p.rho_d.at(1) == 0.5);
  CHECK(p.rho_d.at(7) == 1.0);
  CHECK(p.kappa_i.at(100) == 2.0);
  CHECK(p.require_monotone_ratios);

  try {
    epidemic::parse_params(replace(text, "kappa_i: [0, 1, 2]", "kappa_i: [0, x, 2]"));
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 10);
    CHECK(e.field() == "kappa_i[1]");
  }
}
