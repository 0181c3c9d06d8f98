#include "ictmdp/report.hpp"

#include <cmath>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace ictmdp {

namespace {

const char* mode_name(StateMode m) { return m == StateMode::Gradual ? "gradual" : "impulsive"; }

}  // namespace

Json to_json(const ValidationReport& report) {
  Json out = Json::array();
  for (const auto& v : report)
    out.push_back({{"rule", v.rule}, {"state", v.state}, {"action", v.action}, {"message", v.message}});
  return out;
}

Json to_json(const CtmdpModel& model, const SolveReport& report, const StationaryPolicy& policy) {
  Json states = Json::array();
  for (StateIndex x = 0; x < model.size(); ++x) {
    Json row;
    row["state"] = model.states().label(x);
    row["value"] = report.V[x];
    row["mode"] = mode_name(policy.partition[x]);
    row["gradual_action"] = model.gradual_label(x, policy.phi_g[x]);
    row["impulsive_action"] =
        policy.phi_i[x] ? Json(model.impulsive_label(x, *policy.phi_i[x])) : Json(nullptr);
    states.push_back(std::move(row));
  }
  Json out;
  out["K"] = model.K();
  out["eta"] = model.eta();
  out["iterations_above"] = report.iterations_above;
  out["iterations_below"] = report.iterations_below;
  out["residual"] = report.residual;
  out["gap"] = report.gap;
  out["states"] = std::move(states);
  return out;
}

Json to_json(const CostEstimate& e) {
  Json out;
  out["mean"] = e.mean;
  out["std_error"] = e.std_error;
  out["n_replications"] = e.n_replications;
  out["confidence_level"] = e.confidence_level;
  out["half_width"] = e.half_width;
  out["seed"] = e.seed;
  out["tail_tol"] = e.tail_tol;
  out["max_truncation_time"] = e.max_truncation_time;
  out["absorbed"] = e.absorbed;
  out["mean_epochs"] = e.mean_epochs;
  return out;
}

Json to_json(const DynkinResult& r) {
  Json out;
  out["lhs"] = r.lhs;
  out["rhs"] = r.rhs;
  out["diff"] = r.diff;
  out["std_error"] = r.std_error;
  out["n_replications"] = r.n_replications;
  return out;
}

Json to_json(const epidemic::CarrierValue& cv) {
  Json out;
  out["c_star"] = cv.c_star ? Json(*cv.c_star) : Json("inf");
  out["lambda_star"] = cv.lambda_star;
  out["certified"] = cv.certified;
  out["d"] = cv.d;
  out["residual"] = cv.residual;
  out["iterations"] = cv.iterations;
  out["v"] = cv.v;
  return out;
}

void write_values_csv(std::ostream& out, const CtmdpModel& model, const ValueFunction& V,
                      const StationaryPolicy& policy) {
  out << "state,value,mode,gradual_action,impulsive_action\n";
  for (StateIndex x = 0; x < model.size(); ++x) {
    fmt::print(out, "{},{},{},{},{}\n", model.states().label(x), V[x],
               mode_name(policy.partition[x]), model.gradual_label(x, policy.phi_g[x]),
               policy.phi_i[x] ? model.impulsive_label(x, *policy.phi_i[x]) : std::string());
  }
}

void write_carrier_csv(std::ostream& out, const epidemic::CarrierValue& cv) {
  out << "c,v,first_expression,immunize\n";
  for (std::size_t c = 0; c < cv.v.size(); ++c) {
    const bool immunize = cv.c_star && static_cast<int>(c) >= *cv.c_star;
    fmt::print(out, "{},{},{},{}\n", c, cv.v[c], cv.first_expression[c], immunize ? 1 : 0);
  }
}

}  // namespace ictmdp
