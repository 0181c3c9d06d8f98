// ictmdp: command-line front end for the impulse-control CTMDP library.
//
// Every run prints one JSON record to stdout and, with --out DIR, also writes
// that record (report.json) and the command's CSV tables into DIR. Files are
// written to temporaries and renamed only once the run has succeeded.
//
// Exit codes: 0 ok, 1 other failure, 2 parse error, 3 validation failure,
// 4 non-convergence, 5 improper intervention chain.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ictmdp/bellman.hpp"
#include "ictmdp/epidemic.hpp"
#include "ictmdp/error.hpp"
#include "ictmdp/model_io.hpp"
#include "ictmdp/report.hpp"
#include "ictmdp/simulator.hpp"

namespace {

using namespace ictmdp;
namespace fs = std::filesystem;

enum ExitCode : int {
  kOk = 0,
  kOther = 1,
  kParse = 2,
  kValidation = 3,
  kNonConvergence = 4,
  kImproperChain = 5,
};

constexpr std::uint64_t kDefaultSeed = 20240501;

struct RunConfig {
  std::string command;
  std::string model_path;
  std::string params_path;
  double tol = 1e-10;
  double tail_tol = 1e-8;
  std::size_t n_reps = 10'000;
  std::uint64_t seed = kDefaultSeed;
  unsigned threads = 1;
  std::string output_path;
  std::optional<int> c_max;
  std::string x0;
  double horizon = 1.0;
  std::vector<double> lambdas;
};

Json config_json(const RunConfig& c) {
  Json j;
  j["command"] = c.command;
  j["model"] = c.model_path;
  j["params"] = c.params_path;
  j["tol"] = c.tol;
  j["tail_tol"] = c.tail_tol;
  j["reps"] = c.n_reps;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["c_max"] = c.c_max ? Json(*c.c_max) : Json(nullptr);
  j["x0"] = c.x0;
  j["t"] = c.horizon;
  j["lambdas"] = c.lambdas;
  return j;
}

/// Collects output files and publishes them only on success.
class Artifacts {
 public:
  explicit Artifacts(std::string dir) : dir_(std::move(dir)) {}

  std::ostream& open(const std::string& name) { return files_[name]; }

  void publish(const Json& record) {
    const std::string text = record.dump(2) + "\n";
    if (!dir_.empty()) write_all(text);
    std::cout << text;
  }

 private:
  void write_all(const std::string& text) {
    fs::create_directories(dir_);
    files_["report.json"].str(text);
    std::vector<std::pair<fs::path, fs::path>> staged;
    for (auto& [name, stream] : files_) {
      const fs::path final_path = fs::path(dir_) / name;
      fs::path tmp = final_path;
      tmp += ".partial";
      std::ofstream out(tmp, std::ios::binary);
      out << stream.str();
      if (!out) throw Error("cannot write '" + tmp.string() + "'");
      staged.emplace_back(tmp, final_path);
    }
    for (const auto& [tmp, final_path] : staged) fs::rename(tmp, final_path);
  }

  std::string dir_;
  std::map<std::string, std::ostringstream> files_;
};

Json base_record(const RunConfig& config) {
  Json record;
  record["status"] = "complete";
  record["config"] = config_json(config);
  return record;
}

epidemic::Params load_epidemic(const RunConfig& config) {
  epidemic::Params p = epidemic::load_params(config.params_path);
  if (config.c_max) p.c_max = *config.c_max;
  return p;
}

struct LoadedModel {
  std::optional<CtmdpModel> model;
  StateIndex x0 = 0;
};

LoadedModel load_for_simulation(const RunConfig& config) {
  LoadedModel out;
  if (!config.params_path.empty()) {
    const epidemic::Params p = load_epidemic(config);
    out.model.emplace(epidemic::build_epidemic_model(p));
    out.x0 = config.x0.empty() ? epidemic::StateLayout(p).index(p.S, p.c0, p.I)
                               : out.model->states().index(config.x0);
    return out;
  }
  if (config.model_path.empty()) throw CLI::ValidationError("--model or --params is required");
  if (config.x0.empty()) throw CLI::ValidationError("--x0 is required with --model");
  out.model.emplace(load_model(config.model_path));
  out.model->require_valid();
  out.x0 = out.model->states().index(config.x0);
  return out;
}

int run_validate(const RunConfig& config, Artifacts& artifacts) {
  if (config.model_path.empty()) throw CLI::ValidationError("validate needs --model");
  const CtmdpModel model = load_model(config.model_path);
  const ValidationReport report = validate_model(model);
  Json record = base_record(config);
  if (!report.empty()) record["status"] = "invalid";
  record["violations"] = to_json(report);
  artifacts.publish(record);
  return report.empty() ? kOk : kValidation;
}

int run_solve(const RunConfig& config, Artifacts& artifacts) {
  if (config.model_path.empty()) throw CLI::ValidationError("solve needs --model");
  const CtmdpModel model = load_model(config.model_path);
  model.require_valid();
  const SolveReport report = solve(model, {config.tol, 1'000'000, config.threads});
  const StationaryPolicy policy = extract_policy(model, report.V);
  write_values_csv(artifacts.open("values.csv"), model, report.V, policy);
  Json record = base_record(config);
  record["result"] = to_json(model, report, policy);
  artifacts.publish(record);
  return kOk;
}

int run_simulate(const RunConfig& config, Artifacts& artifacts) {
  const LoadedModel loaded = load_for_simulation(config);
  const CtmdpModel& model = *loaded.model;
  const SolveReport report = solve(model, {config.tol, 1'000'000, config.threads});
  const StationaryPolicy policy = extract_policy(model, report.V);

  EstimateOptions options;
  options.n_reps = config.n_reps;
  options.seed = config.seed;
  options.tail_tol = config.tail_tol;
  options.threads = config.threads;
  const CostEstimate estimate = estimate_cost(model, policy, loaded.x0, options);

  Rng rng = Rng::substream(config.seed, 0);
  SimulationOptions so;
  so.tail_tol = config.tail_tol;
  const Trajectory first = Simulator(model, policy).run(loaded.x0, rng, so);
  write_trajectory_csv(artifacts.open("trajectory.csv"), model, first);

  Json record = base_record(config);
  Json result = to_json(estimate);
  result["x0"] = model.states().label(loaded.x0);
  result["value_x0"] = report.V[loaded.x0];
  result["z_score"] =
      estimate.std_error > 0.0 ? (estimate.mean - report.V[loaded.x0]) / estimate.std_error : 0.0;
  record["result"] = std::move(result);
  artifacts.publish(record);
  return kOk;
}

int run_dynkin(const RunConfig& config, Artifacts& artifacts) {
  const LoadedModel loaded = load_for_simulation(config);
  const CtmdpModel& model = *loaded.model;
  const SolveReport report = solve(model, {config.tol, 1'000'000, config.threads});
  const StationaryPolicy policy = extract_policy(model, report.V);
  const DynkinResult result = dynkin_check(model, policy, report.V, loaded.x0, config.horizon,
                                           config.n_reps, config.seed, config.threads);
  Json record = base_record(config);
  record["result"] = to_json(result);
  record["result"]["x0"] = model.states().label(loaded.x0);
  artifacts.publish(record);
  return kOk;
}

int run_epidemic_solve(const RunConfig& config, Artifacts& artifacts) {
  if (config.params_path.empty()) throw CLI::ValidationError("epidemic-solve needs --params");
  const epidemic::Params p = load_epidemic(config);
  const epidemic::CarrierValue cv = epidemic::solve_carrier_equation(p, config.tol);
  write_carrier_csv(artifacts.open("carrier.csv"), cv);
  Json record = base_record(config);
  record["result"] = to_json(cv);
  artifacts.publish(record);
  return kOk;
}

int run_epidemic_sweep(const RunConfig& config, Artifacts& artifacts) {
  if (config.params_path.empty()) throw CLI::ValidationError("epidemic-sweep needs --params");
  epidemic::Params p = load_epidemic(config);
  std::vector<double> lambdas = config.lambdas;
  if (lambdas.empty()) lambdas = epidemic::load_sweep_lambdas(config.params_path);
  if (lambdas.empty())
    throw CLI::ValidationError("epidemic-sweep needs --lambdas or sweep_lambdas in the params file");

  std::ostream& csv = artifacts.open("sweep.csv");
  csv << "lambda,c_star,lambda_star,v_residual\n";
  Json rows = Json::array();
  for (double lambda : lambdas) {
    p.lambda = lambda;
    const epidemic::CarrierValue cv = epidemic::solve_carrier_equation(p, config.tol);
    const std::string c_star = cv.c_star ? std::to_string(*cv.c_star) : "inf";
    csv << Json(lambda).dump() << ',' << c_star << ',' << Json(cv.lambda_star).dump() << ','
        << Json(cv.residual).dump() << '\n';
    rows.push_back({{"lambda", lambda},
                    {"c_star", cv.c_star ? Json(*cv.c_star) : Json("inf")},
                    {"lambda_star", cv.lambda_star},
                    {"v_residual", cv.residual},
                    {"certified", cv.certified}});
  }
  Json record = base_record(config);
  record["result"] = {{"sweep", rows}};
  artifacts.publish(record);
  return kOk;
}

void emit_error(int code, const std::string& kind, const std::string& message,
                const std::vector<std::string>& details = {}) {
  Json err;
  err["status"] = "error";
  err["code"] = code;
  err["kind"] = kind;
  err["message"] = message;
  if (!details.empty()) err["details"] = details;
  std::cerr << err.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Impulse-control CTMDP solver and simulator.\n"
      "Exit codes: 0 ok, 1 other failure, 2 parse error, 3 validation failure,\n"
      "4 non-convergence, 5 improper intervention chain."};
  app.set_config("--config", "", "Flat config file (key = value); flags override it");

  RunConfig config;
  std::optional<int> c_max;
  app.add_option("command", config.command, "Workflow to run")
      ->required()
      ->check(CLI::IsMember({"validate", "solve", "simulate", "epidemic-solve", "epidemic-sweep",
                             "dynkin-check"}));
  app.add_option("--model", config.model_path, "Model document (YAML)");
  app.add_option("--params", config.params_path, "Epidemic parameter document (YAML)");
  app.add_option("--tol", config.tol, "Solver tolerance")->check(CLI::PositiveNumber);
  app.add_option("--tail-tol", config.tail_tol, "Trajectory truncation tolerance")
      ->check(CLI::PositiveNumber);
  app.add_option("--reps", config.n_reps, "Monte Carlo replications")->check(CLI::Range(2, 100'000'000));
  app.add_option("--seed", config.seed, "Master seed (default 20240501)");
  app.add_option("--threads", config.threads, "Worker thread cap")->check(CLI::Range(1, 1024));
  app.add_option("--out", config.output_path, "Output directory");
  app.add_option("--c-max", c_max, "Override the carrier truncation bound")->check(CLI::Range(1, 1'000'000));
  app.add_option("--x0", config.x0, "Initial state label");
  app.add_option("--t", config.horizon, "Horizon for dynkin-check")->check(CLI::NonNegativeNumber);
  app.add_option("--lambdas", config.lambdas, "Immunization prices for epidemic-sweep")
      ->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    emit_error(kParse, "usage", e.what());
    return kParse;
  }
  config.c_max = c_max;

  Artifacts artifacts(config.output_path);
  try {
    if (config.command == "validate") return run_validate(config, artifacts);
    if (config.command == "solve") return run_solve(config, artifacts);
    if (config.command == "simulate") return run_simulate(config, artifacts);
    if (config.command == "dynkin-check") return run_dynkin(config, artifacts);
    if (config.command == "epidemic-solve") return run_epidemic_solve(config, artifacts);
    if (config.command == "epidemic-sweep") return run_epidemic_sweep(config, artifacts);
  } catch (const ParseError& e) {
    emit_error(kParse, "parse", e.what());
    return kParse;
  } catch (const CLI::ValidationError& e) {
    emit_error(kParse, "usage", e.what());
    return kParse;
  } catch (const InvalidModelError& e) {
    emit_error(kValidation, "validation", e.what(), e.details());
    return kValidation;
  } catch (const NonConvergenceError& e) {
    emit_error(kNonConvergence, "non_convergence", e.what());
    return kNonConvergence;
  } catch (const ImproperChainError& e) {
    emit_error(kImproperChain, "improper_chain", e.what());
    return kImproperChain;
  } catch (const KeyError& e) {
    emit_error(kParse, "unknown_key", e.what());
    return kParse;
  } catch (const std::exception& e) {
    emit_error(kOther, "error", e.what());
    return kOther;
  }
  return kOther;
}
