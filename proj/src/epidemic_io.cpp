#include <string>

#include "ictmdp/epidemic.hpp"
#include "ictmdp/error.hpp"
#include "ictmdp/model_io.hpp"
#include "yaml_util.hpp"

namespace ictmdp::epidemic {

namespace {

RateTable read_table(const YAML::Node& doc, const std::string& key) {
  const YAML::Node node = detail::require(doc, key, "");
  if (node.IsScalar()) return RateTable{{0.0, detail::as<double>(node, key)}};
  return RateTable{detail::as_list<double>(node, key)};
}

}  // namespace

Params parse_params(const std::string& text) {
  const YAML::Node doc = detail::load_yaml(text);
  if (!doc.IsMap()) throw ParseError("", detail::line_of(doc), "parameter document must be a mapping");
  Params p;
  p.S = detail::get<int>(doc, "S", "");
  p.I = detail::get<int>(doc, "I", "");
  p.c0 = detail::get<int>(doc, "c0", "");
  p.c_max = detail::get<int>(doc, "C_max", "");
  p.eta = detail::get<double>(doc, "eta", "");
  p.kappa_r = detail::get<double>(doc, "kappa_r", "");
  p.lambda = detail::get<double>(doc, "lambda", "");
  p.rho_b = read_table(doc, "rho_b");
  p.rho_d = read_table(doc, "rho_d");
  p.kappa_i = read_table(doc, "kappa_i");
  if (doc["require_monotone_ratios"])
    p.require_monotone_ratios =
        detail::as<bool>(doc["require_monotone_ratios"], "require_monotone_ratios");
  return p;
}

Params load_params(const std::string& path) { return parse_params(read_file(path)); }

std::vector<double> load_sweep_lambdas(const std::string& path) {
  const YAML::Node doc = detail::load_yaml(read_file(path));
  if (!doc.IsMap() || !doc["sweep_lambdas"]) return {};
  return detail::as_list<double>(doc["sweep_lambdas"], "sweep_lambdas");
}

}  // namespace ictmdp::epidemic
