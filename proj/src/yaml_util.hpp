#pragma once

// Small helpers for reading YAML documents with line-annotated errors.

#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "ictmdp/error.hpp"

namespace ictmdp::detail {

inline std::size_t line_of(const YAML::Node& node) {
  const YAML::Mark mark = node.Mark();
  return mark.line >= 0 ? static_cast<std::size_t>(mark.line) + 1 : 0;
}

inline YAML::Node load_yaml(const std::string& text) {
  try {
    return YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ParseError("", e.mark.line >= 0 ? static_cast<std::size_t>(e.mark.line) + 1 : 0, e.msg);
  }
}

inline YAML::Node require(const YAML::Node& parent, const std::string& key,
                          const std::string& field) {
  if (!parent.IsMap()) throw ParseError(field, line_of(parent), "expected a mapping");
  YAML::Node node = parent[key];
  if (!node) throw ParseError(field.empty() ? key : field + "." + key, line_of(parent), "missing");
  return node;
}

template <typename T>
T as(const YAML::Node& node, const std::string& field) {
  if (!node.IsScalar()) throw ParseError(field, line_of(node), "expected a scalar");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ParseError(field, line_of(node), "cannot convert '" + node.Scalar() + "'");
  }
}

template <typename T>
T get(const YAML::Node& parent, const std::string& key, const std::string& field) {
  return as<T>(require(parent, key, field), field.empty() ? key : field + "." + key);
}

template <typename T>
std::vector<T> as_list(const YAML::Node& node, const std::string& field) {
  if (!node.IsSequence()) throw ParseError(field, line_of(node), "expected a list");
  std::vector<T> out;
  for (std::size_t k = 0; k < node.size(); ++k)
    out.push_back(as<T>(node[k], field + "[" + std::to_string(k) + "]"));
  return out;
}

}  // namespace ictmdp::detail
