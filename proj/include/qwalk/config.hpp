#pragma once

// JSON experiment documents. Keys follow the labels used for the runs:
// boundary "p" / "b", initial "z" / "x" / "zx" / "e" (optionally "i"-prefixed
// or with "uniform": true), and theta or theta_minus / theta_plus / interface.

#include <json.hpp>

#include <cmath>
#include <complex>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qwalk/errors.hpp"
#include "qwalk/sweep.hpp"
#include "qwalk/walk.hpp"

namespace qwalk {

using Json = nlohmann::json;

namespace detail {

inline const std::set<std::string>& walk_keys() {
  static const std::set<std::string> keys{"nodes",         "boundary",      "theta",       "theta_minus",
                                          "theta_plus",    "interface",     "J",           "initial",
                                          "uniform",       "x0",            "steps",       "observables",
                                          "spin_set",      "concurrence_pairs", "sample_stride", "average_window",
                                          "bounce_phase",  "memory_cap"};
  return keys;
}

inline void reject_unknown(const Json& doc, const std::set<std::string>& allowed) {
  if (!doc.is_object()) throw ConfigError("config", "top level must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (!allowed.contains(key)) throw ConfigError(key, "unknown key");
  }
}

template <class T>
T get(const Json& doc, const std::string& key) {
  try {
    return doc.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError(key, e.what());
  }
}

inline int get_int(const Json& doc, const std::string& key) {
  const Json& v = doc.at(key);
  if (!v.is_number_integer()) throw ConfigError(key, "expected an integer");
  return v.get<int>();
}

inline double get_real(const Json& doc, const std::string& key) {
  const Json& v = doc.at(key);
  if (!v.is_number()) throw ConfigError(key, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(key, "must be finite");
  return x;
}

inline std::vector<double> get_real_list(const Json& doc, const std::string& key) {
  const Json& v = doc.at(key);
  if (!v.is_array() || v.empty()) throw ConfigError(key, "expected a non-empty array of numbers");
  std::vector<double> out;
  for (const auto& item : v) {
    if (!item.is_number()) throw ConfigError(key, "expected a non-empty array of numbers");
    out.push_back(item.get<double>());
  }
  return out;
}

inline ObservableSet parse_observables(const Json& v) {
  if (!v.is_array()) throw ConfigError("observables", "expected an array of names");
  ObservableSet set{false, false, false, false, false, false};
  for (const auto& item : v) {
    if (!item.is_string()) throw ConfigError("observables", "expected an array of names");
    const auto name = item.get<std::string>();
    if (name == "density") set.density = true;
    else if (name == "spin") set.spin = true;
    else if (name == "mean_spin") set.mean_spin = true;
    else if (name == "entropy") set.entropy = true;
    else if (name == "spin_set") set.spin_set = true;
    else if (name == "concurrence") set.concurrence = true;
    else throw ConfigError("observables", "unknown observable '" + name + "'");
  }
  return set;
}

}  // namespace detail

/// Reads a walk description. `extra_keys` are tolerated (and ignored) so
/// commands can layer their own settings on the same document.
inline WalkConfig parse_walk_config(const Json& doc, const std::set<std::string>& extra_keys = {}) {
  std::set<std::string> allowed = detail::walk_keys();
  allowed.insert(extra_keys.begin(), extra_keys.end());
  detail::reject_unknown(doc, allowed);

  WalkConfig c;
  if (doc.contains("nodes")) c.nodes = detail::get_int(doc, "nodes");
  if (c.nodes < 2) throw ConfigError("nodes", "a lattice needs at least 2 nodes");

  if (doc.contains("boundary")) {
    const auto b = detail::get<std::string>(doc, "boundary");
    if (b == "p") c.boundary = Boundary::Periodic;
    else if (b == "b") c.boundary = Boundary::Reflective;
    else throw ConfigError("boundary", "expected \"p\" or \"b\"");
  }

  const bool has_interface = doc.contains("theta_minus") || doc.contains("theta_plus") || doc.contains("interface");
  if (has_interface) {
    if (doc.contains("theta")) throw ConfigError("theta", "give either theta or theta_minus/theta_plus/interface");
    for (const char* key : {"theta_minus", "theta_plus", "interface"}) {
      if (!doc.contains(key)) throw ConfigError(key, "required for an interface coin");
    }
    c.coin.theta_minus = detail::get_real(doc, "theta_minus");
    c.coin.theta_plus = detail::get_real(doc, "theta_plus");
    c.coin.interface_node = detail::get_int(doc, "interface");
  } else {
    if (!doc.contains("theta")) throw ConfigError("theta", "missing");
    c.coin.theta = detail::get_real(doc, "theta");
  }

  c.coupling = doc.contains("J") ? detail::get_real(doc, "J") : 0.0;

  int x0 = c.nodes / 2;
  if (doc.contains("x0")) x0 = detail::get_int(doc, "x0");
  const auto label = doc.contains("initial") ? detail::get<std::string>(doc, "initial") : std::string("z");
  c.initial = InitialStateSpec::parse(label, x0);
  if (doc.contains("uniform")) {
    const bool uniform = detail::get<bool>(doc, "uniform");
    if (c.initial.uniform_position && !uniform) throw ConfigError("uniform", "contradicts the 'i' prefix of initial");
    c.initial.uniform_position = uniform;
  }

  if (doc.contains("steps")) c.steps = detail::get_int(doc, "steps");
  if (doc.contains("sample_stride")) c.sample_stride = detail::get_int(doc, "sample_stride");
  if (doc.contains("observables")) c.observables = detail::parse_observables(doc.at("observables"));
  if (doc.contains("spin_set")) {
    c.spin_set = detail::get<std::vector<int>>(doc, "spin_set");
    if (!doc.contains("observables")) c.observables.spin_set = true;
  }
  if (doc.contains("concurrence_pairs")) {
    for (const auto& pair : detail::get<std::vector<std::vector<int>>>(doc, "concurrence_pairs")) {
      if (pair.size() != 2) throw ConfigError("concurrence_pairs", "each entry must be a pair of edges");
      c.concurrence_pairs.emplace_back(pair[0], pair[1]);
    }
    if (!doc.contains("observables")) c.observables.concurrence = true;
  }
  if (doc.contains("average_window")) {
    const auto w = detail::get<std::vector<int>>(doc, "average_window");
    if (w.size() != 2) throw ConfigError("average_window", "expected [first, last]");
    c.average_window = TimeWindow{w[0], w[1]};
  }
  if (doc.contains("bounce_phase")) {
    const Json& v = doc.at("bounce_phase");
    if (v.is_number()) {
      c.bounce_phase = v.get<double>();
    } else {
      const auto parts = detail::get<std::vector<double>>(doc, "bounce_phase");
      if (parts.size() != 2) throw ConfigError("bounce_phase", "expected a number or [re, im]");
      c.bounce_phase = Amplitude(parts[0], parts[1]);
    }
    if (std::abs(std::abs(c.bounce_phase) - 1.0) > 1e-12) throw ConfigError("bounce_phase", "must have unit modulus");
  }
  if (doc.contains("memory_cap")) {
    const Json& v = doc.at("memory_cap");
    if (!v.is_number_unsigned()) throw ConfigError("memory_cap", "expected a byte count");
    c.memory_cap = v.get<std::size_t>();
  }
  if (c.observables.spin_set && c.spin_set.empty()) throw ConfigError("spin_set", "missing");
  if (c.observables.concurrence && c.concurrence_pairs.empty()) throw ConfigError("concurrence_pairs", "missing");

  c.validate();
  return c;
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("config", e.what());
  }
}

/// Sweep documents are walk documents plus theta_values / J_values (or a
/// square `grid` resolution); steps default to 4000.
inline SweepGrid parse_sweep_config(const Json& doc) {
  Json walk = doc;
  for (const char* key : {"theta_values", "J_values", "grid"}) walk.erase(key);
  if (!walk.contains("theta")) walk["theta"] = 0.0;
  if (!walk.contains("steps")) walk["steps"] = 4000;
  detail::reject_unknown(doc, [] {
    auto keys = detail::walk_keys();
    keys.insert({"theta_values", "J_values", "grid"});
    return keys;
  }());
  if (doc.contains("theta_minus") || doc.contains("interface")) {
    throw ConfigError("theta_minus", "sweeps scan a uniform coin");
  }
  SweepGrid grid;
  grid.base = parse_walk_config(walk);
  int resolution = 32;
  if (doc.contains("grid")) {
    resolution = detail::get_int(doc, "grid");
    if (resolution < 1) throw ConfigError("grid", "must be positive");
  }
  grid.theta_values = doc.contains("theta_values") ? detail::get_real_list(doc, "theta_values") : open_interval_grid(resolution);
  grid.coupling_values = doc.contains("J_values") ? detail::get_real_list(doc, "J_values") : open_interval_grid(resolution);
  return grid;
}

}  // namespace qwalk
