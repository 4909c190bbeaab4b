#ifndef QWALK_CONFIG_HPP
#define QWALK_CONFIG_HPP

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qwalk/expr.hpp"
#include "qwalk/protocol.hpp"

namespace qwalk {

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct SweepRange {
  std::string symbol;  // angle name or "T"
  std::string start, stop;
  int count = 0;
};

struct SweepConfig {
  std::string protocol;
  std::map<std::string, std::string> angles;  // name -> expression in pi, T and the other angles
  std::vector<int> steps{1};
  std::optional<SweepRange> sweep;
  int grid = 64;
  std::optional<std::string> phi;
  int workers = 1;
  bool step_independent = false;
  std::string out;
};

/// "alpha:-pi:pi:513"
inline SweepRange parse_sweep(const std::string& text)
{
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  if (parts.size() != 4) throw UsageError("sweep must look like symbol:start:stop:count, got '" + text + "'");
  SweepRange r{parts[0], parts[1], parts[2], 0};
  try {
    std::size_t used = 0;
    r.count = std::stoi(parts[3], &used);
    if (used != parts[3].size()) throw std::invalid_argument("");
  } catch (const std::exception&) {
    throw UsageError("sweep count '" + parts[3] + "' is not an integer");
  }
  return r;
}

/// "beta=pi/3"
inline std::pair<std::string, std::string> parse_assignment(const std::string& text)
{
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw UsageError("--set expects angle=value, got '" + text + "'");
  return {text.substr(0, eq), text.substr(eq + 1)};
}

inline SweepConfig parse_config(const YAML::Node& root)
{
  SweepConfig c;
  try {
    if (!root.IsMap()) throw UsageError("config must be a mapping");
    for (const auto& kv : root) {
      const auto key = kv.first.as<std::string>();
      const auto& v = kv.second;
      if (key == "protocol")
        c.protocol = v.as<std::string>();
      else if (key == "steps") {
        c.steps.clear();
        if (v.IsSequence())
          for (const auto& t : v) c.steps.push_back(t.as<int>());
        else
          c.steps.push_back(v.as<int>());
      } else if (key == "angles") {
        for (const auto& a : v) c.angles[a.first.as<std::string>()] = a.second.as<std::string>();
      } else if (key == "sweep")
        c.sweep = parse_sweep(v.as<std::string>());
      else if (key == "grid")
        c.grid = v.as<int>();
      else if (key == "phi")
        c.phi = v.as<std::string>();
      else if (key == "workers")
        c.workers = v.as<int>();
      else if (key == "step_independent")
        c.step_independent = v.as<bool>();
      else if (key == "description")
        continue;
      else
        throw UsageError("unknown config key '" + key + "'");
    }
  } catch (const YAML::Exception& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  return c;
}

inline SweepConfig load_config(const std::string& path)
{
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config " + path);
  try {
    return parse_config(YAML::Load(in));
  } catch (const YAML::Exception& e) {
    throw UsageError(path + ": " + e.what());
  }
}

inline void validate_config(const SweepConfig& c)
{
  if (c.protocol.empty()) throw UsageError("no protocol given");
  try {
    registry_lookup(c.protocol);
  } catch (const LookupError& e) {
    throw UsageError(e.what());
  }
  if (c.steps.empty()) throw UsageError("no step number given");
  for (int t : c.steps)
    if (t < 1) throw UsageError("step number must be >= 1");
  if (c.grid < 8) throw UsageError("grid must be at least 8");
  if (c.workers < 1) throw UsageError("workers must be at least 1");
  for (const auto& [name, e] : c.angles) {
    (void)e;
    if (!is_angle_name(name)) throw UsageError("unknown angle '" + name + "'");
  }
  if (!c.sweep) throw UsageError("no sweep given");
  const auto& s = *c.sweep;
  if (s.symbol != "T" && !is_angle_name(s.symbol)) throw UsageError("cannot sweep '" + s.symbol + "'");
  if (c.angles.count(s.symbol)) throw UsageError("swept angle '" + s.symbol + "' is also fixed");
  if (s.count < 2) throw UsageError("sweep needs at least 2 samples");
  if (s.symbol == "T" && c.steps.size() > 1) throw UsageError("cannot sweep T and also list several steps");
  if (c.step_independent) {
    if (s.symbol == "T") throw UsageError("step-independent evaluation cannot sweep T");
    for (int t : c.steps)
      if (t != 1) throw UsageError("step-independent evaluation needs T = 1");
  }
}

/// Sample values of the sweep; T sweeps must land on integers.
inline std::vector<double> sweep_values(const SweepConfig& c)
{
  const auto& s = *c.sweep;
  double a = 0, b = 0;
  try {
    a = eval_expr(s.start);
    b = eval_expr(s.stop);
  } catch (const ExprError& e) {
    throw UsageError(e.what());
  }
  if (!(a != b)) throw UsageError("sweep range is empty");
  std::vector<double> v(static_cast<std::size_t>(s.count));
  for (int i = 0; i < s.count; ++i) v[i] = i == s.count - 1 ? b : a + (b - a) * i / (s.count - 1);
  if (s.symbol == "T")
    for (double& t : v) {
      if (std::abs(t - std::round(t)) > 1e-9 || std::round(t) < 1) throw UsageError("T sweep must hit positive integers");
      t = std::round(t);
    }
  return v;
}

/// Protocol at one sweep value and step number; angle expressions may reference T and each other.
inline ProtocolSpec resolve_protocol(const SweepConfig& c, double sweep_value, int T)
{
  std::map<std::string, double> vars;
  if (c.sweep && c.sweep->symbol == "T")
    T = static_cast<int>(sweep_value);
  else if (c.sweep)
    vars[c.sweep->symbol] = sweep_value;
  vars["T"] = T;
  std::map<std::string, std::string> todo = c.angles;
  while (!todo.empty()) {
    bool progress = false;
    std::string last;
    for (auto it = todo.begin(); it != todo.end();) {
      try {
        vars[it->first] = eval_expr(it->second, vars);
        it = todo.erase(it);
        progress = true;
      } catch (const ExprError& e) {
        last = e.what();
        ++it;
      }
    }
    if (!progress) throw UsageError(last);
  }
  ProtocolSpec base = registry_lookup(c.protocol);
  AngleMap angles;
  for (const auto& [name, v] : vars)
    if (is_angle_name(name)) angles[angle_from_name(name)] = v;
  const auto used = base.used_angles();
  for (const auto& [a, v] : angles) {
    (void)v;
    if (!used.count(a)) throw UsageError(std::string("angle ") + angle_name(a) + " is not used by " + c.protocol);
  }
  try {
    ProtocolSpec s = make_protocol(c.protocol, angles, T);
    if (c.phi) s.phi = eval_expr(*c.phi, vars);
    s.bare_coins = c.step_independent;
    s.validate();
    return s;
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

}  // namespace qwalk

#endif  // QWALK_CONFIG_HPP
