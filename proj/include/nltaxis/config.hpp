#pragma once

// Experiment configuration: sectioned INI text (';' starts a comment).
// Unknown sections and keys are errors; every resolved value, defaults
// included, is kept in `resolved` for the run manifest.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include "nltaxis/model.hpp"
#include "nltaxis/solver.hpp"

namespace nltaxis {

struct ExperimentConfig {
  SolverConfig solver;
  double alpha = 10.0, x_c = 10.0, v_const = 1.0;
  std::vector<double> radii;
  Formulation compare_first, compare_second;
  std::string output_dir = "out";
  bool csv = true;
  bool svg = false;
  bool operator_dump = true;
  nlohmann::ordered_json resolved;
};

inline const std::vector<double>& default_sample_times() {
  static const std::vector<double> t = {2.0, 2.5, 3.0, 3.5, 4.0, 5.0, 8.0};
  return t;
}

namespace detail {

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline double parse_number(const std::string& where, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (!t.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (t.empty() || ec != std::errc() || ptr != last)
    throw ConfigError(where + ": '" + t + "' is not a number");
  return v;
}

inline std::vector<double> parse_list(const std::string& where, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) {
      if (trim(text).empty()) break;
      throw ConfigError(where + ": empty list entry");
    }
    out.push_back(parse_number(where, item));
  }
  return out;
}

inline bool parse_bool(const std::string& where, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw ConfigError(where + ": '" + t + "' is not a boolean");
}

/// One INI section; remembers which keys were read.
class Section {
 public:
  Section(std::string name, const boost::property_tree::ptree* tree) : name_(std::move(name)) {
    if (!tree) return;
    for (const auto& [k, v] : *tree) {
      if (!v.empty()) throw ConfigError("[" + name_ + "] key '" + k + "' has nested data");
      if (values_.count(k)) throw ConfigError("[" + name_ + "] duplicate key '" + k + "'");
      values_[k] = trim(v.data());
      order_.push_back(k);
    }
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::string where(const std::string& key) const { return "[" + name_ + "] " + key; }

  std::string text(const std::string& key, const std::string& def) {
    used_.insert(key);
    const auto it = values_.find(key);
    return it == values_.end() ? def : it->second;
  }
  std::string required(const std::string& key) {
    if (!has(key)) throw ConfigError(where(key) + " is required");
    return text(key, "");
  }
  double number(const std::string& key, double def) {
    return has(key) ? parse_number(where(key), text(key, "")) : (used_.insert(key), def);
  }
  std::size_t count(const std::string& key, std::size_t def) {
    if (!has(key)) {
      used_.insert(key);
      return def;
    }
    const double v = number(key, 0.0);
    if (!(v >= 0.0) || v != std::floor(v) || v > 1e12)
      throw ConfigError(where(key) + " must be a nonnegative integer");
    return static_cast<std::size_t>(v);
  }
  bool flag(const std::string& key, bool def) {
    return has(key) ? parse_bool(where(key), text(key, "")) : (used_.insert(key), def);
  }
  std::vector<double> list(const std::string& key, const std::vector<double>& def) {
    return has(key) ? parse_list(where(key), text(key, "")) : (used_.insert(key), def);
  }
  /// Keys not read so far, in file order.
  std::vector<std::string> unread() const {
    std::vector<std::string> out;
    for (const auto& k : order_)
      if (!used_.count(k)) out.push_back(k);
    return out;
  }
  void reject_unread() const {
    const auto u = unread();
    if (!u.empty()) throw ConfigError("unknown key '" + u.front() + "' in [" + name_ + "]");
  }
  const std::string& value(const std::string& key) const { return values_.at(key); }

 private:
  std::string name_;
  std::map<std::string, std::string> values_;
  std::vector<std::string> order_;
  std::set<std::string> used_;
};

inline nlohmann::ordered_json json_number(double v) {
  if (std::isfinite(v)) return v;
  return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
}

inline Formulation parse_formulation_block(const std::string& where, const std::string& tag,
                                           double r, const std::string& averaging, double eps,
                                           std::size_t subdivisions) {
  Formulation f;
  f.tag = parse_formulation(tag);
  f.radius = r;
  if (averaging == "T")
    f.averaging = OperatorVariant::AvgT;
  else if (averaging == "S")
    f.averaging = OperatorVariant::AvgS;
  else
    throw ConfigError(where + ": averaging must be T or S");
  if (!(eps >= 0.0)) throw ConfigError(where + ": epsilon must be >= 0");
  f.regularizer = RegularizerG(eps);
  f.subdivisions = subdivisions;
  if (f.tag != FormulationTag::Local && !(r > 0.0)) throw ConfigError(where + ": r must be > 0");
  return f;
}

}  // namespace detail

/// Parses configuration text; throws ConfigError on any problem.
inline ExperimentConfig parse_config(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("malformed config: " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  static const std::vector<std::string> kSections = {"grid",    "model", "constants", "formulation",
                                                     "initial", "time",  "sweep",     "compare",
                                                     "output"};
  for (const auto& [name, sub] : tree) {
    if (sub.empty()) throw ConfigError("key '" + name + "' outside any section");
    if (std::find(kSections.begin(), kSections.end(), name) == kSections.end())
      throw ConfigError("unknown section [" + name + "]");
  }
  auto section = [&](const std::string& name) {
    const auto it = tree.find(name);
    return detail::Section(name, it == tree.not_found() ? nullptr : &it->second);
  };
  using detail::json_number;
  ExperimentConfig ec;
  auto& res = ec.resolved;

  auto grid = section("grid");
  const double L = grid.number("L", 20.0);
  const std::size_t N = grid.count("N", 1000);
  grid.reject_unread();
  if (!(L > 0.0) || !std::isfinite(L)) throw ConfigError("[grid] L must be > 0");
  ec.solver.grid = Grid1D(L, N);
  res["grid"] = {{"L", L}, {"N", N}};

  auto model = section("model");
  auto constants = section("constants");
  const std::string preset_name = model.required("preset");
  const PresetFamily family = parse_preset(preset_name);
  res["model"]["preset"] = preset_name;
  if (family == PresetFamily::Custom) {
    std::map<std::string, std::string> exprs;
    for (const char* k : {"D_c", "chi", "g", "f_c", "f_v", "dg_dc", "dg_dv"})
      if (model.has(k)) {
        exprs[k] = model.text(k, "");
        res["model"][k] = exprs[k];
      }
    const double dv = model.number("D_v", 0.0);
    if (!(dv >= 0.0)) throw ConfigError("[model] D_v must be >= 0");
    const std::string kname = model.text("kernel", "constant");
    const double kvalue = model.number("kernel_value", kDim + 1.0);
    KernelF kernel = kname == "constant"      ? KernelF::constant(kvalue)
                     : kname == "exponential" ? KernelF::exponential()
                                              : throw ConfigError("[model] kernel must be constant or exponential");
    model.reject_unread();
    ParameterMap consts;
    for (const auto& k : constants.unread()) {
      consts[k] = constants.number(k, 0.0);
      res["constants"][k] = consts[k];
    }
    ec.solver.coeffs = build_custom(exprs, consts, dv, kernel);
    res["model"]["D_v"] = dv;
    res["model"]["kernel"] = kname;
    if (kname == "constant") res["model"]["kernel_value"] = kvalue;
  } else {
    if (!constants.unread().empty()) throw ConfigError("[constants] is only valid for custom models");
    ParameterMap given;
    for (const auto& k : model.unread()) given[k] = model.number(k, 0.0);
    ec.solver.coeffs = build_preset(family, given);
    for (const auto& [k, v] : ec.solver.coeffs.params) res["model"][k] = v;
  }

  auto form = section("formulation");
  const std::string ftag = form.text("type", "nonlocal_a");
  const double r = form.number("r", 1.0);
  const std::string avg = form.text("averaging", "T");
  const double eps = form.number("epsilon", 0.0);
  const std::size_t subdiv = form.count("subdivisions", DiscreteNonlocalOperator::kDefaultSubdivisions);
  form.reject_unread();
  ec.solver.formulation = detail::parse_formulation_block("[formulation]", ftag, r, avg, eps, subdiv);
  res["formulation"] = {{"type", ftag}, {"r", r}, {"averaging", avg}, {"epsilon", eps}, {"subdivisions", subdiv}};

  auto init = section("initial");
  ec.alpha = init.number("alpha", 10.0);
  ec.x_c = init.number("x_c", 0.5 * L);
  ec.v_const = init.number("v_const", 1.0);
  init.reject_unread();
  const auto data = initial_conditions(ec.solver.grid, ec.alpha, ec.x_c, ec.v_const);
  ec.solver.c0.assign(data.c.values().begin(), data.c.values().end());
  ec.solver.v0.assign(data.v.values().begin(), data.v.values().end());
  res["initial"] = {{"alpha", ec.alpha}, {"x_c", ec.x_c}, {"v_const", ec.v_const}};

  auto time = section("time");
  auto& s = ec.solver;
  s.t_end = time.number("T", 5.0);
  s.rtol = time.number("rtol", 1e-6);
  s.atol = time.number("atol", 1e-6);
  s.max_step = time.number("max_step", std::numeric_limits<double>::infinity());
  s.max_steps = time.count("max_steps", 2000000);
  s.positivity_floor = time.number("positivity_floor", -1e-14);
  s.monitor_effective_diffusion = time.flag("ill_posed_monitor", true);
  std::vector<double> defaults;
  for (double t : default_sample_times())
    if (t <= s.t_end) defaults.push_back(t);
  s.sample_times = time.list("samples", defaults);
  time.reject_unread();
  if (!(s.t_end > 0.0) || !std::isfinite(s.t_end)) throw ConfigError("[time] T must be > 0");
  if (!(s.rtol > 0.0) || !(s.atol > 0.0)) throw ConfigError("[time] tolerances must be > 0");
  if (!(s.max_step > 0.0)) throw ConfigError("[time] max_step must be > 0");
  for (double t : s.sample_times)
    if (!(t >= 0.0 && t <= s.t_end)) throw ConfigError("[time] sample times must lie in [0, T]");
  std::sort(s.sample_times.begin(), s.sample_times.end());
  s.sample_times.erase(std::unique(s.sample_times.begin(), s.sample_times.end()), s.sample_times.end());
  res["time"] = {{"T", s.t_end},
                 {"rtol", s.rtol},
                 {"atol", s.atol},
                 {"max_step", json_number(s.max_step)},
                 {"max_steps", s.max_steps},
                 {"positivity_floor", json_number(s.positivity_floor)},
                 {"ill_posed_monitor", s.monitor_effective_diffusion},
                 {"samples", s.sample_times}};

  auto sweep = section("sweep");
  ec.radii = sweep.list("radii", {});
  sweep.reject_unread();
  res["sweep"] = {{"radii", ec.radii}};

  auto cmp = section("compare");
  const std::string first = cmp.text("first", "nonlocal_a");
  const std::string second = cmp.text("second", "nonlocal_r");
  const std::string first_avg = cmp.text("first_averaging", "T");
  const std::string second_avg = cmp.text("second_averaging", "T");
  ec.operator_dump = cmp.flag("operator_dump", true);
  cmp.reject_unread();
  ec.compare_first = detail::parse_formulation_block("[compare] first", first, r, first_avg, eps, subdiv);
  ec.compare_second = detail::parse_formulation_block("[compare] second", second, r, second_avg, eps, subdiv);
  res["compare"] = {{"first", first},
                    {"first_averaging", first_avg},
                    {"second", second},
                    {"second_averaging", second_avg},
                    {"operator_dump", ec.operator_dump}};

  auto out = section("output");
  ec.output_dir = out.text("dir", "out");
  const std::string fmt = out.text("format", "csv");
  out.reject_unread();
  ec.csv = true;  // CSV is always written; svg adds plots
  if (fmt == "csv")
    ec.svg = false;
  else if (fmt == "svg" || fmt == "csv,svg" || fmt == "svg,csv")
    ec.svg = true;
  else
    throw ConfigError("[output] format must be csv, svg or csv,svg");
  res["output"] = {{"dir", ec.output_dir}, {"format", ec.svg ? "csv,svg" : "csv"}};
  return ec;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

}  // namespace nltaxis
