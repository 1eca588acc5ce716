#pragma once

// Run configuration: one JSON document, strict schema (unknown fields are
// errors), with `a.b.c=value` overrides applied before validation.
//
// Units: "kappa" means every rate is given in units of kappa (kappa = 1);
// "si" means rad/s. In both modes probe detunings and sweep bounds are in
// units of kappa and times in units of 1/kappa.

#include <cstddef>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ieit/model.hpp"
#include "ieit/timedomain.hpp"

namespace ieit {

class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Units { kappa, si };
enum class OutputFormat { csv, json };
enum class EvolveMode { rwa, full };

struct SweepSpec {
  double x_min = -10.0;  ///< units of kappa
  double x_max = 10.0;
  std::size_t points = 2001;
};

struct TimeSpec {
  double t_end = 0.0;  ///< 1/kappa; 0 picks a settling time
  double dt = 0.0;     ///< 1/kappa; 0 picks the step cap
  std::size_t record_every = 1;
  EvolveMode mode = EvolveMode::rwa;
  double t_switch = 20.0;
  double kappa_factor = 10.0;
  double t_after = 0.0;
  ModeAmplitudes initial{};
};

struct OutputSpec {
  OutputFormat format = OutputFormat::csv;
  std::string path;  ///< empty writes to stdout
};

struct RunConfig {
  Units units = Units::kappa;
  SystemParams params;
  bool delta0_given = false;
  std::size_t branch = 0;
  ProbeDrive drive{1.0, 1.0, 0.0};  ///< x stored in rad/s
  SweepSpec sweep;
  TimeSpec time;
  OutputSpec output;

  /// Rate unit: kappa in kappa mode, so internal values equal config values.
  double rate_scale() const { return params.kappa; }
};

namespace detail {

using nlohmann::json;

class SchemaChecker {
 public:
  explicit SchemaChecker(const std::string& text) : text_(text) {}

  [[noreturn]] void fail(const std::vector<std::string>& path, const std::string& what) const {
    std::string pointer;
    for (const auto& key : path) pointer += "/" + key;
    if (pointer.empty()) pointer = "/";
    const auto line = locate(path);
    std::ostringstream os;
    if (line) os << "line " << *line << ": ";
    os << pointer << ": " << what;
    throw config_error(os.str());
  }

  const json& object(const json& j, const std::vector<std::string>& path,
                     std::initializer_list<const char*> allowed) const {
    if (!j.is_object()) fail(path, "expected an object");
    for (const auto& [key, value] : j.items()) {
      bool ok = false;
      for (const char* a : allowed) ok = ok || key == a;
      if (!ok) {
        auto sub = path;
        sub.push_back(key);
        fail(sub, "unknown field");
      }
    }
    return j;
  }

  double number(const json& parent, const std::vector<std::string>& path, const char* key) const {
    const auto sub = child(path, key);
    const auto& v = parent.at(key);
    if (!v.is_number()) fail(sub, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(sub, "expected a finite number");
    return d;
  }

  std::optional<double> optional_number(const json& parent, const std::vector<std::string>& path,
                                        const char* key) const {
    if (!parent.contains(key)) return std::nullopt;
    return number(parent, path, key);
  }

  std::size_t count(const json& parent, const std::vector<std::string>& path, const char* key) const {
    const auto& v = parent.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) fail(child(path, key), "expected a non-negative integer");
    return v.get<std::size_t>();
  }

  complex amplitude(const json& parent, const std::vector<std::string>& path, const char* key) const {
    const auto& v = parent.at(key);
    if (v.is_number()) return {v.get<double>(), 0.0};
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
      fail(child(path, key), "expected [re, im]");
    return {v[0].get<double>(), v[1].get<double>()};
  }

  std::string string(const json& parent, const std::vector<std::string>& path, const char* key,
                     std::initializer_list<const char*> choices = {}) const {
    const auto& v = parent.at(key);
    if (!v.is_string()) fail(child(path, key), "expected a string");
    auto s = v.get<std::string>();
    if (choices.size() == 0) return s;
    for (const char* c : choices)
      if (s == c) return s;
    std::string list;
    for (const char* c : choices) list += (list.empty() ? "" : "|") + std::string(c);
    fail(child(path, key), "expected one of " + list);
  }

  static std::vector<std::string> child(std::vector<std::string> path, const std::string& key) {
    path.push_back(key);
    return path;
  }

 private:
  // Line of the innermost key, found by searching each key in turn after the
  // previous one. Keys that only exist through overrides have no line.
  std::optional<std::size_t> locate(const std::vector<std::string>& path) const {
    std::size_t pos = 0;
    for (const auto& key : path) {
      const auto found = text_.find("\"" + key + "\"", pos);
      if (found == std::string::npos) return std::nullopt;
      pos = found + key.size() + 2;
    }
    if (path.empty()) return std::nullopt;
    std::size_t line = 1;
    for (std::size_t i = 0; i < pos && i < text_.size(); ++i) line += text_[i] == '\n';
    return line;
  }

  const std::string& text_;
};

inline void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw config_error("--set " + assignment + ": expected key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;
  }
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw config_error("--set " + assignment + ": empty path component");
    if (!node->is_object()) throw config_error("--set " + assignment + ": " + part + " is not inside an object");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

}  // namespace detail

inline RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides = {}) {
  using detail::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw config_error(e.what());
  }
  for (const auto& o : overrides) detail::apply_override(doc, o);

  const detail::SchemaChecker check(text);
  using Path = std::vector<std::string>;
  check.object(doc, {}, {"units", "params", "drive", "sweep", "time", "output"});
  if (!doc.contains("units")) check.fail({"units"}, "missing required field");
  if (!doc.contains("params")) check.fail({"params"}, "missing required field");

  RunConfig cfg;
  cfg.units = check.string(doc, {}, "units", {"kappa", "si"}) == "si" ? Units::si : Units::kappa;
  const bool si = cfg.units == Units::si;

  const Path pp{"params"};
  const auto& pj = check.object(doc["params"], pp,
                                {"omega_m", "gamma_m", "kappa", "kappa0", "g", "delta0", "omega_c", "pump", "branch"});
  for (const char* req : {"omega_m", "gamma_m", "pump"})
    if (!pj.contains(req)) check.fail(Path{"params", req}, "missing required field");
  auto& p = cfg.params;
  if (si) {
    if (!pj.contains("kappa")) check.fail(Path{"params", "kappa"}, "missing required field in si units");
    p.kappa = check.number(pj, pp, "kappa");
    if (!(p.kappa > 0.0)) check.fail(Path{"params", "kappa"}, "must be positive");
  } else {
    p.kappa = 1.0;
    if (auto k = check.optional_number(pj, pp, "kappa"); k && *k != 1.0)
      check.fail(Path{"params", "kappa"}, "must be 1 in kappa units");
  }
  p.omega_m = check.number(pj, pp, "omega_m");
  p.gamma_m = check.number(pj, pp, "gamma_m");
  p.kappa0 = check.optional_number(pj, pp, "kappa0").value_or(0.0);
  if (auto g = check.optional_number(pj, pp, "g")) {
    p.g = *g;
  } else if (si) {
    check.fail(Path{"params", "g"}, "missing required field in si units");
  } else {
    p.g = 1.0;
  }
  if (auto d0 = check.optional_number(pj, pp, "delta0")) {
    p.delta0 = *d0;
    cfg.delta0_given = true;
  }
  p.omega_c = check.optional_number(pj, pp, "omega_c").value_or(0.0);
  if (pj.contains("branch")) cfg.branch = check.count(pj, pp, "branch");

  const Path pump_path{"params", "pump"};
  const auto& pump = check.object(pj["pump"], pump_path, {"G", "power", "eps_c"});
  if (pump.size() != 1) check.fail(pump_path, "exactly one of G, power, eps_c is required");
  if (pump.contains("G")) {
    p.pump = PumpCoupling{check.number(pump, pump_path, "G")};
  } else if (pump.contains("power")) {
    if (!si) check.fail(Path{"params", "pump", "power"}, "a power pump requires si units");
    if (!(p.omega_c > 0.0)) check.fail(Path{"params", "omega_c"}, "a power pump requires omega_c > 0");
    p.pump = PumpPower{check.number(pump, pump_path, "power")};
  } else {
    p.pump = PumpAmplitude{check.amplitude(pump, pump_path, "eps_c")};
  }
  try {
    validate(p);
    effective_kappa(p);
  } catch (const std::invalid_argument& e) {
    check.fail(pp, e.what());
  }

  if (doc.contains("drive")) {
    const Path dp{"drive"};
    const auto& dj = check.object(doc["drive"], dp, {"eps_L", "eps_R", "x"});
    if (dj.contains("eps_L")) cfg.drive.eps_L = check.amplitude(dj, dp, "eps_L");
    if (dj.contains("eps_R")) cfg.drive.eps_R = check.amplitude(dj, dp, "eps_R");
    cfg.drive.x = check.optional_number(dj, dp, "x").value_or(0.0) * p.kappa;
  }

  if (doc.contains("sweep")) {
    const Path sp{"sweep"};
    const auto& sj = check.object(doc["sweep"], sp, {"x_min", "x_max", "points"});
    cfg.sweep.x_min = check.optional_number(sj, sp, "x_min").value_or(cfg.sweep.x_min);
    cfg.sweep.x_max = check.optional_number(sj, sp, "x_max").value_or(cfg.sweep.x_max);
    if (sj.contains("points")) cfg.sweep.points = check.count(sj, sp, "points");
  }
  if (cfg.sweep.points < 2) check.fail({"sweep", "points"}, "must be at least 2");
  if (!(cfg.sweep.x_min < cfg.sweep.x_max)) check.fail({"sweep", "x_max"}, "x_min must be below x_max");

  if (doc.contains("time")) {
    const Path tp{"time"};
    const auto& tj = check.object(doc["time"], tp,
                                  {"t_end", "dt", "record_every", "mode", "t_switch", "kappa_factor", "t_after",
                                   "initial"});
    auto& t = cfg.time;
    t.t_end = check.optional_number(tj, tp, "t_end").value_or(0.0);
    t.dt = check.optional_number(tj, tp, "dt").value_or(0.0);
    if (tj.contains("record_every")) t.record_every = check.count(tj, tp, "record_every");
    if (tj.contains("mode")) t.mode = check.string(tj, tp, "mode", {"rwa", "full"}) == "full" ? EvolveMode::full : EvolveMode::rwa;
    t.t_switch = check.optional_number(tj, tp, "t_switch").value_or(t.t_switch);
    t.kappa_factor = check.optional_number(tj, tp, "kappa_factor").value_or(t.kappa_factor);
    t.t_after = check.optional_number(tj, tp, "t_after").value_or(0.0);
    if (t.t_end < 0.0) check.fail({"time", "t_end"}, "must be non-negative");
    if (t.dt < 0.0) check.fail({"time", "dt"}, "must be non-negative");
    if (t.t_after < 0.0) check.fail({"time", "t_after"}, "must be non-negative");
    if (t.record_every == 0) check.fail({"time", "record_every"}, "must be at least 1");
    if (!(t.kappa_factor >= 1.0)) check.fail({"time", "kappa_factor"}, "must be at least 1");
    if (tj.contains("initial")) {
      const Path ip{"time", "initial"};
      const auto& ij = check.object(tj["initial"], ip, {"db", "dc"});
      if (ij.contains("db")) t.initial.db = check.amplitude(ij, ip, "db");
      if (ij.contains("dc")) t.initial.dc = check.amplitude(ij, ip, "dc");
    }
  }

  if (doc.contains("output")) {
    const Path op{"output"};
    const auto& oj = check.object(doc["output"], op, {"format", "path"});
    if (oj.contains("format"))
      cfg.output.format = check.string(oj, op, "format", {"csv", "json"}) == "json" ? OutputFormat::json : OutputFormat::csv;
    if (oj.contains("path")) cfg.output.path = check.string(oj, op, "path");
  }
  return cfg;
}

}  // namespace ieit
