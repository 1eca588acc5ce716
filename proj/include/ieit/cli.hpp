#pragma once

// Command-line front end: sweep | ieit | steady | evolve | qswitch.
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>

#include "ieit/config.hpp"
#include "ieit/response.hpp"
#include "ieit/steady_state.hpp"
#include "ieit/table.hpp"
#include "ieit/timedomain.hpp"

namespace ieit::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_config = 2;
inline constexpr int exit_numerical = 3;

/// Ordered key/value summary printed as `key: value` lines or a JSON object.
class Report {
 public:
  using Value = std::variant<double, bool, std::string>;

  void add(std::string key, Value v) { items_.emplace_back(std::move(key), std::move(v)); }

  void write(std::ostream& os, OutputFormat fmt) const {
    if (fmt == OutputFormat::json) {
      os << "{\n";
      for (std::size_t i = 0; i < items_.size(); ++i) {
        os << "  " << nlohmann::json(items_[i].first).dump() << ": " << render(items_[i].second, true)
           << (i + 1 < items_.size() ? ",\n" : "\n");
      }
      os << "}\n";
      return;
    }
    for (const auto& [k, v] : items_) os << k << ": " << render(v, false) << '\n';
  }

 private:
  static std::string render(const Value& v, bool json) {
    if (const auto* d = std::get_if<double>(&v)) return format_number(*d);
    if (const auto* b = std::get_if<bool>(&v)) return *b ? "true" : "false";
    const auto& s = std::get<std::string>(v);
    return json ? nlohmann::json(s).dump() : s;
  }

  std::vector<std::pair<std::string, Value>> items_;
};

namespace detail {

inline void emit_table(const Table& t, const RunConfig& cfg, std::ostream& out) {
  if (cfg.output.path.empty()) {
    cfg.output.format == OutputFormat::json ? write_json(out, t) : write_csv(out, t);
    return;
  }
  std::ofstream file(cfg.output.path, std::ios::binary | std::ios::trunc);
  if (!file) throw config_error("cannot open output path " + cfg.output.path);
  cfg.output.format == OutputFormat::json ? write_json(file, t) : write_csv(file, t);
  file.flush();
  if (!file) throw config_error("failed writing output path " + cfg.output.path);
}

inline void warn_regime(const RunConfig& cfg, std::ostream& err) {
  if (!resolved_sideband(cfg.params))
    err << "warning: omega_m/kappa = " << cfg.params.omega_m / cfg.params.kappa
        << " is below the resolved-sideband threshold 10; RWA results may be inaccurate\n";
}

}  // namespace detail

/// Operating point used by the frequency- and time-domain commands: the
/// red-sideband point unless delta0 is configured for an amplitude or power
/// pump, in which case the cubic is solved and `branch` picks a root.
inline SteadyState operating_point(const RunConfig& cfg, std::ostream& err) {
  const auto& p = cfg.params;
  if (!cfg.delta0_given || std::holds_alternative<PumpCoupling>(p.pump)) return fix_operating_point(p);
  const auto roots = solve_steady_states(p);
  if (cfg.branch >= roots.size())
    throw config_error("/params/branch: index " + std::to_string(cfg.branch) + " but only " +
                       std::to_string(roots.size()) + " steady state(s)");
  const auto& op = roots[cfg.branch];
  if (!op.stable) err << "warning: selected steady state is on an unstable branch\n";
  return op;
}

inline Table sweep_table(const RunConfig& cfg, std::ostream& err) {
  const auto& p = cfg.params;
  const auto op = operating_point(cfg, err);
  if (std::abs(op.Delta - p.omega_m) > 1e-6 * p.omega_m)
    err << "warning: operating point is off the red sideband; the probe response assumes Delta = omega_m\n";
  const auto grid = linear_grid(cfg.sweep.x_min, cfg.sweep.x_max, cfg.sweep.points);
  std::vector<double> xs(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) xs[i] = grid[i] * p.kappa;
  const auto rows = sweep(p, op, cfg.drive, xs);

  Table t;
  t.columns = {"x_over_kappa", "out_norm_L", "out_norm_R", "cavity_norm", "mech_norm", "phi_plus_norm",
               "phi_minus_norm"};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    t.add_row({grid[i], r.out_norm_L, r.out_norm_R, r.cavity_norm, r.mech_norm, r.phi_plus_norm, r.phi_minus_norm});
  }
  return t;
}

inline Report ieit_report(const RunConfig& cfg, std::ostream& err) {
  const auto& p = cfg.params;
  const auto op = operating_point(cfg, err);
  const auto pt = ieit_conditions(p, op, cfg.drive);
  Report rep;
  rep.add("kappa_eff", pt.kappa_eff / cfg.rate_scale());
  rep.add("gamma_m_required", pt.gamma_m_required / cfg.rate_scale());
  rep.add("gamma_m", p.gamma_m / cfg.rate_scale());
  rep.add("G", op.G / cfg.rate_scale());
  rep.add("exists", pt.exists);
  rep.add("probes_matched", pt.probes_matched.value_or(false));
  if (cfg.units == Units::si && p.omega_c > 0.0 && p.g != 0.0) rep.add("power_W", power_from_G(p, op.G));
  if (!pt.exists) {
    rep.add("reason", std::string("no IEIT: G<2kappa_eff"));
    return rep;
  }
  rep.add("x_minus_over_kappa", pt.x_minus / p.kappa);
  rep.add("x_plus_over_kappa", pt.x_plus / p.kappa);
  // residuals are evaluated at the required damping with the configured probes
  SystemParams at = p;
  at.gamma_m = pt.gamma_m_required;
  if (cfg.drive.input_power() > 0.0) {
    const double ref = std::abs(cfg.drive.eps_L) > 0.0 ? std::abs(cfg.drive.eps_L) : std::abs(cfg.drive.eps_R);
    for (const auto& [name, x] : {std::pair{"minus", pt.x_minus}, std::pair{"plus", pt.x_plus}}) {
      ProbeDrive d = cfg.drive;
      d.x = x;
      const auto r = probe_response(at, op, d);
      rep.add(std::string("residual_") + name,
              std::max(std::abs(r.out_L_plus), std::abs(r.out_R_plus)) / ref);
    }
  }
  return rep;
}

inline Table steady_table(const RunConfig& cfg) {
  const auto& p = cfg.params;
  std::vector<SteadyState> states;
  complex eps_c;
  if (!cfg.delta0_given || std::holds_alternative<PumpCoupling>(p.pump)) {
    states = {fix_operating_point(p)};
    eps_c = states[0].c_s * complex(p.cavity_decay(), p.omega_m);
  } else {
    states = solve_steady_states(p);
    eps_c = pump_amplitude(p);
  }
  Table t;
  t.columns = {"index", "photon_number", "Delta", "G", "delta0", "stable", "drift_stable", "residual"};
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto& s = states[i];
    const double scale = cfg.rate_scale();
    t.add_row({static_cast<double>(i), s.photon_number(), s.Delta / scale, s.G / scale, s.delta0 / scale,
               s.stable ? 1.0 : 0.0, s.drift_stable ? 1.0 : 0.0, fixed_point_residual(p, eps_c, s)});
  }
  return t;
}

inline Table trajectory_table(const Trajectory& tr, double kappa) {
  Table t;
  t.columns = {"t_kappa", "re_db", "im_db", "re_dc", "im_dc", "out_L_sq", "out_R_sq"};
  for (std::size_t i = 0; i < tr.size(); ++i)
    t.add_row({tr.t[i] * kappa, tr.db[i].real(), tr.db[i].imag(), tr.dc[i].real(), tr.dc[i].imag(),
               std::norm(tr.out_L[i]), std::norm(tr.out_R[i])});
  return t;
}

inline Trajectory evolve(const RunConfig& cfg, std::ostream& err) {
  const auto& p = cfg.params;
  const auto op = operating_point(cfg, err);
  IntegrationOptions opt;
  opt.t_end = cfg.time.t_end > 0.0 ? cfg.time.t_end / p.kappa : suggested_duration(p, op);
  opt.dt = cfg.time.dt / p.kappa;
  opt.record_every = cfg.time.record_every;
  opt.initial = cfg.time.initial;
  return cfg.time.mode == EvolveMode::full ? integrate_full(p, op, cfg.drive, opt)
                                           : integrate_rwa(p, op, cfg.drive, opt);
}

inline QSwitchResult qswitch(const RunConfig& cfg, std::ostream& err) {
  const auto& p = cfg.params;
  const auto op = operating_point(cfg, err);
  QSwitchOptions opt;
  opt.dt = cfg.time.dt / p.kappa;
  opt.t_after = cfg.time.t_after / p.kappa;
  opt.record_every = cfg.time.record_every;
  return q_switch(p, op, cfg.drive, cfg.time.t_switch / p.kappa, cfg.time.kappa_factor, opt);
}

inline Report qswitch_report(const QSwitchResult& r, double kappa) {
  Report rep;
  rep.add("t_switch_kappa", r.t_switch * kappa);
  rep.add("kappa_factor", r.kappa_after / kappa);
  rep.add("stored_before", r.stored_before);
  rep.add("emitted_quanta", r.emitted_quanta);
  rep.add("mech_dissipated", r.mech_dissipated);
  rep.add("internal_dissipated", r.internal_dissipated);
  rep.add("remaining", r.remaining);
  rep.add("budget_residual", r.budget_residual());
  return rep;
}

namespace detail {

inline std::string one_line(std::string s) {
  for (auto& c : s)
    if (c == '\n' || c == '\r') c = ' ';
  return s;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("cannot read config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace detail

/// Entry point; args excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-port optomechanical cavity: perfect probe absorption and polariton response"};
  app.require_subcommand(1);
  std::string config_path, format, out_path, mode;
  std::vector<std::string> sets;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON run configuration")->required();
    sub->add_option("--format", format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--out", out_path, "output path (default stdout)");
    sub->add_option("--set", sets, "override a config field, e.g. sweep.points=4001");
  };
  auto* sweep_cmd = app.add_subcommand("sweep", "normalized probe response versus detuning");
  auto* ieit_cmd = app.add_subcommand("ieit", "perfect-absorption conditions and verification");
  auto* steady_cmd = app.add_subcommand("steady", "classical steady states of the pumped cavity");
  auto* evolve_cmd = app.add_subcommand("evolve", "time-domain integration");
  auto* qswitch_cmd = app.add_subcommand("qswitch", "release stored energy by a sudden kappa increase");
  for (auto* sub : {sweep_cmd, ieit_cmd, steady_cmd, evolve_cmd, qswitch_cmd}) add_common(sub);
  evolve_cmd->add_option("--mode", mode, "rwa|full")->check(CLI::IsMember({"rwa", "full"}));

  std::vector<const char*> argv{"ieit"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    err << "error: usage: " << detail::one_line(e.what()) << '\n';
    return exit_config;
  }

  try {
    auto overrides = sets;
    if (!format.empty()) overrides.push_back("output.format=\"" + format + "\"");
    if (!out_path.empty()) overrides.push_back("output.path=" + nlohmann::json(out_path).dump());
    if (!mode.empty()) overrides.push_back("time.mode=\"" + mode + "\"");
    const auto cfg = parse_config(detail::read_file(config_path), overrides);
    detail::warn_regime(cfg, err);

    if (sweep_cmd->parsed()) {
      detail::emit_table(sweep_table(cfg, err), cfg, out);
    } else if (ieit_cmd->parsed()) {
      ieit_report(cfg, err).write(out, cfg.output.format);
    } else if (steady_cmd->parsed()) {
      detail::emit_table(steady_table(cfg), cfg, out);
    } else if (evolve_cmd->parsed()) {
      detail::emit_table(trajectory_table(evolve(cfg, err), cfg.params.kappa), cfg, out);
    } else {
      const auto res = qswitch(cfg, err);
      if (!cfg.output.path.empty()) detail::emit_table(trajectory_table(res.trajectory, cfg.params.kappa), cfg, out);
      qswitch_report(res, cfg.params.kappa).write(out, cfg.output.format);
    }
  } catch (const config_error& e) {
    err << "error: config: " << detail::one_line(e.what()) << '\n';
    return exit_config;
  } catch (const std::invalid_argument& e) {
    err << "error: config: " << detail::one_line(e.what()) << '\n';
    return exit_config;
  } catch (const std::exception& e) {
    err << "error: numerical: " << detail::one_line(e.what()) << '\n';
    return exit_numerical;
  }
  return exit_ok;
}

}  // namespace ieit::cli
