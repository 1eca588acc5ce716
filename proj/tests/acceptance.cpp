// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "ieit/ieit.hpp"

using namespace ieit;

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

SystemParams sideband(double G, double gamma_m, double omega_m = 1000.0, double kappa0 = 0.0) {
  SystemParams p;
  p.kappa = 1.0;
  p.kappa0 = kappa0;
  p.omega_m = omega_m;
  p.gamma_m = gamma_m;
  p.g = 1.0;
  p.pump = PumpCoupling{G};
  return p;
}

struct Check {
  bool ok = true;
  std::string note;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) note = what;
    ok = ok && cond;
  }
};

struct IEITCase {
  double G;
  std::vector<double> xs;
};

const std::vector<IEITCase>& ieit_cases() {
  static const std::vector<IEITCase> cases{
      {2.0, {0.0}}, {4.0, {-std::sqrt(12.0), std::sqrt(12.0)}}, {6.0, {-4.0 * std::sqrt(2.0), 4.0 * std::sqrt(2.0)}}};
  return cases;
}

Check zeros_in_sweeps() {
  Check c;
  for (const auto& tc : ieit_cases()) {
    const auto p = sideband(tc.G, 4.0);
    const auto op = fix_operating_point(p);
    const auto t0 = clock_type::now();
    const auto grid = linear_grid(-10.0, 10.0, 2001);
    const auto rows = sweep(p, op, {1.0, 1.0, 0.0}, grid);
    const double elapsed = seconds_since(t0);
    c.require(elapsed < 1.0, "sweep slower than 1 s");
    for (double x : tc.xs) {
      // grid point when x is on the grid, otherwise the exact IEIT detuning
      const auto r = probe_response(p, op, {1.0, 1.0, x});
      c.require(r.out_norm_L < 1e-12 && r.out_norm_R < 1e-12, "output above 1e-12 at G=" + std::to_string(tc.G));
    }
    if (tc.G == 2.0) c.require(rows[1000].out_norm_L < 1e-12 && rows[1000].out_norm_R < 1e-12, "sweep row x=0");
    const auto zeros = find_absorption_zeros(p, op, {1.0, 1.0, 0.0}, -10.0, 10.0);
    c.require(zeros.size() == tc.xs.size(), "zero count at G=" + std::to_string(tc.G));
    for (std::size_t i = 0; i < std::min(zeros.size(), tc.xs.size()); ++i)
      c.require(std::abs(zeros[i] - tc.xs[i]) < 1e-6, "zero location");
  }
  return c;
}

Check energy_partition() {
  Check c;
  for (const auto& tc : ieit_cases()) {
    const auto p = sideband(tc.G, 4.0);
    const auto op = fix_operating_point(p);
    for (double x : tc.xs) {
      const auto r = probe_response(p, op, {1.0, 1.0, x});
      c.require(std::abs(r.cavity_norm - 0.5) < 1e-12 && std::abs(r.mech_norm - 0.5) < 1e-12, "partition");
    }
  }
  return c;
}

Check normal_modes() {
  Check c;
  const auto p = sideband(6.0, 4.0);
  const auto op = fix_operating_point(p);
  const double x = 4.0 * std::sqrt(2.0);
  const double root = std::sqrt(1.0 - 4.0 / 36.0);
  const double hi = 0.5 * (1.0 + root), lo = 0.5 * (1.0 - root);
  const auto up = probe_response(p, op, {1.0, 1.0, x});
  const auto down = probe_response(p, op, {1.0, 1.0, -x});
  c.require(std::abs(up.phi_plus_norm - 0.971) <= 1e-3 && std::abs(up.phi_minus_norm - 0.029) <= 1e-3, "x=+ values");
  c.require(std::abs(down.phi_minus_norm - 0.971) <= 1e-3 && std::abs(down.phi_plus_norm - 0.029) <= 1e-3,
            "x=- mirror");
  c.require(std::abs(up.phi_plus_norm - hi) < 1e-12 && std::abs(up.phi_minus_norm - lo) < 1e-12, "closed form +");
  c.require(std::abs(down.phi_minus_norm - hi) < 1e-12 && std::abs(down.phi_plus_norm - lo) < 1e-12, "closed form -");
  return c;
}

Check poles() {
  Check c;
  for (double G : {2.0, 4.0, 6.0}) {
    const auto p = sideband(G, 4.0);
    const auto z = response_poles(p, fix_operating_point(p));
    c.require(std::abs(z[0] - complex(-G, -2.0)) < 1e-9 && std::abs(z[1] - complex(G, -2.0)) < 1e-9,
              "poles at G=" + std::to_string(G));
  }
  return c;
}

Check internal_loss() {
  Check c;
  for (double G : {2.0, 4.0, 6.0}) {
    const auto p = sideband(G, 2.0, 1000.0, 1.0);
    const auto op = fix_operating_point(p);
    const auto pt = ieit_conditions(p, op);
    c.require(pt.gamma_m_required == 2.0, "required damping");
    const auto zeros = find_absorption_zeros(p, op, {1.0, 1.0, 0.0}, -10.0, 10.0);
    const double split = std::sqrt(G * G - 1.0);
    c.require(zeros.size() == 2, "zero count at G=" + std::to_string(G));
    if (zeros.size() == 2)
      c.require(std::abs(zeros[0] + split) < 1e-9 && std::abs(zeros[1] - split) < 1e-9, "zero location");
  }
  return c;
}

Check time_domain() {
  Check c;
  double worst_run = 0.0;
  for (double G : {0.0, 2.0, 4.0, 6.0, 8.0}) {
    for (double x : {-10.0, -5.0, 0.0, 5.0, 10.0}) {
      for (double gamma : {1.0, 4.5, 8.0}) {
        const auto p = sideband(G, gamma);
        const auto op = fix_operating_point(p);
        const ProbeDrive d{1.0, 1.0, x};
        const auto t0 = clock_type::now();
        IntegrationOptions opt;
        opt.t_end = suggested_duration(p, op);
        const auto fit = fit_response(integrate_rwa(p, op, d, opt), x);
        worst_run = std::max(worst_run, seconds_since(t0));
        const auto r = probe_response(p, op, d);
        c.require(std::abs(fit.dc.plus - r.dc_plus) <= 1e-6 * std::abs(r.dc_plus), "RWA fit dc");
        if (G > 0.0) c.require(std::abs(fit.db.plus - r.db_plus) <= 1e-6 * std::abs(r.db_plus), "RWA fit db");
      }
    }
  }
  const auto p = sideband(4.0, 4.0);
  const auto op = fix_operating_point(p);
  const ProbeDrive d{1.0, 1.0, std::sqrt(12.0)};
  const auto t0 = clock_type::now();
  IntegrationOptions opt;
  opt.t_end = suggested_duration(p, op, 1e-7);
  opt.record_every = 50;
  const auto full = fit_response(integrate_full(p, op, d, opt), d.x);
  worst_run = std::max(worst_run, seconds_since(t0));
  const auto r = probe_response(p, op, d);
  c.require(std::abs(full.dc.plus - r.dc_plus) <= 1e-2 * std::abs(r.dc_plus), "full vs RWA");
  c.require(worst_run < 5.0, "run slower than 5 s");
  c.note += (c.note.empty() ? "" : "; ") + std::string("slowest run ") + std::to_string(worst_run) + " s";
  return c;
}

Check quanta_budget() {
  Check c;
  // drive-off decay: compare the discrete derivative of the stored quanta
  // with the dissipation rate at the midpoint
  const auto p = sideband(4.0, 3.0);
  const auto op = fix_operating_point(p);
  IntegrationOptions opt;
  opt.t_end = 3.0;
  opt.dt = 2.5e-4;
  opt.initial = {complex(0.3, -0.2), complex(1.0, 0.5)};
  const auto tr = integrate_rwa(p, op, {0.0, 0.0, 0.0}, opt);
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < tr.size(); ++i) {
    const double q_next = std::norm(tr.db[i + 1]) + std::norm(tr.dc[i + 1]);
    const double q_prev = std::norm(tr.db[i - 1]) + std::norm(tr.dc[i - 1]);
    const double lhs = (q_next - q_prev) / (tr.t[i + 1] - tr.t[i - 1]);
    const double rhs = -p.gamma_m * std::norm(tr.db[i]) - 4.0 * p.kappa * std::norm(tr.dc[i]);
    worst = std::max(worst, std::abs(lhs - rhs) / std::abs(rhs));
  }
  c.require(worst < 1e-6, "dissipation identity");
  for (double factor : {1.0, 10.0}) {
    const auto q = q_switch(p, op, {1.0, 1.0, std::sqrt(12.0)}, 20.0, factor);
    c.require(std::abs(q.budget_residual()) < 1e-4, "Q-switch budget");
  }
  return c;
}

Check phase_restoration() {
  Check c;
  const auto p = sideband(6.0, 4.0);
  const auto op = fix_operating_point(p);
  for (double x : {-4.0 * std::sqrt(2.0), 4.0 * std::sqrt(2.0)}) {
    for (int k = 0; k < 37; ++k) {
      const double theta = 2.0 * std::numbers::pi * k / 36.0;
      const double A = absorption_fraction(p, op, {1.0, std::polar(1.0, theta), x});
      c.require(std::abs(A - std::pow(std::cos(theta / 2.0), 2)) < 1e-10, "A(theta)");
    }
  }
  return c;
}

// sign changes of u (kt^2 + (delta0 - beta u)^2) - E on a uniform grid
std::size_t scan_roots(const SystemParams& p, double E, std::vector<std::pair<double, double>>& brackets) {
  const double kt = p.cavity_decay();
  const double beta = 2.0 * p.g * p.g * p.omega_m / (0.25 * p.gamma_m * p.gamma_m + p.omega_m * p.omega_m);
  auto f = [&](double u) { return u * (kt * kt + std::pow(p.delta0 - beta * u, 2)) - E; };
  const double hi = 2.0 * E / (kt * kt);
  const std::size_t n = 1'000'000;
  double prev = f(0.0);
  for (std::size_t i = 1; i <= n; ++i) {
    const double u = hi * static_cast<double>(i) / n;
    const double v = f(u);
    if ((v < 0.0) != (prev < 0.0)) brackets.emplace_back(hi * static_cast<double>(i - 1) / n, u);
    prev = v;
  }
  return brackets.size();
}

Check steady_solver() {
  Check c;
  SystemParams p;
  p.kappa = 1.0;
  p.omega_m = 50.0;
  p.gamma_m = 4.0;
  p.g = 0.0;
  p.delta0 = 2.5;
  p.pump = PumpAmplitude{complex(3.0, 1.0)};
  const auto lin = solve_steady_states(p);
  const double lorentz = 10.0 / (4.0 + 6.25);
  c.require(lin.size() == 1 && std::abs(lin[0].photon_number() - lorentz) < 1e-12 * lorentz, "Lorentzian");

  p.g = 0.02;
  const double kt = p.cavity_decay();
  const double beta = bistability_shift(p);
  for (auto [d, e] : {std::pair{30.0, 3130.0}, std::pair{5.0, 10.0}, std::pair{12.0, 50.0}}) {
    p.delta0 = d * kt;
    p.pump = PumpAmplitude{std::sqrt(e * kt * kt * kt / beta)};
    const auto roots = solve_steady_states(p);
    std::vector<std::pair<double, double>> brackets;
    const auto found = scan_roots(p, std::norm(pump_amplitude(p)), brackets);
    c.require(roots.size() == found && found == 3, "root count");
    for (std::size_t i = 0; i < std::min(roots.size(), brackets.size()); ++i) {
      const double u = roots[i].photon_number();
      c.require(u >= brackets[i].first && u <= brackets[i].second, "root value");
      c.require(fixed_point_residual(p, pump_amplitude(p), roots[i]) < 1e-10, "residual");
    }
  }
  return c;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Check()>>> criteria{
      {"IEIT zeros in G=2,4,6 sweeps", zeros_in_sweeps},
      {"energy partition at IEIT points", energy_partition},
      {"normal-mode occupation", normal_modes},
      {"response poles at +-G - 2i kappa", poles},
      {"internal-loss zeros", internal_loss},
      {"time-domain oracle", time_domain},
      {"quanta budget", quanta_budget},
      {"phase restoration", phase_restoration},
      {"steady-state solver", steady_solver},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Check c;
    try {
      c = criteria[i].second();
    } catch (const std::exception& e) {
      c.ok = false;
      c.note = std::string("exception: ") + e.what();
    }
    std::printf("%s %zu %s%s%s\n", c.ok ? "PASS" : "FAIL", i + 1, criteria[i].first, c.note.empty() ? "" : " -- ",
                c.note.c_str());
    failures += c.ok ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
