#pragma once

// Fixed-step RK4 integration of the mean fluctuation amplitudes <db~>, <dc~>.
//
// RWA form (red sideband, fast terms dropped):
//     db' = -i g c_s* dc - gamma_m/2 db
//     dc' = -kt dc - i g c_s db + (eps_L + eps_R) e^{-i x t}
//
// Full linearized form keeps the counter-rotating terms at e^{+-i(Delta+omega_m)t}
// and allows Delta != omega_m. Outputs follow out_a(t) = 2 kappa dc(t) - eps_a(t).

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ieit/model.hpp"
#include "ieit/response.hpp"
#include "ieit/steady_state.hpp"

namespace ieit {

class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ModeAmplitudes {
  complex db{};
  complex dc{};

  friend ModeAmplitudes operator+(const ModeAmplitudes& a, const ModeAmplitudes& b) {
    return {a.db + b.db, a.dc + b.dc};
  }
  friend ModeAmplitudes operator*(double h, const ModeAmplitudes& a) { return {h * a.db, h * a.dc}; }

  double quanta() const { return std::norm(db) + std::norm(dc); }
  bool finite() const {
    return std::isfinite(db.real()) && std::isfinite(db.imag()) && std::isfinite(dc.real()) &&
           std::isfinite(dc.imag());
  }
};

struct Trajectory {
  std::vector<double> t;
  std::vector<complex> db;
  std::vector<complex> dc;
  std::vector<complex> out_L;
  std::vector<complex> out_R;

  std::size_t size() const { return t.size(); }

  void push(double time, const ModeAmplitudes& y, complex outL, complex outR) {
    t.push_back(time);
    db.push_back(y.db);
    dc.push_back(y.dc);
    out_L.push_back(outL);
    out_R.push_back(outR);
  }
};

struct IntegrationOptions {
  double t_end = 0.0;
  double dt = 0.0;  ///< 0 selects the largest admissible step
  std::size_t record_every = 1;
  ModeAmplitudes initial{};
};

template <class State, class F>
State rk4_step(F& f, double t, const State& y, double h) {
  const State k1 = f(t, y);
  const State k2 = f(t + 0.5 * h, y + (0.5 * h) * k1);
  const State k3 = f(t + 0.5 * h, y + (0.5 * h) * k2);
  const State k4 = f(t + h, y + h * k3);
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Step cap for the RWA equations: 0.01 / max(kappa, kappa0, gamma_m/2, G, |x|).
inline double max_rwa_step(const SystemParams& p, const SteadyState& op, const ProbeDrive& drive) {
  return 0.01 / std::max({p.kappa, p.kappa0, 0.5 * p.gamma_m, op.G, std::abs(drive.x)});
}

/// Step cap for the full equations, resolving the counter-rotating phase.
inline double max_full_step(const SystemParams& p, const SteadyState& op, const ProbeDrive& drive) {
  const double fast = std::max({op.Delta + p.omega_m, std::abs(op.Delta - p.omega_m),
                                std::abs(drive.x + p.omega_m - op.Delta), p.cavity_decay(),
                                0.5 * p.gamma_m, op.G});
  return 0.005 / fast;
}

/// Integration time after which transients of the driven RWA problem have
/// decayed below `tolerance` over the final 20% of the run.
inline double suggested_duration(const SystemParams& p, const SteadyState& op, double tolerance = 1e-10) {
  double decay = p.cavity_decay();
  if (op.G > 0.0) {
    const auto ev = drift_eigenvalues(p, op);
    decay = -std::max(ev[0].real(), ev[1].real());
  }
  if (!(decay > 0.0)) throw numerical_error("drift matrix has no decaying modes");
  return 1.25 * std::log(1.0 / tolerance) / decay;
}

namespace detail {

inline void check_finite(const ModeAmplitudes& y, double t) {
  if (!y.finite()) throw numerical_error("non-finite state at t = " + std::to_string(t));
}

template <class Rhs, class Drive>
Trajectory run(Rhs& rhs, Drive&& drive_phase, double kappa, const ProbeDrive& drive, const IntegrationOptions& opt,
               double dt) {
  if (!(opt.t_end > 0.0)) throw std::invalid_argument("t_end must be positive");
  if (opt.record_every == 0) throw std::invalid_argument("record_every must be at least 1");
  const auto steps = static_cast<std::size_t>(std::ceil(opt.t_end / dt - 1e-9));
  const double h = opt.t_end / static_cast<double>(steps);

  Trajectory tr;
  tr.t.reserve(steps / opt.record_every + 2);
  auto record = [&](double t, const ModeAmplitudes& y) {
    const complex ph = drive_phase(t);
    tr.push(t, y, 2.0 * kappa * y.dc - drive.eps_L * ph, 2.0 * kappa * y.dc - drive.eps_R * ph);
  };
  ModeAmplitudes y = opt.initial;
  record(0.0, y);
  for (std::size_t n = 1; n <= steps; ++n) {
    const double t = static_cast<double>(n - 1) * h;
    y = rk4_step(rhs, t, y, h);
    const double t_next = static_cast<double>(n) * h;
    if (n % opt.record_every == 0 || n == steps) {
      check_finite(y, t_next);
      record(t_next, y);
    }
  }
  check_finite(y, opt.t_end);
  return tr;
}

inline double resolve_step(double requested, double cap) {
  if (requested == 0.0) return cap;
  if (!(requested > 0.0)) throw std::invalid_argument("dt must be positive");
  if (requested > cap * (1.0 + 1e-12))
    throw std::invalid_argument("dt " + std::to_string(requested) + " exceeds the stability cap " +
                                std::to_string(cap));
  return requested;
}

}  // namespace detail

/// Integrates the RWA mean-value equations from opt.initial (zero by default).
inline Trajectory integrate_rwa(const SystemParams& p, const SteadyState& op, const ProbeDrive& drive,
                                const IntegrationOptions& opt) {
  const double dt = detail::resolve_step(opt.dt, max_rwa_step(p, op, drive));
  const double phase = coupling_phase(p, op);
  const complex gc_conj = std::polar(op.G, -phase);
  const complex gc = std::polar(op.G, phase);
  const double kt = p.cavity_decay();
  const double half_gamma = 0.5 * p.gamma_m;
  const complex s = drive.sum();
  const double x = drive.x;
  const complex minus_i(0.0, -1.0);

  auto rhs = [&](double t, const ModeAmplitudes& y) -> ModeAmplitudes {
    return {minus_i * gc_conj * y.dc - half_gamma * y.db,
            -kt * y.dc + minus_i * gc * y.db + s * std::polar(1.0, -x * t)};
  };
  return detail::run(rhs, [x](double t) { return std::polar(1.0, -x * t); }, p.kappa, drive, opt, dt);
}

/// Integrates the linearized equations with the counter-rotating terms kept.
inline Trajectory integrate_full(const SystemParams& p, const SteadyState& op, const ProbeDrive& drive,
                                 const IntegrationOptions& opt) {
  const double dt = detail::resolve_step(opt.dt, max_full_step(p, op, drive));
  const double phase = coupling_phase(p, op);
  const complex gc_conj = std::polar(op.G, -phase);
  const complex gc = std::polar(op.G, phase);
  const double kt = p.cavity_decay();
  const double half_gamma = 0.5 * p.gamma_m;
  const complex s = drive.sum();
  const double mismatch = op.Delta - p.omega_m;
  const double sum_freq = op.Delta + p.omega_m;
  const double drive_freq = drive.x + p.omega_m - op.Delta;
  const complex minus_i(0.0, -1.0);

  auto rhs = [&](double t, const ModeAmplitudes& y) -> ModeAmplitudes {
    const complex slow = std::polar(1.0, -mismatch * t);  // e^{-i(Delta - omega_m)t}
    const complex fast = std::polar(1.0, sum_freq * t);   // e^{+i(Delta + omega_m)t}
    return {minus_i * (gc_conj * y.dc * slow + gc * std::conj(y.dc) * fast) - half_gamma * y.db,
            -kt * y.dc + minus_i * gc * (y.db * std::conj(slow) + std::conj(y.db) * fast) +
                s * std::polar(1.0, -drive_freq * t)};
  };
  return detail::run(rhs, [drive_freq](double t) { return std::polar(1.0, -drive_freq * t); }, p.kappa, drive,
                     opt, dt);
}

struct OscillationFit {
  complex plus{};    ///< coefficient of e^{-i x t}
  complex minus{};   ///< coefficient of e^{+i x t}
  complex offset{};  ///< constant part
};

/// Least-squares projection of the last `tail` fraction of y(t) onto
/// {e^{-ixt}, e^{+ixt}, 1}. Columns that are numerically dependent on earlier
/// ones (x ~ 0) are dropped and their coefficients left at zero.
inline OscillationFit fit_oscillation(std::span<const double> t, std::span<const complex> y, double x,
                                      double tail = 0.2) {
  if (t.size() != y.size() || t.size() < 4) throw std::invalid_argument("fit needs matching samples");
  const auto first = static_cast<std::size_t>(std::floor((1.0 - tail) * static_cast<double>(t.size() - 1)));
  const std::size_t n = t.size() - first;
  if (n < 3) throw std::invalid_argument("fit window too short");

  // modified Gram-Schmidt QR of the 3-column design matrix
  std::vector<std::vector<complex>> q(3, std::vector<complex>(n));
  for (std::size_t i = 0; i < n; ++i) {
    q[0][i] = std::polar(1.0, -x * t[first + i]);
    q[1][i] = std::polar(1.0, x * t[first + i]);
    q[2][i] = 1.0;
  }
  complex r[3][3] = {};
  bool kept[3] = {false, false, false};
  for (int j = 0; j < 3; ++j) {
    double orig = 0.0;
    for (const auto& v : q[j]) orig += std::norm(v);
    for (int k = 0; k < j; ++k) {
      if (!kept[k]) continue;
      complex dot = 0.0;
      for (std::size_t i = 0; i < n; ++i) dot += std::conj(q[k][i]) * q[j][i];
      r[k][j] = dot;
      for (std::size_t i = 0; i < n; ++i) q[j][i] -= dot * q[k][i];
    }
    double nrm = 0.0;
    for (const auto& v : q[j]) nrm += std::norm(v);
    if (nrm <= 1e-16 * orig) continue;
    kept[j] = true;
    nrm = std::sqrt(nrm);
    r[j][j] = nrm;
    for (auto& v : q[j]) v /= nrm;
  }
  complex rhs[3] = {};
  for (int j = 0; j < 3; ++j) {
    if (!kept[j]) continue;
    for (std::size_t i = 0; i < n; ++i) rhs[j] += std::conj(q[j][i]) * y[first + i];
  }
  complex coef[3] = {};
  for (int j = 2; j >= 0; --j) {
    if (!kept[j]) continue;
    complex acc = rhs[j];
    for (int k = j + 1; k < 3; ++k)
      if (kept[k]) acc -= r[j][k] * coef[k];
    coef[j] = acc / r[j][j];
  }
  return {coef[0], coef[1], coef[2]};
}

struct FittedResponse {
  OscillationFit db;
  OscillationFit dc;
};

inline FittedResponse fit_response(const Trajectory& tr, double x, double tail = 0.2) {
  return {fit_oscillation(tr.t, tr.db, x, tail), fit_oscillation(tr.t, tr.dc, x, tail)};
}

namespace detail {

// mode amplitudes plus the running loss integrals
struct BudgetState {
  ModeAmplitudes modes;
  double emitted = 0.0, mech = 0.0, internal = 0.0;

  friend BudgetState operator+(const BudgetState& a, const BudgetState& b) {
    return {a.modes + b.modes, a.emitted + b.emitted, a.mech + b.mech, a.internal + b.internal};
  }
  friend BudgetState operator*(double h, const BudgetState& a) {
    return {h * a.modes, h * a.emitted, h * a.mech, h * a.internal};
  }
};

}  // namespace detail

struct QSwitchOptions {
  double dt = 0.0;       ///< 0 selects the RWA cap for each phase
  double t_after = 0.0;  ///< 0 integrates until the stored quanta have decayed by ~1e-13
  std::size_t record_every = 1;
};

struct QSwitchResult {
  double t_switch = 0.0;
  double kappa_after = 0.0;
  double emitted_quanta = 0.0;       ///< port flux integrated after the switch
  double stored_before = 0.0;        ///< |db|^2 + |dc|^2 at the switch
  double mech_dissipated = 0.0;      ///< integral of gamma_m |db|^2
  double internal_dissipated = 0.0;  ///< integral of 2 kappa0 |dc|^2
  double remaining = 0.0;            ///< |db|^2 + |dc|^2 at the end
  Trajectory trajectory;

  /// (emitted + dissipated + remaining - stored) / stored
  double budget_residual() const {
    if (stored_before == 0.0) return 0.0;
    return (emitted_quanta + mech_dissipated + internal_dissipated + remaining - stored_before) / stored_before;
  }
};

/// Drives the cavity until t_switch, then multiplies the port decay kappa by
/// kappa_factor and switches both probes off. The emitted quanta count the
/// port flux |out_a|^2 / (2 kappa) with the post-switch kappa.
inline QSwitchResult q_switch(const SystemParams& p, const SteadyState& op, const ProbeDrive& drive,
                              double t_switch, double kappa_factor, const QSwitchOptions& opt = {}) {
  if (!(t_switch >= 10.0 / p.kappa * (1.0 - 1e-12)))
    throw std::invalid_argument("t_switch must be at least 10/kappa");
  if (!(kappa_factor >= 1.0)) throw std::invalid_argument("kappa_factor must be >= 1");

  QSwitchResult res;
  res.t_switch = t_switch;
  IntegrationOptions before;
  before.t_end = t_switch;
  before.dt = opt.dt;
  before.record_every = opt.record_every;
  res.trajectory = integrate_rwa(p, op, drive, before);
  const ModeAmplitudes at_switch{res.trajectory.db.back(), res.trajectory.dc.back()};
  res.stored_before = at_switch.quanta();

  SystemParams after = p;
  after.kappa = kappa_factor * p.kappa;
  res.kappa_after = after.kappa;
  const ProbeDrive off{0.0, 0.0, drive.x};
  const double cap_after = max_rwa_step(after, op, off);
  const double dt = opt.dt == 0.0 ? cap_after : std::min(opt.dt, cap_after);
  double t_after = opt.t_after;
  if (t_after == 0.0)
    t_after = std::max(10.0 / after.kappa, 0.8 * suggested_duration(after, op, 1e-13));
  if (!(t_after >= 10.0 / after.kappa * (1.0 - 1e-12)))
    throw std::invalid_argument("t_after must be at least 10/(kappa * kappa_factor)");

  const double phase = coupling_phase(p, op);
  const complex gc_conj = std::polar(op.G, -phase);
  const complex gc = std::polar(op.G, phase);
  const double kt = after.cavity_decay();
  const double half_gamma = 0.5 * p.gamma_m;
  const double port_flux = 4.0 * after.kappa;  // 2 ports x |2 kappa dc|^2 / (2 kappa)
  const complex minus_i(0.0, -1.0);
  auto rhs = [&](double, const detail::BudgetState& b) -> detail::BudgetState {
    const auto& y = b.modes;
    return {{minus_i * gc_conj * y.dc - half_gamma * y.db, -kt * y.dc + minus_i * gc * y.db},
            port_flux * std::norm(y.dc),
            p.gamma_m * std::norm(y.db),
            2.0 * p.kappa0 * std::norm(y.dc)};
  };

  const auto steps = static_cast<std::size_t>(std::ceil(t_after / dt - 1e-9));
  const double h = t_after / static_cast<double>(steps);
  detail::BudgetState b{at_switch};
  for (std::size_t n = 1; n <= steps; ++n) {
    b = rk4_step(rhs, 0.0, b, h);
    if (n % opt.record_every == 0 || n == steps) {
      detail::check_finite(b.modes, t_switch + static_cast<double>(n) * h);
      const complex out = 2.0 * after.kappa * b.modes.dc;
      res.trajectory.push(t_switch + static_cast<double>(n) * h, b.modes, out, out);
    }
  }
  res.emitted_quanta = b.emitted;
  res.mech_dissipated = b.mech;
  res.internal_dissipated = b.internal;
  res.remaining = b.modes.quanta();
  return res;
}

}  // namespace ieit
