#pragma once

// Classical operating point of the pumped cavity.
//
// Eliminating the mirror displacement, b_s + b_s* = -2 g omega_m u / (gamma_m^2/4 + omega_m^2)
// with u = |c_s|^2, so the effective detuning is Delta = delta0 - beta u and the
// intracavity photon number solves the cubic
//
//     u ((2 kappa + kappa0)^2 + (delta0 - beta u)^2) = |eps_c|^2.
//
// The cubic is solved in the scaled variable w = beta u / kt (kt the amplitude
// decay), where it reads w (1 + (d - w)^2) = e with d = delta0/kt and
// e = beta |eps_c|^2 / kt^3, and every root is then Newton-polished in u.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "ieit/model.hpp"

namespace ieit {

struct SteadyState {
  complex c_s{0.0, 0.0};  ///< intracavity pump amplitude
  complex b_s{0.0, 0.0};  ///< mirror coherent amplitude
  double Delta = 0.0;     ///< effective detuning
  double G = 0.0;         ///< g |c_s|
  double delta0 = 0.0;    ///< bare detuning belonging to this point
  bool stable = true;     ///< branch stability of the cubic
  bool drift_stable = true;  ///< linearized RWA drift matrix is Hurwitz

  double photon_number() const { return std::norm(c_s); }
};

/// beta = 2 g^2 omega_m / (gamma_m^2/4 + omega_m^2).
inline double bistability_shift(const SystemParams& p) {
  return 2.0 * p.g * p.g * p.omega_m / (0.25 * p.gamma_m * p.gamma_m + p.omega_m * p.omega_m);
}

/// Mirror amplitude in equilibrium with photon number u.
inline complex mirror_amplitude(const SystemParams& p, double u) {
  return complex(0.0, -p.g * u) / complex(0.5 * p.gamma_m, p.omega_m);
}

/// Residual u (kt^2 + (delta0 - beta u)^2) - |eps_c|^2.
inline double cubic_residual(const SystemParams& p, double delta0, double eps_sq, double u) {
  const double kt = p.cavity_decay();
  const double det = delta0 - bistability_shift(p) * u;
  return u * (kt * kt + det * det) - eps_sq;
}

/// d/du of cubic_residual.
inline double cubic_slope(const SystemParams& p, double delta0, double u) {
  const double kt = p.cavity_decay();
  const double beta = bistability_shift(p);
  const double det = delta0 - beta * u;
  return kt * kt + det * det - 2.0 * beta * u * det;
}

/// Eigenvalues of the RWA drift matrix [[-gamma_m/2, -i g c_s*], [-i g c_s, -kt]].
inline std::array<complex, 2> drift_eigenvalues(const SystemParams& p, const SteadyState& op) {
  const double a = 0.5 * p.gamma_m;
  const double b = p.cavity_decay();
  const complex coupling_sq = std::norm(p.g * op.c_s);  // (-i g c_s*)(-i g c_s) = -G^2
  const complex half_trace = -0.5 * (a + b);
  const complex root = std::sqrt(complex(0.25 * (a - b) * (a - b)) - coupling_sq);
  return {half_trace + root, half_trace - root};
}

inline bool drift_is_stable(const SystemParams& p, const SteadyState& op) {
  const auto ev = drift_eigenvalues(p, op);
  return ev[0].real() < 0.0 && ev[1].real() < 0.0;
}

/// Positive-slope roots are stable; the middle branch and fold points are not.
inline std::vector<bool> branch_stability(const SystemParams& p, double delta0,
                                          std::span<const double> roots) {
  const double kt = p.cavity_decay();
  const double scale = kt * kt + delta0 * delta0;
  std::vector<bool> flags;
  flags.reserve(roots.size());
  for (double u : roots) flags.push_back(cubic_slope(p, delta0, u) > 1e-9 * scale);
  return flags;
}

namespace detail {

// Real roots of w^3 - 2 d w^2 + (1 + d^2) w - e = 0, ascending. At a fold the
// double root is listed once and `fold` holds its index.
inline std::vector<double> scaled_cubic_roots(double d, double e, int& fold) {
  const double a = -2.0 * d;
  const double b = 1.0 + d * d;
  const double c = -e;
  const double p = b - a * a / 3.0;
  const double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
  const double shift = -a / 3.0;
  const double half_q_sq = 0.25 * q * q;
  const double third_p_cube = p * p * p / 27.0;
  const double disc = half_q_sq + third_p_cube;
  const double disc_scale = std::max(half_q_sq, std::abs(third_p_cube));
  fold = -1;

  std::vector<double> w;
  if (p < 0.0 && std::abs(disc) <= 1e-12 * disc_scale) {
    const double simple = 3.0 * q / p + shift;
    const double twice = -1.5 * q / p + shift;
    w = {std::min(simple, twice), std::max(simple, twice)};
    fold = simple < twice ? 1 : 0;
    return w;
  }
  if (disc > 0.0) {
    const double s = std::sqrt(disc);
    w = {std::cbrt(-0.5 * q + s) + std::cbrt(-0.5 * q - s) + shift};
  } else {
    const double r = 2.0 * std::sqrt(-p / 3.0);
    const double arg = std::clamp(1.5 * q / p * std::sqrt(-3.0 / p), -1.0, 1.0);
    const double phi = std::acos(arg) / 3.0;
    for (int k = 0; k < 3; ++k) w.push_back(r * std::cos(phi - 2.0 * std::numbers::pi * k / 3.0) + shift);
  }
  std::sort(w.begin(), w.end());
  return w;
}

inline double newton_polish(const SystemParams& p, double delta0, double eps_sq, double u) {
  const double kt = p.cavity_decay();
  const double scale = kt * kt + delta0 * delta0;
  for (int it = 0; it < 2; ++it) {
    const double slope = cubic_slope(p, delta0, u);
    if (std::abs(slope) < 1e-6 * scale) break;
    u -= cubic_residual(p, delta0, eps_sq, u) / slope;
  }
  return u;
}

inline SteadyState make_state(const SystemParams& p, complex eps_c, double delta0, double u) {
  SteadyState s;
  s.delta0 = delta0;
  s.Delta = delta0 - bistability_shift(p) * u;
  s.c_s = eps_c / complex(p.cavity_decay(), s.Delta);
  s.b_s = mirror_amplitude(p, std::norm(s.c_s));
  s.G = std::abs(p.g) * std::abs(s.c_s);
  s.drift_stable = drift_is_stable(p, s);
  return s;
}

}  // namespace detail

struct PhotonNumbers {
  std::vector<double> u;  ///< ascending
  int fold = -1;          ///< index of a double root, or -1
};

/// Real non-negative photon numbers u solving the steady-state cubic.
inline PhotonNumbers steady_photon_numbers(const SystemParams& p, double eps_sq) {
  const double kt = p.cavity_decay();
  const double beta = bistability_shift(p);
  PhotonNumbers out;
  if (eps_sq == 0.0) {
    out.u = {0.0};
  } else if (beta == 0.0) {
    out.u = {eps_sq / (kt * kt + p.delta0 * p.delta0)};
  } else {
    const double d = p.delta0 / kt;
    const double e = beta * eps_sq / (kt * kt * kt);
    const auto w = detail::scaled_cubic_roots(d, e, out.fold);
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double u = std::max(0.0, w[i] * kt / beta);
      // Newton stalls on a double root; keep the closed form there.
      out.u.push_back(static_cast<int>(i) == out.fold ? u : detail::newton_polish(p, p.delta0, eps_sq, u));
    }
  }
  return out;
}

/// All self-consistent operating points for the configured delta0 and pump,
/// ascending in photon number. A fold contributes one entry, flagged unstable.
inline std::vector<SteadyState> solve_steady_states(const SystemParams& p) {
  validate(p);
  if (std::holds_alternative<PumpCoupling>(p.pump))
    throw std::invalid_argument("pump given as G: use fix_operating_point");
  const complex eps_c = pump_amplitude(p);
  const auto roots = steady_photon_numbers(p, std::norm(eps_c));
  const auto flags = branch_stability(p, p.delta0, roots.u);
  std::vector<SteadyState> out;
  for (std::size_t i = 0; i < roots.u.size(); ++i) {
    auto s = detail::make_state(p, eps_c, p.delta0, roots.u[i]);
    s.stable = flags[i] && static_cast<int>(i) != roots.fold;
    out.push_back(s);
  }
  return out;
}

/// Operating point on the red sideband, Delta = omega_m. delta0 is treated as
/// free and returned as delta0 = omega_m + beta |c_s|^2.
inline SteadyState fix_operating_point(const SystemParams& p) {
  validate(p);
  const double kt = p.cavity_decay();
  const double norm_den = std::hypot(kt, p.omega_m);
  complex eps_c;
  double G_given = -1.0;
  if (const auto* pc = std::get_if<PumpCoupling>(&p.pump)) {
    if (p.g == 0.0 && pc->G > 0.0)
      throw std::invalid_argument("G > 0 requires a non-zero single-photon coupling g");
    eps_c = pc->G == 0.0 ? 0.0 : pc->G / std::abs(p.g) * norm_den;
    G_given = pc->G;
  } else {
    eps_c = pump_amplitude(p);
  }
  SteadyState s;
  s.Delta = p.omega_m;
  s.c_s = eps_c / complex(kt, p.omega_m);
  const double u = std::norm(s.c_s);
  s.delta0 = p.omega_m + bistability_shift(p) * u;
  s.b_s = mirror_amplitude(p, u);
  s.G = G_given >= 0.0 ? G_given : std::abs(p.g) * std::abs(s.c_s);
  const double at[] = {u};
  s.stable = branch_stability(p, s.delta0, at)[0];
  s.drift_stable = drift_is_stable(p, s);
  return s;
}

/// Max relative residual of both fixed-point equations for state s.
inline double fixed_point_residual(const SystemParams& p, complex eps_c, const SteadyState& s) {
  const double kt = p.cavity_decay();
  const double Delta = s.delta0 + 2.0 * p.g * s.b_s.real();
  const complex c_fixed = eps_c / complex(kt, Delta);
  const complex b_fixed = mirror_amplitude(p, std::norm(s.c_s));
  auto rel = [](complex a, complex b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
  };
  return std::max(rel(s.c_s, c_fixed), rel(s.b_s, b_fixed));
}

}  // namespace ieit
