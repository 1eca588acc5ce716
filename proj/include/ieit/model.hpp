#pragma once

// Parameter containers for a two-port optomechanical cavity: a partially
// transmitting mirror on a spring, placed inside a Fabry-Perot resonator with
// two identical end mirrors. A strong coupling field drives the cavity and
// two weak probes enter from the left and right ports.
//
// All rates are angular frequencies in rad/s. The cavity amplitude decays at
// 2*kappa + kappa0 (kappa per end mirror pair convention, kappa0 internal).

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <variant>

namespace ieit {

using complex = std::complex<double>;

/// Reduced Planck constant (J s). The only dimensional constant in the library.
inline constexpr double reduced_planck = 1.054571817e-34;

/// Coupling-field power in watts.
struct PumpPower {
  double watts = 0.0;
};

/// Coupling-field amplitude eps_c in sqrt(photons/s).
struct PumpAmplitude {
  complex eps_c{0.0, 0.0};
};

/// Effective optomechanical coupling G = g |c_s| given directly (rad/s).
struct PumpCoupling {
  double G = 0.0;
};

using Pump = std::variant<PumpPower, PumpAmplitude, PumpCoupling>;

struct SystemParams {
  double omega_m = 0.0;  ///< mechanical resonance
  double gamma_m = 0.0;  ///< mechanical damping
  double kappa = 0.0;    ///< per-port cavity decay
  double kappa0 = 0.0;   ///< internal cavity loss
  double g = 0.0;        ///< single-photon coupling
  double delta0 = 0.0;   ///< bare detuning omega_0 - omega_c
  double omega_c = 0.0;  ///< coupling-field frequency, only for power conversion
  Pump pump = PumpCoupling{};

  /// Amplitude decay rate of the intracavity field.
  double cavity_decay() const { return 2.0 * kappa + kappa0; }
};

struct MirrorGeometry {
  double transmission = 0.0;  ///< movable-mirror intensity transmission, in (0,1)
  double k = 0.0;             ///< cavity wave number (1/m)
  double q0 = 0.0;            ///< mirror rest position (m)
  double omega0 = 0.0;        ///< bare cavity resonance (rad/s)
  double length = 0.0;        ///< full cavity length (m)
  double mass = 0.0;          ///< effective mirror mass (kg)
};

/// Two probes at detuning x = omega_p - omega_c - omega_m.
struct ProbeDrive {
  complex eps_L{0.0, 0.0};
  complex eps_R{0.0, 0.0};
  double x = 0.0;

  complex sum() const { return eps_L + eps_R; }
  double input_power() const { return std::norm(eps_L) + std::norm(eps_R); }
};

inline void validate(const SystemParams& p) {
  auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(p.omega_m) || !(p.omega_m > 0.0))
    throw std::invalid_argument("omega_m must be positive");
  if (!finite(p.kappa) || !(p.kappa > 0.0))
    throw std::invalid_argument("kappa must be positive");
  if (!finite(p.gamma_m) || p.gamma_m < 0.0)
    throw std::invalid_argument("gamma_m must be non-negative");
  if (!finite(p.kappa0) || p.kappa0 < 0.0)
    throw std::invalid_argument("kappa0 must be non-negative");
  if (!finite(p.g) || !finite(p.delta0) || !finite(p.omega_c))
    throw std::invalid_argument("non-finite parameter");
  std::visit(
      [](const auto& pump) {
        using T = std::decay_t<decltype(pump)>;
        if constexpr (std::is_same_v<T, PumpPower>) {
          if (!std::isfinite(pump.watts) || pump.watts < 0.0)
            throw std::invalid_argument("pump power must be non-negative");
        } else if constexpr (std::is_same_v<T, PumpAmplitude>) {
          if (!std::isfinite(pump.eps_c.real()) || !std::isfinite(pump.eps_c.imag()))
            throw std::invalid_argument("pump amplitude must be finite");
        } else {
          if (!std::isfinite(pump.G) || pump.G < 0.0)
            throw std::invalid_argument("G must be non-negative");
        }
      },
      p.pump);
}

/// Resolved-sideband check omega_m > ratio * kappa. Advisory only: callers warn, not fail.
inline bool resolved_sideband(const SystemParams& p, double ratio = 10.0) {
  return p.omega_m > ratio * p.kappa;
}

/// Linear optomechanical coupling d(omega)/dq of a membrane in the middle of
/// the cavity. Negative for sin(2 k q0) > 0.
inline double g0_from_geometry(const MirrorGeometry& geom) {
  if (!(geom.transmission > 0.0 && geom.transmission < 1.0))
    throw std::domain_error("mirror transmission must lie in (0,1)");
  if (!(geom.length > 0.0))
    throw std::domain_error("cavity length must be positive");
  const double phase = 2.0 * geom.k * geom.q0;
  const double c = std::cos(phase);
  const double denom = 1.0 / (1.0 - geom.transmission) - c * c;
  if (!(denom > 0.0))
    throw std::domain_error("g0 denominator (1-T)^-1 - cos^2(2kq0) is not positive");
  return std::sin(phase) / std::sqrt(denom) * (-geom.omega0 / (geom.length / 2.0));
}

/// Zero-point coupling g = g0 * sqrt(hbar / (2 m omega_m)).
inline double g_from_g0(double g0, double mass, double omega_m) {
  if (!(mass > 0.0) || !(omega_m > 0.0))
    throw std::domain_error("mass and omega_m must be positive");
  return g0 * std::sqrt(reduced_planck / (2.0 * mass * omega_m));
}

/// eps_c = sqrt(2 kappa P / (hbar omega_c)).
inline double pump_amplitude_from_power(const SystemParams& p, double watts) {
  if (!(watts >= 0.0)) throw std::invalid_argument("pump power must be non-negative");
  if (!(p.omega_c > 0.0)) throw std::invalid_argument("omega_c must be positive for power conversion");
  return std::sqrt(2.0 * p.kappa * watts / (reduced_planck * p.omega_c));
}

/// Coupling-field amplitude for a power or amplitude pump.
inline complex pump_amplitude(const SystemParams& p) {
  if (const auto* pw = std::get_if<PumpPower>(&p.pump))
    return {pump_amplitude_from_power(p, pw->watts), 0.0};
  if (const auto* amp = std::get_if<PumpAmplitude>(&p.pump)) return amp->eps_c;
  throw std::invalid_argument("pump is specified as G; no amplitude available");
}

/// G at the red-sideband operating point Delta = omega_m:
/// G^2 = g^2 eps_c^2 / ((2 kappa + kappa0)^2 + omega_m^2).
inline double G_from_power(const SystemParams& p) {
  const auto* pw = std::get_if<PumpPower>(&p.pump);
  if (!pw) throw std::invalid_argument("G_from_power requires a power pump");
  const double eps_c = pump_amplitude_from_power(p, pw->watts);
  return std::abs(p.g) * eps_c / std::hypot(p.cavity_decay(), p.omega_m);
}

/// Inverse of G_from_power.
inline double power_from_G(const SystemParams& p, double G) {
  if (!std::isfinite(G) || G < 0.0) throw std::invalid_argument("G must be finite and non-negative");
  if (G == 0.0) return 0.0;
  if (p.g == 0.0) throw std::invalid_argument("G > 0 is unreachable with g = 0");
  if (!(p.omega_c > 0.0)) throw std::invalid_argument("omega_c must be positive for power conversion");
  const double ratio = G / p.g;
  const double kt = p.cavity_decay();
  return ratio * ratio * (kt * kt + p.omega_m * p.omega_m) * reduced_planck * p.omega_c /
         (2.0 * p.kappa);
}

/// kappa - kappa0/2, the rate entering the perfect-absorption conditions.
inline double effective_kappa(const SystemParams& p) {
  if (!(p.kappa0 < 2.0 * p.kappa))
    throw std::invalid_argument("internal loss kappa0 must be below 2 kappa");
  return p.kappa - 0.5 * p.kappa0;
}

}  // namespace ieit
