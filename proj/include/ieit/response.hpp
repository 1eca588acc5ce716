#pragma once

// Linearized probe response on the red sideband (Delta = omega_m, RWA).
//
// With kt = 2 kappa + kappa0 and the mechanical susceptibility denominator
// m(x) = gamma_m/2 - i x, the probe components are
//
//     dc+ = (eps_L + eps_R) m / D,   db+ = -i g c_s* (eps_L + eps_R) / D,
//     D(x) = (kt - i x) m(x) + G^2,
//
// and each port radiates out_a+ = 2 kappa dc+ - eps_a.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <exception>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "ieit/model.hpp"
#include "ieit/steady_state.hpp"

namespace ieit {

enum class Port { left, right };

struct ProbeResponse {
  double x = 0.0;
  complex dc_plus{};
  complex db_plus{};
  complex out_L_plus{};
  complex out_R_plus{};
  complex out_L_minus{};  // identically zero within the RWA
  complex out_R_minus{};
  double cavity_norm = 0.0;  ///< 4 kappa^2 |dc+|^2 / (|eps_L|^2 + |eps_R|^2)
  double mech_norm = 0.0;    ///< 4 kappa^2 |db+|^2 / (|eps_L|^2 + |eps_R|^2)
  double out_norm_L = 0.0;   ///< |out_L+ / eps_L|^2
  double out_norm_R = 0.0;   ///< |out_R+ / eps_L|^2
  double phi_plus_norm = 0.0;
  double phi_minus_norm = 0.0;
  bool off_sideband = false;  ///< operating point not at Delta = omega_m
};

struct IEITPoint {
  double x_minus = 0.0;
  double x_plus = 0.0;
  double gamma_m_required = 0.0;
  double kappa_eff = 0.0;
  bool exists = false;
  std::optional<bool> probes_matched;  ///< eps_R == eps_L, when a drive was supplied
};

/// Response denominator D(x) = (kt - i x)(gamma_m/2 - i x) + G^2.
inline complex response_denominator(const SystemParams& p, const SteadyState& op, double x) {
  return complex(p.cavity_decay(), -x) * complex(0.5 * p.gamma_m, -x) + op.G * op.G;
}

/// Complex x at which D vanishes (normal-mode poles), ordered by real part.
inline std::array<complex, 2> response_poles(const SystemParams& p, const SteadyState& op) {
  // D = -x^2 - i (kt + gamma_m/2) x + kt gamma_m/2 + G^2
  const double kt = p.cavity_decay();
  const double a = 0.5 * p.gamma_m;
  const complex b(0.0, kt + a);
  const complex c = -(kt * a + op.G * op.G);
  const complex root = std::sqrt(b * b - 4.0 * c);
  std::array<complex, 2> x{0.5 * (-b - root), 0.5 * (-b + root)};
  if (x[0].real() > x[1].real()) std::swap(x[0], x[1]);
  return x;
}

/// Phase that makes the coupling g c_s real and non-negative.
inline double coupling_phase(const SystemParams& p, const SteadyState& op) {
  const complex gc = p.g * op.c_s;
  return gc == complex(0.0, 0.0) ? 0.0 : std::arg(gc);
}

inline ProbeResponse probe_response(const SystemParams& p, const SteadyState& op, const ProbeDrive& drive) {
  const double input = drive.input_power();
  if (!(input > 0.0)) throw std::invalid_argument("probe_response: zero total probe input");
  const complex D = response_denominator(p, op, drive.x);
  if (D == complex(0.0, 0.0))
    throw std::domain_error("probe_response: singular response (gamma_m = 0, x = 0, G = 0)");

  ProbeResponse r;
  r.x = drive.x;
  r.off_sideband = std::abs(op.Delta - p.omega_m) > 1e-6 * p.omega_m;
  const complex s = drive.sum();
  const complex mech(0.5 * p.gamma_m, -drive.x);
  r.dc_plus = s * mech / D;
  // op.G rather than |g c_s| so that a directly specified G is honoured exactly
  const complex coupling = std::polar(op.G, -coupling_phase(p, op));  // g c_s*
  r.db_plus = complex(0.0, -1.0) * coupling * s / D;
  r.out_L_plus = 2.0 * p.kappa * r.dc_plus - drive.eps_L;
  r.out_R_plus = 2.0 * p.kappa * r.dc_plus - drive.eps_R;

  const double k2 = 4.0 * p.kappa * p.kappa;
  r.cavity_norm = k2 * std::norm(r.dc_plus) / input;
  r.mech_norm = k2 * std::norm(r.db_plus) / input;
  const double ref = std::norm(drive.eps_L) > 0.0 ? std::norm(drive.eps_L) : std::norm(drive.eps_R);
  r.out_norm_L = std::norm(r.out_L_plus) / ref;
  r.out_norm_R = std::norm(r.out_R_plus) / ref;

  // normal modes in the gauge where the coupling is -i G
  const complex db_gauge = r.db_plus * std::polar(1.0, coupling_phase(p, op));
  const complex phi_plus = (db_gauge + r.dc_plus) / std::numbers::sqrt2;
  const complex phi_minus = (db_gauge - r.dc_plus) / std::numbers::sqrt2;
  r.phi_plus_norm = k2 * std::norm(phi_plus) / input;
  r.phi_minus_norm = k2 * std::norm(phi_minus) / input;
  return r;
}

/// Perfect-absorption conditions for matched probes: gamma_m = 4 kappa_eff and
/// x = +-sqrt(G^2 - 4 kappa_eff^2), which requires G >= 2 kappa_eff.
inline IEITPoint ieit_conditions(const SystemParams& p, const SteadyState& op) {
  IEITPoint pt;
  pt.kappa_eff = effective_kappa(p);
  pt.gamma_m_required = 4.0 * pt.kappa_eff;
  const double threshold = 2.0 * pt.kappa_eff;
  pt.exists = op.G >= threshold;
  if (pt.exists) {
    const double split = std::sqrt(std::max(0.0, op.G * op.G - threshold * threshold));
    pt.x_minus = -split;
    pt.x_plus = split;
  }
  return pt;
}

inline IEITPoint ieit_conditions(const SystemParams& p, const SteadyState& op, const ProbeDrive& drive) {
  auto pt = ieit_conditions(p, op);
  pt.probes_matched = drive.eps_L == drive.eps_R;
  return pt;
}

/// 1 - outgoing/incoming probe power.
inline double absorption_fraction(const SystemParams& p, const SteadyState& op, const ProbeDrive& drive) {
  const double input = drive.input_power();
  if (!(input > 0.0)) throw std::invalid_argument("absorption_fraction: zero total probe input");
  const auto r = probe_response(p, op, drive);
  return 1.0 - (std::norm(r.out_L_plus) + std::norm(r.out_R_plus)) / input;
}

/// Inclusive uniform grid; the last point is exactly `hi`.
inline std::vector<double> linear_grid(double lo, double hi, std::size_t points) {
  if (points < 2) throw std::invalid_argument("grid needs at least 2 points");
  if (!(lo < hi)) throw std::invalid_argument("grid needs lo < hi");
  std::vector<double> xs(points);
  const double step = (hi - lo) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) xs[i] = lo + step * static_cast<double>(i);
  xs.back() = hi;
  return xs;
}

/// Response at every x of the grid. Rows are computed in parallel and
/// returned in grid order.
inline std::vector<ProbeResponse> sweep(const SystemParams& p, const SteadyState& op, ProbeDrive drive,
                                        const std::vector<double>& xs, unsigned threads = 0) {
  std::vector<ProbeResponse> rows(xs.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(1, xs.size() / 256)));
  auto work = [&](std::size_t begin, std::size_t end) {
    ProbeDrive d = drive;
    for (std::size_t i = begin; i < end; ++i) {
      d.x = xs[i];
      rows[i] = probe_response(p, op, d);
    }
  };
  if (threads <= 1) {
    work(0, xs.size());
    return rows;
  }
  const std::size_t chunk = (xs.size() + threads - 1) / threads;
  std::vector<std::exception_ptr> errors((xs.size() + chunk - 1) / chunk);
  {
    std::vector<std::jthread> pool;
    for (std::size_t begin = 0, k = 0; begin < xs.size(); begin += chunk, ++k)
      pool.emplace_back([&, begin, k] {
        try {
          work(begin, std::min(xs.size(), begin + chunk));
        } catch (...) {
          errors[k] = std::current_exception();
        }
      });
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return rows;
}

namespace detail {

// out_a+(x) * D(x) as a quadratic c2 x^2 + c1 x + c0.
struct OutputNumerator {
  complex c2, c1, c0;

  complex operator()(double x) const { return (c2 * x + c1) * x + c0; }
  complex slope(double x) const { return 2.0 * c2 * x + c1; }
};

inline OutputNumerator output_numerator(const SystemParams& p, const SteadyState& op, complex s, complex eps) {
  const double kt = p.cavity_decay();
  const double a = 0.5 * p.gamma_m;
  const double k2 = 2.0 * p.kappa;
  // 2 kappa s (a - i x) - eps (-x^2 - i (kt + a) x + kt a + G^2)
  return {eps, complex(0.0, -k2) * s + complex(0.0, kt + a) * eps,
          k2 * a * s - eps * (kt * a + op.G * op.G)};
}

template <class F>
double bisect(F&& f, double lo, double hi) {
  double flo = f(lo);
  if (flo == 0.0) return lo;
  if (f(hi) == 0.0) return hi;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

/// Real detunings in [x_min, x_max] at which the chosen port's probe output
/// vanishes. Zeros are bracketed by sign changes of Re and Im of the output
/// numerator and refined by bisection; double zeros (no sign change) are
/// caught at grid minima of |out| and refined on d|out|^2/dx.
inline std::vector<double> find_absorption_zeros(const SystemParams& p, const SteadyState& op,
                                                 const ProbeDrive& drive, double x_min, double x_max,
                                                 Port port = Port::left, std::size_t points = 4001,
                                                 double tolerance = 1e-9) {
  if (!std::isfinite(x_min) || !std::isfinite(x_max)) throw std::invalid_argument("x range must be finite");
  const complex eps = port == Port::left ? drive.eps_L : drive.eps_R;
  const double eps_abs = std::abs(eps) > 0.0 ? std::abs(eps) : std::sqrt(drive.input_power());
  if (!(eps_abs > 0.0)) throw std::invalid_argument("find_absorption_zeros: zero probe input");
  const auto N = detail::output_numerator(p, op, drive.sum(), eps);
  const auto xs = linear_grid(x_min, x_max, points);

  auto relative_output = [&](double x) {
    return std::abs(N(x)) / (std::abs(response_denominator(p, op, x)) * eps_abs);
  };

  std::vector<double> candidates;
  std::vector<complex> vals(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) vals[i] = N(xs[i]);

  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    const double lo = xs[i], hi = xs[i + 1];
    const bool re_change = (vals[i].real() <= 0.0) != (vals[i + 1].real() <= 0.0) || vals[i].real() == 0.0;
    const bool im_change = (vals[i].imag() <= 0.0) != (vals[i + 1].imag() <= 0.0) || vals[i].imag() == 0.0;
    if (re_change) candidates.push_back(detail::bisect([&](double x) { return N(x).real(); }, lo, hi));
    if (im_change) candidates.push_back(detail::bisect([&](double x) { return N(x).imag(); }, lo, hi));
  }
  auto gradient = [&](double x) { return (N.slope(x) * std::conj(N(x))).real(); };
  for (std::size_t i = 1; i + 1 < xs.size(); ++i) {
    const double here = std::norm(vals[i]);
    if (here <= std::norm(vals[i - 1]) && here <= std::norm(vals[i + 1])) {
      const double lo = xs[i - 1], hi = xs[i + 1];
      if ((gradient(lo) <= 0.0) != (gradient(hi) <= 0.0)) candidates.push_back(detail::bisect(gradient, lo, hi));
    }
  }

  std::vector<std::pair<double, double>> accepted;  // (x, |out|/|eps|)
  for (double x : candidates) {
    const double r = relative_output(x);
    if (r <= tolerance) accepted.emplace_back(x, r);
  }
  std::sort(accepted.begin(), accepted.end());
  const double merge = 1e-6 * std::max(p.kappa, (x_max - x_min) / static_cast<double>(points));
  std::vector<std::pair<double, double>> unique;
  for (const auto& a : accepted) {
    if (!unique.empty() && a.first - unique.back().first < merge) {
      if (a.second < unique.back().second) unique.back() = a;
    } else {
      unique.push_back(a);
    }
  }
  std::vector<double> zeros;
  for (const auto& u : unique) zeros.push_back(u.first);
  return zeros;
}

}  // namespace ieit
