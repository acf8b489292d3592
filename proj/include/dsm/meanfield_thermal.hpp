#pragma once

// Finite-temperature mean field. Everything is intensive: abar = alpha/sqrt(N),
// f = F/N, so N drops out.
//
//   f(abar) = K |abar|^2 - T ln(2 cosh(E/T)),   K = w + 4 kappa g^2 / Delta
//   E^2     = |g abar + g tau abar*|^2 + (Delta/2 + U |abar|^2 / 2)^2
//
// E is the upper eigenvalue of the single-atom 2x2 mean-field Hamiltonian
// with a -> abar, a+ -> abar*.

#include <dsm/errors.hpp>
#include <dsm/meanfield_zero.hpp>
#include <dsm/model.hpp>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dsm {

struct ThermalPoint {
  ModelParams params;
  double temperature = 0.0;

  double beta() const { return 1.0 / temperature; }
  void validate() const {
    params.validate();
    if (!(temperature > 0.0) || !std::isfinite(temperature))
      throw InvalidParameters("temperature must be positive and finite");
  }
};

namespace detail {

// ln(2 cosh x) without overflow.
inline double log2cosh(double x) {
  const double a = std::abs(x);
  return a + std::log1p(std::exp(-2.0 * a));
}

inline double stiffness(const ModelParams& p) {
  return p.omega + 4.0 * p.kappa * p.g * p.g / p.delta;
}

}  // namespace detail

inline double free_energy(const ThermalPoint& pt, std::complex<double> abar) {
  const auto& p = pt.params;
  const double n2 = std::norm(abar);
  const double cpl = std::norm(p.g * abar + p.g * p.tau * std::conj(abar));
  const double z = 0.5 * p.delta + 0.5 * p.u * n2;
  const double e = std::sqrt(cpl + z * z);
  return detail::stiffness(p) * n2 - pt.temperature * detail::log2cosh(e / pt.temperature);
}

/// Real-axis form with g' = g (1 + tau).
inline double free_energy_real(const ThermalPoint& pt, double abar) {
  const auto& p = pt.params;
  const double a2 = abar * abar;
  const double gp = p.g_prime();
  const double e = 0.5 * std::sqrt(4.0 * a2 * gp * gp + (p.delta + p.u * a2) * (p.delta + p.u * a2));
  return detail::stiffness(p) * a2 - pt.temperature * detail::log2cosh(e / pt.temperature);
}

/// g_c(T) from the curvature of f at the origin. Requires the numerator to be
/// non-negative and the denominator positive; both failing is Unstable.
inline CriticalCoupling critical_coupling_thermal(const ThermalPoint& pt) {
  pt.validate();
  const auto& p = pt.params;
  const double t = std::tanh(0.5 * p.delta / pt.temperature);
  const double num = p.delta * p.omega - 0.5 * p.delta * p.u * t;
  const double den = (p.tau + 1.0) * (p.tau + 1.0) * t - 4.0 * p.kappa;
  return detail::classify_coupling(num, den, true);
}

enum class TcVerdict {
  Valid,
  AtQuantumCriticalPoint,  // argument == 1, T_c = 0
  BelowQuantumCritical,    // argument > 1
  ArgumentNonPositive,
  Unstable,                // g_c(T_c) would fail its own validity conditions
};

inline std::string_view to_string(TcVerdict v) noexcept {
  switch (v) {
    case TcVerdict::Valid: return "Valid";
    case TcVerdict::AtQuantumCriticalPoint: return "AtQuantumCriticalPoint";
    case TcVerdict::BelowQuantumCritical: return "BelowQuantumCritical";
    case TcVerdict::ArgumentNonPositive: return "ArgumentNonPositive";
    case TcVerdict::Unstable: return "Unstable";
  }
  return "?";
}

struct CriticalTemperature {
  std::optional<double> value;
  double argument = 0.0;  // tanh(Delta / (2 T_c))
  TcVerdict verdict = TcVerdict::Valid;

  bool has_value() const noexcept { return value.has_value(); }
};

/// T_c = Delta / (2 artanh z), z = (2 Delta w + 8 g^2 kappa) / (2 g^2 (tau+1)^2 + Delta U).
inline CriticalTemperature critical_temperature(const ModelParams& p, double unit_tol = 1e-12) {
  p.validate();
  CriticalTemperature out;
  const double num = 2.0 * p.delta * p.omega + 8.0 * p.g * p.g * p.kappa;
  const double den = 2.0 * p.g * p.g * (p.tau + 1.0) * (p.tau + 1.0) + p.delta * p.u;
  const double z = num / den;
  out.argument = z;
  if (!(z > 0.0) || den == 0.0) {
    out.verdict = TcVerdict::ArgumentNonPositive;
    return out;
  }
  if (std::abs(z - 1.0) <= unit_tol) {
    out.verdict = TcVerdict::AtQuantumCriticalPoint;
    out.value = 0.0;
    return out;
  }
  if (z > 1.0) {
    out.verdict = TcVerdict::BelowQuantumCritical;
    return out;
  }
  if ((p.tau + 1.0) * (p.tau + 1.0) * z - 4.0 * p.kappa <= 0.0) {
    out.verdict = TcVerdict::Unstable;
    return out;
  }
  out.value = p.delta / std::log((1.0 + z) / (1.0 - z));
  return out;
}

struct ThermalSolution {
  double alpha_intensive = 0.0;
  double free_energy_per_atom = 0.0;
  Phase phase = Phase::Normal;
  CriticalCoupling g_c;
  std::optional<double> t_c;
  double residual = 0.0;  // stationarity residual at the returned root
};

struct ThermalSolveOptions {
  double alpha_max = 10.0;
  int scan_points = 4000;
  int max_expansions = 6;
};

/// Stationarity residual  2K - [2 g'^2 + U (Delta + U a^2)] tanh(E/T) / (2E)
/// (zero at a nontrivial stationary point of f on the real axis).
inline double stationarity_residual(const ThermalPoint& pt, double abar) {
  const auto& p = pt.params;
  const double a2 = abar * abar;
  const double gp = p.g_prime();
  const double e = 0.5 * std::sqrt(4.0 * a2 * gp * gp + (p.delta + p.u * a2) * (p.delta + p.u * a2));
  const double lhs = 2.0 * detail::stiffness(p);
  return lhs - (2.0 * gp * gp + p.u * (p.delta + p.u * a2)) * std::tanh(e / pt.temperature) / (2.0 * e);
}

/// Functional bounded below on the whole complex plane.
inline bool free_energy_bounded(const ModelParams& p) {
  return std::abs(p.u) < 2.0 * detail::stiffness(p);
}

inline ThermalSolution order_parameter_thermal(const ThermalPoint& pt, const ThermalSolveOptions& opts = {}) {
  if (pt.temperature == 0.0) {
    const auto z = order_parameters(pt.params);
    ThermalSolution s;
    s.alpha_intensive = z.alpha;
    s.free_energy_per_atom = z.energy_per_atom;
    s.phase = z.phase;
    s.g_c = critical_coupling_zero(pt.params);
    s.t_c = critical_temperature(pt.params).value;
    return s;
  }
  pt.validate();
  ThermalSolution sol;
  sol.g_c = critical_coupling_thermal(pt);
  sol.t_c = critical_temperature(pt.params).value;
  const double f0 = free_energy_real(pt, 0.0);
  sol.free_energy_per_atom = f0;
  sol.residual = 0.0;
  if (!free_energy_bounded(pt.params)) {
    sol.phase = Phase::Unstable;
    sol.free_energy_per_atom = -std::numeric_limits<double>::infinity();
    return sol;
  }

  double amax = opts.alpha_max;
  for (int k = 0; k < opts.max_expansions && stationarity_residual(pt, amax) <= 0.0; ++k) amax *= 2.0;

  // df/da = a R(a): a root where R goes from - to + is a minimum, and
  // f(a) - f(0) = int_0^a s R(s) ds stays accurate for tiny a.
  std::vector<double> minima;
  const auto res = [&](double a) { return stationarity_residual(pt, a); };
  double a_prev = 0.0, r_prev = res(0.0);
  for (int i = 1; i <= opts.scan_points; ++i) {
    const double a = amax * i / opts.scan_points;
    const double r = res(a);
    if (r_prev < 0.0 && r >= 0.0) {
      if (r == 0.0) {
        minima.push_back(a);
      } else {
        std::uintmax_t it = 200;
        const auto br = boost::math::tools::toms748_solve(
            res, a_prev, a, r_prev, r, boost::math::tools::eps_tolerance<double>(52), it);
        minima.push_back(0.5 * (br.first + br.second));
      }
    }
    a_prev = a;
    r_prev = r;
  }

  double best_a = 0.0, best_df = 0.0;
  for (double a : minima) {
    double df = 0.0, lo = 0.0;
    for (int k = 1; k <= 8; ++k) {
      const double hi = a * k / 8;
      df += boost::math::quadrature::gauss<double, 20>::integrate(
          [&](double s) { return s * res(s); }, lo, hi);
      lo = hi;
    }
    if (df < best_df) {
      best_a = a;
      best_df = df;
    }
  }

  const bool expect_broken = sol.g_c.has_transition() && std::abs(pt.params.g) > *sol.g_c.value;
  if (expect_broken && best_a == 0.0)
    throw RootNotBracketed("origin is unstable (g > g_c) but no minimum with abar > 0 was found in (0, " +
                           std::to_string(amax) + "]");

  if (best_a > 0.0) {
    sol.alpha_intensive = best_a;
    sol.free_energy_per_atom = f0 + best_df;
    sol.phase = Phase::Superradiant;
    sol.residual = res(best_a);
  }
  return sol;
}

struct CriticalPoint {
  double x = 0.0, y = 0.0, value = 0.0;  // value relative to f(0)
};

struct Landscape {
  std::vector<double> x, y;
  std::vector<double> values;  // row-major, values[iy * x.size() + ix], minus f00
  double f00 = 0.0;
  std::vector<CriticalPoint> minima, maxima;
  Phase phase = Phase::Normal;

  double at(std::size_t ix, std::size_t iy) const { return values[iy * x.size() + ix]; }
};

/// f(x + iy) - f(0) on a regular grid; interior critical points found by
/// 8-neighbour comparison. Ties are broken by raster order so a plateau of
/// two equal cells counts once.
inline Landscape landscape_grid(const ThermalPoint& pt, std::pair<double, double> x_range,
                                std::pair<double, double> y_range, int nx, int ny) {
  pt.validate();
  if (nx < 32 || ny < 32) throw InvalidParameters("landscape resolution must be at least 32 per axis");
  if (!(x_range.second > x_range.first) || !(y_range.second > y_range.first))
    throw InvalidParameters("landscape ranges must be increasing");
  Landscape l;
  l.f00 = free_energy(pt, 0.0);
  l.x.resize(nx);
  l.y.resize(ny);
  for (int i = 0; i < nx; ++i) l.x[i] = x_range.first + (x_range.second - x_range.first) * i / (nx - 1);
  for (int j = 0; j < ny; ++j) l.y[j] = y_range.first + (y_range.second - y_range.first) * j / (ny - 1);
  l.values.resize(static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      l.values[static_cast<std::size_t>(j) * nx + i] = free_energy(pt, {l.x[i], l.y[j]}) - l.f00;

  for (int j = 1; j + 1 < ny; ++j) {
    for (int i = 1; i + 1 < nx; ++i) {
      const double c = l.at(i, j);
      bool is_min = true, is_max = true;
      for (int dj = -1; dj <= 1; ++dj)
        for (int di = -1; di <= 1; ++di) {
          if (di == 0 && dj == 0) continue;
          const double v = l.at(i + di, j + dj);
          const bool earlier = dj < 0 || (dj == 0 && di < 0);
          if (earlier ? !(c < v) : !(c <= v)) is_min = false;
          if (earlier ? !(c > v) : !(c >= v)) is_max = false;
        }
      if (is_min) l.minima.push_back({l.x[i], l.y[j], c});
      if (is_max) l.maxima.push_back({l.x[i], l.y[j], c});
    }
  }
  try {
    l.phase = order_parameter_thermal(pt).phase;
  } catch (const RootNotBracketed&) {
    l.phase = Phase::Unstable;
  }
  return l;
}

}  // namespace dsm
