#pragma once

// Zero-temperature mean-field theory in the Holstein-Primakoff picture.
//
// With a -> sqrt(N) alpha and b -> sqrt(N) varsigma (b+b = Jz + N/2) the
// ground-state energy per atom is
//
//   e(alpha, s) = (w - U/2) alpha^2 + U alpha^2 s^2 + Delta (s^2 - 1/2)
//                 + 2 g' alpha s sqrt(1 - s^2) + 4 kappa g^2/Delta alpha^2
//
// with g' = g (1 + tau). The sqrt(1 - s^2) factor comes from
// J+ = b+ sqrt(N - b+b); it is what makes the functional bounded for U = 0
// and produces the closed-form order parameters below.

#include <dsm/errors.hpp>
#include <dsm/model.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>

namespace dsm {

enum class Phase { Normal, Superradiant, Unstable };

inline std::string_view to_string(Phase p) noexcept {
  switch (p) {
    case Phase::Normal: return "Normal";
    case Phase::Superradiant: return "Superradiant";
    case Phase::Unstable: return "Unstable";
  }
  return "?";
}

enum class CouplingVerdict {
  Valid,
  NumeratorNegative,       // Delta w - Delta U/2 (x tanh) fails its sign condition
  DenominatorNonPositive,  // (tau + 1)^2 (x tanh) - 4 kappa <= 0
  Unstable,                // both fail: the ratio is positive but meaningless
};

inline std::string_view to_string(CouplingVerdict v) noexcept {
  switch (v) {
    case CouplingVerdict::Valid: return "Valid";
    case CouplingVerdict::NumeratorNegative: return "NumeratorNegative";
    case CouplingVerdict::DenominatorNonPositive: return "DenominatorNonPositive";
    case CouplingVerdict::Unstable: return "Unstable";
  }
  return "?";
}

/// A critical coupling, or the reason there is none.
struct CriticalCoupling {
  std::optional<double> value;
  double formula_value = std::numeric_limits<double>::quiet_NaN();  // sqrt(num/den) when real
  double numerator = 0.0;
  double denominator = 0.0;
  CouplingVerdict verdict = CouplingVerdict::Valid;

  bool has_transition() const noexcept { return value.has_value(); }
};

namespace detail {

inline CriticalCoupling classify_coupling(double num, double den, bool num_may_vanish) {
  CriticalCoupling c;
  c.numerator = num;
  c.denominator = den;
  const double ratio = num / den;
  if (den != 0.0 && ratio >= 0.0) c.formula_value = std::sqrt(ratio);
  const bool num_ok = num_may_vanish ? num >= 0.0 : num > 0.0;
  const bool den_ok = den > 0.0;
  if (num_ok && den_ok) {
    c.verdict = CouplingVerdict::Valid;
    c.value = c.formula_value;
  } else if (!num_ok && !den_ok) {
    c.verdict = CouplingVerdict::Unstable;
  } else if (!num_ok) {
    c.verdict = CouplingVerdict::NumeratorNegative;
  } else {
    c.verdict = CouplingVerdict::DenominatorNonPositive;
  }
  return c;
}

}  // namespace detail

/// g_c0 = sqrt(Delta w - Delta U/2) / sqrt((tau + 1)^2 - 4 kappa).
inline CriticalCoupling critical_coupling_zero(const ModelParams& p) {
  p.validate();
  const double num = p.delta * p.omega - 0.5 * p.delta * p.u;
  const double den = (p.tau + 1.0) * (p.tau + 1.0) - 4.0 * p.kappa;
  return detail::classify_coupling(num, den, false);
}

inline double energy_per_atom(double alpha, double varsigma, const ModelParams& p) {
  const double s2 = varsigma * varsigma;
  if (s2 > 1.0) throw UnphysicalVarsigma("varsigma^2 = " + std::to_string(s2) + " exceeds 1");
  const double a2 = alpha * alpha;
  return (p.omega - 0.5 * p.u) * a2 + p.u * a2 * s2 + p.delta * (s2 - 0.5) +
         2.0 * p.g_prime() * alpha * varsigma * std::sqrt(1.0 - s2) +
         4.0 * p.kappa * p.g * p.g / p.delta * a2;
}

struct MeanFieldValidity {
  bool numerator_positive = false;    // Delta w - Delta U/2 > 0
  bool denominator_positive = false;  // (tau + 1)^2 - 4 kappa > 0
  bool below_continuum = true;        // U < 2 w
  bool beyond_rabi_stark = false;     // U <= -2 w, informational
};

struct MeanFieldSolutionZero {
  double alpha = 0.0;     // >= 0; the stationary point has alpha and varsigma of opposite sign for g' > 0
  double varsigma = 0.0;  // >= 0
  double energy_per_atom = 0.0;
  Phase phase = Phase::Normal;
  MeanFieldValidity validity;
};

class ClosedFormBranchError : public Error {
public:
  ClosedFormBranchError(const std::string& what, double closed_form_s2, MeanFieldSolutionZero minimizer)
      : Error(what), closed_form_s2_(closed_form_s2), minimizer_(minimizer) {}
  double closed_form_varsigma_squared() const noexcept { return closed_form_s2_; }
  const MeanFieldSolutionZero& minimizer_solution() const noexcept { return minimizer_; }

private:
  double closed_form_s2_;
  MeanFieldSolutionZero minimizer_;
};

inline MeanFieldValidity validity_of(const ModelParams& p) {
  const auto c = critical_coupling_zero(p);
  MeanFieldValidity v;
  v.numerator_positive = c.numerator > 0.0;
  v.denominator_positive = c.denominator > 0.0;
  v.below_continuum = p.u < 2.0 * p.omega;
  v.beyond_rabi_stark = p.u <= -2.0 * p.omega;
  return v;
}

/// The alpha^2 coefficient of the energy ranges over K -+ U/2 as varsigma
/// goes from 0 to 1 (K = w + 4 kappa g^2/Delta); the functional is bounded
/// below only while both ends are positive.
inline bool energy_bounded(const ModelParams& p) {
  const double k = p.omega + 4.0 * p.kappa * p.g * p.g / p.delta;
  return std::abs(p.u) < 2.0 * k;
}

/// varsigma^2 from the stationarity conditions, as the root of
///   U (g'^2 + Delta U) s^2 + 2 A (g'^2 + Delta U) s - A (g'^2 - Delta A) = 0,
///   A = w - U/2 + 4 kappa g^2 / Delta,
/// written in the form that stays finite as U -> 0, where it reduces to
/// s = (1 - Delta A / g'^2) / 2. NaN when the root is not real.
inline double varsigma_squared(const ModelParams& p) {
  const double gp2 = p.g_prime() * p.g_prime();
  const double a0 = p.omega - 0.5 * p.u + 4.0 * p.kappa * p.g * p.g / p.delta;
  const double q = gp2 + p.delta * p.u;
  const double qa = p.u * q;
  const double qb = 2.0 * a0 * q;
  const double qc = a0 * (gp2 - p.delta * a0);
  const double disc = qb * qb + 4.0 * qa * qc;
  if (disc < 0.0 || !(qb > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return 2.0 * qc / (qb + std::sqrt(disc));
}

/// The same root in the explicit form
///   s = 1/2 - (Delta w + 4 g^2 kappa)/(U Delta) + mu,
///   mu = sqrt(g'^2 (g'^2 + U Delta)(4 (Delta w + 4 g^2 kappa)^2 - U^2 Delta^2))
///        / (2 U Delta (g'^2 + U Delta)).
/// Requires U != 0; loses precision for small |U|.
inline double varsigma_squared_explicit(const ModelParams& p) {
  const double gp2 = p.g_prime() * p.g_prime();
  const double pw = p.delta * p.omega + 4.0 * p.g * p.g * p.kappa;
  const double ud = p.u * p.delta;
  const double radicand = gp2 * (gp2 + ud) * (4.0 * pw * pw - ud * ud);
  if (radicand < 0.0 || ud == 0.0) return std::numeric_limits<double>::quiet_NaN();
  const double mu = std::sqrt(radicand) / (2.0 * ud * (gp2 + ud));
  return 0.5 - pw / ud + mu;
}

/// Photonic order parameter for given varsigma (sign convention alpha >= 0
/// for varsigma >= 0, g' >= 0).
inline double alpha_of_varsigma(double varsigma, const ModelParams& p) {
  const double s2 = varsigma * varsigma;
  const double den = 2.0 * p.delta * p.omega + 8.0 * p.g * p.g * p.kappa + (2.0 * s2 - 1.0) * p.u * p.delta;
  return 2.0 * varsigma * std::sqrt(std::max(0.0, 1.0 - s2)) * p.delta * p.g_prime() / den;
}

struct MinimizerOptions {
  double alpha_max = 3.0;
  int alpha_points = 201;     // grid over [-alpha_max, alpha_max]
  int varsigma_points = 101;  // grid over [0, 1]
  double step_tol = 1e-10;
};

namespace detail {

struct Point2 {
  double a = 0.0, s = 0.0, e = 0.0;
};

// Nelder-Mead on (alpha, varsigma), varsigma clamped to [0, 1].
inline Point2 nelder_mead(const ModelParams& p, Point2 start, double step_a, double step_s, double tol) {
  const auto make = [&](double a, double s) {
    s = std::clamp(s, 0.0, 1.0);
    return Point2{a, s, energy_per_atom(a, s, p)};
  };
  std::array<Point2, 3> x{make(start.a, start.s), make(start.a + step_a, start.s),
                          make(start.a, start.s + (start.s + step_s > 1.0 ? -step_s : step_s))};
  const auto by_e = [](const Point2& l, const Point2& r) { return l.e < r.e; };
  for (int it = 0; it < 100000; ++it) {
    std::sort(x.begin(), x.end(), by_e);
    const double size = std::max({std::abs(x[1].a - x[0].a), std::abs(x[2].a - x[0].a),
                                  std::abs(x[1].s - x[0].s), std::abs(x[2].s - x[0].s)});
    if (size < tol) break;
    const double ca = 0.5 * (x[0].a + x[1].a), cs = 0.5 * (x[0].s + x[1].s);
    const Point2 r = make(2.0 * ca - x[2].a, 2.0 * cs - x[2].s);
    if (r.e < x[0].e) {
      const Point2 ex = make(3.0 * ca - 2.0 * x[2].a, 3.0 * cs - 2.0 * x[2].s);
      x[2] = ex.e < r.e ? ex : r;
    } else if (r.e < x[1].e) {
      x[2] = r;
    } else {
      const Point2 c = r.e < x[2].e ? make(ca + 0.5 * (r.a - ca), cs + 0.5 * (r.s - cs))
                                    : make(ca + 0.5 * (x[2].a - ca), cs + 0.5 * (x[2].s - cs));
      if (c.e < std::min(r.e, x[2].e)) {
        x[2] = c;
      } else {
        for (int i = 1; i < 3; ++i) x[i] = make(0.5 * (x[0].a + x[i].a), 0.5 * (x[0].s + x[i].s));
      }
    }
  }
  return *std::min_element(x.begin(), x.end(), by_e);
}

}  // namespace detail

/// Brute-force minimization of energy_per_atom: grid scan, then Nelder-Mead
/// from the best grid point on each side of alpha = 0 and from the overall
/// best. Derivative-free and independent of the closed forms.
inline MeanFieldSolutionZero minimize_energy(const ModelParams& p, const MinimizerOptions& opts = {}) {
  p.validate();
  double amax = opts.alpha_max;
  detail::Point2 best{0.0, 0.0, energy_per_atom(0.0, 0.0, p)};
  // Radial probe far outside the grid catches a functional unbounded below.
  for (int j = 0; j < opts.varsigma_points; ++j) {
    const double s = 1.0 / (opts.varsigma_points - 1) * j;
    const double e = energy_per_atom(1e6 * amax, s, p);
    if (e < best.e) best = {1e6 * amax, s, e};
  }
  for (int expand = 0; expand < 8; ++expand) {
    const double da = 2.0 * amax / (opts.alpha_points - 1);
    const double ds = 1.0 / (opts.varsigma_points - 1);
    std::array<detail::Point2, 3> seeds;
    for (auto& s : seeds) s.e = std::numeric_limits<double>::infinity();
    for (int i = 0; i < opts.alpha_points; ++i) {
      const double a = -amax + da * i;
      for (int j = 0; j < opts.varsigma_points; ++j) {
        const double s = ds * j;
        const detail::Point2 q{a, s, energy_per_atom(a, s, p)};
        if (q.e < seeds[0].e) seeds[0] = q;
        if (a < 0.0 && s > 0.0 && q.e < seeds[1].e) seeds[1] = q;
        if (a > 0.0 && s > 0.0 && q.e < seeds[2].e) seeds[2] = q;
      }
    }
    if (std::abs(best.a) >= 0.95 * amax) break;
    best = seeds[0];
    for (const auto& seed : seeds) {
      auto q = detail::nelder_mead(p, seed, da, ds, opts.step_tol);
      q = detail::nelder_mead(p, q, 0.1 * da, 0.1 * ds, opts.step_tol);
      if (q.e < best.e) best = q;
    }
    if (std::abs(best.a) < 0.95 * amax) break;
    amax *= 2.0;
  }
  MeanFieldSolutionZero sol;
  sol.validity = validity_of(p);
  if (!std::isfinite(best.e) || std::abs(best.a) >= 0.95 * amax) {
    sol.phase = Phase::Unstable;
    sol.alpha = std::numeric_limits<double>::infinity();
    sol.varsigma = best.s;
    sol.energy_per_atom = -std::numeric_limits<double>::infinity();
    return sol;
  }
  sol.alpha = std::abs(best.a);
  sol.varsigma = best.s;
  sol.energy_per_atom = best.e;
  const bool trivial = best.e > -0.5 * p.delta - 1e-14 || sol.alpha < 1e-7;
  sol.phase = trivial ? Phase::Normal : Phase::Superradiant;
  if (trivial) {
    sol.alpha = 0.0;
    sol.varsigma = 0.0;
    sol.energy_per_atom = -0.5 * p.delta;
  }
  return sol;
}

/// Closed-form order parameters: Normal for g <= g_c0 (or no transition),
/// otherwise varsigma from the stationarity quadratic and alpha from
/// alpha_of_varsigma.
inline MeanFieldSolutionZero order_parameters(const ModelParams& p) {
  p.validate();
  MeanFieldSolutionZero sol;
  sol.validity = validity_of(p);
  sol.energy_per_atom = -0.5 * p.delta;
  if (!energy_bounded(p)) {
    sol.phase = Phase::Unstable;
    sol.alpha = std::numeric_limits<double>::infinity();
    sol.energy_per_atom = -std::numeric_limits<double>::infinity();
    return sol;
  }
  const auto crit = critical_coupling_zero(p);
  if (!crit.has_transition() || std::abs(p.g) <= *crit.value) return sol;

  const double s2 = varsigma_squared(p);
  if (!(s2 > 0.0) || s2 > 1.0 || !std::isfinite(s2)) {
    const auto num = minimize_energy(p);
    if (num.phase == Phase::Superradiant)
      throw ClosedFormBranchError("closed-form varsigma^2 = " + std::to_string(s2) +
                                      " is unphysical but the energy has a nontrivial minimum",
                                  s2, num);
    return sol;
  }
  const double vs = std::sqrt(s2);
  const double a = alpha_of_varsigma(vs, p);
  sol.varsigma = vs;
  sol.alpha = std::abs(a);
  // The minimum pairs alpha and varsigma with opposite signs when g' > 0.
  sol.energy_per_atom = energy_per_atom(-a, vs, p);
  sol.phase = Phase::Superradiant;
  return sol;
}

}  // namespace dsm
