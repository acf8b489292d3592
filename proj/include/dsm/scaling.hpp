#pragma once

// Finite-size scaling: power-law fits, Q(g_c) ~ N^gamma fits and a
// data-collapse score for the ansatz
//
//   Q = t^beta F(t N^(1/nu)),   t = |1 - g/g_c|.

#include <dsm/errors.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dsm {

enum class ObservableTag { Epsilon, NphDensity, DeltaX, AlphaMF };

inline std::string_view to_string(ObservableTag t) noexcept {
  switch (t) {
    case ObservableTag::Epsilon: return "epsilon";
    case ObservableTag::NphDensity: return "nph_density";
    case ObservableTag::DeltaX: return "delta_x";
    case ObservableTag::AlphaMF: return "alpha_mf";
  }
  return "?";
}

inline std::optional<ObservableTag> parse_observable_tag(std::string_view s) {
  for (auto t : {ObservableTag::Epsilon, ObservableTag::NphDensity, ObservableTag::DeltaX, ObservableTag::AlphaMF})
    if (to_string(t) == s) return t;
  return std::nullopt;
}

struct ScalingCurve {
  std::vector<double> control;
  std::vector<double> values;
  int size = 0;
  ObservableTag tag = ObservableTag::Epsilon;

  void validate() const {
    if (control.size() != values.size())
      throw InvalidParameters("scaling curve: control and values differ in length");
    for (std::size_t i = 1; i < control.size(); ++i)
      if (!(control[i] > control[i - 1])) throw InvalidParameters("scaling curve: control must be strictly increasing");
  }
};

struct Window {
  double lo = 1e-2;
  double hi = 1e-1;

  bool contains(double t) const noexcept { return t >= lo && t <= hi; }
};

struct ExponentFit {
  double exponent = 0.0;
  double std_error = 0.0;
  double intercept = 0.0;
  Window window;
  double r_squared = 0.0;
  std::size_t n_points = 0;
};

namespace detail {

// Ordinary least squares y = a + b x. The caller passes y already referenced
// to one point so that rescaling the observable by a power of two leaves the
// inputs, and hence the slope, bit-identical.
inline ExponentFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  ExponentFit f;
  f.n_points = n;
  f.exponent = sxy / sxx;
  f.intercept = my - f.exponent * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - f.intercept - f.exponent * x[i];
    sse += r * r;
  }
  f.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  f.std_error = n > 2 ? std::sqrt(sse / static_cast<double>(n - 2) / sxx) : 0.0;
  return f;
}

}  // namespace detail

/// Slope of log Q against log |control - critical| over the points whose
/// reduced distance |1 - control/critical| lies in the window.
inline ExponentFit fit_powerlaw(const ScalingCurve& curve, double critical_value, Window window = {}) {
  curve.validate();
  if (!(window.hi > window.lo)) throw WindowEmpty("fit window is empty");
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < curve.control.size(); ++i) {
    const double t = std::abs(1.0 - curve.control[i] / critical_value);
    if (window.contains(t)) idx.push_back(i);
  }
  if (idx.size() < 5)
    throw InsufficientPoints("power-law fit needs at least 5 points in the window, got " + std::to_string(idx.size()));
  for (std::size_t i : idx) {
    if (!(curve.values[i] > 0.0)) throw NonPositiveObservable("observable <= 0 inside the fit window");
    if (curve.control[i] == critical_value) throw InvalidParameters("point at the critical value");
  }
  const double ref = curve.values[idx.front()];
  std::vector<double> x, y;
  for (std::size_t i : idx) {
    x.push_back(std::log(std::abs(curve.control[i] - critical_value)));
    y.push_back(std::log(curve.values[i] / ref));
  }
  auto f = detail::least_squares(x, y);
  f.intercept += std::log(ref);
  f.window = window;
  return f;
}

/// Slope of log Q against log N at the critical point.
inline ExponentFit fit_criticality_n_scaling(std::vector<std::pair<int, double>> values) {
  if (values.size() < 3) throw InsufficientPoints("N-scaling fit needs at least 3 sizes");
  std::sort(values.begin(), values.end());
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i].first == values[i - 1].first) throw InvalidParameters("duplicate system size");
  for (const auto& [n, q] : values) {
    if (n <= 0) throw InvalidParameters("system size must be positive");
    if (!(q > 0.0)) throw NonPositiveObservable("observable <= 0 at N = " + std::to_string(n));
  }
  const double ref = values.front().second;
  std::vector<double> x, y;
  for (const auto& [n, q] : values) {
    x.push_back(std::log(static_cast<double>(n)));
    y.push_back(std::log(q / ref));
  }
  auto f = detail::least_squares(x, y);
  f.intercept += std::log(ref);
  f.window = {static_cast<double>(values.front().first), static_cast<double>(values.back().first)};
  return f;
}

struct CollapseScore {
  double score = 0.0;        // mean squared deviation of ln y
  std::size_t n_points = 0;  // points that had an interpolant to compare with
};

/// Rescale each curve to x = t N^(1/nu), y = Q t^(-beta) (points with t in
/// the window), then compare ln y of every point against the piecewise-linear
/// interpolant of the pooled points of all other curves on the same side of
/// g_c. Points outside the pooled x-range are skipped. Curves are processed
/// in order of N, so the score does not depend on input order.
inline CollapseScore collapse_quality_detail(std::vector<ScalingCurve> curves, double g_c, double beta_q, double nu,
                                             Window window = {}) {
  if (curves.size() < 2) throw InvalidParameters("collapse needs at least 2 curves");
  std::stable_sort(curves.begin(), curves.end(), [](const auto& a, const auto& b) { return a.size < b.size; });
  for (std::size_t i = 0; i < curves.size(); ++i) {
    curves[i].validate();
    if (curves[i].size <= 0) throw InvalidParameters("curve size must be positive");
    if (i > 0 && curves[i].size == curves[i - 1].size) throw InvalidParameters("collapse curves need distinct N");
  }

  struct Pt {
    double x, ly;
  };
  // [side][curve] -> rescaled points sorted by x
  std::vector<std::vector<Pt>> pts[2];
  for (auto& side : pts) side.resize(curves.size());
  for (std::size_t c = 0; c < curves.size(); ++c) {
    const auto& cv = curves[c];
    const double scale = std::pow(static_cast<double>(cv.size), 1.0 / nu);
    for (std::size_t i = 0; i < cv.control.size(); ++i) {
      const double t = std::abs(1.0 - cv.control[i] / g_c);
      if (!window.contains(t) || t == 0.0) continue;
      if (!(cv.values[i] > 0.0)) throw NonPositiveObservable("observable <= 0 inside the collapse window");
      const int side = cv.control[i] > g_c ? 1 : 0;
      pts[side][c].push_back({t * scale, std::log(cv.values[i]) - beta_q * std::log(t)});
    }
    for (auto& side : pts) std::sort(side[c].begin(), side[c].end(), [](Pt a, Pt b) { return a.x < b.x; });
  }

  double sum = 0.0;
  std::size_t n = 0;
  for (auto& side : pts) {
    for (std::size_t c = 0; c < curves.size(); ++c) {
      std::vector<Pt> pool;
      for (std::size_t o = 0; o < curves.size(); ++o)
        if (o != c) pool.insert(pool.end(), side[o].begin(), side[o].end());
      if (pool.size() < 2) continue;
      std::stable_sort(pool.begin(), pool.end(), [](Pt a, Pt b) { return a.x < b.x; });
      for (const Pt& p : side[c]) {
        if (p.x < pool.front().x || p.x > pool.back().x) continue;
        auto hi = std::lower_bound(pool.begin(), pool.end(), p.x, [](Pt a, double x) { return a.x < x; });
        double ly;
        if (hi->x == p.x) {
          ly = hi->ly;
        } else {
          const auto lo = hi - 1;
          const double w = (p.x - lo->x) / (hi->x - lo->x);
          ly = lo->ly + w * (hi->ly - lo->ly);
        }
        sum += (p.ly - ly) * (p.ly - ly);
        ++n;
      }
    }
  }
  if (n == 0) throw WindowEmpty("no overlapping points between curves inside the collapse window");
  return {sum / static_cast<double>(n), n};
}

inline double collapse_quality(std::vector<ScalingCurve> curves, double g_c, double beta_q, double nu,
                               Window window = {}) {
  return collapse_quality_detail(std::move(curves), g_c, beta_q, nu, window).score;
}

}  // namespace dsm
