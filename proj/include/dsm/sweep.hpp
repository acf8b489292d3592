#pragma once

// Grid sweeps over one or two parameters. Every grid point is evaluated
// independently (ED, ground-state mean field, thermal mean field) and rows
// come back in grid order whatever the worker count.

#include <dsm/config.hpp>
#include <dsm/errors.hpp>
#include <dsm/meanfield_thermal.hpp>
#include <dsm/meanfield_zero.hpp>
#include <dsm/model.hpp>
#include <dsm/spectra.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

#ifndef DSM_VERSION
#define DSM_VERSION "0.0.0"
#endif

namespace dsm {

enum class Axis { G, U, Tau, Kappa, Delta, T, N };

inline std::string_view to_string(Axis a) noexcept {
  switch (a) {
    case Axis::G: return "g";
    case Axis::U: return "U";
    case Axis::Tau: return "tau";
    case Axis::Kappa: return "kappa";
    case Axis::Delta: return "delta";
    case Axis::T: return "T";
    case Axis::N: return "N";
  }
  return "?";
}

inline Axis parse_axis(std::string_view s) {
  for (auto a : {Axis::G, Axis::U, Axis::Tau, Axis::Kappa, Axis::Delta, Axis::T, Axis::N})
    if (to_string(a) == s) return a;
  throw ConfigError("unknown axis '" + std::string(s) + "' (expected g, U, tau, kappa, delta, T or N)");
}

struct AxisSpec {
  Axis axis = Axis::G;
  double min = 0.0;
  double max = 0.0;
  int points = 2;
  std::vector<double> list;  // explicit values; overrides min/max/points

  std::vector<double> values() const {
    if (!list.empty()) return list;
    std::vector<double> v(points);
    for (int i = 0; i < points; ++i) v[i] = points == 1 ? min : min + (max - min) * i / (points - 1);
    return v;
  }
};

enum class ObservableKind { Ed, MeanFieldZero, Thermal };

struct ObservableInfo {
  std::string_view name;
  ObservableKind kind;
  std::string_view help;
};

inline const std::vector<ObservableInfo>& known_observables() {
  static const std::vector<ObservableInfo> v = {
      {"e0", ObservableKind::Ed, "ground-state energy"},
      {"epsilon", ObservableKind::Ed, "gap between the two lowest states of both parity sectors"},
      {"nph_total", ObservableKind::Ed, "<a+a>"},
      {"nph_density", ObservableKind::Ed, "<a+a>/N"},
      {"delta_x", ObservableKind::Ed, "standard deviation of x = a + a+"},
      {"jz_density", ObservableKind::Ed, "<Jz>/N"},
      {"gc0", ObservableKind::MeanFieldZero, "ground-state critical coupling (nan if none)"},
      {"alpha_mf", ObservableKind::MeanFieldZero, "photonic order parameter at T = 0"},
      {"varsigma_mf", ObservableKind::MeanFieldZero, "atomic order parameter at T = 0"},
      {"energy_mf", ObservableKind::MeanFieldZero, "mean-field energy per atom at T = 0"},
      {"phase_mf", ObservableKind::MeanFieldZero, "Normal, Superradiant or Unstable at T = 0"},
      {"gc_t", ObservableKind::Thermal, "critical coupling at temperature T (nan if none)"},
      {"gc_t_formula", ObservableKind::Thermal, "raw formula value of the thermal critical coupling"},
      {"tc", ObservableKind::Thermal, "critical temperature (nan if none)"},
      {"alpha_t", ObservableKind::Thermal, "intensive order parameter at temperature T"},
      {"free_energy_t", ObservableKind::Thermal, "free energy per atom at the returned order parameter"},
      {"phase_t", ObservableKind::Thermal, "Normal, Superradiant or Unstable at temperature T"},
  };
  return v;
}

inline const ObservableInfo* find_observable(std::string_view name) {
  for (const auto& o : known_observables())
    if (o.name == name) return &o;
  return nullptr;
}

struct EdSettings {
  int k_per_sector = 1;
  int n_max = 0;  // 0: adaptive
  double tail_tol = 1e-8;
  double energy_tol = 1e-8;
  CutoffPolicy policy;
  SolverOptions solver;
};

struct SweepSpec {
  ModelParams base;
  double temperature = 0.0;
  std::optional<AxisSpec> axis1, axis2;
  bool g_relative = false;  // g axis and base g in units of a critical coupling
  bool g_thermal = false;   // ... of g_c at `temperature` rather than g_c0
  std::vector<std::string> observables;
  EdSettings ed;
  int workers = 1;

  bool needs_ed() const {
    for (const auto& o : observables)
      if (find_observable(o)->kind == ObservableKind::Ed) return true;
    return false;
  }

  void validate() const {
    try {
      base.validate();
    } catch (const InvalidParameters& e) {
      throw ConfigError(e.what());
    }
    if (temperature < 0.0 || !std::isfinite(temperature)) throw ConfigError("temperature must be >= 0");
    for (const auto* a : {&axis1, &axis2}) {
      if (!*a) continue;
      if (!(*a)->list.empty()) {
        for (double v : (*a)->list)
          if (!std::isfinite(v)) throw ConfigError("axis values must be finite");
        continue;
      }
      if (!std::isfinite((*a)->min) || !std::isfinite((*a)->max)) throw ConfigError("axis range must be finite");
      if ((*a)->points < 1) throw ConfigError("axis point count must be positive");
      if ((*a)->points == 1 && (*a)->min != (*a)->max)
        throw ConfigError("a single-point axis needs min == max");
      if ((*a)->points >= 2 && !((*a)->max > (*a)->min)) throw ConfigError("axis range must be increasing");
    }
    if (axis2 && !axis1) throw ConfigError("axis2 given without axis1");
    if (axis1 && axis2 && axis1->axis == axis2->axis) throw ConfigError("axis1 and axis2 must differ");
    for (const auto& o : observables)
      if (!find_observable(o)) throw ConfigError("unknown observable '" + o + "'");
    for (std::size_t i = 0; i < observables.size(); ++i)
      for (std::size_t j = 0; j < i; ++j)
        if (observables[i] == observables[j]) throw ConfigError("observable '" + observables[i] + "' listed twice");
    if (ed.k_per_sector < 1) throw ConfigError("k_per_sector must be positive");
    if (ed.n_max < 0) throw ConfigError("n_max must be >= 0");
    if (workers < 0) throw ConfigError("workers must be >= 0");
  }

  static SweepSpec from_config(const Config& c) {
    SweepSpec s;
    s.base = model_params(c);
    s.temperature = c.get_double("temperature");
    for (int i : {1, 2}) {
      const std::string pre = "axis" + std::to_string(i);
      const auto name = c.get_string(pre);
      if (name.empty()) continue;
      AxisSpec a;
      a.axis = parse_axis(name);
      a.min = c.get_double(pre + "_min");
      a.max = c.get_double(pre + "_max");
      a.points = static_cast<int>(c.get_int(pre + "_points"));
      a.list = parse_number_list(c.get_string(pre + "_values"), pre + "_values");
      (i == 1 ? s.axis1 : s.axis2) = a;
    }
    const auto scale = c.get_string("g_scale");
    if (scale != "absolute" && scale != "gc0" && scale != "gc_t")
      throw ConfigError("g_scale must be 'absolute', 'gc0' or 'gc_t'");
    s.g_relative = scale != "absolute";
    s.g_thermal = scale == "gc_t";
    s.observables = split_list(c.get_string("observables"));
    s.ed.k_per_sector = static_cast<int>(c.get_int("k_per_sector"));
    s.ed.n_max = static_cast<int>(c.get_int("n_max"));
    s.ed.tail_tol = c.get_double("tail_tol");
    s.ed.energy_tol = c.get_double("energy_tol");
    s.ed.policy.n_initial = static_cast<int>(c.get_int("n_initial"));
    s.ed.policy.n_cap = static_cast<int>(c.get_int("n_cap"));
    s.ed.policy.growth = c.get_double("growth");
    s.ed.solver.tol = c.get_double("tol");
    s.ed.solver.dense_threshold = static_cast<std::size_t>(c.get_int("dense_threshold"));
    s.ed.solver.seed = static_cast<std::uint64_t>(c.get_int("seed"));
    s.workers = static_cast<int>(c.get_int("workers"));
    s.validate();
    return s;
  }
};

using Cell = std::variant<double, std::string>;

struct Provenance {
  std::string tool = "dsm";
  std::string version = DSM_VERSION;
  std::uint64_t config_hash = 0;
  std::string config;  // canonical key=value echo
};

struct SweepResult {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  Provenance provenance;

  std::size_t column_index(std::string_view name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return i;
    throw ConfigError("no column '" + std::string(name) + "'");
  }

  std::size_t error_rows() const {
    if (columns.empty() || columns.back() != "error") return 0;
    std::size_t n = 0;
    for (const auto& r : rows)
      if (const auto* s = std::get_if<std::string>(&r.back()); s && !s->empty()) ++n;
    return n;
  }
};

namespace detail {

inline void apply_axis(Axis a, double v, ModelParams& p, double& temperature, double& g_raw) {
  switch (a) {
    case Axis::G: g_raw = v; break;
    case Axis::U: p.u = v; break;
    case Axis::Tau: p.tau = v; break;
    case Axis::Kappa: p.kappa = v; break;
    case Axis::Delta: p.delta = v; break;
    case Axis::T: temperature = v; break;
    case Axis::N:
      if (v < 1.0 || v != std::round(v)) throw InvalidParameters("N axis value must be a positive integer");
      p.n_atoms = static_cast<int>(v);
      break;
  }
}

inline double or_nan(const std::optional<double>& v) {
  return v ? *v : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace detail

inline std::vector<std::string> sweep_columns(const SweepSpec& s) {
  std::vector<std::string> cols;
  for (const auto* a : {&s.axis1, &s.axis2}) {
    if (!*a) continue;
    if ((*a)->axis == Axis::G && s.g_relative)
      cols.emplace_back(s.g_thermal ? "g_over_gc_t" : "g_over_gc0");
    else
      cols.emplace_back(to_string((*a)->axis));
  }
  if (s.g_relative) cols.emplace_back("g");
  for (const auto& o : s.observables) cols.push_back(o);
  if (s.needs_ed()) {
    cols.emplace_back("n_max_used");
    cols.emplace_back("max_residual");
  }
  cols.emplace_back("converged");
  cols.emplace_back("error");
  return cols;
}

/// Model parameters and temperature at one grid point, with a relative g
/// converted to an absolute one.
inline std::pair<ModelParams, double> point_params(const SweepSpec& s, const std::vector<double>& axis_values) {
  ModelParams p = s.base;
  double temperature = s.temperature;
  double g_raw = s.base.g;
  const Axis axes[2] = {s.axis1 ? s.axis1->axis : Axis::G, s.axis2 ? s.axis2->axis : Axis::G};
  for (std::size_t i = 0; i < axis_values.size(); ++i) detail::apply_axis(axes[i], axis_values[i], p, temperature, g_raw);
  p.g = g_raw;
  if (s.g_relative) {
    const auto gc = s.g_thermal && temperature > 0.0 ? critical_coupling_thermal(ThermalPoint{p, temperature})
                                                     : critical_coupling_zero(p);
    if (!gc.has_transition()) throw InvalidParameters("relative g scale but there is no transition to scale by");
    p.g = g_raw * *gc.value;
  }
  p.validate();
  if (temperature < 0.0) throw InvalidParameters("temperature must be >= 0");
  return {p, temperature};
}

/// ED spectrum at one point with the spec's cutoff settings.
inline SpectrumResult ed_spectrum(const EdSettings& ed, const ModelParams& p) {
  return ed.n_max > 0 ? solve_sectors(p, ed.n_max, ed.k_per_sector, ed.solver)
                      : converge_cutoff(p, ed.k_per_sector, ed.tail_tol, ed.energy_tol, ed.policy, ed.solver);
}

/// One grid point. Errors are caught and reported in the row.
inline std::vector<Cell> evaluate_point(const SweepSpec& s, const std::vector<double>& axis_values) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<Cell> row;
  for (double v : axis_values) row.emplace_back(v);
  const std::size_t obs_begin = row.size() + (s.g_relative ? 1 : 0);
  const std::size_t tail = s.needs_ed() ? 4 : 2;
  row.resize(obs_begin + s.observables.size() + tail, Cell(nan));
  row[row.size() - 2] = 0.0;
  row.back() = std::string();

  try {
    const auto [p, temperature] = point_params(s, axis_values);
    if (s.g_relative) row[axis_values.size()] = p.g;

    std::optional<Observables> ed;
    SpectrumResult spec;
    if (s.needs_ed()) {
      spec = ed_spectrum(s.ed, p);
      ed = observables(spec, p);
    }
    std::optional<MeanFieldSolutionZero> mf0;
    std::optional<ThermalSolution> mft;
    const ThermalPoint tp{p, temperature};

    for (std::size_t i = 0; i < s.observables.size(); ++i) {
      const auto& o = s.observables[i];
      Cell& c = row[obs_begin + i];
      const auto* info = find_observable(o);
      if (info->kind == ObservableKind::MeanFieldZero && !mf0 && o != "gc0") mf0 = order_parameters(p);
      if (info->kind == ObservableKind::Thermal && !mft && (o == "alpha_t" || o == "free_energy_t" || o == "phase_t"))
        mft = order_parameter_thermal(tp);
      if (o == "e0") c = ed->e0;
      else if (o == "epsilon") c = ed->epsilon;
      else if (o == "nph_total") c = ed->nph_total;
      else if (o == "nph_density") c = ed->nph_density;
      else if (o == "delta_x") c = ed->delta_x;
      else if (o == "jz_density") c = ed->jz_density;
      else if (o == "gc0") c = detail::or_nan(critical_coupling_zero(p).value);
      else if (o == "alpha_mf") c = mf0->alpha;
      else if (o == "varsigma_mf") c = mf0->varsigma;
      else if (o == "energy_mf") c = mf0->energy_per_atom;
      else if (o == "phase_mf") c = std::string(to_string(mf0->phase));
      else if (o == "gc_t" || o == "gc_t_formula") {
        const auto cc = temperature > 0.0 ? critical_coupling_thermal(tp) : critical_coupling_zero(p);
        c = o == "gc_t" ? detail::or_nan(cc.value) : cc.formula_value;
      }
      else if (o == "tc") c = detail::or_nan(critical_temperature(p).value);
      else if (o == "alpha_t") c = mft->alpha_intensive;
      else if (o == "free_energy_t") c = mft->free_energy_per_atom;
      else if (o == "phase_t") c = std::string(to_string(mft->phase));
    }
    bool converged = true;
    if (ed) {
      row[row.size() - 4] = static_cast<double>(spec.n_max_used);
      row[row.size() - 3] = spec.max_residual();
      converged = spec.all_converged();
    }
    row[row.size() - 2] = converged ? 1.0 : 0.0;
  } catch (const std::exception& e) {
    std::string msg = e.what();
    for (auto& ch : msg)
      if (ch == '\n' || ch == '\r') ch = ' ';
    row.back() = msg.empty() ? std::string("error") : msg;
    row[row.size() - 2] = 0.0;
  }
  return row;
}

inline std::vector<std::vector<double>> sweep_grid(const SweepSpec& s) {
  std::vector<std::vector<double>> grid;
  if (!s.axis1) {
    grid.emplace_back();
    return grid;
  }
  const auto v1 = s.axis1->values();
  const auto v2 = s.axis2 ? s.axis2->values() : std::vector<double>{};
  for (double a : v1) {
    if (!s.axis2) {
      grid.push_back({a});
      continue;
    }
    for (double b : v2) grid.push_back({a, b});
  }
  return grid;
}

/// Evaluate the whole grid. Row order is axis1-major; output is identical for
/// any worker count. With no observables requested the result has a header
/// and no rows.
inline SweepResult run_sweep(const SweepSpec& s, Provenance provenance = {}) {
  s.validate();
  SweepResult out;
  out.columns = sweep_columns(s);
  out.provenance = std::move(provenance);
  if (s.observables.empty()) return out;
  const auto grid = sweep_grid(s);
  out.rows.resize(grid.size());
  unsigned workers = s.workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : static_cast<unsigned>(s.workers);
  workers = std::min<unsigned>(workers, static_cast<unsigned>(grid.size()));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < grid.size(); i = next++) out.rows[i] = evaluate_point(s, grid[i]);
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  return out;
}

struct BoundaryPoint {
  double other = std::numeric_limits<double>::quiet_NaN();  // value of the other axis
  std::optional<double> g;                                  // first upward crossing along g
};

/// First upward threshold crossing of `column` along `g_column`, linearly
/// interpolated, for each value of `other_column` (one line if empty).
inline std::vector<BoundaryPoint> extract_boundary(const SweepResult& r, std::string_view column, double threshold,
                                                   std::string_view g_column = "g",
                                                   std::string_view other_column = "") {
  const auto gi = r.column_index(g_column);
  const auto ci = r.column_index(column);
  std::optional<std::size_t> oi;
  if (!other_column.empty()) oi = r.column_index(other_column);
  const auto num = [](const Cell& c) {
    const auto* d = std::get_if<double>(&c);
    return d ? *d : std::numeric_limits<double>::quiet_NaN();
  };
  std::vector<BoundaryPoint> out;
  std::vector<std::pair<double, double>> line;
  auto flush = [&](double other) {
    std::sort(line.begin(), line.end());
    BoundaryPoint b;
    b.other = other;
    for (std::size_t i = 1; i < line.size(); ++i) {
      const auto [g0, q0] = line[i - 1];
      const auto [g1, q1] = line[i];
      if (std::isnan(q0) || std::isnan(q1)) continue;
      if (q0 < threshold && q1 >= threshold) {
        b.g = g0 + (threshold - q0) * (g1 - g0) / (q1 - q0);
        break;
      }
    }
    out.push_back(b);
    line.clear();
  };
  double current = std::numeric_limits<double>::quiet_NaN();
  for (const auto& row : r.rows) {
    const double other = oi ? num(row[*oi]) : 0.0;
    if (!line.empty() && other != current) flush(current);
    current = other;
    line.emplace_back(num(row[gi]), num(row[ci]));
  }
  if (!line.empty()) flush(current);
  return out;
}

}  // namespace dsm
