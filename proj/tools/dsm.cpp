// dsm: command-line front end. Every subcommand reads one key = value config
// file plus --set key=value overrides.
//
// exit codes: 0 ok, 1 config error, 2 partial failure, 3 I/O failure

#include <dsm/config.hpp>
#include <dsm/io.hpp>
#include <dsm/meanfield_thermal.hpp>
#include <dsm/meanfield_zero.hpp>
#include <dsm/scaling.hpp>
#include <dsm/spectra.hpp>
#include <dsm/sweep.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace {

using namespace dsm;
using ordered_json = nlohmann::ordered_json;

enum Exit { kOk = 0, kConfig = 1, kPartial = 2, kIo = 3 };

struct Inputs {
  std::string config_path;
  std::vector<std::string> overrides;
};

Config load(const Inputs& in) {
  Config c = in.config_path.empty() ? Config{} : Config::load(in.config_path);
  for (const auto& kv : in.overrides) c.apply_override(kv);
  return c;
}

Provenance provenance_of(const Config& c) {
  Provenance p;
  p.config_hash = c.hash();
  p.config = c.canonical();
  return p;
}

// stdout when `path` is empty
void deliver(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text << std::flush;
    if (!std::cout) throw IoError("write to stdout failed");
  } else {
    write_file(path, text);
  }
}

std::string render(const SweepResult& r, Format f) {
  std::ostringstream s;
  emit(r, f, s);
  return s.str();
}

// Ordered key/value report, printed as "key = value" lines or one JSON object.
class Report {
public:
  void add(const std::string& k, double v) { items_.push_back({k, v}); }
  void add(const std::string& k, std::string v) { items_.push_back({k, std::move(v)}); }
  void add(const std::string& k, const std::optional<double>& v) {
    add(k, v ? *v : std::numeric_limits<double>::quiet_NaN());
  }

  std::string str(Format f, const Provenance& prov) const {
    if (f == Format::Json) {
      ordered_json j;
      j["provenance"] = {{"tool", prov.tool}, {"version", prov.version}, {"config_hash", detail::hex64(prov.config_hash)}};
      for (const auto& [k, v] : items_) {
        if (const auto* d = std::get_if<double>(&v))
          j[k] = *d;
        else
          j[k] = std::get<std::string>(v);
      }
      return j.dump(2) + "\n";
    }
    std::string out;
    for (const auto& [k, v] : items_) out += k + " = " + detail::csv_field(v) + "\n";
    return out;
  }

private:
  std::vector<std::pair<std::string, Cell>> items_;
};

SweepSpec point_spec(const Config& c) {
  auto s = SweepSpec::from_config(c);
  s.axis1.reset();
  s.axis2.reset();
  return s;
}

int cmd_spectrum(const Config& c) {
  const auto s = point_spec(c);
  const auto [p, temperature] = point_params(s, {});
  (void)temperature;
  const auto fmt = parse_format(c.get_string("format"));
  SpectrumResult spec;
  try {
    spec = ed_spectrum(s.ed, p);
  } catch (const CutoffRunaway& e) {
    std::cerr << "dsm spectrum: " << e.what() << "\n";
    return kPartial;
  }
  SweepResult r;
  r.provenance = provenance_of(c);
  r.columns = {"index", "energy", "parity", "parity_weight", "residual", "converged"};
  for (std::size_t i = 0; i < spec.pairs.size(); ++i) {
    const auto& ep = spec.pairs[i];
    r.rows.push_back({double(i), ep.value, double(ep.parity), ep.parity_weight, ep.residual, ep.converged ? 1.0 : 0.0});
  }
  deliver(render(r, fmt), c.get_string("output"));
  try {
    const auto o = observables(spec, p);
    std::cerr << "n_max_used = " << spec.n_max_used << "\ne0 = " << format_number(o.e0)
              << "\nepsilon = " << format_number(o.epsilon) << "\nnph_density = " << format_number(o.nph_density)
              << "\ndelta_x = " << format_number(o.delta_x) << "\njz_density = " << format_number(o.jz_density) << "\n";
  } catch (const InsufficientStates& e) {
    std::cerr << "dsm spectrum: " << e.what() << "\n";
  }
  return spec.all_converged() ? kOk : kPartial;
}

int cmd_sweep(const Config& c) {
  const auto s = SweepSpec::from_config(c);
  const auto fmt = parse_format(c.get_string("format"));
  const auto r = run_sweep(s, provenance_of(c));
  deliver(render(r, fmt), c.get_string("output"));

  const auto bcol = c.get_string("boundary_observable");
  if (!bcol.empty()) {
    const bool g1 = s.axis1 && s.axis1->axis == Axis::G;
    const bool g2 = s.axis2 && s.axis2->axis == Axis::G;
    if (!g1 && !g2) throw ConfigError("boundary_observable needs a g axis");
    std::string other;
    if (s.axis1 && s.axis2) other = r.columns[g1 ? 1 : 0];
    if (g1 && s.axis2) throw ConfigError("boundary extraction needs g as the inner axis (axis2)");
    const auto line = extract_boundary(r, bcol, c.get_double("boundary_threshold"), "g", other);
    SweepResult b;
    b.provenance = r.provenance;
    if (!other.empty()) b.columns.push_back(other);
    b.columns.insert(b.columns.end(), {"g_boundary", "gc0"});
    for (const auto& pt : line) {
      std::vector<double> at;
      if (!other.empty()) at.push_back(pt.other);
      if (s.axis1 && s.axis2) at.push_back(s.axis2->values().front());
      SweepSpec probe = s;
      probe.g_relative = false;
      const auto params = point_params(probe, at).first;
      std::vector<Cell> row;
      if (!other.empty()) row.emplace_back(pt.other);
      row.emplace_back(pt.g ? *pt.g : std::numeric_limits<double>::quiet_NaN());
      const auto gc = critical_coupling_zero(params).value;
      row.emplace_back(gc ? *gc : std::numeric_limits<double>::quiet_NaN());
      b.rows.push_back(std::move(row));
    }
    const auto path = c.get_string("boundary_output");
    if (path.empty())
      std::cerr << render(b, Format::Csv);
    else
      write_file(path, render(b, fmt));
  }
  if (const auto n = r.error_rows(); n > 0) {
    std::cerr << "dsm sweep: " << n << " of " << r.rows.size() << " grid points failed (see the error column)\n";
    return kPartial;
  }
  return kOk;
}

int cmd_meanfield(const Config& c) {
  const auto s = point_spec(c);
  const auto [p, temperature] = point_params(s, {});
  Report rep;
  const auto gc = critical_coupling_zero(p);
  rep.add("g", p.g);
  rep.add("g_c0", gc.value);
  rep.add("g_c0_formula", gc.formula_value);
  rep.add("g_c0_verdict", std::string(to_string(gc.verdict)));
  const auto sol = order_parameters(p);
  rep.add("phase", std::string(to_string(sol.phase)));
  rep.add("alpha", sol.alpha);
  rep.add("varsigma", sol.varsigma);
  rep.add("energy_per_atom", sol.energy_per_atom);
  if (temperature > 0.0) {
    const auto gt = critical_coupling_thermal({p, temperature});
    rep.add("temperature", temperature);
    rep.add("g_c", gt.value);
    rep.add("g_c_formula", gt.formula_value);
    rep.add("g_c_verdict", std::string(to_string(gt.verdict)));
  }
  deliver(rep.str(parse_format(c.get_string("format")), provenance_of(c)), c.get_string("output"));
  return kOk;
}

int cmd_thermal(const Config& c) {
  const auto s = point_spec(c);
  const auto [p, temperature] = point_params(s, {});
  if (!(temperature > 0.0)) throw ConfigError("thermal needs temperature > 0");
  const ThermalPoint pt{p, temperature};
  Report rep;
  const auto gt = critical_coupling_thermal(pt);
  const auto tc = critical_temperature(p);
  const auto sol = order_parameter_thermal(pt);
  rep.add("g", p.g);
  rep.add("temperature", temperature);
  rep.add("g_c", gt.value);
  rep.add("g_c_formula", gt.formula_value);
  rep.add("g_c_verdict", std::string(to_string(gt.verdict)));
  rep.add("t_c", tc.value);
  rep.add("t_c_argument", tc.argument);
  rep.add("t_c_verdict", std::string(to_string(tc.verdict)));
  rep.add("phase", std::string(to_string(sol.phase)));
  rep.add("alpha", sol.alpha_intensive);
  rep.add("free_energy_per_atom", sol.free_energy_per_atom);
  rep.add("residual", sol.residual);
  deliver(rep.str(parse_format(c.get_string("format")), provenance_of(c)), c.get_string("output"));
  return kOk;
}

int cmd_landscape(const Config& c) {
  const auto s = point_spec(c);
  const auto [p, temperature] = point_params(s, {});
  if (!(temperature > 0.0)) throw ConfigError("landscape needs temperature > 0");
  const long res = c.get_int("resolution");
  if (res < 32 || res > 4096) throw ConfigError("resolution must be in [32, 4096]");
  const auto fmt = parse_format(c.get_string("format"));
  const auto l = landscape_grid({p, temperature}, {c.get_double("x_min"), c.get_double("x_max")},
                                {c.get_double("y_min"), c.get_double("y_max")}, int(res), int(res));
  std::cout << "g = " << format_number(p.g) << "\ntemperature = " << format_number(temperature)
            << "\nphase = " << to_string(l.phase) << "\nf0 = " << format_number(l.f00)
            << "\nminima = " << l.minima.size() << "\n";
  for (const auto& m : l.minima)
    std::cout << "  min " << format_number(m.x) << " " << format_number(m.y) << " " << format_number(m.value) << "\n";
  std::cout << "maxima = " << l.maxima.size() << "\n";
  for (const auto& m : l.maxima)
    std::cout << "  max " << format_number(m.x) << " " << format_number(m.y) << " " << format_number(m.value) << "\n";
  if (const auto path = c.get_string("output"); !path.empty()) {
    SweepResult r;
    r.provenance = provenance_of(c);
    r.columns = {"re_alpha", "im_alpha", "f_minus_f0"};
    for (std::size_t iy = 0; iy < l.y.size(); ++iy)
      for (std::size_t ix = 0; ix < l.x.size(); ++ix) r.rows.push_back({l.x[ix], l.y[iy], l.at(ix, iy)});
    write_file(path, render(r, fmt));
  }
  return kOk;
}

ordered_json fit_json(const ExponentFit& f) {
  return {{"exponent", f.exponent}, {"stderr", f.std_error}, {"window", {f.window.lo, f.window.hi}},
          {"n_points", f.n_points}, {"r_squared", f.r_squared}};
}

int cmd_scaling(const Config& c) {
  const auto input = c.get_string("input");
  if (input.empty()) throw ConfigError("scaling needs input = <csv file>");
  const auto data = read_csv_file(input);
  const auto ctrl = data.column_index(c.get_string("control"));
  const auto ncol = data.column_index(c.get_string("size_column"));
  const auto ocol = data.column_index(c.get_string("observable"));
  const auto side = c.get_string("side");
  if (side != "below" && side != "above") throw ConfigError("side must be 'below' or 'above'");
  double critical = c.get_double("critical");
  if (critical == 0.0) {
    const auto gc = critical_coupling_zero(model_params(c));
    if (!gc.has_transition()) throw ConfigError("critical = 0 but the model keys have no ground-state transition");
    critical = *gc.value;
  }
  const Window window{c.get_double("window_lo"), c.get_double("window_hi")};
  const double beta = c.get_double("beta_q"), nu = c.get_double("nu");
  const auto tag = parse_observable_tag(c.get_string("observable"));

  // rows grouped by N, rows with an error or a non-numeric cell skipped
  std::map<int, std::vector<std::pair<double, double>>> by_n;
  std::size_t skipped = 0;
  const auto err = std::find(data.columns.begin(), data.columns.end(), "error");
  for (const auto& row : data.rows) {
    if (err != data.columns.end()) {
      const auto* e = std::get_if<std::string>(&row[err - data.columns.begin()]);
      if (e && !e->empty()) {
        ++skipped;
        continue;
      }
    }
    const auto* x = std::get_if<double>(&row[ctrl]);
    const auto* n = std::get_if<double>(&row[ncol]);
    const auto* q = std::get_if<double>(&row[ocol]);
    if (!x || !n || !q || !std::isfinite(*q)) {
      ++skipped;
      continue;
    }
    if (*n < 1.0 || *n != std::round(*n)) throw IoError(input + ": size column must hold positive integers");
    by_n[int(*n)].push_back({*x, *q});
  }
  if (by_n.empty()) throw IoError(input + ": no usable rows");

  bool failed = false;
  ordered_json out;
  out["provenance"] = {{"tool", "dsm"}, {"version", DSM_VERSION}, {"config_hash", detail::hex64(c.hash())}};
  out["input"] = input;
  out["observable"] = c.get_string("observable");
  out["critical"] = critical;
  out["side"] = side;
  out["skipped_rows"] = skipped;
  out["fits"] = ordered_json::array();
  std::vector<ScalingCurve> curves;
  std::vector<std::pair<int, double>> at_critical;
  for (auto& [n, pts] : by_n) {
    std::sort(pts.begin(), pts.end());
    ScalingCurve all, fit_side;
    all.size = fit_side.size = n;
    if (tag) all.tag = fit_side.tag = *tag;
    for (const auto& [x, q] : pts) {
      if (!all.control.empty() && x == all.control.back()) throw IoError(input + ": duplicate control value");
      all.control.push_back(x);
      all.values.push_back(q);
      if (side == "below" ? x < critical : x > critical) {
        fit_side.control.push_back(x);
        fit_side.values.push_back(q);
      }
    }
    curves.push_back(all);
    ordered_json rec = {{"N", n}};
    try {
      rec.update(fit_json(fit_powerlaw(fit_side, critical, window)));
    } catch (const Error& e) {
      rec["error"] = e.what();
      failed = true;
    }
    out["fits"].push_back(rec);
    // value at the critical point: exact grid point or linear interpolation
    for (std::size_t i = 0; i < all.control.size(); ++i) {
      if (std::abs(all.control[i] / critical - 1.0) < 1e-9) {
        at_critical.push_back({n, all.values[i]});
        break;
      }
      if (i > 0 && all.control[i - 1] < critical && all.control[i] > critical) {
        const double w = (critical - all.control[i - 1]) / (all.control[i] - all.control[i - 1]);
        at_critical.push_back({n, all.values[i - 1] + w * (all.values[i] - all.values[i - 1])});
        break;
      }
    }
  }
  try {
    out["n_scaling"] = fit_json(fit_criticality_n_scaling(at_critical));
  } catch (const Error& e) {
    out["n_scaling"] = {{"error", e.what()}};
    failed = true;
  }
  out["collapse"] = ordered_json::array();
  const std::pair<double, double> trials[] = {
      {beta, nu}, {1.3 * beta, nu}, {0.7 * beta, nu}, {beta, nu / 1.3}, {beta, nu / 0.7}};
  for (const auto& [b, v] : trials) {
    ordered_json rec = {{"beta_q", b}, {"nu", v}};
    try {
      const auto sc = collapse_quality_detail(curves, critical, b, v, window);
      rec["score"] = sc.score;
      rec["n_points"] = sc.n_points;
    } catch (const Error& e) {
      rec["error"] = e.what();
      failed = true;
    }
    out["collapse"].push_back(rec);
  }
  deliver(out.dump(2) + "\n", c.get_string("output"));
  return failed ? kPartial : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dsm: exact diagonalization, mean-field theory and finite-size scaling for the anisotropic "
               "Dicke-Stark model"};
  app.set_version_flag("--version", std::string(DSM_VERSION));
  app.require_subcommand(1);
  app.footer(describe_keys());

  Inputs in;
  struct Cmd {
    const char* name;
    const char* help;
    int (*run)(const Config&);
  };
  const Cmd cmds[] = {
      {"spectrum", "lowest eigenpairs at one parameter point (ED)", cmd_spectrum},
      {"sweep", "observables on a one- or two-parameter grid", cmd_sweep},
      {"meanfield", "ground-state mean-field solution and g_c0 (plus g_c(T) if temperature > 0)", cmd_meanfield},
      {"thermal", "g_c(T), T_c(g) and the thermal order parameter", cmd_thermal},
      {"landscape", "free-energy landscape over complex alpha, with its critical points", cmd_landscape},
      {"scaling", "power-law fits, N-scaling and collapse scores from a sweep CSV", cmd_scaling},
  };
  std::vector<std::pair<CLI::App*, const Cmd*>> subs;
  for (const auto& cmd : cmds) {
    auto* sub = app.add_subcommand(cmd.name, cmd.help);
    sub->add_option("-c,--config", in.config_path, "key = value config file")->check(CLI::ExistingFile);
    sub->add_option("--set", in.overrides, "override one key (key=value); repeatable")->allow_extra_args(false);
    sub->footer(describe_keys());
    subs.push_back({sub, &cmd});
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  for (const auto& [sub, cmd] : subs) {
    if (!sub->parsed()) continue;
    try {
      return cmd->run(load(in));
    } catch (const ConfigError& e) {
      std::cerr << "dsm " << cmd->name << ": config error: " << e.what() << "\n";
      return kConfig;
    } catch (const InvalidParameters& e) {
      std::cerr << "dsm " << cmd->name << ": invalid parameters: " << e.what() << "\n";
      return kConfig;
    } catch (const IoError& e) {
      std::cerr << "dsm " << cmd->name << ": I/O error: " << e.what() << "\n";
      return kIo;
    } catch (const std::exception& e) {
      std::cerr << "dsm " << cmd->name << ": " << e.what() << "\n";
      return kPartial;
    }
  }
  return kConfig;
}
