#include "fhj/run.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <utility>

#include "fhj/constants.hpp"
#include "fhj/csv.hpp"
#include "fhj/rates.hpp"
#include "fhj/solver.hpp"
#include "fhj/svg.hpp"

namespace fhj {

namespace {

namespace fs = std::filesystem;

/// configuration-level failure: maps to run_invalid instead of run_numerical
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Artifact writer for one run: prepends the command line and the resolved
/// configuration to every file and remembers what was written so a failed
/// run can remove its partial output.
struct Sink {
  fs::path dir;
  std::vector<std::string> base;
  std::vector<std::string> written;

  std::string file(const std::string& name) const { return (dir / name).string(); }

  void csv(const std::string& name, CsvTable t) {
    std::vector<std::string> c = base;
    c.insert(c.end(), t.comments.begin(), t.comments.end());
    t.comments = std::move(c);
    const std::string p = file(name);
    write_csv(p, t);
    written.push_back(p);
  }

  void svg_plot(const std::string& name, const CsvTable& t, const PlotSpec& ps) {
    const std::string p = file(name);
    write_svg(p, t, ps);
    written.push_back(p);
  }

  void text(const std::string& name, const std::string& body) {
    const std::string p = file(name);
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + p + "' for writing");
    for (const std::string& line : base) out << "# " << line << '\n';
    out << body;
    if (!out) throw std::runtime_error("write failed for '" + p + "'");
    written.push_back(p);
  }

  void discard() {
    for (const std::string& p : written) {
      std::error_code ec;
      fs::remove(p, ec);
    }
    written.clear();
  }
};

double min_node_gap(const std::vector<double>& xs) {
  double h = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) h = std::min(h, xs[i + 1] - xs[i]);
  return h;
}

/// Fit window tight enough that the corrector term stays within the
/// coefficient tolerance: [5 h_min, 2.5e-3 diam], widened to three times the
/// lower edge on grids too coarse to reach that scale (the fit then reports
/// honestly degraded coefficients rather than refusing to run).
RateWindow tight_window(const GridFunction& u, const Domain& dom) {
  const double lo = 5.0 * min_node_gap(u.nodes());
  return {lo, std::max(2.5e-3 * dom.diameter(), 3.0 * lo)};
}

void require_valid(const ProblemSpec& spec) {
  const ValidationReport r = validate_problem(spec);
  if (r.valid) return;
  std::string msg = "instance fails validation:";
  for (const CheckItem& it : r.items)
    if (!it.pass) msg += "\n  " + it.name + ": " + it.detail;
  throw ConfigError(msg);
}

void require_case_feasible(const ExperimentConfig& cfg, const ProblemSpec& spec) {
  const auto gi = gamma_interval(cfg.sub_case(), spec.s, spec.p);
  if (!(gi.first < gi.second))
    throw ConfigError("case '" + cfg.case_kind + "' has no corrector exponent at s = " +
                      format_number(spec.s) + ", p = " + format_number(spec.p));
  const ScaleBand band = scale_band(spec.s, spec.p);
  if (cfg.case_kind == "scale_pos" && band != ScaleBand::positive)
    throw ConfigError("case 'scale_pos' requires p in the positive scale band");
  if (cfg.case_kind == "scale_neg" && band != ScaleBand::negative)
    throw ConfigError("case 'scale_neg' requires p in the negative scale band");
}

std::string pad4(std::size_t n) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%04zu", n);
  return buf;
}

// ----------------------------------------------------------------- commands

void cmd_ctau(const ExperimentConfig& cfg, const ProblemSpec& spec, Sink& sink,
              RunResult& res) {
  const CurveSample cs =
      sample_curve(spec.op, 200, std::min(cfg.tol, 1e-9), Exec::parallel);
  CsvTable t;
  t.add("tau", cs.tau_nodes);
  t.add("c", cs.values);
  t.add("err", cs.errors);
  sink.csv("ctau.csv", t);
  PlotSpec ps;
  ps.title = "boundary constant c(tau)";
  ps.y_cols = {1};
  sink.svg_plot("ctau.svg", t, ps);
  res.message = "ctau: sampled " + std::to_string(t.rows()) + " exponents";
}

void cmd_lambda0(const ExperimentConfig&, const ProblemSpec& spec, Sink& sink,
                 RunResult& res) {
  const double lam0 = lambda0(spec.op, spec.domain);

  // scan of the quantity whose infimum lambda0 is: the smallest exterior
  // kernel mass over the operator's member kernels, seen from x
  std::vector<Kernel> kernels;
  switch (spec.op.kind) {
    case OperatorSpec::Kind::linear:
      kernels = {spec.op.family[0][0]};
      break;
    case OperatorSpec::Kind::pucci_plus:
    case OperatorSpec::Kind::pucci_minus:
      kernels = {Kernel::scaled(spec.op.s, spec.op.lo)};
      break;
    case OperatorSpec::Kind::inf_sup:
      for (const auto& row : spec.op.family)
        for (const Kernel& k : row) kernels.push_back(k);
      break;
  }
  const Domain& dom = spec.domain;
  const std::size_t n_scan = 256;
  std::vector<double> xs(n_scan), mass(n_scan);
  for (std::size_t j = 0; j < n_scan; ++j) {
    const double x = dom.a + dom.diameter() * (static_cast<double>(j) + 0.5) /
                                 static_cast<double>(n_scan);
    double m = std::numeric_limits<double>::infinity();
    for (const Kernel& k : kernels)
      m = std::min(m, k.tail_mass(dom.b - x).value + k.tail_mass(x - dom.a).value);
    xs[j] = x;
    mass[j] = m;
  }
  CsvTable scan;
  scan.add("x", xs);
  scan.add("exterior_mass", mass);
  sink.csv("mass_scan.csv", scan);
  PlotSpec ps;
  ps.title = "exterior kernel mass";
  sink.svg_plot("lambda0.svg", scan, ps);

  CsvTable one;
  one.add("lambda0", {lam0});
  sink.csv("lambda0.csv", one);
  res.message = "lambda0 = " + format_number(lam0);
}

void cmd_expansion(const ExperimentConfig& cfg, const ProblemSpec& spec, Sink& sink,
                   RunResult& res) {
  const double tau = cfg.t;
  if (!(tau > -1.0 && tau < 2.0 * spec.s))
    throw ConfigError("expansion exponent t must lie in (-1, 2s)");
  const ExpansionFit ef = expansion_probe(spec.op, tau, spec.domain, probe_sequence(),
                                          std::min(cfg.tol, 1e-9));
  const CValue ref = c_operator(spec.op, tau);

  CsvTable curve;
  curve.add("d", ef.d_sequence);
  curve.add("c_hat", ef.c_hat);
  sink.csv("expansion.csv", curve);
  PlotSpec ps;
  ps.title = "rescaled one-point expansion";
  sink.svg_plot("expansion.svg", curve, ps);

  CsvTable fit;
  fit.add("tau", {ef.tau});
  fit.add("measured_c", {ef.measured_c});
  fit.add("reference_c", {ref.value});
  fit.add("remainder_order", {ef.remainder_order});
  fit.add("amplitude", {ef.amplitude});
  fit.add("r_squared", {ef.r_squared});
  sink.csv("expansion_fit.csv", fit);
  res.message = "expansion: measured c = " + format_number(ef.measured_c) +
                " (reference " + format_number(ref.value) + ")";
}

void cmd_barrier(const ExperimentConfig& cfg, const ProblemSpec& spec, Sink& sink,
                 RunResult& res) {
  require_valid(spec);
  require_case_feasible(cfg, spec);
  const double amp = cfg.case_kind == "family"
                         ? cfg.t
                         : std::numeric_limits<double>::quiet_NaN();
  const Barrier sub = build_barrier(cfg.sub_case(), spec, amp);
  const Barrier sup = build_barrier(cfg.super_case(), spec, amp);

  bool all_pass = true;
  std::string summary = "barrier:";
  const std::pair<const Barrier*, const char*> sides[] = {{&sub, "sub"},
                                                          {&sup, "super"}};
  for (const auto& [bp, name] : sides) {
    const Barrier& b = *bp;
    const double edge = barrier_band_edge(b, spec);
    if (edge <= 1e-4)
      throw std::runtime_error(std::string("no verification band for the ") + name +
                               " barrier");
    const VerificationReport rep = verify_barrier(b, spec, {1e-4, edge});
    CsvTable t;
    std::vector<double> x, d, val, r, qe, margin, ok;
    for (const PointCheck& pc : rep.points) {
      x.push_back(pc.x);
      d.push_back(pc.d);
      val.push_back(b.value(pc.x));
      r.push_back(pc.residual);
      qe.push_back(pc.quad_err);
      margin.push_back(pc.margin);
      ok.push_back(pc.pass ? 1.0 : 0.0);
    }
    t.add("x", x);
    t.add("d", d);
    t.add("value", val);
    t.add("residual", r);
    t.add("quad_err", qe);
    t.add("margin", margin);
    t.add("pass", ok);
    t.comments = {std::string("side = ") + name, "d_eps = " + format_number(edge),
                  "eps = " + format_number(rep.eps)};
    sink.csv(std::string("barrier_") + name + ".csv", t);
    all_pass = all_pass && rep.pass;
    summary += std::string(" ") + name + " d_eps=" + format_number(edge);
  }

  // global ordering: the pair must stay ordered on the whole line
  for (int j = 0; j <= 400; ++j) {
    const double x =
        spec.domain.a - 0.1 + (spec.domain.diameter() + 0.2) * j / 400.0;
    if (sub.value(x) > sup.value(x) + 1e-12) {
      all_pass = false;
      summary += " ordering violated at x=" + format_number(x);
      break;
    }
  }
  res.status = all_pass ? run_ok : run_numerical;
  res.message = summary + (all_pass ? " (pass)" : " (FAIL)");
}

void cmd_solve(const ExperimentConfig& cfg, const ProblemSpec& spec, Sink& sink,
               RunResult& res) {
  require_valid(spec);
  const SchemeState st = solve_policy(spec, nullptr, spec.grid, cfg.tol);
  if (!st.converged)
    throw std::runtime_error("bounded solve did not converge: residual " +
                             format_number(st.residual_norm));
  const ResidualReport rr = residual(st.grid, spec, {spec.domain.a, spec.domain.b},
                                     ResidualMode::scheme, cfg.tol);
  CsvTable t;
  t.add("x", st.grid.nodes());
  t.add("u", st.grid.values());
  t.add("residual", rr.r);
  sink.csv("u.csv", t);
  PlotSpec ps;
  ps.title = "bounded solution";
  ps.y_cols = {1};
  sink.svg_plot("u.svg", t, ps);
  res.message = "solve: residual " + format_number(st.residual_norm) + " after " +
                std::to_string(st.iterations) + " iterations";
}

void cmd_family(const ExperimentConfig& cfg, const ProblemSpec& spec, Sink& sink,
                RunResult& res) {
  require_valid(spec);
  require_case_feasible(cfg, spec);
  if (cfg.exterior_kind != "zero")
    throw ConfigError(
        "family requires exterior.kind = zero; reduce nonzero data to a source "
        "shift first");
  const bool fam = cfg.case_kind == "family";
  if (fam && cfg.t == 0.0) throw ConfigError("family requires t != 0");

  // truncation schedule sized by the grid: shells may not outrun the finest
  // spacing, or the exterior anchors stop converging
  const std::vector<double> nodes0 = graded_nodes(
      spec.domain, static_cast<int>(spec.grid.n), spec.grid.ratio);
  const double depth = std::max(100.0, 1.0 / (2.0 * min_gap(nodes0, spec.domain)));
  PerronSchedule base;
  for (std::size_t n = 50; static_cast<double>(n) <= depth; n *= 2)
    base.n_levels.push_back(n);
  if (base.n_levels.size() < 2) base.n_levels = {50, 100};
  base.compact_margin = 0.1 * spec.domain.diameter();

  std::vector<double> amps;
  if (fam)
    amps = {0.5 * cfg.t, cfg.t, 2.0 * cfg.t};
  else
    amps = {std::numeric_limits<double>::quiet_NaN()};

  std::vector<std::pair<double, GridFunction>> members;
  std::vector<std::size_t> levels_run;
  std::vector<double> cauchy_last;
  for (std::size_t i = 0; i < amps.size(); ++i) {
    const Barrier sub = build_barrier(cfg.sub_case(), spec, amps[i]);
    const Barrier sup = build_barrier(cfg.super_case(), spec, amps[i]);
    const std::pair<const Barrier*, const char*> sides[] = {{&sub, "sub"},
                                                            {&sup, "super"}};
    for (const auto& [bp, name] : sides) {
      const VerificationReport rep = verify_barrier(*bp, spec, {1e-4, 5e-3}, 8);
      if (!rep.pass)
        throw std::runtime_error(std::string("the ") + name +
                                 " barrier fails its residual check near d = " +
                                 format_number(rep.worst_x));
    }

    const std::string stem = fam ? "u_" + std::to_string(i) : "u";
    std::vector<double> last_residual;
    PerronSchedule sched = base;
    sched.on_level = [&](std::size_t, std::size_t n, const GridFunction& g,
                         const std::vector<double>& r) {
      CsvTable ck;
      ck.add("x", g.nodes());
      ck.add("u", g.values());
      ck.add("residual", r);
      ck.comments = {"level = " + std::to_string(n)};
      sink.csv(stem + "_level_" + pad4(n) + ".csv", ck);
      last_residual = r;
    };
    const SchemeState st = perron_solve(spec, sub, sup, sched, cfg.tol);

    CsvTable t;
    t.add("x", st.grid.nodes());
    t.add("u", st.grid.values());
    t.add("residual", last_residual);
    t.comments = {"amplitude = " + format_number(sub.amplitude),
                  "cauchy = " + format_number(st.cauchy.empty() ? 0.0 : st.cauchy.back())};
    sink.csv(stem + ".csv", t);
    if (fam && i == 1) sink.csv("u.csv", t);  // the configured member, for `rates`
    members.emplace_back(fam ? amps[i] : sub.amplitude, st.grid);
    levels_run = st.levels;
    cauchy_last.push_back(st.cauchy.empty() ? 0.0 : st.cauchy.back());
  }

  // verdict: ordering plus boundary-rate fits against the case's exponent
  const double hyp =
      fam ? spec.s - 1.0 : beta_exponent(spec.s, spec.p);
  CsvTable verdict;
  std::vector<double> vt, ve, vet, vc, vct, vr2, vdmin, vdmax, vn;
  bool pass = false;
  std::string detail;
  if (fam) {
    FamilyCheck chk;
    chk.window = tight_window(members[0].second, spec.domain);
    const FamilyVerdict v = verify_family(members, spec.domain, spec.s, chk);
    std::vector<double> ts;
    for (const auto& m : members) ts.push_back(m.first);
    std::sort(ts.begin(), ts.end());
    for (std::size_t i = 0; i < v.fits.size(); ++i) {
      vt.push_back(ts[i]);
      ve.push_back(v.fits[i].exponent);
      vet.push_back(hyp);
      vc.push_back(v.fits[i].coefficient);
      vct.push_back(ts[i]);
      vr2.push_back(v.fits[i].r_squared);
      vdmin.push_back(v.fits[i].d_min);
      vdmax.push_back(v.fits[i].d_max);
      vn.push_back(static_cast<double>(v.fits[i].n_points));
    }
    pass = v.pass;
    detail = v.detail;
    verdict.comments = {std::string("ordered = ") + (v.ordered ? "1" : "0"),
                        std::string("pass = ") + (v.pass ? "1" : "0")};
  } else {
    const GridFunction& u = members[0].second;
    const double target = members[0].first;
    const RateFit fit =
        fit_boundary_rate(u, spec.domain, tight_window(u, spec.domain), hyp);
    const double etol = cfg.case_kind == "scale_pos" ? 0.05 : 0.03;
    const bool exp_ok = std::abs(fit.exponent - hyp) <= etol;
    const bool coeff_ok = std::abs(fit.coefficient - target) <= 0.10 * std::abs(target);
    pass = exp_ok && coeff_ok;
    detail = "amplitude " + format_number(fit.coefficient) + " vs target " +
             format_number(target) + ", exponent " + format_number(fit.exponent) +
             " vs " + format_number(hyp);
    vt.push_back(target);
    ve.push_back(fit.exponent);
    vet.push_back(hyp);
    vc.push_back(fit.coefficient);
    vct.push_back(target);
    vr2.push_back(fit.r_squared);
    vdmin.push_back(fit.d_min);
    vdmax.push_back(fit.d_max);
    vn.push_back(static_cast<double>(fit.n_points));
    verdict.comments = {std::string("pass = ") + (pass ? "1" : "0")};
  }
  verdict.add("t", vt);
  verdict.add("exponent", ve);
  verdict.add("exponent_target", vet);
  verdict.add("coefficient", vc);
  verdict.add("coefficient_target", vct);
  verdict.add("r_squared", vr2);
  verdict.add("d_min", vdmin);
  verdict.add("d_max", vdmax);
  verdict.add("n_points", vn);
  sink.csv("family.csv", verdict);

  // rescaled boundary profile d^{-hyp} u against log10 d, left boundary side
  const std::vector<double>& xs = members[0].second.nodes();
  std::vector<double> ld;
  std::vector<std::vector<double>> amp(members.size());
  for (std::size_t j = 0; j < xs.size(); ++j) {
    if (xs[j] > spec.domain.a + 0.5 * spec.domain.diameter()) break;
    const double d = xs[j] - spec.domain.a;
    ld.push_back(std::log10(d));
    for (std::size_t i = 0; i < members.size(); ++i)
      amp[i].push_back(members[i].second.values()[j] * std::pow(d, -hyp));
  }
  CsvTable profile;
  profile.add("log10_d", ld);
  for (std::size_t i = 0; i < members.size(); ++i) {
    char nm[32];
    std::snprintf(nm, sizeof nm, "amp_t%.3g", members[i].first);
    profile.add(fam ? nm : "amp", amp[i]);
  }
  sink.csv("family_profile.csv", profile);
  PlotSpec ps;
  ps.title = "boundary amplitude d^{-e} u";
  sink.svg_plot("family_profile.svg", profile, ps);

  res.status = pass ? run_ok : run_numerical;
  res.message = std::string("family verdict: ") + (pass ? "pass" : "FAIL") +
                " (levels to " + std::to_string(levels_run.empty() ? 0 : levels_run.back()) +
                ")\n" + detail;
}

void cmd_rates(const ExperimentConfig& cfg, const ProblemSpec& spec, Sink& sink,
               RunResult& res) {
  const std::string upath = (fs::path(cfg.out_dir) / "u.csv").string();
  CsvTable t;
  try {
    t = read_csv(upath);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("rates needs a previous solve/family run: ") +
                      e.what());
  }
  std::size_t xc = 0, uc = 1;
  for (std::size_t j = 0; j < t.names.size(); ++j) {
    if (t.names[j] == "x") xc = j;
    if (t.names[j] == "u") uc = j;
  }
  if (t.cols() < 2 || t.rows() < 6)
    throw ConfigError("rates: '" + upath + "' has too few columns or rows");

  GridFunction u = [&] {
    try {
      return GridFunction(spec.domain, t.columns[xc], t.columns[uc], zero_field());
    } catch (const std::exception& e) {
      throw ConfigError(std::string("rates: u.csv does not match the domain: ") +
                        e.what());
    }
  }();
  const double hyp = cfg.case_kind == "family" ? spec.s - 1.0
                                               : beta_exponent(spec.s, spec.p);
  const RateFit fit = fit_boundary_rate(u, spec.domain, RateWindow{}, hyp);

  CsvTable out;
  out.add("exponent", {fit.exponent});
  out.add("hypothesis", {hyp});
  out.add("coefficient", {fit.coefficient});
  out.add("r_squared", {fit.r_squared});
  out.add("d_min", {fit.d_min});
  out.add("d_max", {fit.d_max});
  out.add("n_points", {static_cast<double>(fit.n_points)});
  sink.csv("rates.csv", out);
  res.message = "rates: exponent " + format_number(fit.exponent) + ", amplitude " +
                format_number(fit.coefficient) + " at hypothesis " +
                format_number(hyp);
}

void cmd_validate(const ExperimentConfig&, const ProblemSpec& spec, Sink& sink,
                  RunResult& res) {
  const ValidationReport r = validate_problem(spec);
  std::string body;
  for (const CheckItem& it : r.items)
    body += std::string(it.pass ? "[PASS] " : "[FAIL] ") + it.name + ": " + it.detail +
            "\n";
  if (std::isfinite(r.lambda0_value))
    body += "lambda0 = " + format_number(r.lambda0_value) + "\n";
  body += "cases:";
  for (const std::string& c : r.cases) body += " " + c;
  body += "\n";
  sink.text("validate.txt", body);
  res.status = r.valid ? run_ok : run_invalid;
  res.message = body;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {
      "ctau", "lambda0", "expansion", "barrier", "solve", "family", "rates",
      "validate"};
  return names;
}

RunResult run_command(const std::string& command, const ExperimentConfig& cfg) {
  RunResult res;
  const auto& names = command_names();
  if (std::find(names.begin(), names.end(), command) == names.end()) {
    res.status = run_invalid;
    res.message = "unknown command '" + command + "'";
    return res;
  }

  Sink sink;
  try {
    const ProblemSpec spec = [&] {
      try {
        if (!(cfg.tol > 0.0)) throw std::invalid_argument("tol must be positive");
        if (cfg.grid_n < 3 || cfg.grid_n > 200000)
          throw std::invalid_argument("grid.n out of range [3, 200000]");
        ProblemSpec sp = cfg.to_problem();
        graded_nodes(sp.domain, static_cast<int>(sp.grid.n), sp.grid.ratio);
        return sp;
      } catch (const std::exception& e) {
        throw ConfigError(e.what());
      }
    }();

    sink.dir = fs::path(cfg.out_dir);
    std::error_code ec;
    fs::create_directories(sink.dir, ec);
    if (!fs::is_directory(sink.dir))
      throw ConfigError("cannot create out.dir '" + cfg.out_dir + "'");
    sink.base.push_back("fhj " + command);
    for (const std::string& line : cfg.canonical_lines()) sink.base.push_back(line);

    if (command == "ctau")
      cmd_ctau(cfg, spec, sink, res);
    else if (command == "lambda0")
      cmd_lambda0(cfg, spec, sink, res);
    else if (command == "expansion")
      cmd_expansion(cfg, spec, sink, res);
    else if (command == "barrier")
      cmd_barrier(cfg, spec, sink, res);
    else if (command == "solve")
      cmd_solve(cfg, spec, sink, res);
    else if (command == "family")
      cmd_family(cfg, spec, sink, res);
    else if (command == "rates")
      cmd_rates(cfg, spec, sink, res);
    else
      cmd_validate(cfg, spec, sink, res);

    res.artifacts = sink.written;
    return res;
  } catch (const ConfigError& e) {
    sink.discard();
    res.status = run_invalid;
    res.message = e.what();
    res.artifacts.clear();
    return res;
  } catch (const std::exception& e) {
    sink.discard();
    res.status = run_numerical;
    res.message = e.what();
    res.artifacts.clear();
    return res;
  }
}

}  // namespace fhj
