#include "fhj/problem.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace fhj {

Exponents critical_exponents(double s) {
  if (!(s > 0.5 && s < 1.0))
    throw std::domain_error("critical_exponents: s must lie in (1/2, 1)");
  Exponents e;
  e.p0 = 2.0 * s / (2.0 - s);
  e.p1 = s + 0.5;
  e.p2 = (s + 1.0) / (2.0 - s);
  return e;
}

double beta_exponent(double s, double p) {
  if (!(s > 0.5 && s < 1.0))
    throw std::domain_error("beta_exponent: s must lie in (1/2, 1)");
  if (!(p > 1.0 && p < 2.0 * s))
    throw std::domain_error("beta_exponent: p must lie in (1, 2s)");
  return (2.0 * s - p) / (1.0 - p);
}

ScaleBand scale_band(double s, double p) {
  const Exponents e = critical_exponents(s);
  if (p > e.p1 && p < e.p2) return ScaleBand::positive;
  if (p > e.p2 && p < 2.0 * s) return ScaleBand::negative;
  return ScaleBand::none;
}

// ------------------------------------------------------------------ sources

SourceSpec SourceSpec::bounded(std::function<double(double)> f) {
  SourceSpec s;
  s.kind = Kind::bounded;
  s.fn = std::move(f);
  return s;
}

SourceSpec SourceSpec::power(double c, double kappa) {
  SourceSpec s;
  s.kind = Kind::power_singular;
  s.c = c;
  s.kappa = kappa;
  return s;
}

double SourceSpec::value(const Domain& dom, double x) const {
  if (kind == Kind::bounded) return fn ? fn(x) : 0.0;
  return c * std::pow(dom.dist(x), -kappa);
}

double SourceSpec::sup_interior(const Domain& dom, double d_min) const {
  const double lo = dom.a + d_min;
  const double hi = dom.kind == Domain::Kind::interval ? dom.b - d_min : dom.a + d_min + 20.0;
  if (!(hi > lo)) return 0.0;
  double m = 0.0;
  const int n = 2001;
  for (int i = 0; i <= n; ++i) {
    const double x = lo + (hi - lo) * i / n;
    m = std::max(m, std::abs(value(dom, x)));
  }
  return m;
}

ExteriorData ExteriorData::bounded(std::function<double(double)> f) {
  ExteriorData e;
  e.kind = Kind::bounded;
  e.fn = std::move(f);
  return e;
}

ExteriorData ExteriorData::weighted(std::function<double(double)> f) {
  ExteriorData e;
  e.kind = Kind::weighted_integrable;
  e.fn = std::move(f);
  return e;
}

// -------------------------------------------------------------- ProblemSpec

ProblemSpec::ProblemSpec(double s_, double p_, double lambda_, Domain dom, GridSpec grid_,
                         SourceSpec source_, ExteriorData exterior_, OperatorSpec op_)
    : s(s_), p(p_), lambda(lambda_), domain(dom), grid(grid_),
      source(std::move(source_)), exterior(std::move(exterior_)), op(std::move(op_)) {
  if (!(s > 0.5 && s < 1.0))
    throw std::domain_error("ProblemSpec: s must lie in (1/2, 1)");
  if (!(p > 0.0 && p < 2.0 * s))
    throw std::domain_error("ProblemSpec: p must lie in (0, 2s)");
  if (std::abs(op.s - s) > 1e-12)
    throw std::invalid_argument("ProblemSpec: operator order differs from s");
}

// ------------------------------------------------------------------ lambda0

namespace {

std::vector<Kernel> member_kernels(const OperatorSpec& op) {
  switch (op.kind) {
    case OperatorSpec::Kind::linear:
      return {op.family[0][0]};
    case OperatorSpec::Kind::pucci_plus:
    case OperatorSpec::Kind::pucci_minus:
      // the class contains every multiplier in [lo, hi]; the infimum of the
      // exterior mass is attained at the lower bound
      return {Kernel::scaled(op.s, op.lo)};
    case OperatorSpec::Kind::inf_sup: {
      std::vector<Kernel> ks;
      for (const auto& row : op.family)
        for (const auto& k : row) ks.push_back(k);
      return ks;
    }
  }
  throw std::logic_error("member_kernels: unknown kind");
}

}  // namespace

double lambda0(const OperatorSpec& op, const Domain& dom, std::size_t n_scan) {
  if (dom.kind != Domain::Kind::interval)
    throw std::invalid_argument("lambda0: interval domains only");
  if (n_scan < 3) throw std::invalid_argument("lambda0: scan too coarse");
  const auto kernels = member_kernels(op);
  auto mass = [&](double x) {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& k : kernels)
      m = std::min(m, k.tail_mass(dom.b - x).value + k.tail_mass(x - dom.a).value);
    return m;
  };
  const double w = dom.b - dom.a;
  double best = std::numeric_limits<double>::infinity();
  std::size_t jbest = 0;
  for (std::size_t j = 0; j < n_scan; ++j) {
    const double x = dom.a + w * (static_cast<double>(j) + 0.5) / static_cast<double>(n_scan);
    const double m = mass(x);
    if (m < best) {
      best = m;
      jbest = j;
    }
  }
  double lo = dom.a + w * (jbest > 0 ? static_cast<double>(jbest) - 0.5 : 0.25) /
                          static_cast<double>(n_scan);
  double hi = dom.a + w * (jbest + 1 < n_scan ? static_cast<double>(jbest) + 1.5
                                              : static_cast<double>(n_scan) - 0.25) /
                          static_cast<double>(n_scan);
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
  double fc = mass(c), fd = mass(d);
  while (hi - lo > 1e-10 * w) {
    if (fc < fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - gr * (hi - lo);
      fc = mass(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + gr * (hi - lo);
      fd = mass(d);
    }
  }
  return mass(0.5 * (lo + hi));
}

// ----------------------------------------------------------------- validate

namespace {

double weight_omega(double y, double s) {
  return std::pow(1.0 + std::abs(y), -(1.0 + 2.0 * s));
}

/// crude growth exponent of |f| toward the boundary: log-log slope over the
/// band d in (1e-5, 1e-2); kappa_est = -slope
double boundary_growth_exponent(const std::function<double(double)>& f, const Domain& dom) {
  if (!f || dom.kind != Domain::Kind::interval) return 0.0;
  double kappa = 0.0;
  for (int side = 0; side < 2; ++side) {
    double sxy = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0;
    int n = 0;
    for (int i = 0; i < 7; ++i) {
      const double d = 1e-5 * std::pow(10.0, i * 0.5);
      const double x = side == 0 ? dom.a + d : dom.b - d;
      const double v = std::abs(f(x));
      if (!(v > 0.0) || !std::isfinite(v)) continue;
      const double lx = std::log(d), ly = std::log(v);
      sxy += lx * ly;
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      ++n;
    }
    if (n >= 3) {
      const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
      kappa = std::max(kappa, -slope);
    }
  }
  return kappa;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

}  // namespace

const CheckItem* ValidationReport::find(const std::string& name) const {
  for (const auto& it : items)
    if (it.name == name) return &it;
  return nullptr;
}

ValidationReport validate_problem(const ProblemSpec& spec) {
  ValidationReport r;
  auto add = [&](const std::string& name, bool pass, const std::string& detail,
                 bool mandatory) {
    r.items.push_back({name, pass, detail});
    if (mandatory && !pass) r.valid = false;
  };

  const bool s_ok = spec.s > 0.5 && spec.s < 1.0;
  add("s_range", s_ok, "s = " + fmt(spec.s) + ", admissible (1/2, 1)", true);
  const bool p_ok = spec.p > 0.0 && spec.p < 2.0 * spec.s;
  add("p_range", p_ok, "p = " + fmt(spec.p) + ", admissible (0, 2s)", true);
  const bool degen = std::abs(spec.p - 1.0) <= 1e-9;
  add("p_nondegenerate", !degen,
      degen ? "p within 1e-9 of 1: scale exponent undefined" : "p away from 1", false);

  if (spec.domain.kind == Domain::Kind::interval) {
    try {
      r.lambda0_value = lambda0(spec.op, spec.domain);
      const bool lam_ok = spec.lambda > -r.lambda0_value;
      add("lambda_above_minus_lambda0", lam_ok,
          "lambda = " + fmt(spec.lambda) + ", -lambda0 = " + fmt(-r.lambda0_value), true);
    } catch (const std::exception& ex) {
      add("lambda_above_minus_lambda0", false, std::string("lambda0 failed: ") + ex.what(),
          true);
    }
  } else {
    add("lambda_above_minus_lambda0", true,
        "half-line domain: exterior mass diverges near the endpoint; check skipped", false);
  }

  if (spec.exterior.kind == ExteriorData::Kind::zero || !spec.exterior.fn) {
    add("exterior_weighted_integrable", true, "exterior data identically zero", true);
  } else {
    auto g = [&](double y) { return std::abs(spec.exterior.fn(y)) * weight_omega(y, spec.s); };
    QuadResult q;
    if (spec.domain.kind == Domain::Kind::interval) {
      q += integrate_to_infinity(g, spec.domain.b, 1e-8);
      q += integrate_to_infinity([&](double t) { return g(spec.domain.a - t + spec.domain.a); },
                                 spec.domain.a, 1e-8);
    } else {
      q += integrate_to_infinity([&](double t) { return g(-t); }, 0.0, 1e-8);
    }
    const bool ok = std::isfinite(q.value) && q.value < 1e12 && q.error < 1e-2 * (1.0 + q.value);
    add("exterior_weighted_integrable", ok,
        "int |phi| omega approx " + fmt(q.value) + " (err " + fmt(q.error) + ")", true);
  }

  double kappa_eff = 0.0;
  std::string src_note = "bounded source";
  if (spec.source.kind == SourceSpec::Kind::power_singular) {
    kappa_eff = spec.source.kappa;
    src_note = "power source with kappa = " + fmt(kappa_eff);
  } else if (spec.source.fn) {
    kappa_eff = boundary_growth_exponent(spec.source.fn, spec.domain);
    src_note = "sampled boundary growth exponent approx " + fmt(kappa_eff);
  }
  add("source_H1", kappa_eff < spec.s + 1.0, src_note + "; (H1) needs kappa < s+1", false);
  add("source_H2", kappa_eff < 2.0 * spec.s, src_note + "; (H2) needs kappa < 2s", false);

  if (s_ok && p_ok) {
    const Exponents e = critical_exponents(spec.s);
    if (spec.p < e.p2) {
      r.cases.push_back("family");
      add("case_family", true,
          spec.p < e.p0 ? "0 < p < p2; corrector power may be chosen positive (p < p0)"
                        : "0 < p < p2",
          false);
    }
    const ScaleBand band = degen ? ScaleBand::none : scale_band(spec.s, spec.p);
    if (band == ScaleBand::positive) {
      r.cases.push_back("scale_pos");
      add("case_scale_pos", true, "p in (p1, p2): positive scale solution band", false);
    }
    if (band == ScaleBand::negative) {
      r.cases.push_back("scale_neg");
      add("case_scale_neg", true, "p in (p2, 2s): negative scale solution band", false);
    }
  }
  return r;
}

}  // namespace fhj
