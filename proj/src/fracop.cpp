#include "fhj/fracop.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fhj/constants.hpp"

namespace fhj {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Mode { linear, plus, minus };

/// Shared machinery for one principal-value evaluation at x.  The integrand
/// acts on the symmetrized second difference
///   delta(z) = u(x+z) + u(x-z) - 2 u(x),
/// which kills the PV pairing and leaves an integrable O(z^2) origin.
struct Engine {
  Mode mode;
  const Kernel* kern;  // linear mode only
  double s;
  double lo, hi;       // extremal bounds
  const Field& u;
  double x;
  double ux;
  mutable std::size_t evals = 0;

  double delta(double z) const {
    evals += 2;
    return u.pair_difference(x, z);
  }

  double weight(double d, double z) const {
    switch (mode) {
      case Mode::linear:
        return d * kern->density(z);
      case Mode::plus:
        return (d >= 0.0 ? hi : lo) * d * std::pow(z, -(1.0 + 2.0 * s));
      case Mode::minus:
        return (d >= 0.0 ? lo : hi) * d * std::pow(z, -(1.0 + 2.0 * s));
    }
    return 0.0;
  }

  double integrand(double z) const { return weight(delta(z), z); }

  // factor applied to a constant-sign tail where delta == -2 u(x)
  double tail_factor() const {
    switch (mode) {
      case Mode::linear:
        return 1.0;
      case Mode::plus:
        return ux <= 0.0 ? hi : lo;
      case Mode::minus:
        return ux <= 0.0 ? lo : hi;
    }
    return 1.0;
  }

  QuadResult unit_tail_mass(double R) const {
    if (mode == Mode::linear) return kern->tail_mass(R);
    QuadResult q;
    q.value = std::pow(R, -2.0 * s) / (2.0 * s);
    return q;
  }

  QuadResult second_moment(double r) const {
    if (mode == Mode::linear) return kern->second_moment(r);
    QuadResult q;
    q.value = std::pow(r, 2.0 - 2.0 * s) / (2.0 - 2.0 * s);
    return q;
  }
};

struct SingularDist {
  double z;
  double expo;
};

/// int_Z^inf (z + a)^e z^{-1-2s} dz for |a| <= Z/2, via the binomial series
/// in a/z: sum_j C(e,j) a^j Z^{e-j-2s}/(2s+j-e).  Exact for power tails and
/// stable arbitrarily close to the integrability edge e -> 2s.
double power_tail_integral(double a, double e, double s, double Z, double& err) {
  double sum = 0.0, binom = 1.0, aj = 1.0, last = 0.0;
  for (int j = 0; j < 80; ++j) {
    const double term = binom * aj * std::pow(Z, e - j - 2.0 * s) / (2.0 * s + j - e);
    sum += term;
    last = std::abs(term);
    if (last <= 1e-17 * std::abs(sum) + 1e-300) {
      err += last;
      return sum;
    }
    binom *= (e - j) / (j + 1.0);
    aj *= a;
    if (binom == 0.0) return sum;  // integer exponent, series terminates
  }
  err += 10.0 * last;
  return sum;
}

/// Exact tail profile delta(z) = u(x+z) + u(x-z) - 2u(x) for z beyond every
/// breakpoint, assembled from the field's closed-form power expansions.
struct TailSeries {
  std::vector<TailTerm> plus_terms, minus_terms;
  double x = 0.0, ux = 0.0;

  double at(double z) const {
    double v = -2.0 * ux;
    for (const auto& t : plus_terms) v += t.coef * std::pow(x + z, t.expo);
    for (const auto& t : minus_terms) v += t.coef * std::pow(z - x, t.expo);
    return v;
  }

  // int_Z^inf delta(z) z^{-1-2s} dz with accumulated series error
  double integral(double s, double Z, double& err) const {
    double v = -2.0 * ux * std::pow(Z, -2.0 * s) / (2.0 * s);
    for (const auto& t : plus_terms)
      v += t.coef * power_tail_integral(x, t.expo, s, Z, err);
    for (const auto& t : minus_terms)
      v += t.coef * power_tail_integral(-x, t.expo, s, Z, err);
    return v;
  }
};

EvalResult eval_core(const Engine& eng, double tol) {
  EvalResult res;
  const Field& u = eng.u;
  const double x = eng.x;
  const double xscale = 1.0 + std::abs(x);

  // distances from x to the non-smooth points of u
  std::vector<SingularDist> sd;
  for (const Breakpoint& bp : u.breakpoints()) {
    const double z = std::abs(bp.y - x);
    if (z <= 1e-13 * xscale) {
      if (bp.expo < 2.0 - 1e-12 && bp.expo != 1.0)
        throw std::runtime_error("eval: x sits on a singular point of u");
      continue;
    }
    bool merged = false;
    for (auto& e : sd) {
      if (std::abs(e.z - z) <= 1e-12 * (z + xscale)) {
        e.expo = std::min(e.expo, bp.expo);
        merged = true;
        break;
      }
    }
    if (!merged) sd.push_back({z, bp.expo});
  }
  std::sort(sd.begin(), sd.end(), [](const auto& a, const auto& b) { return a.z < b.z; });
  const double zmin = sd.empty() ? kInf : sd.front().z;
  const double zmax = sd.empty() ? 0.0 : sd.back().z;

  // near-field radius: inside it u is replaced by its local C^2 model
  double r0 = u.local_scale(x);
  if (r0 <= 0.0) r0 = std::min(0.5 * xscale, 0.45 * zmin);
  r0 = std::min(r0, 0.45 * zmin);
  if (!(r0 > 0.0)) throw std::runtime_error("eval: empty near field");

  double zm = std::min(1e-4 * xscale, 0.5 * r0);
  const double c2 = u.curvature(x);
  const double hi_f = eng.mode == Mode::linear ? 1.0 : eng.hi;

  // Size the model zone so the quartic truncation |u''''| z^4 / 12 stays
  // inside the error budget; the fourth derivative comes from second
  // differences of the curvature, which is analytic for closed-form fields.
  // Without this the truncation would be a fixed fraction of the near term
  // whenever the boundary distance (and with it r0) is small.
  {
    const double zfloor = 1e-8 * xscale;
    for (int it = 0; it < 60 && zm > zfloor; ++it) {
      const double h = 0.5 * zm;
      const double c4 =
          (u.curvature(x + h) + u.curvature(x - h) - 2.0 * c2) / (h * h);
      const double m2 = eng.second_moment(zm).value;
      const double est = std::abs(c4) / 12.0 * zm * zm * std::abs(m2) * hi_f;
      if (est <= 0.125 * tol) break;
      zm *= 0.5;
    }
  }

  // [0, zm]: quadratic model, delta ~ c2 z^2
  {
    QuadResult m2 = eng.second_moment(zm);
    double factor = 1.0;
    if (eng.mode == Mode::plus) factor = c2 >= 0.0 ? eng.hi : eng.lo;
    if (eng.mode == Mode::minus) factor = c2 >= 0.0 ? eng.lo : eng.hi;
    res.near_field += factor * c2 * m2.value;
    res.quad_error += std::abs(factor * c2) * m2.error;
    // model-consistency probe at the edge of the zone
    const double probe = std::abs(eng.delta(zm) - c2 * zm * zm);
    res.quad_error += probe / (zm * zm) * std::abs(m2.value) *
                      (eng.mode == Mode::linear ? 1.0 : eng.hi);
  }

  auto F = [&eng](double z) { return eng.integrand(z); };
  const double tolp = tol / 64.0;

  // (zm, r0]: direct evaluation, geometric sub-panels toward zm
  {
    std::vector<double> edges{zm};
    while (edges.back() * 4.0 < r0) edges.push_back(edges.back() * 4.0);
    edges.push_back(r0);
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
      QuadResult q = integrate(F, edges[i], edges[i + 1], tolp);
      res.near_field += q.value;
      res.quad_error += q.error;
      res.evals += q.evals;
    }
  }

  // decide the panel cutoff and the tail treatment
  const Growth gr = u.growth();
  const bool compact = gr.C == 0.0;  // u vanishes outside its breakpoint hull
  if (!compact && gr.q >= 2.0 * eng.s)
    throw std::runtime_error("eval: exterior growth makes the integral diverge");
  const double zcut = compact ? std::max(zmax, r0)
                              : std::max({4.0 * r0, 2.0 * zmax, 10.0 * xscale});

  // [r0, zcut]: geometric doubling, split at singular distances, power
  // substitution on panels that end at one
  {
    std::vector<double> edges{r0};
    std::size_t next_sd = 0;
    while (next_sd < sd.size() && sd[next_sd].z <= r0 * (1.0 + 1e-12)) ++next_sd;
    while (edges.back() < zcut * (1.0 - 1e-12)) {
      double e = std::min(edges.back() * 2.0, zcut);
      if (next_sd < sd.size() && sd[next_sd].z < e * (1.0 - 1e-12)) {
        e = sd[next_sd].z;
        ++next_sd;
      } else if (next_sd < sd.size() && sd[next_sd].z <= e * (1.0 + 1e-12)) {
        e = sd[next_sd].z;
        ++next_sd;
      }
      edges.push_back(e);
    }
    auto singular_at = [&](double z, double& expo) {
      for (const auto& e : sd) {
        if (std::abs(e.z - z) <= 1e-12 * (z + xscale) && e.expo < 1.0) {
          expo = e.expo;
          return true;
        }
      }
      return false;
    };
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
      const double p = edges[i], q = edges[i + 1];
      double ep = 0.0, eq = 0.0;
      const bool sp = singular_at(p, ep), sq = singular_at(q, eq);
      QuadResult qr;
      if (sp && sq) {
        const double mid = 0.5 * (p + q);
        qr = integrate_power_endpoint(F, p, mid, p, ep, 0.5 * tolp);
        qr += integrate_power_endpoint(F, mid, q, q, eq, 0.5 * tolp);
      } else if (sp) {
        qr = integrate_power_endpoint(F, p, q, p, ep, tolp);
      } else if (sq) {
        qr = integrate_power_endpoint(F, p, q, q, eq, tolp);
      } else {
        qr = integrate(F, p, q, tolp);
      }
      res.far_field += qr.value;
      res.quad_error += qr.error;
      res.evals += qr.evals;
    }
  }

  // tail beyond zcut
  if (compact) {
    // both u(x+z) and u(x-z) vanish: delta == -2 u(x), constant sign
    QuadResult tm = eng.unit_tail_mass(zcut);
    res.tail = eng.tail_factor() * (-2.0 * eng.ux) * tm.value;
    res.quad_error += std::abs(2.0 * eng.ux * eng.tail_factor()) * tm.error;
  } else {
    const auto tp = u.tail_terms(+1);
    const auto tm = u.tail_terms(-1);
    const bool closed_form_kernel = eng.mode != Mode::linear || eng.kern->constant();
    if (tp && tm && closed_form_kernel) {
      TailSeries ts{*tp, *tm, x, eng.ux};
      const double kscale = eng.mode == Mode::linear ? eng.kern->scale : 1.0;
      auto weight_for = [&](double sign) {
        if (eng.mode == Mode::linear) return kscale;
        if (eng.mode == Mode::plus) return sign >= 0.0 ? eng.hi : eng.lo;
        return sign >= 0.0 ? eng.lo : eng.hi;
      };
      double Z = zcut;
      const double d_near = ts.at(Z), d_far = ts.at(1e12);
      if (eng.mode != Mode::linear && d_near * d_far < 0.0) {
        // the profile changes sign inside the tail: locate the crossing and
        // cover [zcut, z*] with explicit panels (pointwise-correct weights)
        double a = std::log(Z), b = std::log(1e12);
        for (int it = 0; it < 100; ++it) {
          const double m = 0.5 * (a + b);
          (ts.at(std::exp(m)) * d_near > 0.0 ? a : b) = m;
        }
        const double zstar = std::exp(b);
        double edge = Z;
        while (edge < zstar) {
          const double e2 = std::min(edge * 2.0, zstar);
          QuadResult q = integrate(F, edge, e2, tolp);
          res.tail += q.value;
          res.quad_error += q.error;
          res.evals += q.evals;
          edge = e2;
        }
        Z = zstar;
      }
      double serr = 0.0;
      const double S = ts.integral(eng.s, Z, serr);
      const double w = weight_for(ts.at(Z * 2.0) >= 0.0 ? 1.0 : -1.0);
      res.tail += w * S;
      res.quad_error += std::abs(w) * serr + 1e-16 * std::abs(w * S);
    } else {
      QuadResult q = integrate_to_infinity(F, zcut, tol / 4.0);
      res.tail = q.value;
      res.quad_error += q.error;
      res.evals += q.evals;
    }
  }

  res.evals += eng.evals;
  res.value = res.near_field + res.far_field + res.tail;
  if (!(res.quad_error <= std::max(10.0 * tol, 1e-12 * std::abs(res.value)))) {
    res.ok = false;
    res.note = "error estimate above tolerance";
  }
  return res;
}

}  // namespace

EvalResult eval_linear_pv(const Kernel& k, const Field& u, double x, double tol) {
  Engine eng{Mode::linear, &k, k.s, k.lo, k.hi, u, x, u.value(x)};
  return eval_core(eng, tol);
}

std::optional<EvalResult> eval_power_split(const Kernel& k, const PowerField& u,
                                           double x, double tol) {
  if (!k.constant()) return std::nullopt;
  const Domain& dom = u.domain();
  if (!dom.inside(x)) return std::nullopt;
  const double s = k.s;
  for (double t : u.tau())
    if (t != 0.0 && !(t > -1.0 && t < 2.0 * s)) return std::nullopt;

  const bool interval = dom.kind == Domain::Kind::interval;
  const double mid = interval ? 0.5 * (dom.a + dom.b) : 0.0;
  double xx = x;
  if (interval) {
    if (x > mid) xx = dom.a + dom.b - x;  // dist and K are mirror symmetric
    if (!(mid - xx > 0.05 * (mid - dom.a))) return std::nullopt;
  }
  const double d = xx - dom.a;

  EvalResult res;
  const std::size_t nt = u.tau().size();
  for (std::size_t i = 0; i < nt; ++i) {
    const double c = u.coef()[i];
    const double t = u.tau()[i];
    if (c == 0.0) continue;
    if (t == 0.0) {
      // indicator term: the principal value collapses to -c times the kernel
      // mass of the exterior as seen from x
      QuadResult mass = k.tail_mass(d);
      if (interval) mass += k.tail_mass(dom.b - xx);
      res.tail -= c * mass.value;
      res.quad_error += std::abs(c) * mass.error;
      res.evals += mass.evals;
      continue;
    }
    const CValue cv = c_kernel(k, t, 1e-12);
    const double pw = std::pow(d, t - 2.0 * s);
    res.near_field += c * cv.value * pw;
    res.quad_error += std::abs(c) * cv.error * pw;
    if (!interval) continue;
    // Correction for the far half, where dist(y) = b-y while the half-line
    // profile continues as (y-a)^t.  Absolute-size integrals: their error
    // budget does not need to chase the d^{t-2s} magnitude of the main term.
    const double tolR = 0.2 * std::max(tol, 1e-13) /
                        (static_cast<double>(nt) * std::max(1.0, std::abs(c)));
    auto ker = [&](double y) { return k.density(y - xx); };
    auto profile = [&](double y) { return std::pow(y - dom.a, t) * ker(y); };
    const QuadResult A =
        integrate_power_weight(ker, mid, dom.b, dom.b, t, tolR);
    const QuadResult B = integrate(profile, mid, dom.b, tolR);
    const QuadResult C = integrate_to_infinity(profile, dom.b, tolR);
    res.far_field += c * (A.value - B.value - C.value);
    res.quad_error += std::abs(c) * (A.error + B.error + C.error);
    res.evals += A.evals + B.evals + C.evals;
  }
  res.value = res.near_field + res.far_field + res.tail;
  res.ok = res.quad_error <= 10.0 * tol;
  if (!res.ok) res.note = "error estimate above tolerance";
  return res;
}

EvalResult eval_extremal(double s, double lo, double hi, bool plus, const Field& u,
                         double x, double tol) {
  if (!(0.0 < lo && lo <= hi)) throw std::invalid_argument("eval_extremal: bad bounds");
  Engine eng{plus ? Mode::plus : Mode::minus, nullptr, s, lo, hi, u, x, u.value(x)};
  return eval_core(eng, tol);
}

namespace {

EvalResult eval_linear_smart(const Kernel& k, const Field& u, double x, double tol) {
  if (const auto* p = dynamic_cast<const PowerField*>(&u))
    if (auto r = eval_power_split(k, *p, x, tol)) return *r;
  return eval_linear_pv(k, u, x, tol);
}

}  // namespace

InfSupResult eval_inf_sup(const OperatorSpec& op, const Field& u, double x, double tol) {
  if (op.family.empty()) throw std::invalid_argument("eval_inf_sup: no kernels");
  InfSupResult best;
  bool outer_set = false;
  for (std::size_t i = 0; i < op.family.size(); ++i) {
    EvalResult inner;
    std::size_t jbest = 0;
    bool inner_set = false;
    for (std::size_t j = 0; j < op.family[i].size(); ++j) {
      EvalResult e = eval_linear_smart(op.family[i][j], u, x, tol);
      const bool better = !inner_set || (op.outer_sup ? e.value < inner.value
                                                      : e.value > inner.value);
      if (better) {
        inner = e;
        jbest = j;
        inner_set = true;
      }
    }
    const bool better = !outer_set || (op.outer_sup ? inner.value > best.eval.value
                                                    : inner.value < best.eval.value);
    if (better) {
      best.eval = inner;
      best.outer = i;
      best.inner = jbest;
      outer_set = true;
    }
  }
  return best;
}

EvalResult evaluate(const OperatorSpec& op, const Field& u, double x, double tol) {
  switch (op.kind) {
    case OperatorSpec::Kind::linear:
      return eval_linear_smart(op.family[0][0], u, x, tol);
    case OperatorSpec::Kind::pucci_plus:
      return eval_extremal(op.s, op.lo, op.hi, true, u, x, tol);
    case OperatorSpec::Kind::pucci_minus:
      return eval_extremal(op.s, op.lo, op.hi, false, u, x, tol);
    case OperatorSpec::Kind::inf_sup:
      return eval_inf_sup(op, u, x, tol).eval;
  }
  throw std::logic_error("evaluate: unknown operator kind");
}

std::vector<EvalResult> apply_on_grid(const OperatorSpec& op, const GridFunction& u,
                                      double tol, Exec exec) {
  const auto& nodes = u.nodes();
  std::vector<EvalResult> out(nodes.size());
  auto work = [&](std::ptrdiff_t i) {
    try {
      out[static_cast<std::size_t>(i)] =
          evaluate(op, u, nodes[static_cast<std::size_t>(i)], tol);
    } catch (const std::exception& ex) {
      out[static_cast<std::size_t>(i)].ok = false;
      out[static_cast<std::size_t>(i)].note =
          "node " + std::to_string(i) + ": " + ex.what();
    }
  };
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(nodes.size());
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) work(i);
  } else {
    for (std::ptrdiff_t i = 0; i < n; ++i) work(i);
  }
  return out;
}

}  // namespace fhj
