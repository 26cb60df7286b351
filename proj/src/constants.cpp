#include "fhj/constants.hpp"

#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace fhj {

namespace {

void check_tau(double tau, double s) {
  if (!(tau > -1.0 && tau < 2.0 * s))
    throw std::domain_error("boundary constant: tau must lie in (-1, 2s)");
}

FieldPtr halfline_profile(double tau) {
  return dist_power(Domain::half_line(), tau);
}

CValue from_eval(const EvalResult& r) { return {r.value, r.quad_error}; }

}  // namespace

CValue c_kernel(const Kernel& k, double tau, double tol) {
  check_tau(tau, k.s);
  // Constant-multiplier kernels are queried over and over with the same
  // exponent (curve sampling, barrier residuals, expansion probes), so their
  // constants are memoized.  Entries are always computed at one fixed tight
  // tolerance: the cached value never depends on which caller arrived first,
  // which keeps multi-threaded runs bit-identical to serial ones.
  constexpr double kCacheTol = 1e-12;
  if (k.constant() && tol >= kCacheTol) {
    static std::map<std::array<double, 3>, CValue> cache;
    static std::mutex mtx;
    const std::array<double, 3> key{k.s, k.scale, tau};
    {
      std::lock_guard<std::mutex> lock(mtx);
      auto it = cache.find(key);
      if (it != cache.end()) return it->second;
    }
    const FieldPtr w = halfline_profile(tau);
    const CValue v = from_eval(eval_linear_pv(k, *w, 1.0, kCacheTol));
    std::lock_guard<std::mutex> lock(mtx);
    return cache.emplace(key, v).first->second;
  }
  const FieldPtr w = halfline_profile(tau);
  return from_eval(eval_linear_pv(k, *w, 1.0, tol));
}

CValue c_extremal(double s, double lo, double hi, bool plus, double tau, double tol) {
  check_tau(tau, s);
  const FieldPtr w = halfline_profile(tau);
  return from_eval(eval_extremal(s, lo, hi, plus, *w, 1.0, tol));
}

CValue c_operator(const OperatorSpec& op, double tau, double tol) {
  check_tau(tau, op.s);
  const FieldPtr w = halfline_profile(tau);
  return from_eval(evaluate(op, *w, 1.0, tol));
}

CValue c_tilde(const OperatorSpec& op, double tau, double tol) {
  return c_operator(op.reflected(), tau, tol);
}

CurveSample sample_curve(const OperatorSpec& op, std::size_t n, double tol, Exec exec) {
  if (n < 2) throw std::invalid_argument("sample_curve: need at least 2 nodes");
  CurveSample cs;
  cs.s = op.s;
  const double lo = -0.95, hi = 2.0 * op.s - 0.05;
  cs.tau_nodes.resize(n);
  cs.values.resize(n);
  cs.errors.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    cs.tau_nodes[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  const std::ptrdiff_t m = static_cast<std::ptrdiff_t>(n);
  auto work = [&](std::ptrdiff_t i) {
    const CValue v = c_operator(op, cs.tau_nodes[static_cast<std::size_t>(i)], tol);
    cs.values[static_cast<std::size_t>(i)] = v.value;
    cs.errors[static_cast<std::size_t>(i)] = v.error;
  };
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < m; ++i) work(i);
  } else {
    for (std::ptrdiff_t i = 0; i < m; ++i) work(i);
  }
  return cs;
}

double c_zero(const OperatorSpec& op, double lo, double hi, double tol_tau,
              double quad_tol) {
  double flo = c_operator(op, lo, quad_tol).value;
  double fhi = c_operator(op, hi, quad_tol).value;
  if (flo * fhi > 0.0)
    throw std::invalid_argument("c_zero: no sign change on the bracket");
  while (hi - lo > tol_tau) {
    const double mid = 0.5 * (lo + hi);
    const double fm = c_operator(op, mid, quad_tol).value;
    if (fm * flo <= 0.0) {
      hi = mid;
      fhi = fm;
    } else {
      lo = mid;
      flo = fm;
    }
  }
  (void)fhi;
  return 0.5 * (lo + hi);
}

std::pair<double, double> c_zeros(const OperatorSpec& op, double tol_tau) {
  const double s = op.s;
  const double z1 = c_zero(op, s - 1.15, s - 0.85, tol_tau);
  const double z2 = c_zero(op, s - 0.15, s + 0.15, tol_tau);
  return {z1, z2};
}

double spherical_weight(int N, double s,
                        const std::function<double(const std::array<double, 3>&)>& a,
                        double tol) {
  if (N < 1 || N > 3)
    throw std::invalid_argument("spherical_weight: N must be 1, 2 or 3");
  if (N == 1) return a({1.0, 0.0, 0.0}) + a({-1.0, 0.0, 0.0});
  const double pi = std::acos(-1.0);
  if (N == 2) {
    // weight |sin t|^{2s} has power behaviour at multiples of pi
    auto f = [&](double t) {
      return std::pow(std::abs(std::sin(t)), 2.0 * s) * a({std::cos(t), std::sin(t), 0.0});
    };
    QuadResult q;
    q += integrate_power_endpoint(f, 0.0, 0.5 * pi, 0.0, 2.0 * s, tol / 4.0);
    q += integrate_power_endpoint(f, 0.5 * pi, pi, pi, 2.0 * s, tol / 4.0);
    q += integrate_power_endpoint(f, pi, 1.5 * pi, pi, 2.0 * s, tol / 4.0);
    q += integrate_power_endpoint(f, 1.5 * pi, 2.0 * pi, 2.0 * pi, 2.0 * s, tol / 4.0);
    return q.value;
  }
  // N == 3: polar angle ph from the north pole, theta_3 = cos(ph)
  auto outer = [&](double ph) {
    const double sp = std::sin(ph), cp = std::cos(ph);
    auto inner = [&](double ps) {
      return a({sp * std::cos(ps), sp * std::sin(ps), cp});
    };
    const QuadResult qi = integrate(inner, 0.0, 2.0 * pi, tol / 8.0);
    return std::pow(std::abs(cp), 2.0 * s) * sp * qi.value;
  };
  QuadResult q;
  q += integrate_power_endpoint(outer, 0.0, 0.5 * pi, 0.5 * pi, 2.0 * s, tol / 2.0);
  q += integrate_power_endpoint(outer, 0.5 * pi, pi, 0.5 * pi, 2.0 * s, tol / 2.0);
  return q.value;
}

ScaleConstants scale_constants(double s, double p, double t, const CaseInputs& c) {
  if (!(s > 0.5 && s < 1.0)) throw std::domain_error("scale_constants: s outside (1/2,1)");
  if (!(p > 0.0 && p < 2.0 * s)) throw std::domain_error("scale_constants: p outside (0,2s)");
  ScaleConstants out;
  if (!std::isnan(c.c_plus_gamma)) {
    if (!(c.c_plus_gamma < 0.0))
      throw std::domain_error("scale_constants: c+(gamma) must be negative for the family case");
    out.C1_bar = std::pow(std::abs(t * (s - 1.0)), p) / std::abs(c.c_plus_gamma);
  }
  const bool wants_beta = !std::isnan(c.c_beta) || !std::isnan(c.c_tilde_beta);
  if (wants_beta) {
    if (!(p > 1.0))
      throw std::domain_error("scale_constants: scale amplitudes need p in (1, 2s)");
    out.beta = (2.0 * s - p) / (1.0 - p);
    const double bp = std::pow(std::abs(out.beta), p);
    if (!std::isnan(c.c_beta)) {
      if (!(c.c_beta > 0.0))
        throw std::domain_error("scale_constants: c(beta) must be positive for the positive scale case");
      out.T_bar = std::pow(c.c_beta / bp, 1.0 / (p - 1.0));
    }
    if (!std::isnan(c.c_tilde_beta)) {
      if (!(c.c_tilde_beta < 0.0))
        throw std::domain_error("scale_constants: c~(beta) must be negative for the negative scale case");
      out.T_star = std::pow(-c.c_tilde_beta / bp, 1.0 / (p - 1.0));
    }
  }
  return out;
}

}  // namespace fhj
