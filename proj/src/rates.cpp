#include "fhj/rates.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace fhj {

namespace {

double finest_spacing(const GridFunction& u) {
  const std::vector<double>& x = u.nodes();
  double h = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < x.size(); ++i)
    h = std::min(h, x[i + 1] - x[i]);
  return h;
}

RateWindow resolve_window(const GridFunction& u, const Domain& dom,
                          RateWindow w, double hi_frac) {
  if (w.lo == 0.0 && w.hi == 0.0)
    w = {5.0 * finest_spacing(u), hi_frac * dom.diameter()};
  if (!(w.lo > 0.0 && w.lo < w.hi))
    throw std::invalid_argument("fit_boundary_rate: malformed window");
  if (!(w.hi < 0.5 * dom.diameter()))
    throw std::invalid_argument(
        "fit_boundary_rate: window leaves the smooth band of the distance");
  return w;
}

}  // namespace

RateFit fit_boundary_rate(const GridFunction& u, const Domain& dom,
                          RateWindow window, std::optional<double> hypothesis) {
  if (dom.kind != Domain::Kind::interval)
    throw std::invalid_argument("fit_boundary_rate: interval domains only");
  window = resolve_window(u, dom, window, 1e-2);

  const std::vector<double>& x = u.nodes();
  const std::vector<double>& v = u.values();
  std::vector<double> L, U;  // log d, log |u|
  int sign = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = dom.dist(x[i]);
    if (d < window.lo || d > window.hi) continue;
    const int si = v[i] > 0.0 ? 1 : (v[i] < 0.0 ? -1 : 0);
    if (si == 0 || (sign != 0 && si != sign))
      throw std::runtime_error(
          "fit_boundary_rate: u changes sign inside the window, rate "
          "ambiguous");
    sign = si;
    L.push_back(std::log(d));
    U.push_back(std::log(std::abs(v[i])));
  }
  const std::size_t m = L.size();
  if (m < 6)
    throw std::invalid_argument(
        "fit_boundary_rate: fewer than 6 nodes in the window");

  const double mm = static_cast<double>(m);
  const double mL = std::accumulate(L.begin(), L.end(), 0.0) / mm;
  const double mU = std::accumulate(U.begin(), U.end(), 0.0) / mm;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (L[i] - mL) * (L[i] - mL);
    sxy += (L[i] - mL) * (U[i] - mU);
    syy += (U[i] - mU) * (U[i] - mU);
  }

  RateFit fit;
  fit.d_min = window.lo;
  fit.d_max = window.hi;
  fit.n_points = m;
  fit.exponent = sxx > 0.0 ? sxy / sxx : 0.0;
  // constant data fits its own horizontal line exactly
  const double sse = syy - fit.exponent * sxy;
  fit.r_squared = syy > 0.0 ? std::max(0.0, 1.0 - sse / syy) : 1.0;
  const double e_amp = hypothesis ? *hypothesis : fit.exponent;
  fit.coefficient = sign * std::exp(mU - e_amp * mL);
  return fit;
}

FamilyVerdict verify_family(
    const std::vector<std::pair<double, GridFunction>>& members,
    const Domain& dom, double s, const FamilyCheck& check) {
  if (members.empty())
    throw std::invalid_argument("verify_family: no members");
  const std::vector<double>& x0 = members.front().second.nodes();
  for (const auto& [t, u] : members) {
    (void)t;
    if (u.nodes() != x0)
      throw std::invalid_argument("verify_family: members on different grids");
  }

  FamilyVerdict v;
  std::ostringstream why;

  // strict nodewise ordering along increasing t
  std::vector<std::size_t> order(members.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return members[a].first < members[b].first;
  });
  v.ordered = true;
  for (std::size_t k = 0; k + 1 < order.size() && v.ordered; ++k) {
    const auto& [ta, ua] = members[order[k]];
    const auto& [tb, ub] = members[order[k + 1]];
    for (std::size_t i = 0; i < x0.size(); ++i) {
      if (!(ua.values()[i] < ub.values()[i])) {
        v.ordered = false;
        why << "ordering fails between t = " << ta << " and t = " << tb
            << " at x = " << x0[i] << "; ";
        break;
      }
    }
  }

  RateWindow w = check.window;
  if (w.lo == 0.0 && w.hi == 0.0)
    w = {5.0 * finest_spacing(members.front().second),
         2.5e-3 * dom.diameter()};

  v.rates_ok = true;
  for (const auto& [t, u] : members) {
    const RateFit fit = fit_boundary_rate(u, dom, w, s - 1.0);
    v.fits.push_back(fit);
    if (std::abs(fit.exponent - (s - 1.0)) > check.exponent_tol) {
      v.rates_ok = false;
      why << "t = " << t << ": exponent " << fit.exponent << " vs " << s - 1.0
          << "; ";
    }
    if (std::abs(fit.coefficient - t) > check.coeff_rtol * std::abs(t)) {
      v.rates_ok = false;
      why << "t = " << t << ": coefficient " << fit.coefficient << "; ";
    }
  }

  v.pass = v.ordered && v.rates_ok;
  v.detail = why.str();
  return v;
}

}  // namespace fhj
