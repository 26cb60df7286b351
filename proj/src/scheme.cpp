#include "fhj/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "fhj/quad.hpp"

namespace fhj {

DiscreteOperator::DiscreteOperator(const OperatorSpec& op, const Domain& dom,
                                   std::vector<double> nodes)
    : dom_(dom), x_(std::move(nodes)) {
  if (op.kind != OperatorSpec::Kind::linear)
    throw std::invalid_argument(
        "DiscreteOperator: only single-kernel generators assemble to a fixed "
        "matrix");
  if (dom_.kind != Domain::Kind::interval)
    throw std::invalid_argument("DiscreteOperator: interval domains only");
  const std::size_t n = x_.size();
  if (n < 3) throw std::invalid_argument("DiscreteOperator: need >= 3 nodes");
  for (std::size_t i = 0; i < n; ++i) {
    if (!dom_.inside(x_[i]) || (i > 0 && !(x_[i] > x_[i - 1])))
      throw std::invalid_argument("DiscreteOperator: nodes must be ascending "
                                  "interior points");
  }
  k_ = op.family.at(0).at(0);

  hm_.resize(n);
  hp_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    hm_[i] = x_[i] - (i == 0 ? dom_.a : x_[i - 1]);
    hp_[i] = (i + 1 == n ? dom_.b : x_[i + 1]) - x_[i];
  }

  A_ = Matrix(n, n, 0.0);
  wa_.assign(n, 0.0);
  wb_.assign(n, 0.0);
  mext_.assign(n, 0.0);

  // grid point j = -1 is the left anchor, j = n the right anchor
  auto pt = [&](std::int64_t j) {
    if (j < 0) return dom_.a;
    if (j >= static_cast<std::int64_t>(n)) return dom_.b;
    return x_[static_cast<std::size_t>(j)];
  };

#pragma omp parallel for schedule(static)
  for (std::int64_t ii = 0; ii < static_cast<std::int64_t>(n); ++ii) {
    const std::size_t i = static_cast<std::size_t>(ii);
    double* row = A_.row(i);
    auto add = [&](std::int64_t j, double w) {
      if (j < 0)
        wa_[i] += w;
      else if (j >= static_cast<std::int64_t>(n))
        wb_[i] += w;
      else
        row[j] += w;
    };

    const double hm = hm_[i], hp = hp_[i];
    const double r = std::min(hm, hp);

    // near field: curvature stencil weighted by the truncated second moment
    const double mu = k_.second_moment(r).value;
    const double cl = 2.0 / (hm * (hm + hp));
    const double cr = 2.0 / (hp * (hm + hp));
    add(static_cast<std::int64_t>(i) - 1, mu * cl);
    add(static_cast<std::int64_t>(i) + 1, mu * cr);
    add(static_cast<std::int64_t>(i), -mu * 2.0 / (hm * hp));

    // hat weights of one clipped segment [y1, y2] at distances [r1, r2] from
    // the node; the end values enter with nonnegative weights w1 + w2 = m0
    // and the node itself loses the full segment mass.
    auto segment = [&](double r1, double r2, std::int64_t j1, std::int64_t j2,
                       double theta_self) {
      if (!(r2 - r1 > 1e-14 * r2)) return;
      double m0 = 0.0, m1 = 0.0;
      k_.segment_masses(r1, r2, m0, m1);
      double w2 = (m1 - r1 * m0) / (r2 - r1);
      w2 = std::clamp(w2, 0.0, m0);
      const double w1 = m0 - w2;
      if (theta_self > 0.0) {  // partial segment: near end sits between nodes
        add(static_cast<std::int64_t>(i), w1 * (1.0 - theta_self));
        add(j1, w1 * theta_self);
      } else {
        add(j1, w1);
      }
      add(j2, w2);
      add(static_cast<std::int64_t>(i), -m0);
    };

    // right of the node
    for (std::int64_t m = static_cast<std::int64_t>(i);
         m < static_cast<std::int64_t>(n); ++m) {
      const double yl = pt(m), yr = pt(m + 1);
      const double lo = std::max(yl, x_[i] + r);
      if (lo >= yr) continue;
      const bool partial = lo > yl;
      segment(lo - x_[i], yr - x_[i], m + (partial ? 1 : 0), m + 1,
              partial ? r / hp : 0.0);
    }
    // left of the node (kernel symmetry: same masses at equal distances)
    for (std::int64_t m = static_cast<std::int64_t>(i); m >= 0; --m) {
      const double yl = pt(m - 1), yr = pt(m);
      const double hi = std::min(yr, x_[i] - r);
      if (hi <= yl) continue;
      const bool partial = hi < yr;
      segment(x_[i] - hi, x_[i] - yl, m - (partial ? 1 : 0), m - 1,
              partial ? r / hm : 0.0);
    }

    // complement mass: constants outside are data, so it sits on the diagonal
    const double me =
        k_.tail_mass(x_[i] - dom_.a).value + k_.tail_mass(dom_.b - x_[i]).value;
    mext_[i] = me;
    row[i] -= me;
  }
}

std::vector<double> DiscreteOperator::apply(const std::vector<double>& u,
                                            double ua, double ub,
                                            const std::vector<double>& load) const {
  std::vector<double> y = matvec(A_, u);
  const std::size_t n = x_.size();
  for (std::size_t i = 0; i < n; ++i) {
    y[i] += wa_[i] * ua + wb_[i] * ub;
    if (!load.empty()) y[i] += load[i];
  }
  return y;
}

std::vector<double> DiscreteOperator::exterior_load(const Field& phi,
                                                    double tol) const {
  const std::size_t n = x_.size();
  std::vector<double> load(n, 0.0);

  // The load is a plain one-sided integral per complement ray (the kernel is
  // analytic there; no principal value is involved), so the panel set -- the
  // data's breakpoints on each ray -- is decomposed once and shared by all
  // nodes.  Only the kernel factor changes from node to node.
  struct Ray {
    std::vector<double> edge;  // [0] = domain boundary, then outward
    std::vector<double> expo;  // leading order of phi at each edge
    int sign = 0;              // outward direction
    bool tail = false;         // phi extends beyond the last edge
  };
  const Growth gr = phi.growth();
  const bool compact = gr.C == 0.0;  // phi vanishes outside its breakpoints
  if (!compact && gr.q >= 2.0 * k_.s)
    throw std::invalid_argument(
        "exterior_load: data growth makes the load diverge");
  auto make_ray = [&](int sign) {
    const double b0 = sign < 0 ? dom_.a : dom_.b;
    Ray r;
    r.sign = sign;
    r.edge.push_back(b0);
    r.expo.push_back(2.0);
    std::vector<Breakpoint> bps = phi.breakpoints();
    std::sort(bps.begin(), bps.end(),
              [sign](const Breakpoint& u, const Breakpoint& v) {
                return sign < 0 ? u.y > v.y : u.y < v.y;
              });
    for (const Breakpoint& bp : bps) {
      const double d = sign < 0 ? b0 - bp.y : bp.y - b0;
      if (d < 0.0) continue;  // interior point or the other ray
      if (std::abs(bp.y - r.edge.back()) <= 1e-14 * (1.0 + std::abs(bp.y))) {
        r.expo.back() = std::min(r.expo.back(), bp.expo);
        continue;
      }
      r.edge.push_back(bp.y);
      r.expo.push_back(bp.expo);
    }
    r.tail = !compact;
    return r;
  };
  const Ray rays[2] = {make_ray(-1), make_ray(+1)};
  std::size_t npanel = 0;
  for (const Ray& r : rays)
    npanel += r.edge.size() - 1 + (r.tail ? 1 : 0);
  if (npanel == 0) return load;

#pragma omp parallel for schedule(static)
  for (std::int64_t ii = 0; ii < static_cast<std::int64_t>(n); ++ii) {
    const std::size_t i = static_cast<std::size_t>(ii);
    const double xi = x_[i];
    // budget the node in proportion to its exterior kernel mass: the load is
    // bounded by |phi| times that mass and the same mass sits on the scheme's
    // diagonal, so a mass-scaled quadrature error stays a uniform
    // perturbation of the solved values instead of an absolute one
    const double share =
        tol * (1.0 + mext_[i]) / static_cast<double>(npanel);
    auto f = [&phi, this, xi](double y) {
      return phi.value(y) * k_.density(std::abs(xi - y));
    };
    double acc = 0.0;
    for (const Ray& r : rays) {
      for (std::size_t j = 0; j + 1 < r.edge.size(); ++j) {
        double a = r.edge[j], b = r.edge[j + 1];
        double ea = r.expo[j], eb = r.expo[j + 1];
        if (a > b) {
          std::swap(a, b);
          std::swap(ea, eb);
        }
        const bool sa = ea < 1.0, sb = eb < 1.0;
        QuadResult q;
        if (sa && sb) {
          const double mid = 0.5 * (a + b);
          q = integrate_power_endpoint(f, a, mid, a, ea, 0.5 * share);
          q += integrate_power_endpoint(f, mid, b, b, eb, 0.5 * share);
        } else if (sa) {
          q = integrate_power_endpoint(f, a, b, a, ea, share);
        } else if (sb) {
          q = integrate_power_endpoint(f, a, b, b, eb, share);
        } else {
          q = integrate(f, a, b, share);
        }
        acc += q.value;
      }
      if (r.tail) {
        const double E = r.edge.back();
        const int sgn = r.sign;
        auto g = [&f, E, sgn](double t) { return f(E + sgn * t); };
        acc += integrate_to_infinity(g, 0.0, share).value;
      }
    }
    load[i] = acc;
  }
  return load;
}

double DiscreteOperator::row_sum_defect() const {
  const std::size_t n = x_.size();
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = A_.row(i);
    double s = wa_[i] + wb_[i] + mext_[i];
    for (std::size_t j = 0; j < n; ++j) s += row[j];
    worst = std::max(worst, std::abs(s));
  }
  return worst;
}

double godunov_flux(double dminus, double dplus, double p) {
  const double up = std::max(dminus, 0.0);
  const double dn = std::max(-dplus, 0.0);
  return std::pow(std::max(up, dn), p);
}

void one_sided_slopes(const DiscreteOperator& L, const std::vector<double>& u,
                      double ua, double ub, std::vector<double>& dm,
                      std::vector<double>& dp) {
  const std::size_t n = u.size();
  dm.resize(n);
  dp.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double ul = i == 0 ? ua : u[i - 1];
    const double ur = i + 1 == n ? ub : u[i + 1];
    dm[i] = (u[i] - ul) / L.gap_left(i);
    dp[i] = (ur - u[i]) / L.gap_right(i);
  }
}

std::vector<double> scheme_residual(const DiscreteOperator& L,
                                    const std::vector<double>& u, double ua,
                                    double ub, const std::vector<double>& load,
                                    double p, double lambda,
                                    const std::vector<double>& f) {
  std::vector<double> r = L.apply(u, ua, ub, load);
  std::vector<double> dm, dp;
  one_sided_slopes(L, u, ua, ub, dm, dp);
  const std::size_t n = u.size();
  for (std::size_t i = 0; i < n; ++i)
    r[i] = -r[i] + godunov_flux(dm[i], dp[i], p) + lambda * u[i] -
           (f.empty() ? 0.0 : f[i]);
  return r;
}

std::vector<double> cfl_steps(const DiscreteOperator& L,
                              const std::vector<double>& u, double ua,
                              double ub, double p, double lambda) {
  std::vector<double> dm, dp;
  one_sided_slopes(L, u, ua, ub, dm, dp);
  const std::size_t n = u.size();
  std::vector<double> dt(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double q = std::max(std::max(dm[i], 0.0), std::max(-dp[i], 0.0));
    const double grad_lip =
        p * std::pow(q, p - 1.0) * (1.0 / L.gap_left(i) + 1.0 / L.gap_right(i));
    const double diag = -L.matrix()(i, i) + std::max(lambda, 0.0) + grad_lip;
    dt[i] = 0.9 / std::max(diag, 1e-300);
  }
  return dt;
}

}  // namespace fhj
