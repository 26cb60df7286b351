#include "fhj/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fhj {

namespace {
double fd_step(double y) { return 5e-4 * (1.0 + std::abs(y)); }
}  // namespace

double Field::deriv(double y) const {
  const double h = fd_step(y);
  return (value(y + h) - value(y - h)) / (2.0 * h);
}

double Field::curvature(double y) const {
  const double h = fd_step(y);
  return (value(y + h) - 2.0 * value(y) + value(y - h)) / (h * h);
}

// ---------------------------------------------------------------- PowerField

PowerField::PowerField(Domain dom, std::vector<double> coef, std::vector<double> tau)
    : dom_(dom), coef_(std::move(coef)), tau_(std::move(tau)) {
  if (coef_.size() != tau_.size())
    throw std::invalid_argument("PowerField: coef/tau size mismatch");
  min_expo_ = 1.0;
  for (double t : tau_) min_expo_ = std::min(min_expo_, t);
}

double PowerField::value(double y) const {
  if (!dom_.inside(y)) return 0.0;
  const double d = dom_.dist(y);
  double v = 0.0;
  for (std::size_t k = 0; k < coef_.size(); ++k)
    v += coef_[k] * (tau_[k] == 0.0 ? 1.0 : std::pow(d, tau_[k]));
  return v;
}

double PowerField::deriv(double y) const {
  if (!dom_.inside(y)) return 0.0;
  const double d = dom_.dist(y);
  const double g = dom_.dist_grad(y);
  double v = 0.0;
  for (std::size_t k = 0; k < coef_.size(); ++k)
    if (tau_[k] != 0.0) v += coef_[k] * tau_[k] * std::pow(d, tau_[k] - 1.0);
  return v * g;
}

double PowerField::curvature(double y) const {
  if (!dom_.inside(y)) return 0.0;
  const double d = dom_.dist(y);
  double v = 0.0;
  for (std::size_t k = 0; k < coef_.size(); ++k)
    if (tau_[k] != 0.0)
      v += coef_[k] * tau_[k] * (tau_[k] - 1.0) * std::pow(d, tau_[k] - 2.0);
  return v;
}

double PowerField::pair_difference(double x, double z) const {
  // For small shifts that stay on one analytic branch of the distance the
  // three-point sum cancels to O(z^2) and the naive formula keeps only a few
  // significant digits; expm1/log1p recovers full precision there.
  const double az = std::abs(z);
  if (dom_.inside(x) && dom_.inside(x + az) && dom_.inside(x - az)) {
    const double d0 = dom_.dist(x);
    bool same_branch = az <= 0.5 * d0;
    if (same_branch && dom_.kind == Domain::Kind::interval) {
      const double m = 0.5 * (dom_.a + dom_.b);
      same_branch = (x - az > m) == (x + az > m) && x != m;
    }
    if (same_branch) {
      const double r = az / d0;
      const double lp = std::log1p(r), lm = std::log1p(-r);
      double v = 0.0;
      for (std::size_t k = 0; k < coef_.size(); ++k) {
        if (tau_[k] == 0.0) continue;
        const double scale = std::pow(d0, tau_[k]);
        v += coef_[k] * scale *
             (std::expm1(tau_[k] * lp) + std::expm1(tau_[k] * lm));
      }
      return v;
    }
  }
  return Field::pair_difference(x, z);
}

std::vector<Breakpoint> PowerField::breakpoints() const {
  if (dom_.kind == Domain::Kind::half_line) return {{0.0, min_expo_}};
  // the distance function itself has a derivative kink mid-domain
  return {{dom_.a, min_expo_}, {0.5 * (dom_.a + dom_.b), 1.0}, {dom_.b, min_expo_}};
}

Growth PowerField::growth() const {
  if (dom_.kind == Domain::Kind::interval) return {0.0, 0.0};  // vanishes outside
  double c = 0.0, q = 0.0;
  for (std::size_t k = 0; k < coef_.size(); ++k) {
    c += std::abs(coef_[k]);
    q = std::max(q, tau_[k]);
  }
  return {std::max(c, 1e-300), q};
}

std::optional<std::vector<TailTerm>> PowerField::tail_terms(int side) const {
  if (dom_.kind == Domain::Kind::interval || side < 0) return std::vector<TailTerm>{};
  // half-line, right side: d(y) = y, so the stated powers are exact
  std::vector<TailTerm> t;
  for (std::size_t k = 0; k < coef_.size(); ++k) t.push_back({coef_[k], tau_[k]});
  return t;
}

FieldPtr dist_power(const Domain& dom, double tau) {
  return std::make_shared<PowerField>(dom, std::vector<double>{1.0},
                                      std::vector<double>{tau});
}

FieldPtr zero_field() { return std::make_shared<ZeroField>(); }

FieldPtr constant_field(double c) {
  return std::make_shared<CallableField>([c](double) { return c; },
                                         [](double) { return 0.0; },
                                         std::vector<Breakpoint>{}, Growth{std::abs(c), 0.0},
                                         0.5, std::vector<TailTerm>{{c, 0.0}});
}

// ------------------------------------------------------------ PiecewiseField

PiecewiseField::PiecewiseField(std::vector<double> edges, std::vector<FieldPtr> parts)
    : edges_(std::move(edges)), parts_(std::move(parts)) {
  if (parts_.size() != edges_.size() + 1)
    throw std::invalid_argument("PiecewiseField: need one more part than edges");
  if (!std::is_sorted(edges_.begin(), edges_.end()))
    throw std::invalid_argument("PiecewiseField: edges not sorted");
  for (const auto& p : parts_)
    if (!p) throw std::invalid_argument("PiecewiseField: null part");
}

double PiecewiseField::value(double y) const {
  const auto it = std::upper_bound(edges_.begin(), edges_.end(), y);
  return parts_[static_cast<std::size_t>(it - edges_.begin())]->value(y);
}

std::vector<Breakpoint> PiecewiseField::breakpoints() const {
  std::vector<Breakpoint> bp;
  for (double e : edges_) bp.push_back({e, 0.0});
  for (const auto& p : parts_)
    for (const auto& b : p->breakpoints()) bp.push_back(b);
  return bp;
}

Growth PiecewiseField::growth() const {
  Growth g{0.0, 0.0};
  for (const auto& p : parts_) {
    const Growth pg = p->growth();
    g.C = std::max(g.C, pg.C);
    g.q = std::max(g.q, pg.q);
  }
  return g;
}

std::optional<std::vector<TailTerm>> PiecewiseField::tail_terms(int side) const {
  return side > 0 ? parts_.back()->tail_terms(side) : parts_.front()->tail_terms(side);
}

// ------------------------------------------------------------- GridFunction

GridFunction::GridFunction(Domain dom, std::vector<double> nodes,
                           std::vector<double> values, FieldPtr exterior)
    : dom_(dom), nodes_(std::move(nodes)), values_(std::move(values)),
      ext_(exterior ? std::move(exterior) : zero_field()) {
  if (dom_.kind != Domain::Kind::interval)
    throw std::invalid_argument("GridFunction: interval domains only");
  if (nodes_.empty() || nodes_.size() != values_.size())
    throw std::invalid_argument("GridFunction: bad node/value arrays");
  if (!std::is_sorted(nodes_.begin(), nodes_.end()))
    throw std::invalid_argument("GridFunction: nodes not sorted");
  if (!(nodes_.front() > dom_.a && nodes_.back() < dom_.b))
    throw std::invalid_argument("GridFunction: nodes must be strictly inside");
  // anchor values: exterior limits approached from outside
  va_ = ext_->value(std::nextafter(dom_.a, -std::numeric_limits<double>::infinity()));
  vb_ = ext_->value(std::nextafter(dom_.b, std::numeric_limits<double>::infinity()));
}

namespace {
// index helpers over the padded point list (a, nodes..., b)
struct Padded {
  const GridFunction& g;
  double x(std::size_t i) const {
    if (i == 0) return g.domain().a;
    if (i == g.nodes().size() + 1) return g.domain().b;
    return g.nodes()[i - 1];
  }
};
}  // namespace

double GridFunction::lagrange(double y, int der) const {
  const std::size_t n = nodes_.size();
  const std::size_t m = n + 2;
  Padded P{*this};
  // containing gap [x_j, x_{j+1}]
  std::size_t j = static_cast<std::size_t>(
      std::upper_bound(nodes_.begin(), nodes_.end(), y) - nodes_.begin());
  // stencil start: centre the quadratic on the nearer point
  std::size_t k = j;
  if (y - P.x(j) < P.x(j + 1) - y) k = (j == 0) ? 0 : j - 1;
  if (k + 2 >= m) k = m - 3;
  const double x0 = P.x(k), x1 = P.x(k + 1), x2 = P.x(k + 2);
  auto v = [&](std::size_t i) -> double {
    if (i == 0) return va_;
    if (i == n + 1) return vb_;
    return values_[i - 1];
  };
  const double v0 = v(k), v1 = v(k + 1), v2 = v(k + 2);
  const double d0 = (x0 - x1) * (x0 - x2);
  const double d1 = (x1 - x0) * (x1 - x2);
  const double d2 = (x2 - x0) * (x2 - x1);
  if (der == 0)
    return v0 * (y - x1) * (y - x2) / d0 + v1 * (y - x0) * (y - x2) / d1 +
           v2 * (y - x0) * (y - x1) / d2;
  if (der == 1)
    return v0 * (2.0 * y - x1 - x2) / d0 + v1 * (2.0 * y - x0 - x2) / d1 +
           v2 * (2.0 * y - x0 - x1) / d2;
  return 2.0 * (v0 / d0 + v1 / d1 + v2 / d2);
}

double GridFunction::value(double y) const {
  if (!dom_.inside(y)) return ext_->value(y);
  return lagrange(y, 0);
}

double GridFunction::deriv(double y) const {
  if (!dom_.inside(y)) return ext_->deriv(y);
  return lagrange(y, 1);
}

double GridFunction::curvature(double y) const {
  if (!dom_.inside(y)) return ext_->curvature(y);
  return lagrange(y, 2);
}

std::vector<Breakpoint> GridFunction::breakpoints() const {
  std::vector<Breakpoint> bp = ext_->breakpoints();
  bool has_a = false, has_b = false;
  for (const auto& b : bp) {
    if (b.y == dom_.a) has_a = true;
    if (b.y == dom_.b) has_b = true;
  }
  if (!has_a) bp.push_back({dom_.a, 1.0});
  if (!has_b) bp.push_back({dom_.b, 1.0});
  return bp;
}

Growth GridFunction::growth() const { return ext_->growth(); }

std::optional<std::vector<TailTerm>> GridFunction::tail_terms(int side) const {
  return ext_->tail_terms(side);
}

double GridFunction::local_scale(double x) const {
  Padded P{*this};
  std::size_t j = static_cast<std::size_t>(
      std::upper_bound(nodes_.begin(), nodes_.end(), x) - nodes_.begin());
  return 2.0 * (P.x(j + 1) - P.x(j));
}

double GridFunction::gap(std::size_t i) const {
  Padded P{*this};
  return std::max(P.x(i + 1) - P.x(i), P.x(i + 2) - P.x(i + 1));
}

}  // namespace fhj
