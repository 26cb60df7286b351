#include "fhj/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fhj {

double Kernel::density(double r) const {
  return multiplier(r) * std::pow(r, -(1.0 + 2.0 * s));
}

QuadResult Kernel::tail_mass(double R, double tol) const {
  if (constant()) {
    QuadResult q;
    q.value = scale * std::pow(R, -2.0 * s) / (2.0 * s);
    return q;
  }
  return integrate_to_infinity([this](double z) { return density(z); }, R, tol);
}

QuadResult Kernel::second_moment(double r, double tol) const {
  if (constant()) {
    QuadResult q;
    q.value = scale * std::pow(r, 2.0 - 2.0 * s) / (2.0 - 2.0 * s);
    return q;
  }
  // z^2 K ~ z^{1-2s} near zero: integrable but steep; peel panels dyadically.
  QuadResult total;
  double b = r;
  while (b > 1e-14 * r) {
    const double a = 0.5 * b;
    total += integrate([this](double z) { return z * z * density(z); }, a, b, tol * 0.1);
    // remaining mass below `a` is at most hi * a^{2-2s}/(2-2s)
    if (hi * std::pow(a, 2.0 - 2.0 * s) / (2.0 - 2.0 * s) < tol) {
      total.error += hi * std::pow(a, 2.0 - 2.0 * s) / (2.0 - 2.0 * s);
      break;
    }
    b = a;
  }
  return total;
}

void Kernel::segment_masses(double r1, double r2, double& m0, double& m1) const {
  if (constant()) {
    const double e0 = -2.0 * s, e1 = 1.0 - 2.0 * s;
    m0 = scale * (std::pow(r2, e0) - std::pow(r1, e0)) / e0;
    m1 = scale * (std::pow(r2, e1) - std::pow(r1, e1)) / e1;
    return;
  }
  m0 = integrate([this](double z) { return density(z); }, r1, r2, 1e-12).value;
  m1 = integrate([this](double z) { return z * density(z); }, r1, r2, 1e-12).value;
}

double physical_normalization(double s) {
  // 4^s Gamma(1/2+s) s / (sqrt(pi) Gamma(1-s)); equals 1/pi at s = 1/2.
  return std::pow(4.0, s) * std::tgamma(0.5 + s) * s /
         (std::sqrt(M_PI) * std::tgamma(1.0 - s));
}

bool is_homogeneous(const Kernel& k, double rtol) {
  const double zs[] = {0.11, 0.7, 1.3, 4.9};
  const double rhos[] = {0.25, 0.5, 2.0, 8.0};
  for (double z : zs) {
    for (double rho : rhos) {
      const double lhs = std::pow(rho, 1.0 + 2.0 * k.s) * k.density(rho * z);
      const double rhs = k.density(z);
      if (std::abs(lhs - rhs) > rtol * (std::abs(rhs) + 1e-300)) return false;
    }
  }
  return true;
}

OperatorSpec OperatorSpec::linear(Kernel k) {
  OperatorSpec op;
  op.kind = Kind::linear;
  op.s = k.s;
  op.lo = k.lo;
  op.hi = k.hi;
  op.family = {{std::move(k)}};
  return op;
}

OperatorSpec OperatorSpec::pucci_plus(double s, double lo, double hi) {
  if (!(0.0 < lo && lo <= hi)) throw std::invalid_argument("pucci: need 0 < lo <= hi");
  OperatorSpec op;
  op.kind = Kind::pucci_plus;
  op.s = s;
  op.lo = lo;
  op.hi = hi;
  return op;
}

OperatorSpec OperatorSpec::pucci_minus(double s, double lo, double hi) {
  OperatorSpec op = pucci_plus(s, lo, hi);
  op.kind = Kind::pucci_minus;
  return op;
}

OperatorSpec OperatorSpec::inf_sup(double s, std::vector<std::vector<Kernel>> fam) {
  if (fam.empty()) throw std::invalid_argument("inf_sup: empty family");
  for (const auto& row : fam)
    if (row.empty()) throw std::invalid_argument("inf_sup: empty family row");
  OperatorSpec op;
  op.kind = Kind::inf_sup;
  op.s = s;
  op.family = std::move(fam);
  op.lo = op.ellipticity_lo();
  op.hi = op.ellipticity_hi();
  return op;
}

OperatorSpec OperatorSpec::reflected() const {
  OperatorSpec op = *this;
  switch (kind) {
    case Kind::linear:
      break;
    case Kind::pucci_plus:
      op.kind = Kind::pucci_minus;
      break;
    case Kind::pucci_minus:
      op.kind = Kind::pucci_plus;
      break;
    case Kind::inf_sup:
      op.outer_sup = !outer_sup;
      break;
  }
  return op;
}

double OperatorSpec::ellipticity_lo() const {
  if (family.empty()) return lo;
  double m = family[0][0].lo;
  for (const auto& row : family)
    for (const auto& k : row) m = std::min(m, k.lo);
  return m;
}

double OperatorSpec::ellipticity_hi() const {
  if (family.empty()) return hi;
  double m = family[0][0].hi;
  for (const auto& row : family)
    for (const auto& k : row) m = std::max(m, k.hi);
  return m;
}

}  // namespace fhj
