#include "fhj/domain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fhj {

Domain Domain::interval(double a, double b) {
  if (!(b > a)) throw std::invalid_argument("domain: need b > a");
  Domain d;
  d.kind = Kind::interval;
  d.a = a;
  d.b = b;
  return d;
}

Domain Domain::half_line() {
  Domain d;
  d.kind = Kind::half_line;
  d.a = 0.0;
  d.b = std::numeric_limits<double>::infinity();
  return d;
}

bool Domain::inside(double x) const {
  return kind == Kind::half_line ? x > 0.0 : (x > a && x < b);
}

double Domain::dist(double x) const {
  if (!inside(x)) return 0.0;
  if (kind == Kind::half_line) return x;
  return std::min(x - a, b - x);
}

double Domain::dist_grad(double x) const {
  if (!inside(x)) return 0.0;
  if (kind == Kind::half_line) return 1.0;
  const double l = x - a, r = b - x;
  if (l == r) return 0.0;
  return l < r ? 1.0 : -1.0;
}

double Domain::diameter() const {
  if (kind == Kind::half_line) return std::numeric_limits<double>::infinity();
  return b - a;
}

std::vector<double> graded_nodes(const Domain& dom, int n, double ratio) {
  if (dom.kind != Domain::Kind::interval)
    throw std::invalid_argument("graded_nodes: interval domains only");
  if (n < 1) throw std::invalid_argument("graded_nodes: need n >= 1");
  if (!(ratio >= 1.0)) throw std::invalid_argument("graded_nodes: need ratio >= 1");

  // n nodes make n+1 gaps; gap j (0-based, from the left endpoint) gets
  // relative width ratio^min(j, n-j) so widths grow toward the middle and
  // the grid is symmetric.
  std::vector<double> w(static_cast<std::size_t>(n) + 1);
  double total = 0.0;
  for (int j = 0; j <= n; ++j) {
    const int k = std::min(j, n - j);
    w[static_cast<std::size_t>(j)] = std::pow(ratio, k);
    total += w[static_cast<std::size_t>(j)];
  }
  const double scale = (dom.b - dom.a) / total;
  std::vector<double> nodes(static_cast<std::size_t>(n));
  double x = dom.a;
  for (int j = 0; j < n; ++j) {
    x += w[static_cast<std::size_t>(j)] * scale;
    nodes[static_cast<std::size_t>(j)] = x;
  }
  return nodes;
}

double min_gap(const std::vector<double>& nodes, const Domain& dom) {
  if (nodes.empty()) return 0.0;
  double g = nodes.front() - dom.a;
  for (std::size_t i = 1; i < nodes.size(); ++i) g = std::min(g, nodes[i] - nodes[i - 1]);
  if (dom.kind == Domain::Kind::interval) g = std::min(g, dom.b - nodes.back());
  return g;
}

}  // namespace fhj
