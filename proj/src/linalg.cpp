#include "fhj/linalg.hpp"

#include <cmath>
#include <cstdint>
#include <numeric>

namespace fhj {

std::vector<double> matvec(const Matrix& A, const std::vector<double>& x) {
  const std::size_t n = A.rows(), m = A.cols();
  std::vector<double> y(n, 0.0);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
    const double* r = A.row(static_cast<std::size_t>(i));
    double acc = 0.0;
    for (std::size_t j = 0; j < m; ++j) acc += r[j] * x[j];
    y[static_cast<std::size_t>(i)] = acc;
  }
  return y;
}

bool lu_factor(Matrix& A, std::vector<std::size_t>& piv) {
  const std::size_t n = A.rows();
  piv.resize(n);
  std::iota(piv.begin(), piv.end(), std::size_t{0});
  for (std::size_t k = 0; k < n; ++k) {
    // pivot search: strict inequality keeps ties at the lowest index
    std::size_t imax = k;
    double amax = std::abs(A(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      const double a = std::abs(A(i, k));
      if (a > amax) { amax = a; imax = i; }
    }
    if (amax == 0.0) return false;
    if (imax != k) {
      std::swap(piv[k], piv[imax]);
      double* rk = A.row(k);
      double* ri = A.row(imax);
      for (std::size_t j = 0; j < n; ++j) std::swap(rk[j], ri[j]);
    }
    const double pivot = A(k, k);
    const double* rk = A.row(k);
#pragma omp parallel for schedule(static)
    for (std::int64_t ii = static_cast<std::int64_t>(k) + 1;
         ii < static_cast<std::int64_t>(n); ++ii) {
      double* ri = A.row(static_cast<std::size_t>(ii));
      const double l = ri[k] / pivot;
      ri[k] = l;
      for (std::size_t j = k + 1; j < n; ++j) ri[j] -= l * rk[j];
    }
  }
  return true;
}

std::vector<double> lu_solve(const Matrix& LU, const std::vector<std::size_t>& piv,
                             std::vector<double> b) {
  const std::size_t n = LU.rows();
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[piv[i]];
  for (std::size_t i = 1; i < n; ++i) {
    const double* r = LU.row(i);
    double acc = x[i];
    for (std::size_t j = 0; j < i; ++j) acc -= r[j] * x[j];
    x[i] = acc;
  }
  for (std::size_t ip = n; ip-- > 0;) {
    const double* r = LU.row(ip);
    double acc = x[ip];
    for (std::size_t j = ip + 1; j < n; ++j) acc -= r[j] * x[j];
    x[ip] = acc / r[ip];
  }
  return x;
}

std::vector<double> solve_dense(Matrix A, std::vector<double> b) {
  std::vector<std::size_t> piv;
  if (!lu_factor(A, piv)) return {};
  return lu_solve(A, piv, std::move(b));
}

double max_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace fhj
