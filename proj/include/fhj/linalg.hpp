#pragma once

#include <cstddef>
#include <vector>

namespace fhj {

/// Dense row-major matrix.  Sized for the nonlocal schemes used here, whose
/// stiffness matrices are full: every node talks to every other node, so
/// sparse storage would buy nothing.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), a_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

  double* row(std::size_t i) { return a_.data() + i * cols_; }
  const double* row(std::size_t i) const { return a_.data() + i * cols_; }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> a_;
};

/// y = A x.  Rows are distributed over threads; each row's dot product runs
/// in a fixed serial order, so the result is bit-identical to the serial one.
std::vector<double> matvec(const Matrix& A, const std::vector<double>& x);

/// In-place LU factorization with partial pivoting, PA = LU.  Ties in the
/// pivot search break toward the lowest row index and the eliminations below
/// a pivot are row-independent, so the factorization does not depend on the
/// thread count.  Returns false on exact singularity.
bool lu_factor(Matrix& A, std::vector<std::size_t>& piv);

/// Back substitution for a factorization produced by lu_factor.
std::vector<double> lu_solve(const Matrix& LU, const std::vector<std::size_t>& piv,
                             std::vector<double> b);

/// Convenience wrapper: factor a copy and solve.  Returns an empty vector on
/// singularity.
std::vector<double> solve_dense(Matrix A, std::vector<double> b);

/// max_i |v_i|
double max_norm(const std::vector<double>& v);

}  // namespace fhj
