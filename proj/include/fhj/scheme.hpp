#pragma once

#include <cstddef>
#include <vector>

#include "fhj/field.hpp"
#include "fhj/kernel.hpp"
#include "fhj/linalg.hpp"

namespace fhj {

/// Monotone discretization of a single-kernel generator on interior nodes of
/// an interval.  Around each node the symmetrized difference is collapsed
/// onto the three-point curvature stencil weighted by the kernel's truncated
/// second moment (a piecewise-linear kink at the node itself would not be
/// integrable against the kernel); farther out the grid function is taken
/// piecewise linear and every segment contributes its closed-form kernel
/// masses; the complement contributes the exterior mass on the diagonal plus
/// a load assembled from the Dirichlet data.  All off-diagonal couplings are
/// nonnegative and rows sum to zero against constants supported on the whole
/// line, so the discrete comparison principle holds by construction.
class DiscreteOperator {
 public:
  /// Interval domains with at least three interior nodes; the operator must
  /// be a single linear kernel (extremal kinds would make the assembled
  /// matrix state-dependent).
  DiscreteOperator(const OperatorSpec& op, const Domain& dom,
                   std::vector<double> nodes);

  const Domain& domain() const { return dom_; }
  const Kernel& kernel() const { return k_; }
  const std::vector<double>& nodes() const { return x_; }
  std::size_t size() const { return x_.size(); }

  /// Coupling matrix on interior unknowns (includes the diagonal).
  const Matrix& matrix() const { return A_; }
  /// Weights of the boundary anchor values u(a), u(b).
  const std::vector<double>& anchor_a() const { return wa_; }
  const std::vector<double>& anchor_b() const { return wb_; }
  /// Kernel mass of the domain complement seen from each node.
  const std::vector<double>& ext_mass() const { return mext_; }

  double gap_left(std::size_t i) const { return hm_[i]; }
  double gap_right(std::size_t i) const { return hp_[i]; }

  /// (L_h u)_i for interior values u, boundary anchor values (ua, ub) and a
  /// precomputed exterior load (empty = homogeneous exterior data).
  std::vector<double> apply(const std::vector<double>& u, double ua, double ub,
                            const std::vector<double>& load = {}) const;

  /// Load vector P_i = int_{complement} phi(y) K(y - x_i) dy, one adaptive
  /// quadrature per node (parallel over nodes, deterministic).  The absolute
  /// tolerance of node i is tol * (1 + ext_mass()[i]): the load scales with
  /// the exterior mass and so does the diagonal, so this keeps the induced
  /// error in the solved values below tol uniformly across the grid.
  std::vector<double> exterior_load(const Field& phi, double tol = 1e-10) const;

  /// max_i |row sum against the all-ones function|; zero in exact arithmetic,
  /// rounding-sized in practice.  Cheap diagnostic for assembly bugs.
  double row_sum_defect() const;

 private:
  Domain dom_;
  Kernel k_;
  std::vector<double> x_, hm_, hp_;
  Matrix A_;
  std::vector<double> wa_, wb_, mext_;
};

/// Godunov numerical Hamiltonian for H(q) = |q|^p: monotone (nondecreasing
/// in the left slope, nonincreasing in the right slope) and exact on
/// monotone data.
double godunov_flux(double dminus, double dplus, double p);

/// One-sided slopes (D-u_i, D+u_i) with boundary anchors.
void one_sided_slopes(const DiscreteOperator& L, const std::vector<double>& u,
                      double ua, double ub, std::vector<double>& dm,
                      std::vector<double>& dp);

/// Discrete residual R_i = -(L_h u)_i + g(D-u, D+u) + lambda u_i - f_i.
std::vector<double> scheme_residual(const DiscreteOperator& L,
                                    const std::vector<double>& u, double ua,
                                    double ub, const std::vector<double>& load,
                                    double p, double lambda,
                                    const std::vector<double>& f);

/// Per-node stable step sizes for the damped fixed-point iteration
/// u <- u - dt * R(u): dt_i = 0.9 / (row sum + lambda^+ + local gradient
/// Lipschitz bound), which keeps the update map monotone in every argument.
std::vector<double> cfl_steps(const DiscreteOperator& L,
                              const std::vector<double>& u, double ua,
                              double ub, double p, double lambda);

}  // namespace fhj
