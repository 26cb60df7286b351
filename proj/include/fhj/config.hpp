#pragma once

#include <string>

#include "fhj/barrier.hpp"
#include "fhj/problem.hpp"

namespace fhj {

/// Flat experiment description parsed from a text file with one
/// `key = value` per line and `#` comments.  The key set is fixed -- unknown
/// keys are rejected at parse time -- and every numeric value is strict
/// base-10 decimal.  Defaults below describe the standard interval instance;
/// a file only needs the keys it changes.
///
/// Keys:
///   s, p, lambda              equation parameters
///   domain.a, domain.b        interval endpoints
///   grid.n, grid.ratio        interior node count, boundary grading ratio
///   kernel.kind               unit | physical | pucci_plus | pucci_minus
///   kernel.gamma_lo/gamma_hi  ellipticity bounds (extremal kinds only)
///   source.kind               zero | constant | power   (f = c, or c*d^-kappa)
///   source.c, source.kappa
///   exterior.kind             zero | one
///   case                      family | scale_pos | scale_neg
///   t                         family amplitude; doubles as the probe
///                             exponent for the `expansion` command
///   tol                       solver / fit tolerance
///   out.dir                   artifact directory
struct ExperimentConfig {
  double s = 0.75;
  double p = 1.1;
  double lambda = 0.0;
  double domain_a = -1.0;
  double domain_b = 1.0;
  std::size_t grid_n = 256;
  double grid_ratio = 1.002;
  std::string kernel_kind = "unit";
  double kernel_gamma_lo = 1.0;
  double kernel_gamma_hi = 1.0;
  std::string source_kind = "zero";
  double source_c = 0.0;
  double source_kappa = 0.0;
  std::string exterior_kind = "zero";
  std::string case_kind = "family";
  double t = 1.0;
  double tol = 1e-7;
  std::string out_dir = "out";

  static ExperimentConfig parse_text(const std::string& text);
  static ExperimentConfig parse_file(const std::string& path);

  /// Assign one key; throws std::invalid_argument on unknown keys, malformed
  /// numbers, or out-of-vocabulary kind strings.
  void set(const std::string& key, const std::string& value);

  /// Apply a `key=value` command-line override.
  void apply_override(const std::string& assignment);

  /// The full resolved configuration, one `key = value` line per key in a
  /// fixed order with fixed numeric formatting; embedded verbatim in every
  /// artifact and reparseable by parse_text.
  std::vector<std::string> canonical_lines() const;

  /// Materialize the equation instance this configuration describes.
  /// Throws when parameters are out of range (s, p bands, grading, kinds).
  ProblemSpec to_problem() const;

  /// The barrier pair selected by `case`.
  BarrierCase sub_case() const;
  BarrierCase super_case() const;
};

}  // namespace fhj
