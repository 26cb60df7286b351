#pragma once

#include <string>
#include <vector>

#include "fhj/config.hpp"

namespace fhj {

/// Process-level exit statuses of the experiment commands.
inline constexpr int run_ok = 0;         ///< command completed, checks passed
inline constexpr int run_invalid = 2;    ///< configuration or validation failure
inline constexpr int run_numerical = 3;  ///< solver, quadrature, or verdict failure

struct RunResult {
  int status = run_ok;
  std::string message;                 ///< human-readable outcome (may be multi-line)
  std::vector<std::string> artifacts;  ///< files written and kept
};

/// The available commands, in documentation order:
///   ctau       sample the boundary-constant curve tau -> c(tau)
///   lambda0    exterior-mass scan and its infimum
///   expansion  one-point expansion probe at exponent tau = t
///   barrier    build and verify the case's sub/super pair
///   solve      bounded Dirichlet solve on the configured grid
///   family     nested-domain blow-up construction + rate/ordering verdict
///   rates      boundary-rate fit of a previously written u.csv
///   validate   admissibility report for the configured instance
const std::vector<std::string>& command_names();

/// Execute one command.  Artifacts land in cfg.out_dir; every artifact
/// embeds the full resolved configuration as leading comment lines.  On a
/// failure that interrupts a run, the partially written artifact set is
/// removed; completed runs with a negative verdict keep their artifacts and
/// report run_numerical.  Identical configurations produce byte-identical
/// artifacts.
RunResult run_command(const std::string& command, const ExperimentConfig& cfg);

}  // namespace fhj
