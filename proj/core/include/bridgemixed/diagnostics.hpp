#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "bridgemixed/sampler.hpp"

namespace bridgemixed {

struct CoordinateDiagnostics {
  std::string name;
  double rhat = 0.0;
  bool rhat_defined = false;  // false for constant draws or a single chain
  double ess = 0.0;
  double mean = 0.0;
  double sd = 0.0;
};

/// Split R-hat over the given per-chain series (each chain is halved).
/// Returns NaN with *defined = false when the statistic is degenerate.
double split_rhat(const std::vector<Eigen::VectorXd>& chains, bool* defined);

/// Effective sample size from split-chain autocorrelations with the usual
/// initial-monotone-positive-sequence truncation.
double effective_sample_size(const std::vector<Eigen::VectorXd>& chains);

std::vector<CoordinateDiagnostics> compute_diagnostics(const Draws& draws);

}  // namespace bridgemixed
