#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "bridgemixed/model.hpp"
#include "bridgemixed/rng.hpp"
#include "bridgemixed/sampler.hpp"

namespace bridgemixed {

struct SummaryRow {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
  double q025 = 0.0;
  double q975 = 0.0;
  bool has_odds = false;
  double odds_pct = 0.0;  // (exp(mean) - 1) * 100, coefficients only
};

/// Equal-tailed sample quantile with linear interpolation between order
/// statistics.
double sample_quantile(Eigen::VectorXd values, double prob);

/// Posterior mean / SD / 95% interval per coordinate; when `odds` is set,
/// beta rows also report the percent change in odds.
std::vector<SummaryRow> summarize(const Draws& draws, bool odds = false);

/// Marginal coefficient (and threshold) draws via the per-draw scaling:
/// phi_U* phi_V for the three-level Bridge pair, phi_V for the two-level
/// model, identity for fixed effects. Not defined under Normal random
/// effects; throws.
Draws marginalize(const Draws& draws, const ModelSpec& spec);

struct WaicResult {
  double waic = 0.0;
  double lppd = 0.0;
  double p_eff = 0.0;  // effective number of parameters (variance form)
};

/// log-likelihood matrix layout: rows = posterior draws, cols = observations.
WaicResult waic(const Eigen::MatrixXd& loglik);

struct LpmlResult {
  double lpml = 0.0;
  Eigen::VectorXd log_cpo;  // per observation
  std::vector<int> degenerate_observations;  // -inf CPO
};

LpmlResult lpml(const Eigen::MatrixXd& loglik);

/// Per-draw conditional log-likelihood of every observation, draw-level
/// random effects included. Chains are concatenated in order.
Eigen::MatrixXd pointwise_loglik(const Draws& draws, const PanelDataset& ds,
                                 const DesignMatrix& design,
                                 const ModelSpec& spec);

struct PpcTable {
  std::vector<int> codes;        // observed - replicated, -(A-1)..(A-1)
  std::vector<double> mean_pct;  // across replicates
  std::vector<double> sd_pct;
};

/// Discrepancy-code table from already-drawn replicates (rows = replicates).
PpcTable ppc_from_replicates(const std::vector<int>& observed,
                             const Eigen::MatrixXi& replicates,
                             int categories);

/// One replicated dataset per posterior draw; mixed models condition on the
/// drawn random effects, the fixed-effects model replicates from the
/// coefficients alone.
PpcTable ppc(const Draws& draws, const PanelDataset& ds,
             const DesignMatrix& design, const ModelSpec& spec, Rng& rng);

}  // namespace bridgemixed
