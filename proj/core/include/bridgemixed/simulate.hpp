#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "bridgemixed/design.hpp"
#include "bridgemixed/model.hpp"
#include "bridgemixed/panel_data.hpp"
#include "bridgemixed/rng.hpp"

namespace bridgemixed {

/// Synthetic-panel configuration. The default scenario is desk scale:
/// 300 families, 1-4 individuals each, 4 waves, staggered entry plus
/// drop-out removing roughly 40% of potential records.
struct SimSpec {
  int n_families = 300;
  int min_individuals = 1;
  int max_individuals = 4;
  std::vector<long> waves = {1, 2, 3, 4};

  ModelFamily family = ModelFamily::modified_bridge_bridge;
  Eigen::VectorXd alpha;  // thresholds, defines A = alpha.size() + 1
  Eigen::VectorXd beta;   // aligned to generated design columns
  double phi_u = 0.85;    // Bridge families
  double phi_v = 0.75;
  double sigma_u = 1.0;  // Normal family
  double sigma_v = 1.0;

  // covariate generators: standard-normal continuous columns drawn per
  // record, then one categorical (levels L1..Lk, L1 kept as reference)
  // drawn per individual
  int n_continuous = 1;
  int categorical_levels = 3;  // 0 disables the categorical covariate

  // MAR missingness: entry wave sampled per individual, then wave-on-wave
  // retention; intermittent skips leave later waves reachable
  std::vector<double> entry_probs = {0.35, 0.25, 0.25, 0.15};
  std::vector<double> retention = {1.0, 0.9, 0.9, 0.9};
  double intermittent_skip = 0.05;

  std::uint64_t seed = 1;

  SimSpec();  // fills alpha/beta with the default truth
  int categories() const { return static_cast<int>(alpha.size()) + 1; }
  int design_columns() const {
    return n_continuous +
           (categorical_levels > 0 ? categorical_levels - 1 : 0);
  }
  void validate() const;
};

/// Latent values behind a simulated dataset.
struct SimTruth {
  ModelFamily family = ModelFamily::modified_bridge_bridge;
  Eigen::VectorXd alpha;
  Eigen::VectorXd beta;
  std::vector<std::string> beta_names;
  Eigen::VectorXd re_scale;
  std::vector<std::string> family_keys;
  Eigen::VectorXd u_star;
  std::vector<std::string> individual_keys;
  Eigen::VectorXd v;
};

struct SimResult {
  PanelDataset dataset;
  SimTruth truth;
};

/// Complete panel (every individual observed at every wave) drawn from the
/// generative model. Apply missingness separately.
SimResult simulate_dataset(const SimSpec& spec);

/// Remove records according to the entry/retention/skip mechanism. The
/// entry-wave record of an individual is always kept.
PanelDataset apply_missingness(const PanelDataset& ds, const SimSpec& spec,
                               Rng& rng);

/// Covariate spec matching the simulator's generated columns.
CovariateSpec simulated_covariate_spec(const SimSpec& spec);

}  // namespace bridgemixed
