#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "bridgemixed/design.hpp"
#include "bridgemixed/panel_data.hpp"

namespace bridgemixed {

/// Random-effects configuration of the cumulative-logit model.
///   modified_bridge_bridge : B = U*/phi_V + V,  U* ~ Bridge(phi_U*), V ~ Bridge(phi_V)
///   normal_normal          : B = U + V,         U ~ N(0, s_U^2),     V ~ N(0, s_V^2)
///   two_level_bridge       : B = V,             V ~ Bridge(phi_V)
///   fixed                  : B = 0
enum class ModelFamily {
  modified_bridge_bridge,
  normal_normal,
  two_level_bridge,
  fixed,
};

std::string family_name(ModelFamily family);
ModelFamily family_from_name(const std::string& name);

bool family_has_family_effect(ModelFamily family);
bool family_has_individual_effect(ModelFamily family);
/// Number of random-effect scale parameters for the family.
int family_scale_count(ModelFamily family);

struct ModelSpec {
  ModelFamily family = ModelFamily::modified_bridge_bridge;
  int categories = 3;  // A
  bool proportional_odds = true;
  CovariateSpec covariates;
  double prior_location = 0.0;
  double prior_scale = 5.0;     // Cauchy scale on thresholds and coefficients
  double re_prior_scale = 5.0;  // half-Cauchy scale on random-effect SDs
};

/// Conditional parameters plus random effects in constrained coordinates.
/// re_scale holds (phi_U*, phi_V), (sigma_U, sigma_V), (phi_V) or nothing,
/// by family. u_star is keyed by distinct family, v by distinct individual.
struct ParameterState {
  Eigen::VectorXd alpha;     // A-1 strictly increasing thresholds
  Eigen::VectorXd beta;      // p coefficients
  Eigen::VectorXd re_scale;  // family-dependent, see above
  Eigen::VectorXd u_star;
  Eigen::VectorXd v;
};

/// Category probabilities (length A) under logit P(Y<=a) = alpha_a - eta - b.
Eigen::VectorXd cumulative_probs(const Eigen::VectorXd& alpha, double eta,
                                 double b);

/// log P(Y = outcome) with linear predictor offset c = eta + b; thresholds
/// enter as alpha_a - c. Stable in both tails.
double ordinal_loglik(const Eigen::VectorXd& alpha, int outcome, double c);

/// The divisor e in U = U*/e: phi_V for the Bridge pair, 1 for Normal.
double family_effect_divisor(const ModelSpec& spec,
                             const ParameterState& params);

/// Random effect b for a record resolved through its family and individual.
double record_random_effect(const ModelSpec& spec,
                            const ParameterState& params, int family,
                            int individual);

double record_loglik(const PanelDataset& ds, const DesignMatrix& design,
                     const ModelSpec& spec, const ParameterState& params,
                     int record_index);

double dataset_loglik(const PanelDataset& ds, const DesignMatrix& design,
                      const ModelSpec& spec, const ParameterState& params);

/// Length of the unconstrained coordinate vector.
int unconstrained_dimension(const ModelSpec& spec, int n_design_columns,
                            int n_families, int n_individuals);

/// Unconstrained coordinates: (alpha_1, log diffs), beta as-is, scale
/// parameters as log of the implied random-effect SD, then u_star and v.
Eigen::VectorXd to_unconstrained(const ModelSpec& spec,
                                 const ParameterState& params);

struct TransformResult {
  ParameterState params;
  double log_jacobian = 0.0;
};

TransformResult from_unconstrained(const ModelSpec& spec,
                                   const Eigen::VectorXd& z, int n_families,
                                   int n_individuals);

/// Constrained coordinate names in the same order the transforms use:
/// alpha.*, beta.<column>, scale names, u_star.<family>, v.<individual>.
std::vector<std::string> coordinate_names(const ModelSpec& spec,
                                          const std::vector<std::string>& beta_names,
                                          const std::vector<std::string>& family_keys,
                                          const std::vector<std::string>& individual_keys);

/// Flatten a ParameterState into the constrained coordinate vector matching
/// coordinate_names order.
Eigen::VectorXd flatten_constrained(const ModelSpec& spec,
                                    const ParameterState& params);

}  // namespace bridgemixed
