#include "bridgemixed/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bridgemixed/distributions.hpp"

namespace bridgemixed {

std::string family_name(ModelFamily family) {
  switch (family) {
    case ModelFamily::modified_bridge_bridge:
      return "modified_bridge_bridge";
    case ModelFamily::normal_normal:
      return "normal_normal";
    case ModelFamily::two_level_bridge:
      return "two_level_bridge";
    case ModelFamily::fixed:
      return "fixed";
  }
  throw std::logic_error("family_name: unknown family");
}

ModelFamily family_from_name(const std::string& name) {
  if (name == "modified_bridge_bridge") {
    return ModelFamily::modified_bridge_bridge;
  }
  if (name == "normal_normal") return ModelFamily::normal_normal;
  if (name == "two_level_bridge") return ModelFamily::two_level_bridge;
  if (name == "fixed") return ModelFamily::fixed;
  throw std::invalid_argument("unknown model family: '" + name + "'");
}

bool family_has_family_effect(ModelFamily family) {
  return family == ModelFamily::modified_bridge_bridge ||
         family == ModelFamily::normal_normal;
}

bool family_has_individual_effect(ModelFamily family) {
  return family != ModelFamily::fixed;
}

int family_scale_count(ModelFamily family) {
  switch (family) {
    case ModelFamily::modified_bridge_bridge:
    case ModelFamily::normal_normal:
      return 2;
    case ModelFamily::two_level_bridge:
      return 1;
    case ModelFamily::fixed:
      return 0;
  }
  throw std::logic_error("family_scale_count: unknown family");
}

Eigen::VectorXd cumulative_probs(const Eigen::VectorXd& alpha, double eta,
                                 double b) {
  const int n_thresh = static_cast<int>(alpha.size());
  for (int a = 1; a < n_thresh; ++a) {
    if (!(alpha[a] > alpha[a - 1])) {
      throw std::invalid_argument("cumulative_probs: thresholds not ordered");
    }
  }
  Eigen::VectorXd probs(n_thresh + 1);
  double prev = 0.0;
  for (int a = 0; a < n_thresh; ++a) {
    const double cum = expit(alpha[a] - eta - b);
    probs[a] = cum - prev;
    prev = cum;
  }
  probs[n_thresh] = 1.0 - prev;
  return probs;
}

double ordinal_loglik(const Eigen::VectorXd& alpha, int outcome, double c) {
  const int n_thresh = static_cast<int>(alpha.size());
  if (outcome < 1 || outcome > n_thresh + 1) {
    throw std::invalid_argument("ordinal_loglik: outcome out of range");
  }
  if (outcome == 1) {
    return log_expit(alpha[0] - c);
  }
  if (outcome == n_thresh + 1) {
    return log_expit(-(alpha[n_thresh - 1] - c));
  }
  // log(expit(u) - expit(l)) for u > l:
  //   = u - l1pe(u) - l1pe(l) + log(1 - exp(l - u))
  const double u = alpha[outcome - 1] - c;
  const double l = alpha[outcome - 2] - c;
  return u - log1p_exp(u) - log1p_exp(l) + std::log(-std::expm1(l - u));
}

double family_effect_divisor(const ModelSpec& spec,
                             const ParameterState& params) {
  if (spec.family == ModelFamily::modified_bridge_bridge) {
    return params.re_scale[1];  // phi_V
  }
  return 1.0;
}

double record_random_effect(const ModelSpec& spec,
                            const ParameterState& params, int family,
                            int individual) {
  switch (spec.family) {
    case ModelFamily::fixed:
      return 0.0;
    case ModelFamily::two_level_bridge:
      return params.v[individual];
    case ModelFamily::modified_bridge_bridge:
    case ModelFamily::normal_normal:
      return params.u_star[family] / family_effect_divisor(spec, params) +
             params.v[individual];
  }
  throw std::logic_error("record_random_effect: unknown family");
}

double record_loglik(const PanelDataset& ds, const DesignMatrix& design,
                     const ModelSpec& spec, const ParameterState& params,
                     int record_index) {
  const double eta = design.rows.row(record_index).dot(params.beta);
  const double b = record_random_effect(spec, params,
                                        ds.record_family(record_index),
                                        ds.record_individual(record_index));
  return ordinal_loglik(params.alpha, ds.record(record_index).outcome,
                        eta + b);
}

double dataset_loglik(const PanelDataset& ds, const DesignMatrix& design,
                      const ModelSpec& spec, const ParameterState& params) {
  double total = 0.0;
  for (int r = 0; r < ds.n_records(); ++r) {
    total += record_loglik(ds, design, spec, params, r);
  }
  return total;
}

int unconstrained_dimension(const ModelSpec& spec, int n_design_columns,
                            int n_families, int n_individuals) {
  int dim = (spec.categories - 1) + n_design_columns +
            family_scale_count(spec.family);
  if (family_has_family_effect(spec.family)) dim += n_families;
  if (family_has_individual_effect(spec.family)) dim += n_individuals;
  return dim;
}

namespace {

// scale parameter <-> log of implied random-effect SD
double scale_to_coord(ModelFamily family, double value) {
  if (family == ModelFamily::normal_normal) return std::log(value);
  return std::log(bridge_sd(BridgeParam(value)));
}

double coord_to_scale(ModelFamily family, double z) {
  const double sd = std::exp(z);
  if (family == ModelFamily::normal_normal) return sd;
  // inverse of sd = bridge_sd(phi); rounding near sd -> 0 or sd -> inf is
  // clamped just inside (0, 1) so downstream kernels stay evaluable
  constexpr double pi_sq = 9.86960440108935862;
  double phi = 1.0 / std::sqrt(1.0 + 3.0 * sd * sd / pi_sq);
  phi = std::min(phi, 1.0 - 1.1e-16);
  phi = std::max(phi, 1e-300);
  return phi;
}

}  // namespace

Eigen::VectorXd to_unconstrained(const ModelSpec& spec,
                                 const ParameterState& params) {
  const int n_thresh = spec.categories - 1;
  if (params.alpha.size() != n_thresh) {
    throw std::invalid_argument("to_unconstrained: threshold count mismatch");
  }
  const int n_scales = family_scale_count(spec.family);
  Eigen::VectorXd z(n_thresh + params.beta.size() + n_scales +
                    params.u_star.size() + params.v.size());
  int k = 0;
  z[k++] = params.alpha[0];
  for (int a = 1; a < n_thresh; ++a) {
    const double gap = params.alpha[a] - params.alpha[a - 1];
    if (!(gap > 0.0)) {
      throw std::invalid_argument("to_unconstrained: thresholds not ordered");
    }
    z[k++] = std::log(gap);
  }
  for (int j = 0; j < params.beta.size(); ++j) z[k++] = params.beta[j];
  for (int s = 0; s < n_scales; ++s) {
    z[k++] = scale_to_coord(spec.family, params.re_scale[s]);
  }
  for (int i = 0; i < params.u_star.size(); ++i) z[k++] = params.u_star[i];
  for (int i = 0; i < params.v.size(); ++i) z[k++] = params.v[i];
  return z;
}

TransformResult from_unconstrained(const ModelSpec& spec,
                                   const Eigen::VectorXd& z, int n_families,
                                   int n_individuals) {
  if (!z.allFinite()) {
    throw std::invalid_argument("from_unconstrained: non-finite input");
  }
  const int n_thresh = spec.categories - 1;
  const int n_scales = family_scale_count(spec.family);
  const int n_u = family_has_family_effect(spec.family) ? n_families : 0;
  const int n_v =
      family_has_individual_effect(spec.family) ? n_individuals : 0;
  const int p =
      static_cast<int>(z.size()) - n_thresh - n_scales - n_u - n_v;
  if (p < 0) {
    throw std::invalid_argument("from_unconstrained: vector too short");
  }

  TransformResult result;
  auto& params = result.params;
  params.alpha.resize(n_thresh);
  params.beta.resize(p);
  params.re_scale.resize(n_scales);
  params.u_star.resize(n_u);
  params.v.resize(n_v);

  int k = 0;
  params.alpha[0] = z[k++];
  for (int a = 1; a < n_thresh; ++a) {
    params.alpha[a] = params.alpha[a - 1] + std::exp(z[k]);
    result.log_jacobian += z[k];
    ++k;
  }
  for (int j = 0; j < p; ++j) params.beta[j] = z[k++];
  for (int s = 0; s < n_scales; ++s) {
    params.re_scale[s] = coord_to_scale(spec.family, z[k]);
    // prior sits on the SD itself; d sd / d log sd = sd
    result.log_jacobian += z[k];
    ++k;
  }
  for (int i = 0; i < n_u; ++i) params.u_star[i] = z[k++];
  for (int i = 0; i < n_v; ++i) params.v[i] = z[k++];
  return result;
}

std::vector<std::string> coordinate_names(
    const ModelSpec& spec, const std::vector<std::string>& beta_names,
    const std::vector<std::string>& family_keys,
    const std::vector<std::string>& individual_keys) {
  std::vector<std::string> names;
  for (int a = 1; a < spec.categories; ++a) {
    names.push_back("alpha." + std::to_string(a));
  }
  for (const auto& b : beta_names) names.push_back("beta." + b);
  switch (spec.family) {
    case ModelFamily::modified_bridge_bridge:
      names.push_back("phi_u");
      names.push_back("phi_v");
      break;
    case ModelFamily::normal_normal:
      names.push_back("sigma_u");
      names.push_back("sigma_v");
      break;
    case ModelFamily::two_level_bridge:
      names.push_back("phi_v");
      break;
    case ModelFamily::fixed:
      break;
  }
  if (family_has_family_effect(spec.family)) {
    for (const auto& key : family_keys) names.push_back("u_star." + key);
  }
  if (family_has_individual_effect(spec.family)) {
    for (const auto& key : individual_keys) names.push_back("v." + key);
  }
  return names;
}

Eigen::VectorXd flatten_constrained(const ModelSpec& spec,
                                    const ParameterState& params) {
  Eigen::VectorXd out(params.alpha.size() + params.beta.size() +
                      params.re_scale.size() + params.u_star.size() +
                      params.v.size());
  int k = 0;
  for (int a = 0; a < params.alpha.size(); ++a) out[k++] = params.alpha[a];
  for (int j = 0; j < params.beta.size(); ++j) out[k++] = params.beta[j];
  for (int s = 0; s < params.re_scale.size(); ++s) {
    out[k++] = params.re_scale[s];
  }
  for (int i = 0; i < params.u_star.size(); ++i) out[k++] = params.u_star[i];
  for (int i = 0; i < params.v.size(); ++i) out[k++] = params.v[i];
  (void)spec;
  return out;
}

}  // namespace bridgemixed
