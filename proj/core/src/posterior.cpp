#include "bridgemixed/posterior.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "bridgemixed/distributions.hpp"

namespace bridgemixed {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kPi = 3.14159265358979323846;

// log of the logistic density f(t) = expit(t)(1 - expit(t))
double log_logistic_density(double t) { return t - 2.0 * log1p_exp(t); }

// Derivatives of one record's log multinomial probability.
struct RecordDerivs {
  double d_upper = 0.0;  // wrt alpha_{y}   (upper threshold), 0 when y == A
  double d_lower = 0.0;  // wrt alpha_{y-1} (lower threshold), 0 when y == 1
  double dc = 0.0;       // wrt the shift c = eta + b
};

RecordDerivs ordinal_loglik_derivs(const Eigen::VectorXd& alpha, int outcome,
                                   double c) {
  const int n_thresh = static_cast<int>(alpha.size());
  RecordDerivs d;
  if (outcome == 1) {
    const double t = alpha[0] - c;
    d.d_upper = expit(-t);
    d.dc = -d.d_upper;
    return d;
  }
  if (outcome == n_thresh + 1) {
    const double t = alpha[n_thresh - 1] - c;
    d.d_lower = -expit(t);
    d.dc = -d.d_lower;
    return d;
  }
  const double u = alpha[outcome - 1] - c;
  const double l = alpha[outcome - 2] - c;
  const double log_p =
      u - log1p_exp(u) - log1p_exp(l) + std::log(-std::expm1(l - u));
  d.d_upper = std::exp(log_logistic_density(u) - log_p);
  d.d_lower = -std::exp(log_logistic_density(l) - log_p);
  d.dc = -(d.d_upper + d.d_lower);
  return d;
}

// d(sd)/dz * d(phi)/d(sd) evaluated at sd = exp(z)
double dphi_dz(double sd, double phi) {
  return -3.0 * sd * sd * phi * phi * phi / (kPi * kPi);
}

}  // namespace

PosteriorTarget::PosteriorTarget(const PanelDataset& ds,
                                 const DesignMatrix& design,
                                 const ModelSpec& spec)
    : ds_(ds), design_(design), spec_(spec) {
  if (design.rows.rows() != ds.n_records()) {
    throw std::invalid_argument(
        "PosteriorTarget: design not aligned to dataset");
  }
  if (spec.categories != ds.categories()) {
    throw std::invalid_argument(
        "PosteriorTarget: model categories do not match dataset");
  }
  dimension_ = unconstrained_dimension(spec,
                                       static_cast<int>(design.rows.cols()),
                                       ds.n_families(), ds.n_individuals());
  if (!std::isfinite(log_density(Eigen::VectorXd::Zero(dimension_)))) {
    throw std::logic_error(
        "PosteriorTarget: log density not finite at the origin");
  }
}

ParameterState PosteriorTarget::constrain_state(
    const Eigen::VectorXd& z) const {
  if (z.size() != dimension_) {
    throw std::invalid_argument("PosteriorTarget: dimension mismatch");
  }
  return from_unconstrained(spec_, z, ds_.n_families(), ds_.n_individuals())
      .params;
}

Eigen::VectorXd PosteriorTarget::constrain(const Eigen::VectorXd& z) const {
  return flatten_constrained(spec_, constrain_state(z));
}

std::vector<std::string> PosteriorTarget::coordinate_names() const {
  return bridgemixed::coordinate_names(spec_, design_.column_names,
                                       ds_.family_keys(),
                                       ds_.individual_keys());
}

double PosteriorTarget::log_density(const Eigen::VectorXd& z) const {
  return log_density_terms(z).total();
}

PosteriorTerms PosteriorTarget::log_density_terms(
    const Eigen::VectorXd& z) const {
  PosteriorTerms terms;
  if (z.size() != dimension_) {
    throw std::invalid_argument("PosteriorTarget: dimension mismatch");
  }
  if (!z.allFinite()) {
    terms.loglik = kNegInf;
    return terms;
  }

  const TransformResult tr =
      from_unconstrained(spec_, z, ds_.n_families(), ds_.n_individuals());
  const ParameterState& params = tr.params;
  terms.jacobian = tr.log_jacobian;

  // parameter priors: Cauchy on thresholds and coefficients, half-Cauchy on
  // the implied random-effect SDs
  for (int a = 0; a < params.alpha.size(); ++a) {
    terms.param_prior += cauchy_logpdf(params.alpha[a], spec_.prior_location,
                                       spec_.prior_scale);
  }
  for (int j = 0; j < params.beta.size(); ++j) {
    terms.param_prior += cauchy_logpdf(params.beta[j], spec_.prior_location,
                                       spec_.prior_scale);
  }
  const int n_scales = family_scale_count(spec_.family);
  const int scale_offset =
      (spec_.categories - 1) + static_cast<int>(params.beta.size());
  for (int s = 0; s < n_scales; ++s) {
    const double sd = std::exp(z[scale_offset + s]);
    terms.param_prior += half_cauchy_logpdf(sd, 0.0, spec_.re_prior_scale);
  }

  // random-effects prior
  switch (spec_.family) {
    case ModelFamily::modified_bridge_bridge: {
      const BridgeParam phi_u(params.re_scale[0]);
      const BridgeParam phi_v(params.re_scale[1]);
      for (int f = 0; f < params.u_star.size(); ++f) {
        terms.re_prior += bridge_logpdf(params.u_star[f], phi_u);
      }
      for (int i = 0; i < params.v.size(); ++i) {
        terms.re_prior += bridge_logpdf(params.v[i], phi_v);
      }
      break;
    }
    case ModelFamily::normal_normal: {
      for (int f = 0; f < params.u_star.size(); ++f) {
        terms.re_prior += normal_logpdf(params.u_star[f], 0.0,
                                        params.re_scale[0]);
      }
      for (int i = 0; i < params.v.size(); ++i) {
        terms.re_prior += normal_logpdf(params.v[i], 0.0, params.re_scale[1]);
      }
      break;
    }
    case ModelFamily::two_level_bridge: {
      const BridgeParam phi_v(params.re_scale[0]);
      for (int i = 0; i < params.v.size(); ++i) {
        terms.re_prior += bridge_logpdf(params.v[i], phi_v);
      }
      break;
    }
    case ModelFamily::fixed:
      break;
  }

  // likelihood, record order fixed for reproducible reduction
  const double e = family_effect_divisor(spec_, params);
  for (int r = 0; r < ds_.n_records(); ++r) {
    const double eta = design_.rows.row(r).dot(params.beta);
    double b = 0.0;
    switch (spec_.family) {
      case ModelFamily::fixed:
        break;
      case ModelFamily::two_level_bridge:
        b = params.v[ds_.record_individual(r)];
        break;
      default:
        b = params.u_star[ds_.record_family(r)] / e +
            params.v[ds_.record_individual(r)];
    }
    terms.loglik +=
        ordinal_loglik(params.alpha, ds_.record(r).outcome, eta + b);
  }
  return terms;
}

double PosteriorTarget::log_density_grad(const Eigen::VectorXd& z,
                                         Eigen::VectorXd& grad) const {
  if (z.size() != dimension_) {
    throw std::invalid_argument("PosteriorTarget: dimension mismatch");
  }
  grad.setZero(dimension_);
  if (!z.allFinite()) return kNegInf;

  const int n_thresh = spec_.categories - 1;
  const int p = static_cast<int>(design_.rows.cols());
  const int n_scales = family_scale_count(spec_.family);
  const bool has_u = family_has_family_effect(spec_.family);
  const bool has_v = family_has_individual_effect(spec_.family);
  const int n_u = has_u ? ds_.n_families() : 0;
  const int n_v = has_v ? ds_.n_individuals() : 0;
  const int beta_offset = n_thresh;
  const int scale_offset = beta_offset + p;
  const int u_offset = scale_offset + n_scales;
  const int v_offset = u_offset + n_u;

  const TransformResult tr =
      from_unconstrained(spec_, z, ds_.n_families(), ds_.n_individuals());
  const ParameterState& params = tr.params;
  double total = tr.log_jacobian;

  Eigen::VectorXd g_alpha = Eigen::VectorXd::Zero(n_thresh);

  // --- parameter priors ---
  for (int a = 0; a < n_thresh; ++a) {
    total += cauchy_logpdf(params.alpha[a], spec_.prior_location,
                           spec_.prior_scale);
    g_alpha[a] += prior_dlogpdf_dx(PriorKind::cauchy, params.alpha[a],
                                   spec_.prior_location, spec_.prior_scale);
  }
  for (int j = 0; j < p; ++j) {
    total += cauchy_logpdf(params.beta[j], spec_.prior_location,
                           spec_.prior_scale);
    grad[beta_offset + j] +=
        prior_dlogpdf_dx(PriorKind::cauchy, params.beta[j],
                         spec_.prior_location, spec_.prior_scale);
  }
  for (int s = 0; s < n_scales; ++s) {
    const double sd = std::exp(z[scale_offset + s]);
    total += half_cauchy_logpdf(sd, 0.0, spec_.re_prior_scale);
    // chain through sd = exp(z), plus the Jacobian term d/dz log sd' = 1
    grad[scale_offset + s] +=
        prior_dlogpdf_dx(PriorKind::half_cauchy, sd, 0.0,
                         spec_.re_prior_scale) *
            sd +
        1.0;
  }
  for (int a = 1; a < n_thresh; ++a) {
    // threshold-gap Jacobian contributes +1 per gap coordinate (added when
    // chaining g_alpha below would miss it, so record it here)
    grad[a] += 1.0;
  }

  // --- random-effects prior ---
  switch (spec_.family) {
    case ModelFamily::modified_bridge_bridge: {
      const BridgeParam phi_u(params.re_scale[0]);
      const BridgeParam phi_v(params.re_scale[1]);
      double dphi_u_sum = 0.0;
      double dphi_v_sum = 0.0;
      for (int f = 0; f < n_u; ++f) {
        total += bridge_logpdf(params.u_star[f], phi_u);
        grad[u_offset + f] += bridge_dlogpdf_dx(params.u_star[f], phi_u);
        dphi_u_sum += bridge_dlogpdf_dphi(params.u_star[f], phi_u);
      }
      for (int i = 0; i < n_v; ++i) {
        total += bridge_logpdf(params.v[i], phi_v);
        grad[v_offset + i] += bridge_dlogpdf_dx(params.v[i], phi_v);
        dphi_v_sum += bridge_dlogpdf_dphi(params.v[i], phi_v);
      }
      const double sd_u = std::exp(z[scale_offset]);
      const double sd_v = std::exp(z[scale_offset + 1]);
      grad[scale_offset] += dphi_u_sum * dphi_dz(sd_u, phi_u.phi);
      grad[scale_offset + 1] += dphi_v_sum * dphi_dz(sd_v, phi_v.phi);
      break;
    }
    case ModelFamily::normal_normal: {
      const double s_u = params.re_scale[0];
      const double s_v = params.re_scale[1];
      double ds_u_sum = 0.0;
      double ds_v_sum = 0.0;
      for (int f = 0; f < n_u; ++f) {
        total += normal_logpdf(params.u_star[f], 0.0, s_u);
        grad[u_offset + f] += -params.u_star[f] / (s_u * s_u);
        ds_u_sum += -1.0 / s_u +
                    params.u_star[f] * params.u_star[f] / (s_u * s_u * s_u);
      }
      for (int i = 0; i < n_v; ++i) {
        total += normal_logpdf(params.v[i], 0.0, s_v);
        grad[v_offset + i] += -params.v[i] / (s_v * s_v);
        ds_v_sum +=
            -1.0 / s_v + params.v[i] * params.v[i] / (s_v * s_v * s_v);
      }
      // d sigma / dz = sigma
      grad[scale_offset] += ds_u_sum * s_u;
      grad[scale_offset + 1] += ds_v_sum * s_v;
      break;
    }
    case ModelFamily::two_level_bridge: {
      const BridgeParam phi_v(params.re_scale[0]);
      double dphi_v_sum = 0.0;
      for (int i = 0; i < n_v; ++i) {
        total += bridge_logpdf(params.v[i], phi_v);
        grad[v_offset + i] += bridge_dlogpdf_dx(params.v[i], phi_v);
        dphi_v_sum += bridge_dlogpdf_dphi(params.v[i], phi_v);
      }
      const double sd_v = std::exp(z[scale_offset]);
      grad[scale_offset] += dphi_v_sum * dphi_dz(sd_v, phi_v.phi);
      break;
    }
    case ModelFamily::fixed:
      break;
  }

  // --- likelihood ---
  const double e = family_effect_divisor(spec_, params);
  const bool mbb = spec_.family == ModelFamily::modified_bridge_bridge;
  double dc_times_ustar = 0.0;  // for the phi_V chain term through e
  for (int r = 0; r < ds_.n_records(); ++r) {
    const int fam = ds_.record_family(r);
    const int ind = ds_.record_individual(r);
    const double eta = design_.rows.row(r).dot(params.beta);
    double b = 0.0;
    if (spec_.family == ModelFamily::two_level_bridge) {
      b = params.v[ind];
    } else if (spec_.family != ModelFamily::fixed) {
      b = params.u_star[fam] / e + params.v[ind];
    }
    const int y = ds_.record(r).outcome;
    total += ordinal_loglik(params.alpha, y, eta + b);
    const RecordDerivs d = ordinal_loglik_derivs(params.alpha, y, eta + b);
    if (y < spec_.categories) g_alpha[y - 1] += d.d_upper;
    if (y > 1) g_alpha[y - 2] += d.d_lower;
    grad.segment(beta_offset, p) += d.dc * design_.rows.row(r).transpose();
    if (has_u) {
      grad[u_offset + fam] += d.dc / e;
      if (mbb) dc_times_ustar += d.dc * params.u_star[fam];
    }
    if (has_v) grad[v_offset + ind] += d.dc;
  }
  if (mbb) {
    // b depends on phi_V through e: db/dphi_V = -u*/phi_V^2
    const double phi_v = params.re_scale[1];
    const double sd_v = std::exp(z[scale_offset + 1]);
    grad[scale_offset + 1] +=
        -dc_times_ustar / (phi_v * phi_v) * dphi_dz(sd_v, phi_v);
  }

  // chain thresholds through (alpha_1, log gaps): alpha_a depends on z_r for
  // all r <= a, with d alpha_a / d z_r = exp(z_r) for r >= 2
  double suffix = 0.0;
  for (int a = n_thresh - 1; a >= 1; --a) {
    suffix += g_alpha[a];
    grad[a] += std::exp(z[a]) * suffix;
  }
  grad[0] += suffix + g_alpha[0];

  return total;
}

}  // namespace bridgemixed
