#pragma once

#include <Eigen/Core>

#include "bridgemixed/rng.hpp"

namespace bridgemixed {

// ---- scalar helpers ------------------------------------------------------

/// log(1 + exp(x)) without overflow.
inline double log1p_exp(double x) {
  if (x > 33.0) return x;            // exp(-x) below double epsilon
  if (x < -37.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

inline double expit(double x) {
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// log expit(x), stable in both tails.
inline double log_expit(double x) { return -log1p_exp(-x); }

/// Standard logistic density.
inline double logistic_logpdf(double x) { return -x - 2.0 * log1p_exp(-x); }

// ---- Bridge distribution for the logit link ------------------------------

/// Scale parameter of the Bridge distribution; valid range (0, 1).
struct BridgeParam {
  double phi;
  explicit BridgeParam(double phi_in);
};

/// Pair of scale parameters of the Modified Bridge distribution, the law of
/// Y / phi_z with Y ~ Bridge(phi_y).
struct ModifiedBridgeParam {
  double phi_y;
  double phi_z;
  ModifiedBridgeParam(double phi_y_in, double phi_z_in);
};

double bridge_logpdf(double x, const BridgeParam& p);
double bridge_dlogpdf_dx(double x, const BridgeParam& p);
/// Derivative of the log-density in the scale parameter; needed by the
/// posterior gradient chain rule.
double bridge_dlogpdf_dphi(double x, const BridgeParam& p);

/// Closed-form CDF: 1/2 + arctan(tanh(phi x/2) tan(phi pi/2)) / (pi phi).
double bridge_cdf(double x, const BridgeParam& p);
double bridge_quantile(double prob, const BridgeParam& p);

Eigen::VectorXd bridge_sample(Rng& rng, const BridgeParam& p, int count);

double bridge_variance(const BridgeParam& p);
double bridge_sd(const BridgeParam& p);
BridgeParam phi_from_sd(double sd);
/// d phi / d sd of the inverse map above.
double dphi_dsd(double sd);

double modified_bridge_logpdf(double x, const ModifiedBridgeParam& p);
double modified_bridge_dlogpdf_dx(double x, const ModifiedBridgeParam& p);
double modified_bridge_variance(const ModifiedBridgeParam& p);
double modified_bridge_cdf(double x, const ModifiedBridgeParam& p);
double modified_bridge_quantile(double prob, const ModifiedBridgeParam& p);
Eigen::VectorXd modified_bridge_sample(Rng& rng, const ModifiedBridgeParam& p,
                                       int count);

// ---- prior kernels --------------------------------------------------------

enum class PriorKind { cauchy, half_cauchy, normal };

double normal_logpdf(double x, double location, double scale);
double cauchy_logpdf(double x, double location, double scale);
/// Folded Cauchy on [0, inf); -inf below zero.
double half_cauchy_logpdf(double x, double location, double scale);

double prior_logpdf(PriorKind kind, double x, double location, double scale);
double prior_dlogpdf_dx(PriorKind kind, double x, double location,
                        double scale);

}  // namespace bridgemixed
