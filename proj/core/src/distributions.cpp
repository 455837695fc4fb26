#include "bridgemixed/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bridgemixed {

namespace {

constexpr double kPi = 3.14159265358979323846;

// log(cosh(t) + cos(pi*phi)) without overflow at large |t| and without
// cancellation at small |t| when phi is close to 1.
double log_cosh_plus_cos(double t, double phi) {
  const double a = std::abs(t);
  if (a > 30.0) {
    const double c = std::cos(kPi * phi);
    return a - std::log(2.0) +
           std::log1p(std::exp(-2.0 * a) + 2.0 * c * std::exp(-a));
  }
  // cosh(t) + cos(pi phi) = 2 sinh^2(t/2) + 2 cos^2(pi phi / 2)
  const double sh = std::sinh(0.5 * t);
  const double cc = std::cos(0.5 * kPi * phi);
  return std::log(2.0 * (sh * sh + cc * cc));
}

// sinh(t) / (cosh(t) + cos(pi*phi)), bounded and overflow-free.
double sinh_over_cosh_plus_cos(double t, double phi) {
  const double a = std::abs(t);
  const double sign = t < 0.0 ? -1.0 : 1.0;
  if (a > 30.0) {
    const double c = std::cos(kPi * phi);
    const double e = std::exp(-a);
    const double e2 = std::exp(-2.0 * a);
    return sign * (1.0 - e2) / (1.0 + e2 + 2.0 * c * e);
  }
  const double sh = std::sinh(0.5 * t);
  const double cc = std::cos(0.5 * kPi * phi);
  return std::sinh(t) / (2.0 * (sh * sh + cc * cc));
}

void check_prob(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("probability must lie in (0, 1)");
  }
}

}  // namespace

BridgeParam::BridgeParam(double phi_in) : phi(phi_in) {
  if (!(phi > 0.0 && phi < 1.0)) {
    throw std::invalid_argument("BridgeParam: phi must lie in (0, 1)");
  }
}

ModifiedBridgeParam::ModifiedBridgeParam(double phi_y_in, double phi_z_in)
    : phi_y(phi_y_in), phi_z(phi_z_in) {
  // phi_z = 1 is admitted: the kernel then reduces to the plain Bridge
  if (!(phi_y > 0.0 && phi_y < 1.0) || !(phi_z > 0.0 && phi_z <= 1.0)) {
    throw std::invalid_argument(
        "ModifiedBridgeParam: scale parameters must lie in (0, 1)");
  }
}

double bridge_logpdf(double x, const BridgeParam& p) {
  return std::log(std::sin(kPi * p.phi)) - std::log(2.0 * kPi) -
         log_cosh_plus_cos(p.phi * x, p.phi);
}

double bridge_dlogpdf_dx(double x, const BridgeParam& p) {
  return -p.phi * sinh_over_cosh_plus_cos(p.phi * x, p.phi);
}

double bridge_dlogpdf_dphi(double x, const BridgeParam& p) {
  const double phi = p.phi;
  const double t = phi * x;
  // d/dphi log sin(pi phi) = pi cot(pi phi)
  const double cot_term = kPi * std::cos(kPi * phi) / std::sin(kPi * phi);
  // d/dphi [-log(cosh(phi x) + cos(pi phi))]
  //   = -(x sinh(phi x) - pi sin(pi phi)) / (cosh(phi x) + cos(pi phi))
  const double ratio = sinh_over_cosh_plus_cos(t, phi);  // sinh/(cosh+cos)
  const double inv_denom = std::exp(-log_cosh_plus_cos(t, phi));
  return cot_term - x * ratio + kPi * std::sin(kPi * phi) * inv_denom;
}

double bridge_cdf(double x, const BridgeParam& p) {
  const double phi = p.phi;
  return 0.5 + std::atan(std::tanh(0.5 * phi * x) * std::tan(0.5 * kPi * phi)) /
                   (kPi * phi);
}

double bridge_quantile(double prob, const BridgeParam& p) {
  check_prob(prob);
  const double phi = p.phi;
  const double r =
      std::tan(kPi * phi * (prob - 0.5)) / std::tan(0.5 * kPi * phi);
  return 2.0 / phi * std::atanh(r);
}

Eigen::VectorXd bridge_sample(Rng& rng, const BridgeParam& p, int count) {
  if (count < 1) {
    throw std::invalid_argument("bridge_sample: count must be >= 1");
  }
  Eigen::VectorXd out(count);
  for (int i = 0; i < count; ++i) {
    out[i] = bridge_quantile(rng.uniform(), p);
  }
  return out;
}

double bridge_variance(const BridgeParam& p) {
  return kPi * kPi / 3.0 * (1.0 / (p.phi * p.phi) - 1.0);
}

double bridge_sd(const BridgeParam& p) { return std::sqrt(bridge_variance(p)); }

BridgeParam phi_from_sd(double sd) {
  if (!(sd > 0.0)) {
    throw std::invalid_argument("phi_from_sd: sd must be positive");
  }
  double phi = 1.0 / std::sqrt(1.0 + 3.0 * sd * sd / (kPi * kPi));
  // tiny sd rounds the ratio to 1; keep the result strictly inside (0, 1)
  phi = std::min(phi, 1.0 - 1.1e-16);
  phi = std::max(phi, 1e-300);
  return BridgeParam(phi);
}

double dphi_dsd(double sd) {
  const double phi = phi_from_sd(sd).phi;
  return -3.0 * sd * phi * phi * phi / (kPi * kPi);
}

double modified_bridge_logpdf(double x, const ModifiedBridgeParam& p) {
  return std::log(p.phi_z) + std::log(std::sin(kPi * p.phi_y)) -
         std::log(2.0 * kPi) - log_cosh_plus_cos(p.phi_y * p.phi_z * x, p.phi_y);
}

double modified_bridge_dlogpdf_dx(double x, const ModifiedBridgeParam& p) {
  const double t = p.phi_y * p.phi_z * x;
  return -p.phi_y * p.phi_z * sinh_over_cosh_plus_cos(t, p.phi_y);
}

double modified_bridge_variance(const ModifiedBridgeParam& p) {
  return kPi * kPi / (3.0 * p.phi_z * p.phi_z) *
         (1.0 / (p.phi_y * p.phi_y) - 1.0);
}

double modified_bridge_cdf(double x, const ModifiedBridgeParam& p) {
  return bridge_cdf(p.phi_z * x, BridgeParam(p.phi_y));
}

double modified_bridge_quantile(double prob, const ModifiedBridgeParam& p) {
  return bridge_quantile(prob, BridgeParam(p.phi_y)) / p.phi_z;
}

Eigen::VectorXd modified_bridge_sample(Rng& rng, const ModifiedBridgeParam& p,
                                       int count) {
  Eigen::VectorXd out = bridge_sample(rng, BridgeParam(p.phi_y), count);
  out /= p.phi_z;
  return out;
}

double normal_logpdf(double x, double location, double scale) {
  if (!(scale > 0.0)) {
    throw std::invalid_argument("normal_logpdf: scale must be positive");
  }
  const double z = (x - location) / scale;
  return -0.5 * z * z - std::log(scale) - 0.5 * std::log(2.0 * kPi);
}

double cauchy_logpdf(double x, double location, double scale) {
  if (!(scale > 0.0)) {
    throw std::invalid_argument("cauchy_logpdf: scale must be positive");
  }
  const double z = (x - location) / scale;
  return -std::log(kPi * scale) - std::log1p(z * z);
}

double half_cauchy_logpdf(double x, double location, double scale) {
  if (x < 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(2.0) + cauchy_logpdf(x, location, scale);
}

double prior_logpdf(PriorKind kind, double x, double location, double scale) {
  switch (kind) {
    case PriorKind::cauchy:
      return cauchy_logpdf(x, location, scale);
    case PriorKind::half_cauchy:
      return half_cauchy_logpdf(x, location, scale);
    case PriorKind::normal:
      return normal_logpdf(x, location, scale);
  }
  throw std::logic_error("prior_logpdf: unknown kind");
}

double prior_dlogpdf_dx(PriorKind kind, double x, double location,
                        double scale) {
  const double d = x - location;
  switch (kind) {
    case PriorKind::cauchy:
    case PriorKind::half_cauchy:
      // folding shifts the density by a constant, so the slope is shared
      return -2.0 * d / (scale * scale + d * d);
    case PriorKind::normal:
      return -d / (scale * scale);
  }
  throw std::logic_error("prior_dlogpdf_dx: unknown kind");
}

}  // namespace bridgemixed
