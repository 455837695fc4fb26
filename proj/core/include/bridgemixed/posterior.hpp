#pragma once

#include <Eigen/Core>

#include "bridgemixed/model.hpp"
#include "bridgemixed/target.hpp"

namespace bridgemixed {

/// Additive pieces of the joint log posterior; `total()` is what the
/// sampler sees. Exposed separately so tests can check the decomposition
/// term by term.
struct PosteriorTerms {
  double loglik = 0.0;
  double re_prior = 0.0;
  double param_prior = 0.0;
  double jacobian = 0.0;
  double total() const { return loglik + re_prior + param_prior + jacobian; }
};

/// Joint log posterior of thresholds, coefficients, random-effect scales and
/// random effects over the unconstrained coordinate vector, with analytic
/// gradient. Immutable and shareable across threads; evaluations are pure.
class PosteriorTarget final : public LogDensityModel {
 public:
  PosteriorTarget(const PanelDataset& ds, const DesignMatrix& design,
                  const ModelSpec& spec);

  int dimension() const override { return dimension_; }
  double log_density(const Eigen::VectorXd& z) const override;
  double log_density_grad(const Eigen::VectorXd& z,
                          Eigen::VectorXd& grad) const override;

  PosteriorTerms log_density_terms(const Eigen::VectorXd& z) const;

  ParameterState constrain_state(const Eigen::VectorXd& z) const;
  Eigen::VectorXd constrain(const Eigen::VectorXd& z) const override;
  std::vector<std::string> coordinate_names() const override;

  const ModelSpec& spec() const { return spec_; }
  const PanelDataset& dataset() const { return ds_; }
  const DesignMatrix& design() const { return design_; }

 private:
  const PanelDataset& ds_;
  const DesignMatrix& design_;
  ModelSpec spec_;
  int dimension_;
};

}  // namespace bridgemixed
