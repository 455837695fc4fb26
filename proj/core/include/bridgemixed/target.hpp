#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

namespace bridgemixed {

/// Differentiable unnormalized log density over R^d. The sampler only sees
/// this interface; analytic test targets implement it alongside the model
/// posterior.
class LogDensityModel {
 public:
  virtual ~LogDensityModel() = default;

  virtual int dimension() const = 0;
  virtual double log_density(const Eigen::VectorXd& z) const = 0;
  /// Fills grad (resized to dimension()) and returns the log density.
  virtual double log_density_grad(const Eigen::VectorXd& z,
                                  Eigen::VectorXd& grad) const = 0;

  /// Constrained view of a draw; identity unless overridden.
  virtual Eigen::VectorXd constrain(const Eigen::VectorXd& z) const {
    return z;
  }
  virtual std::vector<std::string> coordinate_names() const {
    std::vector<std::string> names;
    for (int i = 1; i <= dimension(); ++i) {
      names.push_back("z." + std::to_string(i));
    }
    return names;
  }
};

}  // namespace bridgemixed
