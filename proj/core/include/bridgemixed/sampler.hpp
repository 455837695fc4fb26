#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "bridgemixed/rng.hpp"
#include "bridgemixed/target.hpp"

namespace bridgemixed {

struct SamplerConfig {
  int chains = 4;
  int iterations = 2000;  // per chain, warm-up included
  double warmup_fraction = 0.5;
  double target_accept = 0.8;
  int max_tree_depth = 10;
  std::uint64_t seed = 1;
  int threads = 1;

  int warmup_iterations() const {
    return static_cast<int>(iterations * warmup_fraction);
  }
  int kept_iterations() const { return iterations - warmup_iterations(); }
  void validate() const;
};

struct IterationStats {
  double step_size = 0.0;
  int tree_depth = 0;
  bool divergent = false;
  double accept_stat = 0.0;
  double energy = 0.0;
  int n_leapfrog = 0;
};

/// Constrained draws, either fresh from the sampler or reloaded from disk.
struct Draws {
  std::vector<std::string> names;
  std::vector<Eigen::MatrixXd> chains;  // kept iterations x n_coordinates

  int n_chains() const { return static_cast<int>(chains.size()); }
  long total_draws() const;
  Eigen::MatrixXd pooled() const;              // chains stacked in order
  Eigen::VectorXd pooled_column(int c) const;  // one coordinate, all chains
  int index_of(const std::string& name) const;
};

struct PosteriorDraws {
  Draws constrained;
  std::vector<Eigen::MatrixXd> unconstrained;            // per chain
  std::vector<std::vector<IterationStats>> stats;        // kept only
  SamplerConfig config;
};

/// Diagonal metric: per-coordinate posterior variance estimates (the inverse
/// mass matrix diagonal).
struct DiagMetric {
  Eigen::VectorXd variance;
  static DiagMetric unit(int dim) {
    return DiagMetric{Eigen::VectorXd::Ones(dim)};
  }
};

/// One symplectic leapfrog update of (position, momentum).
/// Returns false when the gradient became non-finite along the way.
bool leapfrog(const LogDensityModel& target, const DiagMetric& metric,
              double eps, Eigen::VectorXd& z, Eigen::VectorXd& r,
              Eigen::VectorXd& grad, double& logp);

struct NutsPoint {
  Eigen::VectorXd z;
  double logp = 0.0;
  Eigen::VectorXd grad;
};

/// One No-U-Turn transition (doubling trajectory, slice acceptance).
/// Divergences are recorded in the stats, never thrown.
NutsPoint nuts_transition(const LogDensityModel& target,
                          const DiagMetric& metric, const NutsPoint& current,
                          double eps, int max_tree_depth, Rng& rng,
                          IterationStats& stats);

/// Heuristic initial step size: doubles/halves until the one-step
/// acceptance probability crosses 1/2.
double find_reasonable_step_size(const LogDensityModel& target,
                                 const DiagMetric& metric,
                                 const NutsPoint& start, Rng& rng);

/// Warm-up adaptation: dual-averaging step size tuned to the target
/// acceptance rate and a diagonal metric re-estimated over growing windows
/// of warm-up draws.
class WarmupAdapter {
 public:
  WarmupAdapter(int warmup_iterations, int dimension, double target_accept,
                double initial_step_size);

  /// Record one warm-up iteration. Returns true when the metric was just
  /// rebuilt at a window boundary.
  bool observe(const Eigen::VectorXd& z, double accept_stat);

  double step_size() const { return step_size_; }
  const DiagMetric& metric() const { return metric_; }

  /// Call after the last warm-up iteration: switches to the dual-averaged
  /// step size.
  void finalize();

 private:
  void rebuild_metric();
  void restart_averaging(double eps);

  int warmup_;
  int iter_ = 0;
  double delta_;
  DiagMetric metric_;

  // dual averaging state (gamma, t0, kappa fixed at 0.05, 10, 0.75)
  double mu_ = 0.0;
  double log_eps_ = 0.0;
  double log_eps_bar_ = 0.0;
  double h_bar_ = 0.0;
  int da_iter_ = 0;
  double step_size_;

  // variance accumulator for the active window
  Eigen::VectorXd acc_mean_;
  Eigen::VectorXd acc_m2_;
  long acc_n_ = 0;

  int window_start_ = 0;
  int window_end_ = 0;
  int term_start_ = 0;
  int next_window_size_ = 25;
};

/// Run `config.chains` independent NUTS chains (optionally in parallel) and
/// collect post-warm-up draws. Initial positions are uniform on [-2, 2] per
/// unconstrained coordinate, re-drawn up to 100 times until the density is
/// finite.
PosteriorDraws run_chains(const LogDensityModel& target,
                          const SamplerConfig& config);

}  // namespace bridgemixed
