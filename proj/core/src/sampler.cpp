#include "bridgemixed/sampler.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace bridgemixed {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kDivergenceThreshold = 1000.0;

double kinetic_energy(const DiagMetric& metric, const Eigen::VectorXd& r) {
  return 0.5 * r.cwiseProduct(r).dot(metric.variance);
}

Eigen::VectorXd draw_momentum(const DiagMetric& metric, Rng& rng) {
  Eigen::VectorXd r(metric.variance.size());
  for (int i = 0; i < r.size(); ++i) {
    r[i] = rng.normal() / std::sqrt(metric.variance[i]);
  }
  return r;
}

// velocity = M^{-1} r; used by the position update and the u-turn criterion
Eigen::VectorXd velocity(const DiagMetric& metric, const Eigen::VectorXd& r) {
  return metric.variance.cwiseProduct(r);
}

struct TreeEnd {
  Eigen::VectorXd z;
  Eigen::VectorXd r;
  Eigen::VectorXd grad;
  double logp = 0.0;
};

// minus/plus are the backward/forward trajectory ends of a (sub)tree
bool no_uturn(const DiagMetric& metric, const TreeEnd& minus,
              const TreeEnd& plus) {
  const Eigen::VectorXd span = plus.z - minus.z;
  return span.dot(velocity(metric, minus.r)) >= 0.0 &&
         span.dot(velocity(metric, plus.r)) >= 0.0;
}

struct TreeResult {
  TreeEnd inner;           // end adjacent to the state the subtree grew from
  TreeEnd outer;           // end farthest along the growth direction
  Eigen::VectorXd z_prop;  // proposal sampled from this subtree
  double logp_prop = 0.0;
  Eigen::VectorXd grad_prop;
  double n_admissible = 0.0;  // states under the slice
  bool ok = false;            // no divergence, no internal u-turn
  bool divergent = false;
  int n_leapfrog = 0;
  double sum_alpha = 0.0;
  int n_alpha = 0;
};

class TreeBuilder {
 public:
  TreeBuilder(const LogDensityModel& target, const DiagMetric& metric,
              double eps, double log_u, double joint0, Rng& rng)
      : target_(target),
        metric_(metric),
        eps_(eps),
        log_u_(log_u),
        joint0_(joint0),
        rng_(rng) {}

  TreeResult build(const TreeEnd& from, int direction, int depth) {
    if (depth == 0) return leaf(from, direction);

    TreeResult first = build(from, direction, depth - 1);
    if (!first.ok) return first;

    TreeResult second = build(first.outer, direction, depth - 1);

    TreeResult combined;
    combined.inner = std::move(first.inner);
    combined.outer = std::move(second.outer);
    combined.n_leapfrog = first.n_leapfrog + second.n_leapfrog;
    combined.sum_alpha = first.sum_alpha + second.sum_alpha;
    combined.n_alpha = first.n_alpha + second.n_alpha;
    combined.divergent = first.divergent || second.divergent;
    combined.n_admissible = first.n_admissible + second.n_admissible;

    if (second.n_admissible > 0.0 &&
        rng_.uniform() < second.n_admissible / combined.n_admissible) {
      combined.z_prop = std::move(second.z_prop);
      combined.logp_prop = second.logp_prop;
      combined.grad_prop = std::move(second.grad_prop);
    } else {
      combined.z_prop = std::move(first.z_prop);
      combined.logp_prop = first.logp_prop;
      combined.grad_prop = std::move(first.grad_prop);
    }

    if (!second.ok) {
      combined.ok = false;
      return combined;
    }
    combined.ok = direction > 0
                      ? no_uturn(metric_, combined.inner, combined.outer)
                      : no_uturn(metric_, combined.outer, combined.inner);
    return combined;
  }

 private:
  TreeResult leaf(const TreeEnd& from, int direction) {
    TreeResult result;
    TreeEnd next = from;
    const bool finite = leapfrog(target_, metric_, direction * eps_, next.z,
                                 next.r, next.grad, next.logp);
    result.n_leapfrog = 1;
    double joint = kNegInf;
    if (finite && std::isfinite(next.logp)) {
      joint = next.logp - kinetic_energy(metric_, next.r);
    }
    result.inner = next;
    result.outer = std::move(next);
    result.z_prop = result.outer.z;
    result.logp_prop = result.outer.logp;
    result.grad_prop = result.outer.grad;
    result.n_admissible = log_u_ <= joint ? 1.0 : 0.0;
    result.divergent = !std::isfinite(joint) ||
                       (log_u_ - joint) > kDivergenceThreshold;
    result.ok = !result.divergent;
    result.sum_alpha = std::isfinite(joint)
                           ? std::min(1.0, std::exp(joint - joint0_))
                           : 0.0;
    result.n_alpha = 1;
    return result;
  }

  const LogDensityModel& target_;
  const DiagMetric& metric_;
  double eps_;
  double log_u_;
  double joint0_;
  Rng& rng_;
};

}  // namespace

void SamplerConfig::validate() const {
  if (chains < 1) throw std::invalid_argument("sampler: chains must be >= 1");
  if (iterations <= 10) {
    throw std::invalid_argument("sampler: iterations must exceed 10");
  }
  if (!(warmup_fraction > 0.0 && warmup_fraction < 1.0)) {
    throw std::invalid_argument("sampler: warmup_fraction must lie in (0, 1)");
  }
  if (!(target_accept > 0.0 && target_accept < 1.0)) {
    throw std::invalid_argument("sampler: target_accept must lie in (0, 1)");
  }
  if (max_tree_depth < 1 || max_tree_depth > 14) {
    throw std::invalid_argument("sampler: max_tree_depth out of range");
  }
  if (threads < 1) {
    throw std::invalid_argument("sampler: threads must be >= 1");
  }
}

long Draws::total_draws() const {
  long total = 0;
  for (const auto& chain : chains) total += chain.rows();
  return total;
}

Eigen::MatrixXd Draws::pooled() const {
  const long rows = total_draws();
  const long cols = chains.empty() ? 0 : chains.front().cols();
  Eigen::MatrixXd out(rows, cols);
  long at = 0;
  for (const auto& chain : chains) {
    out.middleRows(at, chain.rows()) = chain;
    at += chain.rows();
  }
  return out;
}

Eigen::VectorXd Draws::pooled_column(int c) const {
  Eigen::VectorXd out(total_draws());
  long at = 0;
  for (const auto& chain : chains) {
    out.segment(at, chain.rows()) = chain.col(c);
    at += chain.rows();
  }
  return out;
}

int Draws::index_of(const std::string& name) const {
  for (size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return static_cast<int>(i);
  }
  return -1;
}

bool leapfrog(const LogDensityModel& target, const DiagMetric& metric,
              double eps, Eigen::VectorXd& z, Eigen::VectorXd& r,
              Eigen::VectorXd& grad, double& logp) {
  r += 0.5 * eps * grad;
  z += eps * velocity(metric, r);
  logp = target.log_density_grad(z, grad);
  if (!grad.allFinite() || !std::isfinite(logp)) return false;
  r += 0.5 * eps * grad;
  return true;
}

NutsPoint nuts_transition(const LogDensityModel& target,
                          const DiagMetric& metric, const NutsPoint& current,
                          double eps, int max_tree_depth, Rng& rng,
                          IterationStats& stats) {
  TreeEnd minus{current.z, draw_momentum(metric, rng), current.grad,
                current.logp};
  TreeEnd plus = minus;
  const double joint0 = current.logp - kinetic_energy(metric, minus.r);
  const double log_u = joint0 - rng.exponential();

  TreeBuilder builder(target, metric, eps, log_u, joint0, rng);

  NutsPoint accepted = current;
  double n_total = 1.0;
  int depth = 0;
  bool divergent = false;
  double sum_alpha = 0.0;
  int n_alpha = 0;
  int n_leapfrog = 0;

  while (depth < max_tree_depth) {
    const int direction = rng.uniform() < 0.5 ? -1 : 1;
    TreeResult subtree = direction < 0 ? builder.build(minus, -1, depth)
                                       : builder.build(plus, 1, depth);
    n_leapfrog += subtree.n_leapfrog;
    sum_alpha += subtree.sum_alpha;
    n_alpha += subtree.n_alpha;
    divergent = divergent || subtree.divergent;

    if (direction < 0) {
      minus = subtree.outer;
    } else {
      plus = subtree.outer;
    }

    if (!subtree.ok) break;

    if (subtree.n_admissible > 0.0 &&
        rng.uniform() < subtree.n_admissible / n_total) {
      accepted.z = subtree.z_prop;
      accepted.logp = subtree.logp_prop;
      accepted.grad = subtree.grad_prop;
    }
    n_total += subtree.n_admissible;
    ++depth;

    if (!no_uturn(metric, minus, plus)) break;
  }

  stats.tree_depth = depth;
  stats.divergent = divergent;
  stats.accept_stat = n_alpha > 0 ? sum_alpha / n_alpha : 0.0;
  stats.energy = -joint0;
  stats.n_leapfrog = n_leapfrog;
  stats.step_size = eps;
  return accepted;
}

double find_reasonable_step_size(const LogDensityModel& target,
                                 const DiagMetric& metric,
                                 const NutsPoint& start, Rng& rng) {
  double eps = 1.0;
  const Eigen::VectorXd r0 = draw_momentum(metric, rng);
  const double joint0 = start.logp - kinetic_energy(metric, r0);

  auto one_step_joint = [&](double step) {
    Eigen::VectorXd z = start.z;
    Eigen::VectorXd r = r0;
    Eigen::VectorXd grad = start.grad;
    double logp = start.logp;
    if (!leapfrog(target, metric, step, z, r, grad, logp)) return kNegInf;
    return logp - kinetic_energy(metric, r);
  };

  double log_ratio = one_step_joint(eps) - joint0;
  while (!std::isfinite(log_ratio) && eps > 1e-10) {
    eps *= 0.5;
    log_ratio = one_step_joint(eps) - joint0;
  }
  if (!std::isfinite(log_ratio)) return 1e-10;

  const bool grow = log_ratio > std::log(0.5);
  for (int i = 0; i < 100; ++i) {
    if (grow && log_ratio <= std::log(0.5)) break;
    if (!grow && log_ratio >= std::log(0.5)) break;
    eps *= grow ? 2.0 : 0.5;
    if (eps > 1e7 || eps < 1e-10) break;
    log_ratio = one_step_joint(eps) - joint0;
    if (!std::isfinite(log_ratio)) {
      if (grow) {  // overshot into instability; back off once and stop
        eps *= 0.5;
        break;
      }
      log_ratio = kNegInf;
    }
  }
  return std::clamp(eps, 1e-10, 1e7);
}

WarmupAdapter::WarmupAdapter(int warmup_iterations, int dimension,
                             double target_accept, double initial_step_size)
    : warmup_(warmup_iterations),
      delta_(target_accept),
      metric_(DiagMetric::unit(dimension)),
      step_size_(initial_step_size) {
  acc_mean_ = Eigen::VectorXd::Zero(dimension);
  acc_m2_ = Eigen::VectorXd::Zero(dimension);
  restart_averaging(initial_step_size);

  // step-size-only buffers at both ends, doubling variance windows between
  const int init_buffer = std::min(75, std::max(1, warmup_ / 7));
  const int term_buffer = std::min(50, std::max(1, warmup_ / 10));
  if (warmup_ < 40) {
    window_start_ = warmup_;
    window_end_ = warmup_;
    term_start_ = warmup_;
  } else {
    window_start_ = init_buffer;
    term_start_ = warmup_ - term_buffer;
    next_window_size_ = std::max(25, (term_start_ - window_start_) / 15);
    window_end_ = window_start_ + next_window_size_;
    if (window_end_ + 2 * next_window_size_ > term_start_) {
      window_end_ = term_start_;
    }
  }
}

void WarmupAdapter::restart_averaging(double eps) {
  mu_ = std::log(10.0 * std::max(eps, 1e-300));
  log_eps_ = std::log(std::max(eps, 1e-300));
  log_eps_bar_ = log_eps_;
  h_bar_ = 0.0;
  da_iter_ = 0;
}

void WarmupAdapter::rebuild_metric() {
  if (acc_n_ >= 2) {
    const double n = static_cast<double>(acc_n_);
    Eigen::VectorXd var = acc_m2_ / (n - 1.0);
    var = (n / (n + 5.0)) * var.array() + (5.0 / (n + 5.0)) * 1e-3;
    metric_.variance = var.cwiseMax(1e-10);
  }
  acc_mean_.setZero();
  acc_m2_.setZero();
  acc_n_ = 0;
}

bool WarmupAdapter::observe(const Eigen::VectorXd& z, double accept_stat) {
  constexpr double gamma = 0.05;
  constexpr double t0 = 10.0;
  constexpr double kappa = 0.75;
  ++da_iter_;
  const double eta = 1.0 / (da_iter_ + t0);
  const double bounded =
      std::isfinite(accept_stat) ? std::clamp(accept_stat, 0.0, 1.0) : 0.0;
  h_bar_ = (1.0 - eta) * h_bar_ + eta * (delta_ - bounded);
  log_eps_ = mu_ - std::sqrt(static_cast<double>(da_iter_)) / gamma * h_bar_;
  const double weight = std::pow(static_cast<double>(da_iter_), -kappa);
  log_eps_bar_ = weight * log_eps_ + (1.0 - weight) * log_eps_bar_;
  step_size_ = std::exp(log_eps_);

  const int it = iter_++;
  bool rebuilt = false;
  if (it >= window_start_ && it < term_start_) {
    ++acc_n_;
    const Eigen::VectorXd delta = z - acc_mean_;
    acc_mean_ += delta / static_cast<double>(acc_n_);
    acc_m2_ += delta.cwiseProduct(z - acc_mean_);
    if (it + 1 == window_end_) {
      rebuild_metric();
      restart_averaging(std::exp(log_eps_bar_));
      step_size_ = std::exp(log_eps_);
      next_window_size_ *= 2;
      window_start_ = window_end_;
      window_end_ = window_start_ + next_window_size_;
      if (window_end_ + 2 * next_window_size_ > term_start_) {
        window_end_ = term_start_;
      }
      rebuilt = true;
    }
  }
  return rebuilt;
}

void WarmupAdapter::finalize() { step_size_ = std::exp(log_eps_bar_); }

namespace {

struct ChainOutput {
  Eigen::MatrixXd unconstrained;
  Eigen::MatrixXd constrained;
  std::vector<IterationStats> stats;
};

ChainOutput run_one_chain(const LogDensityModel& target,
                          const SamplerConfig& config, int chain_index) {
  const int dim = target.dimension();
  Rng rng = Rng(config.seed).fork(static_cast<std::uint64_t>(chain_index));

  NutsPoint point;
  point.z.resize(dim);
  point.grad.resize(dim);
  bool initialized = false;
  for (int attempt = 0; attempt < 100 && !initialized; ++attempt) {
    for (int i = 0; i < dim; ++i) point.z[i] = rng.uniform(-2.0, 2.0);
    point.logp = target.log_density_grad(point.z, point.grad);
    initialized = std::isfinite(point.logp) && point.grad.allFinite();
  }
  if (!initialized) {
    throw std::runtime_error("chain " + std::to_string(chain_index + 1) +
                             ": no finite initial density after 100 attempts");
  }

  const int warmup = config.warmup_iterations();
  const int kept = config.kept_iterations();

  WarmupAdapter adapter(
      warmup, dim, config.target_accept,
      find_reasonable_step_size(target, DiagMetric::unit(dim), point, rng));

  ChainOutput out;
  out.unconstrained.resize(kept, dim);
  out.stats.resize(kept);

  Eigen::MatrixXd constrained;
  for (int iter = 0; iter < config.iterations; ++iter) {
    const bool warm = iter < warmup;
    IterationStats stats;
    point = nuts_transition(target, adapter.metric(), point,
                            adapter.step_size(), config.max_tree_depth, rng,
                            stats);
    if (warm) {
      adapter.observe(point.z, stats.accept_stat);
      if (iter + 1 == warmup) adapter.finalize();
      continue;
    }
    const int k = iter - warmup;
    out.unconstrained.row(k) = point.z;
    out.stats[k] = stats;
    const Eigen::VectorXd c = target.constrain(point.z);
    if (constrained.size() == 0) constrained.resize(kept, c.size());
    constrained.row(k) = c;
  }
  out.constrained = std::move(constrained);
  return out;
}

}  // namespace

PosteriorDraws run_chains(const LogDensityModel& target,
                          const SamplerConfig& config) {
  config.validate();

  PosteriorDraws draws;
  draws.config = config;
  draws.constrained.names = target.coordinate_names();
  draws.constrained.chains.resize(config.chains);
  draws.unconstrained.resize(config.chains);
  draws.stats.resize(config.chains);

  std::vector<ChainOutput> outputs(config.chains);
  std::vector<std::exception_ptr> errors(config.chains);

  const int workers = std::max(1, std::min(config.threads, config.chains));
  std::atomic<int> next{0};
  auto work = [&]() {
    while (true) {
      const int c = next.fetch_add(1);
      if (c >= config.chains) return;
      try {
        outputs[c] = run_one_chain(target, config, c);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (const auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }

  for (int c = 0; c < config.chains; ++c) {
    draws.constrained.chains[c] = std::move(outputs[c].constrained);
    draws.unconstrained[c] = std::move(outputs[c].unconstrained);
    draws.stats[c] = std::move(outputs[c].stats);
  }
  return draws;
}

}  // namespace bridgemixed
