#include "bridgemixed/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bridgemixed {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// split every chain in half, dropping the middle element of odd chains
std::vector<Eigen::VectorXd> split_in_halves(
    const std::vector<Eigen::VectorXd>& chains) {
  std::vector<Eigen::VectorXd> out;
  long min_half = std::numeric_limits<long>::max();
  for (const auto& c : chains) min_half = std::min(min_half, c.size() / 2);
  for (const auto& c : chains) {
    if (min_half < 1) break;
    out.push_back(c.head(min_half));
    out.push_back(c.tail(min_half));
  }
  return out;
}

struct PooledVariance {
  double within = 0.0;     // W
  double var_plus = 0.0;   // (L-1)/L W + B/L
  bool degenerate = true;
};

PooledVariance pooled_variance(const std::vector<Eigen::VectorXd>& seqs) {
  PooledVariance pv;
  const int m = static_cast<int>(seqs.size());
  if (m < 2) return pv;
  const long len = seqs.front().size();
  if (len < 2) return pv;

  Eigen::VectorXd means(m);
  Eigen::VectorXd vars(m);
  for (int j = 0; j < m; ++j) {
    means[j] = seqs[j].mean();
    vars[j] = (seqs[j].array() - means[j]).square().sum() /
              static_cast<double>(len - 1);
  }
  const double grand = means.mean();
  const double b_over_len =
      (means.array() - grand).square().sum() / static_cast<double>(m - 1);
  pv.within = vars.mean();
  pv.var_plus = (static_cast<double>(len - 1) / len) * pv.within + b_over_len;
  pv.degenerate = false;
  return pv;
}

}  // namespace

double split_rhat(const std::vector<Eigen::VectorXd>& chains, bool* defined) {
  if (defined) *defined = false;
  const auto seqs = split_in_halves(chains);
  const auto pv = pooled_variance(seqs);
  if (pv.degenerate) return kNaN;
  if (pv.within <= 0.0) {
    // all sequences constant: undefined if they agree, unbounded otherwise
    if (pv.var_plus <= 0.0) return kNaN;
    if (defined) *defined = true;
    return std::numeric_limits<double>::infinity();
  }
  if (defined) *defined = true;
  return std::sqrt(pv.var_plus / pv.within);
}

double effective_sample_size(const std::vector<Eigen::VectorXd>& chains) {
  const auto seqs = split_in_halves(chains);
  const auto pv = pooled_variance(seqs);
  if (pv.degenerate || pv.var_plus <= 0.0 || pv.within <= 0.0) return kNaN;

  const int m = static_cast<int>(seqs.size());
  const long len = seqs.front().size();
  std::vector<Eigen::VectorXd> centered(m);
  for (int j = 0; j < m; ++j) {
    centered[j] = seqs[j].array() - seqs[j].mean();
  }
  // biased autocovariance at lag t, averaged over sequences
  auto mean_acov = [&](long t) {
    double total = 0.0;
    for (int j = 0; j < m; ++j) {
      total += centered[j].head(len - t).dot(centered[j].tail(len - t));
    }
    return total / (static_cast<double>(m) * static_cast<double>(len));
  };

  auto rho = [&](long t) {
    return 1.0 - (pv.within - mean_acov(t)) / pv.var_plus;
  };

  // Geyer initial monotone positive sequence over lag pairs
  // tau = -1 + 2 * sum_k P_k with P_k = rho_{2k} + rho_{2k+1}
  double sum_pairs = 0.0;
  double prev_pair = std::numeric_limits<double>::infinity();
  for (long k = 0; 2 * k + 1 <= len - 1; ++k) {
    const double pair = (k == 0 ? 1.0 : rho(2 * k)) + rho(2 * k + 1);
    if (!(pair > 0.0)) break;
    const double capped = std::min(pair, prev_pair);
    sum_pairs += capped;
    prev_pair = capped;
    if (capped < 1e-12) break;
  }
  const double total = static_cast<double>(m) * static_cast<double>(len);
  const double tau = std::max(-1.0 + 2.0 * sum_pairs, 1e-3);
  return total / tau;
}

std::vector<CoordinateDiagnostics> compute_diagnostics(const Draws& draws) {
  std::vector<CoordinateDiagnostics> out;
  if (draws.chains.empty()) return out;
  const int n_coords = static_cast<int>(draws.chains.front().cols());
  out.reserve(n_coords);
  for (int c = 0; c < n_coords; ++c) {
    CoordinateDiagnostics diag;
    diag.name = c < static_cast<int>(draws.names.size())
                    ? draws.names[c]
                    : "coord." + std::to_string(c + 1);
    std::vector<Eigen::VectorXd> series;
    series.reserve(draws.chains.size());
    for (const auto& chain : draws.chains) series.push_back(chain.col(c));
    diag.rhat = split_rhat(series, &diag.rhat_defined);
    diag.ess = effective_sample_size(series);
    const Eigen::VectorXd pooled = draws.pooled_column(c);
    diag.mean = pooled.mean();
    diag.sd = pooled.size() > 1
                  ? std::sqrt((pooled.array() - diag.mean).square().sum() /
                              (pooled.size() - 1))
                  : 0.0;
    out.push_back(std::move(diag));
  }
  return out;
}

}  // namespace bridgemixed
