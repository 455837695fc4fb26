#include "bridgemixed/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "bridgemixed/distributions.hpp"

namespace bridgemixed {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(const Eigen::VectorXd& x) {
  const double m = x.maxCoeff();
  if (!std::isfinite(m)) return m;  // all -inf, or an inf dominates
  return m + std::log((x.array() - m).exp().sum());
}

// alpha indices, beta indices aligned to design columns, RE indices aligned
// to dataset key order
struct DrawLayout {
  std::vector<int> alpha;
  std::vector<int> beta;
  std::vector<int> scales;
  std::vector<int> u_star;
  std::vector<int> v;
};

DrawLayout resolve_layout(const Draws& draws, const PanelDataset& ds,
                          const DesignMatrix& design, const ModelSpec& spec) {
  DrawLayout layout;
  auto require = [&draws](const std::string& name) {
    const int idx = draws.index_of(name);
    if (idx < 0) {
      throw std::invalid_argument("draws are missing coordinate '" + name +
                                  "'");
    }
    return idx;
  };
  for (int a = 1; a < spec.categories; ++a) {
    layout.alpha.push_back(require("alpha." + std::to_string(a)));
  }
  for (const auto& col : design.column_names) {
    layout.beta.push_back(require("beta." + col));
  }
  switch (spec.family) {
    case ModelFamily::modified_bridge_bridge:
      layout.scales = {require("phi_u"), require("phi_v")};
      break;
    case ModelFamily::normal_normal:
      layout.scales = {require("sigma_u"), require("sigma_v")};
      break;
    case ModelFamily::two_level_bridge:
      layout.scales = {require("phi_v")};
      break;
    case ModelFamily::fixed:
      break;
  }
  if (family_has_family_effect(spec.family)) {
    for (const auto& key : ds.family_keys()) {
      layout.u_star.push_back(require("u_star." + key));
    }
  }
  if (family_has_individual_effect(spec.family)) {
    for (const auto& key : ds.individual_keys()) {
      layout.v.push_back(require("v." + key));
    }
  }
  return layout;
}

ParameterState state_from_row(const Eigen::MatrixXd& pooled, long row,
                              const DrawLayout& layout) {
  ParameterState st;
  st.alpha.resize(layout.alpha.size());
  for (size_t i = 0; i < layout.alpha.size(); ++i) {
    st.alpha[static_cast<int>(i)] = pooled(row, layout.alpha[i]);
  }
  st.beta.resize(layout.beta.size());
  for (size_t i = 0; i < layout.beta.size(); ++i) {
    st.beta[static_cast<int>(i)] = pooled(row, layout.beta[i]);
  }
  st.re_scale.resize(layout.scales.size());
  for (size_t i = 0; i < layout.scales.size(); ++i) {
    st.re_scale[static_cast<int>(i)] = pooled(row, layout.scales[i]);
  }
  st.u_star.resize(layout.u_star.size());
  for (size_t i = 0; i < layout.u_star.size(); ++i) {
    st.u_star[static_cast<int>(i)] = pooled(row, layout.u_star[i]);
  }
  st.v.resize(layout.v.size());
  for (size_t i = 0; i < layout.v.size(); ++i) {
    st.v[static_cast<int>(i)] = pooled(row, layout.v[i]);
  }
  return st;
}

}  // namespace

double sample_quantile(Eigen::VectorXd values, double prob) {
  if (values.size() == 0) {
    throw std::invalid_argument("sample_quantile: empty sample");
  }
  if (!(prob >= 0.0 && prob <= 1.0)) {
    throw std::invalid_argument("sample_quantile: prob outside [0, 1]");
  }
  std::sort(values.data(), values.data() + values.size());
  const double h = (static_cast<double>(values.size()) - 1.0) * prob;
  const long lo = static_cast<long>(std::floor(h));
  const long hi = std::min<long>(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::vector<SummaryRow> summarize(const Draws& draws, bool odds) {
  if (draws.chains.empty() || draws.total_draws() == 0) {
    throw std::invalid_argument("summarize: no draws");
  }
  std::vector<SummaryRow> rows;
  const int n_coords = static_cast<int>(draws.chains.front().cols());
  for (int c = 0; c < n_coords; ++c) {
    SummaryRow row;
    row.name = draws.names[c];
    const Eigen::VectorXd pooled = draws.pooled_column(c);
    row.mean = pooled.mean();
    row.sd = pooled.size() > 1
                 ? std::sqrt((pooled.array() - row.mean).square().sum() /
                             (pooled.size() - 1))
                 : 0.0;
    row.q025 = sample_quantile(pooled, 0.025);
    row.q975 = sample_quantile(pooled, 0.975);
    if (odds && row.name.rfind("beta", 0) == 0) {
      row.has_odds = true;
      row.odds_pct = (std::exp(row.mean) - 1.0) * 100.0;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Draws marginalize(const Draws& draws, const ModelSpec& spec) {
  if (spec.family == ModelFamily::normal_normal) {
    throw std::invalid_argument(
        "marginalize: no analytic marginalization under Normal random "
        "effects");
  }

  std::vector<int> source_cols;
  Draws out;
  for (size_t c = 0; c < draws.names.size(); ++c) {
    const auto& name = draws.names[c];
    if (name.rfind("alpha.", 0) == 0) {
      out.names.push_back("alpha_m." + name.substr(6));
      source_cols.push_back(static_cast<int>(c));
    } else if (name.rfind("beta.", 0) == 0) {
      out.names.push_back("beta_m." + name.substr(5));
      source_cols.push_back(static_cast<int>(c));
    }
  }

  const int phi_u = draws.index_of("phi_u");
  const int phi_v = draws.index_of("phi_v");
  if (spec.family == ModelFamily::modified_bridge_bridge &&
      (phi_u < 0 || phi_v < 0)) {
    throw std::invalid_argument("marginalize: draws lack phi_u/phi_v");
  }
  if (spec.family == ModelFamily::two_level_bridge && phi_v < 0) {
    throw std::invalid_argument("marginalize: draws lack phi_v");
  }

  out.chains.reserve(draws.chains.size());
  for (const auto& chain : draws.chains) {
    Eigen::MatrixXd scaled(chain.rows(), source_cols.size());
    for (long k = 0; k < chain.rows(); ++k) {
      double factor = 1.0;
      if (spec.family == ModelFamily::modified_bridge_bridge) {
        factor = chain(k, phi_u) * chain(k, phi_v);
      } else if (spec.family == ModelFamily::two_level_bridge) {
        factor = chain(k, phi_v);
      }
      for (size_t j = 0; j < source_cols.size(); ++j) {
        scaled(k, static_cast<long>(j)) = factor * chain(k, source_cols[j]);
      }
    }
    out.chains.push_back(std::move(scaled));
  }
  return out;
}

WaicResult waic(const Eigen::MatrixXd& loglik) {
  const long m = loglik.rows();
  const long n = loglik.cols();
  if (m < 2) {
    throw std::invalid_argument("waic: need at least 2 draws");
  }
  WaicResult result;
  for (long i = 0; i < n; ++i) {
    const Eigen::VectorXd col = loglik.col(i);
    result.lppd += log_sum_exp(col) - std::log(static_cast<double>(m));
    const double mean = col.mean();
    result.p_eff +=
        (col.array() - mean).square().sum() / static_cast<double>(m - 1);
  }
  result.waic = -2.0 * (result.lppd - result.p_eff);
  return result;
}

LpmlResult lpml(const Eigen::MatrixXd& loglik) {
  const long m = loglik.rows();
  const long n = loglik.cols();
  if (m < 1) {
    throw std::invalid_argument("lpml: need at least 1 draw");
  }
  LpmlResult result;
  result.log_cpo.resize(n);
  for (long i = 0; i < n; ++i) {
    // harmonic mean in log space: log CPO = log M - LSE(-loglik)
    const Eigen::VectorXd neg = -loglik.col(i);
    const double lse = log_sum_exp(neg);
    double log_cpo;
    if (!std::isfinite(lse)) {
      log_cpo = kNegInf;
      result.degenerate_observations.push_back(static_cast<int>(i));
    } else {
      log_cpo = std::log(static_cast<double>(m)) - lse;
    }
    result.log_cpo[i] = log_cpo;
    result.lpml += log_cpo;
  }
  return result;
}

Eigen::MatrixXd pointwise_loglik(const Draws& draws, const PanelDataset& ds,
                                 const DesignMatrix& design,
                                 const ModelSpec& spec) {
  const DrawLayout layout = resolve_layout(draws, ds, design, spec);
  const Eigen::MatrixXd pooled = draws.pooled();
  const long m = pooled.rows();
  const int n = ds.n_records();

  Eigen::MatrixXd out(m, n);
  for (long l = 0; l < m; ++l) {
    const ParameterState st = state_from_row(pooled, l, layout);
    for (int r = 0; r < n; ++r) {
      out(l, r) = record_loglik(ds, design, spec, st, r);
    }
  }
  return out;
}

PpcTable ppc_from_replicates(const std::vector<int>& observed,
                             const Eigen::MatrixXi& replicates,
                             int categories) {
  const long m = replicates.rows();
  const long n = replicates.cols();
  if (n != static_cast<long>(observed.size())) {
    throw std::invalid_argument("ppc: replicate/observation mismatch");
  }
  const int n_codes = 2 * (categories - 1) + 1;
  const int offset = categories - 1;

  PpcTable table;
  table.codes.resize(n_codes);
  for (int k = 0; k < n_codes; ++k) table.codes[k] = k - offset;
  std::vector<double> sum(n_codes, 0.0);
  std::vector<double> sum_sq(n_codes, 0.0);

  std::vector<long> counts(n_codes);
  for (long l = 0; l < m; ++l) {
    std::fill(counts.begin(), counts.end(), 0);
    for (long r = 0; r < n; ++r) {
      const int code = observed[r] - replicates(l, r);
      counts[code + offset] += 1;
    }
    for (int k = 0; k < n_codes; ++k) {
      const double pct =
          100.0 * static_cast<double>(counts[k]) / static_cast<double>(n);
      sum[k] += pct;
      sum_sq[k] += pct * pct;
    }
  }
  table.mean_pct.resize(n_codes);
  table.sd_pct.resize(n_codes);
  for (int k = 0; k < n_codes; ++k) {
    const double mean = sum[k] / static_cast<double>(m);
    table.mean_pct[k] = mean;
    const double var =
        m > 1 ? (sum_sq[k] - static_cast<double>(m) * mean * mean) /
                    static_cast<double>(m - 1)
              : 0.0;
    table.sd_pct[k] = std::sqrt(std::max(0.0, var));
  }
  return table;
}

PpcTable ppc(const Draws& draws, const PanelDataset& ds,
             const DesignMatrix& design, const ModelSpec& spec, Rng& rng) {
  const DrawLayout layout = resolve_layout(draws, ds, design, spec);
  const Eigen::MatrixXd pooled = draws.pooled();
  const long m = pooled.rows();
  const int n = ds.n_records();

  Eigen::MatrixXi replicates(m, n);
  for (long l = 0; l < m; ++l) {
    const ParameterState st = state_from_row(pooled, l, layout);
    for (int r = 0; r < n; ++r) {
      const double eta = design.rows.row(r).dot(st.beta);
      const double b = record_random_effect(spec, st, ds.record_family(r),
                                            ds.record_individual(r));
      const double u = rng.uniform();
      int category = spec.categories;
      for (int a = 0; a < st.alpha.size(); ++a) {
        if (u <= expit(st.alpha[a] - eta - b)) {
          category = a + 1;
          break;
        }
      }
      replicates(l, r) = category;
    }
  }
  std::vector<int> observed(n);
  for (int r = 0; r < n; ++r) observed[r] = ds.record(r).outcome;
  return ppc_from_replicates(observed, replicates, spec.categories);
}

}  // namespace bridgemixed
