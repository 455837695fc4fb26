#include "bridgemixed/simulate.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "bridgemixed/csv.hpp"
#include "bridgemixed/distributions.hpp"

namespace bridgemixed {

SimSpec::SimSpec() {
  alpha.resize(2);
  alpha << -1.0, 1.0;
  beta.resize(3);
  beta << 0.6, -0.4, 0.3;
}

void SimSpec::validate() const {
  if (n_families < 1) {
    throw std::invalid_argument("sim: need at least one family");
  }
  if (min_individuals < 1 || max_individuals < min_individuals) {
    throw std::invalid_argument("sim: bad individuals-per-family range");
  }
  if (waves.empty()) throw std::invalid_argument("sim: wave list empty");
  if (alpha.size() < 1) throw std::invalid_argument("sim: need thresholds");
  for (int a = 1; a < alpha.size(); ++a) {
    if (!(alpha[a] > alpha[a - 1])) {
      throw std::invalid_argument("sim: thresholds not increasing");
    }
  }
  if (beta.size() != design_columns()) {
    throw std::invalid_argument(
        "sim: beta length does not match generated design columns (" +
        std::to_string(design_columns()) + ")");
  }
  // empty entry/retention lists mean a complete panel (no missingness)
  if (!entry_probs.empty()) {
    if (entry_probs.size() != waves.size()) {
      throw std::invalid_argument("sim: entry_probs must match waves");
    }
    double total_entry = 0.0;
    for (double p : entry_probs) {
      if (p < 0.0 || p > 1.0) {
        throw std::invalid_argument("sim: entry probability outside [0, 1]");
      }
      total_entry += p;
    }
    if (std::abs(total_entry - 1.0) > 1e-9) {
      throw std::invalid_argument("sim: entry probabilities must sum to 1");
    }
  }
  if (!retention.empty()) {
    if (retention.size() != waves.size()) {
      throw std::invalid_argument("sim: retention must match waves");
    }
    for (double p : retention) {
      if (p < 0.0 || p > 1.0) {
        throw std::invalid_argument("sim: retention outside [0, 1]");
      }
    }
  }
  if (intermittent_skip < 0.0 || intermittent_skip >= 1.0) {
    throw std::invalid_argument("sim: intermittent_skip outside [0, 1)");
  }
  if (family == ModelFamily::modified_bridge_bridge ||
      family == ModelFamily::two_level_bridge) {
    if (!(phi_v > 0.0 && phi_v < 1.0)) {
      throw std::invalid_argument("sim: phi_v outside (0, 1)");
    }
  }
  if (family == ModelFamily::modified_bridge_bridge &&
      !(phi_u > 0.0 && phi_u < 1.0)) {
    throw std::invalid_argument("sim: phi_u outside (0, 1)");
  }
  if (family == ModelFamily::normal_normal &&
      (!(sigma_u > 0.0) || !(sigma_v > 0.0))) {
    throw std::invalid_argument("sim: sigma parameters must be positive");
  }
}

CovariateSpec simulated_covariate_spec(const SimSpec& spec) {
  CovariateSpec cov;
  for (int j = 1; j <= spec.n_continuous; ++j) {
    CovariateEntry entry;
    entry.name = "x" + std::to_string(j);
    entry.use = CovariateUse::numeric;
    cov.entries.push_back(entry);
  }
  if (spec.categorical_levels > 0) {
    CovariateEntry entry;
    entry.name = "group";
    entry.use = CovariateUse::categorical;
    entry.reference = "L1";
    cov.entries.push_back(entry);
  }
  return cov;
}

SimResult simulate_dataset(const SimSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);

  const int n_cont = spec.n_continuous;
  const int n_levels = spec.categorical_levels;
  const bool has_u = family_has_family_effect(spec.family);
  const bool has_v = family_has_individual_effect(spec.family);

  SimTruth truth;
  truth.family = spec.family;
  truth.alpha = spec.alpha;
  truth.beta = spec.beta;
  switch (spec.family) {
    case ModelFamily::modified_bridge_bridge:
      truth.re_scale.resize(2);
      truth.re_scale << spec.phi_u, spec.phi_v;
      break;
    case ModelFamily::normal_normal:
      truth.re_scale.resize(2);
      truth.re_scale << spec.sigma_u, spec.sigma_v;
      break;
    case ModelFamily::two_level_bridge:
      truth.re_scale.resize(1);
      truth.re_scale << spec.phi_v;
      break;
    case ModelFamily::fixed:
      break;
  }

  std::vector<PanelRecord> records;
  std::vector<CovariateColumn> covariates(n_cont + (n_levels > 0 ? 1 : 0));
  for (int j = 0; j < n_cont; ++j) {
    covariates[j].name = "x" + std::to_string(j + 1);
  }
  if (n_levels > 0) covariates[n_cont].name = "group";

  // divisor on u_star in B = u_star/e + v
  double e = 1.0;
  if (spec.family == ModelFamily::modified_bridge_bridge) e = spec.phi_v;

  std::vector<double> u_by_family;
  std::vector<double> v_by_individual;
  int individual_counter = 0;
  for (int f = 0; f < spec.n_families; ++f) {
    char fam_key[16];
    std::snprintf(fam_key, sizeof(fam_key), "F%05d", f + 1);
    double u_star = 0.0;
    if (has_u) {
      u_star = spec.family == ModelFamily::modified_bridge_bridge
                   ? bridge_sample(rng, BridgeParam(spec.phi_u), 1)[0]
                   : rng.normal() * spec.sigma_u;
      truth.family_keys.push_back(fam_key);
      u_by_family.push_back(u_star);
    }

    const int members =
        spec.min_individuals +
        static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(
            spec.max_individuals - spec.min_individuals + 1)));
    for (int j = 0; j < members; ++j) {
      char ind_key[16];
      std::snprintf(ind_key, sizeof(ind_key), "I%06d",
                    ++individual_counter);
      double v = 0.0;
      if (has_v) {
        v = spec.family == ModelFamily::normal_normal
                ? rng.normal() * spec.sigma_v
                : bridge_sample(rng, BridgeParam(spec.phi_v), 1)[0];
        truth.individual_keys.push_back(ind_key);
      }
      const double b = (has_u ? u_star / e : 0.0) + (has_v ? v : 0.0);
      if (has_v) v_by_individual.push_back(v);

      // the categorical covariate is an individual-level trait
      int level = 0;
      if (n_levels > 0) {
        level = static_cast<int>(
            rng.uniform_int(static_cast<std::uint64_t>(n_levels)));
      }

      for (long wave : spec.waves) {
        PanelRecord rec;
        rec.family_id = fam_key;
        rec.individual_id = ind_key;
        rec.wave = wave;

        double eta = 0.0;
        for (int k = 0; k < n_cont; ++k) {
          const double x = rng.normal();
          covariates[k].raw.push_back(format_full(x));
          eta += spec.beta[k] * x;
        }
        if (n_levels > 0) {
          covariates[n_cont].raw.push_back("L" + std::to_string(level + 1));
          if (level > 0) eta += spec.beta[n_cont + level - 1];
        }

        const double uu = rng.uniform();
        int outcome = spec.categories();
        for (int a = 0; a < spec.alpha.size(); ++a) {
          if (uu <= expit(spec.alpha[a] - eta - b)) {
            outcome = a + 1;
            break;
          }
        }
        rec.outcome = outcome;
        records.push_back(std::move(rec));
      }
    }
  }
  if (has_u) {
    truth.u_star = Eigen::Map<const Eigen::VectorXd>(
        u_by_family.data(), static_cast<long>(u_by_family.size()));
  }
  if (has_v) {
    truth.v = Eigen::Map<const Eigen::VectorXd>(
        v_by_individual.data(), static_cast<long>(v_by_individual.size()));
  }

  for (auto& col : covariates) {
    col.numeric_capable = true;
    for (const auto& cell : col.raw) {
      double parsed = 0.0;
      if (!parse_double(cell, &parsed)) {
        col.numeric_capable = false;
        col.numeric.clear();
        break;
      }
      col.numeric.push_back(parsed);
    }
  }

  PanelDataset ds(std::move(records), std::move(covariates),
                  spec.categories());
  truth.beta_names =
      build_design(ds, simulated_covariate_spec(spec)).column_names;
  return SimResult{std::move(ds), std::move(truth)};
}

PanelDataset apply_missingness(const PanelDataset& ds, const SimSpec& spec,
                               Rng& rng) {
  const auto waves = spec.waves;
  const std::vector<double> entry_probs =
      spec.entry_probs.empty()
          ? [&] {
              std::vector<double> p(waves.size(), 0.0);
              p[0] = 1.0;
              return p;
            }()
          : spec.entry_probs;
  const std::vector<double> retention =
      spec.retention.empty() ? std::vector<double>(waves.size(), 1.0)
                             : spec.retention;
  std::vector<char> keep(ds.n_records(), 0);

  for (int i = 0; i < ds.n_individuals(); ++i) {
    // entry wave index
    double u = rng.uniform();
    size_t entry = waves.size() - 1;
    double acc = 0.0;
    for (size_t w = 0; w < waves.size(); ++w) {
      acc += entry_probs[w];
      if (u <= acc) {
        entry = w;
        break;
      }
    }
    // wave-on-wave retention after entry, with optional intermittent skips
    std::vector<char> present(waves.size(), 0);
    present[entry] = 1;
    bool enrolled = true;
    for (size_t w = entry + 1; w < waves.size(); ++w) {
      if (enrolled && rng.uniform() > retention[w]) enrolled = false;
      if (!enrolled) continue;
      present[w] = rng.uniform() > spec.intermittent_skip ? 1 : 0;
    }
    for (int r : ds.individual_records(i)) {
      for (size_t w = 0; w < waves.size(); ++w) {
        if (ds.record(r).wave == waves[w] && present[w]) keep[r] = 1;
      }
    }
  }

  std::vector<PanelRecord> records;
  std::vector<CovariateColumn> covariates;
  for (const auto& col : ds.covariates()) {
    CovariateColumn out;
    out.name = col.name;
    out.numeric_capable = col.numeric_capable;
    covariates.push_back(std::move(out));
  }
  for (int r = 0; r < ds.n_records(); ++r) {
    if (!keep[r]) continue;
    records.push_back(ds.record(r));
    for (size_t c = 0; c < covariates.size(); ++c) {
      covariates[c].raw.push_back(ds.covariates()[c].raw[r]);
      if (ds.covariates()[c].numeric_capable) {
        covariates[c].numeric.push_back(ds.covariates()[c].numeric[r]);
      }
    }
  }
  return PanelDataset(std::move(records), std::move(covariates),
                      ds.categories());
}

}  // namespace bridgemixed
