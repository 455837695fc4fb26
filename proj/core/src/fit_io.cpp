#include "bridgemixed/fit_io.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "bridgemixed/csv.hpp"

namespace bridgemixed {

namespace {

using nlohmann::json;

std::string timestamp_utc() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm_utc{};
  gmtime_r(&t, &tm_utc);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

json covariates_to_json(const CovariateSpec& spec) {
  json out = json::array();
  for (const auto& entry : spec.entries) {
    json e;
    e["name"] = entry.name;
    e["use"] =
        entry.use == CovariateUse::categorical ? "categorical" : "numeric";
    e["log1p"] = entry.transform == CovariateTransform::log1p;
    e["reference"] = entry.reference;
    out.push_back(e);
  }
  return out;
}

CovariateSpec covariates_from_json(const json& arr) {
  CovariateSpec spec;
  for (const auto& e : arr) {
    CovariateEntry entry;
    entry.name = e.at("name").get<std::string>();
    entry.use = e.at("use").get<std::string>() == "categorical"
                    ? CovariateUse::categorical
                    : CovariateUse::numeric;
    entry.transform = e.at("log1p").get<bool>() ? CovariateTransform::log1p
                                                : CovariateTransform::none;
    entry.reference = e.at("reference").get<std::string>();
    spec.entries.push_back(std::move(entry));
  }
  return spec;
}

}  // namespace

ModelSpec FitArtifacts::model_spec() const {
  ModelSpec spec;
  spec.family = family;
  spec.categories = categories;
  spec.covariates = covariates;
  spec.prior_location = prior_location;
  spec.prior_scale = prior_scale;
  spec.re_prior_scale = re_prior_scale;
  return spec;
}

void write_fit(const std::string& dir, const RunConfig& config,
               const PosteriorDraws& draws,
               const std::vector<CoordinateDiagnostics>& diagnostics,
               double wall_seconds) {
  std::filesystem::create_directories(dir);

  const auto& names = draws.constrained.names;
  for (int c = 0; c < draws.constrained.n_chains(); ++c) {
    std::ofstream out(dir + "/chain_" + std::to_string(c + 1) + ".csv");
    if (!out) throw std::runtime_error("cannot write draws in " + dir);
    out << "iteration";
    for (const auto& name : names) out << "," << name;
    out << ",step_size,tree_depth,divergent,accept_stat,energy,n_leapfrog\n";
    const auto& chain = draws.constrained.chains[c];
    const auto& stats = draws.stats[c];
    for (long k = 0; k < chain.rows(); ++k) {
      out << (k + 1);
      for (long j = 0; j < chain.cols(); ++j) {
        out << "," << format_full(chain(k, j));
      }
      const auto& s = stats[static_cast<size_t>(k)];
      out << "," << format_full(s.step_size) << "," << s.tree_depth << ","
          << (s.divergent ? 1 : 0) << "," << format_full(s.accept_stat) << ","
          << format_full(s.energy) << "," << s.n_leapfrog << "\n";
    }
  }

  {
    std::ofstream out(dir + "/diagnostics.csv");
    if (!out) throw std::runtime_error("cannot write diagnostics in " + dir);
    out << "name,rhat,rhat_defined,ess,mean,sd\n";
    for (const auto& d : diagnostics) {
      out << d.name << "," << format_full(d.rhat) << ","
          << (d.rhat_defined ? 1 : 0) << "," << format_full(d.ess) << ","
          << format_full(d.mean) << "," << format_full(d.sd) << "\n";
    }
  }

  json meta;
  meta["version"] = kVersion;
  meta["command"] = "fit";
  meta["seed"] = config.seed;
  meta["config_hash"] = config_hash(config);
  meta["data_path"] = config.data_path;
  meta["categories"] = config.data_categories;
  meta["family"] = config.family;
  meta["prior_location"] = config.prior_location;
  meta["prior_scale"] = config.prior_scale;
  meta["re_prior_scale"] = config.re_prior_scale;
  meta["covariates"] = covariates_to_json(config.covariates);
  meta["chains"] = draws.config.chains;
  meta["iterations"] = draws.config.iterations;
  meta["warmup_fraction"] = draws.config.warmup_fraction;
  meta["target_accept"] = draws.config.target_accept;
  meta["max_tree_depth"] = draws.config.max_tree_depth;
  meta["wall_time_seconds"] = wall_seconds;
  meta["created"] = timestamp_utc();
  std::ofstream out(dir + "/meta.json");
  if (!out) throw std::runtime_error("cannot write meta.json in " + dir);
  out << meta.dump(2) << "\n";
}

FitArtifacts load_fit(const std::string& dir) {
  std::ifstream meta_in(dir + "/meta.json");
  if (!meta_in) {
    throw std::runtime_error("no meta.json in fit directory '" + dir + "'");
  }
  json meta = json::parse(meta_in);

  FitArtifacts fit;
  fit.data_path = meta.at("data_path").get<std::string>();
  fit.categories = meta.at("categories").get<int>();
  fit.family = family_from_name(meta.at("family").get<std::string>());
  fit.covariates = covariates_from_json(meta.at("covariates"));
  fit.prior_location = meta.at("prior_location").get<double>();
  fit.prior_scale = meta.at("prior_scale").get<double>();
  fit.re_prior_scale = meta.at("re_prior_scale").get<double>();
  fit.seed = meta.at("seed").get<std::uint64_t>();

  const int chains = meta.at("chains").get<int>();
  constexpr int kStatsColumns = 6;
  for (int c = 0; c < chains; ++c) {
    const CsvTable table =
        read_csv(dir + "/chain_" + std::to_string(c + 1) + ".csv");
    const int n_cols = static_cast<int>(table.header.size());
    const int n_coords = n_cols - 1 - kStatsColumns;
    if (n_coords < 1) {
      throw std::runtime_error("malformed draws file in '" + dir + "'");
    }
    if (c == 0) {
      fit.draws.names.assign(table.header.begin() + 1,
                             table.header.begin() + 1 + n_coords);
    }
    Eigen::MatrixXd chain(table.rows.size(), n_coords);
    for (size_t r = 0; r < table.rows.size(); ++r) {
      for (int j = 0; j < n_coords; ++j) {
        double v = 0.0;
        if (!parse_double(table.rows[r][1 + j], &v)) {
          throw std::runtime_error("bad numeric cell in draws file of '" +
                                   dir + "'");
        }
        chain(static_cast<long>(r), j) = v;
      }
    }
    fit.draws.chains.push_back(std::move(chain));
  }
  return fit;
}

void write_run_meta(
    const std::string& dir, const RunConfig& config, double wall_seconds,
    const std::vector<std::pair<std::string, std::string>>& extra) {
  std::filesystem::create_directories(dir);
  json meta;
  meta["version"] = kVersion;
  meta["command"] = config.command;
  meta["seed"] = config.seed;
  meta["config_hash"] = config_hash(config);
  meta["wall_time_seconds"] = wall_seconds;
  meta["created"] = timestamp_utc();
  for (const auto& [key, value] : extra) meta[key] = value;
  std::ofstream out(dir + "/meta.json");
  if (!out) throw std::runtime_error("cannot write meta.json in " + dir);
  out << meta.dump(2) << "\n";
}

}  // namespace bridgemixed
