#include "bridgemixed/commands.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "bridgemixed/csv.hpp"
#include "bridgemixed/diagnostics.hpp"
#include "bridgemixed/fit_io.hpp"
#include "bridgemixed/inference.hpp"
#include "bridgemixed/posterior.hpp"
#include "bridgemixed/simulate.hpp"

namespace bridgemixed {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ =
      std::chrono::steady_clock::now();
};

[[noreturn]] void fail(const std::string& category,
                       const std::string& message) {
  throw CommandError(category, message);
}

PanelDataset load_data_or_fail(const std::string& path, int categories) {
  if (path.empty()) fail("config", "data.path is required");
  LoadSchema schema;
  schema.categories = categories;
  try {
    return load_dataset(path, schema);
  } catch (const std::exception& err) {
    fail("data", err.what());
  }
}

bool structural_name(const std::string& name) {
  return name.rfind("u_star.", 0) != 0 && name.rfind("v.", 0) != 0;
}

void write_summary_tables(const std::string& csv_path,
                          const std::string& txt_path,
                          const std::vector<SummaryRow>& rows,
                          const std::string& footnote = "") {
  std::ofstream csv(csv_path);
  if (!csv) fail("io", "cannot write " + csv_path);
  const bool odds = std::any_of(rows.begin(), rows.end(),
                                [](const SummaryRow& r) { return r.has_odds; });
  csv << "name,mean,sd,q2.5,q97.5";
  if (odds) csv << ",odds_change_pct";
  csv << "\n";
  for (const auto& row : rows) {
    csv << row.name << "," << format_full(row.mean) << ","
        << format_full(row.sd) << "," << format_full(row.q025) << ","
        << format_full(row.q975);
    if (odds) csv << "," << (row.has_odds ? format_full(row.odds_pct) : "");
    csv << "\n";
  }

  std::ofstream txt(txt_path);
  if (!txt) fail("io", "cannot write " + txt_path);
  txt << std::left << std::setw(28) << "parameter" << std::right
      << std::setw(12) << "mean" << std::setw(12) << "sd" << std::setw(12)
      << "2.5%" << std::setw(12) << "97.5%";
  if (odds) txt << std::setw(14) << "odds chg %";
  txt << "\n";
  for (const auto& row : rows) {
    txt << std::left << std::setw(28) << row.name << std::right
        << std::setw(12) << format_table(row.mean) << std::setw(12)
        << format_table(row.sd) << std::setw(12) << format_table(row.q025)
        << std::setw(12) << format_table(row.q975);
    if (odds) {
      txt << std::setw(14)
          << (row.has_odds ? format_table(row.odds_pct) : "");
    }
    txt << "\n";
  }
  if (!footnote.empty()) txt << "\n" << footnote << "\n";
}

Draws structural_only(const Draws& draws) {
  Draws out;
  std::vector<int> cols;
  for (size_t c = 0; c < draws.names.size(); ++c) {
    if (structural_name(draws.names[c])) {
      out.names.push_back(draws.names[c]);
      cols.push_back(static_cast<int>(c));
    }
  }
  for (const auto& chain : draws.chains) {
    Eigen::MatrixXd sub(chain.rows(), cols.size());
    for (size_t j = 0; j < cols.size(); ++j) {
      sub.col(static_cast<long>(j)) = chain.col(cols[j]);
    }
    out.chains.push_back(std::move(sub));
  }
  return out;
}

}  // namespace

int CommandError::exit_code() const {
  if (category_ == "config") return 2;
  if (category_ == "io") return 3;
  if (category_ == "data") return 4;
  if (category_ == "model") return 5;
  return 1;
}

void cmd_simulate(const RunConfig& config) {
  Stopwatch timer;
  SimSpec spec = config.sim_spec();
  try {
    spec.validate();
  } catch (const std::exception& err) {
    fail("config", err.what());
  }

  const SimResult complete = simulate_dataset(spec);
  Rng missing_rng = Rng(spec.seed).fork(0x5157);
  const PanelDataset observed =
      apply_missingness(complete.dataset, spec, missing_rng);

  fs::create_directories(config.out_dir);
  write_dataset(config.out_dir + "/panel.csv", observed);

  json truth;
  truth["family"] = family_name(complete.truth.family);
  truth["alpha"] = std::vector<double>(
      complete.truth.alpha.data(),
      complete.truth.alpha.data() + complete.truth.alpha.size());
  truth["beta"] = std::vector<double>(
      complete.truth.beta.data(),
      complete.truth.beta.data() + complete.truth.beta.size());
  truth["beta_names"] = complete.truth.beta_names;
  truth["re_scale"] = std::vector<double>(
      complete.truth.re_scale.data(),
      complete.truth.re_scale.data() + complete.truth.re_scale.size());
  json u = json::object();
  for (size_t f = 0; f < complete.truth.family_keys.size(); ++f) {
    u[complete.truth.family_keys[f]] = complete.truth.u_star[f];
  }
  truth["u_star"] = u;
  json v = json::object();
  for (size_t i = 0; i < complete.truth.individual_keys.size(); ++i) {
    v[complete.truth.individual_keys[i]] = complete.truth.v[i];
  }
  truth["v"] = v;
  std::ofstream truth_out(config.out_dir + "/truth.json");
  if (!truth_out) fail("io", "cannot write truth.json");
  truth_out << truth.dump(2) << "\n";

  write_run_meta(config.out_dir, config, timer.seconds(),
                 {{"records", std::to_string(observed.n_records())},
                  {"families", std::to_string(observed.n_families())},
                  {"individuals", std::to_string(observed.n_individuals())}});
}

void cmd_fit(const RunConfig& config) {
  Stopwatch timer;
  const PanelDataset ds =
      load_data_or_fail(config.data_path, config.data_categories);

  ModelSpec spec = config.model_spec();
  spec.categories = ds.categories();
  if (spec.covariates.entries.empty()) {
    fail("config", "fit needs at least one covariates.<name> entry");
  }

  DesignMatrix design;
  try {
    design = build_design(ds, spec.covariates);
  } catch (const std::exception& err) {
    fail("model", err.what());
  }

  std::unique_ptr<PosteriorTarget> target;
  try {
    target = std::make_unique<PosteriorTarget>(ds, design, spec);
  } catch (const std::exception& err) {
    fail("model", err.what());
  }

  PosteriorDraws draws;
  try {
    draws = run_chains(*target, config.sampler_config());
  } catch (const std::exception& err) {
    fail("run", err.what());
  }

  const auto diag = compute_diagnostics(draws.constrained);

  RunConfig resolved = config;
  resolved.data_categories = ds.categories();
  write_fit(config.out_dir, resolved, draws, diag, timer.seconds());
}

void cmd_summarize(const RunConfig& config) {
  Stopwatch timer;
  if (config.fit_dir.empty()) fail("config", "summarize needs fit.dir");
  FitArtifacts fit;
  try {
    fit = load_fit(config.fit_dir);
  } catch (const std::exception& err) {
    fail("io", err.what());
  }

  fs::create_directories(config.out_dir);
  const Draws structural = structural_only(fit.draws);
  write_summary_tables(config.out_dir + "/conditional_summary.csv",
                       config.out_dir + "/conditional_summary.txt",
                       summarize(structural, config.summary_odds));

  if (fit.family == ModelFamily::normal_normal) {
    std::ofstream note(config.out_dir + "/marginal_summary.txt");
    note << "marginal summaries are not available under normal_normal "
            "random effects (no analytic marginalization)\n";
  } else {
    const Draws marginal = marginalize(structural, fit.model_spec());
    write_summary_tables(
        config.out_dir + "/marginal_summary.csv",
        config.out_dir + "/marginal_summary.txt",
        summarize(marginal, config.summary_odds),
        "note: alpha_m.* rows use the same scaling as the coefficients and "
        "are not externally validated");
  }

  write_run_meta(config.out_dir, config, timer.seconds(),
                 {{"fit_dir", config.fit_dir}});
}

void cmd_compare(const RunConfig& config) {
  Stopwatch timer;
  if (config.fit_dirs.empty()) {
    fail("config", "compare needs fit.dirs (comma separated)");
  }

  struct Row {
    std::string dir;
    std::string family;
    WaicResult waic;
    double lpml = 0.0;
  };
  std::vector<Row> rows;
  for (const auto& dir : config.fit_dirs) {
    FitArtifacts fit;
    try {
      fit = load_fit(dir);
    } catch (const std::exception& err) {
      fail("io", err.what());
    }
    const PanelDataset ds = load_data_or_fail(fit.data_path, fit.categories);
    const ModelSpec spec = fit.model_spec();
    DesignMatrix design;
    try {
      design = build_design(ds, spec.covariates);
    } catch (const std::exception& err) {
      fail("model", err.what());
    }
    const Eigen::MatrixXd loglik =
        pointwise_loglik(fit.draws, ds, design, spec);
    Row row;
    row.dir = dir;
    row.family = family_name(fit.family);
    row.waic = waic(loglik);
    row.lpml = lpml(loglik).lpml;
    rows.push_back(std::move(row));
  }

  fs::create_directories(config.out_dir);
  {
    std::ofstream csv(config.out_dir + "/comparison.csv");
    if (!csv) fail("io", "cannot write comparison.csv");
    csv << "fit,family,waic,lppd,p_eff,lpml\n";
    for (const auto& row : rows) {
      csv << row.dir << "," << row.family << ","
          << format_full(row.waic.waic) << "," << format_full(row.waic.lppd)
          << "," << format_full(row.waic.p_eff) << ","
          << format_full(row.lpml) << "\n";
    }
  }
  {
    std::ofstream txt(config.out_dir + "/comparison.txt");
    txt << std::left << std::setw(26) << "family" << std::right
        << std::setw(14) << "WAIC" << std::setw(14) << "LPML" << "\n";
    for (const auto& row : rows) {
      txt << std::left << std::setw(26) << row.family << std::right
          << std::setw(14) << format_table(row.waic.waic) << std::setw(14)
          << format_table(row.lpml) << "\n";
    }
  }
  write_run_meta(config.out_dir, config, timer.seconds());
}

void cmd_ppc(const RunConfig& config) {
  Stopwatch timer;
  if (config.fit_dir.empty()) fail("config", "ppc needs fit.dir");
  FitArtifacts fit;
  try {
    fit = load_fit(config.fit_dir);
  } catch (const std::exception& err) {
    fail("io", err.what());
  }
  const PanelDataset ds = load_data_or_fail(fit.data_path, fit.categories);
  const ModelSpec spec = fit.model_spec();
  DesignMatrix design;
  try {
    design = build_design(ds, spec.covariates);
  } catch (const std::exception& err) {
    fail("model", err.what());
  }

  Rng rng(config.seed);
  const PpcTable table = ppc(fit.draws, ds, design, spec, rng);

  fs::create_directories(config.out_dir);
  {
    std::ofstream csv(config.out_dir + "/ppc.csv");
    if (!csv) fail("io", "cannot write ppc.csv");
    csv << "code,mean_pct,sd_pct\n";
    for (size_t k = 0; k < table.codes.size(); ++k) {
      csv << table.codes[k] << "," << format_full(table.mean_pct[k]) << ","
          << format_full(table.sd_pct[k]) << "\n";
    }
  }
  {
    std::ofstream txt(config.out_dir + "/ppc.txt");
    txt << std::left << std::setw(8) << "code" << std::right << std::setw(12)
        << "mean %" << std::setw(12) << "sd %" << "\n";
    for (size_t k = 0; k < table.codes.size(); ++k) {
      txt << std::left << std::setw(8) << table.codes[k] << std::right
          << std::setw(12) << format_table(table.mean_pct[k]) << std::setw(12)
          << format_table(table.sd_pct[k]) << "\n";
    }
  }
  write_run_meta(config.out_dir, config, timer.seconds(),
                 {{"fit_dir", config.fit_dir}});
}

void cmd_patterns(const RunConfig& config) {
  Stopwatch timer;
  const PanelDataset ds =
      load_data_or_fail(config.data_path, config.data_categories);
  const auto waves = ds.waves();
  const auto rows = pattern_table(ds, waves);

  fs::create_directories(config.out_dir);
  {
    std::ofstream csv(config.out_dir + "/patterns.csv");
    if (!csv) fail("io", "cannot write patterns.csv");
    csv << pattern_table_to_csv(rows, waves);
  }
  {
    std::ofstream txt(config.out_dir + "/validation.txt");
    if (!txt) fail("io", "cannot write validation.txt");
    txt << validate(ds).to_text();
  }
  write_run_meta(config.out_dir, config, timer.seconds(),
                 {{"records", std::to_string(ds.n_records())}});
}

void dispatch(const RunConfig& config) {
  const std::string& cmd = config.command;
  if (cmd == "simulate") return cmd_simulate(config);
  if (cmd == "fit") return cmd_fit(config);
  if (cmd == "summarize") return cmd_summarize(config);
  if (cmd == "compare") return cmd_compare(config);
  if (cmd == "ppc") return cmd_ppc(config);
  if (cmd == "patterns") return cmd_patterns(config);
  fail("config", "unknown command '" + cmd + "'");
}

}  // namespace bridgemixed
