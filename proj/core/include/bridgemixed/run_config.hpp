#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bridgemixed/design.hpp"
#include "bridgemixed/model.hpp"
#include "bridgemixed/sampler.hpp"
#include "bridgemixed/simulate.hpp"

namespace bridgemixed {

/// Everything a batch run needs, parsed from a flat `section.key = value`
/// config file. Unknown keys are rejected by name; omitted keys fall back
/// to the defaults below.
struct RunConfig {
  std::string command;  // set from the CLI subcommand; optional in the file

  std::uint64_t seed = 1;
  int threads = 1;

  std::string data_path;
  int data_categories = 0;  // 0 = infer from data
  std::string out_dir = "out";
  std::string fit_dir;                // summarize / ppc input
  std::vector<std::string> fit_dirs;  // compare input

  std::string family = "modified_bridge_bridge";
  double prior_location = 0.0;
  double prior_scale = 5.0;
  double re_prior_scale = 5.0;
  CovariateSpec covariates;

  SamplerConfig sampler;  // seed/threads filled from the fields above

  bool summary_odds = false;

  SimSpec sim;

  /// Model spec for fitting; categories must still be aligned to the data.
  ModelSpec model_spec() const;
  SamplerConfig sampler_config() const;
  SimSpec sim_spec() const;
};

RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& text);

std::string config_to_string(const RunConfig& config);
void write_config(const std::string& path, const RunConfig& config);

/// FNV-1a hash of the canonical config rendering; recorded in run metadata.
std::string config_hash(const RunConfig& config);

bool config_equal(const RunConfig& a, const RunConfig& b);

}  // namespace bridgemixed
