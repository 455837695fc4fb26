#pragma once

#include <string>
#include <vector>

#include "bridgemixed/design.hpp"
#include "bridgemixed/diagnostics.hpp"
#include "bridgemixed/model.hpp"
#include "bridgemixed/run_config.hpp"
#include "bridgemixed/sampler.hpp"

namespace bridgemixed {

inline constexpr const char* kVersion = "0.1.0";

/// Files written by `fit`: one draws CSV per chain (full precision,
/// constrained coordinates plus sampler stats), a diagnostics CSV and a
/// meta.json describing how to rebuild the model. Timestamps and wall time
/// live only in meta.json.
void write_fit(const std::string& dir, const RunConfig& config,
               const PosteriorDraws& draws,
               const std::vector<CoordinateDiagnostics>& diagnostics,
               double wall_seconds);

/// A fit reloaded from disk: enough to summarize, compare and replicate.
struct FitArtifacts {
  Draws draws;
  std::string data_path;
  int categories = 0;
  ModelFamily family = ModelFamily::modified_bridge_bridge;
  CovariateSpec covariates;
  double prior_location = 0.0;
  double prior_scale = 5.0;
  double re_prior_scale = 5.0;
  std::uint64_t seed = 0;

  ModelSpec model_spec() const;
};

FitArtifacts load_fit(const std::string& dir);

/// Small run-metadata file shared by all commands.
void write_run_meta(const std::string& dir, const RunConfig& config,
                    double wall_seconds,
                    const std::vector<std::pair<std::string, std::string>>&
                        extra = {});

}  // namespace bridgemixed
