#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "bridgemixed/panel_data.hpp"

namespace bridgemixed {

enum class CovariateUse { numeric, categorical };
enum class CovariateTransform { none, log1p };

struct CovariateEntry {
  std::string name;
  CovariateUse use = CovariateUse::numeric;
  CovariateTransform transform = CovariateTransform::none;  // numeric only
  std::string reference;  // categorical only; must name an observed level
};

struct CovariateSpec {
  std::vector<CovariateEntry> entries;
};

struct DesignMatrix {
  Eigen::MatrixXd rows;  // N x p, aligned to dataset record order
  std::vector<std::string> column_names;
  std::vector<int> log_columns;  // columns carrying the log(x+1) transform
};

/// Expand covariates into an N x p design. Categorical covariates become
/// reference-coded indicators over their observed levels (sorted); numeric
/// covariates may request the log(x+1) transform, which rejects negative
/// inputs.
DesignMatrix build_design(const PanelDataset& ds, const CovariateSpec& spec);

}  // namespace bridgemixed
