#include "bridgemixed/design.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace bridgemixed {

DesignMatrix build_design(const PanelDataset& ds, const CovariateSpec& spec) {
  const int n = ds.n_records();

  struct PlannedColumn {
    const CovariateColumn* source;
    CovariateTransform transform;
    std::string level;  // nonempty for indicator columns
    std::string name;
  };
  std::vector<PlannedColumn> plan;

  for (const auto& entry : spec.entries) {
    const CovariateColumn* col = ds.covariate(entry.name);
    if (col == nullptr) {
      throw std::invalid_argument("build_design: unknown covariate '" +
                                  entry.name + "'");
    }
    if (entry.use == CovariateUse::numeric) {
      if (!col->numeric_capable) {
        throw std::invalid_argument("build_design: covariate '" + entry.name +
                                    "' has non-numeric cells");
      }
      PlannedColumn pc{col, entry.transform, "", entry.name};
      if (entry.transform == CovariateTransform::log1p) {
        pc.name = "log1p(" + entry.name + ")";
      }
      plan.push_back(std::move(pc));
    } else {
      std::set<std::string> levels(col->raw.begin(), col->raw.end());
      if (entry.reference.empty()) {
        throw std::invalid_argument(
            "build_design: categorical covariate '" + entry.name +
            "' needs a declared reference level");
      }
      if (levels.count(entry.reference) == 0) {
        throw std::invalid_argument("build_design: reference level '" +
                                    entry.reference +
                                    "' not observed in covariate '" +
                                    entry.name + "'");
      }
      for (const auto& level : levels) {
        if (level == entry.reference) continue;
        plan.push_back(PlannedColumn{col, CovariateTransform::none, level,
                                     entry.name + "=" + level});
      }
    }
  }

  DesignMatrix design;
  design.rows.resize(n, static_cast<int>(plan.size()));
  for (size_t c = 0; c < plan.size(); ++c) {
    const auto& pc = plan[c];
    design.column_names.push_back(pc.name);
    if (!pc.level.empty()) {
      for (int r = 0; r < n; ++r) {
        design.rows(r, static_cast<int>(c)) =
            pc.source->raw[r] == pc.level ? 1.0 : 0.0;
      }
    } else if (pc.transform == CovariateTransform::log1p) {
      design.log_columns.push_back(static_cast<int>(c));
      for (int r = 0; r < n; ++r) {
        const double v = pc.source->numeric[r];
        if (v < 0.0) {
          throw std::invalid_argument(
              "build_design: negative value in log(x+1) column '" +
              pc.source->name + "' at record " + std::to_string(r));
        }
        design.rows(r, static_cast<int>(c)) = std::log1p(v);
      }
    } else {
      for (int r = 0; r < n; ++r) {
        design.rows(r, static_cast<int>(c)) = pc.source->numeric[r];
      }
    }
  }
  return design;
}

}  // namespace bridgemixed
