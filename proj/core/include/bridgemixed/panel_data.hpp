#pragma once

#include <map>
#include <string>
#include <vector>

namespace bridgemixed {

/// One observed follow-up: the (family, individual, wave) spine of a row.
/// Covariates are stored column-wise on the dataset.
struct PanelRecord {
  std::string family_id;
  std::string individual_id;
  long wave = 0;
  int outcome = 0;  // 1..A
};

/// A covariate column keeps the raw cells and, when every cell parses, a
/// numeric view. Whether it is used as numeric or categorical is decided by
/// the covariate spec at design-build time.
struct CovariateColumn {
  std::string name;
  std::vector<std::string> raw;     // aligned to records
  std::vector<double> numeric;      // filled iff numeric_capable
  bool numeric_capable = false;
};

/// Immutable three-level panel: records nested in individuals nested in
/// families, with per-key indexes. Family membership is resolved per record,
/// so an individual may appear under more than one family across waves.
class PanelDataset {
 public:
  PanelDataset(std::vector<PanelRecord> records,
               std::vector<CovariateColumn> covariates, int categories);

  int n_records() const { return static_cast<int>(records_.size()); }
  int n_families() const { return static_cast<int>(family_keys_.size()); }
  int n_individuals() const {
    return static_cast<int>(individual_keys_.size());
  }
  int categories() const { return categories_; }

  const std::vector<PanelRecord>& records() const { return records_; }
  const PanelRecord& record(int r) const { return records_[r]; }

  /// Keys in order of first appearance; random effects follow this order.
  const std::vector<std::string>& family_keys() const { return family_keys_; }
  const std::vector<std::string>& individual_keys() const {
    return individual_keys_;
  }

  int record_family(int r) const { return record_family_[r]; }
  int record_individual(int r) const { return record_individual_[r]; }

  const std::vector<int>& family_records(int family) const {
    return family_records_[family];
  }
  const std::vector<int>& individual_records(int individual) const {
    return individual_records_[individual];
  }

  const std::vector<CovariateColumn>& covariates() const {
    return covariates_;
  }
  const CovariateColumn* covariate(const std::string& name) const;

  /// Sorted distinct waves present in the data.
  std::vector<long> waves() const;

  bool same_content(const PanelDataset& other) const;

 private:
  std::vector<PanelRecord> records_;
  std::vector<CovariateColumn> covariates_;
  int categories_;
  std::vector<std::string> family_keys_;
  std::vector<std::string> individual_keys_;
  std::vector<int> record_family_;
  std::vector<int> record_individual_;
  std::vector<std::vector<int>> family_records_;
  std::vector<std::vector<int>> individual_records_;
};

/// Column mapping for CSV ingestion. Any header not mapped to the spine is
/// read as a covariate column.
struct LoadSchema {
  std::string family_col = "family_id";
  std::string individual_col = "individual_id";
  std::string wave_col = "wave";
  std::string outcome_col = "outcome";
  int categories = 0;  // 0 = infer from the largest observed outcome
};

PanelDataset load_dataset(const std::string& path,
                          const LoadSchema& schema = {});
void write_dataset(const std::string& path, const PanelDataset& ds);

struct ValidationReport {
  std::vector<std::string> issues;
  /// wave -> per-category record counts (index 0 is category 1)
  std::vector<std::pair<long, std::vector<long>>> wave_category_counts;
  std::vector<std::pair<long, long>> wave_family_counts;
  std::vector<std::pair<long, long>> wave_individual_counts;

  std::string to_text() const;
};

/// Report-only sanity pass: constant covariate columns and per-wave
/// frequency summaries.
ValidationReport validate(const PanelDataset& ds);

struct PatternRow {
  std::vector<bool> pattern;  // presence, aligned to the wave list queried
  long family_count = 0;
  long individual_count = 0;
};

/// Follow-up presence patterns over `waves`, one row per observed pattern.
/// Rows are ordered by number of present waves, earliest-presence first
/// within a count. Family and individual counts each sum to the dataset
/// totals.
std::vector<PatternRow> pattern_table(const PanelDataset& ds,
                                      const std::vector<long>& waves);

std::string pattern_table_to_csv(const std::vector<PatternRow>& rows,
                                 const std::vector<long>& waves);

}  // namespace bridgemixed
