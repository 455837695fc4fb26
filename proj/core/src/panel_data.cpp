#include "bridgemixed/panel_data.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "bridgemixed/csv.hpp"

namespace bridgemixed {

PanelDataset::PanelDataset(std::vector<PanelRecord> records,
                           std::vector<CovariateColumn> covariates,
                           int categories)
    : records_(std::move(records)),
      covariates_(std::move(covariates)),
      categories_(categories) {
  if (categories_ < 2) {
    throw std::invalid_argument("PanelDataset: need at least 2 categories");
  }
  for (const auto& col : covariates_) {
    if (col.raw.size() != records_.size()) {
      throw std::invalid_argument("PanelDataset: covariate column '" +
                                  col.name + "' not aligned to records");
    }
  }

  std::unordered_map<std::string, int> family_index;
  std::unordered_map<std::string, int> individual_index;
  std::set<std::pair<std::string, long>> seen_keys;

  record_family_.reserve(records_.size());
  record_individual_.reserve(records_.size());
  for (size_t r = 0; r < records_.size(); ++r) {
    const auto& rec = records_[r];
    if (rec.outcome < 1 || rec.outcome > categories_) {
      throw std::invalid_argument(
          "PanelDataset: outcome " + std::to_string(rec.outcome) +
          " outside {1.." + std::to_string(categories_) + "} for individual " +
          rec.individual_id);
    }
    if (!seen_keys.insert({rec.individual_id, rec.wave}).second) {
      throw std::invalid_argument("PanelDataset: duplicate (individual, wave) "
                                  "key: (" +
                                  rec.individual_id + ", " +
                                  std::to_string(rec.wave) + ")");
    }
    auto [fit, fnew] =
        family_index.insert({rec.family_id, n_families()});
    if (fnew) {
      family_keys_.push_back(rec.family_id);
      family_records_.emplace_back();
    }
    auto [iit, inew] =
        individual_index.insert({rec.individual_id, n_individuals()});
    if (inew) {
      individual_keys_.push_back(rec.individual_id);
      individual_records_.emplace_back();
    }
    record_family_.push_back(fit->second);
    record_individual_.push_back(iit->second);
    family_records_[fit->second].push_back(static_cast<int>(r));
    individual_records_[iit->second].push_back(static_cast<int>(r));
  }
}

const CovariateColumn* PanelDataset::covariate(const std::string& name) const {
  for (const auto& col : covariates_) {
    if (col.name == name) return &col;
  }
  return nullptr;
}

std::vector<long> PanelDataset::waves() const {
  std::set<long> distinct;
  for (const auto& rec : records_) distinct.insert(rec.wave);
  return {distinct.begin(), distinct.end()};
}

bool PanelDataset::same_content(const PanelDataset& other) const {
  if (categories_ != other.categories_ ||
      records_.size() != other.records_.size() ||
      covariates_.size() != other.covariates_.size()) {
    return false;
  }
  for (size_t r = 0; r < records_.size(); ++r) {
    const auto& a = records_[r];
    const auto& b = other.records_[r];
    if (a.family_id != b.family_id || a.individual_id != b.individual_id ||
        a.wave != b.wave || a.outcome != b.outcome) {
      return false;
    }
  }
  for (size_t c = 0; c < covariates_.size(); ++c) {
    if (covariates_[c].name != other.covariates_[c].name ||
        covariates_[c].raw != other.covariates_[c].raw) {
      return false;
    }
  }
  return true;
}

PanelDataset load_dataset(const std::string& path, const LoadSchema& schema) {
  const CsvTable table = read_csv(path);

  const int fam_col = table.column(schema.family_col);
  const int ind_col = table.column(schema.individual_col);
  const int wave_col = table.column(schema.wave_col);
  const int out_col = table.column(schema.outcome_col);
  for (const auto& [name, idx] :
       std::initializer_list<std::pair<std::string, int>>{
           {schema.family_col, fam_col},
           {schema.individual_col, ind_col},
           {schema.wave_col, wave_col},
           {schema.outcome_col, out_col}}) {
    if (idx < 0) {
      throw std::runtime_error("missing column '" + name + "' in " + path);
    }
  }

  std::vector<PanelRecord> records;
  records.reserve(table.rows.size());
  std::vector<CovariateColumn> covariates;
  std::vector<int> cov_source;
  for (size_t c = 0; c < table.header.size(); ++c) {
    const int ci = static_cast<int>(c);
    if (ci == fam_col || ci == ind_col || ci == wave_col || ci == out_col) {
      continue;
    }
    CovariateColumn col;
    col.name = table.header[c];
    col.raw.reserve(table.rows.size());
    covariates.push_back(std::move(col));
    cov_source.push_back(ci);
  }

  int max_outcome = 0;
  for (size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    PanelRecord rec;
    rec.family_id = row[fam_col];
    rec.individual_id = row[ind_col];
    long wave = 0;
    if (!parse_long(row[wave_col], &wave)) {
      throw std::runtime_error("row " + std::to_string(r + 2) +
                               ": wave is not an integer: '" + row[wave_col] +
                               "'");
    }
    rec.wave = wave;
    long outcome = 0;
    if (!parse_long(row[out_col], &outcome)) {
      throw std::runtime_error("row " + std::to_string(r + 2) +
                               ": outcome is not an integer: '" +
                               row[out_col] + "'");
    }
    rec.outcome = static_cast<int>(outcome);
    max_outcome = std::max(max_outcome, rec.outcome);
    records.push_back(std::move(rec));
    for (size_t c = 0; c < covariates.size(); ++c) {
      const std::string& cell = row[cov_source[c]];
      if (cell.empty()) {
        throw std::runtime_error("row " + std::to_string(r + 2) +
                                 ": empty covariate cell in column '" +
                                 covariates[c].name + "'");
      }
      covariates[c].raw.push_back(cell);
    }
  }

  for (auto& col : covariates) {
    col.numeric_capable = true;
    col.numeric.reserve(col.raw.size());
    for (const auto& cell : col.raw) {
      double v = 0.0;
      if (!parse_double(cell, &v)) {
        col.numeric_capable = false;
        col.numeric.clear();
        break;
      }
      col.numeric.push_back(v);
    }
  }

  const int categories =
      schema.categories > 0 ? schema.categories : std::max(max_outcome, 2);
  return PanelDataset(std::move(records), std::move(covariates), categories);
}

void write_dataset(const std::string& path, const PanelDataset& ds) {
  CsvTable table;
  table.header = {"family_id", "individual_id", "wave", "outcome"};
  for (const auto& col : ds.covariates()) table.header.push_back(col.name);
  table.rows.reserve(ds.n_records());
  for (int r = 0; r < ds.n_records(); ++r) {
    const auto& rec = ds.record(r);
    std::vector<std::string> row = {rec.family_id, rec.individual_id,
                                    std::to_string(rec.wave),
                                    std::to_string(rec.outcome)};
    for (const auto& col : ds.covariates()) row.push_back(col.raw[r]);
    table.rows.push_back(std::move(row));
  }
  write_csv(path, table);
}

ValidationReport validate(const PanelDataset& ds) {
  ValidationReport report;

  for (const auto& col : ds.covariates()) {
    if (col.raw.empty()) continue;
    const bool constant = std::all_of(
        col.raw.begin(), col.raw.end(),
        [&col](const std::string& cell) { return cell == col.raw.front(); });
    if (constant) {
      report.issues.push_back("covariate '" + col.name +
                              "' is constant across all records");
    }
  }

  std::map<long, std::vector<long>> counts;
  std::map<long, std::set<int>> families_at_wave;
  std::map<long, std::set<int>> individuals_at_wave;
  for (int r = 0; r < ds.n_records(); ++r) {
    const auto& rec = ds.record(r);
    auto& per_cat = counts[rec.wave];
    per_cat.resize(ds.categories(), 0);
    per_cat[rec.outcome - 1] += 1;
    families_at_wave[rec.wave].insert(ds.record_family(r));
    individuals_at_wave[rec.wave].insert(ds.record_individual(r));
  }
  for (auto& [wave, per_cat] : counts) {
    per_cat.resize(ds.categories(), 0);
    report.wave_category_counts.emplace_back(wave, per_cat);
  }
  for (const auto& [wave, fams] : families_at_wave) {
    report.wave_family_counts.emplace_back(wave,
                                           static_cast<long>(fams.size()));
  }
  for (const auto& [wave, inds] : individuals_at_wave) {
    report.wave_individual_counts.emplace_back(
        wave, static_cast<long>(inds.size()));
  }
  return report;
}

std::string ValidationReport::to_text() const {
  std::ostringstream out;
  out << "validation issues: " << issues.size() << "\n";
  for (const auto& issue : issues) out << "  - " << issue << "\n";
  out << "records per wave and outcome category:\n";
  out << "  wave  families  individuals";
  const size_t n_cat = wave_category_counts.empty()
                           ? 0
                           : wave_category_counts.front().second.size();
  for (size_t a = 1; a <= n_cat; ++a) out << "  cat" << a;
  out << "\n";
  for (size_t w = 0; w < wave_category_counts.size(); ++w) {
    out << "  " << wave_category_counts[w].first << "  "
        << wave_family_counts[w].second << "  "
        << wave_individual_counts[w].second;
    for (long c : wave_category_counts[w].second) out << "  " << c;
    out << "\n";
  }
  return out.str();
}

std::vector<PatternRow> pattern_table(const PanelDataset& ds,
                                      const std::vector<long>& waves) {
  if (waves.empty()) {
    throw std::invalid_argument("pattern_table: wave list is empty");
  }
  std::unordered_map<long, int> wave_pos;
  for (size_t w = 0; w < waves.size(); ++w) {
    wave_pos[waves[w]] = static_cast<int>(w);
  }

  auto presence_key = [&](const std::vector<int>& rec_ids) {
    std::vector<bool> present(waves.size(), false);
    for (int r : rec_ids) {
      auto it = wave_pos.find(ds.record(r).wave);
      if (it != wave_pos.end()) present[it->second] = true;
    }
    return present;
  };

  std::map<std::vector<bool>, PatternRow> rows;
  for (int f = 0; f < ds.n_families(); ++f) {
    auto key = presence_key(ds.family_records(f));
    auto& row = rows[key];
    row.pattern = key;
    row.family_count += 1;
  }
  for (int i = 0; i < ds.n_individuals(); ++i) {
    auto key = presence_key(ds.individual_records(i));
    auto& row = rows[key];
    row.pattern = key;
    row.individual_count += 1;
  }

  std::vector<PatternRow> out;
  out.reserve(rows.size());
  for (auto& [key, row] : rows) out.push_back(std::move(row));
  // fewest follow-ups first; within a count, earliest presence last-to-first
  // mirrors the usual panel-report layout
  auto rank = [](const PatternRow& row) {
    int count = 0;
    unsigned long bits = 0;
    for (bool b : row.pattern) {
      bits = (bits << 1) | (b ? 1u : 0u);
      count += b ? 1 : 0;
    }
    return std::pair<int, long>(count, -static_cast<long>(bits));
  };
  std::sort(out.begin(), out.end(),
            [&rank](const PatternRow& a, const PatternRow& b) {
              return rank(a) < rank(b);
            });
  return out;
}

std::string pattern_table_to_csv(const std::vector<PatternRow>& rows,
                                 const std::vector<long>& waves) {
  std::ostringstream out;
  for (long w : waves) out << "wave_" << w << ",";
  out << "families,individuals\n";
  for (const auto& row : rows) {
    for (bool b : row.pattern) out << (b ? 1 : 0) << ",";
    out << row.family_count << "," << row.individual_count << "\n";
  }
  return out.str();
}

}  // namespace bridgemixed
