#include <doctest.h>

#include <fstream>
#include <set>

#include "bridgemixed/design.hpp"
#include "bridgemixed/panel_data.hpp"
#include "bridgemixed/simulate.hpp"
#include "test_util.hpp"

using namespace bridgemixed;
using testsupport::TempDir;

namespace {

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

}  // namespace

TEST_CASE("load_dataset: minimal valid panel") {
  TempDir dir("load_min");
  write_file(dir.file("panel.csv"),
             "family_id,individual_id,wave,outcome,income\n"
             "f1,i1,1,1,100\n"
             "f1,i1,2,2,120\n"
             "f1,i1,3,3,90\n");
  const PanelDataset ds = load_dataset(dir.file("panel.csv"));
  CHECK(ds.n_records() == 3);
  CHECK(ds.n_families() == 1);
  CHECK(ds.n_individuals() == 1);
  CHECK(ds.categories() == 3);
  CHECK(ds.covariates().size() == 1);
  CHECK(ds.covariates()[0].numeric_capable);
  CHECK(ds.waves() == std::vector<long>{1, 2, 3});
}

TEST_CASE("load_dataset: error paths") {
  TempDir dir("load_err");

  CHECK_THROWS_WITH_AS(load_dataset(dir.file("nope.csv")),
                       doctest::Contains("cannot open"), std::runtime_error);

  write_file(dir.file("missing_col.csv"),
             "family_id,individual_id,wave\nf1,i1,1\n");
  CHECK_THROWS_WITH_AS(load_dataset(dir.file("missing_col.csv")),
                       doctest::Contains("missing column 'outcome'"),
                       std::runtime_error);

  write_file(dir.file("dup.csv"),
             "family_id,individual_id,wave,outcome\n"
             "f1,i1,1,1\n"
             "f2,i1,1,2\n");
  CHECK_THROWS_WITH_AS(load_dataset(dir.file("dup.csv")),
                       doctest::Contains("duplicate (individual, wave)"),
                       std::invalid_argument);

  write_file(dir.file("range.csv"),
             "family_id,individual_id,wave,outcome\n"
             "f1,i1,1,5\n");
  LoadSchema schema;
  schema.categories = 3;
  CHECK_THROWS_WITH_AS(load_dataset(dir.file("range.csv"), schema),
                       doctest::Contains("outside {1..3}"),
                       std::invalid_argument);

  write_file(dir.file("empty_cell.csv"),
             "family_id,individual_id,wave,outcome,x\n"
             "f1,i1,1,1,\n");
  CHECK_THROWS_WITH_AS(load_dataset(dir.file("empty_cell.csv")),
                       doctest::Contains("empty covariate cell"),
                       std::runtime_error);
}

TEST_CASE("household re-formation: same individual under two families") {
  TempDir dir("reform");
  write_file(dir.file("panel.csv"),
             "family_id,individual_id,wave,outcome\n"
             "f1,i1,1,1\n"
             "f1,i2,1,2\n"
             "f2,i1,2,2\n"  // i1 moved to a new family
             "f1,i2,2,1\n");
  const PanelDataset ds = load_dataset(dir.file("panel.csv"));
  CHECK(ds.n_families() == 2);
  CHECK(ds.n_individuals() == 2);
  // family effect resolved per record
  CHECK(ds.record_family(0) == 0);
  CHECK(ds.record_family(2) == 1);
  CHECK(ds.record_individual(0) == ds.record_individual(2));
}

TEST_CASE("write -> load round trip preserves content") {
  SimSpec spec;
  spec.n_families = 25;
  spec.seed = 313;
  const SimResult sim = simulate_dataset(spec);
  Rng rng(7);
  const PanelDataset observed = apply_missingness(sim.dataset, spec, rng);

  TempDir dir("roundtrip");
  write_dataset(dir.file("panel.csv"), observed);
  const PanelDataset reloaded = load_dataset(dir.file("panel.csv"));
  CHECK(observed.same_content(reloaded));
  CHECK(reloaded.same_content(observed));
}

TEST_CASE("validate: constant column flagged, clean data clean report") {
  TempDir dir("validate");
  write_file(dir.file("panel.csv"),
             "family_id,individual_id,wave,outcome,flat,ok\n"
             "f1,i1,1,1,same,0.5\n"
             "f1,i1,2,2,same,0.7\n"
             "f2,i2,1,3,same,0.9\n");
  const PanelDataset ds = load_dataset(dir.file("panel.csv"));
  const ValidationReport report = validate(ds);
  REQUIRE(report.issues.size() == 1);
  CHECK(report.issues[0] == "covariate 'flat' is constant across all records");

  SimSpec spec;
  spec.n_families = 30;
  spec.seed = 4;
  const SimResult sim = simulate_dataset(spec);
  CHECK(validate(sim.dataset).issues.empty());
}

TEST_CASE("validate: per-wave category frequencies match a direct tally") {
  SimSpec spec;
  spec.n_families = 40;
  spec.seed = 99;
  const SimResult sim = simulate_dataset(spec);
  const ValidationReport report = validate(sim.dataset);

  // independent tally straight off the records
  std::map<long, std::vector<long>> tally;
  for (const auto& rec : sim.dataset.records()) {
    auto& counts = tally[rec.wave];
    counts.resize(sim.dataset.categories(), 0);
    counts[rec.outcome - 1] += 1;
  }
  REQUIRE(report.wave_category_counts.size() == tally.size());
  for (const auto& [wave, counts] : report.wave_category_counts) {
    CHECK(tally.at(wave) == counts);
  }
}

TEST_CASE("pattern_table: degenerate and hand-built cases") {
  TempDir dir("patterns");
  write_file(dir.file("panel.csv"),
             "family_id,individual_id,wave,outcome\n"
             "f1,i1,1,1\n"
             "f1,i1,2,2\n"
             "f1,i1,3,1\n");
  const PanelDataset ds = load_dataset(dir.file("panel.csv"));
  const auto rows = pattern_table(ds, {1, 2, 3});
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].pattern == std::vector<bool>{true, true, true});
  CHECK(rows[0].family_count == 1);
  CHECK(rows[0].individual_count == 1);

  CHECK_THROWS_AS(pattern_table(ds, {}), std::invalid_argument);

  // mixed presence: i1 waves 1-2, i2 wave 2 only, i3 (new family) waves 2-3
  write_file(dir.file("mixed.csv"),
             "family_id,individual_id,wave,outcome\n"
             "f1,i1,1,1\n"
             "f1,i1,2,2\n"
             "f1,i2,2,1\n"
             "f2,i3,2,3\n"
             "f2,i3,3,1\n");
  const PanelDataset mixed = load_dataset(dir.file("mixed.csv"));
  const auto mixed_rows = pattern_table(mixed, {1, 2, 3});
  long fam_total = 0;
  long ind_total = 0;
  for (const auto& row : mixed_rows) {
    fam_total += row.family_count;
    ind_total += row.individual_count;
  }
  CHECK(fam_total == mixed.n_families());
  CHECK(ind_total == mixed.n_individuals());
  // single-wave patterns sort before multi-wave ones
  CHECK(mixed_rows.front().pattern == std::vector<bool>{false, true, false});
}

TEST_CASE("pattern_table: counts equal brute-force enumeration on simulated "
          "data") {
  SimSpec spec;
  spec.n_families = 60;
  spec.seed = 17;
  const SimResult sim = simulate_dataset(spec);
  Rng rng(18);
  const PanelDataset ds = apply_missingness(sim.dataset, spec, rng);
  const auto waves = ds.waves();
  const auto rows = pattern_table(ds, waves);

  // brute force over individuals and families
  auto key_of = [&](const std::vector<int>& recs) {
    std::vector<bool> key(waves.size(), false);
    for (int r : recs) {
      for (size_t w = 0; w < waves.size(); ++w) {
        if (ds.record(r).wave == waves[w]) key[w] = true;
      }
    }
    return key;
  };
  std::map<std::vector<bool>, std::pair<long, long>> brute;
  for (int f = 0; f < ds.n_families(); ++f) {
    brute[key_of(ds.family_records(f))].first += 1;
  }
  for (int i = 0; i < ds.n_individuals(); ++i) {
    brute[key_of(ds.individual_records(i))].second += 1;
  }
  REQUIRE(rows.size() == brute.size());
  long individual_total = 0;
  for (const auto& row : rows) {
    const auto& want = brute.at(row.pattern);
    CHECK(row.family_count == want.first);
    CHECK(row.individual_count == want.second);
    individual_total += row.individual_count;
  }
  CHECK(individual_total == ds.n_individuals());
}

TEST_CASE("build_design: numeric, log1p and categorical expansion") {
  TempDir dir("design");
  write_file(dir.file("panel.csv"),
             "family_id,individual_id,wave,outcome,mhdi,sex,status\n"
             "f1,i1,1,1,0,male,married\n"
             "f1,i1,2,2,6614,female,single\n"
             "f2,i2,1,3,100,female,widowed\n");
  const PanelDataset ds = load_dataset(dir.file("panel.csv"));

  CovariateSpec spec;
  spec.entries.push_back(
      {"mhdi", CovariateUse::numeric, CovariateTransform::log1p, ""});
  spec.entries.push_back(
      {"sex", CovariateUse::categorical, CovariateTransform::none, "male"});
  spec.entries.push_back({"status", CovariateUse::categorical,
                          CovariateTransform::none, "married"});

  const DesignMatrix design = build_design(ds, spec);
  REQUIRE(design.rows.cols() == 4);  // log1p(mhdi), sex=female, 2 x status
  CHECK(design.column_names[0] == "log1p(mhdi)");
  CHECK(design.column_names[1] == "sex=female");
  CHECK(design.column_names[2] == "status=single");
  CHECK(design.column_names[3] == "status=widowed");
  CHECK(design.log_columns == std::vector<int>{0});

  CHECK(design.rows(0, 0) == 0.0);  // log(0 + 1)
  CHECK(design.rows(1, 0) ==
        doctest::Approx(8.797095076549056).epsilon(1e-12));
  CHECK(design.rows(0, 1) == 0.0);
  CHECK(design.rows(1, 1) == 1.0);
  CHECK(design.rows(1, 2) == 1.0);
  CHECK(design.rows(2, 3) == 1.0);

  // determinism: rebuilt matrices are bit-identical
  const DesignMatrix again = build_design(ds, spec);
  CHECK((design.rows - again.rows).cwiseAbs().maxCoeff() == 0.0);

  CovariateSpec unknown;
  unknown.entries.push_back(
      {"nope", CovariateUse::numeric, CovariateTransform::none, ""});
  CHECK_THROWS_WITH_AS(build_design(ds, unknown),
                       doctest::Contains("unknown covariate"),
                       std::invalid_argument);

  CovariateSpec no_ref;
  no_ref.entries.push_back(
      {"sex", CovariateUse::categorical, CovariateTransform::none, ""});
  CHECK_THROWS_AS(build_design(ds, no_ref), std::invalid_argument);
}

TEST_CASE("build_design: negative values rejected in log columns") {
  TempDir dir("design_neg");
  write_file(dir.file("panel.csv"),
             "family_id,individual_id,wave,outcome,x\n"
             "f1,i1,1,1,-0.5\n");
  const PanelDataset ds = load_dataset(dir.file("panel.csv"));
  CovariateSpec spec;
  spec.entries.push_back(
      {"x", CovariateUse::numeric, CovariateTransform::log1p, ""});
  CHECK_THROWS_WITH_AS(build_design(ds, spec),
                       doctest::Contains("negative value"),
                       std::invalid_argument);
}
