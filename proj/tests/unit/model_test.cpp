#include "bridgemixed/model.hpp"

#include <doctest.h>

#include <Eigen/LU>
#include <cmath>

#include "bridgemixed/distributions.hpp"
#include "test_util.hpp"

using namespace bridgemixed;

namespace {

// two families, three individuals, five records; used across the model and
// posterior tests
PanelDataset toy_dataset() {
  std::vector<PanelRecord> records = {
      {"f1", "i1", 1, 1}, {"f1", "i1", 2, 2}, {"f1", "i2", 1, 3},
      {"f2", "i3", 1, 2}, {"f2", "i3", 2, 1},
  };
  CovariateColumn x1{"x1", {"1.0", "0.5", "-1.0", "0.2", "0.0"}, {}, false};
  CovariateColumn x2{"x2", {"0.0", "1.0", "0.0", "0.3", "1.0"}, {}, false};
  for (auto* col : {&x1, &x2}) {
    col->numeric_capable = true;
    for (const auto& cell : col->raw) col->numeric.push_back(std::stod(cell));
  }
  return PanelDataset(std::move(records), {x1, x2}, 3);
}

DesignMatrix toy_design(const PanelDataset& ds) {
  CovariateSpec spec;
  spec.entries.push_back(
      {"x1", CovariateUse::numeric, CovariateTransform::none, ""});
  spec.entries.push_back(
      {"x2", CovariateUse::numeric, CovariateTransform::none, ""});
  return build_design(ds, spec);
}

ParameterState toy_params() {
  ParameterState st;
  st.alpha.resize(2);
  st.alpha << -0.8, 0.9;
  st.beta.resize(2);
  st.beta << 0.5, -0.3;
  st.re_scale.resize(2);
  st.re_scale << 0.8, 0.7;  // phi_u, phi_v
  st.u_star.resize(2);
  st.u_star << 0.3, -0.5;
  st.v.resize(3);
  st.v << 0.2, -0.1, 0.4;
  return st;
}

}  // namespace

TEST_CASE("cumulative_probs: reference values and structure") {
  Eigen::VectorXd alpha(2);
  alpha << -1.871, 0.520;  // three categories
  const Eigen::VectorXd probs = cumulative_probs(alpha, 0.0, 0.0);
  REQUIRE(probs.size() == 3);
  CHECK(probs[0] == doctest::Approx(0.13342605659871434).epsilon(1e-12));
  CHECK(probs[1] == doctest::Approx(0.49372170971448124).epsilon(1e-12));
  CHECK(probs[2] == doctest::Approx(0.37285223368680442).epsilon(1e-12));

  // big positive random effect pushes the mass to the top category
  const Eigen::VectorXd extreme = cumulative_probs(alpha, 0.0, 50.0);
  CHECK(extreme[2] > 1.0 - 1e-12);

  Rng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::VectorXd a(3);
    a << rng.uniform(-3.0, -1.0), rng.uniform(-0.9, 0.9),
        rng.uniform(1.1, 3.0);
    const double eta = rng.uniform(-4.0, 4.0);
    const double b = rng.uniform(-4.0, 4.0);
    const Eigen::VectorXd p = cumulative_probs(a, eta, b);
    CHECK(std::abs(p.sum() - 1.0) < 1e-15);
    CHECK(p.minCoeff() > 0.0);
    // monotone cumulative sums
    double cum = 0.0;
    double prev = 0.0;
    for (int k = 0; k < 3; ++k) {
      cum += p[k];
      CHECK(cum >= prev);
      prev = cum;
    }
  }

  Eigen::VectorXd bad(2);
  bad << 0.5, -0.5;
  CHECK_THROWS_AS(cumulative_probs(bad, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("cumulative_probs: shift equivariance in thresholds and eta") {
  Eigen::VectorXd alpha(3);
  alpha << -1.0, 0.2, 1.4;
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const double shift = rng.uniform(-3.0, 3.0);
    const double eta = rng.uniform(-2.0, 2.0);
    const double b = rng.uniform(-2.0, 2.0);
    const Eigen::VectorXd base = cumulative_probs(alpha, eta, b);
    const Eigen::VectorXd shifted =
        cumulative_probs(alpha.array() + shift, eta + shift, b);
    CHECK((base - shifted).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("ordinal_loglik agrees with cumulative_probs and collapses to "
          "binary logistic") {
  Eigen::VectorXd alpha(2);
  alpha << -0.7, 1.1;
  Rng rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    const double c = rng.uniform(-6.0, 6.0);
    const Eigen::VectorXd probs = cumulative_probs(alpha, c, 0.0);
    for (int y = 1; y <= 3; ++y) {
      CHECK(ordinal_loglik(alpha, y, c) ==
            doctest::Approx(std::log(probs[y - 1])).epsilon(1e-12));
    }
  }

  // A = 2 is plain logistic regression
  Eigen::VectorXd one(1);
  one << 0.4;
  CHECK(ordinal_loglik(one, 2, 0.9) ==
        doctest::Approx(-0.47407698418010668).epsilon(1e-14));
  CHECK(ordinal_loglik(one, 1, 0.9) ==
        doctest::Approx(std::log(expit(0.4 - 0.9))).epsilon(1e-14));

  CHECK_THROWS_AS(ordinal_loglik(one, 0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(ordinal_loglik(one, 3, 0.0), std::invalid_argument);

  // extreme shifts stay finite
  CHECK(std::isfinite(ordinal_loglik(alpha, 2, 500.0)));
  CHECK(std::isfinite(ordinal_loglik(alpha, 2, -500.0)));
}

TEST_CASE("dataset_loglik: hand-computed five-record oracle") {
  const PanelDataset ds = toy_dataset();
  const DesignMatrix design = toy_design(ds);
  ModelSpec spec;
  spec.family = ModelFamily::modified_bridge_bridge;
  spec.categories = 3;

  const ParameterState st = toy_params();
  CHECK(dataset_loglik(ds, design, spec, st) ==
        doctest::Approx(-6.1320043697382260).epsilon(1e-13));
  CHECK(record_loglik(ds, design, spec, st, 0) ==
        doctest::Approx(-2.0642866734334460).epsilon(1e-13));

  // sum over records reproduces the total
  double total = 0.0;
  for (int r = 0; r < ds.n_records(); ++r) {
    total += record_loglik(ds, design, spec, st, r);
  }
  CHECK(total == doctest::Approx(dataset_loglik(ds, design, spec, st))
                     .epsilon(1e-15));
}

TEST_CASE("dataset_loglik: record-order invariance") {
  const PanelDataset ds = toy_dataset();
  const DesignMatrix design = toy_design(ds);
  ModelSpec spec;
  spec.family = ModelFamily::modified_bridge_bridge;
  spec.categories = 3;
  const ParameterState st = toy_params();
  const double base = dataset_loglik(ds, design, spec, st);

  // permute records (reverse) and rebuild
  std::vector<PanelRecord> records(ds.records().rbegin(),
                                   ds.records().rend());
  std::vector<CovariateColumn> cols = ds.covariates();
  for (auto& col : cols) {
    std::reverse(col.raw.begin(), col.raw.end());
    std::reverse(col.numeric.begin(), col.numeric.end());
  }
  const PanelDataset reversed(records, cols, 3);
  // key order changes, so re-map the random effects accordingly
  ParameterState st2 = st;
  st2.u_star << st.u_star[1], st.u_star[0];  // f2 now first
  st2.v << st.v[2], st.v[1], st.v[0];        // i3, i2, i1
  const DesignMatrix design2 = toy_design(reversed);
  CHECK(dataset_loglik(reversed, design2, spec, st2) ==
        doctest::Approx(base).epsilon(1e-14));
}

TEST_CASE("random effect composition per model family") {
  const ParameterState st = toy_params();

  ModelSpec mbb;
  mbb.family = ModelFamily::modified_bridge_bridge;
  CHECK(record_random_effect(mbb, st, 0, 0) ==
        doctest::Approx(0.3 / 0.7 + 0.2).epsilon(1e-15));

  ModelSpec nn;
  nn.family = ModelFamily::normal_normal;
  CHECK(record_random_effect(nn, st, 0, 0) ==
        doctest::Approx(0.3 + 0.2).epsilon(1e-15));  // e = 1

  ModelSpec two;
  two.family = ModelFamily::two_level_bridge;
  CHECK(record_random_effect(two, st, 0, 1) == doctest::Approx(-0.1));

  ModelSpec fixed;
  fixed.family = ModelFamily::fixed;
  CHECK(record_random_effect(fixed, st, 0, 0) == 0.0);
}

TEST_CASE("fixed-family likelihood ignores random-effect values") {
  const PanelDataset ds = toy_dataset();
  const DesignMatrix design = toy_design(ds);
  ModelSpec spec;
  spec.family = ModelFamily::fixed;
  spec.categories = 3;

  ParameterState st = toy_params();
  st.re_scale.resize(0);
  const double base = dataset_loglik(ds, design, spec, st);
  st.u_star << 5.0, -3.0;
  st.v << 1.0, 2.0, 3.0;
  CHECK(dataset_loglik(ds, design, spec, st) == base);
}

TEST_CASE("unconstrained transform: round trip, ordering, Jacobian") {
  ModelSpec spec;
  spec.family = ModelFamily::modified_bridge_bridge;
  spec.categories = 4;

  Rng rng(33);
  for (int trial = 0; trial < 50; ++trial) {
    ParameterState st;
    st.alpha.resize(3);
    st.alpha << rng.uniform(-3.0, -1.0), rng.uniform(-0.5, 0.5),
        rng.uniform(1.0, 3.0);
    st.beta.resize(2);
    st.beta << rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0);
    st.re_scale.resize(2);
    st.re_scale << rng.uniform(0.2, 0.95), rng.uniform(0.2, 0.95);
    st.u_star.resize(2);
    st.u_star << rng.normal(), rng.normal();
    st.v.resize(3);
    st.v << rng.normal(), rng.normal(), rng.normal();

    const Eigen::VectorXd z = to_unconstrained(spec, st);
    const TransformResult back = from_unconstrained(spec, z, 2, 3);
    CHECK((back.params.alpha - st.alpha).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((back.params.beta - st.beta).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((back.params.re_scale - st.re_scale).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((back.params.u_star - st.u_star).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((back.params.v - st.v).cwiseAbs().maxCoeff() < 1e-12);
  }

  // any unconstrained vector produces ordered thresholds
  const int dim = unconstrained_dimension(spec, 2, 2, 3);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd z(dim);
    for (int i = 0; i < dim; ++i) z[i] = rng.uniform(-4.0, 4.0);
    const TransformResult result = from_unconstrained(spec, z, 2, 3);
    for (int a = 1; a < result.params.alpha.size(); ++a) {
      CHECK(result.params.alpha[a] > result.params.alpha[a - 1]);
    }
    CHECK(result.params.re_scale.minCoeff() > 0.0);
    CHECK(result.params.re_scale.maxCoeff() < 1.0);
  }

  Eigen::VectorXd nan_z = Eigen::VectorXd::Zero(dim);
  nan_z[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(from_unconstrained(spec, nan_z, 2, 3),
                  std::invalid_argument);
}

TEST_CASE("transform log-Jacobian matches a numerical determinant") {
  // three-parameter toy: two thresholds + one bridge scale, no REs
  ModelSpec spec;
  spec.family = ModelFamily::two_level_bridge;
  spec.categories = 3;

  // map z -> (alpha_1, alpha_2, sd(phi_v)); the prior sits on those
  // coordinates, so the Jacobian determinant is d(alpha, sd)/dz
  auto constrained = [&spec](const Eigen::VectorXd& z) {
    const TransformResult result = from_unconstrained(spec, z, 0, 0);
    Eigen::VectorXd out(3);
    out[0] = result.params.alpha[0];
    out[1] = result.params.alpha[1];
    out[2] = bridge_sd(BridgeParam(result.params.re_scale[0]));
    return out;
  };

  Rng rng(44);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd z(3);
    z << rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
        rng.uniform(-1.0, 1.0);
    const double h = 1e-6;
    Eigen::MatrixXd jac(3, 3);
    for (int j = 0; j < 3; ++j) {
      Eigen::VectorXd up = z, down = z;
      up[j] += h;
      down[j] -= h;
      jac.col(j) = (constrained(up) - constrained(down)) / (2.0 * h);
    }
    const double log_det = std::log(std::abs(jac.determinant()));
    const TransformResult result = from_unconstrained(spec, z, 0, 0);
    CHECK(result.log_jacobian == doctest::Approx(log_det).epsilon(1e-6));
  }
}

TEST_CASE("coordinate names and flattening are aligned") {
  ModelSpec spec;
  spec.family = ModelFamily::modified_bridge_bridge;
  spec.categories = 3;
  const auto names =
      coordinate_names(spec, {"x1", "x2"}, {"f1", "f2"}, {"i1", "i2", "i3"});
  const ParameterState st = toy_params();
  const Eigen::VectorXd flat = flatten_constrained(spec, st);
  REQUIRE(static_cast<long>(names.size()) == flat.size());
  CHECK(names[0] == "alpha.1");
  CHECK(names[2] == "beta.x1");
  CHECK(names[4] == "phi_u");
  CHECK(names[5] == "phi_v");
  CHECK(names[6] == "u_star.f1");
  CHECK(names[8] == "v.i1");
  CHECK(flat[4] == 0.8);
  CHECK(flat[10] == 0.4);  // v.i3
}
