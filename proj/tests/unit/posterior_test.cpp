#include "bridgemixed/posterior.hpp"

#include <doctest.h>

#include <Eigen/LU>
#include <cmath>

#include "bridgemixed/distributions.hpp"
#include "bridgemixed/simulate.hpp"
#include "test_util.hpp"

using namespace bridgemixed;
using testsupport::fd_gradient;

namespace {

// 2 families x 3 individuals x 2 waves; shared toy across gradient tests
struct Toy {
  Toy()
      : sim([] {
          SimSpec spec;
          spec.n_families = 2;
          spec.min_individuals = 3;
          spec.max_individuals = 3;
          spec.waves = {1, 2};
          spec.entry_probs.clear();
          spec.retention.clear();
          spec.seed = 1234;
          return spec;
        }()),
        result(simulate_dataset(sim)),
        design(build_design(result.dataset, simulated_covariate_spec(sim))) {}

  ModelSpec model_spec(ModelFamily family) const {
    ModelSpec spec;
    spec.family = family;
    spec.categories = result.dataset.categories();
    spec.covariates = simulated_covariate_spec(sim);
    return spec;
  }

  SimSpec sim;
  SimResult result;
  DesignMatrix design;
};

}  // namespace

TEST_CASE("posterior gradient matches central finite differences for all "
          "four model families") {
  const Toy toy;
  Rng rng(555);
  for (ModelFamily family :
       {ModelFamily::modified_bridge_bridge, ModelFamily::normal_normal,
        ModelFamily::two_level_bridge, ModelFamily::fixed}) {
    const ModelSpec spec = toy.model_spec(family);
    const PosteriorTarget target(toy.result.dataset, toy.design, spec);
    const int dim = target.dimension();

    auto value = [&target](const Eigen::VectorXd& z) {
      return target.log_density(z);
    };

    double worst = 0.0;
    for (int point = 0; point < 100; ++point) {
      Eigen::VectorXd z(dim);
      for (int i = 0; i < dim; ++i) z[i] = rng.uniform(-1.5, 1.5);
      Eigen::VectorXd grad;
      target.log_density_grad(z, grad);
      const Eigen::VectorXd fd = fd_gradient(value, z, 2e-5);
      for (int i = 0; i < dim; ++i) {
        worst = std::max(worst, testsupport::rel_error(grad[i], fd[i]));
      }
    }
    CAPTURE(family_name(family));
    CHECK(worst < 1e-5);
  }
}

TEST_CASE("posterior value equals the exposed term decomposition") {
  const Toy toy;
  const ModelSpec spec = toy.model_spec(ModelFamily::modified_bridge_bridge);
  const PosteriorTarget target(toy.result.dataset, toy.design, spec);

  Rng rng(808);
  Eigen::VectorXd z(target.dimension());
  for (int i = 0; i < z.size(); ++i) z[i] = rng.uniform(-1.0, 1.0);

  const PosteriorTerms terms = target.log_density_terms(z);
  CHECK(terms.total() == target.log_density(z));

  Eigen::VectorXd grad;
  const double via_grad = target.log_density_grad(z, grad);
  CHECK(via_grad == doctest::Approx(terms.total()).epsilon(1e-13));

  // deterministic: same input, bit-identical output
  CHECK(target.log_density(z) == target.log_density(z));
}

TEST_CASE("fixed-effects posterior assembles likelihood + Cauchy priors + "
          "Jacobian") {
  const Toy toy;
  const ModelSpec spec = toy.model_spec(ModelFamily::fixed);
  const PosteriorTarget target(toy.result.dataset, toy.design, spec);

  Rng rng(31);
  Eigen::VectorXd z(target.dimension());
  for (int i = 0; i < z.size(); ++i) z[i] = rng.uniform(-1.0, 1.0);

  const TransformResult tr = from_unconstrained(spec, z, 0, 0);
  double manual = dataset_loglik(toy.result.dataset, toy.design, spec,
                                 tr.params);
  for (int a = 0; a < tr.params.alpha.size(); ++a) {
    manual += cauchy_logpdf(tr.params.alpha[a], 0.0, 5.0);
  }
  for (int j = 0; j < tr.params.beta.size(); ++j) {
    manual += cauchy_logpdf(tr.params.beta[j], 0.0, 5.0);
  }
  manual += tr.log_jacobian;

  CHECK(target.log_density(z) == doctest::Approx(manual).epsilon(1e-14));

  const PosteriorTerms terms = target.log_density_terms(z);
  CHECK(terms.re_prior == 0.0);
  CHECK(terms.loglik ==
        doctest::Approx(dataset_loglik(toy.result.dataset, toy.design, spec,
                                       tr.params))
            .epsilon(1e-14));
}

TEST_CASE("two-level bridge at v = 0: RE prior term is n * bridge_logpdf(0)") {
  const Toy toy;
  const ModelSpec spec = toy.model_spec(ModelFamily::two_level_bridge);
  const PosteriorTarget target(toy.result.dataset, toy.design, spec);

  Eigen::VectorXd z = Eigen::VectorXd::Zero(target.dimension());
  // scale coordinate: log sd; set sd = 2 -> phi_v = phi_from_sd(2)
  const int scale_idx =
      (spec.categories - 1) + static_cast<int>(toy.design.rows.cols());
  z[scale_idx] = std::log(2.0);
  const double phi_v = phi_from_sd(2.0).phi;

  const PosteriorTerms terms = target.log_density_terms(z);
  const double expected = toy.result.dataset.n_individuals() *
                          bridge_logpdf(0.0, BridgeParam(phi_v));
  CHECK(terms.re_prior == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("normal-normal RE prior term is a sum of normal log densities") {
  const Toy toy;
  const ModelSpec spec = toy.model_spec(ModelFamily::normal_normal);
  const PosteriorTarget target(toy.result.dataset, toy.design, spec);

  Rng rng(606);
  Eigen::VectorXd z(target.dimension());
  for (int i = 0; i < z.size(); ++i) z[i] = rng.uniform(-1.0, 1.0);
  const TransformResult tr = from_unconstrained(
      spec, z, toy.result.dataset.n_families(),
      toy.result.dataset.n_individuals());

  double expected = 0.0;
  for (int f = 0; f < tr.params.u_star.size(); ++f) {
    expected += normal_logpdf(tr.params.u_star[f], 0.0, tr.params.re_scale[0]);
  }
  for (int i = 0; i < tr.params.v.size(); ++i) {
    expected += normal_logpdf(tr.params.v[i], 0.0, tr.params.re_scale[1]);
  }
  CHECK(target.log_density_terms(z).re_prior ==
        doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("a zero covariate column only feels its prior") {
  // append an all-zero column: the likelihood cannot move along it, so the
  // gradient there must be exactly the Cauchy prior slope
  const Toy base;
  DesignMatrix design = base.design;
  design.rows.conservativeResize(design.rows.rows(), design.rows.cols() + 1);
  design.rows.col(design.rows.cols() - 1).setZero();
  design.column_names.push_back("dead");

  const ModelSpec spec = base.model_spec(ModelFamily::fixed);
  const PosteriorTarget target(base.result.dataset, design, spec);

  Rng rng(17);
  Eigen::VectorXd z(target.dimension());
  for (int i = 0; i < z.size(); ++i) z[i] = rng.uniform(-1.0, 1.0);
  Eigen::VectorXd grad;
  target.log_density_grad(z, grad);

  const int dead_idx =
      (spec.categories - 1) + static_cast<int>(design.rows.cols()) - 1;
  const double prior_slope =
      prior_dlogpdf_dx(PriorKind::cauchy, z[dead_idx], 0.0, 5.0);
  CHECK(grad[dead_idx] == doctest::Approx(prior_slope).epsilon(1e-13));
}

TEST_CASE("gradient vanishes at a numerically located mode") {
  // tiny fixed-effects model; damped Newton with a finite-difference
  // Hessian is the mode-finding oracle
  const Toy toy;
  const ModelSpec spec = toy.model_spec(ModelFamily::fixed);
  const PosteriorTarget target(toy.result.dataset, toy.design, spec);
  const int dim = target.dimension();

  Eigen::VectorXd z = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd grad;
  for (int iter = 0; iter < 200; ++iter) {
    target.log_density_grad(z, grad);
    if (grad.norm() < 1e-10) break;
    Eigen::MatrixXd hess(dim, dim);
    const double h = 1e-5;
    for (int j = 0; j < dim; ++j) {
      Eigen::VectorXd up = z, down = z;
      up[j] += h;
      down[j] -= h;
      Eigen::VectorXd gu, gd;
      target.log_density_grad(up, gu);
      target.log_density_grad(down, gd);
      hess.col(j) = (gu - gd) / (2.0 * h);
    }
    Eigen::VectorXd step = hess.fullPivLu().solve(-grad);
    double scale = 1.0;
    const double before = target.log_density(z);
    while (scale > 1e-6 &&
           target.log_density(z + scale * step) < before) {
      scale *= 0.5;
    }
    z += scale * step;
  }
  target.log_density_grad(z, grad);
  CHECK(grad.norm() < 1e-6);
}

TEST_CASE("posterior guards") {
  const Toy toy;
  const ModelSpec spec = toy.model_spec(ModelFamily::modified_bridge_bridge);
  const PosteriorTarget target(toy.result.dataset, toy.design, spec);

  Eigen::VectorXd wrong(3);
  wrong.setZero();
  CHECK_THROWS_AS(target.log_density(wrong), std::invalid_argument);

  Eigen::VectorXd bad = Eigen::VectorXd::Zero(target.dimension());
  bad[0] = std::numeric_limits<double>::infinity();
  CHECK(target.log_density(bad) ==
        -std::numeric_limits<double>::infinity());
  Eigen::VectorXd grad;
  CHECK(target.log_density_grad(bad, grad) ==
        -std::numeric_limits<double>::infinity());
  CHECK(grad.norm() == 0.0);

  // categories mismatch is rejected up front
  ModelSpec wrong_cats = spec;
  wrong_cats.categories = 5;
  CHECK_THROWS_AS(
      PosteriorTarget(toy.result.dataset, toy.design, wrong_cats),
      std::invalid_argument);
}
