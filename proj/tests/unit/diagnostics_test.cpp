#include "bridgemixed/diagnostics.hpp"

#include <doctest.h>

#include <cmath>

#include "bridgemixed/rng.hpp"

using namespace bridgemixed;

namespace {

std::vector<Eigen::VectorXd> iid_chains(int chains, int length,
                                        std::uint64_t seed, double shift = 0.0,
                                        int shifted_chain = -1) {
  Rng rng(seed);
  std::vector<Eigen::VectorXd> out;
  for (int c = 0; c < chains; ++c) {
    Eigen::VectorXd chain(length);
    for (int i = 0; i < length; ++i) {
      chain[i] = rng.normal() + (c == shifted_chain ? shift : 0.0);
    }
    out.push_back(std::move(chain));
  }
  return out;
}

}  // namespace

TEST_CASE("split R-hat: iid chains are near 1, shifted chains flagged") {
  bool defined = false;
  const double clean = split_rhat(iid_chains(4, 1000, 31), &defined);
  CHECK(defined);
  CHECK(clean > 0.99);
  CHECK(clean < 1.01);

  const double shifted =
      split_rhat(iid_chains(4, 1000, 32, 3.0, 2), &defined);
  CHECK(defined);
  CHECK(shifted > 1.1);

  // a within-chain trend (warm-up style drift) is caught by splitting
  auto drifting = iid_chains(4, 1000, 33);
  for (auto& chain : drifting) {
    for (int i = 0; i < chain.size(); ++i) chain[i] += 4.0 * i / 1000.0;
  }
  CHECK(split_rhat(drifting, &defined) > 1.1);
}

TEST_CASE("split R-hat: degenerate inputs flagged, not crashed") {
  bool defined = true;
  const std::vector<Eigen::VectorXd> constant(
      4, Eigen::VectorXd::Constant(100, 2.5));
  const double rhat = split_rhat(constant, &defined);
  CHECK_FALSE(defined);
  CHECK(std::isnan(rhat));

  // single chain: undefined
  const double single = split_rhat(iid_chains(1, 100, 3), &defined);
  CHECK_FALSE(defined);
  CHECK(std::isnan(single));

  // constant within, different across: unbounded, defined
  std::vector<Eigen::VectorXd> apart = {Eigen::VectorXd::Constant(100, 0.0),
                                        Eigen::VectorXd::Constant(100, 1.0)};
  const double inf_rhat = split_rhat(apart, &defined);
  CHECK(defined);
  CHECK(std::isinf(inf_rhat));
}

TEST_CASE("effective sample size: iid near nominal, autocorrelated reduced") {
  const auto chains = iid_chains(4, 1000, 77);
  const double ess = effective_sample_size(chains);
  CHECK(ess > 2400.0);  // nominal 4000; iid estimate fluctuates high and low
  CHECK(ess < 6000.0);

  // AR(1) with rho = 0.9 has tau ~ 19
  Rng rng(78);
  std::vector<Eigen::VectorXd> ar;
  for (int c = 0; c < 4; ++c) {
    Eigen::VectorXd chain(2000);
    double x = 0.0;
    for (int i = 0; i < 2000; ++i) {
      x = 0.9 * x + std::sqrt(1 - 0.81) * rng.normal();
      chain[i] = x;
    }
    ar.push_back(std::move(chain));
  }
  const double ar_ess = effective_sample_size(ar);
  CHECK(ar_ess < 8000.0 / 10.0);  // strongly reduced
  CHECK(ar_ess > 8000.0 / 40.0);  // but not absurdly so
}

TEST_CASE("compute_diagnostics: per-coordinate rows with names") {
  Draws draws;
  draws.names = {"a", "b"};
  Rng rng(5);
  for (int c = 0; c < 3; ++c) {
    Eigen::MatrixXd chain(400, 2);
    for (int i = 0; i < 400; ++i) {
      chain(i, 0) = rng.normal();
      chain(i, 1) = 3.0 + 2.0 * rng.normal();
    }
    draws.chains.push_back(std::move(chain));
  }
  const auto diag = compute_diagnostics(draws);
  REQUIRE(diag.size() == 2);
  CHECK(diag[0].name == "a");
  CHECK(diag[1].name == "b");
  CHECK(diag[1].mean == doctest::Approx(3.0).epsilon(0.1));
  CHECK(diag[1].sd == doctest::Approx(2.0).epsilon(0.1));
  CHECK(diag[0].rhat_defined);
  CHECK(diag[0].rhat < 1.02);
}
