#include <cmath>
#include <utility>
#include <vector>

#include "doctest.h"
#include "sderates/experiments.hpp"
#include "sderates/registry.hpp"
#include "sderates/rng.hpp"
#include "sderates/stats.hpp"

using namespace sderates;

TEST_CASE("rate fitting recovers exact power laws") {
  std::vector<std::pair<double, double>> pairs;
  for (int k = 2; k <= 8; ++k) {
    const double mesh = std::pow(2.0, -k);
    pairs.emplace_back(mesh, 7.0 * std::sqrt(mesh));
  }
  const auto report = mc::fit_rate(pairs);
  CHECK(report.fitted_slope == doctest::Approx(0.5).epsilon(1e-12));

  pairs.clear();
  for (int k = 2; k <= 8; ++k) pairs.emplace_back(std::pow(2.0, -k), std::pow(2.0, -k));
  CHECK(mc::fit_rate(pairs).fitted_slope == doctest::Approx(1.0).epsilon(1e-12));

  // Preconditions: enough points, two octaves, positive values.
  CHECK_THROWS(mc::fit_rate(std::vector<std::pair<double, double>>{{0.5, 1.0}, {0.25, 0.5}}));
  CHECK_THROWS(mc::fit_rate(
      std::vector<std::pair<double, double>>{{0.5, 1.0}, {0.4, 0.9}, {0.3, 0.8}}));
  CHECK_THROWS(mc::fit_rate(
      std::vector<std::pair<double, double>>{{0.5, 1.0}, {0.25, 0.0}, {0.125, 0.1}}));
}

TEST_CASE("functional error of the identity equals the strong moment") {
  const auto gbm = registry::model_by_name("gbm");
  const auto part = sde::Partition::equidistant(1.0, 32);
  const auto g = registry::functional_by_name("identity");
  const auto fe = mc::estimate_functional_error(gbm, sde::Scheme::EulerDiscrete, part, g,
                                                2.0, 20000, 99);
  const auto se = mc::estimate_strong_error(gbm, sde::Scheme::EulerDiscrete, part, 2.0,
                                            20000, 99);
  CHECK(fe.value == doctest::Approx(se.value).epsilon(1e-12));
}

TEST_CASE("degenerate partition equal to the reference gives zero error") {
  const auto spec = registry::model_by_name("additive");  // Euler is exact here
  const auto part = sde::Partition::equidistant(1.0, 8);
  const auto est = mc::estimate_strong_error(spec, sde::Scheme::EulerDiscrete, part, 2.0,
                                             5000, 7);
  CHECK(est.value == 0.0);
  // The bridge reconstruction a + (W_t - a) can differ from W_t by one ulp,
  // so the squared sup is zero only at machine resolution.
  const auto sup = mc::estimate_strong_error(spec, sde::Scheme::EulerDiscrete, part, 2.0,
                                             2000, 7, true);
  CHECK(sup.value <= 1e-30);
}

TEST_CASE("missing reference is rejected unless the fallback is enabled") {
  const auto spec = registry::model_by_name("tanh_bounded");
  const auto part = sde::Partition::equidistant(1.0, 8);
  const auto g = registry::functional_by_name("arctan");
  CHECK_THROWS(mc::estimate_functional_error(spec, sde::Scheme::EulerDiscrete, part, g, 2.0,
                                             1000, 5));
  mc::FunctionalErrorOptions opts;
  opts.allow_fine_reference = true;
  const auto est = mc::estimate_functional_error(spec, sde::Scheme::EulerDiscrete, part, g,
                                                 2.0, 1000, 5, opts);
  CHECK(est.fine_reference);
  CHECK(est.value > 0.0);
}

TEST_CASE("sup-norm strong error rejects milstein") {
  const auto gbm = registry::model_by_name("gbm");
  const auto part = sde::Partition::equidistant(1.0, 8);
  CHECK_THROWS(mc::estimate_strong_error(gbm, sde::Scheme::Milstein, part, 2.0, 100, 1, true));
}

TEST_CASE("sharpness example closed forms") {
  const auto s = mc::sharpness_example(0.1, 2.0);
  CHECK(s.indicator_error == 0.1);
  CHECK(s.lp_moment == doctest::Approx(0.00025).epsilon(1e-15));
  CHECK(s.bound_value == doctest::Approx(0.18898815748423097).epsilon(1e-12));
  CHECK(s.ratio >= 1.0 / 3.0);
  CHECK_THROWS(mc::sharpness_example(1.0, 2.0));
  CHECK_THROWS(mc::sharpness_example(0.0, 2.0));
  for (double p : {1.0, 2.0, 4.0, 8.0}) {
    const auto r = mc::sharpness_example(0.25, p);
    CHECK(r.indicator_error <= r.bound_value);
    CHECK(r.ratio >= 1.0 / 3.0);
    // ratio = 2^{p/(p+1)} / 3 in closed form
    CHECK(r.ratio == doctest::Approx(std::pow(2.0, p / (p + 1.0)) / 3.0).epsilon(1e-12));
  }
}

TEST_CASE("single-step disagreement quadrature against the normal cdf") {
  for (double K : {1.0, 1.3, 2.0, 3.5}) {
    const double a = K - 1.0, b = std::log(K) + 0.5;
    const double closed =
        std::abs(stats::normal_cdf(std::max(a, b)) - stats::normal_cdf(std::min(a, b)));
    CHECK(mc::gbm_disagreement_quadrature(K, 1) == doctest::Approx(closed).epsilon(1e-9));
  }
  CHECK_THROWS(mc::gbm_disagreement_quadrature(1.0, 3));
}

TEST_CASE("one- and two-step disagreement quadrature match simulation") {
  const auto gbm = registry::model_by_name("gbm");
  const std::size_t n_paths = 200000;
  for (int steps : {1, 2}) {
    const auto part = sde::Partition::equidistant(1.0, steps);
    const auto sample =
        sde::simulate(gbm, part, sde::Scheme::EulerDiscrete, n_paths, 1000 + steps);
    for (double K : {1.0, 1.5}) {
      std::size_t mismatch = 0;
      for (std::size_t i = 0; i < n_paths; ++i)
        if ((sample.exact_terminal[i] >= K) != (sample.scheme_terminal[i] >= K)) ++mismatch;
      const double est = static_cast<double>(mismatch) / static_cast<double>(n_paths);
      const double se = std::sqrt(est * (1.0 - est) / static_cast<double>(n_paths));
      const double oracle = mc::gbm_disagreement_quadrature(K, steps);
      CHECK(std::abs(est - oracle) <= 3.0 * se);
    }
  }
}

TEST_CASE("lower bound harness basics") {
  const std::vector<int> ns = {4, 16};
  const auto k_grid = mc::default_lower_bound_k_grid(60);
  const auto lb = mc::lower_bound_harness(ns, k_grid, 40000, 2024);
  CHECK(lb.n_grid == ns);
  CHECK(lb.scaled_max.size() == 2);
  CHECK(lb.scaled_max[0] > 0.0);
  CHECK(lb.scaled_max[1] > 0.0);
  CHECK(lb.min_scaled == std::min(lb.scaled_max[0], lb.scaled_max[1]));
  CHECK(lb.argmax_K[0] >= 1.0);

  CHECK_THROWS(mc::lower_bound_harness(ns, std::vector<double>{}, 100, 1));
  CHECK_THROWS(mc::lower_bound_harness(ns, std::vector<double>{0.5, 1.5}, 100, 1));

  // Levels above the 1-1e-6 quantile of both laws see no disagreements.
  const auto far = mc::lower_bound_harness(std::vector<int>{16},
                                           std::vector<double>{500.0}, 20000, 3);
  CHECK(far.scaled_max[0] == 0.0);
}

TEST_CASE("coupled estimation beats independent sampling variance") {
  const auto gbm = registry::model_by_name("gbm");
  const auto part = sde::Partition::equidistant(1.0, 64);
  const auto g = registry::functional_by_name("indicator", {{"K", 1.0}});
  mc::FunctionalErrorOptions coupled, indep;
  indep.independent_driver = true;
  const auto c = mc::estimate_functional_error(gbm, sde::Scheme::EulerDiscrete, part, g, 1.0,
                                               50000, 11, coupled);
  const auto ind = mc::estimate_functional_error(gbm, sde::Scheme::EulerDiscrete, part, g,
                                                 1.0, 50000, 11, indep);
  CHECK(c.std_error < ind.std_error);
}

TEST_CASE("milstein functional error does not exceed euler's for smooth g") {
  const auto gbm = registry::model_by_name("gbm");
  const auto g = registry::functional_by_name("arctan");
  for (int n : {16, 64, 256}) {
    const auto part = sde::Partition::equidistant(1.0, n);
    const auto e = mc::estimate_functional_error(gbm, sde::Scheme::EulerDiscrete, part, g,
                                                 2.0, 30000, 500 + n);
    const auto m = mc::estimate_functional_error(gbm, sde::Scheme::Milstein, part, g, 2.0,
                                                 30000, 500 + n);
    CHECK(m.value <= e.value * 1.1);
  }
}

TEST_CASE("density probe estimates known density peaks") {
  rng::PathStream u(42, 0);
  std::vector<double> uniform_sample(20000), normal_sample(20000);
  for (auto& v : uniform_sample) v = u.uniform();
  for (auto& v : normal_sample) v = u.normal();
  CHECK(mc::density_bound_probe(uniform_sample, 20).value ==
        doctest::Approx(1.0).epsilon(0.1));
  CHECK(mc::density_bound_probe(normal_sample, 30).value ==
        doctest::Approx(1.0 / stats::kSqrt2Pi).epsilon(0.1));

  std::vector<double> atoms;
  for (int i = 0; i < 600; ++i) {
    atoms.push_back(0.0);
    atoms.push_back(1.0);
  }
  const auto probe = mc::density_bound_probe(atoms, 10);
  CHECK(probe.atoms_flagged);
  // The estimate grows without bound as the windows shrink.
  CHECK(mc::density_bound_probe(atoms, 100).value > probe.value);

  CHECK_THROWS(mc::density_bound_probe(std::vector<double>(10, 1.0), 5));
}
