#include <cmath>
#include <omp.h>
#include <utility>
#include <vector>

#include "doctest.h"
#include "sderates/experiments.hpp"
#include "sderates/registry.hpp"
#include "sderates/rng.hpp"
#include "sderates/sde.hpp"

using namespace sderates;

namespace {

// One-step driver value: the first normal of the path stream.
double first_normal(std::uint64_t seed, std::uint64_t path) {
  rng::PathStream s(seed, path);
  return s.normal();
}

sde::SdeSpec constant_sigma_spec(double sigma_value) {
  sde::SdeSpec spec;
  spec.sigma = [sigma_value](double, double) { return sigma_value; };
  spec.drift = [](double, double) { return 0.0; };
  spec.sigma_dx = [](double, double) { return 0.0; };
  spec.x0 = 0.0;
  spec.horizon = 1.0;
  return spec;
}

}  // namespace

TEST_CASE("partition invariants") {
  const auto p = sde::Partition::equidistant(1.0, 4);
  CHECK(p.nodes.size() == 5);
  CHECK(p.nodes.front() == 0.0);
  CHECK(p.nodes.back() == 1.0);
  CHECK(p.mesh() == doctest::Approx(0.25).epsilon(1e-15));
  CHECK_THROWS(sde::Partition::from_nodes({0.0, 0.5, 0.5, 1.0}));
  CHECK_THROWS(sde::Partition::from_nodes({0.1, 0.5, 1.0}));
}

TEST_CASE("one-step scheme formulas by hand") {
  // GBM over a single unit step: X = 1 + 1*dW; with dW = z this is 1 + z,
  // and Milstein adds z^2/2 - 1/2.
  const sde::SdeSpec gbm = registry::model_by_name("gbm");
  const auto part = sde::Partition::equidistant(1.0, 1);
  const auto euler = sde::simulate(gbm, part, sde::Scheme::EulerDiscrete, 4, 11);
  const auto milstein = sde::simulate(gbm, part, sde::Scheme::Milstein, 4, 11);
  for (std::size_t i = 0; i < 4; ++i) {
    const double z = first_normal(11, i);
    CHECK(euler.scheme_terminal[i] == doctest::Approx(1.0 + z).epsilon(1e-15));
    CHECK(milstein.scheme_terminal[i] ==
          doctest::Approx(1.0 + z + 0.5 * (z * z - 1.0)).epsilon(1e-14));
    CHECK(euler.brownian_terminal[i] == milstein.brownian_terminal[i]);
  }
}

TEST_CASE("degenerate coefficients leave the initial value") {
  sde::SdeSpec flat = constant_sigma_spec(0.0);
  flat.x0 = 3.5;
  const auto part = sde::Partition::from_nodes({0.0, 0.2, 0.55, 1.0});
  const auto out = sde::simulate(flat, part, sde::Scheme::EulerDiscrete, 8, 5);
  for (double x : out.scheme_terminal) CHECK(x == 3.5);
}

TEST_CASE("unit volatility reproduces the Brownian terminal exactly") {
  const sde::SdeSpec spec = constant_sigma_spec(1.0);
  std::vector<sde::Partition> partitions;
  for (int n : {1, 3, 16}) partitions.push_back(sde::Partition::equidistant(1.0, n));
  partitions.push_back(sde::Partition::from_nodes({0.0, 0.07, 0.3, 0.31, 0.9, 1.0}));
  for (const auto& part : partitions) {
    const auto out = sde::simulate(spec, part, sde::Scheme::EulerDiscrete, 32, 77);
    for (std::size_t i = 0; i < out.scheme_terminal.size(); ++i)
      CHECK(out.scheme_terminal[i] == out.brownian_terminal[i]);
  }
}

TEST_CASE("milstein with constant sigma equals euler pathwise") {
  const sde::SdeSpec spec = constant_sigma_spec(0.7);
  const auto part = sde::Partition::equidistant(1.0, 8);
  const auto e = sde::simulate(spec, part, sde::Scheme::EulerDiscrete, 64, 123);
  const auto m = sde::simulate(spec, part, sde::Scheme::Milstein, 64, 123);
  CHECK(e.scheme_terminal == m.scheme_terminal);
}

TEST_CASE("milstein requires the sigma derivative") {
  sde::SdeSpec spec = constant_sigma_spec(1.0);
  spec.sigma_dx = nullptr;
  const auto part = sde::Partition::equidistant(1.0, 2);
  CHECK_THROWS_WITH_AS(sde::simulate(spec, part, sde::Scheme::Milstein, 2, 1),
                       doctest::Contains("assumption (iv)"), std::invalid_argument);
}

TEST_CASE("parallel and serial kernels agree bitwise for every thread count") {
  const sde::SdeSpec gbm = registry::model_by_name("gbm");
  const auto part = sde::Partition::equidistant(1.0, 32);
  const auto serial = sde::simulate_serial(gbm, part, sde::Scheme::Milstein, 5000, 99);
  for (int threads : {1, 2, 4}) {
    omp_set_num_threads(threads);
    const auto par = sde::simulate(gbm, part, sde::Scheme::Milstein, 5000, 99);
    CHECK(par.scheme_terminal == serial.scheme_terminal);
    CHECK(par.exact_terminal == serial.exact_terminal);
    CHECK(par.brownian_terminal == serial.brownian_terminal);
  }
  omp_set_num_threads(omp_get_num_procs());
}

TEST_CASE("exploding paths are flagged and excluded") {
  sde::SdeSpec blowup;
  blowup.sigma = [](double, double) { return 0.0; };
  blowup.drift = [](double, double x) { return x * x * x; };
  blowup.x0 = 3.0;
  blowup.horizon = 1.0;
  const auto part = sde::Partition::equidistant(1.0, 32);
  const auto out = sde::simulate(blowup, part, sde::Scheme::EulerDiscrete, 16, 1);
  CHECK(out.invalid_count == 16);
  CHECK(out.exclusion_rate() == 1.0);
  for (auto v : out.valid) CHECK(v == 0);
}

TEST_CASE("exact gbm terminal formula") {
  const std::vector<double> w = {0.0, 0.5};
  const auto s = sde::exact_gbm_terminal(w, 1.0);
  CHECK(s[0] == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
  CHECK(s[1] == doctest::Approx(1.0).epsilon(1e-15));

  // Martingale property: E S_1 = 1, checked against the MC standard error.
  const sde::SdeSpec gbm = registry::model_by_name("gbm");
  const auto part = sde::Partition::equidistant(1.0, 1);
  const auto sample = sde::simulate(gbm, part, sde::Scheme::EulerDiscrete, 1000000, 2718);
  double sum = 0.0, sum2 = 0.0;
  for (double v : sample.exact_terminal) {
    sum += v;
    sum2 += v * v;
  }
  const double n = static_cast<double>(sample.exact_terminal.size());
  const double mean = sum / n;
  const double se = std::sqrt((sum2 / n - mean * mean) / n);
  CHECK(std::abs(mean - 1.0) <= 3.0 * se);
}

TEST_CASE("continuous euler agrees with the discrete scheme at nodes") {
  const sde::SdeSpec gbm = registry::model_by_name("gbm");
  const auto part = sde::Partition::equidistant(1.0, 4);
  const std::vector<double> queries = {0.0, 0.25, 0.37, 0.5, 0.93, 1.0};
  const auto cont = sde::simulate_euler_continuous(gbm, part, queries, 16, 31);
  const auto disc = sde::simulate(gbm, part, sde::Scheme::EulerDiscrete, 16, 31);
  for (std::size_t p = 0; p < 16; ++p) {
    CHECK(cont.scheme_at(p, 0) == 1.0);
    CHECK(cont.scheme_at(p, 5) == disc.scheme_terminal[p]);
    CHECK(cont.brownian_at(p, 5) == disc.brownian_terminal[p]);
  }
  CHECK_THROWS(sde::simulate_euler_continuous(gbm, part, std::vector<double>{1.5}, 2, 1));
}

TEST_CASE("continuous euler with unit sigma is the Brownian path itself") {
  const sde::SdeSpec spec = constant_sigma_spec(1.0);
  const auto part = sde::Partition::equidistant(1.0, 4);
  const std::vector<double> queries = {0.1, 0.3, 0.62, 0.8};
  const auto cont = sde::simulate_euler_continuous(spec, part, queries, 32, 7);
  for (std::size_t p = 0; p < 32; ++p)
    for (std::size_t q = 0; q < queries.size(); ++q)
      CHECK(cont.scheme_at(p, q) == doctest::Approx(cont.brownian_at(p, q)).epsilon(1e-15));
}

TEST_CASE("euler strong rate on gbm is one half across p") {
  const sde::SdeSpec gbm = registry::model_by_name("gbm");
  const std::vector<int> grid = {16, 32, 64, 128, 256, 512};
  for (double p : {1.0, 2.0, 4.0}) {
    const auto report =
        mc::run_strong_rate(gbm, sde::Scheme::EulerDiscrete, grid, p, 40000, 404, false);
    CHECK(report.fitted_slope == doctest::Approx(0.5).epsilon(0.2));
    CHECK(report.fitted_slope >= 0.4);
    CHECK(report.fitted_slope <= 0.6);
  }
}

TEST_CASE("milstein strong rate on gbm is one") {
  const sde::SdeSpec gbm = registry::model_by_name("gbm");
  const std::vector<int> grid = {16, 32, 64, 128, 256, 512};
  const auto report =
      mc::run_strong_rate(gbm, sde::Scheme::Milstein, grid, 2.0, 40000, 405, false);
  CHECK(report.fitted_slope >= 0.85);
  CHECK(report.fitted_slope <= 1.15);
}

TEST_CASE("sup-norm euler error over a fine grid keeps the one-half rate") {
  const sde::SdeSpec gbm = registry::model_by_name("gbm");
  const std::vector<int> grid = {8, 16, 32, 64, 128};
  const auto report =
      mc::run_strong_rate(gbm, sde::Scheme::EulerDiscrete, grid, 2.0, 4000, 406, true);
  CHECK(report.fitted_slope == doctest::Approx(0.5).epsilon(0.25));
}

TEST_CASE("fine-mesh reference coupling tracks the exact solution") {
  // For GBM both references are available; the fine-mesh surrogate must give
  // nearly the same strong error as the exact coupling.
  const sde::SdeSpec gbm = registry::model_by_name("gbm");
  const auto part = sde::Partition::equidistant(1.0, 16);
  const auto exact = sde::simulate(gbm, part, sde::Scheme::EulerDiscrete, 20000, 52);
  const auto fine = sde::simulate_with_fine_reference(gbm, part, sde::Scheme::EulerDiscrete,
                                                      256, 20000, 52);
  const auto e1 = mc::strong_error_from_sample(exact, 2.0);
  const auto e2 = mc::strong_error_from_sample(fine, 2.0);
  CHECK(e2.value == doctest::Approx(e1.value).epsilon(0.1));
  CHECK(fine.fine_reference);
}
