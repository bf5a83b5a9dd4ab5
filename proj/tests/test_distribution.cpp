#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <vector>

#include "doctest.h"
#include "sderates/distribution.hpp"
#include "sderates/registry.hpp"
#include "sderates/rng.hpp"
#include "sderates/sde.hpp"
#include "sderates/stats.hpp"

using namespace sderates;

TEST_CASE("rearrangement closed forms") {
  const auto uniform = registry::distribution_by_name("uniform01");
  CHECK(uniform.rearrangement(0.3) == doctest::Approx(0.7).epsilon(1e-10));
  CHECK(uniform.rearrangement(0.5) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK_THROWS(uniform.rearrangement(0.0));
  CHECK_THROWS(uniform.rearrangement(1.0));

  const auto point = dist::DistributionModel::empirical(std::vector<double>(64, 5.0));
  for (double s : {0.01, 0.3, 0.77, 0.99}) CHECK(point.rearrangement(s) == 5.0);

  const auto normal = registry::distribution_by_name("stdnormal");
  CHECK(std::abs(normal.rearrangement(0.5)) < 1e-10);
  CHECK(normal.rearrangement(0.15865525393145707) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("rearrangement is nonincreasing and equidistributed") {
  for (const char* name : {"uniform01", "stdnormal", "lognormal_gbm_T1"}) {
    const auto model = registry::distribution_by_name(name);
    double prev = std::numeric_limits<double>::infinity();
    std::vector<double> values;
    rng::PathStream u(31337, 0);
    for (int i = 1; i < 512; ++i) {
      const double v = model.rearrangement(i / 512.0);
      CHECK(v <= prev + 1e-12);
      prev = v;
    }
    // X*(U) has the law of the model itself (KS at the 1% level, n = 1e4).
    for (int i = 0; i < 10000; ++i) values.push_back(model.rearrangement(u.uniform()));
    std::sort(values.begin(), values.end());
    const double d = stats::ks_statistic_fn(values, [&](double x) { return model.cdf(x); });
    CHECK(d * std::sqrt(10000.0) < stats::ks_critical_value(0.01));
  }
}

TEST_CASE("alpha level and tail probabilities") {
  const auto uniform = registry::distribution_by_name("uniform01");
  CHECK(uniform.alpha_level(0.5) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(uniform.tail_probability(2.0, dist::TailSide::UpperGeq) == 0.0);
  CHECK(uniform.alpha_level(-3.0) == 1.0);

  const auto normal = registry::distribution_by_name("stdnormal");
  CHECK(normal.alpha_level(1.0) == doctest::Approx(0.15866).epsilon(1e-4));
  CHECK(normal.tail_probability(0.0, dist::TailSide::LowerLeq) ==
        doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("empirical gbm tail matches the lognormal law") {
  const auto gbm = registry::model_by_name("gbm");
  const auto part = sde::Partition::equidistant(1.0, 1);
  const auto sample = sde::simulate(gbm, part, sde::Scheme::EulerDiscrete, 100000, 5150);
  const auto empirical = dist::DistributionModel::empirical(sample.exact_terminal);
  const auto analytic = registry::distribution_by_name("lognormal_gbm_T1");
  const double est = empirical.tail_probability(1.0, dist::TailSide::UpperGeq);
  const double truth = analytic.alpha_level(1.0);
  const double se = std::sqrt(truth * (1.0 - truth) / 100000.0);
  CHECK(std::abs(est - truth) <= 3.0 * se);
}

TEST_CASE("minimal slope oracles") {
  const auto uniform = registry::distribution_by_name("uniform01");
  const auto u = uniform.minimal_slope_dx(0.5, 100);
  CHECK(u.value == doctest::Approx(1.0).epsilon(1e-9));
  CHECK_FALSE(u.zero_flagged);

  // For the standard normal at K = 0 the chord infimum is the reciprocal of
  // the density peak: sqrt(2 pi).
  const auto normal = registry::distribution_by_name("stdnormal");
  const auto n = normal.minimal_slope_dx(0.0, 2000);
  CHECK(n.value == doctest::Approx(stats::kSqrt2Pi).epsilon(0.01));
  // One-sided over-estimate, up to quantile-solver resolution.
  CHECK(n.value >= stats::kSqrt2Pi * (1.0 - 1e-6));

  CHECK_THROWS(uniform.minimal_slope_dx(0.5, 50));
}

TEST_CASE("atoms force a flagged zero slope") {
  // Half the mass sits exactly at 2.0: the rearrangement has a flat stretch
  // at that level.
  std::vector<double> sample;
  rng::PathStream u(7, 0);
  for (int i = 0; i < 500; ++i) {
    sample.push_back(2.0);
    sample.push_back(u.uniform());
  }
  const auto model = dist::DistributionModel::empirical(std::move(sample));
  const auto slope = model.minimal_slope_dx(2.0, 100);
  CHECK(slope.zero_flagged);
  CHECK(slope.value == 0.0);
  const auto bound = model.dx_upper_bound(2.0);
  CHECK(bound.unbounded);
}

TEST_CASE("grid refinement only lowers the slope estimate") {
  const auto normal = registry::distribution_by_name("stdnormal");
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t grid : {100u, 400u, 1600u, 6400u}) {
    const double v = normal.minimal_slope_dx(0.7, grid).value;
    CHECK(v <= prev + 1e-15);
    prev = v;
  }
}

TEST_CASE("D_X stays below the density bound across scanned levels") {
  for (const char* name :
       {"uniform01", "stdnormal", "lognormal_gbm_T1", "lognormal_standard"}) {
    const auto model = registry::distribution_by_name(name);
    const double sup_f = *model.density_sup();
    for (int i = 1; i <= 20; ++i) {
      const double level = 0.025 + 0.95 * (i - 1) / 19.0;
      const double K = model.rearrangement(level);
      const auto bound = model.dx_upper_bound(K);  // throws if the chain breaks
      CHECK_FALSE(bound.unbounded);
      CHECK(bound.D <= sup_f * 1.05);
    }
  }
}

TEST_CASE("dx oracle values") {
  const auto uniform = registry::distribution_by_name("uniform01");
  CHECK(uniform.dx_upper_bound(0.5).D == doctest::Approx(1.0).epsilon(1e-9));

  const auto normal = registry::distribution_by_name("stdnormal");
  CHECK(normal.dx_upper_bound(0.0).D ==
        doctest::Approx(1.0 / stats::kSqrt2Pi).epsilon(0.01));

  const auto lognormal = registry::distribution_by_name("lognormal_standard");
  const auto b = lognormal.dx_upper_bound(1.0);
  CHECK(b.D <= std::exp(0.5) / stats::kSqrt2Pi * 1.05);
}

TEST_CASE("empirical sample loading from csv and binary") {
  const std::vector<double> data = {3.25, -1.5, 0.75, 2.0, -0.25};
  {
    std::ofstream out("/tmp/sderates_sample.csv");
    out << "value\n";
    for (double v : data) out << v << "\n";
  }
  {
    std::ofstream out("/tmp/sderates_sample.f64", std::ios::binary);
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size() * sizeof(double)));
  }
  const auto csv = dist::DistributionModel::load_empirical("/tmp/sderates_sample.csv");
  const auto bin = dist::DistributionModel::load_empirical("/tmp/sderates_sample.f64");
  CHECK(csv.sample() == bin.sample());
  CHECK(csv.sample().front() == -1.5);
  CHECK(csv.sample().back() == 3.25);
  std::remove("/tmp/sderates_sample.csv");
  std::remove("/tmp/sderates_sample.f64");
}

TEST_CASE("analytic model validation rejects bad inputs") {
  CHECK_THROWS(dist::DistributionModel::analytic(
      "bad", [](double x) { return -x; }, std::nullopt, 0.0, 1.0));
  // density_sup below the true slope of the cdf is caught on the check grid.
  CHECK_THROWS(dist::DistributionModel::analytic(
      "bad2", [](double x) { return std::clamp(x, 0.0, 1.0); }, 0.5, 0.0, 1.0));
}
