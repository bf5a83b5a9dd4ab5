#include <cmath>
#include <vector>

#include "doctest.h"
#include "sderates/stats.hpp"

using namespace sderates;

TEST_CASE("normal cdf matches tabulated values") {
  CHECK(stats::normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(stats::normal_cdf(1.0) == doctest::Approx(0.8413447460685429).epsilon(1e-12));
  CHECK(stats::normal_cdf(-1.96) == doctest::Approx(0.024997895148220435).epsilon(1e-10));
  CHECK(stats::normal_cdf_upper(1.0) == doctest::Approx(0.15865525393145707).epsilon(1e-12));
}

TEST_CASE("normal quantile inverts the cdf") {
  for (double p : {1e-10, 1e-4, 0.025, 0.3, 0.5, 0.75, 0.975, 1.0 - 1e-6}) {
    const double x = stats::normal_quantile(p);
    CHECK(stats::normal_cdf(x) == doctest::Approx(p).epsilon(1e-12));
  }
  CHECK(stats::normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-14));
  // The fast path is allowed a ~1.2e-9 relative error.
  for (double p : {0.01, 0.2, 0.8, 0.999}) {
    CHECK(stats::normal_quantile_fast(p) ==
          doctest::Approx(stats::normal_quantile(p)).epsilon(5e-9));
  }
  CHECK_THROWS(stats::normal_quantile(0.0));
  CHECK_THROWS(stats::normal_quantile(1.0));
}

TEST_CASE("normal absolute moments") {
  CHECK(stats::normal_abs_moment(2.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(stats::normal_abs_moment(4.0) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(stats::normal_abs_moment(1.0) ==
        doctest::Approx(std::sqrt(2.0 / M_PI)).epsilon(1e-12));
  CHECK(stats::normal_lp_norm(2.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(stats::normal_lp_norm(4.0) == doctest::Approx(std::pow(3.0, 0.25)).epsilon(1e-12));
}

TEST_CASE("pairwise sum and mean/se") {
  std::vector<double> v(1000);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 1.0 / (1.0 + static_cast<double>(i));
  double naive = 0.0;
  for (double x : v) naive += x;
  CHECK(stats::pairwise_sum(v) == doctest::Approx(naive).epsilon(1e-13));

  std::vector<double> c = {2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0};
  const auto ms = stats::mean_and_se(c);
  CHECK(ms.mean == doctest::Approx(5.0));
  CHECK(ms.std_error == doctest::Approx(std::sqrt(32.0 / 7.0 / 8.0)));
}

TEST_CASE("line fit recovers exact slopes") {
  std::vector<double> x = {0.0, 1.0, 2.0, 3.0}, y = {1.0, 3.0, 5.0, 7.0};
  const auto fit = stats::fit_line(x, y);
  CHECK(fit.slope == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(fit.intercept == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(fit.slope_stderr == doctest::Approx(0.0));
}

TEST_CASE("ks critical value at 1%") {
  CHECK(stats::ks_critical_value(0.01) == doctest::Approx(1.6276).epsilon(1e-4));
}

TEST_CASE("student t table endpoints") {
  CHECK(stats::student_t_975(1) == doctest::Approx(12.706));
  CHECK(stats::student_t_975(5) == doctest::Approx(2.571));
  CHECK(stats::student_t_975(1000) == doctest::Approx(1.960));
}
