#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace sderates::stats {

inline constexpr double kSqrt2Pi = 2.506628274631000502415765284811;

double normal_pdf(double x);

// Phi(x) via erfc; accurate in both tails.
double normal_cdf(double x);

// P(Z >= x) without cancellation for large x.
double normal_cdf_upper(double x);

// Acklam's rational approximation, |rel err| < 1.2e-9. Used for sampling,
// where the error is far below Monte Carlo noise.
double normal_quantile_fast(double p);

// Acklam start + Halley refinements, near machine precision.
double normal_quantile(double p);

// E|Z|^p for Z standard normal, p >= 0.
double normal_abs_moment(double p);

// ||Z||_p = (E|Z|^p)^(1/p).
double normal_lp_norm(double p);

// Deterministic pairwise (binary-tree) summation.
double pairwise_sum(std::span<const double> values);

struct MeanSe {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
};

// Mean and standard error of the mean from raw summands.
MeanSe mean_and_se(std::span<const double> values);

// One-sample Kolmogorov-Smirnov statistic sup|F_n - F| against a cdf.
double ks_statistic(std::span<const double> sorted_sample, double (*cdf)(double));
template <typename Cdf>
double ks_statistic_fn(std::span<const double> sorted_sample, Cdf&& cdf);

// Asymptotic critical value for the scaled KS statistic sqrt(n)*D_n.
double ks_critical_value(double alpha);

// Two-sided 97.5% Student-t quantile (95% CI half-width factor).
double student_t_975(std::size_t df);

// Least squares fit y = a + b*x; returns {slope, intercept, slope_stderr}.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  std::size_t n = 0;
};
LineFit fit_line(std::span<const double> x, std::span<const double> y);

template <typename Cdf>
double ks_statistic_fn(std::span<const double> sorted_sample, Cdf&& cdf) {
  const std::size_t n = sorted_sample.size();
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = cdf(sorted_sample[i]);
    const double lo = static_cast<double>(i) / n;
    const double hi = static_cast<double>(i + 1) / n;
    d = std::max({d, f - lo, hi - f});
  }
  return d;
}

}  // namespace sderates::stats
