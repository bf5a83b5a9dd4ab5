#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sderates/functional.hpp"
#include "sderates/sde.hpp"

namespace sderates::mc {

// Monte Carlo estimate of E|g(X_T) - g(X_T^pi)|^p (or of a strong moment).
struct ErrorEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n_paths = 0;  // valid paths entering the estimate
  double p = 1.0;
  double mesh = 0.0;
  std::size_t excluded = 0;
  bool fine_reference = false;

  double lp_norm() const;  // value^{1/p}
};

struct RateReport {
  std::vector<double> mesh_grid;  // strictly decreasing
  std::vector<ErrorEstimate> estimates;
  double fitted_slope = 0.0;
  std::pair<double, double> slope_ci{0.0, 0.0};  // 95% interval
  double reference_slope = 0.0;
  std::string scheme_tag;
  std::string functional_id;
};

// Least-squares slope of log(value) against log(mesh). Requires >= 3 points
// spanning >= 2 octaves in mesh and strictly positive values.
RateReport fit_rate(std::span<const std::pair<double, double>> mesh_value_pairs);

struct FunctionalErrorOptions {
  bool allow_fine_reference = false;
  // Reference terminals drawn from an independent Brownian driver instead of
  // the coupled one (kept for measuring the coupling variance reduction).
  bool independent_driver = false;
};

// Per-path |g(reference) - g(scheme)|^p from an existing coupled sample.
ErrorEstimate functional_error_from_sample(const sde::CoupledSample& sample,
                                           const func::FunctionalRep& g, double p);

// Per-path |reference - scheme|^p from an existing coupled sample.
ErrorEstimate strong_error_from_sample(const sde::CoupledSample& sample, double p);

// ||reference - scheme||_p computed in log space; stays finite for moment
// indices far beyond the overflow threshold of |d|^p.
double strong_lp_norm_log(const sde::CoupledSample& sample, double p);

ErrorEstimate estimate_functional_error(const sde::SdeSpec& spec, sde::Scheme scheme,
                                        const sde::Partition& partition,
                                        const func::FunctionalRep& g, double p,
                                        std::size_t n_paths, std::uint64_t seed,
                                        const FunctionalErrorOptions& opts = {});

ErrorEstimate estimate_strong_error(const sde::SdeSpec& spec, sde::Scheme scheme,
                                    const sde::Partition& partition, double p,
                                    std::size_t n_paths, std::uint64_t seed,
                                    bool sup_norm = false, std::size_t monitor_points = 257);

// Strong-rate sweep; the fitted slope is taken on the L_p norms, so the
// reference slope is the scheme order itself.
RateReport run_strong_rate(const sde::SdeSpec& spec, sde::Scheme scheme,
                           std::span<const int> n_grid, double p, std::size_t n_paths,
                           std::uint64_t seed, bool sup_norm = false);

// Functional-error sweep; the slope is fitted on the raw p-th moments.
RateReport run_functional_rate(const sde::SdeSpec& spec, sde::Scheme scheme,
                               const func::FunctionalRep& g, double p,
                               std::span<const int> n_grid, std::size_t n_paths,
                               std::uint64_t seed, double reference_slope);

// Closed-form witness that the indicator bound's exponent is sharp: a
// perturbation of the uniform law with indicator error exactly epsilon and
// E|X - X_hat|^p = eps^{p+1}/2^p.
struct SharpnessResult {
  double indicator_error = 0.0;
  double lp_moment = 0.0;
  double bound_value = 0.0;
  double ratio = 0.0;  // indicator_error / bound_value, >= 1/3
};
SharpnessResult sharpness_example(double epsilon, double p);

// sqrt(n) * max_K P(indicator disagreement) for the geometric Brownian motion
// S_t = exp(W_t - t/2) under equidistant Euler schemes.
struct LowerBoundResult {
  std::vector<int> n_grid;
  std::vector<double> scaled_max;     // sqrt(n) * max_K estimate
  std::vector<double> scaled_max_se;  // sqrt(n) * binomial SE at the argmax
  std::vector<double> argmax_K;
  std::vector<double> k_grid;
  double min_scaled = 0.0;
};
LowerBoundResult lower_bound_harness(std::span<const int> n_grid,
                                     std::span<const double> k_grid, std::size_t n_paths,
                                     std::uint64_t seed);

std::vector<double> default_lower_bound_k_grid(std::size_t count = 200);

// Disagreement probability P(chi(S_1 >= K) != chi(S_1^E >= K)) for the
// n-step equidistant Euler scheme, by Gaussian quadrature (n = 1 or 2).
// Independent of the simulation path; used as an oracle.
double gbm_disagreement_quadrature(double K, int n_steps);

// Max sliding-window density estimate from a sample; diagnostic only.
struct DensityProbe {
  double value = 0.0;
  bool atoms_flagged = false;
};
DensityProbe density_bound_probe(std::span<const double> sample, std::size_t window_count);

}  // namespace sderates::mc
