#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sderates::sde {

using Coefficient = std::function<double(double, double)>;  // (t, x) -> value

// One-dimensional SDE  dX_t = sigma(t, X_t) dW_t + b(t, X_t) dt,  X_0 = x0.
struct SdeSpec {
  std::string name;
  Coefficient sigma;
  Coefficient drift;
  Coefficient sigma_dx;  // d sigma / dx, required by the Milstein scheme
  Coefficient drift_dx;
  double x0 = 0.0;
  double horizon = 1.0;
  double holder_alpha = 1.0;  // time-Hoelder exponent of the coefficients
  bool coefficients_bounded = false;
  bool coefficients_lipschitz = true;
  std::optional<double> ct_bound;
  // Exact solution as a path-independent map (W_t, t) -> X_t, when one exists.
  std::function<double(double, double)> exact_solution;

  bool has_exact() const { return static_cast<bool>(exact_solution); }
  void validate() const;
};

struct Partition {
  std::vector<double> nodes;  // 0 = t_0 < t_1 < ... < t_n = T

  static Partition equidistant(double horizon, int n);
  static Partition from_nodes(std::vector<double> nodes);

  double mesh() const;
  double horizon() const { return nodes.back(); }
  int steps() const { return static_cast<int>(nodes.size()) - 1; }
  void validate() const;
};

enum class Scheme { EulerDiscrete, EulerContinuous, Milstein };

std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);

// Terminal values of the scheme and of the exact solution on a shared
// Brownian driver. Non-finite paths are recorded in `valid` and excluded
// from downstream estimates.
struct CoupledSample {
  std::vector<double> scheme_terminal;
  std::vector<double> exact_terminal;   // empty when the spec has no exact solution
  std::vector<double> brownian_terminal;
  std::vector<std::uint8_t> valid;
  std::size_t invalid_count = 0;
  std::uint64_t seed = 0;
  Scheme scheme = Scheme::EulerDiscrete;
  Partition partition;
  bool fine_reference = false;  // exact_terminal produced by a finer scheme run

  double exclusion_rate() const {
    return scheme_terminal.empty()
               ? 0.0
               : static_cast<double>(invalid_count) / scheme_terminal.size();
  }
};

// OpenMP-parallel driver. Path i is a pure function of (seed, i), so the
// output is bit-identical to simulate_serial for every thread count.
CoupledSample simulate(const SdeSpec& spec, const Partition& partition, Scheme scheme,
                       std::size_t n_paths, std::uint64_t seed);

// Serial reference implementation, kept for testing the parallel kernels.
CoupledSample simulate_serial(const SdeSpec& spec, const Partition& partition,
                              Scheme scheme, std::size_t n_paths, std::uint64_t seed);

// Coupled run against a fine Euler reference on a refinement of `partition`
// (same Brownian path; coarse increments are sums of fine ones). Used when no
// exact solution exists. `refine` is the number of fine steps per coarse step.
CoupledSample simulate_with_fine_reference(const SdeSpec& spec, const Partition& partition,
                                           Scheme scheme, int refine, std::size_t n_paths,
                                           std::uint64_t seed);

// Continuous-time Euler values at the query times, jointly with the Brownian
// path there (bridge-conditioned between nodes). Row-major: path * times.
struct ContinuousPaths {
  std::vector<double> times;
  std::vector<double> scheme_values;
  std::vector<double> brownian_values;
  std::size_t n_paths = 0;

  double scheme_at(std::size_t path, std::size_t q) const {
    return scheme_values[path * times.size() + q];
  }
  double brownian_at(std::size_t path, std::size_t q) const {
    return brownian_values[path * times.size() + q];
  }
};

ContinuousPaths simulate_euler_continuous(const SdeSpec& spec, const Partition& partition,
                                          std::span<const double> query_times,
                                          std::size_t n_paths, std::uint64_t seed,
                                          bool parallel = true);

// Per-path sup over the monitoring grid of |X_t - X_t^E| with X_t evaluated
// through the spec's exact solution at bridge-consistent Brownian values.
std::vector<double> euler_sup_error_paths(const SdeSpec& spec, const Partition& partition,
                                          std::span<const double> monitor_times,
                                          std::size_t n_paths, std::uint64_t seed);

// Terminal value of S_t = exp(W_t - t/2) per Brownian terminal value.
std::vector<double> exact_gbm_terminal(std::span<const double> brownian_terminal, double t);

}  // namespace sderates::sde
