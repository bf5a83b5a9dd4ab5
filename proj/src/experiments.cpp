#include "sderates/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "sderates/bounds.hpp"
#include "sderates/quadrature.hpp"
#include "sderates/rng.hpp"
#include "sderates/stats.hpp"

namespace sderates::mc {

double ErrorEstimate::lp_norm() const { return std::pow(value, 1.0 / p); }

RateReport fit_rate(std::span<const std::pair<double, double>> pairs) {
  if (pairs.size() < 3) throw std::invalid_argument("fit_rate: need >= 3 mesh points");
  double mesh_min = std::numeric_limits<double>::infinity(), mesh_max = 0.0;
  for (const auto& [mesh, value] : pairs) {
    if (!(mesh > 0.0)) throw std::invalid_argument("fit_rate: mesh values must be > 0");
    if (!(value > 0.0))
      throw std::invalid_argument("fit_rate: nonpositive error value; log-log fit undefined");
    mesh_min = std::min(mesh_min, mesh);
    mesh_max = std::max(mesh_max, mesh);
  }
  if (mesh_max / mesh_min < 4.0 * (1.0 - 1e-12))
    throw std::invalid_argument("fit_rate: mesh grid must span at least two octaves");

  std::vector<double> lx(pairs.size()), ly(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    lx[i] = std::log(pairs[i].first);
    ly[i] = std::log(pairs[i].second);
  }
  const stats::LineFit fit = stats::fit_line(lx, ly);
  RateReport report;
  report.fitted_slope = fit.slope;
  const double half =
      pairs.size() > 2 ? stats::student_t_975(pairs.size() - 2) * fit.slope_stderr : 0.0;
  report.slope_ci = {fit.slope - half, fit.slope + half};
  for (const auto& [mesh, value] : pairs) report.mesh_grid.push_back(mesh);
  return report;
}

namespace {

ErrorEstimate reduce_summands(const std::vector<double>& summands,
                              const std::vector<std::uint8_t>& valid, double p, double mesh) {
  std::vector<double> kept;
  kept.reserve(summands.size());
  for (std::size_t i = 0; i < summands.size(); ++i)
    if (valid.empty() || valid[i]) kept.push_back(summands[i]);
  const stats::MeanSe ms = stats::mean_and_se(kept);
  ErrorEstimate est;
  est.value = ms.mean;
  est.std_error = ms.std_error;
  est.n_paths = kept.size();
  est.p = p;
  est.mesh = mesh;
  est.excluded = summands.size() - kept.size();
  return est;
}

}  // namespace

ErrorEstimate functional_error_from_sample(const sde::CoupledSample& sample,
                                           const func::FunctionalRep& g, double p) {
  if (sample.exact_terminal.empty())
    throw std::invalid_argument("functional_error_from_sample: sample has no reference leg");
  std::vector<double> summands(sample.scheme_terminal.size());
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(summands.size()); ++i) {
    const double d = std::abs(g(sample.exact_terminal[i]) - g(sample.scheme_terminal[i]));
    summands[i] = std::pow(d, p);
  }
  ErrorEstimate est = reduce_summands(summands, sample.valid, p, sample.partition.mesh());
  est.fine_reference = sample.fine_reference;
  return est;
}

ErrorEstimate strong_error_from_sample(const sde::CoupledSample& sample, double p) {
  if (sample.exact_terminal.empty())
    throw std::invalid_argument("strong_error_from_sample: sample has no reference leg");
  std::vector<double> summands(sample.scheme_terminal.size());
  for (std::size_t i = 0; i < summands.size(); ++i)
    summands[i] = std::pow(std::abs(sample.exact_terminal[i] - sample.scheme_terminal[i]), p);
  ErrorEstimate est = reduce_summands(summands, sample.valid, p, sample.partition.mesh());
  est.fine_reference = sample.fine_reference;
  return est;
}

double strong_lp_norm_log(const sde::CoupledSample& sample, double p) {
  if (sample.exact_terminal.empty())
    throw std::invalid_argument("strong_lp_norm_log: sample has no reference leg");
  if (!(p > 0.0)) throw std::invalid_argument("strong_lp_norm_log: p must be > 0");
  std::vector<double> logs;
  logs.reserve(sample.scheme_terminal.size());
  std::size_t valid = 0;
  for (std::size_t i = 0; i < sample.scheme_terminal.size(); ++i) {
    if (!sample.valid.empty() && !sample.valid[i]) continue;
    ++valid;
    const double d = std::abs(sample.exact_terminal[i] - sample.scheme_terminal[i]);
    if (d > 0.0) logs.push_back(p * std::log(d));
  }
  if (valid == 0 || logs.empty()) return 0.0;
  const double peak = *std::max_element(logs.begin(), logs.end());
  double acc = 0.0;
  for (double l : logs) acc += std::exp(l - peak);
  const double log_moment = peak + std::log(acc) - std::log(static_cast<double>(valid));
  return std::exp(log_moment / p);
}

namespace {

int fine_reference_refinement(const sde::Partition& partition) {
  const double mesh = partition.mesh();
  const double horizon = partition.horizon();
  // Fine mesh at most mesh^2 * T.
  const double target = mesh * mesh * horizon;
  return std::max(2, static_cast<int>(std::ceil(mesh / target)));
}

sde::CoupledSample simulate_for_reference(const sde::SdeSpec& spec, sde::Scheme scheme,
                                          const sde::Partition& partition,
                                          std::size_t n_paths, std::uint64_t seed,
                                          const FunctionalErrorOptions& opts) {
  if (spec.has_exact()) {
    sde::CoupledSample sample = sde::simulate(spec, partition, scheme, n_paths, seed);
    if (opts.independent_driver) {
      const std::uint64_t ref_seed = rng::derive_seed(seed, 0x1DEABul, 7);
      const double horizon = partition.horizon();
#pragma omp parallel for schedule(static)
      for (long long i = 0; i < static_cast<long long>(n_paths); ++i) {
        rng::PathStream stream(ref_seed, static_cast<std::uint64_t>(i));
        sample.exact_terminal[i] =
            spec.exact_solution(stream.normal() * std::sqrt(horizon), horizon);
      }
    }
    return sample;
  }
  if (!opts.allow_fine_reference)
    throw std::invalid_argument(
        "estimate_functional_error: no exact solution; enable the fine-mesh reference "
        "fallback explicitly");
  if (opts.independent_driver)
    throw std::invalid_argument("independent_driver requires an exact solution");
  return sde::simulate_with_fine_reference(spec, partition, scheme,
                                           fine_reference_refinement(partition), n_paths,
                                           seed);
}

}  // namespace

ErrorEstimate estimate_functional_error(const sde::SdeSpec& spec, sde::Scheme scheme,
                                        const sde::Partition& partition,
                                        const func::FunctionalRep& g, double p,
                                        std::size_t n_paths, std::uint64_t seed,
                                        const FunctionalErrorOptions& opts) {
  const sde::CoupledSample sample =
      simulate_for_reference(spec, scheme, partition, n_paths, seed, opts);
  return functional_error_from_sample(sample, g, p);
}

ErrorEstimate estimate_strong_error(const sde::SdeSpec& spec, sde::Scheme scheme,
                                    const sde::Partition& partition, double p,
                                    std::size_t n_paths, std::uint64_t seed, bool sup_norm,
                                    std::size_t monitor_points) {
  if (sup_norm) {
    if (scheme == sde::Scheme::Milstein)
      throw std::invalid_argument(
          "estimate_strong_error: continuous-time Milstein is not defined; sup_norm "
          "requires the Euler scheme");
    const double horizon = partition.horizon();
    std::vector<double> times(monitor_points);
    for (std::size_t i = 0; i < monitor_points; ++i)
      times[i] = horizon * static_cast<double>(i) / static_cast<double>(monitor_points - 1);
    for (double node : partition.nodes) times.push_back(node);
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    const std::vector<double> sups =
        sde::euler_sup_error_paths(spec, partition, times, n_paths, seed);
    std::vector<double> summands(sups.size());
    for (std::size_t i = 0; i < sups.size(); ++i) summands[i] = std::pow(sups[i], p);
    return reduce_summands(summands, {}, p, partition.mesh());
  }
  FunctionalErrorOptions opts;
  opts.allow_fine_reference = true;
  const sde::CoupledSample sample =
      simulate_for_reference(spec, scheme, partition, n_paths, seed, opts);
  return strong_error_from_sample(sample, p);
}

RateReport run_strong_rate(const sde::SdeSpec& spec, sde::Scheme scheme,
                           std::span<const int> n_grid, double p, std::size_t n_paths,
                           std::uint64_t seed, bool sup_norm) {
  std::vector<std::pair<double, double>> pairs;
  std::vector<ErrorEstimate> estimates;
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    const sde::Partition part = sde::Partition::equidistant(spec.horizon, n_grid[i]);
    const ErrorEstimate est = estimate_strong_error(
        spec, scheme, part, p, n_paths, rng::derive_seed(seed, 1, i), sup_norm);
    estimates.push_back(est);
    pairs.emplace_back(est.mesh, est.lp_norm());
  }
  RateReport report = fit_rate(pairs);
  report.estimates = std::move(estimates);
  report.reference_slope = scheme == sde::Scheme::Milstein ? 1.0 : 0.5;
  report.scheme_tag = sde::to_string(scheme);
  report.functional_id = sup_norm ? "strong_sup" : "strong_terminal";
  return report;
}

RateReport run_functional_rate(const sde::SdeSpec& spec, sde::Scheme scheme,
                               const func::FunctionalRep& g, double p,
                               std::span<const int> n_grid, std::size_t n_paths,
                               std::uint64_t seed, double reference_slope) {
  FunctionalErrorOptions opts;
  opts.allow_fine_reference = true;
  std::vector<std::pair<double, double>> pairs;
  std::vector<ErrorEstimate> estimates;
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    const sde::Partition part = sde::Partition::equidistant(spec.horizon, n_grid[i]);
    const ErrorEstimate est = estimate_functional_error(
        spec, scheme, part, g, p, n_paths, rng::derive_seed(seed, 2, i), opts);
    estimates.push_back(est);
    pairs.emplace_back(est.mesh, est.value);
  }
  RateReport report = fit_rate(pairs);
  report.estimates = std::move(estimates);
  report.reference_slope = reference_slope;
  report.scheme_tag = sde::to_string(scheme);
  report.functional_id = g.id().empty() ? "functional" : g.id();
  return report;
}

SharpnessResult sharpness_example(double epsilon, double p) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw std::invalid_argument("sharpness_example: requires 0 < epsilon < 1");
  if (!(p > 0.0)) throw std::invalid_argument("sharpness_example: p must be > 0");
  SharpnessResult out;
  out.indicator_error = epsilon;
  out.lp_moment = std::pow(epsilon, p + 1.0) / std::pow(2.0, p);
  out.bound_value = bounds::indicator_bound(1.0, std::pow(out.lp_moment, 1.0 / p), p);
  out.ratio = out.indicator_error / out.bound_value;
  if (out.indicator_error > out.bound_value || out.ratio < 1.0 / 3.0)
    throw std::logic_error("sharpness_example: bound identity violated");
  return out;
}

std::vector<double> default_lower_bound_k_grid(std::size_t count) {
  // [K0, q_{0.9999}] with K0 = 1 for the law of exp(W_1 - 1/2).
  const double k_hi = std::exp(stats::normal_quantile(0.9999) - 0.5);
  std::vector<double> grid(count);
  for (std::size_t i = 0; i < count; ++i)
    grid[i] = 1.0 + (k_hi - 1.0) * static_cast<double>(i) / static_cast<double>(count - 1);
  return grid;
}

LowerBoundResult lower_bound_harness(std::span<const int> n_grid,
                                     std::span<const double> k_grid, std::size_t n_paths,
                                     std::uint64_t seed) {
  if (k_grid.empty()) throw std::invalid_argument("lower_bound_harness: empty K grid");
  std::vector<double> ks(k_grid.begin(), k_grid.end());
  std::sort(ks.begin(), ks.end());
  if (ks.front() < 1.0)
    throw std::invalid_argument("lower_bound_harness: K grid must stay in [K0, inf), K0 = 1");

  sde::SdeSpec gbm;
  gbm.name = "gbm";
  gbm.sigma = [](double, double x) { return x; };
  gbm.drift = [](double, double) { return 0.0; };
  gbm.sigma_dx = [](double, double) { return 1.0; };
  gbm.x0 = 1.0;
  gbm.horizon = 1.0;
  gbm.exact_solution = [](double w, double t) { return std::exp(w - 0.5 * t); };

  LowerBoundResult out;
  out.k_grid = ks;
  out.min_scaled = std::numeric_limits<double>::infinity();
  for (std::size_t gi = 0; gi < n_grid.size(); ++gi) {
    const int n = n_grid[gi];
    if (n < 1) throw std::invalid_argument("lower_bound_harness: n must be >= 1");
    const sde::Partition part = sde::Partition::equidistant(1.0, n);
    const sde::CoupledSample sample = sde::simulate(
        gbm, part, sde::Scheme::EulerDiscrete, n_paths, rng::derive_seed(seed, 3, gi));

    // chi_{[K,inf)} disagrees exactly for K in (min, max]; accumulate per-K
    // disagreement counts through a difference array over the sorted grid.
    std::vector<long long> diff(ks.size() + 1, 0);
    std::size_t valid = 0;
    for (std::size_t i = 0; i < sample.scheme_terminal.size(); ++i) {
      if (!sample.valid[i]) continue;
      ++valid;
      const double a = std::min(sample.exact_terminal[i], sample.scheme_terminal[i]);
      const double b = std::max(sample.exact_terminal[i], sample.scheme_terminal[i]);
      const auto lo = std::upper_bound(ks.begin(), ks.end(), a) - ks.begin();
      const auto hi = std::upper_bound(ks.begin(), ks.end(), b) - ks.begin();
      if (lo < hi) {
        ++diff[lo];
        --diff[hi];
      }
    }
    long long running = 0;
    double best = -1.0;
    double best_k = ks.front();
    for (std::size_t j = 0; j < ks.size(); ++j) {
      running += diff[j];
      const double prob = static_cast<double>(running) / static_cast<double>(valid);
      if (prob > best) {
        best = prob;
        best_k = ks[j];
      }
    }
    const double scale = std::sqrt(static_cast<double>(n));
    const double se = std::sqrt(best * (1.0 - best) / static_cast<double>(valid));
    out.n_grid.push_back(n);
    out.scaled_max.push_back(scale * best);
    out.scaled_max_se.push_back(scale * se);
    out.argmax_K.push_back(best_k);
    out.min_scaled = std::min(out.min_scaled, scale * best);
  }
  return out;
}

double gbm_disagreement_quadrature(double K, int n_steps) {
  if (!(K > 0.0)) throw std::invalid_argument("gbm_disagreement_quadrature: K must be > 0");
  const double log_threshold = std::log(K) + 0.5;  // S_1 >= K  <=>  W_1 >= this
  quad::Options opts;
  opts.rel_tol = 1e-10;
  if (n_steps == 1) {
    // S_1^E = 1 + W_1; the indicators differ exactly between the thresholds.
    const double a = std::min(log_threshold, K - 1.0);
    const double b = std::max(log_threshold, K - 1.0);
    if (a == b) return 0.0;
    return quad::integrate([](double w) { return stats::normal_pdf(w); }, a, b, opts);
  }
  if (n_steps == 2) {
    const double s = std::sqrt(0.5);
    const double A = log_threshold / s;  // z1 + z2 >= A  <=>  S_1 >= K
    auto inner = [&](double z1) {
      const double a2 = A - z1;
      const double u = 1.0 + s * z1;
      double mismatch;
      if (u > 0.0) {
        const double b2 = (K / u - 1.0) / s;  // Euler event: z2 >= b2
        mismatch = std::abs(stats::normal_cdf(std::max(a2, b2)) -
                            stats::normal_cdf(std::min(a2, b2)));
      } else if (u < 0.0) {
        const double b2 = (K / u - 1.0) / s;  // Euler event flips: z2 <= b2
        mismatch = stats::normal_cdf_upper(std::max(a2, b2)) +
                   stats::normal_cdf(std::min(a2, b2));
      } else {
        mismatch = stats::normal_cdf_upper(a2);
      }
      return stats::normal_pdf(z1) * mismatch;
    };
    return quad::integrate(inner, -12.0, 12.0, opts);
  }
  throw std::invalid_argument("gbm_disagreement_quadrature: only n_steps in {1,2}");
}

DensityProbe density_bound_probe(std::span<const double> sample, std::size_t window_count) {
  if (sample.size() < 1000)
    throw std::invalid_argument("density_bound_probe: need at least 10^3 samples");
  if (window_count < 2) throw std::invalid_argument("density_bound_probe: window_count >= 2");
  std::vector<double> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  DensityProbe out;

  // Exact duplicates carrying visible mass indicate atoms.
  const std::size_t atom_threshold = std::max<std::size_t>(2, sorted.size() / 500);
  std::size_t run = 1;
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    run = sorted[i] == sorted[i - 1] ? run + 1 : 1;
    if (run >= atom_threshold) {
      out.atoms_flagged = true;
      break;
    }
  }

  const double lo = sorted.front(), hi = sorted.back();
  if (!(hi > lo)) {
    out.atoms_flagged = true;
    out.value = std::numeric_limits<double>::infinity();
    return out;
  }
  const double h = (hi - lo) / static_cast<double>(window_count);
  const double n = static_cast<double>(sorted.size());
  double best = 0.0;
  for (std::size_t k = 0; k + 1 < 2 * window_count; ++k) {
    const double a = lo + 0.5 * h * static_cast<double>(k);
    const double b = a + h;
    const auto begin = std::lower_bound(sorted.begin(), sorted.end(), a);
    const auto end = std::upper_bound(sorted.begin(), sorted.end(), b);
    best = std::max(best, static_cast<double>(end - begin) / (n * h));
  }
  out.value = best;
  return out;
}

}  // namespace sderates::mc
