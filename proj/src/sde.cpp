#include "sderates/sde.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sderates/rng.hpp"

namespace sderates::sde {

void SdeSpec::validate() const {
  if (!(horizon > 0.0)) throw std::invalid_argument("SdeSpec: horizon must be > 0");
  if (!(holder_alpha >= 0.5))
    throw std::invalid_argument("SdeSpec: holder_alpha must be >= 1/2");
  if (!sigma || !drift)
    throw std::invalid_argument("SdeSpec: sigma and drift coefficients are required");
}

Partition Partition::equidistant(double horizon, int n) {
  if (n < 1) throw std::invalid_argument("Partition: need at least one step");
  if (!(horizon > 0.0)) throw std::invalid_argument("Partition: horizon must be > 0");
  Partition p;
  p.nodes.resize(n + 1);
  for (int i = 0; i <= n; ++i) p.nodes[i] = horizon * static_cast<double>(i) / n;
  p.nodes[0] = 0.0;
  p.nodes[n] = horizon;
  return p;
}

Partition Partition::from_nodes(std::vector<double> nodes) {
  Partition p;
  p.nodes = std::move(nodes);
  p.validate();
  return p;
}

void Partition::validate() const {
  if (nodes.size() < 2) throw std::invalid_argument("Partition: need at least two nodes");
  if (nodes.front() != 0.0) throw std::invalid_argument("Partition: nodes must start at 0");
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
    if (!(nodes[i] < nodes[i + 1]))
      throw std::invalid_argument("Partition: nodes must be strictly increasing");
  if (!(nodes.back() > 0.0)) throw std::invalid_argument("Partition: horizon must be > 0");
}

double Partition::mesh() const {
  double m = 0.0;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
    m = std::max(m, nodes[i + 1] - nodes[i]);
  return m;
}

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::EulerDiscrete: return "euler";
    case Scheme::EulerContinuous: return "euler_continuous";
    case Scheme::Milstein: return "milstein";
  }
  return "?";
}

Scheme scheme_from_string(const std::string& s) {
  if (s == "euler") return Scheme::EulerDiscrete;
  if (s == "euler_continuous") return Scheme::EulerContinuous;
  if (s == "milstein") return Scheme::Milstein;
  throw std::invalid_argument("unknown scheme: " + s);
}

namespace {

struct PathResult {
  double terminal = 0.0;
  double brownian = 0.0;
  bool ok = true;
};

// One scheme path. Step i consumes the i-th normal of the stream, so Euler
// and Milstein runs under the same seed share their Brownian increments.
PathResult run_path(const SdeSpec& spec, const std::vector<double>& nodes, Scheme scheme,
                    std::uint64_t seed, std::uint64_t path) {
  rng::PathStream stream(seed, path);
  const bool milstein = scheme == Scheme::Milstein;
  double x = spec.x0;
  double w = 0.0;
  bool ok = true;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    const double t = nodes[i];
    const double dt = nodes[i + 1] - nodes[i];
    const double dw = stream.normal() * std::sqrt(dt);
    w += dw;
    if (ok) {
      const double sig = spec.sigma(t, x);
      const double b = spec.drift(t, x);
      double next = x + b * dt + sig * dw;
      if (milstein) next += 0.5 * sig * spec.sigma_dx(t, x) * (dw * dw - dt);
      if (!std::isfinite(next)) {
        ok = false;
      } else {
        x = next;
      }
    }
  }
  return {x, w, ok};
}

// Coarse scheme path driven by increments aggregated from a fine Euler path
// on the refined partition; the fine terminal value serves as the reference.
struct FinePathResult {
  double coarse_terminal = 0.0;
  double fine_terminal = 0.0;
  double brownian = 0.0;
  bool ok = true;
};

FinePathResult run_path_fine_reference(const SdeSpec& spec, const std::vector<double>& nodes,
                                       Scheme scheme, int refine, std::uint64_t seed,
                                       std::uint64_t path) {
  rng::PathStream stream(seed, path);
  const bool milstein = scheme == Scheme::Milstein;
  double coarse = spec.x0;
  double fine = spec.x0;
  double w = 0.0;
  bool ok = true;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    const double t = nodes[i];
    const double dt = nodes[i + 1] - nodes[i];
    const double dt_fine = dt / refine;
    double dw_coarse = 0.0;
    for (int j = 0; j < refine; ++j) {
      const double tj = t + j * dt_fine;
      const double dw = stream.normal() * std::sqrt(dt_fine);
      dw_coarse += dw;
      if (ok) {
        const double next = fine + spec.drift(tj, fine) * dt_fine + spec.sigma(tj, fine) * dw;
        if (!std::isfinite(next))
          ok = false;
        else
          fine = next;
      }
    }
    w += dw_coarse;
    if (ok) {
      const double sig = spec.sigma(t, coarse);
      const double b = spec.drift(t, coarse);
      double next = coarse + b * dt + sig * dw_coarse;
      if (milstein) next += 0.5 * sig * spec.sigma_dx(t, coarse) * (dw_coarse * dw_coarse - dt);
      if (!std::isfinite(next))
        ok = false;
      else
        coarse = next;
    }
  }
  return {coarse, fine, w, ok};
}

void check_simulation_inputs(const SdeSpec& spec, const Partition& partition, Scheme scheme,
                             std::size_t n_paths) {
  spec.validate();
  partition.validate();
  if (n_paths < 1) throw std::invalid_argument("simulate: n_paths must be >= 1");
  if (scheme == Scheme::Milstein && !spec.sigma_dx)
    throw std::invalid_argument(
        "Milstein scheme requires the state derivative of sigma (assumption (iv))");
}

template <typename Kernel>
void for_each_path(std::size_t n_paths, bool parallel, Kernel&& kernel) {
  if (parallel) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n_paths); ++i)
      kernel(static_cast<std::size_t>(i));
  } else {
    for (std::size_t i = 0; i < n_paths; ++i) kernel(i);
  }
}

CoupledSample simulate_impl(const SdeSpec& spec, const Partition& partition, Scheme scheme,
                            std::size_t n_paths, std::uint64_t seed, bool parallel) {
  check_simulation_inputs(spec, partition, scheme, n_paths);
  if (scheme == Scheme::EulerContinuous)
    scheme = Scheme::EulerDiscrete;  // terminal values coincide at nodes

  CoupledSample out;
  out.seed = seed;
  out.scheme = scheme;
  out.partition = partition;
  out.scheme_terminal.resize(n_paths);
  out.brownian_terminal.resize(n_paths);
  out.valid.assign(n_paths, 1);
  const bool exact = spec.has_exact();
  if (exact) out.exact_terminal.resize(n_paths);
  const double horizon = partition.horizon();

  for_each_path(n_paths, parallel, [&](std::size_t i) {
    const PathResult r = run_path(spec, partition.nodes, scheme, seed, i);
    out.scheme_terminal[i] = r.terminal;
    out.brownian_terminal[i] = r.brownian;
    out.valid[i] = r.ok ? 1 : 0;
    if (exact) out.exact_terminal[i] = spec.exact_solution(r.brownian, horizon);
  });

  out.invalid_count = static_cast<std::size_t>(
      std::count(out.valid.begin(), out.valid.end(), std::uint8_t{0}));
  return out;
}

}  // namespace

CoupledSample simulate(const SdeSpec& spec, const Partition& partition, Scheme scheme,
                       std::size_t n_paths, std::uint64_t seed) {
  return simulate_impl(spec, partition, scheme, n_paths, seed, true);
}

CoupledSample simulate_serial(const SdeSpec& spec, const Partition& partition, Scheme scheme,
                              std::size_t n_paths, std::uint64_t seed) {
  return simulate_impl(spec, partition, scheme, n_paths, seed, false);
}

CoupledSample simulate_with_fine_reference(const SdeSpec& spec, const Partition& partition,
                                           Scheme scheme, int refine, std::size_t n_paths,
                                           std::uint64_t seed) {
  check_simulation_inputs(spec, partition, scheme, n_paths);
  if (refine < 2)
    throw std::invalid_argument("simulate_with_fine_reference: refine must be >= 2");
  if (scheme == Scheme::EulerContinuous) scheme = Scheme::EulerDiscrete;

  CoupledSample out;
  out.seed = seed;
  out.scheme = scheme;
  out.partition = partition;
  out.fine_reference = true;
  out.scheme_terminal.resize(n_paths);
  out.exact_terminal.resize(n_paths);
  out.brownian_terminal.resize(n_paths);
  out.valid.assign(n_paths, 1);

  for_each_path(n_paths, true, [&](std::size_t i) {
    const FinePathResult r =
        run_path_fine_reference(spec, partition.nodes, scheme, refine, seed, i);
    out.scheme_terminal[i] = r.coarse_terminal;
    out.exact_terminal[i] = r.fine_terminal;
    out.brownian_terminal[i] = r.brownian;
    out.valid[i] = r.ok ? 1 : 0;
  });

  out.invalid_count = static_cast<std::size_t>(
      std::count(out.valid.begin(), out.valid.end(), std::uint8_t{0}));
  return out;
}

ContinuousPaths simulate_euler_continuous(const SdeSpec& spec, const Partition& partition,
                                          std::span<const double> query_times,
                                          std::size_t n_paths, std::uint64_t seed,
                                          bool parallel) {
  check_simulation_inputs(spec, partition, Scheme::EulerDiscrete, n_paths);
  const double horizon = partition.horizon();
  for (double t : query_times)
    if (!(t >= 0.0 && t <= horizon))
      throw std::invalid_argument("simulate_euler_continuous: query time outside [0, T]");

  ContinuousPaths out;
  out.times.assign(query_times.begin(), query_times.end());
  out.n_paths = n_paths;
  out.scheme_values.resize(n_paths * out.times.size());
  out.brownian_values.resize(n_paths * out.times.size());

  const std::vector<double>& nodes = partition.nodes;
  const std::size_t n_steps = nodes.size() - 1;

  // Query order within each node interval, sorted for sequential bridging.
  std::vector<std::size_t> order(out.times.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return out.times[a] < out.times[b]; });

  for_each_path(n_paths, parallel, [&](std::size_t p) {
    rng::PathStream stream(seed, p);
    // Node-level scheme and Brownian values; draws 0..n_steps-1 are the node
    // increments, so node values agree bitwise with the discrete scheme.
    std::vector<double> xs(nodes.size()), ws(nodes.size());
    xs[0] = spec.x0;
    ws[0] = 0.0;
    for (std::size_t i = 0; i < n_steps; ++i) {
      const double dt = nodes[i + 1] - nodes[i];
      const double dw = stream.normal() * std::sqrt(dt);
      ws[i + 1] = ws[i] + dw;
      xs[i + 1] =
          xs[i] + spec.drift(nodes[i], xs[i]) * dt + spec.sigma(nodes[i], xs[i]) * dw;
    }
    // Bridge draws come after the node increments, in ascending query order.
    std::size_t k = 0;          // current interval [nodes[k], nodes[k+1])
    double w_prev = ws[0];      // Brownian value at the previous conditioning time
    double t_prev = nodes[0];
    for (std::size_t qi : order) {
      const double t = out.times[qi];
      while (k + 1 < n_steps && t >= nodes[k + 1]) {
        ++k;
        t_prev = nodes[k];
        w_prev = ws[k];
      }
      double w_t;
      const auto node_hit = std::lower_bound(nodes.begin(), nodes.end(), t);
      if (node_hit != nodes.end() && *node_hit == t) {
        const std::size_t idx = static_cast<std::size_t>(node_hit - nodes.begin());
        w_t = ws[idx];
        out.scheme_values[p * out.times.size() + qi] = xs[idx];
        out.brownian_values[p * out.times.size() + qi] = w_t;
        t_prev = t;
        w_prev = w_t;
        continue;
      }
      const double t_next = nodes[k + 1];
      const double w_next = ws[k + 1];
      // Brownian bridge between (t_prev, w_prev) and (t_next, w_next).
      const double frac = (t - t_prev) / (t_next - t_prev);
      const double mean = w_prev + frac * (w_next - w_prev);
      const double var = (t - t_prev) * (t_next - t) / (t_next - t_prev);
      w_t = mean + std::sqrt(var) * stream.normal();
      const double x =
          xs[k] + spec.sigma(nodes[k], xs[k]) * (w_t - ws[k]) +
          spec.drift(nodes[k], xs[k]) * (t - nodes[k]);
      out.scheme_values[p * out.times.size() + qi] = x;
      out.brownian_values[p * out.times.size() + qi] = w_t;
      t_prev = t;
      w_prev = w_t;
    }
  });
  return out;
}

std::vector<double> euler_sup_error_paths(const SdeSpec& spec, const Partition& partition,
                                          std::span<const double> monitor_times,
                                          std::size_t n_paths, std::uint64_t seed) {
  check_simulation_inputs(spec, partition, Scheme::EulerDiscrete, n_paths);
  if (!spec.has_exact())
    throw std::invalid_argument("euler_sup_error_paths: spec has no exact solution");
  const double horizon = partition.horizon();
  std::vector<double> times(monitor_times.begin(), monitor_times.end());
  std::sort(times.begin(), times.end());
  for (double t : times)
    if (!(t >= 0.0 && t <= horizon))
      throw std::invalid_argument("euler_sup_error_paths: monitor time outside [0, T]");

  const std::vector<double>& nodes = partition.nodes;
  const std::size_t n_steps = nodes.size() - 1;
  std::vector<double> sups(n_paths, 0.0);

  for_each_path(n_paths, true, [&](std::size_t p) {
    rng::PathStream stream(seed, p);
    std::vector<double> xs(nodes.size()), ws(nodes.size());
    xs[0] = spec.x0;
    ws[0] = 0.0;
    for (std::size_t i = 0; i < n_steps; ++i) {
      const double dt = nodes[i + 1] - nodes[i];
      const double dw = stream.normal() * std::sqrt(dt);
      ws[i + 1] = ws[i] + dw;
      xs[i + 1] =
          xs[i] + spec.drift(nodes[i], xs[i]) * dt + spec.sigma(nodes[i], xs[i]) * dw;
    }
    double sup = 0.0;
    std::size_t k = 0;
    double t_prev = nodes[0], w_prev = ws[0];
    for (double t : times) {
      while (k + 1 < n_steps && t >= nodes[k + 1]) {
        ++k;
        t_prev = nodes[k];
        w_prev = ws[k];
      }
      double w_t, x_scheme;
      const auto node_hit = std::lower_bound(nodes.begin(), nodes.end(), t);
      if (node_hit != nodes.end() && *node_hit == t) {
        const std::size_t idx = static_cast<std::size_t>(node_hit - nodes.begin());
        w_t = ws[idx];
        x_scheme = xs[idx];
      } else {
        const double t_next = nodes[k + 1];
        const double w_next = ws[k + 1];
        const double frac = (t - t_prev) / (t_next - t_prev);
        const double mean = w_prev + frac * (w_next - w_prev);
        const double var = (t - t_prev) * (t_next - t) / (t_next - t_prev);
        w_t = mean + std::sqrt(var) * stream.normal();
        x_scheme = xs[k] + spec.sigma(nodes[k], xs[k]) * (w_t - ws[k]) +
                   spec.drift(nodes[k], xs[k]) * (t - nodes[k]);
      }
      sup = std::max(sup, std::abs(spec.exact_solution(w_t, t) - x_scheme));
      t_prev = t;
      w_prev = w_t;
    }
    sups[p] = sup;
  });
  return sups;
}

std::vector<double> exact_gbm_terminal(std::span<const double> brownian_terminal, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("exact_gbm_terminal: t must be >= 0");
  std::vector<double> out(brownian_terminal.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = std::exp(brownian_terminal[i] - 0.5 * t);
  return out;
}

}  // namespace sderates::sde
