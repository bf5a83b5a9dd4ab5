#pragma once

#include <functional>
#include <stdexcept>
#include <string>

namespace sderates::quad {

struct QuadratureError : std::runtime_error {
  QuadratureError(const std::string& msg, double achieved)
      : std::runtime_error(msg), achieved_tolerance(achieved) {}
  double achieved_tolerance;
};

struct Options {
  double rel_tol = 1e-9;
  double abs_tol = 1e-300;
  int max_intervals = 20000;
  // Expansion stops once a dyadic segment contributes less than this
  // fraction of the running total (improper integrals only).
  double tail_cutoff = 1e-14;
};

// Adaptive Gauss-Kronrod (G7/K15) on a finite interval.
double integrate(const std::function<double(double)>& f, double lo, double hi,
                 const Options& opts = {});

// Integral over (lo, hi) where either endpoint may be infinite. Infinite
// directions are covered by dyadically expanding segments until the tail
// contribution falls below opts.tail_cutoff of the running total.
double integrate_improper(const std::function<double(double)>& f, double lo, double hi,
                          const Options& opts = {});

}  // namespace sderates::quad
