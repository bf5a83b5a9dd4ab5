// Times the OpenMP path kernels against the serial reference implementation
// and verifies that both produce bit-identical terminals.

#include <chrono>
#include <cstdio>
#include <omp.h>

#include "sderates/registry.hpp"
#include "sderates/sde.hpp"

using namespace sderates;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t n_paths = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 200000;
  const int n_steps = argc > 2 ? std::atoi(argv[2]) : 256;
  const sde::SdeSpec spec = registry::model_by_name("gbm");
  const sde::Partition part = sde::Partition::equidistant(spec.horizon, n_steps);

  std::printf("gbm, %zu paths x %d steps, %d threads\n", n_paths, n_steps,
              omp_get_max_threads());
  for (sde::Scheme scheme : {sde::Scheme::EulerDiscrete, sde::Scheme::Milstein}) {
    auto t0 = std::chrono::steady_clock::now();
    const sde::CoupledSample serial = sde::simulate_serial(spec, part, scheme, n_paths, 42);
    const double t_serial = seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    const sde::CoupledSample parallel = sde::simulate(spec, part, scheme, n_paths, 42);
    const double t_parallel = seconds_since(t0);

    bool identical = serial.scheme_terminal == parallel.scheme_terminal &&
                     serial.brownian_terminal == parallel.brownian_terminal;
    std::printf("%-10s serial %7.3fs (%6.2f Mpaths*steps/s)  omp %7.3fs  speedup %.2fx  %s\n",
                sde::to_string(scheme).c_str(), t_serial,
                1e-6 * n_paths * n_steps / t_serial, t_parallel, t_serial / t_parallel,
                identical ? "bit-identical" : "MISMATCH");
    if (!identical) return 1;
  }
  return 0;
}
