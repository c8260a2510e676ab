// Timing comparison between the serial reference kernels and the OpenMP
// kernels.  Both paths produce bit-identical results (see test_parallel);
// this tool only reports throughput.
//
//   bench_kernels [audit_count] [grid_n] [velocity_reps]

#include <chrono>
#include <cstdio>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "defconn/cohom1.hpp"
#include "defconn/hesssym.hpp"

using namespace defconn;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

} // namespace

int main(int argc, char** argv) {
  const int audit_count = argc > 1 ? std::atoi(argv[1]) : 400;
  const int grid_n = argc > 2 ? std::atoi(argv[2]) : 4096;
  const int reps = argc > 3 ? std::atoi(argv[3]) : 200;

  int hw = 1;
#ifdef _OPENMP
  hw = omp_get_max_threads();
#endif
  std::printf("hardware threads available: %d\n\n", hw);

  // Symbol audit sweep: dense 12x12 spectral work per point.
  {
    std::printf("symbol-audit sweep, %d points\n", audit_count);
    auto t0 = std::chrono::steady_clock::now();
    hesssym::SymbolAudit serial = hesssym::symbol_audit(99, audit_count, 1e-9, 0);
    const double ts = seconds_since(t0);
    std::printf("  serial reference: %8.3f s  (worst eig %.3e)\n", ts,
                serial.worst_hess_eig);
    for (int threads : {2, 4, hw}) {
      if (threads <= 1) continue;
      t0 = std::chrono::steady_clock::now();
      hesssym::SymbolAudit par = hesssym::symbol_audit(99, audit_count, 1e-9, threads);
      const double tp = seconds_since(t0);
      const bool same = par.worst_hess_eig == serial.worst_hess_eig;
      std::printf("  %2d threads:       %8.3f s  speedup %5.2fx  identical %s\n",
                  threads, tp, ts / tp, same ? "yes" : "NO");
    }
  }

  // Flow velocity kernel: per-cell pointwise work on a long grid.
  {
    std::printf("\nflow velocity, n = %d, %d evaluations\n", grid_n, reps);
    cohom1::ProfileGrid g = cohom1::round_anisotropic(grid_n, -3.0, 0.02);
    auto t0 = std::chrono::steady_clock::now();
    cohom1::GridField ref;
    for (int r = 0; r < reps; ++r) ref = cohom1::flow_velocity(g, 0);
    const double ts = seconds_since(t0);
    std::printf("  serial reference: %8.3f s\n", ts);
    for (int threads : {2, 4, hw}) {
      if (threads <= 1) continue;
      t0 = std::chrono::steady_clock::now();
      cohom1::GridField par;
      for (int r = 0; r < reps; ++r) par = cohom1::flow_velocity(g, threads);
      const double tp = seconds_since(t0);
      const bool same = ref[0] == par[0] && ref[1] == par[1] && ref[2] == par[2];
      std::printf("  %2d threads:       %8.3f s  speedup %5.2fx  identical %s\n",
                  threads, tp, ts / tp, same ? "yes" : "NO");
    }
  }
  return 0;
}
