#include <doctest.h>

#include <cmath>

#include "defconn/cohom1.hpp"
#include "defconn/hesssym.hpp"

using namespace defconn;

// The library keeps a serial reference path (threads <= 0) next to the
// OpenMP kernels (threads > 0).  These tests pin the contract that the two
// paths produce bit-identical results, so the parallel kernels can be
// validated against the reference at any scale.

TEST_CASE("symbol audit sweep is identical on the serial and parallel paths") {
  const std::uint64_t seed = 321u;
  const int count = 200;
  hesssym::SymbolAudit serial = hesssym::symbol_audit(seed, count, 1e-9, 0);
  for (int threads : {1, 2, 4}) {
    hesssym::SymbolAudit par = hesssym::symbol_audit(seed, count, 1e-9, threads);
    REQUIRE(par.points.size() == serial.points.size());
    for (size_t i = 0; i < par.points.size(); ++i) {
      CHECK(par.points[i].hess_max_eig == serial.points[i].hess_max_eig);
      CHECK(par.points[i].kernel_dim == serial.points[i].kernel_dim);
      CHECK(par.points[i].kernel_projector_err ==
            serial.points[i].kernel_projector_err);
      CHECK(par.points[i].gauge_fixed_max_eig ==
            serial.points[i].gauge_fixed_max_eig);
    }
    CHECK(par.worst_hess_eig == serial.worst_hess_eig);
    CHECK(par.min_kernel_dim == serial.min_kernel_dim);
    CHECK(par.max_kernel_dim == serial.max_kernel_dim);
    CHECK(par.worst_projector_err == serial.worst_projector_err);
    CHECK(par.worst_gauge_fixed_eig == serial.worst_gauge_fixed_eig);
  }
}

TEST_CASE("flow velocity kernel is identical on the serial and parallel paths") {
  for (double amp : {0.0, 0.02, 0.05}) {
    cohom1::ProfileGrid g = cohom1::round_anisotropic(256, -3.0, amp);
    cohom1::GridField ref = cohom1::flow_velocity(g, 0);
    for (int threads : {1, 2, 4, 8}) {
      cohom1::GridField par = cohom1::flow_velocity(g, threads);
      for (int c = 0; c < 3; ++c) CHECK(ref[c] == par[c]);
    }
  }
}

TEST_CASE("whole flow runs are identical on the serial and parallel paths") {
  cohom1::ProfileGrid g = cohom1::round_anisotropic(128, -3.0, 0.03);
  cohom1::FlowOptions serial_opts;
  serial_opts.max_steps = 120;
  serial_opts.threads = 0;
  cohom1::FlowResult ref = cohom1::flow_run(g, serial_opts);
  for (int threads : {2, 4}) {
    cohom1::FlowOptions opts = serial_opts;
    opts.threads = threads;
    cohom1::FlowResult par = cohom1::flow_run(g, opts);
    REQUIRE(par.rows.size() == ref.rows.size());
    for (size_t i = 0; i < par.rows.size(); ++i) {
      CHECK(par.rows[i].S == ref.rows[i].S);
      CHECK(par.rows[i].residual_sup == ref.rows[i].residual_sup);
      CHECK(par.rows[i].margin_min == ref.rows[i].margin_min);
    }
    for (int c = 0; c < 3; ++c) CHECK(par.profile.f[c] == ref.profile.f[c]);
  }
}
