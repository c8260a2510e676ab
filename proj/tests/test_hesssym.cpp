#include <doctest.h>

#include <cmath>
#include <cstring>

#include "defconn/errors.hpp"
#include "defconn/hesssym.hpp"
#include "defconn/rng.hpp"
#include "support/sampling.hpp"

using namespace defconn;
using namespace defconn::hesssym;

namespace {

constexpr double kPi = 3.14159265358979323846;

PointFrame flat_frame() {
  CurvatureTriple t;
  for (int i = 0; i < 3; ++i) t.F[i] = forms4::omega(i);
  t.Lambda = 3.0;
  return make_frame(t, 1e-9);
}

SymbolDirection random_direction(const PointFrame& fr, Rng& rng) {
  OneForm eta;
  for (int m = 0; m < 4; ++m) eta.c[m] = rng.normal();
  return make_symbol_direction(fr, eta);
}

} // namespace

TEST_CASE("frame at the flat model point") {
  PointFrame fr = flat_frame();
  CHECK((fr.g.g - std::sqrt(2.0) * Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff() <
        1e-12);
  CHECK(fr.nv.nu_A == doctest::Approx(2.0));
  CHECK(fr.nv.orientation == +1);
  // Cholesky frame really is orthonormal for g.
  CHECK((fr.chol_L * fr.chol_L.transpose() - fr.g.g).cwiseAbs().maxCoeff() < 1e-12);

  OneForm e0;
  e0.c[0] = 1.0;
  SymbolDirection dir = make_symbol_direction(fr, e0);
  // Unit metric length.
  const Eigen::Vector4d v(dir.eta.c[0], dir.eta.c[1], dir.eta.c[2], dir.eta.c[3]);
  CHECK(v.dot(fr.g.g.inverse() * v) == doctest::Approx(1.0));
  CHECK(dir.eta_on.norm() == doctest::Approx(1.0));

  OneForm zero;
  CHECK_THROWS_AS(make_symbol_direction(fr, zero), Error);
}

TEST_CASE("flat model: pinned symbol spectra") {
  PointFrame fr = flat_frame();
  OneForm e0;
  e0.c[0] = 1.0;
  SymbolDirection dir = make_symbol_direction(fr, e0);

  // Rows of the linearized-Gram symbol are orthogonal of squared norm 2.
  Mat6x12 D = delta_symbol(fr, dir);
  CHECK((D * D.transpose() - 2.0 * Eigen::Matrix<double, 6, 6>::Identity())
            .cwiseAbs()
            .maxCoeff() < 1e-12);

  // Hessian symbol spectrum: five copies of -1/(4 pi^2), seven zeros.
  Mat12 H = hessian_symbol(fr, dir, 1e-12);
  Eigen::SelfAdjointEigenSolver<Mat12> es(H);
  const auto& ev = es.eigenvalues();
  const double expected = -1.0 / (4.0 * kPi * kPi);
  for (int i = 0; i < 5; ++i) CHECK(ev[i] == doctest::Approx(expected).epsilon(1e-10));
  for (int i = 5; i < 12; ++i) CHECK(std::abs(ev[i]) < 1e-14);
}

TEST_CASE("diffeomorphism directions map to the base Gram exactly") {
  Rng rng(501);
  for (int n = 0; n < 100; ++n) {
    const double Lambda = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(1.0, 6.0);
    auto ts = sampling::definite_triple(rng, Lambda);
    PointFrame fr = make_frame(ts.F, 1e-9);
    SymbolDirection dir = random_direction(fr, rng);

    const Mat6x12 D = delta_symbol(fr, dir);
    const Mat12x4 f = f_matrix(fr);
    const sym3::Vec6 ma = sym3::to_onb(fr.nv.M_A);
    const double scale = ma.norm();
    for (int d = 0; d < 4; ++d) {
      sym3::Vec6 got = D * f.col(d);
      sym3::Vec6 expect = dir.eta.c[d] * ma;
      CHECK((got - expect).cwiseAbs().maxCoeff() < 1e-11 * scale);
    }
  }
}

TEST_CASE("adjoint symbol: closed form equals the transpose") {
  Rng rng(502);
  for (int n = 0; n < 200; ++n) {
    const double Lambda = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(1.0, 6.0);
    auto ts = sampling::definite_triple(rng, Lambda);
    PointFrame fr = make_frame(ts.F, 1e-9);
    SymbolDirection dir = random_direction(fr, rng);

    const Mat12x6 At = delta_adjoint_symbol(fr, dir);
    const Sym3 N = sampling::sym3(rng);
    const Vec12 via_transpose = At * sym3::to_onb(N);
    const Vec12 via_formula = to_on(fr, delta_adjoint_explicit(fr, dir, N));
    const double scale = std::max(1.0, via_transpose.cwiseAbs().maxCoeff());
    CHECK((via_transpose - via_formula).cwiseAbs().maxCoeff() < 1e-10 * scale);
  }
}

TEST_CASE("coordinate maps invert each other") {
  Rng rng(503);
  auto ts = sampling::definite_triple(rng, 3.0);
  PointFrame fr = make_frame(ts.F, 1e-9);
  for (int n = 0; n < 100; ++n) {
    Vec12 v;
    for (int i = 0; i < 12; ++i) v[i] = rng.normal();
    Vec12 back = to_on(fr, from_on(fr, v));
    CHECK((v - back).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("hessian symbol: negativity, kernel dimension, gauge compatibility") {
  Rng rng(504);
  for (int n = 0; n < 60; ++n) {
    const double Lambda = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(1.0, 6.0);
    auto ts = sampling::definite_triple(rng, Lambda);
    PointFrame fr = make_frame(ts.F, 1e-9);
    SymbolDirection dir = random_direction(fr, rng);

    const Mat12 H = hessian_symbol(fr, dir, 1e-12);
    Eigen::SelfAdjointEigenSolver<Mat12> es(H);
    const auto& ev = es.eigenvalues();
    const double rho = std::max(std::abs(ev[0]), std::abs(ev[11]));
    CHECK(ev[11] <= 1e-9 * rho);  // negative semidefinite
    int kdim = 0;
    for (int i = 0; i < 12; ++i)
      if (std::abs(ev[i]) <= 1e-9 * rho) ++kdim;
    CHECK(kdim == 7);

    // The gauge symbol image lies in the kernel.
    const Mat12x7 G = gauge_symbol(fr, dir);
    CHECK((H * G).cwiseAbs().maxCoeff() < 1e-10 * rho * G.cwiseAbs().maxCoeff());

    // And spans it: projectors agree.
    Mat12 pnum = Mat12::Zero();
    for (int i = 0; i < 12; ++i)
      if (std::abs(ev[i]) <= 1e-9 * rho)
        pnum += es.eigenvectors().col(i) * es.eigenvectors().col(i).transpose();
    Eigen::HouseholderQR<Mat12x7> qr(G);
    const Mat12 fq = qr.householderQ() * Mat12::Identity();
    const Eigen::Matrix<double, 12, 7> q = fq.leftCols<7>();
    CHECK((pnum - q * q.transpose()).norm() < 1e-8);
  }
}

TEST_CASE("gauge-fixed symbol: negative definite transverse to diffeomorphisms") {
  Rng rng(505);
  for (int n = 0; n < 60; ++n) {
    const double Lambda = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(1.0, 6.0);
    auto ts = sampling::definite_triple(rng, Lambda);
    PointFrame fr = make_frame(ts.F, 1e-9);
    SymbolDirection dir = random_direction(fr, rng);

    GaugeFixedSymbol gf = gauge_fixed_symbol(fr, dir, 1e-12);
    CHECK(gf.wA_max_eigenvalue < 0.0);

    // The diffeomorphism image is annihilated.
    const Mat12x4 f = f_matrix(fr);
    CHECK((gf.matrix * f).cwiseAbs().maxCoeff() <
          1e-10 * f.cwiseAbs().maxCoeff() *
              std::max(1.0, gf.matrix.cwiseAbs().maxCoeff()));

    // Kernel is exactly four dimensional.
    Eigen::SelfAdjointEigenSolver<Mat12> es(gf.matrix);
    const auto& ev = es.eigenvalues();
    const double rho = std::abs(ev[0]);
    int kdim = 0;
    for (int i = 0; i < 12; ++i)
      if (std::abs(ev[i]) <= 1e-9 * rho) ++kdim;
    CHECK(kdim == 4);
    // Basis of the complement is orthonormal and orthogonal to the image.
    CHECK((gf.w_basis.transpose() * gf.w_basis -
           Eigen::Matrix<double, 8, 8>::Identity())
              .cwiseAbs()
              .maxCoeff() < 1e-12);
    CHECK((gf.w_basis.transpose() * f).cwiseAbs().maxCoeff() <
          1e-10 * f.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("transverse projector") {
  Rng rng(506);
  auto ts = sampling::definite_triple(rng, 3.0);
  PointFrame fr = make_frame(ts.F, 1e-9);
  const Mat12 P = proj_W(fr);
  CHECK((P * P - P).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((P - P.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(P.trace() == doctest::Approx(8.0));
  const Mat12x4 f = f_matrix(fr);
  CHECK((P * f).cwiseAbs().maxCoeff() < 1e-11 * f.cwiseAbs().maxCoeff());
}

TEST_CASE("seeded audit: parallel equals serial bit for bit") {
  const SymbolAudit serial = symbol_audit(9090, 40, 1e-9, 0);
  const SymbolAudit parallel = symbol_audit(9090, 40, 1e-9, 4);
  REQUIRE(serial.points.size() == parallel.points.size());
  auto same_bits = [](double a, double b) {
    return std::memcmp(&a, &b, sizeof(double)) == 0;
  };
  for (size_t i = 0; i < serial.points.size(); ++i) {
    const PointAudit& s = serial.points[i];
    const PointAudit& p = parallel.points[i];
    CHECK(same_bits(s.hess_max_eig, p.hess_max_eig));
    CHECK(s.kernel_dim == p.kernel_dim);
    CHECK(same_bits(s.kernel_projector_err, p.kernel_projector_err));
    CHECK(same_bits(s.gauge_fixed_max_eig, p.gauge_fixed_max_eig));
  }
  CHECK(serial.min_kernel_dim == 7);
  CHECK(serial.max_kernel_dim == 7);
  CHECK(serial.worst_hess_eig <= 1e-9);
  CHECK(serial.worst_projector_err <= 1e-8);
  CHECK(serial.worst_gauge_fixed_eig < 0.0);
}
