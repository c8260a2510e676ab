#include <doctest.h>

#include <cmath>

#include "defconn/errors.hpp"
#include "defconn/rng.hpp"
#include "defconn/sym3.hpp"

using namespace defconn;
using namespace defconn::sym3;

namespace {

Eigen::Matrix3d diag(double a, double b, double c) {
  return Eigen::Vector3d(a, b, c).asDiagonal();
}

Sym3 random_sym(Rng& rng) {
  Eigen::Matrix3d A;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) A(i, j) = rng.normal();
  return Sym3::from(Eigen::Matrix3d(0.5 * (A + A.transpose())));
}

Sym3 random_spd(Rng& rng, double lo, double hi) {
  Eigen::Matrix3d A;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) A(i, j) = rng.normal();
  Eigen::HouseholderQR<Eigen::Matrix3d> qr(A);
  Eigen::Matrix3d Q = qr.householderQ();
  Eigen::Vector3d ev;
  for (int i = 0; i < 3; ++i) ev[i] = rng.uniform(lo, hi);
  return Sym3::from(Eigen::Matrix3d(Q * ev.asDiagonal() * Q.transpose()));
}

// Rescale an SPD matrix so that tr sqrt(M) = |Lambda|.
Sym3 trace_constrained(const Sym3& s, double Lambda) {
  const double t = spd_sqrt(s, 0.0).mat().trace();
  const double c = std::abs(Lambda) / t;
  return Sym3::from(Eigen::Matrix3d(c * c * s.mat()));
}

double rel_err(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b) {
  const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

} // namespace

TEST_CASE("classification with degeneracy precedence") {
  const double tol = 1e-9;
  CHECK(classify(Sym3::from(diag(1, 2, 3)), tol) == Definiteness::PositiveDefinite);
  CHECK(classify(Sym3::from(diag(-1, -2, -3)), tol) == Definiteness::NegativeDefinite);
  CHECK(classify(Sym3::from(diag(1, -2, 3)), tol) == Definiteness::Indefinite);
  // A near-zero eigenvalue wins over the indefinite pattern.
  CHECK(classify(Sym3::from(diag(1e-12, -5, 3)), tol) == Definiteness::Degenerate);
  CHECK(classify(Sym3::from(diag(1e-12, 5, 3)), tol) == Definiteness::Degenerate);
  // Boundary: |eigenvalue| == tol counts as degenerate.
  CHECK(classify(Sym3::from(diag(tol, 5, 3)), tol) == Definiteness::Degenerate);
  CHECK_THROWS_AS(classify(Sym3::identity(), -1.0), Error);
}

TEST_CASE("principal square roots") {
  Rng rng(201);
  for (int n = 0; n < 2000; ++n) {
    Sym3 m = random_spd(rng, 0.05, 20.0);
    Sym3 r = spd_sqrt(m, 1e-12);
    CHECK(rel_err(r.mat() * r.mat(), m.mat()) < 1e-12);
    CHECK(classify(r, 0.0) == Definiteness::PositiveDefinite);
    Sym3 ri = spd_inv_sqrt(m, 1e-12);
    CHECK(rel_err(ri.mat() * m.mat() * ri.mat(), Eigen::Matrix3d::Identity()) < 1e-11);
  }
  CHECK_THROWS_AS(spd_sqrt(Sym3::from(diag(1, -1, 2)), 1e-9), Error);
  try {
    spd_sqrt(Sym3::from(diag(1, -1, 2)), 1e-9);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotSymmetricPositive);
  }
}

TEST_CASE("square root branches") {
  // Ascending eigenvalues of diag(4,1,1) are (1,1,4); the double eigenvalue
  // keeps one sign and the isolated one the other.
  Sym3 r = sqrt_branch(Sym3::from(diag(4, 1, 1)), {-1, -1, +1}, 1e-12, 1e-8);
  CHECK(rel_err(r.mat(), diag(2, -1, -1)) < 1e-12);

  // All-plus branch is the principal root.
  Rng rng(202);
  for (int n = 0; n < 500; ++n) {
    Sym3 m = random_spd(rng, 0.1, 10.0);
    Sym3 a = sqrt_branch(m, {+1, +1, +1}, 1e-12, 1e-8);
    CHECK(rel_err(a.mat(), spd_sqrt(m, 1e-12).mat()) < 1e-12);
    // Any branch squares back to m.
    std::array<int, 3> signs;
    for (auto& s : signs) s = rng.uniform() < 0.5 ? -1 : +1;
    // Eigenvalues drawn from a continuous distribution are distinct.
    Sym3 b = sqrt_branch(m, signs, 1e-12, 1e-12);
    CHECK(rel_err(b.mat() * b.mat(), m.mat()) < 1e-11);
  }

  // Splitting signs across a (nearly) repeated eigenvalue is rejected.
  CHECK_THROWS_AS(sqrt_branch(Sym3::from(diag(1.0, 1.0 + 1e-10, 4.0)),
                              {+1, -1, +1}, 1e-12, 1e-8),
                  Error);
  try {
    sqrt_branch(Sym3::from(diag(1, 1, 4)), {+1, -1, +1}, 1e-12, 1e-8);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateBranch);
  }
}

TEST_CASE("linearized inverse square root and its exact inverse") {
  Rng rng(203);
  for (int n = 0; n < 5000; ++n) {
    Sym3 m = random_spd(rng, 0.05, 20.0);
    Sym3 p = random_sym(rng);
    Sym3 hg = map_H(m, sylvester_G(m, p, 1e-12), 1e-12);
    CHECK(rel_err(hg.mat(), p.mat()) < 1e-11);
    Sym3 gh = sylvester_G(m, map_H(m, p, 1e-12), 1e-12);
    CHECK(rel_err(gh.mat(), p.mat()) < 1e-11);
  }
}

TEST_CASE("linearized inverse square root: closed forms") {
  // Diagonal base point: component formula.
  Sym3 m = Sym3::from(diag(1.0, 4.0, 9.0));
  Rng rng(204);
  Sym3 p = random_sym(rng);
  Sym3 g = sylvester_G(m, p, 1e-12);
  const Eigen::Vector3d lam(1.0, 4.0, 9.0);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const double si = std::sqrt(lam[i]), sj = std::sqrt(lam[j]);
      const double expect = -p.mat()(i, j) / (si * sj * (si + sj));
      CHECK(g.mat()(i, j) == doctest::Approx(expect).epsilon(1e-12));
    }

  // Direction along the base point: G(m) = -(1/2) m^{-1/2}.
  for (int n = 0; n < 200; ++n) {
    Sym3 s = random_spd(rng, 0.1, 10.0);
    Sym3 gs = sylvester_G(s, s, 1e-12);
    CHECK(rel_err(gs.mat(), -0.5 * spd_inv_sqrt(s, 1e-12).mat()) < 1e-11);
  }
}

TEST_CASE("constrained linearization: kernel, symmetry, negativity") {
  Rng rng(205);
  for (int n = 0; n < 300; ++n) {
    const double Lambda = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(1.0, 8.0);
    Sym3 m_a = trace_constrained(random_spd(rng, 0.1, 10.0), Lambda);

    // Base point lies in the kernel.
    Sym3 lm = map_L(m_a, Lambda, m_a, 1e-12);
    CHECK(lm.mat().cwiseAbs().maxCoeff() < 1e-12 * m_a.mat().cwiseAbs().maxCoeff());

    Mat6 L = l_matrix(m_a, Lambda, 1e-12);
    CHECK((L - L.transpose()).cwiseAbs().maxCoeff() <
          1e-11 * L.cwiseAbs().maxCoeff());

    Eigen::SelfAdjointEigenSolver<Mat6> es(0.5 * (L + L.transpose()));
    const auto& ev = es.eigenvalues();  // ascending
    CHECK(ev[5] < 1e-10);               // negative semidefinite
    CHECK(ev[4] < -1e-8);               // kernel is one dimensional
    // Kernel direction is the base point.
    Vec6 k = es.eigenvectors().col(5);
    Vec6 ma = to_onb(m_a).normalized();
    const double angle = std::acos(std::min(1.0, std::abs(k.dot(ma))));
    CHECK(angle < 1e-6);
  }
}

TEST_CASE("constrained linearization: self-adjointness identity") {
  Rng rng(206);
  for (int n = 0; n < 1000; ++n) {
    const double Lambda = rng.uniform(1.0, 8.0);
    Sym3 m_a = trace_constrained(random_spd(rng, 0.1, 10.0), Lambda);
    Sym3 p = random_sym(rng), q = random_sym(rng);
    const Eigen::Matrix3d inv_root = spd_inv_sqrt(m_a, 1e-12).mat();
    const double tp = (inv_root * p.mat()).trace();
    const double tq = (inv_root * q.mat()).trace();
    const double lhs = (map_L(m_a, Lambda, p, 1e-12).mat() * q.mat()).trace();
    const double rhs = (sylvester_G(m_a, p, 1e-12).mat() * q.mat()).trace() +
                       tp * tq / (2.0 * std::abs(Lambda));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    // Symmetry of the full form.
    const double sym = (map_L(m_a, Lambda, q, 1e-12).mat() * p.mat()).trace();
    CHECK(lhs == doctest::Approx(sym).epsilon(1e-10));
  }
}

TEST_CASE("constrained linearization at isotropic points") {
  Rng rng(207);
  for (double Lambda : {3.0, -3.0, 6.0, 1.5}) {
    Sym3 m_a = Sym3::from(Eigen::Matrix3d(
        (Lambda * Lambda / 9.0) * Eigen::Matrix3d::Identity()));
    for (int n = 0; n < 100; ++n) {
      Sym3 p = random_sym(rng);
      Eigen::Matrix3d p0 = p.mat() - (p.mat().trace() / 3.0) * Eigen::Matrix3d::Identity();
      Sym3 lp = map_L(m_a, Lambda, Sym3::from(p0), 1e-12);
      const double a = std::abs(Lambda);
      Eigen::Matrix3d expect = -27.0 / (2.0 * a * a * a) * p0;
      CHECK(rel_err(lp.mat(), expect) < 1e-11);
    }
  }
}

TEST_CASE("isometric coordinates") {
  Rng rng(208);
  for (int n = 0; n < 1000; ++n) {
    Sym3 a = random_sym(rng), b = random_sym(rng);
    Sym3 back = from_onb(to_onb(a));
    for (int k = 0; k < 6; ++k) CHECK(a.l[k] == doctest::Approx(back.l[k]));
    CHECK(to_onb(a).dot(to_onb(b)) ==
          doctest::Approx((a.mat() * b.mat()).trace()).epsilon(1e-12));
  }
}

TEST_CASE("input validation") {
  CHECK_THROWS_AS(map_L(Sym3::identity(), 0.0, Sym3::identity(), 1e-12), Error);
  CHECK_THROWS_AS(sylvester_G(Sym3::from(diag(1, -1, 1)), Sym3::identity(), 1e-9), Error);
  CHECK_THROWS_AS(sqrt_branch(Sym3::identity(), {+1, 0, +1}, 1e-12, 1e-8), Error);
}
