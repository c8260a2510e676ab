#include "defconn/sym3.hpp"

#include <cmath>

namespace defconn {

const char* definiteness_name(Definiteness d) {
  switch (d) {
    case Definiteness::PositiveDefinite: return "positive-definite";
    case Definiteness::NegativeDefinite: return "negative-definite";
    case Definiteness::Indefinite: return "indefinite";
    case Definiteness::Degenerate: return "degenerate";
  }
  return "unknown";
}

namespace sym3 {

namespace {

struct Eigs {
  Eigen::Vector3d values;   // ascending
  Eigen::Matrix3d vectors;  // columns
};

Eigs decompose(const Sym3& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(m.mat());
  if (es.info() != Eigen::Success)
    fail(ErrorCode::BadInput, "eigendecomposition of symmetric 3x3 failed");
  return Eigs{es.eigenvalues(), es.eigenvectors()};
}

void require_spd(const Sym3& m, double tol, const char* who) {
  if (classify(m, tol) != Definiteness::PositiveDefinite)
    fail(ErrorCode::NotSymmetricPositive,
         std::string(who) + " requires a positive definite matrix");
}

} // namespace

Eigen::Vector3d eigenvalues(const Sym3& m) { return decompose(m).values; }

Definiteness classify(const Sym3& m, double tol) {
  if (!(tol >= 0.0)) fail(ErrorCode::BadInput, "classification tolerance must be >= 0");
  const Eigen::Vector3d ev = eigenvalues(m);
  for (int i = 0; i < 3; ++i)
    if (std::abs(ev[i]) <= tol) return Definiteness::Degenerate;
  if (ev[0] > 0.0) return Definiteness::PositiveDefinite;
  if (ev[2] < 0.0) return Definiteness::NegativeDefinite;
  return Definiteness::Indefinite;
}

Sym3 spd_sqrt(const Sym3& m, double tol) {
  require_spd(m, tol, "spd_sqrt");
  const Eigs e = decompose(m);
  Eigen::Vector3d r = e.values.cwiseSqrt();
  return Sym3::from(Eigen::Matrix3d(e.vectors * r.asDiagonal() * e.vectors.transpose()));
}

Sym3 spd_inv_sqrt(const Sym3& m, double tol) {
  require_spd(m, tol, "spd_inv_sqrt");
  const Eigs e = decompose(m);
  Eigen::Vector3d r = e.values.cwiseSqrt().cwiseInverse();
  return Sym3::from(Eigen::Matrix3d(e.vectors * r.asDiagonal() * e.vectors.transpose()));
}

Sym3 sqrt_branch(const Sym3& m, const std::array<int, 3>& signs, double tol,
                 double degeneracy_tol) {
  for (int s : signs)
    if (s != 1 && s != -1) fail(ErrorCode::BadInput, "branch signs must be +1 or -1");
  require_spd(m, tol, "sqrt_branch");
  const Eigs e = decompose(m);
  const double scale = e.values[2];
  for (int i = 0; i < 2; ++i) {
    if (signs[i] != signs[i + 1] &&
        e.values[i + 1] - e.values[i] <= degeneracy_tol * scale)
      fail(ErrorCode::DegenerateBranch,
           "sign change across (nearly) coincident eigenvalues");
  }
  Eigen::Vector3d r;
  for (int i = 0; i < 3; ++i) r[i] = signs[i] * std::sqrt(e.values[i]);
  return Sym3::from(Eigen::Matrix3d(e.vectors * r.asDiagonal() * e.vectors.transpose()));
}

Sym3 sylvester_G(const Sym3& m, const Sym3& n, double tol) {
  require_spd(m, tol, "sylvester_G");
  const Eigs e = decompose(m);
  Eigen::Matrix3d nh = e.vectors.transpose() * n.mat() * e.vectors;
  Eigen::Matrix3d gh;
  for (int i = 0; i < 3; ++i) {
    const double si = std::sqrt(e.values[i]);
    for (int j = 0; j < 3; ++j) {
      const double sj = std::sqrt(e.values[j]);
      gh(i, j) = -nh(i, j) / (si * sj * (si + sj));
    }
  }
  return Sym3::from(Eigen::Matrix3d(e.vectors * gh * e.vectors.transpose()));
}

Sym3 map_H(const Sym3& m, const Sym3& n, double tol) {
  const Eigen::Matrix3d r = spd_sqrt(m, tol).mat();
  const Eigen::Matrix3d M = m.mat(), N = n.mat();
  return Sym3::from(Eigen::Matrix3d(-M * N * r - r * N * M));
}

Sym3 map_L(const Sym3& m_a, double Lambda, const Sym3& n, double tol) {
  if (Lambda == 0.0) fail(ErrorCode::BadInput, "map_L requires Lambda != 0");
  const Eigen::Matrix3d inv_root = spd_inv_sqrt(m_a, tol).mat();
  const double t = (inv_root * n.mat()).trace();
  Eigen::Matrix3d arg = n.mat() - (t / std::abs(Lambda)) * m_a.mat();
  return sylvester_G(m_a, Sym3::from(arg), tol);
}

Vec6 to_onb(const Sym3& m) {
  const double r2 = std::sqrt(2.0);
  Vec6 v;
  v << m.l[0], m.l[2], m.l[5], r2 * m.l[1], r2 * m.l[3], r2 * m.l[4];
  return v;
}

Sym3 from_onb(const Vec6& v) {
  const double r2 = std::sqrt(2.0);
  Sym3 s;
  s.l = {v[0], v[3] / r2, v[1], v[4] / r2, v[5] / r2, v[2]};
  return s;
}

Mat6 l_matrix(const Sym3& m_a, double Lambda, double tol) {
  Mat6 out;
  for (int k = 0; k < 6; ++k) {
    Vec6 e = Vec6::Zero();
    e[k] = 1.0;
    out.col(k) = to_onb(map_L(m_a, Lambda, from_onb(e), tol));
  }
  return out;
}

} // namespace sym3
} // namespace defconn
