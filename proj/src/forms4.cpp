#include "defconn/forms4.hpp"

#include <cmath>

namespace defconn {

Metric4 make_metric(const Eigen::Matrix4d& g, int orientation) {
  if (orientation != 1 && orientation != -1)
    fail(ErrorCode::BadInput, "metric orientation must be +1 or -1");
  const double scale = g.cwiseAbs().maxCoeff();
  if (!(scale > 0.0) || !g.allFinite())
    fail(ErrorCode::NotSymmetricPositive, "metric entries must be finite and nonzero");
  if ((g - g.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    fail(ErrorCode::NotSymmetricPositive, "metric must be symmetric");
  Eigen::Matrix4d gs = 0.5 * (g + g.transpose());
  Eigen::LLT<Eigen::Matrix4d> llt(gs);
  if (llt.info() != Eigen::Success)
    fail(ErrorCode::NotSymmetricPositive, "metric must be positive definite");
  return Metric4{gs, orientation};
}

namespace forms4 {

TwoForm omega(int i) {
  if (i < 0 || i > 2) fail(ErrorCode::BadInput, "basis index must be 0,1,2");
  TwoForm a;
  a.c[i] = 1.0;
  a.c[i + 3] = 1.0;
  return a;
}

TwoForm alpha_bar(int i) {
  if (i < 0 || i > 2) fail(ErrorCode::BadInput, "basis index must be 0,1,2");
  TwoForm a;
  a.c[i] = 1.0;
  a.c[i + 3] = -1.0;
  return a;
}

VolumeCoeff wedge(const TwoForm& a, const TwoForm& b) {
  return VolumeCoeff{a.c[0] * b.c[3] + a.c[1] * b.c[4] + a.c[2] * b.c[5] +
                     a.c[3] * b.c[0] + a.c[4] * b.c[1] + a.c[5] * b.c[2]};
}

TwoForm wedge(const OneForm& a, const OneForm& b) {
  TwoForm w;
  w.c[0] = a.c[0] * b.c[1] - a.c[1] * b.c[0];
  w.c[1] = a.c[0] * b.c[2] - a.c[2] * b.c[0];
  w.c[2] = a.c[0] * b.c[3] - a.c[3] * b.c[0];
  w.c[3] = a.c[2] * b.c[3] - a.c[3] * b.c[2];
  w.c[4] = a.c[3] * b.c[1] - a.c[1] * b.c[3];
  w.c[5] = a.c[1] * b.c[2] - a.c[2] * b.c[1];
  return w;
}

ThreeForm wedge(const OneForm& a, const TwoForm& b) {
  ThreeForm w;
  w.c[0] = a.c[1] * b.c[3] + a.c[2] * b.c[4] + a.c[3] * b.c[5];
  w.c[1] = a.c[0] * b.c[3] - a.c[2] * b.c[2] + a.c[3] * b.c[1];
  w.c[2] = -a.c[0] * b.c[4] - a.c[1] * b.c[2] + a.c[3] * b.c[0];
  w.c[3] = a.c[0] * b.c[5] - a.c[1] * b.c[1] + a.c[2] * b.c[0];
  return w;
}

VolumeCoeff wedge(const OneForm& a, const ThreeForm& b) {
  return VolumeCoeff{a.c[0] * b.c[0] - a.c[1] * b.c[1] + a.c[2] * b.c[2] -
                     a.c[3] * b.c[3]};
}

OneForm interior(const Eigen::Vector4d& u, const TwoForm& a) {
  OneForm r;
  r.c[0] = -a.c[0] * u[1] - a.c[1] * u[2] - a.c[2] * u[3];
  r.c[1] = a.c[0] * u[0] + a.c[4] * u[3] - a.c[5] * u[2];
  r.c[2] = a.c[1] * u[0] + a.c[5] * u[1] - a.c[3] * u[3];
  r.c[3] = a.c[2] * u[0] + a.c[3] * u[2] - a.c[4] * u[1];
  return r;
}

Eigen::Matrix4d antisym_matrix(const TwoForm& a) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  for (int k = 0; k < 6; ++k) {
    const auto [i, j] = kBladeIndex[k];
    m(i, j) += a.c[k];
    m(j, i) -= a.c[k];
  }
  return m;
}

TwoForm from_antisym(const Eigen::Matrix4d& m) {
  TwoForm a;
  for (int k = 0; k < 6; ++k) {
    const auto [i, j] = kBladeIndex[k];
    a.c[k] = 0.5 * (m(i, j) - m(j, i));
  }
  return a;
}

TwoForm pullback(const Eigen::Matrix4d& T, const TwoForm& a) {
  return from_antisym(T.transpose() * antisym_matrix(a) * T);
}

double dvol_coeff(const Metric4& m) {
  return m.orientation * std::sqrt(m.g.determinant());
}

Mat6 star2_matrix(const Metric4& m) {
  const Eigen::Matrix4d gi = m.g.inverse();
  Mat6 G2;
  for (int r = 0; r < 6; ++r) {
    const auto [i, j] = kBladeIndex[r];
    for (int s = 0; s < 6; ++s) {
      const auto [k, l] = kBladeIndex[s];
      G2(r, s) = gi(i, k) * gi(j, l) - gi(i, l) * gi(j, k);
    }
  }
  Mat6 W = Mat6::Zero();
  for (int i = 0; i < 3; ++i) {
    W(i, i + 3) = 1.0;
    W(i + 3, i) = 1.0;
  }
  return dvol_coeff(m) * W * G2;
}

TwoForm hodge_star2(const Metric4& m, const TwoForm& a) {
  return TwoForm::from(star2_matrix(m) * a.vec());
}

OneForm hodge_star3(const Metric4& m, const ThreeForm& a) {
  // Index triples of the four 3-form basis slots, in basis order.
  static constexpr int kTriple[4][3] = {{1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2}};
  const Eigen::Matrix4d gi = m.g.inverse();
  Eigen::Matrix4d G3;
  for (int r = 0; r < 4; ++r) {
    for (int s = 0; s < 4; ++s) {
      Eigen::Matrix3d sub;
      for (int p = 0; p < 3; ++p)
        for (int q = 0; q < 3; ++q) sub(p, q) = gi(kTriple[r][p], kTriple[s][q]);
      G3(r, s) = sub.determinant();
    }
  }
  const Eigen::Vector4d P(-1.0, 1.0, -1.0, 1.0);
  Eigen::Vector4d gamma(a.c[0], a.c[1], a.c[2], a.c[3]);
  Eigen::Vector4d out = dvol_coeff(m) * P.asDiagonal() * (G3 * gamma);
  return OneForm::from(out);
}

std::pair<Mat6, Mat6> sd_projectors(const Metric4& m) {
  const Mat6 S = star2_matrix(m);
  const Mat6 I = Mat6::Identity();
  return {0.5 * (I + S), 0.5 * (I - S)};
}

} // namespace forms4
} // namespace defconn
