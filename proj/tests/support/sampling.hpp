#pragma once

// Random test-data generators shared by the test executables.

#include <Eigen/Dense>

#include "defconn/defpoint.hpp"
#include "defconn/forms4.hpp"
#include "defconn/rng.hpp"
#include "defconn/sym3.hpp"

namespace sampling {

inline Eigen::Vector4d vector4(defconn::Rng& rng) {
  Eigen::Vector4d v;
  for (int i = 0; i < 4; ++i) v[i] = rng.normal();
  return v;
}

inline defconn::OneForm one_form(defconn::Rng& rng) {
  defconn::OneForm a;
  for (int i = 0; i < 4; ++i) a.c[i] = rng.normal();
  return a;
}

inline defconn::TwoForm two_form(defconn::Rng& rng) {
  defconn::TwoForm a;
  for (int i = 0; i < 6; ++i) a.c[i] = rng.normal();
  return a;
}

inline defconn::ThreeForm three_form(defconn::Rng& rng) {
  defconn::ThreeForm a;
  for (int i = 0; i < 4; ++i) a.c[i] = rng.normal();
  return a;
}

// Random SPD 4x4 metric with moderate condition number.
inline Eigen::Matrix4d spd4(defconn::Rng& rng) {
  Eigen::Matrix4d A;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) A(i, j) = rng.normal();
  return A * A.transpose() + 0.3 * Eigen::Matrix4d::Identity();
}

inline Eigen::Matrix3d mat3(defconn::Rng& rng) {
  Eigen::Matrix3d A;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) A(i, j) = rng.normal();
  return A;
}

// Random symmetric 3x3 with entries of order one.
inline defconn::Sym3 sym3(defconn::Rng& rng) {
  Eigen::Matrix3d A = mat3(rng);
  return defconn::Sym3::from(Eigen::Matrix3d(0.5 * (A + A.transpose())));
}

// Random symmetric trace-free 3x3.
inline defconn::Sym3 traceless_sym3(defconn::Rng& rng) {
  Eigen::Matrix3d A = mat3(rng);
  Eigen::Matrix3d S = 0.5 * (A + A.transpose());
  S -= (S.trace() / 3.0) * Eigen::Matrix3d::Identity();
  return defconn::Sym3::from(S);
}

// Random SPD 3x3 with eigenvalues in [lo, hi].
inline defconn::Sym3 spd3(defconn::Rng& rng, double lo = 0.1, double hi = 10.0) {
  Eigen::Matrix3d A = mat3(rng);
  Eigen::HouseholderQR<Eigen::Matrix3d> qr(A);
  Eigen::Matrix3d Q = qr.householderQ();
  Eigen::Vector3d ev;
  for (int i = 0; i < 3; ++i) ev[i] = rng.uniform(lo, hi);
  return defconn::Sym3::from(Eigen::Matrix3d(Q * ev.asDiagonal() * Q.transpose()));
}

// GL+(4) map with |det| bounded away from zero and bounded conditioning.
inline Eigen::Matrix4d gl4_plus(defconn::Rng& rng, double min_det = 0.3,
                                double max_cond = 8.0) {
  for (;;) {
    Eigen::Matrix4d T;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) T(i, j) = rng.normal();
    const double det = T.determinant();
    if (det < 0) T.col(0) *= -1.0;
    if (std::abs(det) < min_det) continue;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(T.transpose() * T);
    const auto& s = es.eigenvalues();  // ascending, squares of singular values
    if (s[3] > max_cond * max_cond * s[0]) continue;
    return T;
  }
}

// Invertible 3x3 mixing matrix with bounded conditioning.
inline Eigen::Matrix3d gl3(defconn::Rng& rng, double max_cond = 8.0) {
  for (;;) {
    Eigen::Matrix3d B = mat3(rng);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(B.transpose() * B);
    const auto& s = es.eigenvalues();
    if (s[0] < 0.01 || s[2] > max_cond * max_cond * s[0]) continue;
    return B;
  }
}

// Definite triple built from the flat model; see
// defpoint::random_definite_triple for the construction.
inline defconn::defpoint::TripleSeed definite_triple(defconn::Rng& rng,
                                                     double Lambda = 3.0) {
  return defconn::defpoint::random_definite_triple(rng, Lambda);
}

} // namespace sampling
