#pragma once

#include <array>
#include <utility>

#include <Eigen/Dense>

#include "defconn/errors.hpp"

namespace defconn {

using Mat6 = Eigen::Matrix<double, 6, 6>;

// 1-form on oriented R^4, components against (e^0, e^1, e^2, e^3).
struct OneForm {
  std::array<double, 4> c{};

  Eigen::Vector4d vec() const { return Eigen::Vector4d(c[0], c[1], c[2], c[3]); }
  static OneForm from(const Eigen::Vector4d& v) {
    return OneForm{{v[0], v[1], v[2], v[3]}};
  }
};

// 2-form on oriented R^4. Fixed global basis order shared by every module:
//   (e0^e1, e0^e2, e0^e3, e2^e3, e3^e1, e1^e2)
// chosen so that slot k and slot k+3 wedge to +nu_std and the standard
// self-dual basis is omega_i = slot_i + slot_{i+3}.
struct TwoForm {
  std::array<double, 6> c{};

  Eigen::Matrix<double, 6, 1> vec() const {
    Eigen::Matrix<double, 6, 1> v;
    for (int i = 0; i < 6; ++i) v[i] = c[i];
    return v;
  }
  static TwoForm from(const Eigen::Matrix<double, 6, 1>& v) {
    TwoForm a;
    for (int i = 0; i < 6; ++i) a.c[i] = v[i];
    return a;
  }
};

// 3-form on oriented R^4, components against (e^123, e^023, e^013, e^012).
struct ThreeForm {
  std::array<double, 4> c{};
};

// Coefficient of a 4-form against nu_std = e^0^e^1^e^2^e^3.
struct VolumeCoeff {
  double v = 0.0;
};

// Riemannian metric on the tangent fiber plus an orientation flag:
// orientation = +1 means nu_std is positively oriented, -1 the reverse.
struct Metric4 {
  Eigen::Matrix4d g = Eigen::Matrix4d::Identity();
  int orientation = +1;
};

// Validates symmetry/positivity; throws NotSymmetricPositive otherwise.
Metric4 make_metric(const Eigen::Matrix4d& g, int orientation = +1);

namespace forms4 {

// Index pairs of the six 2-form basis slots, in basis order.
inline constexpr std::array<std::pair<int, int>, 6> kBladeIndex = {
    {{0, 1}, {0, 2}, {0, 3}, {2, 3}, {3, 1}, {1, 2}}};

// Standard self-dual / anti-self-dual bases (i in {0,1,2}).
TwoForm omega(int i);
TwoForm alpha_bar(int i);

// a ^ b = wedge(a,b) * nu_std. Symmetric, signature (3,3).
VolumeCoeff wedge(const TwoForm& a, const TwoForm& b);
// 1-form wedge 1-form.
TwoForm wedge(const OneForm& a, const OneForm& b);
// 1-form wedge 2-form.
ThreeForm wedge(const OneForm& a, const TwoForm& b);
// 1-form wedge 3-form.
VolumeCoeff wedge(const OneForm& a, const ThreeForm& b);

// Interior products.
OneForm interior(const Eigen::Vector4d& u, const TwoForm& a);

// Antisymmetric coefficient matrix of a 2-form and its inverse map.
Eigen::Matrix4d antisym_matrix(const TwoForm& a);
TwoForm from_antisym(const Eigen::Matrix4d& m);

// Pullback along a linear map T (components of T* alpha).
TwoForm pullback(const Eigen::Matrix4d& T, const TwoForm& a);

// orientation * sqrt(det g): coefficient of the metric volume form.
double dvol_coeff(const Metric4& m);

// Matrix of the Hodge star on 2-forms in the fixed basis.
Mat6 star2_matrix(const Metric4& m);

// Hodge star with the convention beta ^ *gamma = <beta,gamma> dvol.
TwoForm hodge_star2(const Metric4& m, const TwoForm& a);
OneForm hodge_star3(const Metric4& m, const ThreeForm& a);

// (P+, P-) with P± = (1 ± star)/2; each has rank 3.
std::pair<Mat6, Mat6> sd_projectors(const Metric4& m);

} // namespace forms4
} // namespace defconn
