#pragma once

#include <string>

#include <Eigen/Dense>

#include "defconn/defpoint.hpp"
#include "defconn/sym3.hpp"

namespace defconn {
namespace riemann {

// Result of the pointwise definiteness test on a curvature operator given by
// its self-dual block A = scal/12 + W+ and the mixed (trace-free Ricci)
// block B, rows indexed by the self-dual fiber basis.
struct CriterionResult {
  bool definite = false;  // A^2 - B B^T positive definite
  int sign = 0;           // sign det A when definite
  Sym3 criterion;         // A^2 - B B^T
};

struct GurskyReport {
  bool hypothesis_met = false;  // Lambda > 0 and Lambda/3 + w_min > 0
  std::string note;
  Eigen::Vector3d w = Eigen::Vector3d::Zero();  // ascending eigenvalues of W+
  double wsq = 0.0;           // |W+|^2 = sum w_i^2
  double bound_6w1sq = 0.0;   // 6 w_min^2
  double bound_lambda = 0.0;  // 2 Lambda^2 / 3
  bool ordering_holds = false;  // w_max <= -2 w_min and |w_mid| <= |w_min|
  bool chain_holds = false;     // wsq <= 6 w_min^2 (< bound_lambda if hypothesis)
};

struct HalfSignature {
  double value = 0.0;  // 2 chi + 3 tau
  bool positive = false;
};

// Normalized Gram of an Einstein metric: (Lambda/3 + W+)^2.
Sym3 m_from_einstein(double Lambda, const Sym3& w_plus, double tol);

// Definiteness of the self-dual curvature: A^2 - B B^T > 0 with
// A = scal/12 + W+.  w_plus must be trace free (checked against tol).
CriterionResult definite_criterion(double scal, const Sym3& w_plus,
                                   const Eigen::Matrix3d& mixed, double tol);

// Eigenvalue chain for the self-dual Weyl part of a definite Einstein metric.
// Never throws on a failed hypothesis; it reports instead.
GurskyReport gursky_check(double Lambda, const Sym3& w_plus, double tol);

// 2*chi + 3*tau and its positivity.
HalfSignature hitchin_thorpe_half(double chi, double tau);

// Flat-model curvature triple with prescribed blocks:
// F_i = sum_j A_ij omega_j + sum_j B_ij alpha_bar_j, A = Lambda/3 + W+.
CurvatureTriple synth_triple(double Lambda, const Sym3& w_plus,
                             const Eigen::Matrix3d& mixed, double tol);
CurvatureTriple synth_triple(double Lambda, const Sym3& w_plus, double tol);

} // namespace riemann
} // namespace defconn
