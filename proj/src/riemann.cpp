#include "defconn/riemann.hpp"

#include <cmath>

namespace defconn {
namespace riemann {

namespace {

void require_traceless(const Sym3& w_plus, double tol) {
  const Eigen::Matrix3d W = w_plus.mat();
  const double scale = 1.0 + W.cwiseAbs().maxCoeff();
  if (std::abs(W.trace()) > tol * scale)
    fail(ErrorCode::BadInput, "self-dual Weyl block must be trace free");
}

} // namespace

Sym3 m_from_einstein(double Lambda, const Sym3& w_plus, double tol) {
  require_traceless(w_plus, tol);
  Eigen::Matrix3d A =
      (Lambda / 3.0) * Eigen::Matrix3d::Identity() + w_plus.mat();
  return Sym3::from(Eigen::Matrix3d(A * A));
}

CriterionResult definite_criterion(double scal, const Sym3& w_plus,
                                   const Eigen::Matrix3d& mixed, double tol) {
  require_traceless(w_plus, tol);
  const Eigen::Matrix3d A =
      (scal / 12.0) * Eigen::Matrix3d::Identity() + w_plus.mat();
  CriterionResult r;
  r.criterion = Sym3::from(Eigen::Matrix3d(A * A - mixed * mixed.transpose()));
  r.definite = sym3::classify(r.criterion, tol) == Definiteness::PositiveDefinite;
  if (r.definite) r.sign = A.determinant() > 0.0 ? +1 : -1;
  return r;
}

GurskyReport gursky_check(double Lambda, const Sym3& w_plus, double tol) {
  require_traceless(w_plus, tol);
  GurskyReport r;
  r.w = sym3::eigenvalues(w_plus);
  r.wsq = r.w.squaredNorm();
  r.bound_6w1sq = 6.0 * r.w[0] * r.w[0];
  r.bound_lambda = 2.0 * Lambda * Lambda / 3.0;
  r.hypothesis_met = (Lambda > 0.0) && (Lambda / 3.0 + r.w[0] > 0.0);
  r.note = r.hypothesis_met ? "ok" : "hypothesis not met";

  const double slack = tol * (1.0 + r.wsq);
  r.ordering_holds = (r.w[2] <= -2.0 * r.w[0] + slack) &&
                     (std::abs(r.w[1]) <= std::abs(r.w[0]) + slack);
  r.chain_holds = r.wsq <= r.bound_6w1sq + slack;
  if (r.hypothesis_met)
    r.chain_holds = r.chain_holds && (r.bound_6w1sq < r.bound_lambda);
  return r;
}

HalfSignature hitchin_thorpe_half(double chi, double tau) {
  const double v = 2.0 * chi + 3.0 * tau;
  return HalfSignature{v, v > 0.0};
}

CurvatureTriple synth_triple(double Lambda, const Sym3& w_plus,
                             const Eigen::Matrix3d& mixed, double tol) {
  require_traceless(w_plus, tol);
  const Eigen::Matrix3d A =
      (Lambda / 3.0) * Eigen::Matrix3d::Identity() + w_plus.mat();
  CurvatureTriple t;
  t.Lambda = Lambda;
  for (int i = 0; i < 3; ++i) {
    TwoForm f;
    for (int j = 0; j < 3; ++j) {
      const TwoForm sd = forms4::omega(j);
      const TwoForm ad = forms4::alpha_bar(j);
      for (int k = 0; k < 6; ++k)
        f.c[k] += A(i, j) * sd.c[k] + mixed(i, j) * ad.c[k];
    }
    t.F[i] = f;
  }
  return t;
}

CurvatureTriple synth_triple(double Lambda, const Sym3& w_plus, double tol) {
  return synth_triple(Lambda, w_plus, Eigen::Matrix3d::Zero(), tol);
}

} // namespace riemann
} // namespace defconn
