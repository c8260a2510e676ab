#include "defconn/defpoint.hpp"

#include <cmath>

namespace defconn {
namespace defpoint {

namespace {

constexpr int kEps[6][4] = {
    // permutation (i,j,k) and its sign
    {0, 1, 2, +1}, {1, 2, 0, +1}, {2, 0, 1, +1},
    {0, 2, 1, -1}, {2, 1, 0, -1}, {1, 0, 2, -1}};

void require_lambda(const CurvatureTriple& t) {
  if (t.Lambda == 0.0 || !std::isfinite(t.Lambda))
    fail(ErrorCode::BadInput, "Lambda must be finite and nonzero");
}

struct SplitGram {
  Sym3 m_ref;  // orientation * gram, positive definite
  int orientation;
};

SplitGram split_gram(const CurvatureTriple& t, double tol) {
  const Sym3 gram = curvature_gram(t);
  switch (sym3::classify(gram, tol)) {
    case Definiteness::PositiveDefinite:
      return {gram, +1};
    case Definiteness::NegativeDefinite:
      return {Sym3::from(Eigen::Matrix3d(-gram.mat())), -1};
    default:
      fail(ErrorCode::NotDefinite, "curvature wedge Gram is not definite");
  }
}

} // namespace

Sym3 curvature_gram(const CurvatureTriple& t) {
  Eigen::Matrix3d m;
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j)
      m(i, j) = m(j, i) = forms4::wedge(t.F[i], t.F[j]).v;
  return Sym3::from(m);
}

bool is_definite(const CurvatureTriple& t, double tol) {
  const Definiteness d = sym3::classify(curvature_gram(t), tol);
  return d == Definiteness::PositiveDefinite || d == Definiteness::NegativeDefinite;
}

double pontryagin_density(const CurvatureTriple& t) {
  double s = 0.0;
  for (int i = 0; i < 3; ++i) s += forms4::wedge(t.F[i], t.F[i]).v;
  return s;
}

Metric4 metric_reconstruct(const CurvatureTriple& t, double nu_A, int orientation,
                           double tol) {
  if (!(nu_A > 0.0)) fail(ErrorCode::BadInput, "nu_A must be positive");
  if (orientation != 1 && orientation != -1)
    fail(ErrorCode::BadInput, "orientation must be +1 or -1");

  // Totally symmetric triple product of the curvature components.
  Eigen::Matrix4d h;
  std::array<std::array<OneForm, 3>, 4> iuF;
  for (int mu = 0; mu < 4; ++mu) {
    Eigen::Vector4d e = Eigen::Vector4d::Zero();
    e[mu] = 1.0;
    for (int i = 0; i < 3; ++i) iuF[mu][i] = forms4::interior(e, t.F[i]);
  }
  for (int mu = 0; mu < 4; ++mu)
    for (int nu = 0; nu < 4; ++nu) {
      double s = 0.0;
      for (const auto& p : kEps) {
        const TwoForm w = forms4::wedge(iuF[mu][p[0]], iuF[nu][p[1]]);
        s += p[3] * forms4::wedge(w, t.F[p[2]]).v;
      }
      h(mu, nu) = s / 6.0;
    }
  h = 0.5 * (h + h.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(h);
  const Eigen::Vector4d ev = es.eigenvalues();
  const double scale = std::max(std::abs(ev[0]), std::abs(ev[3]));
  if (!(scale > 0.0) || std::abs(ev[0]) <= tol * scale ||
      std::abs(ev[3]) <= tol * scale || ev[0] * ev[3] < 0.0)
    fail(ErrorCode::ReconstructionFailure,
         "triple product of the curvature components is not definite");
  if (ev[3] < 0.0) h = -h;

  const double det = h.determinant();
  const double lambda = std::sqrt(nu_A / std::sqrt(det));
  return make_metric(Eigen::Matrix4d(lambda * h), orientation);
}

int connection_sign(const CurvatureTriple& t, const Metric4& g, double tol) {
  const SplitGram sg = split_gram(t, tol);
  const Eigen::Matrix3d R = sym3::spd_inv_sqrt(sg.m_ref, tol).mat();
  const Eigen::Matrix4d gi = g.g.inverse();
  std::array<Eigen::Matrix4d, 3> J;
  for (int i = 0; i < 3; ++i) {
    TwoForm phi;
    for (int k = 0; k < 6; ++k)
      phi.c[k] = R(i, 0) * t.F[0].c[k] + R(i, 1) * t.F[1].c[k] + R(i, 2) * t.F[2].c[k];
    J[i] = gi * forms4::antisym_matrix(phi);
  }
  const double tr = (J[0] * J[1] * J[2]).trace();
  if (std::abs(tr) < 1e-12)
    fail(ErrorCode::ToleranceFailure, "connection sign is numerically ambiguous");
  return tr > 0.0 ? +1 : -1;
}

NormalizedVolume normalize_volume(const CurvatureTriple& t, double tol, double ref) {
  require_lambda(t);
  if (!(ref > 0.0)) fail(ErrorCode::BadInput, "reference volume must be positive");
  const SplitGram sg = split_gram(t, tol);
  const Sym3 m_scaled = Sym3::from(Eigen::Matrix3d(sg.m_ref.mat() / ref));
  const double tr_root = sym3::spd_sqrt(m_scaled, tol).mat().trace();
  const double nu = (tr_root * tr_root) / (t.Lambda * t.Lambda);
  NormalizedVolume out;
  out.nu_A = nu;
  out.M_A = Sym3::from(Eigen::Matrix3d(m_scaled.mat() / nu));
  out.orientation = sg.orientation;

  const Metric4 g = metric_reconstruct(t, nu * ref, sg.orientation, tol);
  const int sign = connection_sign(t, g, tol);
  if (sign * t.Lambda < 0.0)
    fail(ErrorCode::SignMismatch,
         "connection sign disagrees with the sign of Lambda");
  return out;
}

std::array<TwoForm, 3> phi_map(const CurvatureTriple& t, const NormalizedVolume& nv,
                               double tol) {
  require_lambda(t);
  const double sgn = t.Lambda > 0.0 ? 1.0 : -1.0;
  const Eigen::Matrix3d R = sgn * sym3::spd_inv_sqrt(nv.M_A, tol).mat();
  std::array<TwoForm, 3> phi;
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 6; ++k)
      phi[i].c[k] =
          R(i, 0) * t.F[0].c[k] + R(i, 1) * t.F[1].c[k] + R(i, 2) * t.F[2].c[k];
  return phi;
}

BoundsTriple pointwise_bounds(const CurvatureTriple& t, double tol) {
  require_lambda(t);
  const SplitGram sg = split_gram(t, tol);
  const double L2 = t.Lambda * t.Lambda;
  const double trm = sg.m_ref.mat().trace();
  const double tr_root = sym3::spd_sqrt(sg.m_ref, tol).mat().trace();
  return BoundsTriple{trm / L2, (tr_root * tr_root) / L2, 3.0 * trm / L2};
}

TripleSeed random_definite_triple(Rng& rng, double Lambda) {
  if (Lambda == 0.0) fail(ErrorCode::BadInput, "Lambda must be nonzero");
  TripleSeed s;
  // GL+(4) with |det| >= 0.3 and condition number <= 8.
  for (;;) {
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) s.T(i, j) = rng.normal();
    if (s.T.determinant() < 0.0) s.T.col(0) *= -1.0;
    if (s.T.determinant() < 0.3) continue;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(s.T.transpose() * s.T);
    if (es.eigenvalues()[3] > 64.0 * es.eigenvalues()[0]) continue;
    break;
  }
  // Invertible mixing with bounded conditioning.
  for (;;) {
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) s.B(i, j) = rng.normal();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(s.B.transpose() * s.B);
    if (es.eigenvalues()[0] < 0.01 ||
        es.eigenvalues()[2] > 64.0 * es.eigenvalues()[0])
      continue;
    break;
  }
  if (s.B.determinant() * Lambda < 0.0) s.B.row(0) *= -1.0;

  std::array<TwoForm, 3> pulled;
  for (int j = 0; j < 3; ++j)
    pulled[j] = forms4::pullback(s.T, forms4::omega(j));
  for (int i = 0; i < 3; ++i) {
    TwoForm f;
    for (int k = 0; k < 6; ++k)
      f.c[k] = s.B(i, 0) * pulled[0].c[k] + s.B(i, 1) * pulled[1].c[k] +
               s.B(i, 2) * pulled[2].c[k];
    s.F.F[i] = f;
  }
  s.F.Lambda = Lambda;
  return s;
}

PointReport point_report(const CurvatureTriple& t, double tol) {
  require_lambda(t);
  PointReport r;
  r.gram = curvature_gram(t);
  r.definiteness = sym3::classify(r.gram, tol);
  if (r.definiteness != Definiteness::PositiveDefinite &&
      r.definiteness != Definiteness::NegativeDefinite)
    return r;

  const SplitGram sg = split_gram(t, tol);
  r.orientation = sg.orientation;
  const double tr_root = sym3::spd_sqrt(sg.m_ref, tol).mat().trace();
  r.nu_A = (tr_root * tr_root) / (t.Lambda * t.Lambda);
  r.M_A = Sym3::from(Eigen::Matrix3d(sg.m_ref.mat() / r.nu_A));
  const Metric4 g = metric_reconstruct(t, r.nu_A, sg.orientation, tol);
  r.connection_sign = connection_sign(t, g, tol);
  r.lambda_candidates = {std::abs(t.Lambda), -std::abs(t.Lambda)};
  r.lambda_consistent = r.connection_sign * std::abs(t.Lambda);
  r.lambda_matches = (r.connection_sign * t.Lambda > 0.0);
  r.bounds = pointwise_bounds(t, tol);
  return r;
}

} // namespace defpoint
} // namespace defconn
