#include "defconn/hesssym.hpp"

#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace defconn {
namespace hesssym {

namespace {

constexpr double kPi = 3.14159265358979323846;

Eigen::Vector4d one_form_vec(const OneForm& a) {
  return Eigen::Vector4d(a.c[0], a.c[1], a.c[2], a.c[3]);
}

} // namespace

PointFrame make_frame(const CurvatureTriple& t, double tol) {
  PointFrame fr;
  fr.F = t;
  fr.nv = defpoint::normalize_volume(t, tol);
  fr.g = defpoint::metric_reconstruct(t, fr.nv.nu_A, fr.nv.orientation, tol);
  Eigen::LLT<Eigen::Matrix4d> llt(fr.g.g);
  if (llt.info() != Eigen::Success)
    fail(ErrorCode::NotSymmetricPositive, "metric Cholesky factorization failed");
  fr.chol_L = llt.matrixL();
  fr.chol_K = fr.chol_L.inverse();
  return fr;
}

SymbolDirection make_symbol_direction(const PointFrame& fr, const OneForm& eta) {
  Eigen::Vector4d on = fr.chol_K * one_form_vec(eta);
  const double norm = on.norm();
  if (!(norm > 1e-14))
    fail(ErrorCode::BadInput, "symbol direction must be a nonzero covector");
  on /= norm;
  SymbolDirection d;
  d.eta_on = on;
  d.eta = OneForm::from(fr.chol_L * on);
  return d;
}

Vec12 to_on(const PointFrame& fr, const std::array<OneForm, 3>& a) {
  Vec12 v;
  for (int i = 0; i < 3; ++i)
    v.segment<4>(4 * i) = fr.chol_K * one_form_vec(a[i]);
  return v;
}

std::array<OneForm, 3> from_on(const PointFrame& fr, const Vec12& v) {
  std::array<OneForm, 3> a;
  for (int i = 0; i < 3; ++i)
    a[i] = OneForm::from(fr.chol_L * v.segment<4>(4 * i));
  return a;
}

std::array<OneForm, 3> f_map(const PointFrame& fr, const Eigen::Vector4d& u) {
  std::array<OneForm, 3> a;
  for (int i = 0; i < 3; ++i) a[i] = forms4::interior(u, fr.F.F[i]);
  return a;
}

Mat12x4 f_matrix(const PointFrame& fr) {
  Mat12x4 m;
  for (int d = 0; d < 4; ++d) {
    Eigen::Vector4d u = Eigen::Vector4d::Zero();
    u[d] = 1.0;
    m.col(d) = to_on(fr, f_map(fr, u));
  }
  return m;
}

Mat6x12 delta_symbol(const PointFrame& fr, const SymbolDirection& dir) {
  const double scale = fr.nv.orientation / fr.nv.nu_A;
  Mat6x12 out;
  for (int k = 0; k < 12; ++k) {
    Vec12 e = Vec12::Zero();
    e[k] = 1.0;
    const std::array<OneForm, 3> a = from_on(fr, e);
    std::array<TwoForm, 3> ea;
    for (int i = 0; i < 3; ++i) ea[i] = forms4::wedge(dir.eta, a[i]);
    Eigen::Matrix3d d;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        d(i, j) = scale * (forms4::wedge(ea[i], fr.F.F[j]).v +
                           forms4::wedge(fr.F.F[i], ea[j]).v);
    out.col(k) = sym3::to_onb(Sym3::from(Eigen::Matrix3d(0.5 * (d + d.transpose()))));
  }
  return out;
}

Mat12x6 delta_adjoint_symbol(const PointFrame& fr, const SymbolDirection& dir) {
  return delta_symbol(fr, dir).transpose();
}

std::array<OneForm, 3> delta_adjoint_explicit(const PointFrame& fr,
                                              const SymbolDirection& dir,
                                              const Sym3& n) {
  const Eigen::Matrix3d N = n.mat();
  std::array<OneForm, 3> out;
  for (int i = 0; i < 3; ++i) {
    TwoForm nf;
    for (int k = 0; k < 6; ++k)
      nf.c[k] = N(i, 0) * fr.F.F[0].c[k] + N(i, 1) * fr.F.F[1].c[k] +
                N(i, 2) * fr.F.F[2].c[k];
    const ThreeForm psi = forms4::wedge(dir.eta, nf);
    const OneForm star = forms4::hodge_star3(fr.g, psi);
    for (int m = 0; m < 4; ++m) out[i].c[m] = 2.0 * star.c[m];
  }
  return out;
}

Mat12 hessian_symbol(const PointFrame& fr, const SymbolDirection& dir, double tol) {
  const Mat6x12 D = delta_symbol(fr, dir);
  const sym3::Mat6 L = sym3::l_matrix(fr.nv.M_A, fr.F.Lambda, tol);
  const double c = std::abs(fr.F.Lambda) / (12.0 * kPi * kPi);
  Mat12 H = c * D.transpose() * L * D;
  return 0.5 * (H + H.transpose());
}

Mat12x7 gauge_symbol(const PointFrame& fr, const SymbolDirection& dir) {
  Mat12x7 out;
  for (int i = 0; i < 3; ++i) {
    std::array<OneForm, 3> a{};
    for (int m = 0; m < 4; ++m) a[i].c[m] = -dir.eta.c[m];
    out.col(i) = to_on(fr, a);
  }
  out.block<12, 4>(0, 3) = -f_matrix(fr);
  return out;
}

Mat12 proj_W(const PointFrame& fr) {
  const Mat12x4 f = f_matrix(fr);
  Eigen::HouseholderQR<Mat12x4> qr(f);
  const Mat12 full_q = qr.householderQ() * Mat12::Identity();
  const Mat12x4 q = full_q.leftCols<4>();
  return Mat12::Identity() - q * q.transpose();
}

GaugeFixedSymbol gauge_fixed_symbol(const PointFrame& fr, const SymbolDirection& dir,
                                    double tol) {
  const Mat12 H = hessian_symbol(fr, dir, tol);

  // Unit projector onto the direction eta in every fiber copy.
  Mat12 p = Mat12::Zero();
  const Eigen::Matrix4d pe = dir.eta_on * dir.eta_on.transpose();
  for (int i = 0; i < 3; ++i) p.block<4, 4>(4 * i, 4 * i) = pe;

  const Mat12x4 f = f_matrix(fr);
  Eigen::HouseholderQR<Mat12x4> qr(f);
  const Mat12 full_q = qr.householderQ() * Mat12::Identity();
  const Mat12x4 q = full_q.leftCols<4>();
  const Mat12 Pi = Mat12::Identity() - q * q.transpose();

  GaugeFixedSymbol out;
  Mat12 m = H - Pi * p * Pi;
  out.matrix = 0.5 * (m + m.transpose());
  out.w_basis = full_q.rightCols<8>();
  Eigen::Matrix<double, 8, 8> restricted =
      out.w_basis.transpose() * out.matrix * out.w_basis;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 8, 8>> es(restricted);
  out.wA_max_eigenvalue = es.eigenvalues()[7];
  return out;
}

namespace {

PointAudit audit_one(std::uint64_t seed, std::uint64_t index, double tol) {
  Rng rng = Rng::indexed(seed, index);
  const double Lambda = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(1.0, 6.0);
  const defpoint::TripleSeed ts = defpoint::random_definite_triple(rng, Lambda);
  const PointFrame fr = make_frame(ts.F, tol);
  OneForm eta;
  for (int m = 0; m < 4; ++m) eta.c[m] = rng.normal();
  const SymbolDirection dir = make_symbol_direction(fr, eta);

  PointAudit a;
  const Mat12 H = hessian_symbol(fr, dir, tol);
  Eigen::SelfAdjointEigenSolver<Mat12> es(H);
  const Eigen::Matrix<double, 12, 1> ev = es.eigenvalues();
  const double rho = std::max(std::abs(ev[0]), std::abs(ev[11]));
  a.hess_max_eig = ev[11] / rho;

  int kdim = 0;
  for (int i = 0; i < 12; ++i)
    if (std::abs(ev[i]) <= tol * rho) ++kdim;
  a.kernel_dim = kdim;

  // Numerical kernel projector vs the predicted one.
  Mat12 pnum = Mat12::Zero();
  for (int i = 0; i < 12; ++i)
    if (std::abs(ev[i]) <= tol * rho)
      pnum += es.eigenvectors().col(i) * es.eigenvectors().col(i).transpose();

  Mat12x7 g = gauge_symbol(fr, dir);
  // The predicted kernel is the span of the gauge symbol image.
  Eigen::HouseholderQR<Mat12x7> qr(g);
  const Mat12 full_q = qr.householderQ() * Mat12::Identity();
  const Eigen::Matrix<double, 12, 7> q = full_q.leftCols<7>();
  Mat12 pth = q * q.transpose();
  a.kernel_projector_err = (pnum - pth).norm();

  a.gauge_fixed_max_eig = gauge_fixed_symbol(fr, dir, tol).wA_max_eigenvalue;
  return a;
}

} // namespace

SymbolAudit symbol_audit(std::uint64_t seed, int count, double tol, int threads) {
  if (count <= 0) fail(ErrorCode::BadInput, "audit count must be positive");
  SymbolAudit out;
  out.points.resize(static_cast<size_t>(count));

  if (threads <= 0) {
    // Serial reference loop.
    for (int i = 0; i < count; ++i)
      out.points[static_cast<size_t>(i)] =
          audit_one(seed, static_cast<std::uint64_t>(i), tol);
  } else {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 8) num_threads(threads)
    for (int i = 0; i < count; ++i)
      out.points[static_cast<size_t>(i)] =
          audit_one(seed, static_cast<std::uint64_t>(i), tol);
#else
    for (int i = 0; i < count; ++i)
      out.points[static_cast<size_t>(i)] =
          audit_one(seed, static_cast<std::uint64_t>(i), tol);
#endif
  }

  out.worst_hess_eig = -1.0;
  out.min_kernel_dim = 12;
  out.max_kernel_dim = 0;
  out.worst_projector_err = 0.0;
  out.worst_gauge_fixed_eig = -1e300;
  for (const PointAudit& a : out.points) {
    out.worst_hess_eig = std::max(out.worst_hess_eig, a.hess_max_eig);
    out.min_kernel_dim = std::min(out.min_kernel_dim, a.kernel_dim);
    out.max_kernel_dim = std::max(out.max_kernel_dim, a.kernel_dim);
    out.worst_projector_err = std::max(out.worst_projector_err, a.kernel_projector_err);
    out.worst_gauge_fixed_eig =
        std::max(out.worst_gauge_fixed_eig, a.gauge_fixed_max_eig);
  }
  return out;
}

} // namespace hesssym
} // namespace defconn
