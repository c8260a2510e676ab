#pragma once

#include <array>

#include "defconn/forms4.hpp"
#include "defconn/rng.hpp"
#include "defconn/sym3.hpp"

namespace defconn {

// A triple of 2-forms (curvature components against a fixed fiber basis)
// together with the constant Lambda they are meant to solve for.
struct CurvatureTriple {
  std::array<TwoForm, 3> F;
  double Lambda = 0.0;
};

// Output of the volume normalization at a point.
struct NormalizedVolume {
  double nu_A = 0.0;    // volume coefficient, positive against the induced orientation
  Sym3 M_A;             // wedge Gram normalized by nu_A; tr sqrt(M_A) = |Lambda|
  int orientation = 0;  // sign making the Gram positive definite
};

// lower < value <= upper with equality iff the normalized Gram is isotropic.
struct BoundsTriple {
  double lower = 0.0;
  double value = 0.0;
  double upper = 0.0;
};

struct PointReport {
  Sym3 gram;
  Definiteness definiteness = Definiteness::Degenerate;
  int orientation = 0;      // filled when definite
  int connection_sign = 0;  // filled when definite
  double nu_A = 0.0;
  Sym3 M_A;
  std::array<double, 2> lambda_candidates{};  // {+|Lambda|, -|Lambda|}
  double lambda_consistent = 0.0;  // candidate matching the connection sign
  bool lambda_matches = false;     // sign(input Lambda) == connection sign
  BoundsTriple bounds;
};

namespace defpoint {

// Wedge pairing matrix: gram_ij * nu_std = F_i ^ F_j.
Sym3 curvature_gram(const CurvatureTriple& t);

// Definite means the wedge Gram is positive or negative definite.
bool is_definite(const CurvatureTriple& t, double tol);

// First Pontryagin density: sum_i F_i ^ F_i against nu_std.
double pontryagin_density(const CurvatureTriple& t);

// Conformal metric from the triple (totally symmetric triple product),
// scaled so that sqrt(det g) equals nu_A, carrying the given orientation.
// Throws ReconstructionFailure when the triple product is not definite.
Metric4 metric_reconstruct(const CurvatureTriple& t, double nu_A, int orientation,
                           double tol);

// Sign of the triple product trace of the normalized raised curvature
// endomorphisms: +1 for the standard self-dual triple, -1 for its
// anti-self-dual mirror.  Throws NotDefinite for non-definite input.
int connection_sign(const CurvatureTriple& t, const Metric4& g, double tol);

// Volume normalization: splits the wedge Gram into orientation, a positive
// coefficient nu_A with (tr sqrt(orient*gram/ref))^2 = Lambda^2 * nu_A, and
// the normalized Gram M_A.  ref > 0 rescales the reference volume form.
// Throws NotDefinite, and SignMismatch when the connection sign disagrees
// with the sign of Lambda.
NormalizedVolume normalize_volume(const CurvatureTriple& t, double tol,
                                  double ref = 1.0);

// Normalized curvature triple sgn(Lambda) * M_A^{-1/2} F used by the field
// equations.
std::array<TwoForm, 3> phi_map(const CurvatureTriple& t, const NormalizedVolume& nv,
                               double tol);

// Pointwise density bounds: (tr M_ref, Lambda^2 nu_A, 3 tr M_ref) / Lambda^2,
// where M_ref is the orientation-corrected Gram.
BoundsTriple pointwise_bounds(const CurvatureTriple& t, double tol);

// Non-throwing aggregate diagnosis of a point.
PointReport point_report(const CurvatureTriple& t, double tol);

// A random definite triple plus the flat-model generators it was built from:
// F_i = sum_j B_ij T*(omega_j) with T in GL+(4), B invertible, both with
// bounded conditioning.  sign(det B) is aligned with sign(Lambda) so the
// triple passes the sign consistency check.
struct TripleSeed {
  CurvatureTriple F;
  Eigen::Matrix4d T;
  Eigen::Matrix3d B;
};
TripleSeed random_definite_triple(Rng& rng, double Lambda);

} // namespace defpoint
} // namespace defconn
