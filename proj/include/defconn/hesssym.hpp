#pragma once

#include <cstdint>
#include <vector>

#include "defconn/defpoint.hpp"
#include "defconn/forms4.hpp"
#include "defconn/sym3.hpp"

namespace defconn {
namespace hesssym {

using Vec12 = Eigen::Matrix<double, 12, 1>;
using Mat12 = Eigen::Matrix<double, 12, 12>;
using Mat6x12 = Eigen::Matrix<double, 6, 12>;
using Mat12x4 = Eigen::Matrix<double, 12, 4>;
using Mat12x6 = Eigen::Matrix<double, 12, 6>;
using Mat12x7 = Eigen::Matrix<double, 12, 7>;
using Mat12x8 = Eigen::Matrix<double, 12, 8>;

// Everything the symbol calculus needs at one definite point: the triple,
// its volume normalization, the reconstructed metric, and the Cholesky
// frame that turns metric inner products into Euclidean ones.
struct PointFrame {
  CurvatureTriple F;
  NormalizedVolume nv;
  Metric4 g;
  Eigen::Matrix4d chol_L;  // g = L L^T
  Eigen::Matrix4d chol_K;  // L^{-1}
};

PointFrame make_frame(const CurvatureTriple& t, double tol);

// A nonzero covector direction, normalized to unit metric length.
struct SymbolDirection {
  OneForm eta;             // unit length for the frame metric
  Eigen::Vector4d eta_on;  // Cholesky coordinates, Euclidean unit
};

SymbolDirection make_symbol_direction(const PointFrame& fr, const OneForm& eta);

// Orthonormal coordinates of fiber-valued 1-forms (component i occupies
// entries 4i..4i+3) and back.
Vec12 to_on(const PointFrame& fr, const std::array<OneForm, 3>& a);
std::array<OneForm, 3> from_on(const PointFrame& fr, const Vec12& v);

// Infinitesimal diffeomorphism entering the gauge group: u -> iota_u F.
std::array<OneForm, 3> f_map(const PointFrame& fr, const Eigen::Vector4d& u);
// Its matrix in orthonormal coordinates, columns indexed by coordinate
// directions.
Mat12x4 f_matrix(const PointFrame& fr);

// Symbol of the linearized normalized Gram map in direction eta:
//   (delta a)_ij = orient * [ (eta^a_i)^F_j + F_i^(eta^a_j) ] / nu_A,
// as a matrix from orthonormal 12-coordinates to isometric Sym3 coordinates.
// It satisfies delta(iota_u F) = eta(u) * M_A identically.
Mat6x12 delta_symbol(const PointFrame& fr, const SymbolDirection& dir);

// Adjoint of delta_symbol with respect to the metric inner products
// (a plain transpose in these coordinates).
Mat12x6 delta_adjoint_symbol(const PointFrame& fr, const SymbolDirection& dir);

// Independent closed form of the same adjoint:
//   a_i = 2 * star3( eta ^ (N F)_i ),  (N F)_i = sum_j N_ij F_j.
std::array<OneForm, 3> delta_adjoint_explicit(const PointFrame& fr,
                                              const SymbolDirection& dir,
                                              const Sym3& n);

// Second-variation symbol (|Lambda| / 12 pi^2) * delta^T L delta.
// Negative semidefinite with a seven-dimensional kernel
// {eta (x) e} + {iota_u F}.
Mat12 hessian_symbol(const PointFrame& fr, const SymbolDirection& dir, double tol);

// Symbol of the combined gauge action, columns: three fiber rotations
// (xi -> -eta (x) xi) followed by four diffeomorphisms (u -> -iota_u F).
Mat12x7 gauge_symbol(const PointFrame& fr, const SymbolDirection& dir);

// Orthogonal projector onto the complement of the diffeomorphism image.
Mat12 proj_W(const PointFrame& fr);

struct GaugeFixedSymbol {
  Mat12 matrix;                      // H - P (I3 x etaeta^T) P
  Mat12x8 w_basis;                   // orthonormal basis of the complement
  double wA_max_eigenvalue = 0.0;    // top eigenvalue of the restriction (< 0)
};

// Gauge-fixed symbol: negative definite on the complement of the
// diffeomorphism image, kernel exactly that image.
GaugeFixedSymbol gauge_fixed_symbol(const PointFrame& fr, const SymbolDirection& dir,
                                    double tol);

// One audited random point: spectral facts about the symbol at a random
// definite triple and a random direction.
struct PointAudit {
  double hess_max_eig = 0.0;        // top eigenvalue / spectral radius
  int kernel_dim = 0;               // eigenvalues below tol * spectral radius
  double kernel_projector_err = 0.0;  // vs the predicted kernel, Frobenius
  double gauge_fixed_max_eig = 0.0;   // top eigenvalue of the W_A restriction
};

struct SymbolAudit {
  std::vector<PointAudit> points;
  double worst_hess_eig = 0.0;
  int min_kernel_dim = 0;
  int max_kernel_dim = 0;
  double worst_projector_err = 0.0;
  double worst_gauge_fixed_eig = 0.0;  // most positive W_A eigenvalue seen
};

// Audits `count` seeded random points.  threads <= 0 runs the serial
// reference loop; any positive value runs the parallel kernel with that many
// threads.  Results are identical either way.
SymbolAudit symbol_audit(std::uint64_t seed, int count, double tol, int threads);

} // namespace hesssym
} // namespace defconn
