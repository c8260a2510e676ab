#pragma once

#include <array>

#include <Eigen/Dense>

#include "defconn/errors.hpp"

namespace defconn {

// Symmetric 3x3 matrix stored as the lower triangle in the order
// (0,0), (1,0), (1,1), (2,0), (2,1), (2,2).
struct Sym3 {
  std::array<double, 6> l{};

  Eigen::Matrix3d mat() const {
    Eigen::Matrix3d m;
    m(0, 0) = l[0];
    m(1, 0) = m(0, 1) = l[1];
    m(1, 1) = l[2];
    m(2, 0) = m(0, 2) = l[3];
    m(2, 1) = m(1, 2) = l[4];
    m(2, 2) = l[5];
    return m;
  }

  static Sym3 from(const Eigen::Matrix3d& m) {
    Sym3 s;
    s.l = {m(0, 0), 0.5 * (m(1, 0) + m(0, 1)), m(1, 1),
           0.5 * (m(2, 0) + m(0, 2)), 0.5 * (m(2, 1) + m(1, 2)), m(2, 2)};
    return s;
  }

  static Sym3 identity() { return from(Eigen::Matrix3d::Identity()); }
};

enum class Definiteness { PositiveDefinite, NegativeDefinite, Indefinite, Degenerate };

const char* definiteness_name(Definiteness d);

namespace sym3 {

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

// Ascending eigenvalues.
Eigen::Vector3d eigenvalues(const Sym3& m);

// Degenerate takes precedence: any |eigenvalue| <= tol.
Definiteness classify(const Sym3& m, double tol);

// Principal square root / inverse square root of a positive definite matrix.
// Throws NotSymmetricPositive when classify(m, tol) is not PositiveDefinite.
Sym3 spd_sqrt(const Sym3& m, double tol);
Sym3 spd_inv_sqrt(const Sym3& m, double tol);

// Square root branch: signs[k] in {-1,+1} applies to the k-th eigenvalue in
// ascending order.  Throws DegenerateBranch when eigenvalues closer than
// degeneracy_tol (relative to the spectral radius) receive different signs.
Sym3 sqrt_branch(const Sym3& m, const std::array<int, 3>& signs, double tol,
                 double degeneracy_tol);

// Linearization of M |-> M^{-1/2} at the positive definite point m, applied
// to the symmetric direction n.  In the eigenbasis of m,
//   result_ij = -n_ij / (l_i l_j (l_i^{-1/2} + l_j^{-1/2})).
Sym3 sylvester_G(const Sym3& m, const Sym3& n, double tol);

// Exact inverse of sylvester_G: -m n sqrt(m) - sqrt(m) n m.
Sym3 map_H(const Sym3& m, const Sym3& n, double tol);

// Constrained linearization: sylvester_G applied to the projection of n onto
// the tangent space of { tr sqrt(M) = |Lambda| } at m_a,
//   map_L(n) = G( n - tr(m_a^{-1/2} n) / |Lambda| * m_a ).
Sym3 map_L(const Sym3& m_a, double Lambda, const Sym3& n, double tol);

// Isometric coordinates on symmetric matrices:
// (m00, m11, m22, sqrt2*m01, sqrt2*m02, sqrt2*m12); Frobenius inner product
// becomes the Euclidean dot product.
Vec6 to_onb(const Sym3& m);
Sym3 from_onb(const Vec6& v);

// Matrix of map_L in the isometric coordinates (symmetric, negative
// semidefinite with kernel spanned by to_onb(m_a) when tr sqrt(m_a)=|Lambda|).
Mat6 l_matrix(const Sym3& m_a, double Lambda, double tol);

} // namespace sym3
} // namespace defconn
