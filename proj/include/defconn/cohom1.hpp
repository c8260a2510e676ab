#pragma once

#include <array>
#include <string>
#include <vector>

#include "defconn/defpoint.hpp"

namespace defconn {
namespace cohom1 {

// Boundary treatment of the cell-centered grid.  Even extends every profile
// component by mirror reflection across both endpoints (the smooth closing
// class); Free uses one-sided stencils.
enum class ParityBC { Even, Free };

// Diagonal profile f_1, f_2, f_3 on a uniform cell-centered grid over
// [t0, t1]: cell k has center t0 + (k + 1/2) h.
struct ProfileGrid {
  double t0 = 0.0;
  double t1 = 0.0;
  int n = 0;
  double Lambda = 0.0;
  ParityBC bc = ParityBC::Even;
  std::array<std::vector<double>, 3> f;

  double h() const { return (t1 - t0) / n; }
  double center(int k) const { return t0 + (k + 0.5) * h(); }
};

using GridField = std::array<std::vector<double>, 3>;

ProfileGrid make_grid(double t0, double t1, int n, double Lambda, ParityBC bc);

// Profile of the constant-curvature solution on [0, pi], computed by solving
// the frame structure equations of the round metric at every cell center.
ProfileGrid round_profile(int n, double Lambda = -3.0);

// Round profile with a smooth anisotropic multiplicative perturbation of the
// given relative amplitude (vanishing at both poles).
ProfileGrid round_anisotropic(int n, double Lambda, double amplitude);

// Fourth-order first derivative on the cell-centered grid.  even_parity
// selects the reflection sign of the ghost cells when bc is Even.
std::vector<double> derivative(const std::vector<double>& y, double h, ParityBC bc,
                               bool even_parity);

// Curvature coefficients of the diagonal profile:
//   F_c = p_c dt^s_c + q_c s_a^s_b,  p_c = f_c',  q_c = f_a f_b - f_c.
struct AnsatzCurvature {
  GridField p, q;
};
AnsatzCurvature ansatz_curvature(const ProfileGrid& g);

// Diagonal wedge Gram entries 2 p_c q_c against dt^s_1^s_2^s_3, their common
// sign, and the worst margin.
struct GridGram {
  GridField m;
  int orientation = 0;
  double margin_min = 0.0;  // min over cells of orientation * 2 p q
  bool definite = false;    // margin_min > 0
};
GridGram gram_on_grid(const ProfileGrid& g);

// The curvature triple of one cell in the pointwise 2-form basis
// (coframe (dt, s_1, s_2, s_3)).
CurvatureTriple grid_point_triple(const ProfileGrid& g, int k);

// Reconstructed diagonal metric g = alpha0 dt^2 + sum alpha_c s_c^2 and the
// normalized volume nu_hat = sqrt(det) per cell.  Throws NotDefinite when the
// profile is not definite.
struct GridMetric {
  std::vector<double> alpha0;
  GridField alpha;
  std::vector<double> nu_hat;
};
GridMetric metric_on_grid(const ProfileGrid& g);

// Reduced action S = (4/3) * integral of (s_1+s_2+s_3)^2 dt with
// s_c = sqrt(orientation * 2 p_c q_c); midpoint quadrature.
double action(const ProfileGrid& g);

struct ActionReport {
  double S = 0.0;
  double quad_error = 0.0;      // Euler-Maclaurin estimate of the h^4 term
  double iso_spread_max = 0.0;  // worst relative spread of the Gram entries
  double margin_min = 0.0;
  bool equality_case = false;   // isotropic within the given tolerance
};
ActionReport action_report(const ProfileGrid& g, double iso_tol);

// 4 * integral of sum_c 2 p_c q_c dt: the characteristic number of the
// closing class (equals 4 for profiles running from 1 to 0).
double pontryagin_integral(const ProfileGrid& g);

// Euler-Lagrange residual r_c of the reduced action:
//   r_c = phi_c + psi_c' - f_a phi_b - f_b phi_a,
//   phi_c = p_c (s_1+s_2+s_3) / (Lambda s_c),
//   psi_c = q_c (s_1+s_2+s_3) / (Lambda s_c).
GridField el_residual(const ProfileGrid& g);

// Ascent velocity of the volume-normalized gradient flow,
//   v_c = -(Lambda * orientation / 6 pi^2) * r_c * alpha_c / nu_hat.
GridField flow_velocity(const ProfileGrid& g, int threads = 0);

// First variation of the action against a profile perturbation:
//   dS(u) = -(8 Lambda orientation / 3) * integral of sum_c r_c u_c dt.
double action_gradient_pairing(const ProfileGrid& g, const GridField& u);

// Largest explicit-Euler step of the stiff part: h^2 / (2 max shield).
double stability_bound(const ProfileGrid& g);

// One explicit Euler step of the flow (reference integrator).
ProfileGrid grad_flow_step(const ProfileGrid& g, double dtau, int threads = 0);

// Reparametrization-fixed velocity.  mu is the pointwise least-squares
// coefficient of the time-translation direction f_c' inside the velocity;
// the spatial least-squares components and the component of the gauge vector
// outside the diagonal family are reported as diagnostics.
struct DeTurckStep {
  GridField velocity;           // v_c - mu p_c
  std::vector<double> mu;
  double ls_spatial_sup = 0.0;  // least-squares weight on the orbit directions
  double off_ansatz_sup = 0.0;  // metric norm of the non-diagonal gauge term
};
DeTurckStep deturck_velocity(const ProfileGrid& g, const GridField& reference_f,
                             int threads = 0);

struct FlowOptions {
  int max_steps = 10000;
  double dtau0 = 0.01;
  // Each step is a composite: the interior advances by one semi-implicit
  // solve, while the cells near closed ends -- whose definiteness margin
  // vanishes like t^3 and would be wiped out by the smoothing kernel of the
  // implicit solve -- advance over the same dtau by explicit substeps of the
  // true velocity.  The substep count grows linearly with dtau, so the cap
  // balances per-step cost against step count.
  double dtau_max = 0.02;
  bool adapt = true;            // grow the step 1.1x after accepted steps
  double residual_tol = 1e-6;   // sup norm of r for convergence
  double action_drop_tol = 1e-8;  // backtrack when S decreases more than this
  double margin_floor = 0.0;    // backtrack when the margin falls to or below
  double margin_decay = 0.8;    // backtrack when margin' < decay * margin
  int threads = 0;
  bool deturck = false;
  int telemetry_stride = 1;
};

struct FlowRow {
  int step = 0;
  double tau = 0.0;
  double S = 0.0;
  double residual_sup = 0.0;
  double margin_min = 0.0;
  double m_eig_min = 0.0;  // extremes of the normalized Gram over the grid
  double m_eig_max = 0.0;
};

struct FlowResult {
  std::vector<FlowRow> rows;
  std::string terminal;  // converged | max-steps | definiteness-lost
  ProfileGrid profile;
  double tau_final = 0.0;
  int steps_done = 0;
  double deturck_off_ansatz_sup = 0.0;
};

// Stabilized semi-implicit ascent flow with backtracking.
FlowResult flow_run(const ProfileGrid& g, const FlowOptions& opts);

// Second central difference of the action along the ray f + eps * u.
double fd_hessian(const ProfileGrid& g, const GridField& u, double eps);

// Second variation at a critical profile through the constrained
// linearization of the Gram map:
//   (4 |Lambda| / 3) * integral of tr(da * L(da)) nu_hat dt,
//   da_c = 2 (q_c u_c' + p_c dq_c) * orientation / nu_hat,
//   dq_c = f_a u_b + f_b u_a - u_c.
double hessian_quadratic_form(const ProfileGrid& g, const GridField& u, double tol);

// Constancy diagnostics of the reconstructed metric: relative spread of the
// Gram entries, and of the radial/orbital curvatures over the interior.
struct CurvatureConstancy {
  double iso_spread_max = 0.0;
  double k_mean = 0.0;
  double k_spread = 0.0;
};
CurvatureConstancy constant_curvature_check(const ProfileGrid& g);

// Cells where the ordering of the Gram entries changes or ties within tol;
// branch choices of matrix square roots are only stable away from these.
std::vector<int> eigen_crossing_scan(const ProfileGrid& g, double tol);

// Frame coefficients gamma of the torsion-free metric connection:
// solves de^mu + omega^mu_nu ^ e^nu = 0 with omega_{mu nu} = -omega_{nu mu} =
// sum_rho gamma[pair(mu,nu)*4+rho] e^rho, pairs ordered like the 2-form
// slots.  Input: the four frame differentials de^mu in the frame basis.
Eigen::Matrix<double, 24, 1> solve_structure_equations(
    const std::array<TwoForm, 4>& frame_differentials);

} // namespace cohom1
} // namespace defconn
