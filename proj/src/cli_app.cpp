#include "defconn/cli_app.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "defconn/cohom1.hpp"
#include "defconn/defpoint.hpp"
#include "defconn/errors.hpp"
#include "defconn/hesssym.hpp"
#include "defconn/json_io.hpp"
#include "defconn/riemann.hpp"
#include "defconn/rng.hpp"
#include "defconn/sym3.hpp"

namespace defconn {
namespace cli {

namespace {

using jsonio::ordered_json;

// ---------------------------------------------------------------- check-point
int run_check_point(const std::string& input, const std::string& output,
                    double tol) {
  const CurvatureTriple t = jsonio::triple_from_json(jsonio::read_json_file(input));
  const PointReport rep = defpoint::point_report(t, tol);
  jsonio::write_json_file(output, jsonio::point_report_to_json(rep));
  const bool definite = rep.definiteness == Definiteness::PositiveDefinite ||
                        rep.definiteness == Definiteness::NegativeDefinite;
  return (definite && rep.lambda_matches) ? kExitPass : kExitNegative;
}

// --------------------------------------------------------------- symbol-audit
int run_symbol_audit(std::uint64_t seed, int count, double tol, int threads,
                     const std::string& output) {
  if (count <= 0) fail(ErrorCode::BadInput, "count must be positive");
  const hesssym::SymbolAudit audit = hesssym::symbol_audit(seed, count, tol, threads);
  const bool pass = audit.worst_hess_eig <= tol && audit.min_kernel_dim == 7 &&
                    audit.max_kernel_dim == 7 && audit.worst_projector_err < 1e-6 &&
                    audit.worst_gauge_fixed_eig < 0.0;
  ordered_json j;
  j["seed"] = seed;
  j["count"] = count;
  j["worst_hessian_eigenvalue"] = audit.worst_hess_eig;
  j["min_kernel_dim"] = audit.min_kernel_dim;
  j["max_kernel_dim"] = audit.max_kernel_dim;
  j["worst_kernel_projector_err"] = audit.worst_projector_err;
  j["worst_gauge_fixed_eigenvalue"] = audit.worst_gauge_fixed_eig;
  j["pass"] = pass;
  jsonio::write_json_file(output, j);
  return pass ? kExitPass : kExitNegative;
}

// ----------------------------------------------------------------------- flow
int run_flow(const std::string& input, const std::string& output,
             const std::string& telemetry, int steps, double dtau,
             double residual_tol, bool deturck, int threads, int stride) {
  const cohom1::ProfileGrid g =
      jsonio::profile_from_json(jsonio::read_json_file(input));
  cohom1::FlowOptions opts;
  opts.max_steps = steps;
  opts.dtau0 = dtau;
  opts.residual_tol = residual_tol;
  opts.deturck = deturck;
  opts.threads = threads;
  opts.telemetry_stride = stride;
  const cohom1::FlowResult res = cohom1::flow_run(g, opts);

  if (!telemetry.empty()) {
    std::ofstream csv(telemetry);
    if (!csv) fail(ErrorCode::BadInput, "cannot open telemetry file: " + telemetry);
    csv << "step,tau,S,residual_sup,margin_min,M_eig_min,M_eig_max\n";
    char line[256];
    for (const cohom1::FlowRow& r : res.rows) {
      std::snprintf(line, sizeof line,
                    "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.step, r.tau,
                    r.S, r.residual_sup, r.margin_min, r.m_eig_min, r.m_eig_max);
      csv << line;
    }
  }

  ordered_json j;
  j["terminal"] = res.terminal;
  j["steps"] = res.steps_done;
  j["tau_final"] = res.tau_final;
  j["S"] = res.rows.empty() ? 0.0 : res.rows.back().S;
  j["residual_sup"] = res.rows.empty() ? 0.0 : res.rows.back().residual_sup;
  j["margin_min"] = res.rows.empty() ? 0.0 : res.rows.back().margin_min;
  if (deturck) j["off_ansatz_sup"] = res.deturck_off_ansatz_sup;
  j["profile"] = jsonio::profile_to_json(res.profile);
  jsonio::write_json_file(output, j);
  return res.terminal == "converged" ? kExitPass : kExitNegative;
}

// -------------------------------------------------------------- riemann-check
int run_riemann_check(std::uint64_t seed, int count, double tol,
                      const std::string& output) {
  if (count <= 0) fail(ErrorCode::BadInput, "count must be positive");
  ordered_json j;

  // Constant-curvature model points: the round metric has Lambda > 0 and
  // positive determinant sign, the hyperbolic one Lambda < 0 and negative
  // sign; both are definite.
  ordered_json models = ordered_json::array();
  {
    struct Model {
      const char* name;
      double lambda;
    } named[2] = {{"round-sphere", 3.0}, {"hyperbolic", -3.0}};
    for (const auto& m : named) {
      const double scal = 4.0 * m.lambda;  // Einstein: scal = 4 Lambda
      riemann::CriterionResult cr = riemann::definite_criterion(
          scal, Sym3{}, Eigen::Matrix3d::Zero(), tol);
      ordered_json e;
      e["name"] = m.name;
      e["Lambda"] = m.lambda;
      e["definite"] = cr.definite;
      e["sign"] = cr.sign;
      models.push_back(e);
    }
  }
  j["models"] = models;

  // Topological obstruction values for reference constant-curvature spaces.
  ordered_json ht = ordered_json::array();
  {
    struct Entry {
      const char* name;
      double chi, tau;
    } table[3] = {{"sphere", 2, 0}, {"projective-plane", 3, 1}, {"flat-torus", 0, 0}};
    for (const auto& t : table) {
      riemann::HalfSignature hs = riemann::hitchin_thorpe_half(t.chi, t.tau);
      ordered_json e;
      e["name"] = t.name;
      e["chi"] = t.chi;
      e["tau"] = t.tau;
      e["value"] = hs.value;
      e["positive"] = hs.positive;
      ht.push_back(e);
    }
  }
  j["half_signature"] = ht;

  // Seeded sweep: random trace-free self-dual Weyl parts under the spectral
  // hypothesis must never violate the eigenvalue chain.
  int applicable = 0, chain_violations = 0, definite_count = 0;
  for (int i = 0; i < count; ++i) {
    Rng rng = Rng::indexed(seed, static_cast<std::uint64_t>(i));
    const double lambda = rng.uniform(0.5, 6.0);
    // Trace-free W+ eigenvalues inside the hypothesis region.
    const double w1 = -rng.uniform(0.0, lambda / 3.0) * 0.999;
    const double w3 = rng.uniform(0.0, -2.0 * w1);
    const double w2 = -(w1 + w3);
    Sym3 w;
    w.l[0] = w1;
    w.l[2] = w2;
    w.l[5] = w3;
    riemann::GurskyReport rep = riemann::gursky_check(lambda, w, tol);
    if (rep.hypothesis_met) {
      ++applicable;
      if (rep.ordering_holds && !rep.chain_holds) ++chain_violations;
    }
    riemann::CriterionResult cr = riemann::definite_criterion(
        4.0 * lambda, w, Eigen::Matrix3d::Zero(), tol);
    if (cr.definite) ++definite_count;
  }
  ordered_json sweep;
  sweep["seed"] = seed;
  sweep["count"] = count;
  sweep["hypothesis_met"] = applicable;
  sweep["chain_violations"] = chain_violations;
  sweep["definite_count"] = definite_count;
  j["sweep"] = sweep;

  const bool pass = chain_violations == 0 && applicable > 0;
  j["pass"] = pass;
  jsonio::write_json_file(output, j);
  return pass ? kExitPass : kExitNegative;
}

} // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Definite connection toolkit: pointwise checks, symbol audits, "
               "and the action flow on cohomogeneity-one profiles"};
  app.require_subcommand(1);

  std::string input = "-";
  std::string output = "-";
  std::string telemetry;
  double tol = 1e-9;
  std::uint64_t seed = 1;
  int count = 100;
  int threads = 0;
  int steps = 10000;
  double dtau = 0.01;
  double residual_tol = 1e-6;
  bool deturck = false;
  int stride = 1;

  CLI::App* check = app.add_subcommand(
      "check-point", "Classify one curvature triple: definiteness, orientation, "
                     "connection sign, and volume normalization");
  check->add_option("--input", input, "triple JSON file ('-' for stdin)");
  check->add_option("--output", output, "report JSON file ('-' for stdout)");
  check->add_option("--tol", tol, "degeneracy tolerance");

  CLI::App* audit = app.add_subcommand(
      "symbol-audit", "Audit the second-variation symbol at seeded random "
                      "definite points");
  audit->add_option("--seed", seed, "sweep seed");
  audit->add_option("--count", count, "number of audited points");
  audit->add_option("--tol", tol, "kernel threshold");
  audit->add_option("--threads", threads, "OpenMP threads (0 = serial reference)");
  audit->add_option("--output", output, "summary JSON file");

  CLI::App* flow = app.add_subcommand(
      "flow", "Run the action flow on a profile grid until the criticality "
              "residual is below tolerance");
  flow->add_option("--input", input, "profile JSON file ('-' for stdin)");
  flow->add_option("--output", output, "result JSON file ('-' for stdout)");
  flow->add_option("--telemetry", telemetry, "per-step CSV file");
  flow->add_option("--steps", steps, "step budget");
  flow->add_option("--dtau", dtau, "initial step size");
  flow->add_option("--residual-tol", residual_tol, "convergence threshold");
  flow->add_flag("--deturck", deturck, "flow with the gauge-adjusted velocity");
  flow->add_option("--threads", threads, "OpenMP threads (0 = serial reference)");
  flow->add_option("--stride", stride, "telemetry row stride");

  CLI::App* riem = app.add_subcommand(
      "riemann-check", "Evaluate the curvature-operator definiteness criterion "
                       "and the Weyl eigenvalue chain on models and seeded sweeps");
  riem->add_option("--seed", seed, "sweep seed");
  riem->add_option("--count", count, "sweep size");
  riem->add_option("--tol", tol, "symmetry/trace tolerance");
  riem->add_option("--output", output, "report JSON file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    // CLI11 returns 0 for --help; everything else is a usage error.
    return code == 0 ? kExitPass : kExitError;
  }

  try {
    if (check->parsed()) return run_check_point(input, output, tol);
    if (audit->parsed()) return run_symbol_audit(seed, count, tol, threads, output);
    if (flow->parsed())
      return run_flow(input, output, telemetry, steps, dtau, residual_tol,
                      deturck, threads, stride);
    if (riem->parsed()) return run_riemann_check(seed, count, tol, output);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

} // namespace cli
} // namespace defconn
