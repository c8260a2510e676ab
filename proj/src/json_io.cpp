#include "defconn/json_io.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "defconn/errors.hpp"
#include "defconn/sym3.hpp"

namespace defconn {
namespace jsonio {

namespace {

[[noreturn]] void bad(const std::string& what) {
  fail(ErrorCode::BadInput, what);
}

void require_object(const ordered_json& j, const char* what) {
  if (!j.is_object()) bad(std::string(what) + " must be a JSON object");
}

// Strict key handling: everything required, nothing unknown.
void check_keys(const ordered_json& j, const std::vector<std::string>& required,
                const std::vector<std::string>& optional = {}) {
  for (const auto& k : required)
    if (!j.contains(k)) bad("missing key \"" + k + "\"");
  for (const auto& item : j.items()) {
    const std::string& k = item.key();
    bool known = false;
    for (const auto& r : required) known = known || (k == r);
    for (const auto& o : optional) known = known || (k == o);
    if (!known) bad("unknown key \"" + k + "\"");
  }
}

double finite_number(const ordered_json& j, const std::string& key) {
  if (!j.is_number()) bad("\"" + key + "\" must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) bad("\"" + key + "\" must be finite");
  return v;
}

int integer(const ordered_json& j, const std::string& key) {
  if (!j.is_number_integer()) bad("\"" + key + "\" must be an integer");
  return j.get<int>();
}

} // namespace

ordered_json read_json_file(const std::string& path) {
  std::string text;
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    text = ss.str();
  } else {
    std::ifstream in(path);
    if (!in) bad("cannot open input file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  ordered_json j = ordered_json::parse(text, nullptr, false);
  if (j.is_discarded()) bad("input is not valid JSON");
  return j;
}

void write_json_file(const std::string& path, const ordered_json& j) {
  const std::string text = j.dump(2) + "\n";
  if (path == "-" || path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) bad("cannot open output file: " + path);
  out << text;
}

CurvatureTriple triple_from_json(const ordered_json& j) {
  require_object(j, "curvature triple");
  check_keys(j, {"F", "Lambda"});
  const auto& f = j.at("F");
  if (!f.is_array() || f.size() != 3)
    bad("\"F\" must be an array of three two-forms");
  CurvatureTriple t;
  for (int i = 0; i < 3; ++i) {
    const auto& row = f.at(i);
    if (!row.is_array() || row.size() != 6)
      bad("each entry of \"F\" must hold six components");
    for (int k = 0; k < 6; ++k)
      t.F[i].c[k] = finite_number(row.at(k), "F");
  }
  t.Lambda = finite_number(j.at("Lambda"), "Lambda");
  return t;
}

ordered_json triple_to_json(const CurvatureTriple& t) {
  ordered_json j;
  ordered_json f = ordered_json::array();
  for (int i = 0; i < 3; ++i) {
    ordered_json row = ordered_json::array();
    for (int k = 0; k < 6; ++k) row.push_back(t.F[i].c[k]);
    f.push_back(row);
  }
  j["F"] = f;
  j["Lambda"] = t.Lambda;
  return j;
}

cohom1::ProfileGrid profile_from_json(const ordered_json& j) {
  require_object(j, "profile");
  check_keys(j, {"t0", "t1", "n", "Lambda", "bc", "f"}, {"amplitude"});
  const double t0 = finite_number(j.at("t0"), "t0");
  const double t1 = finite_number(j.at("t1"), "t1");
  const int n = integer(j.at("n"), "n");
  const double lambda = finite_number(j.at("Lambda"), "Lambda");

  const auto& bc = j.at("bc");
  if (!bc.is_string()) bad("\"bc\" must be \"even\" or \"free\"");
  cohom1::ParityBC parity;
  if (bc.get<std::string>() == "even")
    parity = cohom1::ParityBC::Even;
  else if (bc.get<std::string>() == "free")
    parity = cohom1::ParityBC::Free;
  else
    bad("\"bc\" must be \"even\" or \"free\"");

  const auto& f = j.at("f");
  if (f.is_string()) {
    const std::string preset = f.get<std::string>();
    const bool anis = preset == "anisotropic";
    if (preset != "round" && !anis)
      bad("profile preset must be \"round\" or \"anisotropic\"");
    if (!anis && j.contains("amplitude"))
      bad("\"amplitude\" only applies to the \"anisotropic\" preset");
    double amplitude = 0.01;
    if (j.contains("amplitude"))
      amplitude = finite_number(j.at("amplitude"), "amplitude");
    cohom1::ProfileGrid g = anis
                                ? cohom1::round_anisotropic(n, lambda, amplitude)
                                : cohom1::round_profile(n, lambda);
    // Presets fix the interval to the closing one; reject a contradiction.
    if (std::abs(t0 - g.t0) > 1e-12 || std::abs(t1 - g.t1) > 1e-12)
      bad("presets require t0 = 0 and t1 = pi");
    if (parity != cohom1::ParityBC::Even)
      bad("presets require \"bc\": \"even\"");
    return g;
  }

  if (j.contains("amplitude"))
    bad("\"amplitude\" only applies to the \"anisotropic\" preset");
  if (!f.is_array() || f.size() != 3)
    bad("\"f\" must be a preset name or an array of three components");
  cohom1::ProfileGrid g = cohom1::make_grid(t0, t1, n, lambda, parity);
  for (int c = 0; c < 3; ++c) {
    const auto& row = f.at(c);
    if (!row.is_array() || static_cast<int>(row.size()) != n)
      bad("each profile component must hold n samples");
    for (int k = 0; k < n; ++k)
      g.f[c][k] = finite_number(row.at(k), "f");
  }
  return g;
}

ordered_json profile_to_json(const cohom1::ProfileGrid& g) {
  ordered_json j;
  j["t0"] = g.t0;
  j["t1"] = g.t1;
  j["n"] = g.n;
  j["Lambda"] = g.Lambda;
  j["bc"] = g.bc == cohom1::ParityBC::Even ? "even" : "free";
  ordered_json f = ordered_json::array();
  for (int c = 0; c < 3; ++c) {
    ordered_json row = ordered_json::array();
    for (int k = 0; k < g.n; ++k) row.push_back(g.f[c][k]);
    f.push_back(row);
  }
  j["f"] = f;
  return j;
}

ordered_json point_report_to_json(const PointReport& r) {
  ordered_json j;
  j["definiteness"] = definiteness_name(r.definiteness);
  ordered_json gram = ordered_json::array();
  for (int i = 0; i < 6; ++i) gram.push_back(r.gram.l[i]);
  j["gram_lower"] = gram;
  j["orientation"] = r.orientation;
  j["connection_sign"] = r.connection_sign;
  j["nu"] = r.nu_A;
  ordered_json m = ordered_json::array();
  for (int i = 0; i < 6; ++i) m.push_back(r.M_A.l[i]);
  j["M_lower"] = m;
  j["lambda_candidates"] = {r.lambda_candidates[0], r.lambda_candidates[1]};
  j["lambda_consistent"] = r.lambda_consistent;
  j["lambda_matches"] = r.lambda_matches;
  j["bounds"] = {{"lower", r.bounds.lower},
                 {"value", r.bounds.value},
                 {"upper", r.bounds.upper}};
  return j;
}

} // namespace jsonio
} // namespace defconn
