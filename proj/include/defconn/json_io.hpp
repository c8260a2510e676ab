#pragma once

// JSON schemas for the data the command line tool exchanges with callers.
//
// Inputs are validated strictly: every required key must be present, every
// present key must be recognized, and every number must be finite.  Schema
// violations throw Error(BadInput) with a message naming the offending key,
// so the tool can map them to its usage-error exit code.

#include <string>

#include <json.hpp>

#include "defconn/cohom1.hpp"
#include "defconn/defpoint.hpp"

namespace defconn {
namespace jsonio {

using ordered_json = nlohmann::ordered_json;

// File helpers; a path of "-" means stdin / stdout.
ordered_json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const ordered_json& j);

// Curvature triple: {"F": [[6 reals] x3], "Lambda": real}.
CurvatureTriple triple_from_json(const ordered_json& j);
ordered_json triple_to_json(const CurvatureTriple& t);

// Profile grid:
//   {"t0": real, "t1": real, "n": int, "Lambda": real,
//    "bc": "even" | "free",
//    "f": "round" | "anisotropic" | [[n reals] x3],
//    "amplitude": real}            (only with "f": "anisotropic")
cohom1::ProfileGrid profile_from_json(const ordered_json& j);
ordered_json profile_to_json(const cohom1::ProfileGrid& g);

// Reports.
ordered_json point_report_to_json(const PointReport& r);

} // namespace jsonio
} // namespace defconn
