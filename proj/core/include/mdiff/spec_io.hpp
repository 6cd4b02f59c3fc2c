#pragma once

#include <nlohmann/json.hpp>
#include <string>

#include "mdiff/geometry.hpp"

namespace mdiff {

/// JSON layout mirrors the type fields:
///   {"geometry": {"type": "Disk2D", "radius": 1.0},
///    "D": 1.0, "gamma0": 0.0, "I0": 0.0, "epsilon": 0.05,
///    "compartments": [{"center": [0.3, 0.0], "ell": 1.0, "kappa": 2.0,
///                      "model": {"type": "I", "c0": 1.0}}]}
/// All quantities are nondimensional (domain scale L = 1 by convention).
/// kappa accepts the string "inf" for a Dirichlet interface.
nlohmann::json to_json(const ProblemSpec& spec);
ProblemSpec spec_from_json(const nlohmann::json& j);

ProblemSpec read_spec_file(const std::string& path);
void write_spec_file(const std::string& path, const ProblemSpec& spec);

}  // namespace mdiff
