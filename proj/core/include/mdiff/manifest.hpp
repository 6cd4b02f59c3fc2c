#pragma once

#include <nlohmann/json.hpp>
#include <string>
#include <vector>

namespace mdiff {

/// Provenance record written next to every CLI output. Identical inputs and
/// parameters reproduce byte-identical outputs; the wall time is informative
/// only.
struct RunManifest {
  std::string subcommand;
  std::string spec_path;
  nlohmann::json parameters;  // every numeric knob that affects the output
  std::vector<std::string> outputs;
  std::string version;
  double wall_time_s = 0.0;
};

nlohmann::json to_json(const RunManifest& m);
void write_manifest(const std::string& path, const RunManifest& m);

/// Fixed 17-significant-digit scientific formatting used by all CSV output;
/// round-trips doubles exactly.
std::string format_g17(double v);

}  // namespace mdiff
