#include "mdiff/manifest.hpp"

#include <cstdio>
#include <fstream>

#include "mdiff/errors.hpp"

namespace mdiff {

nlohmann::json to_json(const RunManifest& m) {
  return {{"subcommand", m.subcommand},
          {"spec", m.spec_path},
          {"parameters", m.parameters},
          {"outputs", m.outputs},
          {"version", m.version},
          {"wall_time_s", m.wall_time_s}};
}

void write_manifest(const std::string& path, const RunManifest& m) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write manifest: " + path);
  out << to_json(m).dump(2) << "\n";
}

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17e", v);
  return buf;
}

}  // namespace mdiff
