#include "mdiff/spec_io.hpp"

#include <fstream>

namespace mdiff {

using nlohmann::json;

namespace {

json kappa_to_json(double kappa) {
  if (std::isinf(kappa)) return "inf";
  return kappa;
}

double kappa_from_json(const json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf")
      return std::numeric_limits<double>::infinity();
    throw DomainError("kappa: expected a number or \"inf\"");
  }
  return j.get<double>();
}

json point_to_json(const Point& p, int dim) {
  json a = json::array();
  for (int i = 0; i < dim; ++i) a.push_back(p[i]);
  return a;
}

Point point_from_json(const json& j) {
  Point p = Point::Zero();
  if (!j.is_array() || j.size() < 2 || j.size() > 3)
    throw DomainError("center: expected an array of 2 or 3 coordinates");
  for (size_t i = 0; i < j.size(); ++i) p[static_cast<int>(i)] = j[i].get<double>();
  return p;
}

}  // namespace

json to_json(const ProblemSpec& spec) {
  json g;
  std::visit(
      [&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Disk2D>)
          g = {{"type", "Disk2D"}, {"radius", d.radius}};
        if constexpr (std::is_same_v<T, Rect2D>)
          g = {{"type", "Rect2D"}, {"L1", d.L1}, {"L2", d.L2}};
        if constexpr (std::is_same_v<T, Sphere3D>)
          g = {{"type", "Sphere3D"}, {"R0", d.R0}};
      },
      spec.geometry);

  const int dim = dimension(spec.geometry);
  json comps = json::array();
  for (const auto& c : spec.compartments) {
    json m;
    std::visit(
        [&](const auto& mm) {
          using T = std::decay_t<decltype(mm)>;
          if constexpr (std::is_same_v<T, ModelI>)
            m = {{"type", "I"}, {"c0", mm.c0}};
          if constexpr (std::is_same_v<T, ModelII>)
            m = {{"type", "II"},
                 {"Dbar", mm.Dbar},
                 {"gammabar", mm.gammabar},
                 {"Ibar", mm.Ibar}};
          if constexpr (std::is_same_v<T, ModelIII>) {
            m = {{"type", "III"}, {"K", mm.K}, {"w0", mm.w0}};
            if (!mm.kinetics_name.empty()) {
              m["kinetics_name"] = mm.kinetics_name;
              m["kinetics_params"] = mm.kinetics_params;
            }
          }
        },
        c.model);
    comps.push_back({{"center", point_to_json(c.center, dim)},
                     {"ell", c.ell},
                     {"kappa", kappa_to_json(c.kappa)},
                     {"model", m}});
  }

  json out = {{"geometry", g},
              {"compartments", comps},
              {"D", spec.D},
              {"gamma0", spec.gamma0},
              {"I0", spec.I0},
              {"epsilon", spec.epsilon}};
  if (spec.sep_min_override) out["sep_min_override"] = *spec.sep_min_override;
  return out;
}

ProblemSpec spec_from_json(const json& j) {
  ProblemSpec spec;
  const auto& g = j.at("geometry");
  const std::string type = g.at("type").get<std::string>();
  if (type == "Disk2D") {
    spec.geometry = Disk2D{g.at("radius").get<double>()};
  } else if (type == "Rect2D") {
    spec.geometry = Rect2D{g.at("L1").get<double>(), g.at("L2").get<double>()};
  } else if (type == "Sphere3D") {
    spec.geometry = Sphere3D{g.at("R0").get<double>()};
  } else {
    throw DomainError("unknown geometry type: " + type);
  }

  spec.D = j.at("D").get<double>();
  spec.gamma0 = j.value("gamma0", 0.0);
  spec.I0 = j.value("I0", 0.0);
  spec.epsilon = j.at("epsilon").get<double>();
  if (j.contains("sep_min_override"))
    spec.sep_min_override = j.at("sep_min_override").get<double>();

  for (const auto& cj : j.value("compartments", json::array())) {
    CompartmentSpec c;
    c.center = point_from_json(cj.at("center"));
    c.ell = cj.value("ell", 1.0);
    c.kappa = cj.contains("kappa")
                  ? kappa_from_json(cj.at("kappa"))
                  : std::numeric_limits<double>::infinity();
    const auto& mj = cj.at("model");
    const std::string mt = mj.at("type").get<std::string>();
    if (mt == "I") {
      c.model = ModelI{mj.value("c0", 0.0)};
    } else if (mt == "II") {
      c.model = ModelII{mj.at("Dbar").get<double>(),
                        mj.at("gammabar").get<double>(),
                        mj.value("Ibar", 0.0)};
    } else if (mt == "III") {
      ModelIII m3;
      m3.K = mj.at("K").get<int>();
      m3.w0 = mj.value("w0", std::vector<double>{});
      m3.kinetics_name = mj.value("kinetics_name", std::string{});
      m3.kinetics_params = mj.value("kinetics_params", std::vector<double>{});
      c.model = m3;
    } else {
      throw DomainError("unknown boundary model type: " + mt);
    }
    spec.compartments.push_back(std::move(c));
  }
  return spec;
}

ProblemSpec read_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open spec file: " + path);
  json j;
  in >> j;
  return spec_from_json(j);
}

void write_spec_file(const std::string& path, const ProblemSpec& spec) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open for writing: " + path);
  out << to_json(spec).dump(2) << "\n";
}

}  // namespace mdiff
