#include "mdiff/geometry.hpp"

#include <algorithm>
#include <numbers>
#include <sstream>

namespace mdiff {

namespace {
constexpr double pi = std::numbers::pi;
}

int dimension(const DomainGeometry& g) {
  return std::holds_alternative<Sphere3D>(g) ? 3 : 2;
}

double domain_volume(const DomainGeometry& g) {
  return std::visit(
      [](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Disk2D>) return pi * d.radius * d.radius;
        if constexpr (std::is_same_v<T, Rect2D>) return d.L1 * d.L2;
        if constexpr (std::is_same_v<T, Sphere3D>)
          return 4.0 / 3.0 * pi * d.R0 * d.R0 * d.R0;
      },
      g);
}

double inscribing_length(const DomainGeometry& g) {
  return std::visit(
      [](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Disk2D>) return 2.0 * d.radius;
        if constexpr (std::is_same_v<T, Rect2D>) return std::min(d.L1, d.L2);
        if constexpr (std::is_same_v<T, Sphere3D>) return 2.0 * d.R0;
      },
      g);
}

double boundary_distance(const DomainGeometry& g, const Point& x) {
  return std::visit(
      [&](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Disk2D>)
          return d.radius - std::hypot(x[0], x[1]);
        if constexpr (std::is_same_v<T, Rect2D>)
          return std::min(std::min(x[0], d.L1 - x[0]),
                          std::min(x[1], d.L2 - x[1]));
        if constexpr (std::is_same_v<T, Sphere3D>) return d.R0 - x.norm();
      },
      g);
}

double nu_from_epsilon(double epsilon) {
  if (!(epsilon > 0.0) || !(epsilon < 1.0))
    throw DomainError("nu_from_epsilon requires 0 < epsilon < 1");
  return -1.0 / std::log(epsilon);
}

namespace {

void check_positive(std::vector<Violation>& out, double v, const char* code,
                    const char* what) {
  if (!(v > 0.0)) {
    out.push_back({code, std::string(what) + " must be > 0", {}});
  }
}

}  // namespace

ValidationOutcome validate(const ProblemSpec& spec) {
  ValidationOutcome out;
  auto& v = out.violations;

  std::visit(
      [&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Disk2D>)
          check_positive(v, d.radius, "geometry", "disk radius");
        if constexpr (std::is_same_v<T, Rect2D>) {
          check_positive(v, d.L1, "geometry", "rectangle L1");
          check_positive(v, d.L2, "geometry", "rectangle L2");
        }
        if constexpr (std::is_same_v<T, Sphere3D>)
          check_positive(v, d.R0, "geometry", "sphere R0");
      },
      spec.geometry);

  check_positive(v, spec.D, "diffusivity", "D");
  if (spec.gamma0 < 0.0) v.push_back({"rate", "gamma0 must be >= 0", {}});
  if (spec.I0 < 0.0) v.push_back({"rate", "I0 must be >= 0", {}});
  if (spec.gamma0 == 0.0 && spec.I0 > 0.0)
    v.push_back({"ill-posed",
                 "I0 > 0 with gamma0 = 0 has no steady state (unbounded "
                 "accumulation); the I0 shift requires gamma0 > 0",
                 {}});
  constexpr double eps_max = 0.5;
  if (!(spec.epsilon > 0.0) || !(spec.epsilon < eps_max))
    v.push_back({"epsilon", "epsilon must lie in (0, 0.5)", {}});

  const int dim = dimension(spec.geometry);
  const int n = static_cast<int>(spec.compartments.size());
  double max_ell = 0.0;
  for (int j = 0; j < n; ++j) {
    const auto& c = spec.compartments[j];
    if (!(c.ell > 0.0) || c.ell > 1.0)
      v.push_back({"ell", "scaled radius ell must lie in (0, 1]", {j}});
    max_ell = std::max(max_ell, c.ell);
    if (c.kappa < 0.0) v.push_back({"kappa", "kappa must be >= 0", {j}});
    if (dim == 2 && c.center[2] != 0.0)
      v.push_back({"dimension", "planar geometry requires z = 0 centers", {j}});
    if (const auto* m2 = std::get_if<ModelII>(&c.model)) {
      if (!(m2->Dbar > 0.0))
        v.push_back({"model2", "model II requires Dbar > 0", {j}});
      if (m2->gammabar < 0.0 || m2->Ibar < 0.0)
        v.push_back({"model2", "model II rates must be >= 0", {j}});
      if (m2->gammabar == 0.0 && m2->Ibar > 0.0)
        v.push_back({"model2",
                     "model II interior source with gammabar = 0 has no "
                     "interior steady state",
                     {j}});
    }
    if (const auto* m3 = std::get_if<ModelIII>(&c.model)) {
      if (m3->K < 1) v.push_back({"model3", "model III requires K >= 1", {j}});
      if (!m3->w0.empty() && static_cast<int>(m3->w0.size()) != m3->K)
        v.push_back({"model3", "model III initial state size must equal K", {j}});
    }
  }

  const double L = inscribing_length(spec.geometry);
  const double sep_min = spec.sep_min_override.value_or(
      4.0 * spec.epsilon * (max_ell > 0.0 ? max_ell : 1.0));

  for (int j = 0; j < n; ++j) {
    double bd = boundary_distance(spec.geometry, spec.compartments[j].center);
    if (bd < sep_min) {
      std::ostringstream msg;
      msg << "compartment " << j << " is within " << sep_min
          << " of the outer boundary (distance " << bd << ")";
      v.push_back({"interiority", msg.str(), {j}});
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      double d =
          (spec.compartments[i].center - spec.compartments[j].center).norm();
      if (d < sep_min) {
        std::ostringstream msg;
        msg << "compartments " << i << " and " << j << " are separated by " << d
            << " < " << sep_min;
        v.push_back({"separation", msg.str(), {i, j}});
      } else if (d < 0.2 * L) {
        std::ostringstream msg;
        msg << "compartments " << i << " and " << j << " are separated by " << d
            << " < 0.2 L; asymptotic accuracy degrades";
        out.warnings.push_back(msg.str());
      }
    }
  }

  if (v.empty()) {
    out.spec = ValidatedSpec(spec, nu_from_epsilon(spec.epsilon), L, sep_min);
  }
  return out;
}

ValidationOutcome validate(const ValidatedSpec& spec) {
  ValidationOutcome out;
  out.spec = spec;
  return out;
}

ValidatedSpec validate_or_throw(const ProblemSpec& spec) {
  auto out = validate(spec);
  if (!out.ok()) {
    std::ostringstream msg;
    msg << "invalid problem spec:";
    for (const auto& viol : out.violations) msg << "\n  [" << viol.code << "] "
                                                << viol.message;
    throw ValidationError(msg.str(), out.violations);
  }
  return *out.spec;
}

}  // namespace mdiff
