#include <cmath>
#include <memory>
#include <numbers>

#include "mdiff/greens.hpp"

namespace mdiff {

namespace {
constexpr double pi = std::numbers::pi;
}

GreensFunction make_laplace_greens(const DomainGeometry& g, double D) {
  GreensFunction out;
  out.D = D;
  out.dim = dimension(g);
  std::visit(
      [&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Disk2D>) {
          auto ev = std::make_shared<DiskLaplaceGreens>(d.radius, D);
          out.eval = [ev](const Point& x, const Point& xp) {
            return ev->eval(x, xp);
          };
          out.regular_at = [ev](const Point& x) { return ev->regular_at(x); };
        } else if constexpr (std::is_same_v<T, Rect2D>) {
          auto ev = std::make_shared<RectLaplaceGreens>(d.L1, d.L2, D);
          out.eval = [ev](const Point& x, const Point& xp) {
            return ev->eval(x, xp);
          };
          out.regular_at = [ev](const Point& x) { return ev->regular_at(x); };
        } else {
          auto ev = std::make_shared<SphereLaplaceGreens>(d.R0, D);
          out.eval = [ev](const Point& x, const Point& xp) {
            return ev->eval(x, xp);
          };
          out.regular_at = [ev](const Point& x) { return ev->regular_at(x); };
        }
      },
      g);
  return out;
}

GreensFunction make_helmholtz_greens(const DomainGeometry& g, double D,
                                     double rate, int n_max) {
  GreensFunction out;
  out.D = D;
  out.dim = dimension(g);
  std::visit(
      [&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Disk2D>) {
          auto ev =
              std::make_shared<DiskHelmholtzGreens>(d.radius, D, rate, n_max);
          out.eval = [ev](const Point& x, const Point& xp) {
            return ev->eval(x, xp);
          };
          out.regular_at = [ev](const Point& x) { return ev->regular_at(x); };
        } else if constexpr (std::is_same_v<T, Sphere3D>) {
          auto ev =
              std::make_shared<SphereHelmholtzGreens>(d.R0, D, rate, n_max);
          out.eval = [ev](const Point& x, const Point& xp) {
            return ev->eval(x, xp);
          };
          out.regular_at = [ev](const Point& x) { return ev->regular_at(x); };
        } else {
          throw UnsupportedError(
              "no modified-Helmholtz Green's function for the rectangle; "
              "use the disk geometry for planar problems with gamma0 > 0");
        }
      },
      g);
  return out;
}

InteractionMatrix interaction_matrix(const GreensFunction& G,
                                     const std::vector<Point>& centers,
                                     const std::vector<double>& ells) {
  const int n = static_cast<int>(centers.size());
  InteractionMatrix m;
  m.N = n;
  m.G.resize(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      double v = G.eval(centers[i], centers[j]).value;
      m.G(i, j) = v;
      m.G(j, i) = v;
    }
    double diag = G.regular_at(centers[i]);
    if (G.dim == 2) diag -= std::log(ells[i]) / (2.0 * pi * G.D);
    m.G(i, i) = diag;
  }
  return m;
}

InteractionMatrix build_interaction_matrix(const ValidatedSpec& spec,
                                           GreensMode mode, double s) {
  const auto& ps = spec.spec();
  std::vector<Point> centers;
  std::vector<double> ells;
  for (const auto& c : ps.compartments) {
    centers.push_back(c.center);
    ells.push_back(c.ell);
  }
  GreensFunction G;
  if (mode == GreensMode::Laplace) {
    G = make_laplace_greens(ps.geometry, ps.D);
  } else {
    double rate = ps.gamma0 + s;
    if (!(rate > 0.0))
      throw UnsupportedError(
          "Helmholtz interaction matrix requires gamma0 + s > 0");
    G = make_helmholtz_greens(ps.geometry, ps.D, rate);
  }
  return interaction_matrix(G, centers, ells);
}

SDerivative helmholtz_s_derivative(const DomainGeometry& g, double D,
                                   double gamma0, const Point& x,
                                   const Point& xp, double s0, double h,
                                   int n_max) {
  if (!(h > 0.0)) throw DomainError("helmholtz_s_derivative requires h > 0");
  if (gamma0 == 0.0 && s0 <= 0.0)
    throw DomainError(
        "helmholtz_s_derivative: gamma0 = 0 with s0 = 0 sits on the pole of "
        "G(s); this case is out of scope");
  if (!(gamma0 + s0 - h > 0.0)) h = 0.5 * (gamma0 + s0);

  auto G = [&](double s) {
    return make_helmholtz_greens(g, D, gamma0 + s, n_max).eval(x, xp).value;
  };
  double d_h = (G(s0 + h) - G(s0 - h)) / (2.0 * h);
  double d_h2 = (G(s0 + 0.5 * h) - G(s0 - 0.5 * h)) / h;
  SDerivative out;
  out.value = (4.0 * d_h2 - d_h) / 3.0;  // Richardson on the O(h^2) error
  out.error = std::fabs(d_h2 - d_h) / 3.0;
  return out;
}

}  // namespace mdiff
