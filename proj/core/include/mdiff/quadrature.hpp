#pragma once

#include <functional>
#include <vector>

#include "mdiff/geometry.hpp"

namespace mdiff::quad {

/// Nodes and weights on [-1, 1].
struct Rule {
  std::vector<double> x;
  std::vector<double> w;
};

/// Gauss-Legendre rule of order n (Newton iteration on P_n; deterministic).
const Rule& gauss_legendre(int n);

double integrate(const std::function<double(double)>& f, double a, double b,
                 int n);

/// Tensor Gauss rule over a rectangle [ax,bx] x [ay,by].
double integrate_rect(const std::function<double(double, double)>& f, double ax,
                      double bx, double ay, double by, int nx, int ny);

/// Polar rule over a disk centred at c (radius R): exact boundary alignment.
double integrate_disk(const std::function<double(const Point&)>& f,
                      const Point& c, double R, int nr, int ntheta);

/// Spherical product rule over a ball centred at c (radius R).
double integrate_ball(const std::function<double(const Point&)>& f,
                      const Point& c, double R, int nr, int ntheta, int nphi);

}  // namespace mdiff::quad
