#include "mdiff/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace mdiff::quad {

namespace {

Rule make_gauss_legendre(int n) {
  Rule r;
  r.x.resize(n);
  r.w.resize(n);
  const double pi = std::numbers::pi;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Chebyshev-style initial guess, then Newton on P_n.
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / pp;
      x -= dx;
      if (std::fabs(dx) < 1e-15) break;
    }
    r.x[i] = -x;
    r.x[n - 1 - i] = x;
    double w = 2.0 / ((1.0 - x * x) * pp * pp);
    r.w[i] = w;
    r.w[n - 1 - i] = w;
  }
  return r;
}

}  // namespace

const Rule& gauss_legendre(int n) {
  static std::map<int, Rule> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, make_gauss_legendre(n)).first;
  return it->second;
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 int n) {
  const Rule& r = gauss_legendre(n);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += r.w[i] * f(mid + half * r.x[i]);
  return s * half;
}

double integrate_rect(const std::function<double(double, double)>& f, double ax,
                      double bx, double ay, double by, int nx, int ny) {
  const Rule& rx = gauss_legendre(nx);
  const Rule& ry = gauss_legendre(ny);
  const double mx = 0.5 * (ax + bx), hx = 0.5 * (bx - ax);
  const double my = 0.5 * (ay + by), hy = 0.5 * (by - ay);
  double s = 0.0;
  for (int i = 0; i < nx; ++i) {
    double xi = mx + hx * rx.x[i];
    double row = 0.0;
    for (int j = 0; j < ny; ++j) row += ry.w[j] * f(xi, my + hy * ry.x[j]);
    s += rx.w[i] * row;
  }
  return s * hx * hy;
}

double integrate_disk(const std::function<double(const Point&)>& f,
                      const Point& c, double R, int nr, int ntheta) {
  const Rule& rr = gauss_legendre(nr);
  const double pi = std::numbers::pi;
  double s = 0.0;
  for (int i = 0; i < nr; ++i) {
    double rad = 0.5 * R * (rr.x[i] + 1.0);
    double wr = 0.5 * R * rr.w[i];
    double ring = 0.0;
    for (int j = 0; j < ntheta; ++j) {
      double th = 2.0 * pi * (j + 0.5) / ntheta;  // trapezoid in angle
      Point p = c + Point(rad * std::cos(th), rad * std::sin(th), 0.0);
      ring += f(p);
    }
    s += wr * rad * ring * (2.0 * pi / ntheta);
  }
  return s;
}

double integrate_ball(const std::function<double(const Point&)>& f,
                      const Point& c, double R, int nr, int ntheta, int nphi) {
  const Rule& rr = gauss_legendre(nr);
  const Rule& rt = gauss_legendre(ntheta);  // in cos(theta)
  const double pi = std::numbers::pi;
  double s = 0.0;
  for (int i = 0; i < nr; ++i) {
    double rad = 0.5 * R * (rr.x[i] + 1.0);
    double wr = 0.5 * R * rr.w[i] * rad * rad;
    for (int j = 0; j < ntheta; ++j) {
      double ct = rt.x[j];
      double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
      double wt = rt.w[j];
      for (int k = 0; k < nphi; ++k) {
        double ph = 2.0 * pi * (k + 0.5) / nphi;
        Point p = c + Point(rad * st * std::cos(ph), rad * st * std::sin(ph),
                            rad * ct);
        s += wr * wt * (2.0 * pi / nphi) * f(p);
      }
    }
  }
  return s;
}

}  // namespace mdiff::quad
