#include <algorithm>
#include <cmath>
#include <numbers>

#include "mdiff/oracle.hpp"

namespace mdiff {

namespace {

// Affine ghost relation u_ghost = alpha * u_out + beta for a grid edge that
// crosses a compartment boundary (first order at the embedded boundary).
struct GhostLink {
  double alpha = 0.0;
  double beta = 0.0;
};

struct Discretization {
  int nx, ny;
  double hx, hy;
  double x0, y0;
  std::vector<std::uint8_t> state;  // 0 exterior, 1 active, 2 fixed, 3 ghost
  std::vector<double> fixed_value;
  // ghost links keyed by (ghost node, neighbour direction 0..3): e,w,n,s
  std::vector<std::array<GhostLink, 4>> ghost;
  std::vector<std::uint8_t> ghost_has;  // bitmask of directions with links
};

constexpr std::uint8_t EXTERIOR = 0, ACTIVE = 1, FIXED = 2, GHOST = 3;

int idx(const Discretization& d, int ix, int iy) { return iy * d.nx + ix; }

// signed distance to a compartment boundary along the segment from inside
// node g to outside node o, as the fraction theta from g
double crossing_fraction(const Point& g, const Point& o, const Point& c,
                         double R) {
  // |g + t (o - g) - c| = R, t in (0, 1]
  Point dgo = o - g, gc = g - c;
  double A = dgo.squaredNorm();
  double B = 2.0 * gc.dot(dgo);
  double C = gc.squaredNorm() - R * R;
  double disc = B * B - 4.0 * A * C;
  if (disc < 0.0) return 0.5;
  double t = (-B + std::sqrt(disc)) / (2.0 * A);
  return std::min(1.0, std::max(1e-6, t));
}

}  // namespace

double GridField::value_at(const Point& p) const {
  double fx = (p[0] - x0) / hx, fy = (p[1] - y0) / hy;
  int ix = static_cast<int>(std::floor(fx)), iy = static_cast<int>(std::floor(fy));
  ix = std::max(0, std::min(nx - 2, ix));
  iy = std::max(0, std::min(ny - 2, iy));
  double tx = fx - ix, ty = fy - iy;
  auto at = [&](int i, int j) { return u[j * nx + i]; };
  // fall back to the nearest solved node if a corner is outside the domain
  auto ok = [&](int i, int j) { return mask[j * nx + i] != 0; };
  if (ok(ix, iy) && ok(ix + 1, iy) && ok(ix, iy + 1) && ok(ix + 1, iy + 1)) {
    return (1 - tx) * (1 - ty) * at(ix, iy) + tx * (1 - ty) * at(ix + 1, iy) +
           (1 - tx) * ty * at(ix, iy + 1) + tx * ty * at(ix + 1, iy + 1);
  }
  double best = std::numeric_limits<double>::quiet_NaN();
  double bd = 1e300;
  for (int j = std::max(0, iy - 2); j <= std::min(ny - 1, iy + 2); ++j)
    for (int i = std::max(0, ix - 2); i <= std::min(nx - 1, ix + 2); ++i)
      if (ok(i, j)) {
        double d = std::hypot(p[0] - (x0 + i * hx), p[1] - (y0 + j * hy));
        if (d < bd) {
          bd = d;
          best = at(i, j);
        }
      }
  return best;
}

GridField fd_solve_rect(const FdProblem& p, double h) {
  if (!(h > 0.0)) throw DomainError("fd_solve_rect: h must be > 0");
  double Lx, Ly, ox = 0.0, oy = 0.0;
  bool disk_mode = false;
  double disk_R = 0.0;
  if (const auto* r = std::get_if<Rect2D>(&p.geometry)) {
    Lx = r->L1;
    Ly = r->L2;
  } else if (const auto* dk = std::get_if<Disk2D>(&p.geometry)) {
    disk_mode = true;
    disk_R = dk->radius;
    Lx = Ly = 2.0 * dk->radius;
    ox = oy = -dk->radius;
  } else {
    throw UnsupportedError("fd_solve_rect supports Rect2D and Disk2D");
  }

  for (const auto& c : p.compartments)
    if (c.radius < 8.0 * h)
      throw DomainError(
          "fd_solve_rect: a compartment spans fewer than 8 cells across its "
          "diameter; refine h");

  Discretization d;
  d.nx = static_cast<int>(std::lround(Lx / h)) + 1;
  d.ny = static_cast<int>(std::lround(Ly / h)) + 1;
  d.hx = Lx / (d.nx - 1);
  d.hy = Ly / (d.ny - 1);
  d.x0 = ox;
  d.y0 = oy;
  const int n = d.nx * d.ny;
  d.state.assign(n, ACTIVE);
  d.fixed_value.assign(n, 0.0);
  d.ghost.resize(n);
  d.ghost_has.assign(n, 0);

  auto node = [&](int ix, int iy) {
    return Point(d.x0 + ix * d.hx, d.y0 + iy * d.hy, 0.0);
  };

  if (disk_mode) {
    for (int iy = 0; iy < d.ny; ++iy)
      for (int ix = 0; ix < d.nx; ++ix)
        if (node(ix, iy).norm() > disk_R) d.state[idx(d, ix, iy)] = EXTERIOR;
  }

  // classify compartment interiors
  auto comp_of = [&](const Point& q) -> int {
    for (size_t k = 0; k < p.compartments.size(); ++k)
      if ((q - p.compartments[k].center).norm() <= p.compartments[k].radius)
        return static_cast<int>(k);
    return -1;
  };
  for (int iy = 0; iy < d.ny; ++iy)
    for (int ix = 0; ix < d.nx; ++ix) {
      int id = idx(d, ix, iy);
      if (d.state[id] == EXTERIOR) continue;
      int k = comp_of(node(ix, iy));
      if (k >= 0) {
        const auto& c = p.compartments[k];
        if (std::isinf(c.kappa)) {
          d.state[id] = FIXED;
          d.fixed_value[id] = c.c0;
        } else {
          d.state[id] = GHOST;  // may stay unused if no active neighbour
        }
      }
    }

  // ghost links for Robin compartments
  const int dx[4] = {1, -1, 0, 0};
  const int dy[4] = {0, 0, 1, -1};
  for (int iy = 0; iy < d.ny; ++iy)
    for (int ix = 0; ix < d.nx; ++ix) {
      int id = idx(d, ix, iy);
      if (d.state[id] != GHOST) continue;
      Point g = node(ix, iy);
      int k = comp_of(g);
      const auto& c = p.compartments[k];
      for (int dir = 0; dir < 4; ++dir) {
        int jx = ix + dx[dir], jy = iy + dy[dir];
        if (jx < 0 || jx >= d.nx || jy < 0 || jy >= d.ny) continue;
        int jd = idx(d, jx, jy);
        if (d.state[jd] != ACTIVE) continue;
        Point o = node(jx, jy);
        double hstep = dir < 2 ? d.hx : d.hy;
        double theta = crossing_fraction(g, o, c.center, c.radius);
        // the Robin condition constrains the normal derivative; the grid
        // edge only sees its projection, so kappa is scaled by |e . n|
        Point pb = g + theta * (o - g);
        Point nrm = (pb - c.center).normalized();
        Point edge = (o - g).normalized();
        double keff = c.kappa * std::fabs(edge.dot(nrm));
        double denom = p.D / hstep + keff * (1.0 - theta);
        GhostLink link;
        link.alpha = (p.D / hstep - keff * theta) / denom;
        link.beta = keff * c.c0 / denom;
        d.ghost[id][dir] = link;
        d.ghost_has[id] |= (1 << dir);
      }
    }

  // assemble right-hand side and the matrix-free operator over active nodes
  std::vector<int> unknowns;
  std::vector<int> slot(n, -1);
  for (int i = 0; i < n; ++i)
    if (d.state[i] == ACTIVE) {
      slot[i] = static_cast<int>(unknowns.size());
      unknowns.push_back(i);
    }
  const int m = static_cast<int>(unknowns.size());
  std::vector<double> b(m, 0.0), x(m, 0.0);
  const double ihx2 = 1.0 / (d.hx * d.hx), ihy2 = 1.0 / (d.hy * d.hy);

  for (int q = 0; q < m; ++q) {
    int id = unknowns[q];
    Point pos = node(id % d.nx, id / d.nx);
    b[q] = -(p.I0 + (p.source ? p.source(pos) : 0.0));
  }

  // neighbour contribution: value (via x), or affine pieces folded into rhs
  auto apply = [&](const std::vector<double>& v, std::vector<double>& out,
                   std::vector<double>* rhs_extra) {
    for (int q = 0; q < m; ++q) {
      int id = unknowns[q];
      int ix = id % d.nx, iy = id / d.nx;
      double diag = -p.gamma0;
      double acc = 0.0;
      for (int dir = 0; dir < 4; ++dir) {
        double w = p.D * (dir < 2 ? ihx2 : ihy2);
        int jx = ix + dx[dir], jy = iy + dy[dir];
        bool reflect = false;
        if (jx < 0 || jx >= d.nx || jy < 0 || jy >= d.ny) {
          reflect = true;  // outer wall: mirror ghost
          jx = ix - dx[dir];
          jy = iy - dy[dir];
        }
        int jd = idx(d, jx, jy);
        if (!reflect && d.state[jd] == EXTERIOR) {
          // embedded disk wall: first-order reflection
          diag += -w + w;  // neighbour replaced by the centre value
          continue;
        }
        diag -= w;
        if (reflect) {
          acc += w * v[slot[jd]];
        } else if (d.state[jd] == ACTIVE) {
          acc += w * v[slot[jd]];
        } else if (d.state[jd] == FIXED) {
          if (rhs_extra) (*rhs_extra)[q] -= w * d.fixed_value[jd];
        } else {  // GHOST
          int back = dir ^ 1;  // the link stored for (ghost -> this node)
          if (d.ghost_has[jd] & (1 << back)) {
            const GhostLink& L = d.ghost[jd][back];
            acc += w * L.alpha * v[q];
            if (rhs_extra) (*rhs_extra)[q] -= w * L.beta;
          } else {
            // isolated ghost with no link back: treat as reflection
            acc += w * v[q];
          }
        }
      }
      out[q] = diag * v[q] + acc;
    }
  };

  // fold the affine pieces into b once
  {
    std::vector<double> zero(m, 0.0), tmp(m, 0.0);
    std::vector<double> extra(m, 0.0);
    apply(zero, tmp, &extra);
    for (int q = 0; q < m; ++q) b[q] += extra[q];
  }
  auto apply_lin = [&](const std::vector<double>& v, std::vector<double>& out) {
    apply(v, out, nullptr);
  };

  // zero-mean consistency mode: project the rhs, pin one node
  int pin = -1;
  if (p.zero_mean) {
    double mean = 0.0;
    for (double v : b) mean += v;
    mean /= m;
    for (double& v : b) v -= mean;
    pin = 0;
  }

  // BiCGStab, Jacobi-preconditioned, matrix-free
  std::vector<double> diag(m, 1.0);
  {
    // probe the diagonal: e_q A e_q via local evaluation
    std::vector<double> v(m, 0.0), Av(m, 0.0);
    // cheaper: recompute analytically
    for (int q = 0; q < m; ++q) {
      int id = unknowns[q];
      int ix = id % d.nx, iy = id / d.nx;
      double dg = -p.gamma0;
      for (int dir = 0; dir < 4; ++dir) {
        double w = p.D * (dir < 2 ? ihx2 : ihy2);
        int jx = ix + dx[dir], jy = iy + dy[dir];
        bool reflect = (jx < 0 || jx >= d.nx || jy < 0 || jy >= d.ny);
        int jd = reflect ? id : idx(d, jx, jy);
        if (!reflect && d.state[jd] == EXTERIOR) continue;
        dg -= w;
        if (reflect) {
          // mirrored neighbour is the node one step back; only diagonal if
          // that node is this one (1-wide domain), ignore otherwise
        } else if (d.state[jd] == GHOST) {
          int back = dir ^ 1;
          if (d.ghost_has[jd] & (1 << back)) dg += w * d.ghost[jd][back].alpha;
          else dg += w;
        }
      }
      diag[q] = dg != 0.0 ? dg : 1.0;
    }
    (void)v;
    (void)Av;
  }

  auto pinned_apply = [&](const std::vector<double>& v,
                          std::vector<double>& out) {
    apply_lin(v, out);
    if (pin >= 0) out[pin] = v[pin];
  };
  if (pin >= 0) b[pin] = 0.0;

  std::vector<double> r(m), r0(m), pv(m, 0.0), vv(m, 0.0), s(m), t(m), tmp(m);
  pinned_apply(x, tmp);
  double bnorm = 0.0;
  for (int q = 0; q < m; ++q) {
    r[q] = b[q] - tmp[q];
    bnorm += b[q] * b[q];
  }
  bnorm = std::sqrt(bnorm);
  double tol = 1e-10 * std::max(1.0, bnorm);
  r0 = r;
  double rho = 1.0, alpha = 1.0, omega = 1.0;
  double rnorm = 0.0;
  for (double q : r) rnorm += q * q;
  rnorm = std::sqrt(rnorm);
  int it = 0;
  const int max_it = 20 * m < 200000 ? 200000 : 20 * m;
  while (rnorm > tol && it < max_it) {
    double rho_new = 0.0;
    for (int q = 0; q < m; ++q) rho_new += r0[q] * r[q];
    if (std::fabs(rho_new) < 1e-300) {  // restart
      r0 = r;
      rho_new = rnorm * rnorm;
      pv.assign(m, 0.0);
      vv.assign(m, 0.0);
      rho = alpha = omega = 1.0;
    }
    double beta = (rho_new / rho) * (alpha / omega);
    rho = rho_new;
    for (int q = 0; q < m; ++q)
      pv[q] = r[q] + beta * (pv[q] - omega * vv[q]);
    std::vector<double> phat(m);
    for (int q = 0; q < m; ++q) phat[q] = pv[q] / diag[q];
    pinned_apply(phat, vv);
    double r0v = 0.0;
    for (int q = 0; q < m; ++q) r0v += r0[q] * vv[q];
    alpha = rho / r0v;
    for (int q = 0; q < m; ++q) s[q] = r[q] - alpha * vv[q];
    double snorm = 0.0;
    for (double q : s) snorm += q * q;
    if (std::sqrt(snorm) < tol) {
      for (int q = 0; q < m; ++q) x[q] += alpha * phat[q];
      rnorm = std::sqrt(snorm);
      ++it;
      break;
    }
    std::vector<double> shat(m);
    for (int q = 0; q < m; ++q) shat[q] = s[q] / diag[q];
    pinned_apply(shat, t);
    double tt = 0.0, ts = 0.0;
    for (int q = 0; q < m; ++q) {
      tt += t[q] * t[q];
      ts += t[q] * s[q];
    }
    omega = ts / tt;
    for (int q = 0; q < m; ++q) {
      x[q] += alpha * phat[q] + omega * shat[q];
      r[q] = s[q] - omega * t[q];
    }
    rnorm = 0.0;
    for (double q : r) rnorm += q * q;
    rnorm = std::sqrt(rnorm);
    ++it;
  }

  GridField out;
  out.nx = d.nx;
  out.ny = d.ny;
  out.hx = d.hx;
  out.hy = d.hy;
  out.x0 = d.x0;
  out.y0 = d.y0;
  out.iterations = it;
  out.residual = rnorm;
  out.u.assign(n, std::numeric_limits<double>::quiet_NaN());
  out.mask.assign(n, 0);
  for (int q = 0; q < m; ++q) {
    out.u[unknowns[q]] = x[q];
    out.mask[unknowns[q]] = 1;
  }
  for (int i = 0; i < n; ++i)
    if (d.state[i] == FIXED) {
      out.u[i] = d.fixed_value[i];
      out.mask[i] = 1;
    }

  if (p.zero_mean) {
    double mean = 0.0;
    int cnt = 0;
    for (int q = 0; q < m; ++q) {
      mean += x[q];
      ++cnt;
    }
    mean /= cnt;
    for (int i = 0; i < n; ++i)
      if (out.mask[i]) out.u[i] -= mean;
  }
  if (rnorm > tol)
    throw ConvergenceError("fd_solve_rect: linear iteration stalled",
                           {rnorm, static_cast<double>(it)});
  return out;
}

}  // namespace mdiff
