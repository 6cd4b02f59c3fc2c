#include "mdiff/ripening.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <sstream>

#include "mdiff/greens.hpp"
#include "mdiff/ode.hpp"

namespace mdiff {

namespace {
constexpr double pi = std::numbers::pi;

std::vector<char> all_active(const Eigen::VectorXd& ell,
                             const std::vector<char>& mask) {
  if (!mask.empty()) {
    if (static_cast<int>(mask.size()) != ell.size())
      throw DomainError("active mask size mismatch");
    return mask;
  }
  return std::vector<char>(ell.size(), 1);
}

void check_active_positive(const Eigen::VectorXd& ell,
                           const std::vector<char>& active) {
  for (int j = 0; j < ell.size(); ++j)
    if (active[j] && !(ell[j] > 0.0))
      throw DomainError("active droplet radius must be > 0");
}

}  // namespace

Eigen::VectorXd rhs_2d(const Eigen::VectorXd& ell, const RipeningParams& p,
                       const std::vector<char>& active_in) {
  auto active = all_active(ell, active_in);
  check_active_positive(ell, active);
  double inv_sum = 0.0;
  int n_act = 0;
  for (int j = 0; j < ell.size(); ++j)
    if (active[j]) {
      inv_sum += 1.0 / ell[j];
      ++n_act;
    }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(ell.size());
  if (n_act == 0) return out;
  const double inv_harm = inv_sum / n_act;
  const double pref = p.D * p.nu * p.phi_a / p.phi_b;
  for (int j = 0; j < ell.size(); ++j)
    if (active[j]) out[j] = pref / ell[j] * (inv_harm - 1.0 / ell[j]);
  return out;
}

Eigen::VectorXd rhs_3d(const Eigen::VectorXd& ell, const RipeningParams& p,
                       const std::vector<char>& active_in) {
  auto active = all_active(ell, active_in);
  check_active_positive(ell, active);
  double sum = 0.0;
  int n_act = 0;
  for (int j = 0; j < ell.size(); ++j)
    if (active[j]) {
      sum += ell[j];
      ++n_act;
    }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(ell.size());
  if (n_act == 0) return out;
  const double ell_av = sum / n_act;
  const double pref = p.D * p.phi_a * p.ell_c / p.phi_b;
  for (int j = 0; j < ell.size(); ++j)
    if (active[j]) out[j] = pref / ell[j] * (1.0 / ell_av - 1.0 / ell[j]);
  return out;
}

RipeningTrajectory evolve(const DropletState& state, const RipeningParams& p,
                          int dim, double t_end, double rtol,
                          double extinction_threshold, double event_tol) {
  if (dim != 2 && dim != 3) throw DomainError("evolve: dim must be 2 or 3");
  const int n = static_cast<int>(state.ell.size());
  std::vector<char> active = all_active(state.ell, state.active);
  Eigen::VectorXd ell = state.ell;
  check_active_positive(ell, active);

  auto rhs_masked = [&](double, const Eigen::VectorXd& y) -> Eigen::VectorXd {
    // clamp so trial stages probing past an extinction stay finite; accepted
    // states never reach the clamp (the run stops above the threshold)
    const double floor_ell = 0.25 * extinction_threshold;
    Eigen::VectorXd yc = y;
    for (int j = 0; j < n; ++j)
      if (active[j] && yc[j] < floor_ell) yc[j] = floor_ell;
    return dim == 2 ? rhs_2d(yc, p, active) : rhs_3d(yc, p, active);
  };

  // fixed-step classical RK4 over a short regular interval (used only for
  // event bracketing, where the span is a few step sizes at most)
  auto mini_advance = [&](Eigen::VectorXd y, double t0, double t1) {
    const int sub = 64;
    const double h = (t1 - t0) / sub;
    for (int s = 0; s < sub; ++s) {
      Eigen::VectorXd k1 = rhs_masked(t0, y);
      Eigen::VectorXd k2 = rhs_masked(t0, y + 0.5 * h * k1);
      Eigen::VectorXd k3 = rhs_masked(t0, y + 0.5 * h * k2);
      Eigen::VectorXd k4 = rhs_masked(t0, y + h * k3);
      y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      t0 += h;
    }
    return y;
  };

  auto mass = [&](const Eigen::VectorXd& y) {
    double q = 0.0;
    for (int j = 0; j < n; ++j) q += dim == 2 ? y[j] * y[j]
                                              : y[j] * y[j] * y[j];
    return q;
  };

  RipeningTrajectory traj;
  const double q0 = mass(ell);
  double t = state.tau;
  traj.tau.push_back(t);
  traj.ell.push_back(ell);
  int n_active = 0;
  for (char a : active) n_active += a;
  traj.active_count.push_back(n_active);

  OdeOptions opt;
  opt.rtol = rtol;
  opt.atol = 1e-14;

  auto record = [&](double tt, const Eigen::VectorXd& y) {
    traj.tau.push_back(tt);
    traj.ell.push_back(y);
    traj.active_count.push_back(n_active);
    traj.conservation_drift =
        std::max(traj.conservation_drift, std::fabs(mass(y) - q0));
  };

  // the adaptive run stops in a regular band above the threshold; the exact
  // crossing is then bracketed with short fixed-step advances
  const double stop_band = 2.0 * extinction_threshold;

  auto min_active = [&](const Eigen::VectorXd& y) {
    double m = std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j)
      if (active[j]) m = std::min(m, y[j]);
    return m;
  };

  while (t < t_end && n_active > 0) {
    double t_prev = t;
    bool hit_event = false;
    try {
      integrate_dp45(
          rhs_masked, ell, t, t_end, opt,
          [&](double tt, const Eigen::VectorXd& y) {
            if (tt <= t_prev) return true;
            if (min_active(y) < stop_band) {
              hit_event = true;
              t = tt;
              return false;
            }
            t_prev = tt;
            t = tt;
            record(tt, y);
            return true;
          });
    } catch (const Error& e) {
      std::vector<double> dump(ell.data(), ell.data() + n);
      throw EventOrderingError(
          std::string("evolve: integrator failure near an extinction (") +
              e.what() + ")",
          dump);
    }
    if (!hit_event) {
      t = t_end;
      break;
    }

    // march past the threshold crossing in short regular steps
    double lo = t;
    Eigen::VectorXd y_lo = ell;
    double hi = lo;
    Eigen::VectorXd y_hi = y_lo;
    int guard = 0;
    while (min_active(y_hi) > extinction_threshold) {
      if (++guard > 100000) {
        std::vector<double> dump(y_hi.data(), y_hi.data() + n);
        throw EventOrderingError(
            "evolve: failed to reach the extinction threshold", dump);
      }
      lo = hi;
      y_lo = y_hi;
      // estimated time to cross, floored by the bracketing tolerance
      Eigen::VectorXd r = rhs_masked(hi, y_hi);
      double dt_est = std::numeric_limits<double>::infinity();
      for (int j = 0; j < n; ++j)
        if (active[j] && r[j] < 0.0)
          dt_est = std::min(dt_est,
                            (y_hi[j] - extinction_threshold) / (-r[j]));
      if (!std::isfinite(dt_est)) dt_est = event_tol;
      double step = std::max(0.5 * event_tol, 0.5 * dt_est);
      hi = lo + step;
      y_hi = mini_advance(y_lo, lo, hi);
    }
    // bisect until the event time is pinned and the dying radius at the
    // pre-crossing state sits right on the threshold (the unbounded slope of
    // ell(t) means a time bracket alone does not localize the radius)
    const double radius_tol = extinction_threshold * 1.01;
    while ((hi - lo > event_tol || min_active(y_lo) > radius_tol) &&
           hi - lo > 8.0 * std::numeric_limits<double>::epsilon() *
                         std::max(1.0, std::fabs(hi))) {
      if (guard++ > 200000) {
        std::vector<double> dump(y_lo.data(), y_lo.data() + n);
        throw EventOrderingError(
            "evolve: event bisection stalled near simultaneous extinctions",
            dump);
      }
      double mid = 0.5 * (lo + hi);
      Eigen::VectorXd y_mid = mini_advance(y_lo, lo, mid);
      if (min_active(y_mid) > extinction_threshold) {
        lo = mid;
        y_lo = y_mid;
      } else {
        hi = mid;
      }
    }
    // retire at the threshold value itself; the surviving radii keep their
    // pre-crossing state
    Eigen::VectorXd y_event = y_lo;
    int retired_here = 0;
    for (int j = 0; j < n; ++j) {
      if (active[j] && y_event[j] <= radius_tol * 1.01) {
        active[j] = 0;
        y_event[j] = extinction_threshold;
        traj.events.push_back({j, lo});
        ++retired_here;
      }
    }
    if (retired_here == 0) {
      std::vector<double> dump(y_event.data(), y_event.data() + n);
      throw EventOrderingError(
          "evolve: extinction bracket failed to isolate a droplet", dump);
    }
    n_active -= retired_here;
    ell = y_event;
    t = lo;
    record(t, ell);
  }
  traj.final_active = n_active;
  return traj;
}

ClusterFixedPoint cluster_fixed_point(const ValidatedSpec& spec,
                                      double u0_interior) {
  const auto& ps = spec.spec();
  if (dimension(ps.geometry) != 2)
    throw UnsupportedError("cluster_fixed_point requires a planar geometry");
  if (!(ps.gamma0 > 0.0) || !(ps.I0 > 0.0))
    throw UnsupportedError(
        "cluster_fixed_point requires gamma0 > 0 and I0 > 0");
  if (!(u0_interior > 0.0))
    throw DomainError("cluster_fixed_point requires u0 > 0");
  const int n = spec.n_compartments();
  for (const auto& c : ps.compartments) {
    const auto* m1 = std::get_if<ModelI>(&c.model);
    if (!m1 || m1->c0 != 0.0 || !std::isinf(c.kappa))
      throw UnsupportedError(
          "cluster_fixed_point requires absorbing (Dirichlet u = 0) clusters");
  }

  const double nu = spec.nu();
  const double eps = ps.epsilon;
  const double shift = ps.I0 / ps.gamma0;

  GreensFunction G = make_helmholtz_greens(ps.geometry, ps.D, ps.gamma0);
  // ell enters only through the matrix diagonal, so precompute the rest
  Eigen::MatrixXd base(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      double v =
          G.eval(ps.compartments[i].center, ps.compartments[j].center).value;
      base(i, j) = v;
      base(j, i) = v;
    }
    base(i, i) = G.regular_at(ps.compartments[i].center);
  }

  Eigen::VectorXd ell(n);
  for (int j = 0; j < n; ++j) ell[j] = ps.compartments[j].ell;

  auto strengths = [&](const Eigen::VectorXd& l) -> Eigen::VectorXd {
    Eigen::MatrixXd M = 2.0 * pi * ps.D * base;
    for (int j = 0; j < n; ++j) M(j, j) -= std::log(l[j]);
    Eigen::MatrixXd T = Eigen::MatrixXd::Identity(n, n) + nu * M;
    return T.partialPivLu().solve(Eigen::VectorXd::Constant(n, shift));
  };

  std::vector<double> history;
  Eigen::VectorXd A;
  const double omega = 0.5;
  int it = 0;
  for (; it < 500; ++it) {
    A = strengths(ell);
    Eigen::VectorXd target(n);
    for (int j = 0; j < n; ++j) {
      double l2 = 2.0 * ps.D * nu * A[j] / (ps.gamma0 * u0_interior * eps * eps);
      if (!(l2 > 0.0))
        throw ConvergenceError(
            "cluster_fixed_point: negative flux; no balancing radius", history);
      target[j] = std::sqrt(l2);
    }
    Eigen::VectorXd next = (1.0 - omega) * ell + omega * target;
    double change = (next - ell).cwiseAbs().maxCoeff();
    history.push_back(change);
    ell = next;
    if (change < 1e-13) break;
    if (!ell.allFinite() || ell.maxCoeff() > 1e6)
      throw ConvergenceError("cluster_fixed_point diverged", history);
  }

  ClusterFixedPoint out;
  out.ell = ell;
  out.A = strengths(ell);
  out.residual.resize(n);
  for (int j = 0; j < n; ++j)
    out.residual[j] = 2.0 * pi * ps.D * nu * out.A[j] -
                      ps.gamma0 * u0_interior * pi * eps * eps * ell[j] * ell[j];
  out.iterations = it + 1;
  if (out.residual.cwiseAbs().maxCoeff() > 1e-8)
    throw ConvergenceError("cluster_fixed_point: balance residual above 1e-8",
                           history);
  return out;
}

}  // namespace mdiff
