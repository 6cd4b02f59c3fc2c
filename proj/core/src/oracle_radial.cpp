#include <Eigen/Dense>
#include <cmath>

#include "mdiff/oracle.hpp"
#include "mdiff/special.hpp"

namespace mdiff {

namespace {

// Outer radial basis with zero normal derivative at R:
//   2D: Z(r) = I0(br) K1(bR) + K0(br) I1(bR)
//   3D: Z(r) = i0(br) (-k0'(bR)) + k0(br) i0'(bR)
// plus its radial derivative.
struct OuterBasis {
  std::function<double(double)> Z;
  std::function<double(double)> dZ;
};

OuterBasis bounded_basis(int dim, double b, double R) {
  using namespace special;
  OuterBasis out;
  if (dim == 2) {
    const double k1R = bessel_k(1, b * R), i1R = bessel_i(1, b * R);
    out.Z = [=](double r) {
      return bessel_i(0, b * r) * k1R + bessel_k(0, b * r) * i1R;
    };
    out.dZ = [=](double r) {
      return b * (bessel_i(1, b * r) * k1R - bessel_k(1, b * r) * i1R);
    };
  } else {
    const double i0p = sph_i_prime(0, b * R);   // i0'(bR)
    const double k0p = -sph_k_prime(0, b * R);  // -k0'(bR) > 0
    out.Z = [=](double r) {
      return sph_i(0, b * r) * k0p + sph_k(0, b * r) * i0p;
    };
    out.dZ = [=](double r) {
      return b * (sph_i_prime(0, b * r) * k0p + sph_k_prime(0, b * r) * i0p);
    };
  }
  return out;
}

OuterBasis unbounded_basis(int dim, double b) {
  using namespace special;
  OuterBasis out;
  if (dim == 2) {
    out.Z = [=](double r) { return bessel_k(0, b * r); };
    out.dZ = [=](double r) { return -b * bessel_k(1, b * r); };
  } else {
    out.Z = [=](double r) { return sph_k(0, b * r); };
    out.dZ = [=](double r) { return b * sph_k_prime(0, b * r); };
  }
  return out;
}

// interior basis (regular at the origin): 2D I0(bb r), 3D i0(bb r)
struct InnerBasis {
  std::function<double(double)> V;
  std::function<double(double)> dV;
};

InnerBasis interior_basis(int dim, double bb) {
  using namespace special;
  InnerBasis out;
  if (dim == 2) {
    out.V = [=](double r) { return bessel_i(0, bb * r); };
    out.dV = [=](double r) { return bb * bessel_i(1, bb * r); };
  } else {
    out.V = [=](double r) { return sph_i(0, bb * r); };
    out.dV = [=](double r) { return bb * sph_i_prime(0, bb * r); };
  }
  return out;
}

RadialSolution solve_radial(const RadialProblem& p) {
  if (!(p.D > 0.0) || !(p.r_in > 0.0))
    throw DomainError("radial oracle: D and r_in must be > 0");
  if (!p.unbounded && !(p.R > p.r_in))
    throw DomainError("radial oracle: R must exceed r_in");
  if (p.gamma0 < 0.0) throw DomainError("radial oracle: gamma0 >= 0");
  const double shift = p.I0 > 0.0 ? p.I0 / p.gamma0 : 0.0;  // needs gamma0 > 0
  if (p.I0 > 0.0 && !(p.gamma0 > 0.0))
    throw DomainError("radial oracle: I0 > 0 requires gamma0 > 0");

  RadialSolution out;

  if (p.gamma0 > 0.0) {
    const double b = std::sqrt(p.gamma0 / p.D);
    OuterBasis ob = p.unbounded ? unbounded_basis(p.dim, b)
                                : bounded_basis(p.dim, b, p.R);
    double a_coef;
    double v_amp = 0.0, bb = 0.0;
    if (!p.model2) {
      if (std::isinf(p.kappa_phys)) {
        a_coef = (p.c0 - shift) / ob.Z(p.r_in);
      } else {
        // D a Z'(r_in) = kappa [shift + a Z(r_in) - c0]
        double denom = p.D * ob.dZ(p.r_in) - p.kappa_phys * ob.Z(p.r_in);
        a_coef = p.kappa_phys * (shift - p.c0) / denom;
      }
      out.u = [=](double r) { return shift + a_coef * ob.Z(r); };
      out.v = {};
    } else {
      if (!(p.gammabar_phys > 0.0))
        throw DomainError("radial oracle: model II needs gammabar > 0");
      bb = std::sqrt(p.gammabar_phys / p.Dbar);
      InnerBasis ib = interior_basis(p.dim, bb);
      const double sbar = p.Ibar_phys / p.gammabar_phys;
      // unknowns (a, c): u = shift + a Z(r);  v = sbar + c V(r)
      // (i)  D a Z'(rin) = Dbar c V'(rin)
      // (ii) D a Z'(rin) = kappa [u(rin) - v(rin)]
      Eigen::Matrix2d Mx;
      Eigen::Vector2d rhs;
      Mx(0, 0) = p.D * ob.dZ(p.r_in);
      Mx(0, 1) = -p.Dbar * ib.dV(p.r_in);
      rhs(0) = 0.0;
      if (std::isinf(p.kappa_phys)) {
        // continuity of value replaces (ii)
        Mx(1, 0) = ob.Z(p.r_in);
        Mx(1, 1) = -ib.V(p.r_in);
        rhs(1) = sbar - shift;
      } else {
        Mx(1, 0) = p.D * ob.dZ(p.r_in) - p.kappa_phys * ob.Z(p.r_in);
        Mx(1, 1) = p.kappa_phys * ib.V(p.r_in);
        rhs(1) = p.kappa_phys * (shift - sbar);
      }
      Eigen::Vector2d sol = Mx.partialPivLu().solve(rhs);
      a_coef = sol(0);
      v_amp = sol(1);
      out.u = [=](double r) { return shift + a_coef * ob.Z(r); };
      out.v = [=, V = ib.V](double r) { return sbar + v_amp * V(r); };
      // interface residuals
      double fu = p.D * a_coef * ob.dZ(p.r_in);
      double fv = p.Dbar * v_amp * ib.dV(p.r_in);
      double jump = std::isinf(p.kappa_phys)
                        ? out.u(p.r_in) - out.v(p.r_in)
                        : fu - p.kappa_phys * (out.u(p.r_in) - out.v(p.r_in));
      out.interface_residual = std::max(std::fabs(fu - fv), std::fabs(jump));
    }
    if (!p.model2) {
      double fu = p.D * a_coef * ob.dZ(p.r_in);
      double target = std::isinf(p.kappa_phys)
                          ? out.u(p.r_in) - p.c0
                          : fu - p.kappa_phys * (out.u(p.r_in) - p.c0);
      out.interface_residual = std::isinf(p.kappa_phys)
                                   ? std::fabs(out.u(p.r_in) - p.c0)
                                   : std::fabs(target);
    }
    out.boundary_residual =
        p.unbounded ? 0.0 : std::fabs(p.D * a_coef * ob.dZ(p.R));
    return out;
  }

  // gamma0 = 0
  if (p.unbounded) {
    if (p.dim == 2)
      throw UnsupportedError(
          "the planar unbounded Laplace exterior has no bounded solution "
          "with a prescribed far field");
    // u = u_inf + beta / r
    double beta;
    if (!p.model2) {
      if (std::isinf(p.kappa_phys)) {
        beta = (p.c0 - p.u_inf) * p.r_in;
      } else {
        // -D beta / rin^2 = kappa [u_inf + beta/rin - c0]
        double denom = -p.D / (p.r_in * p.r_in) - p.kappa_phys / p.r_in;
        beta = p.kappa_phys * (p.u_inf - p.c0) / denom;
      }
      out.u = [=](double r) { return p.u_inf + beta / r; };
      double flux = -p.D * beta / (p.r_in * p.r_in);
      out.interface_residual =
          std::isinf(p.kappa_phys)
              ? std::fabs(out.u(p.r_in) - p.c0)
              : std::fabs(flux - p.kappa_phys * (out.u(p.r_in) - p.c0));
      return out;
    }
    throw UnsupportedError("unbounded model II oracle not implemented");
  }

  // bounded, gamma0 = 0: zero net flux through the outer wall forces a
  // constant outer state
  double u_const;
  if (!p.model2) {
    u_const = p.c0;
    out.u = [=](double) { return u_const; };
    out.interface_residual = 0.0;
  } else {
    if (!(p.gammabar_phys > 0.0))
      throw DomainError("radial oracle: model II needs gammabar > 0");
    // interior flux must vanish too, so v = Ibar/gammabar and u matches it
    double sbar = p.Ibar_phys / p.gammabar_phys;
    u_const = sbar;
    out.u = [=](double) { return u_const; };
    out.v = [=](double) { return sbar; };
    out.interface_residual = 0.0;
  }
  out.boundary_residual = 0.0;
  return out;
}

}  // namespace

RadialSolution radial_exact_disk(const RadialProblem& p) {
  RadialProblem q = p;
  q.dim = 2;
  return solve_radial(q);
}

RadialSolution radial_exact_sphere(const RadialProblem& p) {
  RadialProblem q = p;
  q.dim = 3;
  return solve_radial(q);
}

}  // namespace mdiff
