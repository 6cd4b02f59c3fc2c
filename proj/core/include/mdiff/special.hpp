#pragma once

#include <vector>

#include "mdiff/errors.hpp"

namespace mdiff {

/// Families of special functions exposed through eval_special.
/// Orders are nonnegative integers throughout.
struct SpecialKind {
  enum class Family { BesselI, BesselK, SphericalI, SphericalK, LegendreP };
  Family family;
  int order = 0;
};

/// Evaluate one special function. K-type kinds require x > 0; exponentially
/// growing kinds throw RangeError beyond the overflow threshold.
double eval_special(SpecialKind kind, double x);

/// F(x) = x I1(x) / I0(x). Interface constant of semipermeable compartments.
/// F(0) = 0, strictly increasing, F(x) < x.
double interface_F(double x);

namespace special {

// Scalar evaluations (integer order n >= 0).
double bessel_i(int n, double x);   // modified Bessel, first kind
double bessel_k(int n, double x);   // modified Bessel, second kind
double sph_i(int n, double x);      // modified spherical Bessel i_n
double sph_k(int n, double x);      // modified spherical Bessel k_n
double legendre_p(int n, double x);

// Derivatives of the spherical kinds (recurrence identities).
double sph_i_prime(int n, double x);
double sph_k_prime(int n, double x);

// Sequences f[0..nmax] at a fixed argument. The I-type sequences are
// produced by downward (Miller) recurrence, K-type by upward recurrence.
std::vector<double> bessel_i_seq(double x, int nmax);
std::vector<double> bessel_k_seq(double x, int nmax);
std::vector<double> sph_i_seq(double x, int nmax);
std::vector<double> sph_k_seq(double x, int nmax);
std::vector<double> legendre_seq(double x, int nmax);

// Ratio sequences r[m] = f_{m+1}(x)/f_m(x) for m = 0..nmax-1. These stay
// bounded where the raw values overflow or underflow, and are the building
// blocks of the scaled Green's function series.
std::vector<double> bessel_i_ratios(double x, int nmax);
std::vector<double> bessel_k_ratios(double x, int nmax);
std::vector<double> sph_i_ratios(double x, int nmax);
std::vector<double> sph_k_ratios(double x, int nmax);

/// Largest argument for which e^x is representable; I-type kinds throw
/// RangeError beyond it.
inline constexpr double overflow_threshold = 709.0;

}  // namespace special

}  // namespace mdiff
