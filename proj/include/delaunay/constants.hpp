#pragma once

// Closed-form constants of the critical biharmonic radial problem in
// log-radius (Emden-Fowler) coordinates,
//
//     v''''(t) + K2 v''(t) + K0 v(t) = v(t)^p,   p = (n+4)/(n-4),  n >= 5,
//
// obtained from u(r) = r^(-(n-4)/2) v(log r) applied to Delta^2 u = u^p on
// R^n \ {0}.  Everything downstream (integration, shooting, certification)
// consumes this header.  All constants are evaluated through exact integer
// intermediates and quad-precision powers, then rounded once to the target
// type, so the values are bit-reproducible across runs and platforms with
// the same floating-point format.

#include <stdexcept>

namespace delaunay {

// The model constants at a given dimension.  Immutable after construction;
// safe to share across threads.
template <typename Real>
struct basic_constants {
    int n;    // space dimension, n >= 5
    Real p;   // critical exponent (n+4)/(n-4)
    Real K2;  // second-order coefficient, -(n^2-4n+8)/2 (always < -4)
    Real K0;  // zeroth-order coefficient, n^2(n-4)^2/16 (always > 1)
    Real l;   // constant equilibrium value, K0^((n-4)/8)
    Real L;   // upper band level, (n/(n-4))^((n-4)/8) * K0^((n-4)/8)
    Real cn;  // sech-profile amplitude, [n(n-4)(n-2)(n+2)]^((n-4)/8)
    Real C2;  // first-order-system coefficient, 2 K0/(n-4)
    Real C3;  // first-order-system coefficient, n^2/4
    Real C4;  // first-order-system coefficient, -(n-4)/2
    Real Gl;  // energy level of the constant solution, -(2/n) K0^(n/4)
};

using ModelConstants = basic_constants<double>;

// Builds the constants for dimension n.  Throws std::domain_error for n < 5
// (the exponent p is undefined or non-positive there).  Instantiated for
// double, long double, and __float128.
template <typename Real>
basic_constants<Real> make_constants_as(int n);

ModelConstants make_constants(int n);

// The constant singular profile value l = K0^((n-4)/8); v = l solves the ODE
// identically and corresponds to u(r) = l r^(-(n-4)/2).
double singular_v(int n);

// Coefficient K1 of the singular solution u = K1^(1/(p-1)) r^(-4/(p-1)) of
// Delta^2 u = u^p at a general exponent p > 1:
//
//   K1 = 8 [ (n-2)(n-4)(p-1)^3 + 2(n^2-10n+20)(p-1)^2
//            - 16(n-4)(p-1) + 32 ] / (p-1)^4.
//
// At the critical exponent p = (n+4)/(n-4) this collapses to K0(n); the unit
// tests assert that identity for n in 5..16.  Throws std::domain_error for
// p <= 1.
double compute_K1(int n, double p);

// The explicit entire solution in t-coordinates,
//
//     v(t) = cn * (2 cosh t)^(-(n-4)/2),
//
// homoclinic to zero at energy level 0, with a single maximum at t = 0.
// The amplitude carries a POSITIVE exponent (n-4)/8: that is the sign for
// which the finite-difference residual of the ODE vanishes (the quad
// precision oracle in the test suite pins this down to < 1e-8 pointwise).
double bubble_v(double t, int n);

// v and its first three t-derivatives on the sech profile, from the closed
// forms in tau = tanh t, sigma = sech^2 t.  Used to seed integrations on the
// profile and to certify the integrator against an exact solution.
struct BubblePoint {
    double v, v1, v2, v3;
};
BubblePoint bubble_state(double t, int n);

// Potential G(s) = -(K0/2) s^2 + ((n-4)/(2n)) s^(2n/(n-4)) for s >= 0, the
// antiderivative with G'(s) = -K0 s + s^p.  G attains its global minimum at
// s = l with G(l) = Gl, and G(L) = 0.  F = -G is the barrier profile: it is
// positive exactly on (0, L).  Both throw std::domain_error for s < 0.
double potential_G(double s, const ModelConstants& c);
double potential_F(double s, const ModelConstants& c);

} // namespace delaunay
