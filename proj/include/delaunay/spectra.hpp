#pragma once

// Linearizations of the first-order system at its two stationary points and
// their closed-form eigenvalues.
//
// At the origin O the characteristic quartic is biquadratic,
//     lambda^4 + K2 lambda^2 + K0 = 0,
// with the exact real roots {n/2, -n/2, (n-4)/2, -(n-4)/2} (the discriminant
// K2^2 - 4 K0 collapses to (n-2)^2).  At the nonzero equilibrium P it is
//     mu^4 + K2 mu^2 - (8/(n-4)) K0 = 0,
// which for every n >= 5 has one real pair +-mu1 and one purely imaginary
// pair +-i*omega; omega is the frequency of the linear center mode whose
// Lyapunov family the shooting layer continues.
//
// Both quartics are quadratics in lambda^2, so eigenvalues come from the
// quadratic formula directly -- no general eigensolver, fully reproducible.

#include "delaunay/constants.hpp"

#include <array>
#include <complex>

namespace delaunay {

enum class EquilibriumPoint { O, P };

struct Linearization {
    EquilibriumPoint point;
    // Jacobian of the w-flow at the point, row-major.  Shape:
    //   [ q 1 0 0 ; 0 q 1 0 ; 0 0 q 1 ; d C2 C3 C4 ],   q = (n-4)/2,
    // with d = 0 at O and d = p*K0 at P (since l^(p-1) = K0 exactly).
    std::array<std::array<double, 4>, 4> matrix;
    // Coefficients of the characteristic quartic, highest degree first:
    // {1, 0, K2, 0, K0} at O and {1, 0, K2, 0, -(8/(n-4)) K0} at P.
    std::array<double, 5> char_poly_coeffs;
    // Closed-form roots, ordered (positive real, negative real, +i im, -i im)
    // -- at O the "imaginary" slots hold the second real pair +-(n-4)/2.
    std::array<std::complex<double>, 4> eigenvalues;
};

Linearization linearize_at_O(const ModelConstants& c);
Linearization linearize_at_P(const ModelConstants& c);

// Frequency of the center mode at P:
//   omega = sqrt( sqrt(n^4 - 64 n + 64) - (n^2 - 4n + 8) ) / 2 > 0.
// Linear oscillations about P have period 2*pi/omega; the nonconstant
// periodic family bifurcates at half-period T = pi/omega.
double center_frequency(const ModelConstants& c);

} // namespace delaunay
