#include "delaunay/spectra.hpp"

#include <cmath>

namespace delaunay {

namespace {

// Jacobian of the shifted-derivative system w = (v, v'-qv, v''-qv', v'''-qv'').
// Only the first component carries the q-shift in its own equation
// (w1' = q w1 + w2); the middle components satisfy w2' = w3 and w3' = w4
// identically, and the last row collects the equation's coefficients, with d
// the linearization of the nonlinearity at the base point. The w1 entry of
// the last row vanishes because q itself is a root of the linearized
// characteristic quartic at the origin.
std::array<std::array<double, 4>, 4> w_jacobian(const ModelConstants& c, double d) {
    const double q = 0.5 * (c.n - 4);
    return {{{q, 1, 0, 0},
             {0, 0, 1, 0},
             {0, 0, 0, 1},
             {d, c.C2, c.C3, c.C4}}};
}

} // namespace

Linearization linearize_at_O(const ModelConstants& c) {
    Linearization lin;
    lin.point = EquilibriumPoint::O;
    lin.matrix = w_jacobian(c, 0.0);
    lin.char_poly_coeffs = {1.0, 0.0, c.K2, 0.0, c.K0};
    // lambda^4 + K2 lambda^2 + K0 factors exactly over the rationals:
    // K2^2 - 4 K0 = (n-2)^2, so lambda^2 is (n/2)^2 or ((n-4)/2)^2.
    const double lam1 = 0.5 * c.n;
    const double lam3 = 0.5 * (c.n - 4);
    lin.eigenvalues = {std::complex<double>(lam1, 0), std::complex<double>(-lam1, 0),
                       std::complex<double>(lam3, 0), std::complex<double>(-lam3, 0)};
    return lin;
}

Linearization linearize_at_P(const ModelConstants& c) {
    Linearization lin;
    lin.point = EquilibriumPoint::P;
    // l^(p-1) = K0 exactly (since (p-1)(n-4)/8 = 1), so the nonlinear entry
    // of the Jacobian is p * K0 without any fractional power.
    lin.matrix = w_jacobian(c, c.p * c.K0);
    const double c0 = -8.0 / (c.n - 4) * c.K0;
    lin.char_poly_coeffs = {1.0, 0.0, c.K2, 0.0, c0};
    // mu^2 = [(n^2-4n+8) +- sqrt(n^4-64n+64)] / 4; the radical exceeds the
    // first term by 8 n^2 (n-4) > 0, so one root pair is real and one purely
    // imaginary for every n >= 5.
    const double nn = c.n;
    const double A = nn * nn - 4 * nn + 8;
    const double rad = std::sqrt(nn * nn * nn * nn - 64 * nn + 64);
    const double mu1 = 0.5 * std::sqrt(A + rad);
    const double omega = 0.5 * std::sqrt(rad - A);
    lin.eigenvalues = {std::complex<double>(mu1, 0), std::complex<double>(-mu1, 0),
                       std::complex<double>(0, omega), std::complex<double>(0, -omega)};
    return lin;
}

double center_frequency(const ModelConstants& c) {
    const double nn = c.n;
    const double A = nn * nn - 4 * nn + 8;
    const double rad = std::sqrt(nn * nn * nn * nn - 64 * nn + 64);
    return 0.5 * std::sqrt(rad - A);
}

} // namespace delaunay
