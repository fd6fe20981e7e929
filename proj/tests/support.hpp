#pragma once

// Shared numerical oracles for the test binaries. Everything here is built
// independently of the library's own algebra so that agreement is evidence,
// not tautology:
//   - a fixed-step RK4 on the shifted-coordinate formulation of the flow,
//   - extended-precision samples of the explicit homoclinic profile with
//     composed finite-difference residuals against the equation,
//   - a radial-coordinate probe that differentiates u(r) = r^(-q) v(log r)
//     by finite differences on a local Taylor model of v.

#include "delaunay/dynamics.hpp"
#include "delaunay/realmath.hpp"

#include <array>
#include <cmath>

namespace testsupport {

#if defined(__SIZEOF_FLOAT128__)
using wide = __float128;
#else
using wide = long double;
#endif

// ---------------------------------------------------------------------------
// Nonlinear flow in the shifted coordinates w = (v, v'-qv, v''-qv', v'''-qv''):
//   w1' = q w1 + w2,  w2' = w3,  w3' = w4,
//   w4' = w1^p + C2 w2 + C3 w3 + C4 w4.
// The w1 coefficient in the last row vanishes identically because q is a root
// of the characteristic quartic at the origin. Integrating this system with a
// plain RK4 cross-checks both the coordinate change and the derived
// coefficients against the primary integrator.

inline std::array<double, 4> w_rhs(const std::array<double, 4>& w,
                                   const delaunay::ModelConstants& c) {
    const double q = 0.5 * (c.n - 4);
    return {q * w[0] + w[1], w[2], w[3],
            std::pow(w[0], c.p) + c.C2 * w[1] + c.C3 * w[2] + c.C4 * w[3]};
}

inline std::array<double, 4> rk4_w(std::array<double, 4> w, double t0, double t1, int steps,
                                   const delaunay::ModelConstants& c) {
    const double h = (t1 - t0) / steps;
    for (int i = 0; i < steps; ++i) {
        const auto k1 = w_rhs(w, c);
        std::array<double, 4> tmp;
        for (int j = 0; j < 4; ++j) tmp[j] = w[j] + 0.5 * h * k1[j];
        const auto k2 = w_rhs(tmp, c);
        for (int j = 0; j < 4; ++j) tmp[j] = w[j] + 0.5 * h * k2[j];
        const auto k3 = w_rhs(tmp, c);
        for (int j = 0; j < 4; ++j) tmp[j] = w[j] + h * k3[j];
        const auto k4 = w_rhs(tmp, c);
        for (int j = 0; j < 4; ++j)
            w[j] += h / 6.0 * (k1[j] + 2 * k2[j] + 2 * k3[j] + k4[j]);
    }
    return w;
}

// ---------------------------------------------------------------------------
// Explicit homoclinic profile evaluated in wide precision, plus a composed
// finite-difference residual against the equation itself. The fourth
// derivative is formed by applying the fourth-order five-point second
// derivative stencil twice, so none of the library's closed-form derivative
// algebra enters the check.

inline wide bubble_wide(wide t, int n) {
    const wide s = wide(n - 4) / 2;
    const wide base = wide(n) * wide(n - 4) * wide(n - 2) * wide(n + 2);
    const wide cn = delaunay::detail::r_pow(base, wide(n - 4) / 8);
    const wide two_cosh = delaunay::detail::r_exp(t) + delaunay::detail::r_exp(-t);
    return cn * delaunay::detail::r_pow(two_cosh, -s);
}

template <class F>
wide fd_second(F&& f, wide t, wide h) {
    return (-f(t - 2 * h) + 16 * f(t - h) - 30 * f(t) + 16 * f(t + h) - f(t + 2 * h)) /
           (12 * h * h);
}

inline double bubble_equation_residual(double t, int n, double h = 1e-3) {
    const delaunay::ModelConstants c = delaunay::make_constants(n);
    const auto f = [n](wide x) { return bubble_wide(x, n); };
    const auto d2 = [&](wide x) { return fd_second(f, x, wide(h)); };
    const wide v = f(wide(t));
    const wide v2 = d2(wide(t));
    const wide v4 = fd_second(d2, wide(t), wide(h));
    const wide r = v4 + wide(c.K2) * v2 + wide(c.K0) * v - delaunay::detail::r_pow(v, wide(c.p));
    return static_cast<double>(delaunay::detail::r_abs(r));
}

// ---------------------------------------------------------------------------
// Radial-coordinate probe. From one phase-space sample, build a degree-6
// Taylor model of v around its time (the equation supplies the fourth through
// sixth derivatives), transform to u(r) = r^(-q) v(log r), and differentiate
// in r with fourth-order stencils. This measures the radial Laplacian and
// gradient directly, independent of the exponential-weight identities used by
// the certificate code.

struct RadialProbe {
    double r = 0;    // radius of the sample, e^t
    double u = 0;    // u(r)
    double du = 0;   // du/dr
    double lap = 0;  // u'' + (n-1)/r u'
};

inline RadialProbe radial_probe(const delaunay::PhaseState& s, const delaunay::ModelConstants& c,
                                double rel_h = 1e-4) {
    using ld = long double;
    const ld p = c.p;
    ld d[7];
    d[0] = s.v;
    d[1] = s.v1;
    d[2] = s.v2;
    d[3] = s.v3;
    const ld vp1 = std::pow(d[0], p - 1);
    d[4] = vp1 * d[0] - ld(c.K2) * d[2] - ld(c.K0) * d[0];
    d[5] = p * vp1 * d[1] - ld(c.K2) * d[3] - ld(c.K0) * d[1];
    d[6] = p * (p - 1) * std::pow(d[0], p - 2) * d[1] * d[1] + p * vp1 * d[2] -
           ld(c.K2) * d[4] - ld(c.K0) * d[2];

    const ld q = 0.5L * (c.n - 4);
    const ld t0 = s.t;
    const ld r0 = std::exp(t0);
    const ld h = rel_h * r0;

    ld u[5]; // u(r0 + k h) for k = -2..2
    for (int k = -2; k <= 2; ++k) {
        const ld rk = r0 + k * h;
        const ld dt = std::log(rk) - t0;
        ld acc = 0, fact = 1;
        for (int j = 0; j <= 6; ++j) {
            if (j > 0) fact *= j;
            acc += d[j] / fact * std::pow(dt, ld(j));
        }
        u[k + 2] = std::pow(rk, -q) * acc;
    }

    RadialProbe out;
    out.r = static_cast<double>(r0);
    out.u = static_cast<double>(u[2]);
    out.du = static_cast<double>((u[0] - 8 * u[1] + 8 * u[3] - u[4]) / (12 * h));
    const ld upp = (-u[0] + 16 * u[1] - 30 * u[2] + 16 * u[3] - u[4]) / (12 * h * h);
    out.lap = static_cast<double>(upp + (c.n - 1) / r0 * ((u[0] - 8 * u[1] + 8 * u[3] - u[4]) / (12 * h)));
    return out;
}

} // namespace testsupport
