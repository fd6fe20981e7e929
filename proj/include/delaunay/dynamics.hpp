#pragma once

// State types, the ODE right-hand side, the transformed first-order system,
// the conserved first integral, and an adaptive embedded Runge-Kutta 5(4)
// integrator (Dormand-Prince pair, PI step control, FSAL).
//
// The integrator is templated on the scalar type.  This matters because the
// flow is violently hyperbolic: the positive real eigenvalue mu at the
// nonzero equilibrium is ~2.8 at n = 5, so every local error committed at
// time t reaches the endpoint T amplified by e^{mu (T-t)}.  Over a span of 6
// time units that is a factor ~3.5e7, which pushes double precision to a
// residual floor near 1e-8.  The shooting layer therefore runs long-double
// internals by default and a __float128 tier for final polish, both through
// this one template.
//
// Dense output between accepted steps is cubic Hermite, which is exact
// enough (O(h^4)) for the 1e-6-level certification grids used downstream.

#include "delaunay/constants.hpp"
#include "delaunay/realmath.hpp"

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace delaunay {

// v and its first three t-derivatives at a time t (t is log-radius).
// All certification routines require v > 0 (positivity of solutions).
template <typename Real>
struct basic_state {
    Real t, v, v1, v2, v3;
};
using PhaseState = basic_state<double>;

// Variables of the equivalent first-order system
//   w1' = q w1 + w2,  w2' = w3,  w3' = w4,
//   w4' = w1^p + C2 w2 + C3 w3 + C4 w4,            q = (n-4)/2,
// with w1 = v, w2 = v' - q v, w3 = v'' - q v', w4 = v''' - q v''.
// (Only the first equation carries a q term: w2' = v'' - q v' = w3 exactly,
// and likewise w3' = w4.)  In these variables u'(r) = 0 is exactly w2 = 0.
struct WCoordinates {
    double w1, w2, w3, w4;
};

enum class IntegrationStatus {
    ok,             // reached the requested endpoint
    blow_up,        // |v| exceeded the growth guard 10 * L * e^{|t|}
    negative_v,     // an accepted state left the physical cone v >= 0
    step_underflow  // |h| < 1e-14 while still failing the error test
};

const char* to_string(IntegrationStatus s);

struct TrajectoryMeta {
    int n = 0;
    double rtol = 0, atol = 0;
    std::size_t accepted = 0, rejected = 0;
};

// Samples at the accepted steps of one integration, with the right-hand side
// and the first integral recorded per sample.  The deriv array is what makes
// cubic Hermite dense evaluation possible after the fact.  Time is strictly
// monotone across samples (increasing for forward runs, decreasing for
// backward runs).
template <typename Real>
struct basic_trajectory {
    std::vector<basic_state<Real>> samples;
    std::vector<std::array<Real, 4>> deriv;
    std::vector<Real> energy;
    TrajectoryMeta meta;
};
using Trajectory = basic_trajectory<double>;

// Right-hand side of the first-order form of the scalar ODE:
//   d/dt (v, v1, v2, v3) = (v1, v2, v3, v^p - K2 v2 - K0 v).
// Throws std::domain_error for v < 0 when p is non-integer (the fractional
// power leaves the reals); for integer p negative v is representable but
// physically out of cone, and the integrator guard handles it.
std::array<double, 4> rhs(const PhaseState& s, const ModelConstants& c);

WCoordinates to_w(const PhaseState& s, const ModelConstants& c);
PhaseState from_w(const WCoordinates& w, double t, const ModelConstants& c);

// Conserved first integral
//   E = 1/2 v2^2 - (K2/2) v1^2 - (K0/2) v^2 + ((n-4)/(2n)) v^(2n/(n-4))
//       - v1 * v3.
// Constant along every exact solution; its numerical drift is the
// a-posteriori accuracy certificate used throughout the tests.
double energy(const PhaseState& s, const ModelConstants& c);

template <typename Real>
Real energy_of(const basic_state<Real>& s, const basic_constants<Real>& c) {
    using detail::r_pow;
    const Real half = Real(1) / Real(2);
    const Real expo = (Real(2) * c.n) / Real(c.n - 4);
    return half * s.v2 * s.v2 - half * c.K2 * s.v1 * s.v1 - half * c.K0 * s.v * s.v +
           Real(c.n - 4) / (Real(2) * c.n) * r_pow(s.v, expo) - s.v1 * s.v3;
}

template <typename Real>
struct integration_outcome {
    basic_trajectory<Real> traj;
    IntegrationStatus status = IntegrationStatus::ok;
    std::string message;
};

namespace detail {

// RHS with the fractional power clamped at zero from below.  Trial stages of
// a rejected step may briefly poke past v = 0; clamping keeps them finite so
// the error estimator can reject the step, while the guard on *accepted*
// states enforces the physical cone.
template <typename Real>
inline std::array<Real, 4> rhs_clamped(const std::array<Real, 4>& y,
                                       const basic_constants<Real>& c) {
    const Real vpos = y[0] > Real(0) ? y[0] : Real(0);
    return {y[1], y[2], y[3], r_pow(vpos, c.p) - c.K2 * y[2] - c.K0 * y[0]};
}

template <typename Real>
inline Real rms_error(const std::array<Real, 4>& err, const std::array<Real, 4>& y0,
                      const std::array<Real, 4>& y1, Real rtol, Real atol) {
    Real sum = Real(0);
    for (int i = 0; i < 4; ++i) {
        Real ay = r_abs(y0[i]) > r_abs(y1[i]) ? r_abs(y0[i]) : r_abs(y1[i]);
        Real sc = atol + rtol * ay;
        Real q = err[i] / sc;
        sum += q * q;
    }
    return r_sqrt(sum / Real(4));
}

} // namespace detail

// Adaptive integration of the ODE from `start` to t_end (backward runs are
// allowed).  Guards: abort with blow_up once |v| > 10 * L * e^{|t|} on an
// accepted state, with negative_v once v < 0, and with step_underflow once
// |h| < 1e-14.  On abort the partial trajectory up to the failure is
// returned along with the diagnostic.
template <typename Real>
integration_outcome<Real> integrate_core(const basic_state<Real>& start, Real t_end,
                                         Real rtol, Real atol,
                                         const basic_constants<Real>& c) {
    using detail::r_abs;
    using detail::r_exp;
    using detail::r_isfinite;
    using detail::r_pow;

    // Dormand-Prince 5(4) tableau.
    static const Real a21 = Real(1) / 5;
    static const Real a31 = Real(3) / 40, a32 = Real(9) / 40;
    static const Real a41 = Real(44) / 45, a42 = Real(-56) / 15, a43 = Real(32) / 9;
    static const Real a51 = Real(19372) / 6561, a52 = Real(-25360) / 2187,
                      a53 = Real(64448) / 6561, a54 = Real(-212) / 729;
    static const Real a61 = Real(9017) / 3168, a62 = Real(-355) / 33,
                      a63 = Real(46732) / 5247, a64 = Real(49) / 176,
                      a65 = Real(-5103) / 18656;
    static const Real b1 = Real(35) / 384, b3 = Real(500) / 1113, b4 = Real(125) / 192,
                      b5 = Real(-2187) / 6784, b6 = Real(11) / 84;
    static const Real e1 = Real(71) / 57600, e3 = Real(-71) / 16695, e4 = Real(71) / 1920,
                      e5 = Real(-17253) / 339200, e6 = Real(22) / 525, e7 = Real(-1) / 40;

    integration_outcome<Real> out;
    out.traj.meta.n = c.n;
    out.traj.meta.rtol = static_cast<double>(rtol);
    out.traj.meta.atol = static_cast<double>(atol);

    if (!(rtol > Real(0)) || !(atol > Real(0)))
        throw std::invalid_argument("integrate: tolerances must be positive");
    if (t_end == start.t)
        throw std::invalid_argument("integrate: empty time span");

    const Real dir = t_end > start.t ? Real(1) : Real(-1);
    Real t = start.t;
    std::array<Real, 4> y{start.v, start.v1, start.v2, start.v3};

    auto record = [&](Real tt, const std::array<Real, 4>& yy,
                      const std::array<Real, 4>& ff) {
        out.traj.samples.push_back({tt, yy[0], yy[1], yy[2], yy[3]});
        out.traj.deriv.push_back(ff);
        out.traj.energy.push_back(
            energy_of(basic_state<Real>{tt, yy[0], yy[1], yy[2], yy[3]}, c));
    };

    auto guard = [&](Real tt, const std::array<Real, 4>& yy) -> IntegrationStatus {
        if (yy[0] < Real(0)) return IntegrationStatus::negative_v;
        const Real bound = Real(10) * c.L * r_exp(r_abs(tt));
        if (!r_isfinite(yy[0]) || r_abs(yy[0]) > bound) return IntegrationStatus::blow_up;
        return IntegrationStatus::ok;
    };

    std::array<Real, 4> k1 = detail::rhs_clamped(y, c);
    record(t, y, k1);
    if (auto g = guard(t, y); g != IntegrationStatus::ok) {
        out.status = g;
        out.message = std::string("initial state rejected: ") + to_string(g);
        return out;
    }

    // Initial step from the usual two-derivative heuristic.
    Real h;
    {
        Real d0 = detail::rms_error(y, y, y, rtol, atol);  // ||y/sc||
        Real d1 = detail::rms_error(k1, y, y, rtol, atol);
        Real h0 = (d0 > Real(1e-5) && d1 > Real(1e-5)) ? Real(0.01) * (d0 / d1)
                                                       : Real(1e-6);
        Real span = r_abs(t_end - start.t);
        if (h0 > span / 10) h0 = span / 10;
        h = dir * h0;
    }

    const Real hmin = Real(1e-14);
    Real err_old = Real(1e-4);
    // Generous for any realistic tolerance (tight double-precision runs over
    // the spans used here take ~1e4-1e5 steps); exhausting it means the
    // controller is pinned at the minimum step and cannot traverse the span.
    const std::size_t max_steps = 2000000;

    for (std::size_t step = 0; step < max_steps; ++step) {
        if ((t - t_end) * dir >= Real(0)) break;
        if (r_abs(h) < hmin) {
            out.status = IntegrationStatus::step_underflow;
            out.message = "step size underflow (|h| < 1e-14) at t = " +
                          std::to_string(static_cast<double>(t));
            return out;
        }
        bool last = false;
        if ((t + h - t_end) * dir > Real(0)) {
            h = t_end - t;
            last = true;
        }

        std::array<Real, 4> k2, k3, k4, k5, k6, k7, yt, ynew;
        for (int i = 0; i < 4; ++i) yt[i] = y[i] + h * a21 * k1[i];
        k2 = detail::rhs_clamped(yt, c);
        for (int i = 0; i < 4; ++i) yt[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        k3 = detail::rhs_clamped(yt, c);
        for (int i = 0; i < 4; ++i)
            yt[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        k4 = detail::rhs_clamped(yt, c);
        for (int i = 0; i < 4; ++i)
            yt[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        k5 = detail::rhs_clamped(yt, c);
        for (int i = 0; i < 4; ++i)
            yt[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] +
                                a65 * k5[i]);
        k6 = detail::rhs_clamped(yt, c);
        for (int i = 0; i < 4; ++i)
            ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] +
                                  b6 * k6[i]);
        k7 = detail::rhs_clamped(ynew, c);  // FSAL

        std::array<Real, 4> err;
        for (int i = 0; i < 4; ++i)
            err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                          e6 * k6[i] + e7 * k7[i]);
        Real en = detail::rms_error(err, y, ynew, rtol, atol);
        bool finite = r_isfinite(en) && r_isfinite(ynew[0]) && r_isfinite(ynew[3]);
        if (!finite) en = Real(10);  // force rejection; guard decides later

        if (en <= Real(1)) {
            t = last ? t_end : t + h;
            y = ynew;
            k1 = k7;
            ++out.traj.meta.accepted;
            record(t, y, k1);
            if (auto g = guard(t, y); g != IntegrationStatus::ok) {
                out.status = g;
                out.message = std::string(to_string(g)) + " at t = " +
                              std::to_string(static_cast<double>(t)) + ", v = " +
                              std::to_string(static_cast<double>(y[0]));
                return out;
            }
            // PI controller (Gustafsson): gentle growth, memory of last error.
            Real safe = Real(0.9);
            Real fac = safe * r_pow(en > Real(1e-30) ? en : Real(1e-30), Real(-0.17)) *
                       r_pow(err_old, Real(0.04));
            if (fac > Real(5)) fac = Real(5);
            if (fac < Real(0.2)) fac = Real(0.2);
            h *= fac;
            err_old = en > Real(1e-4) ? en : Real(1e-4);
        } else {
            ++out.traj.meta.rejected;
            Real fac = Real(0.9) * r_pow(en, Real(-0.2));
            if (fac < Real(0.1)) fac = Real(0.1);
            if (fac > Real(0.9)) fac = Real(0.9);
            h *= fac;
        }
    }
    if ((t - t_end) * dir < Real(0)) {
        // Step budget exhausted while hovering at the minimum step size: the
        // requested tolerance cannot be met in this precision.  Never report
        // a truncated span as success.
        out.status = IntegrationStatus::step_underflow;
        out.message = "step budget exhausted at t = " +
                      std::to_string(static_cast<double>(t)) +
                      " (tolerance unreachable at working precision)";
        return out;
    }
    out.status = IntegrationStatus::ok;
    return out;
}

// Cubic Hermite evaluation of a stored trajectory at an arbitrary time
// inside its span.  Uses the recorded state and right-hand side at the two
// bracketing samples.
template <typename Real>
basic_state<Real> dense_state(const basic_trajectory<Real>& traj, Real t) {
    const auto& S = traj.samples;
    if (S.empty()) throw std::invalid_argument("dense_state: empty trajectory");
    const bool fwd = S.back().t >= S.front().t;
    // Binary search for the bracketing interval.
    std::size_t lo = 0, hi = S.size() - 1;
    if (fwd) {
        if (t <= S.front().t) return S.front();
        if (t >= S.back().t) return S.back();
        while (hi - lo > 1) {
            std::size_t mid = (lo + hi) / 2;
            if (S[mid].t <= t) lo = mid; else hi = mid;
        }
    } else {
        if (t >= S.front().t) return S.front();
        if (t <= S.back().t) return S.back();
        while (hi - lo > 1) {
            std::size_t mid = (lo + hi) / 2;
            if (S[mid].t >= t) lo = mid; else hi = mid;
        }
    }
    const Real h = S[hi].t - S[lo].t;
    const Real x = (t - S[lo].t) / h;
    const Real x2 = x * x, x3 = x2 * x;
    const Real h00 = 2 * x3 - 3 * x2 + 1, h10 = x3 - 2 * x2 + x;
    const Real h01 = -2 * x3 + 3 * x2, h11 = x3 - x2;
    std::array<Real, 4> y0{S[lo].v, S[lo].v1, S[lo].v2, S[lo].v3};
    std::array<Real, 4> y1{S[hi].v, S[hi].v1, S[hi].v2, S[hi].v3};
    std::array<Real, 4> r;
    for (int i = 0; i < 4; ++i)
        r[i] = h00 * y0[i] + h10 * h * traj.deriv[lo][i] + h01 * y1[i] +
               h11 * h * traj.deriv[hi][i];
    return {t, r[0], r[1], r[2], r[3]};
}

// Thrown by the double-precision convenience wrapper on guard aborts; the
// partial trajectory and the diagnostic ride along for error reporting.
struct IntegrationError : std::runtime_error {
    IntegrationStatus status;
    Trajectory partial;
    IntegrationError(IntegrationStatus st, const std::string& msg, Trajectory part)
        : std::runtime_error(msg), status(st), partial(std::move(part)) {}
};

// Double-precision integration; throws IntegrationError on abort.
Trajectory integrate(const PhaseState& start, double t_end, double rtol, double atol,
                     const ModelConstants& c);

} // namespace delaunay
