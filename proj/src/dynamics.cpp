#include "delaunay/dynamics.hpp"

#include <cmath>

namespace delaunay {

const char* to_string(IntegrationStatus s) {
    switch (s) {
        case IntegrationStatus::ok: return "ok";
        case IntegrationStatus::blow_up: return "blow-up guard tripped";
        case IntegrationStatus::negative_v: return "state left the cone v >= 0";
        case IntegrationStatus::step_underflow: return "step size underflow";
    }
    return "unknown";
}

namespace {

bool p_is_integer(double p) {
    return std::abs(p - std::nearbyint(p)) < 1e-12;
}

} // namespace

std::array<double, 4> rhs(const PhaseState& s, const ModelConstants& c) {
    if (s.v < 0.0 && !p_is_integer(c.p))
        throw std::domain_error(
            "rhs: v < 0 with non-integer exponent (trajectory left the physical cone)");
    return {s.v1, s.v2, s.v3, std::pow(s.v, c.p) - c.K2 * s.v2 - c.K0 * s.v};
}

WCoordinates to_w(const PhaseState& s, const ModelConstants& c) {
    const double q = 0.5 * (c.n - 4);
    return {s.v, s.v1 - q * s.v, s.v2 - q * s.v1, s.v3 - q * s.v2};
}

PhaseState from_w(const WCoordinates& w, double t, const ModelConstants& c) {
    const double q = 0.5 * (c.n - 4);
    PhaseState s;
    s.t = t;
    s.v = w.w1;
    s.v1 = w.w2 + q * s.v;
    s.v2 = w.w3 + q * s.v1;
    s.v3 = w.w4 + q * s.v2;
    return s;
}

double energy(const PhaseState& s, const ModelConstants& c) {
    if (s.v < 0.0 && !p_is_integer(c.p))
        throw std::domain_error("energy: v < 0 with non-integer exponent");
    basic_constants<double> cc = c;
    return energy_of<double>(s, cc);
}

Trajectory integrate(const PhaseState& start, double t_end, double rtol, double atol,
                     const ModelConstants& c) {
    auto out = integrate_core<double>(start, t_end, rtol, atol, c);
    if (out.status != IntegrationStatus::ok)
        throw IntegrationError(out.status, out.message, std::move(out.traj));
    return std::move(out.traj);
}

} // namespace delaunay
