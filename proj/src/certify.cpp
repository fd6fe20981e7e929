#include "delaunay/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace delaunay {

namespace {

// Pass/fail convention: the inequalities are non-strict at isolated points,
// so an exact-zero margin passes; the slack below zero allowed by default is
// 1e-12 on the cancelled v-coordinate scale.
constexpr double kDefaultSlack = 1e-12;

Certificate from_margins(std::string name, const std::vector<PhaseState>& states,
                         const std::vector<double>& margins, double tolerance) {
    Certificate cert;
    cert.name = std::move(name);
    cert.tolerance = tolerance;
    cert.worst_margin = std::numeric_limits<double>::infinity();
    cert.worst_location = states.empty() ? 0.0 : states.front().t;
    for (std::size_t i = 0; i < margins.size(); ++i) {
        if (margins[i] < cert.worst_margin) {
            cert.worst_margin = margins[i];
            cert.worst_location = states[i].t;
        }
    }
    cert.passed = cert.worst_margin >= -tolerance;
    return cert;
}

double grad_term(const PhaseState& s, const ModelConstants& c) {
    const double q = 0.5 * (c.n - 4);
    const double d = s.v1 - q * s.v;
    return d * d;
}

} // namespace

double laplacian_bracket(const PhaseState& s, const ModelConstants& c) {
    return s.v2 + 2.0 * s.v1 - 0.25 * c.n * (c.n - 4) * s.v;
}

double scalar_curvature(const PhaseState& s, const ModelConstants& c) {
    if (s.v <= 0.0) throw std::domain_error("scalar_curvature: requires v > 0");
    return -(s.v * laplacian_bracket(s, c) + 2.0 / (c.n - 4) * grad_term(s, c));
}

double w_function(const PhaseState& s, const WParams& params, const ModelConstants& c) {
    const double alpha_max = static_cast<double>(c.n) / (c.n - 4);
    if (!(params.alpha < alpha_max))
        throw std::invalid_argument("w_function: requires alpha < n/(n-4)");
    if (params.epsilon < 0.0)
        throw std::invalid_argument("w_function: requires epsilon >= 0");
    if (s.v < 0.0) throw std::domain_error("w_function: requires v >= 0");
    const double q = 0.5 * (c.n - 4);
    // Raw evaluation at the radius r = e^t: u = e^{-q t} v,
    // Delta u = e^{-n t/2} B, |grad u|^2 = e^{-(n-2) t} (v' - q v)^2.
    const double u = std::exp(-q * s.t) * s.v;
    const double delta_u = std::exp(-0.5 * c.n * s.t) * laplacian_bracket(s, c);
    const double grad_sq = std::exp(-(c.n - 2) * s.t) * grad_term(s, c);
    const double power = std::pow(u, static_cast<double>(c.n) / (c.n - 4));
    return delta_u + params.alpha * grad_sq / (u + params.epsilon) + params.beta * power;
}

Certificate check_delta_u_negative(const std::vector<PhaseState>& states,
                                   const ModelConstants& c) {
    std::vector<double> margins(states.size());
    for (std::size_t i = 0; i < states.size(); ++i)
        margins[i] = -laplacian_bracket(states[i], c);
    return from_margins("delta_u_negative", states, margins, kDefaultSlack);
}

Certificate check_modica_power_bound(const std::vector<PhaseState>& states,
                                     const ModelConstants& c) {
    const double beta = std::sqrt((c.n - 4.0) / c.n);
    const double expo = static_cast<double>(c.n) / (c.n - 4);
    std::vector<double> margins(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) {
        const auto& s = states[i];
        margins[i] = -laplacian_bracket(s, c) - beta * std::pow(s.v, expo);
    }
    return from_margins("modica_power_bound", states, margins, kDefaultSlack);
}

Certificate check_modica_sharp_bound(const std::vector<PhaseState>& states,
                                     const ModelConstants& c) {
    const double beta = std::sqrt(c.n * (c.n - 4.0) / (c.n * c.n - 4.0));
    const double expo = static_cast<double>(c.n) / (c.n - 4);
    std::vector<double> margins(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) {
        const auto& s = states[i];
        margins[i] = -laplacian_bracket(s, c) - beta * std::pow(s.v, expo) -
                     2.0 / (c.n - 4) * grad_term(s, c) / s.v;
    }
    return from_margins("modica_sharp_bound", states, margins, kDefaultSlack);
}

Certificate check_scalar_curvature_positive(const std::vector<PhaseState>& states,
                                            const ModelConstants& c) {
    std::vector<double> margins(states.size());
    for (std::size_t i = 0; i < states.size(); ++i)
        margins[i] = scalar_curvature(states[i], c);
    return from_margins("scalar_curvature_positive", states, margins, kDefaultSlack);
}

Trajectory make_trajectory(const std::vector<PhaseState>& states,
                           const ModelConstants& c) {
    Trajectory traj;
    traj.meta.n = c.n;
    traj.samples = states;
    traj.deriv.reserve(states.size());
    traj.energy.reserve(states.size());
    for (const auto& s : states) {
        traj.deriv.push_back(rhs(s, c));
        traj.energy.push_back(energy(s, c));
    }
    return traj;
}

namespace {

// Bisection on the dense output for a zero of f(state) inside [ta, tb];
// refines the time bracket to 1e-10.
template <typename F>
double bisect_dense(const Trajectory& traj, double ta, double tb, F&& f) {
    double fa = f(dense_state(traj, ta));
    for (int it = 0; it < 200 && (tb - ta) > 1e-10; ++it) {
        const double tm = 0.5 * (ta + tb);
        const double fm = f(dense_state(traj, tm));
        if ((fa < 0) == (fm < 0)) {
            ta = tm;
            fa = fm;
        } else {
            tb = tm;
        }
    }
    return 0.5 * (ta + tb);
}

} // namespace

SignChangeReport count_sign_changes(const Trajectory& traj, double level) {
    SignChangeReport rep;
    const auto& S = traj.samples;
    int prev_sign = 0;
    std::size_t prev_idx = 0;
    for (std::size_t i = 0; i < S.size(); ++i) {
        const double d = S[i].v - level;
        const int sign = d > 0 ? 1 : (d < 0 ? -1 : 0);
        if (sign == 0) continue;  // exact touch: not a strict change
        if (prev_sign != 0 && sign != prev_sign) {
            ++rep.count;
            rep.times.push_back(bisect_dense(
                traj, S[prev_idx].t, S[i].t,
                [level](const PhaseState& s) { return s.v - level; }));
        }
        prev_sign = sign;
        prev_idx = i;
    }
    return rep;
}

std::vector<Extremum> classify_extrema(const Trajectory& traj, bool periodic) {
    std::vector<Extremum> out;
    const auto& S = traj.samples;
    if (S.size() < 3) return out;

    // With periodic data the final sample duplicates the first one period
    // later; node scans cover the m distinct phases, bracket scans use the
    // duplicate so the wrap-around interval is searched too.
    const std::size_t m = periodic ? S.size() - 1 : S.size();

    auto classify_at = [&](double tstar, const PhaseState& at) {
        Extremum e;
        e.t = tstar;
        e.value = at.v;
        e.degenerate = std::abs(at.v2) < 1e-10;
        e.kind = at.v2 < 0 ? Extremum::Kind::maximum : Extremum::Kind::minimum;
        out.push_back(e);
    };

    // Node-exact zeros of v' first.  Symmetric orbits start exactly at a
    // peak, so v'(t_0) == 0 is the common case, not a corner case.  A node
    // zero counts as an extremum when v'' is decisive or v' straddles it;
    // flat stretches (constant solutions) produce neither and are skipped.
    for (std::size_t i = 0; i < m; ++i) {
        if (S[i].v1 != 0.0) continue;
        double before = 0.0, after = 0.0;
        if (periodic) {
            before = S[(i + m - 1) % m].v1;
            after = S[(i + 1) % m].v1;
        } else {
            if (i > 0) before = S[i - 1].v1;
            if (i + 1 < m) after = S[i + 1].v1;
        }
        const bool straddle =
            before != 0.0 && after != 0.0 && (before < 0) != (after < 0);
        if (std::abs(S[i].v2) >= 1e-10 || straddle) classify_at(S[i].t, S[i]);
    }

    // Bracketed zeros between consecutive samples.
    const std::size_t pairs = periodic ? m : m - 1;
    for (std::size_t i = 0; i < pairs; ++i) {
        const double fa = S[i].v1;
        const double fb = S[i + 1].v1;
        if (fa == 0.0 || fb == 0.0) continue;  // node-exact cases handled above
        if ((fa < 0) == (fb < 0)) continue;
        const double tstar = bisect_dense(traj, S[i].t, S[i + 1].t,
                                          [](const PhaseState& s) { return s.v1; });
        classify_at(tstar, dense_state(traj, tstar));
    }

    std::sort(out.begin(), out.end(),
              [](const Extremum& a, const Extremum& b) { return a.t < b.t; });
    return out;
}

Certificate check_extrema_straddle(const Trajectory& traj, const ModelConstants& c,
                                   bool periodic) {
    const auto extrema = classify_extrema(traj, periodic);
    Certificate cert;
    cert.name = "extrema_straddle_equilibrium";
    cert.tolerance = kDefaultSlack;
    cert.worst_margin = std::numeric_limits<double>::infinity();
    cert.worst_location = traj.samples.empty() ? 0.0 : traj.samples.front().t;
    bool has_max = false, has_min = false;
    for (const auto& e : extrema) {
        if (e.degenerate) continue;
        // Maxima must clear l from above, minima from below.
        const double margin =
            e.kind == Extremum::Kind::maximum ? e.value - c.l : c.l - e.value;
        if (e.kind == Extremum::Kind::maximum) has_max = true; else has_min = true;
        if (margin < cert.worst_margin) {
            cert.worst_margin = margin;
            cert.worst_location = e.t;
        }
    }
    if (!has_max || !has_min) {
        // No straddling pair at all: report a hard failure with zero margin.
        cert.worst_margin = -std::numeric_limits<double>::infinity();
        cert.passed = false;
        return cert;
    }
    cert.passed = cert.worst_margin >= -cert.tolerance;
    return cert;
}

std::vector<Certificate> certify_trajectory(const Trajectory& traj,
                                            const ModelConstants& c, bool periodic) {
    std::vector<Certificate> out;
    out.push_back(check_delta_u_negative(traj.samples, c));
    out.push_back(check_modica_power_bound(traj.samples, c));
    out.push_back(check_modica_sharp_bound(traj.samples, c));
    out.push_back(check_scalar_curvature_positive(traj.samples, c));
    out.push_back(check_extrema_straddle(traj, c, periodic));
    return out;
}

double energy_drift(const Trajectory& traj) {
    if (traj.energy.empty())
        throw std::invalid_argument("energy_drift: empty trajectory");
    const double e0 = traj.energy.front();
    double drift = 0.0;
    for (double e : traj.energy) drift = std::max(drift, std::abs(e - e0));
    return drift;
}

} // namespace delaunay
