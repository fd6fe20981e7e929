#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "delaunay/dynamics.hpp"
#include "support.hpp"

#include <cmath>

using namespace delaunay;

namespace {

PhaseState bubble_phase(double t, int n) {
    const BubblePoint b = bubble_state(t, n);
    return {t, b.v, b.v1, b.v2, b.v3};
}

PhaseState reflect(const PhaseState& s) { return {s.t, s.v, -s.v1, s.v2, -s.v3}; }

double state_gap(const PhaseState& a, const PhaseState& b) {
    return std::max(std::max(std::abs(a.v - b.v), std::abs(a.v1 - b.v1)),
                    std::max(std::abs(a.v2 - b.v2), std::abs(a.v3 - b.v3)));
}

} // namespace

TEST_CASE("both equilibria are fixed points of the vector field") {
    for (int n : {5, 6, 9}) {
        const ModelConstants c = make_constants(n);
        CAPTURE(n);
        const auto at_O = rhs({0.0, 0.0, 0.0, 0.0, 0.0}, c);
        for (double d : at_O) CHECK(d == 0.0);
        const auto at_P = rhs({0.0, c.l, 0.0, 0.0, 0.0}, c);
        CHECK(at_P[0] == 0.0);
        CHECK(at_P[1] == 0.0);
        CHECK(at_P[2] == 0.0);
        // l^p - K0 l cancels to rounding; the residual scales with K0 l
        // (several thousand by n = 9), so bound it in ulps of that scale.
        CHECK(std::abs(at_P[3]) < 4e-15 * (1.0 + c.K0 * c.l));
    }
}

TEST_CASE("vector field at a unit sample state") {
    const ModelConstants c = make_constants(5);
    const auto f = rhs({0.0, 1.0, 0.0, 0.0, 0.0}, c);
    CHECK(f[0] == 0.0);
    CHECK(f[1] == 0.0);
    CHECK(f[2] == 0.0);
    CHECK(f[3] == -0.5625); // 1^9 - K0 = 1 - 1.5625
}

TEST_CASE("negative v is rejected only for fractional exponents") {
    const ModelConstants c7 = make_constants(7);
    CHECK_THROWS_AS(rhs({0.0, -0.1, 0.0, 0.0, 0.0}, c7), std::domain_error);
    CHECK_THROWS_AS(energy({0.0, -0.1, 0.0, 0.0, 0.0}, c7), std::domain_error);
    const ModelConstants c5 = make_constants(5); // p = 9 is an odd integer
    CHECK_NOTHROW(rhs({0.0, -0.1, 0.0, 0.0, 0.0}, c5));
}

TEST_CASE("shifted coordinates round-trip and map the equilibrium correctly") {
    const ModelConstants c = make_constants(5);

    const WCoordinates at_P = to_w({0.0, c.l, 0.0, 0.0, 0.0}, c);
    CHECK(at_P.w1 == c.l);
    CHECK(at_P.w2 == -0.5 * c.l);
    CHECK(at_P.w3 == 0.0);
    CHECK(at_P.w4 == 0.0);

    for (const PhaseState s : {PhaseState{0.3, 1.1, -0.4, 0.25, 0.7},
                               PhaseState{-2.0, 0.01, 3.0, -5.0, 11.0}}) {
        const PhaseState back = from_w(to_w(s, c), s.t, c);
        CHECK(back.t == s.t);
        CHECK(state_gap(back, s) < 1e-14);
    }
}

TEST_CASE("agreement with an independent integration in shifted coordinates") {
    // Integrate the same stretch of flow twice: once with the adaptive
    // embedded pair in phase coordinates, once with a plain RK4 on the
    // shifted-coordinate formulation, and compare through the transform.
    const ModelConstants c = make_constants(7);
    const PhaseState starts[] = {bubble_phase(0.0, 7),
                                 {0.0, 0.9 * c.l, 0.1, -0.2, 0.05}};
    for (const PhaseState& start : starts) {
        CAPTURE(start.v);
        const Trajectory traj = integrate(start, start.t + 1.0, 1e-12, 1e-14, c);
        const PhaseState end = traj.samples.back();

        const WCoordinates w0 = to_w(start, c);
        const auto wend = testsupport::rk4_w({w0.w1, w0.w2, w0.w3, w0.w4},
                                             start.t, start.t + 1.0, 20000, c);
        const PhaseState oracle = from_w({wend[0], wend[1], wend[2], wend[3]}, end.t, c);
        CHECK(state_gap(end, oracle) < 1e-9);
    }
}

TEST_CASE("the constant solution stays put") {
    const ModelConstants c = make_constants(5);
    const Trajectory traj = integrate({0.0, c.l, 0.0, 0.0, 0.0}, 3.0, 1e-12, 1e-15, c);
    double worst = 0.0;
    for (const auto& s : traj.samples) worst = std::max(worst, std::abs(s.v - c.l));
    CHECK(worst < 1e-8);
    CHECK(traj.samples.back().t == 3.0);
}

TEST_CASE("the integrator tracks the explicit decaying profile") {
    const ModelConstants c = make_constants(5);
    const Trajectory traj = integrate(bubble_phase(0.0, 5), 5.0, 1e-12, 1e-14, c);
    for (double t : {1.0, 2.0, 3.0, 4.0, 5.0}) {
        CAPTURE(t);
        CHECK(std::abs(dense_state(traj, t).v - bubble_v(t, 5)) < 1e-6);
    }
}

TEST_CASE("energy: zero level on the explicit profile, conserved along flows") {
    const ModelConstants c = make_constants(5);

    // The explicit profile is homoclinic to the origin, so its conserved
    // level is exactly zero.
    for (double t : {0.0, 1.0, 2.0})
        CHECK(std::abs(energy(bubble_phase(t, 5), c)) < 1e-10);

    const Trajectory along_bubble = integrate(bubble_phase(0.0, 5), 4.0, 1e-12, 1e-14, c);
    double drift = 0.0;
    for (std::size_t i = 0; i < along_bubble.samples.size(); ++i)
        drift = std::max(drift, std::abs(along_bubble.energy[i] - along_bubble.energy[0]));
    CHECK(drift < 1e-9);

    // A bounded positive stretch for a fractional exponent.  (Generic
    // nearby starts leave the cone within the span -- the equilibrium is
    // strongly hyperbolic at n = 7 -- so the start is chosen to stay
    // bounded over [0, 1.5]; measured drift here is ~5e-10.)
    const ModelConstants c7 = make_constants(7);
    const Trajectory well = integrate({0.0, 1.02 * c7.l, 0.0, 0.01, 0.0}, 1.5, 1e-12, 1e-14, c7);
    drift = 0.0;
    for (std::size_t i = 0; i < well.samples.size(); ++i)
        drift = std::max(drift, std::abs(well.energy[i] - well.energy[0]));
    CHECK(drift < 5e-9);

    // Recorded energies are the invariant evaluated at the samples.
    const auto& s = well.samples.back();
    CHECK(well.energy.back() == doctest::Approx(energy(s, c7)).epsilon(1e-15));
}

TEST_CASE("time reversal via the double-forward trick") {
    // The flow is reversible under (v, v1, v2, v3) -> (v, -v1, v2, -v3), so
    // integrating forward, reflecting, and integrating forward again must
    // return to the reflected start.
    const ModelConstants c = make_constants(5);
    const PhaseState x0{0.0, 0.95 * c.l, 0.0, 0.02, 0.0};
    const Trajectory fwd = integrate(x0, 1.5, 1e-12, 1e-15, c);
    PhaseState mid = reflect(fwd.samples.back());
    mid.t = 0.0;
    const Trajectory back = integrate(mid, 1.5, 1e-12, 1e-15, c);
    CHECK(state_gap(reflect(back.samples.back()), x0) < 1e-7);
}

TEST_CASE("growth guard aborts with a usable partial trajectory") {
    const ModelConstants c = make_constants(5);
    try {
        integrate({0.0, 3.0 * c.L, 0.0, 0.0, 0.0}, 60.0, 1e-10, 1e-14, c);
        FAIL("expected the growth guard to trip");
    } catch (const IntegrationError& e) {
        CHECK(e.status == IntegrationStatus::blow_up);
        REQUIRE(e.partial.samples.size() >= 2);
        CHECK(e.partial.samples.back().t < 60.0);
        CHECK(e.partial.samples.back().v > 10.0 * c.L);
    }
}

TEST_CASE("cone guard stops a trajectory that reaches v < 0") {
    const ModelConstants c = make_constants(5);
    try {
        integrate({0.0, 0.1, -0.5, 0.0, 0.0}, 10.0, 1e-10, 1e-14, c);
        FAIL("expected the cone guard to trip");
    } catch (const IntegrationError& e) {
        CHECK(e.status == IntegrationStatus::negative_v);
        CHECK(e.partial.samples.back().v < 0.0);
    }
}

TEST_CASE("unachievable tolerance ends in step underflow, not a hang") {
    const ModelConstants c = make_constants(5);
    try {
        integrate(bubble_phase(0.0, 5), 0.5, 1e-30, 1e-30, c);
        FAIL("expected step-size underflow");
    } catch (const IntegrationError& e) {
        CHECK(e.status == IntegrationStatus::step_underflow);
    }
}

TEST_CASE("dense output interpolates and clamps") {
    const ModelConstants c = make_constants(5);
    const Trajectory traj = integrate(bubble_phase(0.0, 5), 3.0, 1e-12, 1e-14, c);

    // Exact reproduction at the recorded nodes.
    for (std::size_t i : {std::size_t(0), traj.samples.size() / 2, traj.samples.size() - 1}) {
        const PhaseState d = dense_state(traj, traj.samples[i].t);
        CHECK(d.v == traj.samples[i].v);
        CHECK(d.v1 == traj.samples[i].v1);
    }

    // Interpolated values still track the explicit profile.
    for (double t : {0.37, 1.41, 2.93})
        CHECK(std::abs(dense_state(traj, t).v - bubble_v(t, 5)) < 1e-6);

    // Queries outside the span clamp to the endpoints.
    CHECK(dense_state(traj, -5.0).v == traj.samples.front().v);
    CHECK(dense_state(traj, 50.0).v == traj.samples.back().v);
}

TEST_CASE("integrator input validation") {
    const ModelConstants c = make_constants(5);
    CHECK_THROWS_AS(integrate({0.0, 1.0, 0, 0, 0}, 1.0, -1e-10, 1e-14, c), std::invalid_argument);
    CHECK_THROWS_AS(integrate({0.0, 1.0, 0, 0, 0}, 1.0, 1e-10, -1.0, c), std::invalid_argument);
}
