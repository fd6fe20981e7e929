#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "delaunay/certify.hpp"
#include "delaunay/periodic.hpp"
#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

using namespace delaunay;

namespace {

std::vector<PhaseState> constant_states(double v, double t0, double t1, std::size_t count) {
    std::vector<PhaseState> out;
    for (std::size_t i = 0; i < count; ++i) {
        const double t = t0 + (t1 - t0) * double(i) / double(count - 1);
        out.push_back({t, v, 0.0, 0.0, 0.0});
    }
    return out;
}

std::vector<PhaseState> bubble_states(int n, double t0, double t1, std::size_t count) {
    std::vector<PhaseState> out;
    for (std::size_t i = 0; i < count; ++i) {
        const double t = t0 + (t1 - t0) * double(i) / double(count - 1);
        const BubblePoint b = bubble_state(t, n);
        out.push_back({t, b.v, b.v1, b.v2, b.v3});
    }
    return out;
}

const Certificate& find_cert(const std::vector<Certificate>& certs, const std::string& name) {
    for (const auto& c : certs)
        if (c.name == name) return c;
    REQUIRE_MESSAGE(false, "certificate not found: " << name);
    return certs.front(); // unreachable
}

} // namespace

TEST_CASE("bracket and margins on the constant equilibrium profile") {
    const ModelConstants c = make_constants(5);
    const auto states = constant_states(c.l, 0.0, 3.0, 31);

    CHECK(laplacian_bracket(states[0], c) ==
          doctest::Approx(-1.321714079300705).epsilon(1e-14));
    CHECK(scalar_curvature(states[0], c) ==
          doctest::Approx(0.8385254915624211).epsilon(1e-13));

    const Certificate neg = check_delta_u_negative(states, c);
    CHECK(neg.passed);
    CHECK(neg.worst_margin == doctest::Approx(1.321714079300705).epsilon(1e-13));
    CHECK(neg.tolerance == 1e-12);
    CHECK(neg.worst_location >= 0.0);
    CHECK(neg.worst_location <= 3.0);

    const Certificate pow = check_modica_power_bound(states, c);
    CHECK(pow.passed);
    CHECK(pow.worst_margin == doctest::Approx(0.7306255736737203).epsilon(1e-13));

    const Certificate sharp = check_modica_sharp_bound(states, c);
    CHECK(sharp.passed);
    CHECK(sharp.worst_margin == doctest::Approx(0.1480980143770923).epsilon(1e-12));

    const Certificate curv = check_scalar_curvature_positive(states, c);
    CHECK(curv.passed);
    CHECK(curv.worst_margin == doctest::Approx(0.8385254915624211).epsilon(1e-13));
}

TEST_CASE("certificates on the explicit homoclinic profile") {
    const ModelConstants c = make_constants(5);
    const auto states = bubble_states(5, -8.0, 8.0, 801);

    CHECK(check_delta_u_negative(states, c).passed);

    // Both sides of the power bound vanish like v^(n/(n-4)) in the tails, so
    // the margin decays to zero there but stays strictly positive.
    const Certificate pow = check_modica_power_bound(states, c);
    CHECK(pow.passed);
    CHECK(pow.worst_margin > 0.0);

    // The sharp bound is an exact identity on this profile: the margin is
    // zero everywhere up to rounding, and the slack absorbs the rounding.
    const Certificate sharp = check_modica_sharp_bound(states, c);
    CHECK(sharp.passed);
    CHECK(std::abs(sharp.worst_margin) < 1e-7);

    CHECK(check_scalar_curvature_positive(states, c).passed);

    // A homoclinic profile has a single maximum and no interior minimum, so
    // the extremum certificate (built for periodic data) must refuse it.
    const Trajectory traj = make_trajectory(states, c);
    const Certificate ext = check_extrema_straddle(traj, c, /*periodic=*/false);
    CHECK_FALSE(ext.passed);

    const auto report = certify_trajectory(traj, c, /*periodic=*/false);
    REQUIRE(report.size() == 5);
    CHECK(find_cert(report, "delta_u_negative").passed);
    CHECK(find_cert(report, "modica_power_bound").passed);
    CHECK(find_cert(report, "modica_sharp_bound").passed);
    CHECK(find_cert(report, "scalar_curvature_positive").passed);
    CHECK_FALSE(find_cert(report, "extrema_straddle_equilibrium").passed);
}

TEST_CASE("certificates reject an out-of-scale profile") {
    const ModelConstants c = make_constants(5);
    const auto states = constant_states(2.0 * c.l, 0.0, 3.0, 31);

    CHECK(check_delta_u_negative(states, c).passed);      // bracket still negative
    CHECK_FALSE(check_modica_power_bound(states, c).passed);
    CHECK(check_modica_power_bound(states, c).worst_margin < 0.0);
    CHECK_FALSE(check_modica_sharp_bound(states, c).passed);
    CHECK(check_scalar_curvature_positive(states, c).passed);

    const Trajectory traj = make_trajectory(states, c);
    CHECK_FALSE(check_extrema_straddle(traj, c, true).passed);
}

TEST_CASE("w-function reproduces the certificate margins up to the weight") {
    const ModelConstants c = make_constants(5);
    const double n = c.n;
    const double q = 0.5 * (n - 4);
    const OrbitSolution o = find_periodic(c, 2.7, SeedMode::linear);
    const auto states = orbit_states(o);

    const double beta_pow = std::sqrt((n - 4) / n);
    const double alpha_sharp = 2.0 / (n - 4);
    const double beta_sharp = std::sqrt(n * (n - 4) / (n * n - 4));

    for (std::size_t j = 0; j < states.size(); j += 37) {
        const PhaseState& s = states[j];
        CAPTURE(s.t);
        const double B = laplacian_bracket(s, c);
        const double grad = (s.v1 - q * s.v) * (s.v1 - q * s.v);
        const double weight = std::exp(-0.5 * n * s.t);

        const double margin_pow = -B - beta_pow * std::pow(s.v, n / (n - 4));
        CHECK(w_function(s, {0.0, beta_pow, 0.0}, c) ==
              doctest::Approx(-weight * margin_pow).epsilon(1e-12));

        const double margin_sharp = -B - beta_sharp * std::pow(s.v, n / (n - 4)) -
                                    alpha_sharp * grad / s.v;
        CHECK(w_function(s, {alpha_sharp, beta_sharp, 0.0}, c) ==
              doctest::Approx(-weight * margin_sharp).epsilon(1e-12));
    }

    // A positive smoothing epsilon damps the gradient term, lowering w.
    const PhaseState probe = states[states.size() / 3];
    CHECK(w_function(probe, {alpha_sharp, beta_sharp, 0.5}, c) <
          w_function(probe, {alpha_sharp, beta_sharp, 0.0}, c));

    CHECK_THROWS_AS(w_function(probe, {n / (n - 4), 0.1, 0.0}, c), std::invalid_argument);
    CHECK_THROWS_AS(w_function(probe, {0.1, 0.1, -1.0}, c), std::invalid_argument);
    CHECK_THROWS_AS(w_function({0.0, -0.5, 0, 0, 0}, {0.1, 0.1, 0.0}, c), std::domain_error);
}

TEST_CASE("radial finite-difference oracle confirms the weighted identities") {
    for (int n : {5, 6}) {
        const ModelConstants c = make_constants(n);
        const double q = 0.5 * (n - 4);
        const double T = (n == 5) ? 2.7 : 2.2;
        const OrbitSolution o = find_periodic(c, T, SeedMode::linear);
        const auto states = orbit_states(o);

        // Samples whose radius e^t lies in [0.5, 3]; pick 20 at random.
        std::vector<std::size_t> eligible;
        for (std::size_t j = 0; j < states.size(); ++j) {
            const double r = std::exp(states[j].t);
            if (r >= 0.5 && r <= 3.0) eligible.push_back(j);
        }
        REQUIRE(eligible.size() >= 20);
        std::mt19937 rng(42);
        std::shuffle(eligible.begin(), eligible.end(), rng);

        for (std::size_t k = 0; k < 20; ++k) {
            const PhaseState& s = states[eligible[k]];
            CAPTURE(n);
            CAPTURE(s.t);
            const auto probe = testsupport::radial_probe(s, c);

            const double u_expect = std::exp(-q * s.t) * s.v;
            CHECK(probe.u == doctest::Approx(u_expect).epsilon(1e-10));

            const double lap_expect = std::exp(-0.5 * n * s.t) * laplacian_bracket(s, c);
            CHECK(probe.lap == doctest::Approx(lap_expect).epsilon(1e-6));

            const double grad_expect =
                std::exp(-(n - 2.0) * s.t) * (s.v1 - q * s.v) * (s.v1 - q * s.v);
            CHECK(probe.du * probe.du ==
                  doctest::Approx(grad_expect).epsilon(1e-6).scale(1e-10));

            // Curvature sign and weight: the radial combination equals
            // e^{-(n-2)t} times the t-coordinate expression.
            const double radial = -(probe.u * probe.lap + 2.0 / (n - 4) * probe.du * probe.du);
            const double expected = std::exp(-(n - 2.0) * s.t) * scalar_curvature(s, c);
            CHECK(radial == doctest::Approx(expected).epsilon(1e-5));
            CHECK((radial > 0) == (scalar_curvature(s, c) > 0));
        }
    }
}

TEST_CASE("sign changes about the equilibrium level") {
    const ModelConstants c = make_constants(5);
    const OrbitSolution o = find_periodic(c, 2.7, SeedMode::linear);
    const Trajectory traj = make_trajectory(orbit_states(o), c);

    const SignChangeReport rep = count_sign_changes(traj, c.l);
    CHECK(rep.count == 2);
    REQUIRE(rep.times.size() == 2);
    CHECK(rep.times[0] > 0.0);
    CHECK(rep.times[1] > rep.times[0]);
    CHECK(rep.times[1] < 2 * o.T);
    for (double t : rep.times)
        CHECK(std::abs(dense_state(traj, t).v - c.l) < 1e-8);

    // Refinement invariance: the count is a property of the orbit, not the grid.
    SolverOptions fine;
    fine.grid_points = 2048;
    const OrbitSolution o2 = find_periodic(c, 2.7, SeedMode::linear, fine);
    const Trajectory traj2 = make_trajectory(orbit_states(o2), c);
    CHECK(count_sign_changes(traj2, c.l).count == 2);

    // Levels outside the range never cross; touching the maximum does not count.
    CHECK(count_sign_changes(traj, 10.0).count == 0);
    CHECK(count_sign_changes(traj, o.a).count == 0);

    const Trajectory bubble = make_trajectory(bubble_states(5, -8.0, 8.0, 801), c);
    CHECK(count_sign_changes(bubble, c.l).count == 2);
}

TEST_CASE("extrema classification on periodic and homoclinic data") {
    const ModelConstants c = make_constants(5);
    const OrbitSolution o = find_periodic(c, 2.7, SeedMode::linear);
    const Trajectory traj = make_trajectory(orbit_states(o), c);

    const auto ext = classify_extrema(traj, /*periodic=*/true);
    REQUIRE(ext.size() == 2);
    CHECK(ext[0].kind == Extremum::Kind::maximum);
    CHECK(ext[0].t == 0.0);
    CHECK(ext[0].value == doctest::Approx(o.a).epsilon(1e-12));
    CHECK_FALSE(ext[0].degenerate);
    CHECK(ext[1].kind == Extremum::Kind::minimum);
    CHECK(ext[1].t == doctest::Approx(o.T).epsilon(1e-6));
    CHECK(ext[1].value < c.l);
    CHECK(ext[0].value > c.l);

    const Certificate straddle = check_extrema_straddle(traj, c, true);
    CHECK(straddle.passed);
    CHECK(straddle.worst_margin ==
          doctest::Approx(std::min(ext[0].value - c.l, c.l - ext[1].value)).epsilon(1e-10));

    const Trajectory bubble = make_trajectory(bubble_states(5, -8.0, 8.0, 801), c);
    const auto bext = classify_extrema(bubble, false);
    REQUIRE(bext.size() == 1);
    CHECK(bext[0].kind == Extremum::Kind::maximum);
    CHECK(std::abs(bext[0].t) < 1e-8);
    CHECK(bext[0].value == doctest::Approx(1.2651256603483465).epsilon(1e-9));
}

TEST_CASE("degenerate extrema are reported, not asserted") {
    // v = l + t^4 has a flat minimum at an exact grid node: first and second
    // derivatives both vanish there, so the classifier must flag it as
    // degenerate rather than silently drop or misclassify it.
    const ModelConstants c = make_constants(5);
    std::vector<PhaseState> states;
    for (int k = -100; k <= 100; ++k) {
        const double t = k / 100.0;
        states.push_back({t, c.l + t * t * t * t, 4 * t * t * t, 12 * t * t, 24 * t});
    }
    const Trajectory traj = make_trajectory(states, c);
    const auto ext = classify_extrema(traj, false);
    REQUIRE(ext.size() == 1);
    CHECK(ext[0].t == 0.0);
    CHECK(ext[0].kind == Extremum::Kind::minimum);
    CHECK(ext[0].degenerate);
}

TEST_CASE("no extrema on constant data") {
    const ModelConstants c = make_constants(5);
    const Trajectory traj = make_trajectory(constant_states(c.l, 0.0, 3.0, 31), c);
    CHECK(classify_extrema(traj, true).empty());
    CHECK_FALSE(check_extrema_straddle(traj, c, true).passed);
}

TEST_CASE("energy drift: exact samples, integration quality, degradation") {
    const ModelConstants c = make_constants(5);

    // Orbit grids are written from extended-precision evaluations, so the
    // recorded invariant is constant to rounding.
    const OrbitSolution o6 = find_periodic(c, 6.0, SeedMode::linear);
    const Trajectory exact = make_trajectory(orbit_states(o6), c);
    CHECK(energy_drift(exact) < 1e-10);
    for (std::size_t i = 0; i < exact.energy.size(); i += 64)
        CHECK(exact.energy[i] == doctest::Approx(o6.energy_level).epsilon(1e-9));

    // Re-integrating one period at tight tolerance conserves the invariant;
    // a loose tolerance visibly degrades it.
    const OrbitSolution o = find_periodic(c, 2.6, SeedMode::linear);
    const Trajectory tight =
        integrate({0.0, o.a, 0.0, o.b, 0.0}, 2 * o.T, 1e-10, 1e-14, c);
    CHECK(energy_drift(tight) < 1e-7);
    const Trajectory loose =
        integrate({0.0, o.a, 0.0, o.b, 0.0}, 2 * o.T, 1e-3, 1e-6, c);
    CHECK(energy_drift(loose) > 1e-7);
    CHECK(energy_drift(loose) > 10.0 * energy_drift(tight));

    CHECK_THROWS_AS(energy_drift(Trajectory{}), std::invalid_argument);
}

TEST_CASE("make_trajectory populates derivatives and energies") {
    const ModelConstants c = make_constants(5);
    const auto states = bubble_states(5, -2.0, 2.0, 41);
    const Trajectory traj = make_trajectory(states, c);
    REQUIRE(traj.samples.size() == states.size());
    REQUIRE(traj.deriv.size() == states.size());
    REQUIRE(traj.energy.size() == states.size());
    const auto f = rhs(states[7], c);
    CHECK(traj.deriv[7] == f);
    CHECK(traj.energy[7] == energy(states[7], c));
}
