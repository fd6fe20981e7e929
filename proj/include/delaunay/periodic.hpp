#pragma once

// Nonconstant positive periodic solutions by symmetric two-point shooting.
//
// A periodic profile that is even about its extrema is determined by a
// half-period piece with natural boundary conditions: v'(0) = v'''(0) = 0 at
// the start and v'(T) = v'''(T) = 0 at the end.  The unknowns are a = v(0)
// and b = v''(0); the two endpoint residuals (v'(T), v'''(T)) close the
// square Newton system, and the full period is the even reflection
// v(2T - t) = v(t).  Shooting in two unknowns instead of four removes the
// time-translation degeneracy for free.
//
// The flow's hyperbolicity dictates the numerics here:
//   * the shooting Jacobian carries e^{mu1 T} (~3.5e7 at n=5, T=6), so the
//     Newton basin at large T is microscopic -- cold starts are hopeless and
//     every solve is reached by continuation from the small-amplitude end of
//     the family, where the branch is born at T = pi/omega;
//   * residual evaluation in double precision bottoms out near
//     ulp * e^{mu1 T} (~1e-8 at T=6), so the Newton internals run in long
//     double and the final polish plus closure measurement in __float128.
//
// A discrete mountain-pass search over profiles in the band [0, L] is
// available as an alternative initializer: it relaxes the peak of a three-
// stage path from the zero profile to the constant-L profile and hands the
// argmax profile to the shooting layer as a seed.

#include "delaunay/constants.hpp"
#include "delaunay/dynamics.hpp"

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace delaunay {

// The half-period problem: find (a, b) with shoot(a, b) = (0, 0).
struct ShootingProblem {
    ModelConstants c;
    double T;  // half-period; unknowns a = v(0) in (0, 10 L), b = v''(0)
};

// A converged symmetric orbit over one full period [0, 2T].
// grid_* are uniform samples (grid_points intervals, grid_points+1 entries);
// the second half is the even reflection of the first, so v is even and
// v1, v3 odd about t = T by construction.
struct OrbitSolution {
    ModelConstants c;
    double T = 0, a = 0, b = 0;
    std::vector<double> grid_t, grid_v, grid_v1, grid_v2, grid_v3;
    double residual = 0;      // max |(v'(T), v'''(T))| at convergence
    double closure_gap = 0;   // max state mismatch after integrating [0, 2T]
    double amplitude = 0;     // max v - min v over the period
    double energy_level = 0;  // conserved first integral on the orbit
};

// Discrete path data from the mountain-pass initializer.
struct MountainPassPath {
    std::vector<double> grid_t;             // discretization of [0, T]
    std::vector<std::vector<double>> path;  // profiles from 0-profile to L-profile
    std::vector<double> values;             // J on each profile
    std::size_t argmax_index = 0;
};

struct MountainPassSeed {
    MountainPassPath path;
    std::vector<double> profile;  // the argmax profile after relaxation
    double a = 0, b = 0;          // extracted shooting seed (peak value/curvature)
    double J_value = 0;
};

// Trapezoid quadrature of J(v) = integral of
//   1/2 (v'')^2 - (K2/2) (v')^2 + F(v)
// over [t1, t2] with second-order central differences and mirrored endpoint
// stencils (consistent with the natural condition v' = 0 at the ends).
// Rejects profiles with fewer than 9 points or values outside [0, L].
double functional_J(const std::vector<double>& profile, double t1, double t2,
                    const ModelConstants& c);

// Builds the three-stage path (grow a bump / widen its plateau / lift the
// tail to the constant-L profile), relaxes the profiles around the path's
// J-argmax by preconditioned projected gradient descent, and extracts a
// shooting seed from the relaxed argmax profile.  Requires T >= 2 and
// grid_size >= 65; the returned seed always has J > 0.
MountainPassSeed mountain_pass_initialize(const ModelConstants& c, double T,
                                          std::size_t grid_size);

// One residual evaluation: integrate from (a, 0, b, 0) over [0, T] and
// return (v'(T), v'''(T)).  Integrator aborts (blow-up, cone exit) are
// reported as ok = false -- a failed shot is a diagnostic the Newton damping
// reacts to, not a fatal error.
struct ShotResult {
    bool ok = false;
    double r1 = 0, r2 = 0;
    IntegrationStatus status = IntegrationStatus::ok;
};
ShotResult shoot(double a, double b, const ModelConstants& c, double T, double rtol);

struct SolverOptions {
    double residual_tol = 1e-10;   // Newton target (long-double phase)
    double accept_tol = 1e-9;      // acceptance threshold on the final residual
    int max_iters = 50;
    std::size_t grid_points = 512; // per-period output grid (must be even)
    double grid_rtol = 1e-10;      // fidelity of the output-grid resampling
    bool quad_polish = true;       // final Newton polish + closure in __float128
};

// Failure taxonomy of the orbit solvers.
struct SolverError : std::runtime_error {
    enum class Kind {
        trivial_root,       // converged to the constant solution (amplitude < 1e-4)
        divergence,         // Newton step norm grew 5 consecutive iterations
        positivity,         // converged profile leaves v > 0
        seed_failure,       // residual not evaluable at the seed (shot escapes)
        below_bifurcation,  // requested T at or below pi/omega
        branch_end          // continuation stalled before the target
    } kind;
    SolverError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

// Damped Newton on (a, b) at fixed T from the given seed; forward-difference
// Jacobian with 1e-7 relative steps, backtracking line search that treats
// escaped shots as rejections.  Converged when the residual norm < 1e-9.
// Rejects the constant solution (amplitude < 1e-4), Newton divergence, and
// positivity violations via SolverError.  No continuation fallback: this is
// the bare polish step, and at large T it needs a warm seed.
OrbitSolution solve_symmetric_orbit(const ModelConstants& c, double T, double seed_a,
                                    double seed_b, const SolverOptions& opts = {});

// End-to-end solve at a requested half-period.  linear mode bootstraps the
// small-amplitude end of the branch from the center mode (a = l + eps,
// b = -eps omega^2) and continues in T to the target; mountain_pass mode
// first tries the variational seed directly and falls back to the same
// continuation when the seed sits outside the Newton basin (which it always
// does at large T; see the header notes).
enum class SeedMode { linear, mountain_pass };
OrbitSolution find_periodic(const ModelConstants& c, double T, SeedMode mode,
                            const SolverOptions& opts = {});

// One row of a continuation run.  orbit is populated for converged rows.
struct FamilyMember {
    double T = 0, a = 0, b = 0;
    double amplitude = 0, energy_level = 0, residual = 0;
    bool converged = false;
    std::optional<OrbitSolution> orbit;
};

// Natural-parameter continuation: rows at `steps` evenly spaced half-periods
// from T_start to T_end, each converged (a, b) seeding the next (secant
// prediction, internal sub-stepping on failure).  Per-row failures are
// recorded in the row, not thrown; the branch simply resumes from the last
// good point.  steps = 1 solves T_start alone.
std::vector<FamilyMember> continue_in_T(const ModelConstants& c, double T_start,
                                        double T_end, int steps,
                                        const SolverOptions& opts = {});

// Sampled states of an orbit grid, for the certification layer.
std::vector<PhaseState> orbit_states(const OrbitSolution& orbit);

} // namespace delaunay
