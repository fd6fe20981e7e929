#pragma once

// Numerical certificates for the qualitative facts the solver is meant to
// exhibit: negativity of the radial Laplacian, two pointwise Modica-type
// lower bounds on -Delta u, positivity of the conformal scalar curvature,
// oscillation counting, extremum classification, and energy drift.
//
// All pointwise inequalities are certified in v-coordinates after cancelling
// the common positive factor e^{-n t / 2}: that keeps margins scale-free and
// avoids under/overflow at large |t|.  The raw-radius w-function evaluator
// is the one exception (its regularization shift breaks the homogeneity), so
// it is evaluated directly at r = e^t.

#include "delaunay/constants.hpp"
#include "delaunay/dynamics.hpp"

#include <string>
#include <vector>

namespace delaunay {

// One certified inequality over a grid.  worst_margin is the minimum slack
// of the inequality over the grid (positive = satisfied), worst_location the
// time where the minimum is attained.  passed <=> worst_margin >= -tolerance;
// the inequalities are non-strict at isolated points in principle, so
// exact-zero margins pass.
struct Certificate {
    std::string name;
    bool passed;
    double worst_margin;
    double worst_location;
    double tolerance;
};

// Parameters of the raw-radius comparison function
//   w = Delta u + alpha (u + epsilon)^{-1} |grad u|^2 + beta u^(n/(n-4)).
// Requires alpha < n/(n-4) and epsilon >= 0.
struct WParams {
    double alpha;
    double beta;
    double epsilon;
};

// B(t) = v'' + 2 v' - (n(n-4)/4) v.  The radial Laplacian of
// u(r) = r^(-(n-4)/2) v(log r) is Delta u = r^(-n/2) B(log r), so the sign
// of Delta u equals the sign of B.
double laplacian_bracket(const PhaseState& s, const ModelConstants& c);

// Sign-determining quantity for the scalar curvature of the conformal
// metric u^(4/(n-4)) * (euclidean): expanding
// Delta(u^m) = m u^(m-1) Delta u + m(m-1) u^(m-2) |grad u|^2 with
// m = (n-2)/(n-4) and stripping positive factors leaves
//   I(t) = -[ v B + (2/(n-4)) (v' - ((n-4)/2) v)^2 ],
// and I > 0 <=> R_g > 0.  Throws std::domain_error for v <= 0.
double scalar_curvature(const PhaseState& s, const ModelConstants& c);

// The comparison function w evaluated at radius r = e^t from v-coordinate
// data (raw, no common-factor cancellation).  Throws std::invalid_argument
// on parameter violations and std::domain_error for v < 0.
double w_function(const PhaseState& s, const WParams& params, const ModelConstants& c);

// Grid certificates.  Each takes the sampled states of an orbit period or a
// trajectory; margins are reported in the cancelled v-coordinate scale.
//   delta_u_negative:            -B(t) >= 0
//   modica_power_bound:          -B - sqrt((n-4)/n) v^(n/(n-4)) >= 0
//   modica_sharp_bound:          -B - sqrt(n(n-4)/(n^2-4)) v^(n/(n-4))
//                                   - (2/(n-4)) (v'-qv)^2 / v >= 0
//   scalar_curvature_positive:   I(t) >= 0
Certificate check_delta_u_negative(const std::vector<PhaseState>& states,
                                   const ModelConstants& c);
Certificate check_modica_power_bound(const std::vector<PhaseState>& states,
                                     const ModelConstants& c);
Certificate check_modica_sharp_bound(const std::vector<PhaseState>& states,
                                     const ModelConstants& c);
Certificate check_scalar_curvature_positive(const std::vector<PhaseState>& states,
                                            const ModelConstants& c);

// Extremum certificate on periodic data: every interior maximum lies above
// the equilibrium value l and every interior minimum below it.  The margin
// is the smallest gap |extremum - l| across the detected extrema, signed
// negative when one falls on the wrong side.
Certificate check_extrema_straddle(const Trajectory& traj, const ModelConstants& c,
                                   bool periodic);

// All five certificates for one orbit grid (the trajectory form carries the
// dense-output data the extremum search needs).
std::vector<Certificate> certify_trajectory(const Trajectory& traj,
                                            const ModelConstants& c, bool periodic);

// Rebuilds a Trajectory (with right-hand sides and energies) from bare
// sampled states, e.g. after parsing an orbit artifact from disk.
Trajectory make_trajectory(const std::vector<PhaseState>& states,
                           const ModelConstants& c);

// Strict sign changes of v - level along a trajectory.  Each bracketing
// interval is refined by bisection on the dense output to 1e-10 in t.
struct SignChangeReport {
    int count = 0;
    std::vector<double> times;
};
SignChangeReport count_sign_changes(const Trajectory& traj, double level);

// Interior extrema of v located by bracketing v' and bisecting the dense
// output, classified by the sign of v''.  |v''| < 1e-10 at the zero is
// flagged degenerate (inconclusive) rather than failed.  With periodic =
// true the sample sequence is treated as one closed period (first and last
// sample at the same phase) and the wrap-around bracket is included.
struct Extremum {
    double t;
    double value;
    enum class Kind { maximum, minimum } kind;
    bool degenerate;
};
std::vector<Extremum> classify_extrema(const Trajectory& traj, bool periodic = false);

// Max |E(t) - E(t0)| over the trajectory samples.
double energy_drift(const Trajectory& traj);

} // namespace delaunay
