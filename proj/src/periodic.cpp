#include "delaunay/periodic.hpp"

#include "delaunay/realmath.hpp"
#include "delaunay/spectra.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

namespace delaunay {

namespace {

using detail::r_abs;
using detail::r_exp;
using detail::r_isfinite;
using detail::r_pow;

#if defined(__SIZEOF_FLOAT128__)
using quad = __float128;
constexpr bool kHaveQuad = true;
#else
using quad = long double;
constexpr bool kHaveQuad = false;
#endif

// ---------------------------------------------------------------------------
// Taylor-series shooting kernel.
//
// Shooting needs only the terminal state, evaluated as accurately as the
// scalar type allows, and it needs that thousands of times per continuation
// run.  A high-order Taylor stepper fits perfectly: the ODE is smooth, the
// series coefficients follow from two cheap recurrences, the order can match
// any tolerance, and there are no tableau constants to transcribe.  At
// __float128 precision it is orders of magnitude faster than a fixed-order
// Runge-Kutta pair driven to rtol ~ 1e-22.
//
// Coefficient recurrences for v(t0 + s) = sum a_k s^k:
//   * powers: w = v^p satisfies v w' = p w v', giving
//       w_k = (1 / (k a_0)) * sum_{j=1..k} ((p+1) j - k) a_j w_{k-j};
//   * the equation itself:
//       a_{k+4} = (w_k - K2 (k+1)(k+2) a_{k+2} - K0 a_k)
//                 / ((k+1)(k+2)(k+3)(k+4)).
// The step is chosen so the truncated tail is below the requested local
// tolerance (with a safety factor for the v''' component, whose coefficients
// carry an extra k^3).
// ---------------------------------------------------------------------------

constexpr int kTaylorMaxOrder = 44;

template <typename Real>
struct TaylorShot {
    basic_state<Real> state{};
    bool ok = false;
    IntegrationStatus status = IntegrationStatus::ok;
};

template <typename Real>
void taylor_eval(const std::array<Real, kTaylorMaxOrder + 1>& a, int K, Real s,
                 basic_state<Real>& out) {
    Real v(0), v1(0), v2(0), v3(0);
    for (int k = K; k >= 0; --k) {
        v = v * s + a[k];
        if (k >= 1) v1 = v1 * s + Real(k) * a[k];
        if (k >= 2) v2 = v2 * s + Real(k * (k - 1)) * a[k];
        if (k >= 3) v3 = v3 * s + Real(k * (k - 1) * (k - 2)) * a[k];
    }
    out.v = v;
    out.v1 = v1;
    out.v2 = v2;
    out.v3 = v3;
}

// Integrates forward from s.t to t_end and reports the terminal state; when
// eval_times (sorted ascending, within the span) is given, the states at
// those times are appended to eval_out from the in-step Taylor polynomial.
// Escapes (cone exit, growth guard, step collapse) are reported in `status`
// -- they are diagnostics the Newton layers react to, not errors.
template <typename Real>
TaylorShot<Real> taylor_shot(const basic_state<Real>& start, Real t_end, Real tol,
                             const basic_constants<Real>& c,
                             const std::vector<Real>* eval_times = nullptr,
                             std::vector<basic_state<Real>>* eval_out = nullptr) {
    TaylorShot<Real> out;
    out.state = start;
    if (!(t_end > start.t))
        throw std::invalid_argument("taylor_shot: requires t_end > start.t");

    const double tol_d = static_cast<double>(tol);
    int K = 4 + static_cast<int>(std::ceil(-0.5 * std::log(tol_d)));
    K = std::min(kTaylorMaxOrder, std::max(16, K));
    // Extra headroom for the third-derivative component of the tail.
    const double tol_eff = tol_d / (static_cast<double>(K) * K * K);

    const Real vfloor = Real(1e-7) * c.l;  // grazing the cone boundary = escape
    std::array<Real, kTaylorMaxOrder + 1> a{}, w{};
    std::array<Real, kTaylorMaxOrder + 1> pj{};  // (p+1) * j, hoisted
    for (int j = 0; j <= K; ++j) pj[j] = (c.p + Real(1)) * Real(j);

    Real t = start.t;
    Real v = start.v, v1 = start.v1, v2 = start.v2, v3 = start.v3;
    std::size_t next_eval = 0;
    if (eval_times && eval_out) {
        while (next_eval < eval_times->size() && (*eval_times)[next_eval] <= t) {
            basic_state<Real> st{(*eval_times)[next_eval], v, v1, v2, v3};
            eval_out->push_back(st);
            ++next_eval;
        }
    }

    for (int step = 0; step < 100000; ++step) {
        if (v < vfloor) {
            out.status = IntegrationStatus::negative_v;
            out.state = {t, v, v1, v2, v3};
            return out;
        }
        if (!r_isfinite(v) || r_abs(v) > Real(10) * c.L * r_exp(r_abs(t))) {
            out.status = IntegrationStatus::blow_up;
            out.state = {t, v, v1, v2, v3};
            return out;
        }
        if (!(t < t_end)) break;

        a[0] = v;
        a[1] = v1;
        a[2] = v2 / Real(2);
        a[3] = v3 / Real(6);
        w[0] = r_pow(a[0], c.p);
        for (int k = 0; k + 4 <= K; ++k) {
            if (k >= 1) {
                Real s(0);
                for (int j = 1; j <= k; ++j) s += (pj[j] - Real(k)) * a[j] * w[k - j];
                w[k] = s / (Real(k) * a[0]);
            }
            a[k + 4] = (w[k] - c.K2 * Real((k + 1) * (k + 2)) * a[k + 2] - c.K0 * a[k]) /
                       Real((k + 1) * (k + 2) * (k + 3) * (k + 4));
        }

        // Step from the decay of the top coefficients: largest h with
        // |a_j| h^j below the (deriv-weighted) tolerance.
        double h = 1.0;
        for (int j = K - 3; j <= K; ++j) {
            const double aj = std::fabs(static_cast<double>(a[j]));
            if (aj > 0.0 && std::isfinite(aj))
                h = std::min(h, std::pow(tol_eff / aj, 1.0 / j));
            else if (!std::isfinite(aj))
                h = 0.0;
        }
        if (h < 1e-12) {
            out.status = IntegrationStatus::step_underflow;
            out.state = {t, v, v1, v2, v3};
            return out;
        }
        Real hr = Real(h);
        bool last = false;
        if (t + hr >= t_end) {
            hr = t_end - t;
            last = true;
        }

        if (eval_times && eval_out) {
            const Real t_next = last ? t_end : t + hr;
            while (next_eval < eval_times->size() && (*eval_times)[next_eval] <= t_next) {
                basic_state<Real> st;
                st.t = (*eval_times)[next_eval];
                taylor_eval(a, K, st.t - t, st);
                eval_out->push_back(st);
                ++next_eval;
            }
        }

        basic_state<Real> nxt;
        taylor_eval(a, K, hr, nxt);
        t = last ? t_end : t + hr;
        v = nxt.v;
        v1 = nxt.v1;
        v2 = nxt.v2;
        v3 = nxt.v3;
    }

    out.state = {t, v, v1, v2, v3};
    if (t < t_end) {
        out.status = IntegrationStatus::step_underflow;
        return out;
    }
    out.ok = true;
    return out;
}

// Per-step local tolerances for the two shooting tiers.  They are chosen so
// that truncation stays below each type's roundoff floor once amplified by
// the flow (e^{mu1 T} per half-period).
template <typename Real>
constexpr Real taylor_tol() {
    return Real(1e-17);
}
#if defined(__SIZEOF_FLOAT128__)
template <>
constexpr quad taylor_tol<quad>() {
    return quad(3e-24);
}
#endif

// ---------------------------------------------------------------------------
// Damped 2x2 Newton with escape-aware finite differences.
// ---------------------------------------------------------------------------

enum class NewtonFlag { converged, stalled, diverged, seed_escape };

template <typename Real>
struct Newton2Out {
    Real x1 = 0, x2 = 0;
    Real rnorm = std::numeric_limits<Real>::has_infinity
                     ? std::numeric_limits<Real>::infinity()
                     : Real(1e300);
    int iters = 0;
    NewtonFlag flag = NewtonFlag::stalled;
};

// residual: (x1, x2) -> optional<{r1, r2}>, nullopt meaning the shot escaped.
// Escaped trial points are treated as line-search rejections; escaped
// Jacobian probes shrink the difference step and retry.  Residual norms are
// monotone by construction, so the current iterate is always the best one.
template <typename Real, typename Fn>
Newton2Out<Real> newton2(Fn&& residual, Real x1, Real x2, Real tol, int max_iters,
                         Real fd_scale) {
    Newton2Out<Real> out;
    auto nrm = [](const std::array<Real, 2>& r) {
        const Real a0 = r_abs(r[0]), a1 = r_abs(r[1]);
        return a0 > a1 ? a0 : a1;
    };

    auto R = residual(x1, x2);
    if (!R) {
        out.flag = NewtonFlag::seed_escape;
        return out;
    }
    Real rn = nrm(*R);
    out.x1 = x1;
    out.x2 = x2;
    out.rnorm = rn;

    Real prev_step(0);
    int grow = 0;
    for (int it = 0; it < max_iters; ++it) {
        if (rn < tol) {
            out.flag = NewtonFlag::converged;
            return out;
        }

        Real J[2][2];
        bool jac_ok = true;
        for (int col = 0; col < 2 && jac_ok; ++col) {
            const Real base = col == 0 ? x1 : x2;
            Real d = fd_scale * (r_abs(base) + Real(0.01));
            std::optional<std::array<Real, 2>> probe;
            for (int attempt = 0; attempt < 4; ++attempt) {
                probe = col == 0 ? residual(x1 + d, x2) : residual(x1, x2 + d);
                if (probe) break;
                d /= Real(8);
            }
            if (!probe) {
                jac_ok = false;
                break;
            }
            J[0][col] = ((*probe)[0] - (*R)[0]) / d;
            J[1][col] = ((*probe)[1] - (*R)[1]) / d;
        }
        if (!jac_ok) break;

        const Real det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
        if (!(r_abs(det) > Real(0)) || !r_isfinite(det)) break;
        const Real dx1 = -(J[1][1] * (*R)[0] - J[0][1] * (*R)[1]) / det;
        const Real dx2 = -(J[0][0] * (*R)[1] - J[1][0] * (*R)[0]) / det;

        Real alpha(1);
        bool accepted = false;
        for (int ls = 0; ls < 13; ++ls) {
            auto Rt = residual(x1 + alpha * dx1, x2 + alpha * dx2);
            if (Rt && nrm(*Rt) < rn) {
                x1 += alpha * dx1;
                x2 += alpha * dx2;
                R = Rt;
                rn = nrm(*R);
                const Real sn = r_abs(alpha * dx1) + r_abs(alpha * dx2);
                if (it > 0 && sn > prev_step) {
                    if (++grow >= 5) {
                        out.x1 = x1;
                        out.x2 = x2;
                        out.rnorm = rn;
                        out.iters = it + 1;
                        out.flag = NewtonFlag::diverged;
                        return out;
                    }
                } else {
                    grow = 0;
                }
                prev_step = sn;
                accepted = true;
                break;
            }
            alpha /= Real(2);
        }
        if (!accepted) break;

        out.x1 = x1;
        out.x2 = x2;
        out.rnorm = rn;
        out.iters = it + 1;
    }
    out.flag = rn < tol ? NewtonFlag::converged : NewtonFlag::stalled;
    return out;
}

// ---------------------------------------------------------------------------
// Branch walking: small-amplitude bootstrap and continuation in T.
// ---------------------------------------------------------------------------

double mu1_of(const ModelConstants& c) {
    return linearize_at_P(c).eigenvalues[0].real();
}

// Residual floor of a long-double shot over [0, T]: per-step roundoff
// amplified by the unstable mode, with a safety factor.
long double ld_newton_tol(double T, double floor_tol, double mu1) {
    const long double noise = 50.0L * std::numeric_limits<long double>::epsilon() *
                              std::exp(static_cast<long double>(mu1 * T));
    const long double f = static_cast<long double>(floor_tol);
    return noise > f ? noise : f;
}

struct BranchPoint {
    double T, a, b;
};

class BranchWalker {
  public:
    BranchWalker(const ModelConstants& c, const SolverOptions& opts)
        : c_(c), cl_(make_constants_as<long double>(c.n)), opts_(opts),
          mu1_(mu1_of(c)), omega_(center_frequency(c)),
          Tstar_(std::numbers::pi_v<double> / center_frequency(c)) {}

    double Tstar() const { return Tstar_; }
    const BranchPoint& current() const { return *cur_; }

    // Moves the branch state to T_target by adaptive continuation,
    // bootstrapping the small-amplitude end first if necessary.
    void advance_to(double T_target) {
        if (T_target <= Tstar_ + 1e-5)
            throw SolverError(SolverError::Kind::below_bifurcation,
                              "requested half-period " + std::to_string(T_target) +
                                  " is at or below the branch onset pi/omega = " +
                                  std::to_string(Tstar_));
        if (T_target < Tstar_ + kOnsetWindow) {
            land_near_onset(T_target);
            return;
        }
        if (cur_ && cur_->T < Tstar_ + kOnsetWindow) {
            // Points inside the onset region make poor fixed-T launch pads
            // (the branch curvature in T blows up as T -> T*), so restart
            // from the standard launch window instead of hopping from them.
            cur_.reset();
            prev_.reset();
        }
        ensure_started(T_target);
        double dT = 0.04;
        while (cur_->T != T_target) {
            const double remaining = T_target - cur_->T;
            const double dir = remaining > 0 ? 1.0 : -1.0;
            double step = std::min(dT, std::abs(remaining));
            double T_try = std::abs(remaining) <= dT ? T_target : cur_->T + dir * step;
            if (T_try <= Tstar_ + 1e-5)
                throw SolverError(SolverError::Kind::below_bifurcation,
                                  "continuation would cross the branch onset at T = " +
                                      std::to_string(Tstar_));
            if (try_step(T_try)) {
                dT = std::min(dT * 1.4, 0.12);
            } else {
                // Keep the retry strictly shorter than the remaining hop, or a
                // failed final hop would be retried unchanged until dT runs out.
                dT = std::min(dT * 0.5, 0.5 * std::abs(remaining));
                if (dT < 1e-4)
                    throw SolverError(SolverError::Kind::branch_end,
                                      "continuation stalled at T = " +
                                          std::to_string(cur_->T) +
                                          " before reaching T = " +
                                          std::to_string(T_target));
            }
        }
    }

  private:
    // Fixed-T Newton on (a, b) from the given seed.  Returns the converged
    // point, or nullopt for any failure (including capture by the constant
    // solution, which near the onset is the dominant failure mode).
    std::optional<BranchPoint> newton_ab(double T, double a0, double b0) {
        const long double Tl = static_cast<long double>(T);
        auto res = [&](long double a, long double b)
            -> std::optional<std::array<long double, 2>> {
            if (!(a > 0)) return std::nullopt;
            auto shot = taylor_shot<long double>({0.0L, a, 0.0L, b, 0.0L}, Tl,
                                                 taylor_tol<long double>(), cl_);
            if (!shot.ok) return std::nullopt;
            return std::array<long double, 2>{shot.state.v1, shot.state.v3};
        };
        const long double tol = ld_newton_tol(T, opts_.residual_tol, mu1_);
        auto r = newton2<long double>(res, static_cast<long double>(a0),
                                      static_cast<long double>(b0), tol,
                                      opts_.max_iters, 1e-7L);
        if (r.flag != NewtonFlag::converged) return std::nullopt;
        BranchPoint p{T, static_cast<double>(r.x1), static_cast<double>(r.x2)};
        if (std::abs(p.a - c_.l) < 1e-5 * c_.l && std::abs(p.b) < 1e-5)
            return std::nullopt;  // trivial-root capture
        return p;
    }

    bool try_step(double T_try) {
        double a0 = cur_->a, b0 = cur_->b;
        if (prev_ && prev_->T != cur_->T) {
            const double f = (T_try - cur_->T) / (cur_->T - prev_->T);
            a0 += f * (cur_->a - prev_->a);
            b0 += f * (cur_->b - prev_->b);
        }
        auto nxt = newton_ab(T_try, a0, b0);
        if (!nxt) return false;
        prev_ = cur_;
        cur_ = nxt;
        return true;
    }

    // Solves the small-amplitude problem at fixed a = l + eps with unknowns
    // (b, T): the branch is born at T = pi/omega from the center mode
    // v = l + eps cos(omega t), whose exact initial curvature is
    // b = -eps omega^2.  That linearization seeds the first Newton solve.
    std::optional<std::pair<double, double>> bootstrap(double eps, double seed_b,
                                                       double seed_T) {
        const long double a = static_cast<long double>(c_.l + eps);
        auto res = [&](long double b, long double T)
            -> std::optional<std::array<long double, 2>> {
            if (!(T > 0.6L * Tstar_) || !(T < 6.0L * Tstar_)) return std::nullopt;
            auto shot = taylor_shot<long double>({0.0L, a, 0.0L, b, 0.0L}, T,
                                                 taylor_tol<long double>(), cl_);
            if (!shot.ok) return std::nullopt;
            return std::array<long double, 2>{shot.state.v1, shot.state.v3};
        };
        auto r = newton2<long double>(res, static_cast<long double>(seed_b),
                                      static_cast<long double>(seed_T), 1e-13L,
                                      opts_.max_iters, 1e-7L);
        if (r.flag != NewtonFlag::converged) return std::nullopt;
        const double b = static_cast<double>(r.x1);
        const double T = static_cast<double>(r.x2);
        if (!(b < 0) || T <= Tstar_ * 0.9 || T >= Tstar_ * 5.0) return std::nullopt;
        return std::make_pair(b, T);
    }

    // First solved branch point near the onset, shrinking the trial
    // amplitude toward the linear regime until Newton converges.
    BranchPoint first_branch_point() {
        double eps = 0.02 * c_.l;
        for (int tries = 0; tries < 10; ++tries) {
            if (auto sol = bootstrap(eps, -eps * omega_ * omega_, Tstar_ * 1.001))
                return BranchPoint{sol->second, c_.l + eps, sol->first};
            eps *= 0.6;
            if (eps < 1e-4 * c_.l) break;
        }
        throw SolverError(SolverError::Kind::branch_end,
                          "small-amplitude bootstrap failed near the onset");
    }

    // Lands exactly on a target half-period close to the onset.  There the
    // branch leaves (a, T) = (l, pi/omega) tangent to the amplitude axis
    // (T - T* grows like the amplitude squared), so T is a degenerate
    // continuation parameter: the fixed-T Jacobian's branch-direction
    // singular value vanishes and Newton crawls into a finite-difference
    // noise plateau instead of converging.  The fixed-amplitude problem has
    // no such degeneracy, so this routine iterates a secant update on the
    // amplitude offset eps until the orbit solved at a = l + eps has its
    // half-period close enough to T_target that the fixed-T residual there
    // is already below the Newton tolerance.
    void land_near_onset(double T_target) {
        if (cur_ && cur_->T == T_target) return;
        const long double Tl = static_cast<long double>(T_target);
        const long double tol = ld_newton_tol(T_target, opts_.residual_tol, mu1_);
        auto resid_at_target = [&](double a, double b) -> long double {
            auto shot = taylor_shot<long double>(
                {0.0L, static_cast<long double>(a), 0.0L,
                 static_cast<long double>(b), 0.0L},
                Tl, taylor_tol<long double>(), cl_);
            if (!shot.ok) return std::numeric_limits<long double>::infinity();
            const long double r1 = r_abs(shot.state.v1), r2 = r_abs(shot.state.v3);
            return r1 > r2 ? r1 : r2;
        };

        BranchPoint at = (cur_ && cur_->a > c_.l) ? *cur_ : first_branch_point();
        double eps = at.a - c_.l;
        double eps_prev = 0.0, g_prev = 0.0;
        double lo = 0.0, hi = 0.0;  // amplitude bracket around the target period
        for (int it = 0; it < 60; ++it) {
            if (resid_at_target(at.a, at.b) < tol) {
                prev_ = cur_;
                cur_ = BranchPoint{T_target, at.a, at.b};
                return;
            }
            const double g = at.T - T_target;
            (g < 0 ? lo : hi) = eps;
            double eps_next;
            if (eps_prev > 0.0 && g != g_prev)
                eps_next = eps - g * (eps - eps_prev) / (g - g_prev);
            else
                eps_next = eps * std::sqrt((T_target - Tstar_) / (at.T - Tstar_));
            if (lo > 0.0 && hi > 0.0 && !(eps_next > lo && eps_next < hi))
                eps_next = std::sqrt(lo * hi);
            if (!(eps_next > 0.0) || !std::isfinite(eps_next)) eps_next = 0.5 * eps;

            const double ratio = eps_next / eps;
            auto sol = bootstrap(eps_next, at.b * ratio,
                                 Tstar_ + (at.T - Tstar_) * ratio * ratio);
            if (!sol) {
                // Retry halfway back toward the last solved amplitude.
                eps_next = 0.5 * (eps + eps_next);
                const double r2 = eps_next / eps;
                sol = bootstrap(eps_next, at.b * r2,
                                Tstar_ + (at.T - Tstar_) * r2 * r2);
                if (!sol)
                    throw SolverError(SolverError::Kind::branch_end,
                                      "amplitude landing failed near the onset at "
                                      "eps = " +
                                          std::to_string(eps_next));
            }
            eps_prev = eps;
            g_prev = g;
            prev_ = at;
            eps = eps_next;
            at = BranchPoint{sol->second, c_.l + eps, sol->first};
        }
        throw SolverError(SolverError::Kind::branch_end,
                          "amplitude landing did not reach T = " +
                              std::to_string(T_target));
    }

    // Walks the amplitude parameter up from near the onset until the orbit's
    // half-period enters (pi/omega, T_target]; overshoots bisect back down.
    void ensure_started(double T_target) {
        if (cur_) return;
        const double launch_lo = std::min(Tstar_ + 0.02, 0.5 * (Tstar_ + T_target));

        const BranchPoint start = first_branch_point();
        double eps = start.a - c_.l;
        auto sol = std::make_optional(std::make_pair(start.b, start.T));

        // launch_lo <= T_target always, so a point with T(eps) in
        // [launch_lo, T_target] exists and the walk/bisection below finds it
        // (T is continuous and increasing in the amplitude).
        double lo_eps = 0.0, hi_eps = 0.0;
        for (int it = 0; it < 80; ++it) {
            const double T_eps = sol->second;
            if (T_eps >= launch_lo && T_eps <= T_target) {
                cur_ = BranchPoint{T_eps, c_.l + eps, sol->first};
                prev_.reset();
                return;
            }
            double eps_next;
            if (T_eps > T_target) {
                hi_eps = eps;
                eps_next = lo_eps > 0.0 ? std::sqrt(lo_eps * eps) : eps * 0.5;
            } else {
                lo_eps = eps;
                eps_next = hi_eps > 0.0 ? std::sqrt(hi_eps * eps) : eps * 1.8;
            }
            const double ratio = eps_next / eps;
            const double seed_b = sol->first * ratio;
            const double seed_T = Tstar_ + (sol->second - Tstar_) * ratio * ratio;
            eps = eps_next;
            sol = bootstrap(eps, seed_b, seed_T);
            if (!sol)
                throw SolverError(SolverError::Kind::branch_end,
                                  "amplitude walk failed at eps = " + std::to_string(eps));
        }
        throw SolverError(SolverError::Kind::branch_end,
                          "amplitude walk did not reach a launch point");
    }

    // Width (in T) of the onset region where targets are reached through the
    // amplitude parametrization instead of fixed-T continuation.
    static constexpr double kOnsetWindow = 0.05;

    ModelConstants c_;
    basic_constants<long double> cl_;
    SolverOptions opts_;
    double mu1_, omega_, Tstar_;
    std::optional<BranchPoint> cur_, prev_;
};

void validate_options(const SolverOptions& opts) {
    if (!(opts.residual_tol > 0) || !(opts.accept_tol > 0) || !(opts.grid_rtol > 0))
        throw std::invalid_argument("solver options: tolerances must be positive");
    if (opts.max_iters < 1)
        throw std::invalid_argument("solver options: max_iters must be >= 1");
    if (opts.grid_points < 8 || opts.grid_points % 2 != 0)
        throw std::invalid_argument("solver options: grid_points must be even and >= 8");
}

} // namespace

// ---------------------------------------------------------------------------
// Public shooting interface.
// ---------------------------------------------------------------------------

ShotResult shoot(double a, double b, const ModelConstants& c, double T, double rtol) {
    if (!(T > 0)) throw std::invalid_argument("shoot: requires T > 0");
    if (!(rtol > 0)) throw std::invalid_argument("shoot: requires rtol > 0");
    ShotResult out;
    auto run = integrate_core<double>({0.0, a, 0.0, b, 0.0}, T, rtol, rtol * 1e-4,
                                      make_constants_as<double>(c.n));
    out.status = run.status;
    out.ok = run.status == IntegrationStatus::ok;
    if (out.ok) {
        const auto& fin = run.traj.samples.back();
        out.r1 = fin.v1;
        out.r2 = fin.v3;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Orbit solve and assembly.
// ---------------------------------------------------------------------------

OrbitSolution solve_symmetric_orbit(const ModelConstants& c, double T, double seed_a,
                                    double seed_b, const SolverOptions& opts) {
    if (!(T > 0)) throw std::invalid_argument("solve_symmetric_orbit: requires T > 0");
    validate_options(opts);

    const double mu1 = mu1_of(c);
    const auto cl = make_constants_as<long double>(c.n);

    // Long-double Newton from the seed.
    const long double Tl = static_cast<long double>(T);
    auto res_ld = [&](long double a, long double b)
        -> std::optional<std::array<long double, 2>> {
        if (!(a > 0)) return std::nullopt;
        auto shot = taylor_shot<long double>({0.0L, a, 0.0L, b, 0.0L}, Tl,
                                             taylor_tol<long double>(), cl);
        if (!shot.ok) return std::nullopt;
        return std::array<long double, 2>{shot.state.v1, shot.state.v3};
    };
    const long double tol_ld = ld_newton_tol(T, opts.residual_tol, mu1);
    auto r_ld = newton2<long double>(res_ld, static_cast<long double>(seed_a),
                                     static_cast<long double>(seed_b), tol_ld,
                                     opts.max_iters, 1e-7L);
    if (r_ld.flag == NewtonFlag::seed_escape)
        throw SolverError(SolverError::Kind::seed_failure,
                          "residual not evaluable at the seed (a = " +
                              std::to_string(seed_a) + ", b = " + std::to_string(seed_b) +
                              "): the shot escapes before t = " + std::to_string(T));
    if (r_ld.flag != NewtonFlag::converged &&
        !(static_cast<double>(r_ld.rnorm) <= opts.accept_tol))
        throw SolverError(SolverError::Kind::divergence,
                          std::string("Newton did not converge (") +
                              (r_ld.flag == NewtonFlag::diverged
                                   ? "step norms grew 5 consecutive iterations"
                                   : "stalled") +
                              "); best residual " +
                              std::to_string(static_cast<double>(r_ld.rnorm)));

    // __float128 polish + closure measurement.  Long double alone bottoms
    // out near 1e-10 in the residual at T = 6, which after amplification
    // over a full period is far too coarse for a 1e-6-level closure gap.
    quad aq = static_cast<quad>(r_ld.x1);
    quad bq = static_cast<quad>(r_ld.x2);
    double residual = static_cast<double>(r_ld.rnorm);
    double closure = 0.0;

    const auto cq = make_constants_as<quad>(c.n);
    const quad Tq = static_cast<quad>(T);
    if (opts.quad_polish && kHaveQuad) {
        auto res_q = [&](quad a, quad b) -> std::optional<std::array<quad, 2>> {
            if (!(a > quad(0))) return std::nullopt;
            auto shot = taylor_shot<quad>({quad(0), a, quad(0), b, quad(0)}, Tq,
                                          taylor_tol<quad>(), cq);
            if (!shot.ok) return std::nullopt;
            return std::array<quad, 2>{shot.state.v1, shot.state.v3};
        };
        auto r_q = newton2<quad>(res_q, aq, bq, quad(1e-15), 6, quad(1e-12));
        if (r_q.flag == NewtonFlag::converged ||
            static_cast<double>(r_q.rnorm) < residual) {
            aq = r_q.x1;
            bq = r_q.x2;
            residual = static_cast<double>(r_q.rnorm);
        }
    }
    if (residual > opts.accept_tol)
        throw SolverError(SolverError::Kind::divergence,
                          "final residual " + std::to_string(residual) +
                              " exceeds the acceptance threshold");

    // Closure: integrate the full period [0, 2T] at the polished point and
    // compare the terminal state to the initial one, component-wise.
    {
        auto closed = taylor_shot<quad>({quad(0), aq, quad(0), bq, quad(0)},
                                        quad(2) * Tq, taylor_tol<quad>(), cq);
        if (!closed.ok)
            throw SolverError(SolverError::Kind::divergence,
                              std::string("full-period integration escaped (") +
                                  to_string(closed.status) + "): not a periodic orbit");
        const quad g0 = r_abs(closed.state.v - aq);
        const quad g1 = r_abs(closed.state.v1 - quad(0));
        const quad g2 = r_abs(closed.state.v2 - bq);
        const quad g3 = r_abs(closed.state.v3 - quad(0));
        quad g = g0;
        if (g1 > g) g = g1;
        if (g2 > g) g = g2;
        if (g3 > g) g = g3;
        closure = static_cast<double>(g);
    }

    // Output grid over [0, 2T]: dense Taylor evaluation on [0, T], then the
    // even reflection about t = T (v, v'' even; v', v''' odd).
    OrbitSolution orb;
    orb.c = c;
    orb.T = T;
    orb.a = static_cast<double>(aq);
    orb.b = static_cast<double>(bq);
    orb.residual = residual;
    orb.closure_gap = closure;

    const std::size_t gp = opts.grid_points;
    const std::size_t half = gp / 2;
    {
        std::vector<quad> times(half + 1);
        for (std::size_t j = 0; j <= half; ++j)
            times[j] = Tq * quad(static_cast<double>(j)) / quad(static_cast<double>(half));
        times[half] = Tq;
        std::vector<basic_state<quad>> states;
        states.reserve(half + 1);
        auto run = taylor_shot<quad>({quad(0), aq, quad(0), bq, quad(0)}, Tq,
                                     taylor_tol<quad>(), cq, &times, &states);
        if (!run.ok || states.size() != half + 1)
            throw SolverError(SolverError::Kind::divergence,
                              "orbit resampling escaped mid-period");
        orb.grid_t.resize(gp + 1);
        orb.grid_v.resize(gp + 1);
        orb.grid_v1.resize(gp + 1);
        orb.grid_v2.resize(gp + 1);
        orb.grid_v3.resize(gp + 1);
        const double h = 2.0 * T / static_cast<double>(gp);
        for (std::size_t j = 0; j <= half; ++j) {
            orb.grid_t[j] = static_cast<double>(j) * h;
            orb.grid_v[j] = static_cast<double>(states[j].v);
            orb.grid_v1[j] = static_cast<double>(states[j].v1);
            orb.grid_v2[j] = static_cast<double>(states[j].v2);
            orb.grid_v3[j] = static_cast<double>(states[j].v3);
        }
        orb.grid_t[0] = 0.0;
        orb.grid_v1[0] = 0.0;
        orb.grid_v3[0] = 0.0;
        // The Newton solve drives v'(T) and v'''(T) to zero far below double
        // resolution; write the exact zeros so the reflection is exact.
        orb.grid_v1[half] = 0.0;
        orb.grid_v3[half] = 0.0;
        for (std::size_t j = half + 1; j <= gp; ++j) {
            const std::size_t i = gp - j;  // mirror index in [0, half)
            orb.grid_t[j] = static_cast<double>(j) * h;
            orb.grid_v[j] = orb.grid_v[i];
            orb.grid_v1[j] = -orb.grid_v1[i];
            orb.grid_v2[j] = orb.grid_v2[i];
            orb.grid_v3[j] = -orb.grid_v3[i];
        }
        orb.grid_t[gp] = 2.0 * T;
    }

    const auto [mn_it, mx_it] = std::minmax_element(orb.grid_v.begin(), orb.grid_v.end());
    orb.amplitude = *mx_it - *mn_it;
    if (orb.amplitude < 1e-4)
        throw SolverError(SolverError::Kind::trivial_root,
                          "converged to the constant solution (amplitude " +
                              std::to_string(orb.amplitude) + ")");
    if (!(*mn_it > 0))
        throw SolverError(SolverError::Kind::positivity,
                          "converged profile leaves v > 0 (min v = " +
                              std::to_string(*mn_it) + ")");
    orb.energy_level = energy({0.0, orb.a, 0.0, orb.b, 0.0}, c);
    return orb;
}

OrbitSolution find_periodic(const ModelConstants& c, double T, SeedMode mode,
                            const SolverOptions& opts) {
    if (!(T > 0)) throw std::invalid_argument("find_periodic: requires T > 0");
    validate_options(opts);

    const double Tstar = std::numbers::pi_v<double> / center_frequency(c);
    if (T <= Tstar + 1e-5)
        throw SolverError(SolverError::Kind::below_bifurcation,
                          "requested half-period " + std::to_string(T) +
                              " is at or below the branch onset pi/omega = " +
                              std::to_string(Tstar));

    if (mode == SeedMode::mountain_pass && T >= 2.0) {
        // Try the variational seed directly; at large T it sits far outside
        // the (exponentially small) Newton basin, so failure here is the
        // expected path, answered by continuation like the linear mode.
        auto seed = mountain_pass_initialize(c, T, 129);
        try {
            return solve_symmetric_orbit(c, T, seed.a, seed.b, opts);
        } catch (const SolverError&) {
            // fall through to continuation
        }
    }

    BranchWalker walker(c, opts);
    walker.advance_to(T);
    return solve_symmetric_orbit(c, T, walker.current().a, walker.current().b, opts);
}

std::vector<FamilyMember> continue_in_T(const ModelConstants& c, double T_start,
                                        double T_end, int steps,
                                        const SolverOptions& opts) {
    if (steps < 1) throw std::invalid_argument("continue_in_T: requires steps >= 1");
    if (!(T_start > 0) || !(T_end > 0))
        throw std::invalid_argument("continue_in_T: requires positive half-periods");
    validate_options(opts);

    BranchWalker walker(c, opts);
    std::vector<FamilyMember> rows;
    rows.reserve(static_cast<std::size_t>(steps));
    for (int i = 0; i < steps; ++i) {
        const double Ti =
            steps == 1 ? T_start
                       : T_start + (T_end - T_start) * static_cast<double>(i) /
                             static_cast<double>(steps - 1);
        FamilyMember row;
        row.T = Ti;
        if (Ti > walker.Tstar() + 1e-5) {
            try {
                walker.advance_to(Ti);
                OrbitSolution orb = solve_symmetric_orbit(c, Ti, walker.current().a,
                                                          walker.current().b, opts);
                row.a = orb.a;
                row.b = orb.b;
                row.amplitude = orb.amplitude;
                row.energy_level = orb.energy_level;
                row.residual = orb.residual;
                row.converged = true;
                row.orbit = std::move(orb);
            } catch (const SolverError&) {
                // Recorded as an unconverged row; the walker keeps its last
                // good point and later rows resume from there.
            }
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<PhaseState> orbit_states(const OrbitSolution& orbit) {
    std::vector<PhaseState> out;
    out.reserve(orbit.grid_t.size());
    for (std::size_t j = 0; j < orbit.grid_t.size(); ++j)
        out.push_back({orbit.grid_t[j], orbit.grid_v[j], orbit.grid_v1[j],
                       orbit.grid_v2[j], orbit.grid_v3[j]});
    return out;
}

// ---------------------------------------------------------------------------
// Discrete mountain pass.
// ---------------------------------------------------------------------------

namespace {

// Shared discretization helpers for the profile functional: uniform grid on
// [t1, t2], trapezoid weights, mirrored ghost nodes x_{-1} = x_1 and
// x_N = x_{N-2} (the discrete form of the natural conditions v' = 0).
struct ProfileGrid {
    int N;
    double h;
    const ModelConstants& c;

    double tau(int i) const { return (i == 0 || i == N - 1) ? 0.5 : 1.0; }
    int mir(int j) const { return j < 0 ? -j : (j >= N ? 2 * (N - 1) - j : j); }

    double value(const std::vector<double>& x) const {
        double s = 0.0;
        for (int i = 0; i < N; ++i) {
            const double xm = x[static_cast<std::size_t>(mir(i - 1))];
            const double xp = x[static_cast<std::size_t>(mir(i + 1))];
            const double d2 = (xm - 2.0 * x[static_cast<std::size_t>(i)] + xp) / (h * h);
            const double d1 = (xp - xm) / (2.0 * h);
            s += tau(i) * (0.5 * d2 * d2 - 0.5 * c.K2 * d1 * d1 +
                           potential_F(std::max(x[static_cast<std::size_t>(i)], 0.0), c));
        }
        return h * s;
    }

    void gradient(const std::vector<double>& x, std::vector<double>& g) const {
        g.assign(static_cast<std::size_t>(N), 0.0);
        for (int i = 0; i < N; ++i) {
            const int im = mir(i - 1), ip = mir(i + 1);
            const double xm = x[static_cast<std::size_t>(im)];
            const double xp = x[static_cast<std::size_t>(ip)];
            const double xi = x[static_cast<std::size_t>(i)];
            const double d2 = (xm - 2.0 * xi + xp) / (h * h);
            const double d1 = (xp - xm) / (2.0 * h);
            const double w2 = h * tau(i) * d2 / (h * h);
            g[static_cast<std::size_t>(im)] += w2;
            g[static_cast<std::size_t>(ip)] += w2;
            g[static_cast<std::size_t>(i)] -= 2.0 * w2;
            const double w1 = h * tau(i) * (-c.K2) * d1 / (2.0 * h);
            g[static_cast<std::size_t>(ip)] += w1;
            g[static_cast<std::size_t>(im)] -= w1;
            const double xc = std::max(xi, 0.0);
            g[static_cast<std::size_t>(i)] +=
                h * tau(i) * (c.K0 * xc - std::pow(xc, c.p));
        }
    }
};

// Pentadiagonal SPD Cholesky (bandwidth 2): factor once, solve many.
struct BandChol {
    std::vector<double> l0, l1, l2;

    void factor(const std::vector<std::array<double, 3>>& bands) {
        const std::size_t N = bands.size();
        l0.assign(N, 0.0);
        l1.assign(N, 0.0);
        l2.assign(N, 0.0);
        for (std::size_t k = 0; k < N; ++k) {
            if (k >= 2) l2[k] = bands[k][2] / l0[k - 2];
            if (k >= 1)
                l1[k] = (bands[k][1] - (k >= 2 ? l2[k] * l1[k - 1] : 0.0)) / l0[k - 1];
            const double d = bands[k][0] - l1[k] * l1[k] - l2[k] * l2[k];
            if (!(d > 0)) throw std::runtime_error("preconditioner lost definiteness");
            l0[k] = std::sqrt(d);
        }
    }

    void solve(std::vector<double>& b) const {
        const std::size_t N = l0.size();
        for (std::size_t k = 0; k < N; ++k) {
            double s = b[k];
            if (k >= 1) s -= l1[k] * b[k - 1];
            if (k >= 2) s -= l2[k] * b[k - 2];
            b[k] = s / l0[k];
        }
        for (std::size_t k = N; k-- > 0;) {
            double s = b[k];
            if (k + 1 < N) s -= l1[k + 1] * b[k + 1];
            if (k + 2 < N) s -= l2[k + 2] * b[k + 2];
            b[k] = s / l0[k];
        }
    }
};

} // namespace

double functional_J(const std::vector<double>& profile, double t1, double t2,
                    const ModelConstants& c) {
    if (profile.size() < 9)
        throw std::invalid_argument("functional_J: needs at least 9 profile points");
    if (!(t2 > t1)) throw std::invalid_argument("functional_J: requires t2 > t1");
    for (double x : profile)
        if (!(x >= -1e-12) || !(x <= c.L + 1e-12))
            throw std::invalid_argument("functional_J: profile leaves the band [0, L]");
    ProfileGrid grid{static_cast<int>(profile.size()),
                     (t2 - t1) / static_cast<double>(profile.size() - 1), c};
    return grid.value(profile);
}

MountainPassSeed mountain_pass_initialize(const ModelConstants& c, double T,
                                          std::size_t grid_size) {
    if (!(T >= 2.0))
        throw std::invalid_argument("mountain_pass_initialize: requires T >= 2");
    if (grid_size < 65)
        throw std::invalid_argument("mountain_pass_initialize: requires grid_size >= 65");

    const int N = static_cast<int>(grid_size);
    const double h = T / static_cast<double>(N - 1);
    ProfileGrid grid{N, h, c};

    MountainPassSeed seed;
    seed.path.grid_t.resize(grid_size);
    for (int i = 0; i < N; ++i)
        seed.path.grid_t[static_cast<std::size_t>(i)] = static_cast<double>(i) * h;

    // Three-stage path from the zero profile to the constant-L profile:
    // grow a cosine bump at the center, widen it, then lift the remainder.
    // Both endpoints have J = 0 (F vanishes at 0 and at L), every interior
    // profile has J > 0, so the maximum sits strictly inside the path.
    const double tc = T / 2.0;
    auto bump = [&](double t, double w) {
        const double z = std::abs(t - tc);
        if (z >= w) return 0.0;
        const double cph = std::cos(0.5 * std::numbers::pi_v<double> * z / w);
        return cph * cph;
    };
    const double w0 = std::min(T / 2.0, 2.0);
    const int per_stage = 11;
    auto& path = seed.path.path;
    path.emplace_back(grid_size, 0.0);
    for (int k = 1; k <= per_stage; ++k) {
        const double s = static_cast<double>(k) / per_stage;
        std::vector<double> x(grid_size);
        for (int i = 0; i < N; ++i)
            x[static_cast<std::size_t>(i)] =
                s * c.L * bump(seed.path.grid_t[static_cast<std::size_t>(i)], w0);
        path.push_back(std::move(x));
    }
    for (int k = 1; k <= per_stage; ++k) {
        const double w = w0 + (T - w0) * static_cast<double>(k) / per_stage;
        std::vector<double> x(grid_size);
        for (int i = 0; i < N; ++i)
            x[static_cast<std::size_t>(i)] =
                c.L * bump(seed.path.grid_t[static_cast<std::size_t>(i)], w);
        path.push_back(std::move(x));
    }
    const std::vector<double> wide = path.back();
    for (int k = 1; k <= per_stage; ++k) {
        const double s = static_cast<double>(k) / per_stage;
        std::vector<double> x(grid_size);
        for (int i = 0; i < N; ++i)
            x[static_cast<std::size_t>(i)] =
                (1.0 - s) * wide[static_cast<std::size_t>(i)] + s * c.L;
        path.push_back(std::move(x));
    }

    auto& values = seed.path.values;
    values.resize(path.size());
    for (std::size_t j = 0; j < path.size(); ++j) values[j] = grid.value(path[j]);

    // Preconditioner: the quadratic part of the discrete Hessian plus the
    // identity, assembled column-by-column (it is linear in the profile and
    // independent of it), factored once.
    BandChol chol;
    {
        std::vector<std::array<double, 3>> bands(grid_size, {0.0, 0.0, 0.0});
        std::vector<double> e(grid_size, 0.0), col;
        // The quadratic part of the gradient is gradient(x) minus the F'
        // term; applying it to unit vectors with F' = 0 is easiest done by a
        // zero-potential copy of the grid loops.
        auto apply_quad = [&](const std::vector<double>& x, std::vector<double>& y) {
            y.assign(grid_size, 0.0);
            for (int i = 0; i < N; ++i) {
                const int im = grid.mir(i - 1), ip = grid.mir(i + 1);
                const double xm = x[static_cast<std::size_t>(im)];
                const double xp = x[static_cast<std::size_t>(ip)];
                const double xi = x[static_cast<std::size_t>(i)];
                const double d2 = (xm - 2.0 * xi + xp) / (h * h);
                const double d1 = (xp - xm) / (2.0 * h);
                const double w2 = h * grid.tau(i) * d2 / (h * h);
                y[static_cast<std::size_t>(im)] += w2;
                y[static_cast<std::size_t>(ip)] += w2;
                y[static_cast<std::size_t>(i)] -= 2.0 * w2;
                const double w1 = h * grid.tau(i) * (-c.K2) * d1 / (2.0 * h);
                y[static_cast<std::size_t>(ip)] += w1;
                y[static_cast<std::size_t>(im)] -= w1;
            }
        };
        for (int j = 0; j < N; ++j) {
            e[static_cast<std::size_t>(j)] = 1.0;
            apply_quad(e, col);
            e[static_cast<std::size_t>(j)] = 0.0;
            bands[static_cast<std::size_t>(j)][0] = col[static_cast<std::size_t>(j)] + 1.0;
            if (j + 1 < N)
                bands[static_cast<std::size_t>(j) + 1][1] =
                    col[static_cast<std::size_t>(j) + 1];
            if (j + 2 < N)
                bands[static_cast<std::size_t>(j) + 2][2] =
                    col[static_cast<std::size_t>(j) + 2];
        }
        chol.factor(bands);
    }

    // Relax the profiles around the running argmax: preconditioned projected
    // descent, clamped to the band [0, L].  Lowering the local maximum of J
    // along the path drives the argmax profile toward the pass itself.
    std::vector<double> g;
    for (int round = 0; round < 60; ++round) {
        const std::size_t k = static_cast<std::size_t>(
            std::max_element(values.begin(), values.end()) - values.begin());
        for (std::size_t j = (k > 1 ? k - 1 : 1);
             j <= std::min(k + 1, path.size() - 2); ++j) {
            grid.gradient(path[j], g);
            chol.solve(g);
            auto& x = path[j];
            for (int i = 0; i < N; ++i) {
                double xn = x[static_cast<std::size_t>(i)] - 0.8 * g[static_cast<std::size_t>(i)];
                x[static_cast<std::size_t>(i)] = std::clamp(xn, 0.0, c.L);
            }
            values[j] = grid.value(x);
        }
    }

    seed.path.argmax_index = static_cast<std::size_t>(
        std::max_element(values.begin(), values.end()) - values.begin());
    seed.profile = path[seed.path.argmax_index];
    seed.J_value = values[seed.path.argmax_index];

    const auto& x = seed.profile;
    const std::size_t ip = static_cast<std::size_t>(
        std::max_element(x.begin(), x.end()) - x.begin());
    seed.a = x[ip];
    if (ip == 0)
        seed.b = 2.0 * (x[1] - x[0]) / (h * h);
    else if (ip + 1 == x.size())
        seed.b = 2.0 * (x[x.size() - 2] - x[x.size() - 1]) / (h * h);
    else
        seed.b = (x[ip - 1] - 2.0 * x[ip] + x[ip + 1]) / (h * h);
    return seed;
}

} // namespace delaunay
