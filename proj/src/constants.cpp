#include "delaunay/constants.hpp"

#include <cmath>
#include <cstdint>

#include <quadmath.h>

namespace delaunay {

namespace {

using q128 = __float128;

// x^(num/den) for x > 0 as exp((num/den) * log x), with fast paths for the
// whole and half powers that occur at n = 12 and n = 8.  Everything runs in
// quad precision and is rounded once at the end, so the double fields are
// correctly rounded and bit-stable.
q128 frac_pow(q128 x, long num, long den) {
    if (num == den) return x;
    if (2 * num == den) return sqrtq(x);
    return expq((q128(num) / q128(den)) * logq(x));
}

struct CoreConstants {
    int n;
    q128 p, K2, K0, l, L, cn, C2, C3, C4, Gl;
};

CoreConstants build_core(int n) {
    if (n < 5)
        throw std::domain_error("make_constants: dimension must satisfy n >= 5");
    // Integer intermediates are exact well past n = 32; the only rounding
    // happens in the final fractional powers and divisions.
    const std::int64_t ni = n;
    const std::int64_t k2_num = ni * ni - 4 * ni + 8;       // K2 = -k2_num / 2
    const std::int64_t k0_num = ni * ni * (ni - 4) * (ni - 4);  // K0 = k0_num / 16
    const std::int64_t cn_base = ni * (ni - 4) * (ni - 2) * (ni + 2);

    CoreConstants c;
    c.n = n;
    c.p = q128(ni + 4) / q128(ni - 4);
    c.K2 = -q128(k2_num) / 2;
    c.K0 = q128(k0_num) / 16;
    c.l = frac_pow(c.K0, n - 4, 8);
    c.L = frac_pow(q128(ni) / q128(ni - 4), n - 4, 8) * c.l;
    c.cn = frac_pow(q128(cn_base), n - 4, 8);
    c.C2 = 2 * c.K0 / q128(ni - 4);
    c.C3 = q128(ni * ni) / 4;
    c.C4 = -q128(ni - 4) / 2;
    c.Gl = -(q128(2) / q128(ni)) * frac_pow(c.K0, n, 4);
    return c;
}

} // namespace

template <typename Real>
basic_constants<Real> make_constants_as(int n) {
    const CoreConstants c = build_core(n);
    basic_constants<Real> out;
    out.n = c.n;
    out.p = static_cast<Real>(c.p);
    out.K2 = static_cast<Real>(c.K2);
    out.K0 = static_cast<Real>(c.K0);
    out.l = static_cast<Real>(c.l);
    out.L = static_cast<Real>(c.L);
    out.cn = static_cast<Real>(c.cn);
    out.C2 = static_cast<Real>(c.C2);
    out.C3 = static_cast<Real>(c.C3);
    out.C4 = static_cast<Real>(c.C4);
    out.Gl = static_cast<Real>(c.Gl);
    return out;
}

template basic_constants<double> make_constants_as<double>(int);
template basic_constants<long double> make_constants_as<long double>(int);
template basic_constants<__float128> make_constants_as<__float128>(int);

ModelConstants make_constants(int n) { return make_constants_as<double>(n); }

double singular_v(int n) { return static_cast<double>(build_core(n).l); }

double compute_K1(int n, double p) {
    if (!(p > 1.0))
        throw std::domain_error("compute_K1: exponent must satisfy p > 1");
    const q128 pm1 = q128(p) - 1;
    const std::int64_t ni = n;
    const q128 num = q128(8) * ((ni - 2) * (ni - 4) * pm1 * pm1 * pm1 +
                                2 * (ni * ni - 10 * ni + 20) * pm1 * pm1 -
                                16 * (ni - 4) * pm1 + 32);
    return static_cast<double>(num / (pm1 * pm1 * pm1 * pm1));
}

double bubble_v(double t, int n) {
    const CoreConstants c = build_core(n);
    // (2 cosh t)^(-(n-4)/2) via the fractional-power helper; the negative
    // exponent takes the exp/log route.
    return static_cast<double>(c.cn * frac_pow(2 * coshq(q128(t)), -(n - 4), 2));
}

BubblePoint bubble_state(double t, int n) {
    const CoreConstants c = build_core(n);
    const q128 tq = t;
    const q128 s = q128(n - 4) / 2;
    const q128 v = c.cn * frac_pow(2 * coshq(tq), -(n - 4), 2);
    const q128 tau = tanhq(tq);
    const q128 ch = coshq(tq);
    const q128 sig = 1 / (ch * ch);  // sech^2
    // Successive t-derivatives of v = cn (2 cosh t)^(-s), using
    // tau' = sigma and sigma' = -2 sigma tau:
    const q128 v1 = -s * tau * v;
    const q128 v2 = v * (s * s * tau * tau - s * sig);
    const q128 v3 = v * (-s * s * s * tau * tau * tau + (3 * s * s + 2 * s) * tau * sig);
    const q128 v4 = v * (s * s * s * s * tau * tau * tau * tau -
                         (6 * s * s * s + 8 * s * s + 4 * s) * tau * tau * sig +
                         (3 * s * s + 2 * s) * sig * sig);
    (void)v4;  // the fourth derivative is implied by the ODE; kept for clarity
    return {static_cast<double>(v), static_cast<double>(v1), static_cast<double>(v2),
            static_cast<double>(v3)};
}

double potential_G(double s, const ModelConstants& c) {
    if (s < 0.0) throw std::domain_error("potential_G: argument must be >= 0");
    const double expo = 2.0 * c.n / (c.n - 4.0);
    return -0.5 * c.K0 * s * s + (c.n - 4.0) / (2.0 * c.n) * std::pow(s, expo);
}

double potential_F(double s, const ModelConstants& c) { return -potential_G(s, c); }

} // namespace delaunay
