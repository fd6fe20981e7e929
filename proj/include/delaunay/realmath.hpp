#pragma once

// Scalar math shims so the integrator and shooting kernels can be written
// once and instantiated at double, long double, or __float128 precision.
// The quad-precision tier is used for the final orbit polish, where the
// strong hyperbolicity of the flow amplifies every rounding error by
// e^{mu*T}; see the integrator notes in dynamics.hpp.

#include <cmath>

#if defined(__SIZEOF_FLOAT128__)
#include <quadmath.h>
#endif

namespace delaunay::detail {

inline double r_pow(double x, double y) { return std::pow(x, y); }
inline double r_exp(double x) { return std::exp(x); }
inline double r_log(double x) { return std::log(x); }
inline double r_sqrt(double x) { return std::sqrt(x); }
inline double r_abs(double x) { return std::fabs(x); }
inline bool r_isfinite(double x) { return std::isfinite(x); }

inline long double r_pow(long double x, long double y) { return std::pow(x, y); }
inline long double r_exp(long double x) { return std::exp(x); }
inline long double r_log(long double x) { return std::log(x); }
inline long double r_sqrt(long double x) { return std::sqrt(x); }
inline long double r_abs(long double x) { return std::fabs(x); }
inline bool r_isfinite(long double x) { return std::isfinite(x); }

#if defined(__SIZEOF_FLOAT128__)
inline __float128 r_pow(__float128 x, __float128 y) { return powq(x, y); }
inline __float128 r_exp(__float128 x) { return expq(x); }
inline __float128 r_log(__float128 x) { return logq(x); }
inline __float128 r_sqrt(__float128 x) { return sqrtq(x); }
inline __float128 r_abs(__float128 x) { return fabsq(x); }
inline bool r_isfinite(__float128 x) { return finiteq(x) != 0; }
#endif

} // namespace delaunay::detail
