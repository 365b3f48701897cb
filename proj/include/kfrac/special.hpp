#pragma once

// Small special-function layer shared by the whole library.
//
// Everything here is a thin, checked wrapper over the C standard library and
// GSL. The one convention that matters: coefficients of the power-law
// identities are always assembled through recip_gamma(), which is an entire
// function of its argument and returns exactly 0 at the poles of Gamma.
// That makes annihilation identities (e.g. the derivative of the kernel
// power itself) come out as exact zeros instead of NaNs.

namespace kfrac {

// Gamma(x). Throws std::domain_error at non-positive integers.
double gamma_fn(double x);

// log|Gamma(x)|.
double lgamma_fn(double x);

// 1/Gamma(x); total function, exactly 0 at x = 0, -1, -2, ...
double recip_gamma(double x) noexcept;

// Euler beta B(a,b), a,b > 0.
double beta_fn(double a, double b);

// Lower incomplete beta B_x(a,b) = int_0^x u^(a-1)(1-u)^(b-1) du
// (unnormalized), a,b > 0, x in [0,1].
double lower_inc_beta(double a, double b, double x);

// Signed power: sign(x)*|x|^m. Odd-power-style extension used for the
// nonlinearity |x|^m when trajectories are allowed to go negative.
double sgn_pow(double x, double m) noexcept;

// 16-point Gauss-Legendre rule on [0,1].
inline constexpr int kGaussN = 16;
extern const double kGaussX[kGaussN];
extern const double kGaussW[kGaussN];

}  // namespace kfrac
