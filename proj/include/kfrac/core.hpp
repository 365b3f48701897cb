#pragma once

#include <string>

namespace kfrac {

// All scalar parameters of the initial-value problem
//
//   D^{alpha,beta} x(t) = lambda * ((t^rho - a^rho)/rho)^mu * |x(t)|^m,
//   I^{1-gamma} x(a+)   = x_a,          gamma = alpha + beta*(1 - alpha),
//
// where D^{alpha,beta} is the generalized (Hilfer-Katugampola) derivative of
// order alpha and type beta, and I^sigma the Katugampola integral.
struct ProblemParams {
    double alpha = 0.5;   // order, in (0,1)
    double beta = 0.5;    // type, in [0,1]
    double rho = 1.0;     // scale exponent, > 0
    double a = 1.0;       // left endpoint, > 0
    double mu = 0.0;      // weight exponent of the nonlinearity
    double m = 3.0;       // nonlinearity power, > 1
    double lambda = 1.0;  // nonlinearity coefficient, > 0
    double x_a = 1.0;     // weighted initial datum

    double gamma() const { return alpha + beta * (1.0 - alpha); }
    double m_conj() const { return m / (m - 1.0); }

    // Throws std::invalid_argument naming the first offending field.
    void validate() const;
};

// c * ((t^rho - a^rho)/rho)^nu  -- the closed-form currency of the power-law
// identities. zeta(t) := (t^rho - a^rho)/rho is used throughout as the
// transformed coordinate in which every Katugampola kernel becomes a
// Riemann-Liouville kernel.
struct ScaledPower {
    double coeff = 1.0;
    double exponent = 0.0;
    double anchor = 1.0;  // a
    double rho = 1.0;

    double zeta(double t) const;       // (t^rho - a^rho)/rho
    double t_of_zeta(double z) const;  // inverse map
    // Value at t >= anchor. At t == anchor: 0 for exponent > 0, coeff for
    // exponent == 0, signed infinity for exponent < 0 (singular flag; the
    // weighted machinery downstream never consumes it raw).
    double operator()(double t) const;
    double at_zeta(double z) const;

    bool is_zero() const { return coeff == 0.0; }
};

// m* = (1 + mu)/(1 - alpha): exponents 1 < m < m* admit no global solution,
// m > m* admits the global power solution below. Requires mu > -alpha.
double blowup_threshold(const ProblemParams& p);

// I^alpha applied to c*zeta^(sigma-1): coefficient picks up
// Gamma(sigma)/Gamma(sigma+alpha), exponent shifts by +alpha.
// Requires sigma > 0, alpha >= 0.
ScaledPower power_integral_closed(const ScaledPower& p, double alpha);

// D^{alpha,beta} applied to c*zeta^(xi-1) for xi >= gamma:
//   -> c*Gamma(xi)*recip_gamma(xi-alpha) * zeta^(xi-alpha-1).
// Exact-zero special cases take precedence over the domain gate:
//   xi == alpha : the kernel power itself, annihilated for every type beta;
//   xi == gamma : annihilated by the composition I^{beta(1-alpha)} d I^{1-gamma}
//                 (the displayed identity of the power rule does not hold
//                 there; the inner integral is constant).
// For xi < gamma (and xi != alpha) the formula is not certified: domain error.
ScaledPower power_hilfer_closed(const ScaledPower& p, const ProblemParams& params);

// The global power solution y(t) = c*zeta^nu, nu = (alpha+mu)/(1-m), that
// solves the equality problem when m exceeds the blow-up threshold.
struct ExactSolution {
    ScaledPower y;
    double nu = 0.0;
    // Initial value as displayed in the source identity: x_a equals the
    // coefficient c (valid for nu >= gamma-1, which m > m* guarantees).
    double x_a = 0.0;
    // Datum for the Volterra form x = datum*zeta^(gamma-1)/Gamma(gamma) + I^alpha(f).
    // Identically zero here: the power solution satisfies x = I^alpha(lambda
    // zeta^mu x^m) with no separate datum term (the zeta^(gamma-1) mode is
    // exactly the one annihilated by D^{alpha,beta}).
    double x_a_volterra = 0.0;
};

// Throws std::domain_error (message contains "threshold") when m <= m*.
ExactSolution exact_solution(const ProblemParams& p);

}  // namespace kfrac
