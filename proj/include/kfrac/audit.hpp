#pragma once

#include <memory>
#include <vector>

#include "kfrac/core.hpp"
#include "kfrac/mesh.hpp"
#include "kfrac/operators.hpp"

// Finite-horizon audit of the nonexistence argument. The argument multiplies
// the problem by a compactly supported cut-off, moves the derivative onto the
// cut-off by fractional parts, splits with Young, and lands on a bound whose
// horizon power decays when mu > 0. None of those steps is numerical in the
// source; this module evaluates every intermediate quantity on a mesh so the
// direction of each inequality can be checked, and the final bound traced in
// the horizon T.
//
// Everything here fixes rho = 1: the chain is evaluated in the substitute
// coordinate zeta = t - a, and the normalized tail constant below relies on
// that linear change of variables.

namespace kfrac {

// Cut-off used as multiplier: 1 on [a, theta*T], cubic smoothstep ramp down
// to 0 at T, identically 0 past T. C^1 with flat joins at both ramp ends.
// `sharpening` >= 1 raises the whole function to a power (the classical
// escape hatch when the ramp quotient below fails to be integrable; for the
// cubic ramp and m > 1 it is never needed and defaults to 1).
struct TestFunction {
    double theta = 0.5;
    double T = 0.0;
    double a = 1.0;
    double sharpening = 1.0;

    double phi(double t) const;
    double phi_prime(double t) const;  // d(phi)/dt
    // t^{1-rho} * phi'(t): the substitute-coordinate derivative.
    double delta_phi(double t, double rho) const;
    // |phi'| / phi^{1/m}, with the convention 0 wherever phi' = 0 (the
    // quotient is the integrand of the tail constant).
    double ramp_quotient(double t, double m) const;

    double plateau_end() const { return theta * T; }
};

// Throws std::invalid_argument when a >= theta*T or theta is outside (0, 1/2].
TestFunction build_test_function(double theta, double T, double a);

// One Young split p*e <= p^m/m + e^{m'}/m' for non-negative p, e.
struct YoungSplit {
    double product = 0.0;
    double bound = 0.0;
    bool ok = false;
};
YoungSplit young_split(double phi_val, double eta, double m);

struct AuditReport {
    double T = 0.0;
    double theta = 0.5;
    // Both sides of the weak inequality int phi * D x >= int lam z^mu |x|^m phi.
    double lhs = 0.0;
    double rhs = 0.0;
    // The pivot functional L obtained by parts, two independent routes:
    // integrating x * (-d/dz) I_{T-}phi, and x * I_{T-}(-phi').
    double pivot = 0.0;
    double pivot_alt = 0.0;
    // Normalized tail constant C (quadrature of the ramp quotient transform
    // on [theta, 1]) and the resulting horizon bound C * zeta(theta T)^{-mu m'/m}.
    double tail_constant = 0.0;
    double tail_bound = 0.0;
    // Supersolution scale actually audited (0 when the input was supplied).
    double scale = 0.0;
    bool young_ok = false;
    bool directions_ok = false;
};

// Coefficient c such that x = c * (zeta^{gamma-1} + 1) satisfies
// D^{alpha,beta} x >= lambda zeta^mu x^m on (0, zeta_max]. The pure power
// zeta^{gamma-1} alone is annihilated by the derivative and can never
// dominate the right side; the added constant mode supplies the positive
// derivative c * zeta^{-alpha} / Gamma(1-alpha) that makes the margin work.
double supersolution_scale(const ProblemParams& params, double zeta_max);

// The canonical audited supersolution on a mesh, as a weighted grid function
// of weight 1-gamma.
WeightedGridFunction make_supersolution(const ProblemParams& params,
                                        std::shared_ptr<const Mesh> mesh,
                                        double scale);

// Evaluate the full chain for one horizon. `x` must live on a mesh spanning
// [a, T] (both-graded recommended; vanishing_bound_trace builds q=3 meshes
// graded at both ends). Throws:
//   - std::domain_error when params.rho != 1,
//   - std::domain_error mentioning "integrability" when m >= (1+mu)/(1-alpha)
//     (the right side need not exist; refusing beats silently quadraturing a
//     divergent integral),
//   - std::invalid_argument on mesh/test-function mismatch.
AuditReport audit_inequality_chain(const WeightedGridFunction& x,
                                   const ProblemParams& params,
                                   const TestFunction& tf);

// Convenience overload for closed-form power inputs; samples onto the mesh.
// Note a pure zeta^{gamma-1} power is not a supersolution (its generalized
// derivative vanishes identically), so this overload reports a failed
// direction for it at any positive scale -- by design, not by accident.
AuditReport audit_inequality_chain(const ScaledPower& x,
                                   const ProblemParams& params,
                                   const TestFunction& tf,
                                   std::shared_ptr<const Mesh> mesh);

// Chain evaluated across increasing horizons with one shared supersolution
// scale (sized at the largest horizon). Contract on the reported bound:
// strictly decreasing in T when mu > 0, constant when mu = 0; when mu < 0 the
// bound field is replaced by the envelope C * zeta(T)^{-m' - mu m'/m} and
// directions_ok drops the bound clause (the envelope's constant is not the
// chain's C, only its slope is asserted).
std::vector<AuditReport> vanishing_bound_trace(const ProblemParams& params,
                                               const std::vector<double>& T_values,
                                               double theta, int n,
                                               double q = 3.0, int jobs = 1);

}  // namespace kfrac
