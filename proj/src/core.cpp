#include "kfrac/core.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "kfrac/special.hpp"

namespace kfrac {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void bad_field(const std::string& field, const std::string& why) {
    throw std::invalid_argument("ProblemParams." + field + ": " + why);
}
}  // namespace

void ProblemParams::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) bad_field("alpha", "must lie in (0,1)");
    if (!(beta >= 0.0 && beta <= 1.0)) bad_field("beta", "must lie in [0,1]");
    if (!(rho > 0.0)) bad_field("rho", "must be positive");
    if (!(a > 0.0)) bad_field("a", "must be positive");
    if (!(m > 1.0)) bad_field("m", "must exceed 1");
    if (!(lambda > 0.0)) bad_field("lambda", "must be positive");
    if (!std::isfinite(mu)) bad_field("mu", "must be finite");
    if (!std::isfinite(x_a)) bad_field("x_a", "must be finite");
}

double ScaledPower::zeta(double t) const {
    return (std::pow(t, rho) - std::pow(anchor, rho)) / rho;
}

double ScaledPower::t_of_zeta(double z) const {
    return std::pow(std::pow(anchor, rho) + rho * z, 1.0 / rho);
}

double ScaledPower::at_zeta(double z) const {
    if (z > 0.0) return coeff * std::pow(z, exponent);
    if (exponent > 0.0) return 0.0;
    if (exponent == 0.0) return coeff;
    if (coeff == 0.0) return 0.0;
    return coeff > 0.0 ? kInf : -kInf;
}

double ScaledPower::operator()(double t) const { return at_zeta(zeta(t)); }

double blowup_threshold(const ProblemParams& p) {
    if (!(p.mu > -p.alpha))
        throw std::domain_error("blowup_threshold: requires mu > -alpha");
    return (1.0 + p.mu) / (1.0 - p.alpha);
}

ScaledPower power_integral_closed(const ScaledPower& p, double alpha) {
    double sigma = p.exponent + 1.0;
    if (!(sigma > 0.0))
        throw std::domain_error("power_integral_closed: requires exponent > -1");
    if (!(alpha >= 0.0))
        throw std::domain_error("power_integral_closed: requires alpha >= 0");
    if (alpha == 0.0) return p;
    ScaledPower out = p;
    out.coeff = p.coeff * gamma_fn(sigma) * recip_gamma(sigma + alpha);
    out.exponent = p.exponent + alpha;
    return out;
}

ScaledPower power_hilfer_closed(const ScaledPower& p, const ProblemParams& params) {
    double xi = p.exponent + 1.0;
    double gamma = params.gamma();
    if (!(xi > 0.0))
        throw std::domain_error("power_hilfer_closed: requires exponent > -1");
    ScaledPower out = p;
    out.exponent = xi - params.alpha - 1.0;
    // Exact annihilation cases come before the validity gate; both produce
    // honest zeros of the composed operator, not limits of the formula.
    constexpr double tol = 1e-14;
    if (std::abs(xi - params.alpha) <= tol * (1.0 + std::abs(xi)) ||
        std::abs(xi - gamma) <= tol * (1.0 + std::abs(xi))) {
        out.coeff = 0.0;
        return out;
    }
    if (xi < gamma)
        throw std::domain_error(
            "power_hilfer_closed: formula not certified for exponent below gamma-1");
    out.coeff = p.coeff * gamma_fn(xi) * recip_gamma(xi - params.alpha);
    return out;
}

ExactSolution exact_solution(const ProblemParams& p) {
    p.validate();
    double mstar = blowup_threshold(p);
    if (!(p.m > mstar))
        throw std::domain_error(
            "exact_solution: m is at or below the blow-up threshold (1+mu)/(1-alpha); "
            "the global power solution requires m > m*");
    double nu = (p.alpha + p.mu) / (1.0 - p.m);
    double g1 = nu + 1.0;
    double g2 = nu - p.alpha + 1.0;  // equals (m*alpha + mu)/(1-m) + 1
    if (g1 <= 0.0 || g2 <= 0.0)
        throw std::domain_error("exact_solution: Gamma argument not positive");
    double c = std::pow(gamma_fn(g1) / (p.lambda * gamma_fn(g2)), 1.0 / (p.m - 1.0));
    ExactSolution sol;
    sol.y = ScaledPower{c, nu, p.a, p.rho};
    sol.nu = nu;
    sol.x_a = c;
    sol.x_a_volterra = 0.0;
    return sol;
}

}  // namespace kfrac
