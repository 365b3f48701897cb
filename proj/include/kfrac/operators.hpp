#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "kfrac/core.hpp"
#include "kfrac/mesh.hpp"

// Numerical Katugampola-family operators on graded meshes.
//
// Everything is computed in the transformed coordinate zeta = (t^rho-a^rho)/rho,
// where both the left and the right kernel are Riemann-Liouville kernels; the
// heavy lifting (exact product integration against piecewise-linear densities,
// singular-aware weighted cells near the endpoints) lives in
// detail/engine.hpp. This header is the user-facing surface:
//
//  - samples travel as WeightedGridFunction: values v_j = zeta_j^w * x(t_j)
//    for a weight exponent w chosen so the v_j stay finite at the endpoint
//    where x may blow up like zeta^{-w};
//  - derivative-type operators differentiate the product-integration
//    representation analytically (never finite-difference a computed grid);
//  - right-sided operators run on the reflected coordinate and consume the
//    mesh's cancellation-free complements zeta_c.
//
// Endpoint values of the returned grids are analytic limits of the leading
// power model, not quadrature outputs; endpoint *checks* therefore evaluate
// at the node adjacent to the endpoint (see boundary_limit).

namespace kfrac {

enum class WeightSide { left, right };

struct WeightedGridFunction {
    std::shared_ptr<const Mesh> mesh;
    double weight_exp = 0.0;             // w in v_j = zeta_j^w * x(t_j)
    WeightSide side = WeightSide::left;  // which endpoint the weight refers to
    std::vector<double> values;          // finite at every node

    // Leading power of the raw values near the weighted endpoint, i.e. the
    // model x ~ const * zeta^{model_exp} used by the singular-aware cells.
    // Defaults to -weight_exp for weighted samples and to a two-node estimate
    // for plain ones. Operators propagate it through compositions, which is
    // what keeps chained calls (semigroup tests, generalized derivative)
    // exactly linear and accurate at the endpoint.
    std::optional<double> model_exp;

    int n() const { return static_cast<int>(values.size()) - 1; }

    // Coordinate the weight refers to: zeta_j (left) or Z - zeta_j (right).
    double weight_coord(int j) const;

    // Unweighted sample x(t_j); +-inf at the weighted endpoint when the
    // weight absorbs a genuine singularity.
    double raw(int j) const;

    // Sample re-expressed at another weight exponent (same side).
    double value_at_weight(int j, double w) const;

    // Off-node evaluation: monotone piecewise-cubic interpolation of the
    // weighted values in zeta, then unweighting. Intended for occasional
    // queries, not bulk resampling.
    double eval(double t) const;

    double max_abs() const;

    static WeightedGridFunction from_samples(
        std::shared_ptr<const Mesh> mesh, std::vector<double> weighted_values,
        double weight_exp = 0.0, WeightSide side = WeightSide::left,
        std::optional<double> model_exp = std::nullopt);

    // Plain samples of an evaluable function of t. With weight_exp != 0 the
    // endpoint sample is taken from the model (continuation of the first
    // interior weighted value); use from_power for exact power data.
    static WeightedGridFunction from_function(
        std::shared_ptr<const Mesh> mesh, const std::function<double(double)>& f,
        double weight_exp = 0.0, WeightSide side = WeightSide::left);

    // Exact weighted sampling of c*zeta^nu: weight defaults to max(-nu, 0),
    // the model exponent is nu itself.
    static WeightedGridFunction from_power(
        std::shared_ptr<const Mesh> mesh, const ScaledPower& p,
        std::optional<double> weight_exp = std::nullopt);
};

// ---- integrals -------------------------------------------------------------

// Left integral I^alpha_{a+}. Output weight max(w - alpha, 0); the value at
// t = a is the analytic limit of the leading-power model.
WeightedGridFunction left_integral(const WeightedGridFunction& f, double alpha);
WeightedGridFunction left_integral(const std::function<double(double)>& f,
                                   double alpha,
                                   std::shared_ptr<const Mesh> mesh);
WeightedGridFunction left_integral(const ScaledPower& f, double alpha,
                                   std::shared_ptr<const Mesh> mesh);

// Right integral I^alpha_{b-} via reflection. For input weighted at the left
// end the value at t = a (where the reflected density is unbounded) is NaN;
// everything else is well-defined.
WeightedGridFunction right_integral(const WeightedGridFunction& f, double alpha);
WeightedGridFunction right_integral(const std::function<double(double)>& f,
                                    double alpha,
                                    std::shared_ptr<const Mesh> mesh);
WeightedGridFunction right_integral(const ScaledPower& f, double alpha,
                                    std::shared_ptr<const Mesh> mesh);

// ---- derivatives -----------------------------------------------------------

// delta_rho = d/dzeta = t^{1-rho} d/dt, the derivative the fractional
// operators are built from (so that delta_rho zeta^nu = nu zeta^{nu-1};
// equivalently delta_rho(t^rho/rho) = 1). Finite-difference fallback uses a
// central step h = max(|t|,1)*eps^{1/3}.
double delta_rho(const std::function<double(double)>& f, double t, double rho);
double delta_rho(const std::function<double(double)>& f,
                 const std::function<double(double)>& f_prime, double t,
                 double rho);
double delta_rho(const ScaledPower& f, double t);

// Left derivative D^alpha_{a+} = delta_rho I^{1-alpha}, alpha in (0,1).
// Computed by differentiating the product-integration representation of
// I^{1-alpha} analytically. Output weight w + alpha.
WeightedGridFunction left_derivative(const WeightedGridFunction& f,
                                     double alpha);
// Evaluable route. When f_prime is supplied (and f(a) is finite) the
// integrated-by-parts representation is used instead:
//   D^alpha f = f(a)/Gamma(1-alpha) * zeta^{-alpha} + I^{1-alpha}(delta_rho f).
WeightedGridFunction left_derivative(
    const std::function<double(double)>& f, double alpha,
    std::shared_ptr<const Mesh> mesh,
    std::optional<std::function<double(double)>> f_prime = std::nullopt);
WeightedGridFunction left_derivative(const ScaledPower& f, double alpha,
                                     std::shared_ptr<const Mesh> mesh);

// Generalized derivative of order alpha and type beta,
//   D^{alpha,beta} = I^{beta(1-alpha)} delta_rho I^{(1-beta)(1-alpha)},
// computed in the factored form I^{beta(1-alpha)} D^{gamma} (derivative
// first, then the smoothing integral). Output weight w + alpha.
WeightedGridFunction generalized_derivative(const WeightedGridFunction& f,
                                            const ProblemParams& params);
WeightedGridFunction generalized_derivative(const ScaledPower& f,
                                            const ProblemParams& params,
                                            std::shared_ptr<const Mesh> mesh);

// ---- identity residuals and checks ----------------------------------------

// max_j | I^alpha(I^beta2 f) - I^{alpha+beta2} f | over the mesh, compared in
// weighted values at the coarser of the two output weights.
double semigroup_residual(const WeightedGridFunction& f, double alpha,
                          double beta2);
double semigroup_residual(const std::function<double(double)>& f, double alpha,
                          double beta2, std::shared_ptr<const Mesh> mesh);

// The two sides of the fractional integration-by-parts pairing
//   int_a^b t^{rho-1} g (I^alpha_{a+} h) dt  vs
//   int_a^b t^{rho-1} h (I^alpha_{b-} g) dt.
struct PairingSides {
    double lhs = 0.0;
    double rhs = 0.0;
};
PairingSides int_by_parts_sides(const std::function<double(double)>& g,
                                const std::function<double(double)>& h,
                                double alpha, std::shared_ptr<const Mesh> mesh);
double int_by_parts_residual(const std::function<double(double)>& g,
                             const std::function<double(double)>& h,
                             double alpha, std::shared_ptr<const Mesh> mesh);

// Endpoint vanishing check for I^alpha of a function with endpoint weight
// order gw < alpha: the operator value at the node adjacent to the endpoint
// (the endpoint node itself carries the analytic limit by construction and
// would certify nothing), together with the envelope bound
// |W| * Gamma(1-gw)/Gamma(1+alpha-gw) * h^{alpha-gw} at that node's distance
// h from the endpoint. |value| <= bound up to quadrature error, and both
// tend to 0 under refinement. Throws std::domain_error when alpha <= gw.
struct EndpointCheck {
    double value = 0.0;
    double bound = 0.0;
};
EndpointCheck boundary_limit(const WeightedGridFunction& f, double alpha,
                             WeightSide side);
EndpointCheck boundary_limit(const ScaledPower& f, double alpha,
                             WeightSide side, std::shared_ptr<const Mesh> mesh);

// int_a^b t^{rho-1} x(t) dt = int_0^Z x dzeta with singular-aware cells at
// the weighted end.
double integrate(const WeightedGridFunction& f);

}  // namespace kfrac
