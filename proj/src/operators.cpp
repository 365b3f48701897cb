#include "kfrac/operators.hpp"

#include <gsl/gsl_spline.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "kfrac/detail/engine.hpp"
#include "kfrac/special.hpp"

namespace kfrac {

namespace {

using detail::Density;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kW = detail::kDefaultWeightedCells;

// Exponent comparisons for the analytic endpoint limits.
constexpr double kExpTol = 1e-12;

void require_mesh(const WeightedGridFunction& f, const char* who) {
    if (!f.mesh || f.mesh->n() < 2)
        throw std::invalid_argument(std::string(who) + ": grid function has no usable mesh");
    if (f.values.size() != f.mesh->zeta.size())
        throw std::invalid_argument(std::string(who) + ": sample/mesh size mismatch");
}

void require_finite(const WeightedGridFunction& f, const char* who) {
    for (double v : f.values)
        if (!std::isfinite(v))
            throw std::invalid_argument(std::string(who) + ": non-finite weighted sample");
}

void require_left_compatible(const WeightedGridFunction& f, const char* who) {
    if (f.side == WeightSide::right && f.weight_exp != 0.0)
        throw std::invalid_argument(std::string(who) +
                                    ": expects plain or left-weighted samples");
}

// Density in the zeta coordinate (weighted end at zeta = 0).
Density left_density(const WeightedGridFunction& f) {
    const auto& zs = f.mesh->zeta;
    const int n = f.n();
    std::vector<double> vals(n + 1);
    for (int j = 0; j <= n; ++j) vals[j] = f.raw(j);
    double p0;
    if (f.model_exp)
        p0 = *f.model_exp;
    else if (f.weight_exp != 0.0 && f.side == WeightSide::left)
        p0 = -f.weight_exp;
    else
        p0 = detail::estimate_p0(zs, vals);
    return Density::modeled(zs, vals, p0);
}

// Density in the reflected coordinate u = Z - zeta (weighted end at u = 0,
// i.e. at t = b), built from the mesh's cancellation-free complements.
Density right_density(const WeightedGridFunction& f) {
    const int n = f.n();
    std::vector<double> rz(n + 1), rv(n + 1);
    for (int j = 0; j <= n; ++j) {
        rz[j] = f.mesh->zeta_c[n - j];
        rv[j] = f.raw(n - j);
    }
    double p0;
    if (f.side == WeightSide::right && f.model_exp)
        p0 = *f.model_exp;
    else if (f.side == WeightSide::right && f.weight_exp != 0.0)
        p0 = -f.weight_exp;
    else
        p0 = detail::estimate_p0(rz, rv);
    return Density::modeled(rz, rv, p0);
}

// Analytic limit of zeta^{w_shift} * I-like-output at the weighted endpoint:
// the output behaves like lim_coeff * zeta^{e0}; 0 for e0 > 0, the coefficient
// at e0 == 0, and NaN when the requested weight cannot absorb the limit.
double endpoint_limit(double e0, double lim_coeff) {
    if (e0 > kExpTol) return 0.0;
    if (e0 >= -kExpTol) return lim_coeff;
    return kNaN;
}

}  // namespace

// ---- WeightedGridFunction ---------------------------------------------------

double WeightedGridFunction::weight_coord(int j) const {
    return side == WeightSide::left ? mesh->zeta[j] : mesh->zeta_c[j];
}

double WeightedGridFunction::raw(int j) const {
    if (weight_exp == 0.0) return values[j];
    const double zc = weight_coord(j);
    if (zc == 0.0) {
        if (values[j] == 0.0) return 0.0;
        if (weight_exp > 0.0) return values[j] > 0.0 ? kInf : -kInf;
        return 0.0;
    }
    return values[j] * std::pow(zc, -weight_exp);
}

double WeightedGridFunction::value_at_weight(int j, double w) const {
    if (w == weight_exp) return values[j];
    const double zc = weight_coord(j);
    if (zc == 0.0) {
        if (values[j] == 0.0 || w > weight_exp) return 0.0;
        return values[j] > 0.0 ? kInf : -kInf;
    }
    return values[j] * std::pow(zc, w - weight_exp);
}

double WeightedGridFunction::eval(double t) const {
    const Mesh& M = *mesh;
    const double lo = M.t.front(), hi = M.t.back();
    if (t < lo - 1e-12 * std::max(1.0, std::fabs(lo)) ||
        t > hi + 1e-12 * std::max(1.0, std::fabs(hi)))
        throw std::domain_error("eval: point outside the mesh interval");
    const double tc = std::clamp(t, lo, hi);
    const double z = std::clamp(
        (std::pow(tc, M.rho) - std::pow(M.a, M.rho)) / M.rho, 0.0, M.length());

    gsl_interp_accel* acc = gsl_interp_accel_alloc();
    gsl_spline* spl = gsl_spline_alloc(gsl_interp_steffen, values.size());
    gsl_spline_init(spl, M.zeta.data(), values.data(), values.size());
    const double v = gsl_spline_eval(spl, z, acc);
    gsl_spline_free(spl);
    gsl_interp_accel_free(acc);

    if (weight_exp == 0.0) return v;
    const double zc = side == WeightSide::left
                          ? z
                          : (std::pow(M.b, M.rho) - std::pow(tc, M.rho)) / M.rho;
    if (zc <= 0.0) return raw(side == WeightSide::left ? 0 : n());
    return v * std::pow(zc, -weight_exp);
}

double WeightedGridFunction::max_abs() const {
    double r = 0.0;
    for (double v : values) r = std::max(r, std::fabs(v));
    return r;
}

WeightedGridFunction WeightedGridFunction::from_samples(
    std::shared_ptr<const Mesh> mesh, std::vector<double> weighted_values,
    double weight_exp, WeightSide side, std::optional<double> model_exp) {
    if (!mesh) throw std::invalid_argument("from_samples: null mesh");
    if (weighted_values.size() != mesh->zeta.size())
        throw std::invalid_argument("from_samples: sample/mesh size mismatch");
    WeightedGridFunction f;
    f.mesh = std::move(mesh);
    f.weight_exp = weight_exp;
    f.side = side;
    f.values = std::move(weighted_values);
    f.model_exp = model_exp;
    return f;
}

WeightedGridFunction WeightedGridFunction::from_function(
    std::shared_ptr<const Mesh> mesh, const std::function<double(double)>& fn,
    double weight_exp, WeightSide side) {
    if (!mesh) throw std::invalid_argument("from_function: null mesh");
    const int n = mesh->n();
    WeightedGridFunction f;
    f.weight_exp = weight_exp;
    f.side = side;
    f.values.resize(n + 1);
    for (int j = 0; j <= n; ++j) {
        const double zc =
            side == WeightSide::left ? mesh->zeta[j] : mesh->zeta_c[j];
        if (zc == 0.0 && weight_exp != 0.0) continue;  // endpoint pinned below
        f.values[j] =
            (weight_exp == 0.0 ? 1.0 : std::pow(zc, weight_exp)) * fn(mesh->t[j]);
    }
    if (weight_exp != 0.0) {
        // continuation of the nearest interior weighted value; the engine's
        // model pins it the same way
        if (side == WeightSide::left)
            f.values[0] = f.values[1];
        else
            f.values[n] = f.values[n - 1];
    }
    f.mesh = std::move(mesh);
    return f;
}

WeightedGridFunction WeightedGridFunction::from_power(
    std::shared_ptr<const Mesh> mesh, const ScaledPower& p,
    std::optional<double> weight_exp) {
    if (!mesh) throw std::invalid_argument("from_power: null mesh");
    const double atol = 1e-12 * std::max(1.0, std::fabs(mesh->a));
    if (std::fabs(p.anchor - mesh->a) > atol || p.rho != mesh->rho)
        throw std::invalid_argument("from_power: power anchored off this mesh");
    const double w = weight_exp.value_or(std::max(-p.exponent, 0.0));
    const double e = p.exponent + w;  // exponent of the weighted samples
    if (e < 0.0)
        throw std::invalid_argument(
            "from_power: weight does not absorb the singularity");
    const int n = mesh->n();
    WeightedGridFunction f;
    f.weight_exp = w;
    f.side = WeightSide::left;
    f.model_exp = p.exponent;
    f.values.resize(n + 1);
    f.values[0] = (e == 0.0) ? p.coeff : 0.0;
    for (int j = 1; j <= n; ++j)
        f.values[j] = p.coeff * (e == 0.0 ? 1.0 : std::pow(mesh->zeta[j], e));
    f.mesh = std::move(mesh);
    return f;
}

// ---- integrals --------------------------------------------------------------

WeightedGridFunction left_integral(const WeightedGridFunction& f, double alpha) {
    if (!(alpha > 0.0))
        throw std::domain_error("left_integral: order must be positive");
    require_mesh(f, "left_integral");
    require_left_compatible(f, "left_integral");
    require_finite(f, "left_integral");

    const Density d = left_density(f);
    const std::vector<double> g = detail::frac_integral_grid(alpha, d, kW);
    const int n = f.n();
    const double w_out = std::max(f.weight_exp - alpha, 0.0);

    WeightedGridFunction out;
    out.mesh = f.mesh;
    out.weight_exp = w_out;
    out.side = WeightSide::left;
    out.model_exp = d.p0 + alpha;
    out.values.resize(n + 1);
    for (int j = 1; j <= n; ++j)
        out.values[j] =
            (w_out == 0.0) ? g[j] : g[j] * std::pow(f.mesh->zeta[j], w_out);
    const double lim =
        d.w[1] * gamma_fn(d.p0 + 1.0) * recip_gamma(d.p0 + 1.0 + alpha);
    out.values[0] = endpoint_limit(d.p0 + alpha + w_out, lim);
    return out;
}

WeightedGridFunction left_integral(const std::function<double(double)>& f,
                                   double alpha,
                                   std::shared_ptr<const Mesh> mesh) {
    return left_integral(WeightedGridFunction::from_function(std::move(mesh), f),
                         alpha);
}

WeightedGridFunction left_integral(const ScaledPower& f, double alpha,
                                   std::shared_ptr<const Mesh> mesh) {
    return left_integral(WeightedGridFunction::from_power(std::move(mesh), f),
                         alpha);
}

WeightedGridFunction right_integral(const WeightedGridFunction& f,
                                    double alpha) {
    if (!(alpha > 0.0))
        throw std::domain_error("right_integral: order must be positive");
    require_mesh(f, "right_integral");
    require_finite(f, "right_integral");

    const Density d = right_density(f);
    const std::vector<double> g = detail::frac_integral_grid(alpha, d, kW);
    const int n = f.n();
    const double w_in = (f.side == WeightSide::right) ? f.weight_exp : 0.0;
    const double w_out = std::max(w_in - alpha, 0.0);

    WeightedGridFunction out;
    out.mesh = f.mesh;
    out.weight_exp = w_out;
    out.side = WeightSide::right;
    out.model_exp = d.p0 + alpha;
    out.values.resize(n + 1);
    for (int j = 0; j < n; ++j)
        out.values[j] =
            (w_out == 0.0) ? g[n - j] : g[n - j] * std::pow(f.mesh->zeta_c[j], w_out);
    const double lim =
        d.w[1] * gamma_fn(d.p0 + 1.0) * recip_gamma(d.p0 + 1.0 + alpha);
    out.values[n] = endpoint_limit(d.p0 + alpha + w_out, lim);
    return out;
}

WeightedGridFunction right_integral(const std::function<double(double)>& f,
                                    double alpha,
                                    std::shared_ptr<const Mesh> mesh) {
    return right_integral(
        WeightedGridFunction::from_function(std::move(mesh), f), alpha);
}

WeightedGridFunction right_integral(const ScaledPower& f, double alpha,
                                    std::shared_ptr<const Mesh> mesh) {
    return right_integral(WeightedGridFunction::from_power(std::move(mesh), f),
                          alpha);
}

// ---- derivatives ------------------------------------------------------------

double delta_rho(const std::function<double(double)>& f, double t, double rho) {
    if (!(rho > 0.0)) throw std::domain_error("delta_rho: rho must be positive");
    const double h = std::max(std::fabs(t), 1.0) *
                     std::cbrt(std::numeric_limits<double>::epsilon());
    const double fp = (f(t + h) - f(t - h)) / (2.0 * h);
    const double v = std::pow(t, 1.0 - rho) * fp;
    if (!std::isfinite(v))
        throw std::runtime_error("delta_rho: non-finite result");
    return v;
}

double delta_rho(const std::function<double(double)>&,
                 const std::function<double(double)>& f_prime, double t,
                 double rho) {
    if (!(rho > 0.0)) throw std::domain_error("delta_rho: rho must be positive");
    const double v = std::pow(t, 1.0 - rho) * f_prime(t);
    if (!std::isfinite(v))
        throw std::runtime_error("delta_rho: non-finite result");
    return v;
}

double delta_rho(const ScaledPower& f, double t) {
    const double z = f.zeta(t);
    return f.coeff * f.exponent *
           (f.exponent == 1.0 ? 1.0 : std::pow(z, f.exponent - 1.0));
}

WeightedGridFunction left_derivative(const WeightedGridFunction& f,
                                     double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::domain_error("left_derivative: order must be in (0,1)");
    require_mesh(f, "left_derivative");
    require_left_compatible(f, "left_derivative");
    require_finite(f, "left_derivative");

    const Density d = left_density(f);
    const std::vector<double> dg = detail::frac_integral_dgrid(1.0 - alpha, d, kW);
    const int n = f.n();
    const double w_out = f.weight_exp + alpha;

    WeightedGridFunction out;
    out.mesh = f.mesh;
    out.weight_exp = w_out;
    out.side = WeightSide::left;
    out.model_exp = d.p0 - alpha;
    out.values.resize(n + 1);
    for (int j = 1; j <= n; ++j)
        out.values[j] = dg[j] * std::pow(f.mesh->zeta[j], w_out);
    // power rule limit; recip_gamma gives the exact zero when the input is
    // the kernel power zeta^{alpha-1} itself
    const double lim =
        d.w[1] * gamma_fn(d.p0 + 1.0) * recip_gamma(d.p0 + 1.0 - alpha);
    out.values[0] = endpoint_limit(d.p0 - alpha + w_out, lim);
    return out;
}

WeightedGridFunction left_derivative(
    const std::function<double(double)>& f, double alpha,
    std::shared_ptr<const Mesh> mesh,
    std::optional<std::function<double(double)>> f_prime) {
    if (!f_prime)
        return left_derivative(
            WeightedGridFunction::from_function(std::move(mesh), f), alpha);
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::domain_error("left_derivative: order must be in (0,1)");
    const double fa = f(mesh->a);
    if (!std::isfinite(fa))
        throw std::domain_error(
            "left_derivative: singular at the left endpoint; supply weighted "
            "samples instead of a derivative");
    const int n = mesh->n();
    std::vector<double> g(n + 1, kNaN);
    for (int j = 0; j <= n; ++j) {
        const double der =
            std::pow(mesh->t[j], 1.0 - mesh->rho) * (*f_prime)(mesh->t[j]);
        g[j] = der;
    }
    const double p0g = detail::estimate_p0(mesh->zeta, g);
    const Density dg = Density::modeled(mesh->zeta, g, p0g);
    const std::vector<double> I = detail::frac_integral_grid(1.0 - alpha, dg, kW);
    const double ra = recip_gamma(1.0 - alpha);

    WeightedGridFunction out;
    out.weight_exp = alpha;
    out.side = WeightSide::left;
    out.model_exp = (fa != 0.0) ? -alpha : (p0g + 1.0 - alpha);
    out.values.resize(n + 1);
    out.values[0] = fa * ra;
    for (int j = 1; j <= n; ++j)
        out.values[j] = fa * ra + I[j] * std::pow(mesh->zeta[j], alpha);
    out.mesh = std::move(mesh);
    return out;
}

WeightedGridFunction left_derivative(const ScaledPower& f, double alpha,
                                     std::shared_ptr<const Mesh> mesh) {
    return left_derivative(WeightedGridFunction::from_power(std::move(mesh), f),
                           alpha);
}

WeightedGridFunction generalized_derivative(const WeightedGridFunction& f,
                                            const ProblemParams& params) {
    params.validate();
    require_mesh(f, "generalized_derivative");
    require_left_compatible(f, "generalized_derivative");
    require_finite(f, "generalized_derivative");
    const Mesh& M = *f.mesh;
    if (std::fabs(M.a - params.a) > 1e-12 * std::max(1.0, std::fabs(params.a)) ||
        M.rho != params.rho)
        throw std::invalid_argument(
            "generalized_derivative: mesh and params disagree on (a, rho)");

    const double alpha = params.alpha;
    const double gamma = params.gamma();
    const double kappa = params.beta * (1.0 - alpha);
    const int n = f.n();
    const Density d = left_density(f);

    // stage 1: D^gamma f, by analytic differentiation of the representation
    std::vector<double> dg;
    if (gamma < 1.0) {
        dg = detail::frac_integral_dgrid(1.0 - gamma, d, kW);
    } else {
        // type beta = 1 (Caputo-style composition): plain d/dzeta of the
        // samples via nonuniform 3-point differences
        dg.assign(n + 1, kNaN);
        const auto& zs = M.zeta;
        for (int j = 1; j <= n; ++j) {
            const int jm = (j == n) ? j - 2 : j - 1;
            const double z0 = zs[jm], z1 = zs[jm + 1], z2 = zs[jm + 2];
            const double f0 = d.vals[jm], f1 = d.vals[jm + 1], f2 = d.vals[jm + 2];
            const double zj = zs[j];
            dg[j] = f0 * (2.0 * zj - z1 - z2) / ((z0 - z1) * (z0 - z2)) +
                    f1 * (2.0 * zj - z0 - z2) / ((z1 - z0) * (z1 - z2)) +
                    f2 * (2.0 * zj - z0 - z1) / ((z2 - z0) * (z2 - z1));
        }
    }

    // stage 2: the smoothing integral I^kappa
    std::vector<double> Dab;
    if (kappa == 0.0) {
        Dab = std::move(dg);
    } else {
        dg[0] = kNaN;
        const double p0dd = std::clamp(d.p0 - gamma, -0.999, 6.0);
        const Density d2 = Density::modeled(M.zeta, dg, p0dd);
        Dab = detail::frac_integral_grid(kappa, d2, kW);
    }

    const double w_out = f.weight_exp + alpha;
    WeightedGridFunction out;
    out.mesh = f.mesh;
    out.weight_exp = w_out;
    out.side = WeightSide::left;
    out.model_exp = d.p0 - alpha;
    out.values.resize(n + 1);
    for (int j = 1; j <= n; ++j)
        out.values[j] = Dab[j] * std::pow(M.zeta[j], w_out);
    // endpoint: the zeta^{gamma-1} mode is annihilated outright (the inner
    // integral is constant); otherwise the power-rule limit applies, with
    // recip_gamma absorbing the zeta^{alpha-1} zero
    if (std::fabs(d.p0 - (gamma - 1.0)) <=
        1e-12 * std::max(1.0, std::fabs(gamma - 1.0))) {
        out.values[0] = 0.0;
    } else {
        const double lim =
            d.w[1] * gamma_fn(d.p0 + 1.0) * recip_gamma(d.p0 + 1.0 - alpha);
        out.values[0] = endpoint_limit(d.p0 - alpha + w_out, lim);
    }
    return out;
}

WeightedGridFunction generalized_derivative(const ScaledPower& f,
                                            const ProblemParams& params,
                                            std::shared_ptr<const Mesh> mesh) {
    return generalized_derivative(
        WeightedGridFunction::from_power(std::move(mesh), f), params);
}

// ---- identity residuals and checks -------------------------------------------

double semigroup_residual(const WeightedGridFunction& f, double alpha,
                          double beta2) {
    const WeightedGridFunction g1 = left_integral(f, beta2);
    const WeightedGridFunction g2 = left_integral(g1, alpha);
    const WeightedGridFunction g3 = left_integral(f, alpha + beta2);
    const double wc = std::max(g2.weight_exp, g3.weight_exp);
    double r = 0.0;
    for (int j = 0; j <= f.n(); ++j) {
        const double diff =
            std::fabs(g2.value_at_weight(j, wc) - g3.value_at_weight(j, wc));
        if (std::isnan(diff)) return diff;
        r = std::max(r, diff);
    }
    return r;
}

double semigroup_residual(const std::function<double(double)>& f, double alpha,
                          double beta2, std::shared_ptr<const Mesh> mesh) {
    return semigroup_residual(
        WeightedGridFunction::from_function(std::move(mesh), f), alpha, beta2);
}

PairingSides int_by_parts_sides(const std::function<double(double)>& g,
                                const std::function<double(double)>& h,
                                double alpha,
                                std::shared_ptr<const Mesh> mesh) {
    const auto G = WeightedGridFunction::from_function(mesh, g);
    const auto H = WeightedGridFunction::from_function(mesh, h);
    const auto Ih = left_integral(H, alpha);
    const auto Ig = right_integral(G, alpha);
    const int n = mesh->n();
    std::vector<double> pl(n + 1), pr(n + 1);
    for (int j = 0; j <= n; ++j) {
        pl[j] = G.raw(j) * Ih.raw(j);
        pr[j] = H.raw(j) * Ig.raw(j);
    }
    PairingSides s;
    s.lhs = detail::integral_over(
        Density::modeled(mesh->zeta, pl, detail::estimate_p0(mesh->zeta, pl)), kW);
    s.rhs = detail::integral_over(
        Density::modeled(mesh->zeta, pr, detail::estimate_p0(mesh->zeta, pr)), kW);
    return s;
}

double int_by_parts_residual(const std::function<double(double)>& g,
                             const std::function<double(double)>& h,
                             double alpha, std::shared_ptr<const Mesh> mesh) {
    const PairingSides s = int_by_parts_sides(g, h, alpha, std::move(mesh));
    return std::fabs(s.lhs - s.rhs);
}

EndpointCheck boundary_limit(const WeightedGridFunction& f, double alpha,
                             WeightSide side) {
    if (!(alpha > 0.0))
        throw std::domain_error("boundary_limit: order must be positive");
    require_mesh(f, "boundary_limit");
    require_finite(f, "boundary_limit");
    if (side == WeightSide::left) require_left_compatible(f, "boundary_limit");

    const Density d =
        (side == WeightSide::left) ? left_density(f) : right_density(f);
    if (!(alpha + d.p0 > 0.0))
        throw std::domain_error(
            "boundary_limit: requires order > endpoint weight order");
    const double h = d.zs[1];  // distance of the adjacent node
    EndpointCheck c;
    c.value = detail::frac_integral_at(alpha, d, 1, kW);
    c.bound = std::fabs(d.w[1]) * gamma_fn(d.p0 + 1.0) *
              recip_gamma(d.p0 + 1.0 + alpha) * std::pow(h, alpha + d.p0);
    return c;
}

EndpointCheck boundary_limit(const ScaledPower& f, double alpha,
                             WeightSide side, std::shared_ptr<const Mesh> mesh) {
    return boundary_limit(WeightedGridFunction::from_power(std::move(mesh), f),
                          alpha, side);
}

double integrate(const WeightedGridFunction& f) {
    require_mesh(f, "integrate");
    require_finite(f, "integrate");
    const Density d = (f.side == WeightSide::right && f.weight_exp != 0.0)
                          ? right_density(f)
                          : left_density(f);
    return detail::integral_over(d, kW);
}

}  // namespace kfrac
