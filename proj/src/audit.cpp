#include "kfrac/audit.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <limits>
#include <stdexcept>

#include "kfrac/detail/engine.hpp"
#include "kfrac/special.hpp"

namespace kfrac {

namespace {

using detail::Density;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kW = detail::kDefaultWeightedCells;

struct RampNodes {
    std::vector<double> phi;
    std::vector<double> dphi;  // d(phi)/d(zeta), zeta = t - a
};

// Node values from the stable right-end complement: v = (T - t)/(T - theta T)
// computed as zeta_c / W keeps full relative accuracy where phi underflows.
RampNodes ramp_on_mesh(const Mesh& M, const TestFunction& tf) {
    const int n = M.n();
    const double zth = tf.plateau_end() - tf.a;
    const double W = M.length() - zth;
    const double lam = tf.sharpening;
    RampNodes r{std::vector<double>(n + 1), std::vector<double>(n + 1)};
    for (int j = 0; j <= n; ++j) {
        const double v = std::min(M.zeta_c[j] / W, 1.0);
        const double s = v * v * (3.0 - 2.0 * v);
        const double base = -6.0 * std::max(1.0 - v, 0.0) * v / W;
        if (lam == 1.0) {
            r.phi[j] = s;
            r.dphi[j] = base;
        } else {
            r.phi[j] = std::pow(s, lam);
            r.dphi[j] = (base == 0.0) ? 0.0 : lam * std::pow(s, lam - 1.0) * base;
        }
    }
    r.dphi[n] = 0.0;
    return r;
}

void run_jobs(std::size_t count, int jobs,
              const std::function<void(std::size_t)>& work) {
    if (jobs <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) work(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    const int nworkers = static_cast<int>(std::min<std::size_t>(jobs, count));
    std::vector<std::future<void>> pool;
    pool.reserve(nworkers);
    for (int w = 0; w < nworkers; ++w)
        pool.push_back(std::async(std::launch::async, [&]() {
            for (std::size_t i = next.fetch_add(1); i < count;
                 i = next.fetch_add(1))
                work(i);
        }));
    for (auto& f : pool) f.get();
}

}  // namespace

double TestFunction::phi(double t) const {
    const double W = T - theta * T;
    const double v = std::clamp((T - t) / W, 0.0, 1.0);
    const double s = v * v * (3.0 - 2.0 * v);
    return sharpening == 1.0 ? s : std::pow(s, sharpening);
}

double TestFunction::phi_prime(double t) const {
    const double W = T - theta * T;
    const double v = (T - t) / W;
    if (v <= 0.0 || v >= 1.0) return 0.0;
    const double base = -6.0 * (1.0 - v) * v / W;
    if (sharpening == 1.0) return base;
    const double s = v * v * (3.0 - 2.0 * v);
    return sharpening * std::pow(s, sharpening - 1.0) * base;
}

double TestFunction::delta_phi(double t, double rho) const {
    const double dp = phi_prime(t);
    return (rho == 1.0 || dp == 0.0) ? dp : std::pow(t, 1.0 - rho) * dp;
}

double TestFunction::ramp_quotient(double t, double m) const {
    const double dp = phi_prime(t);
    if (dp == 0.0) return 0.0;
    return std::fabs(dp) / std::pow(phi(t), 1.0 / m);
}

TestFunction build_test_function(double theta, double T, double a) {
    if (!(theta > 0.0) || theta > 0.5)
        throw std::invalid_argument("test function: theta must lie in (0, 1/2]");
    if (!(T > 0.0) || !(a < theta * T))
        throw std::invalid_argument(
            "test function: the plateau must reach past the left endpoint "
            "(need a < theta*T)");
    TestFunction tf;
    tf.theta = theta;
    tf.T = T;
    tf.a = a;
    return tf;
}

YoungSplit young_split(double phi_val, double eta, double m) {
    YoungSplit ys;
    const double mp = m / (m - 1.0);
    ys.product = phi_val * eta;
    ys.bound = std::pow(phi_val, m) / m + std::pow(eta, mp) / mp;
    ys.ok = ys.product <= ys.bound + 1e-14;
    return ys;
}

double supersolution_scale(const ProblemParams& params, double zeta_max) {
    params.validate();
    if (!(params.m > 1.0))
        throw std::domain_error("supersolution: needs m > 1");
    if (!(zeta_max > 0.0))
        throw std::invalid_argument("supersolution: zeta_max must be positive");
    const double ga = params.gamma();
    const double ig = recip_gamma(1.0 - params.alpha) / params.lambda;
    // minimize zeta^{-alpha-mu} (zeta^{gamma-1}+1)^{-m} / (lambda Gamma(1-alpha))
    // over a log-spaced probe of (0, zeta_max]
    double fmin = kInf;
    const int N = 4000;
    const double lo = std::log(1e-8), hi = std::log(zeta_max);
    for (int i = 0; i <= N; ++i) {
        const double z = std::exp(lo + (hi - lo) * i / N);
        const double F = std::pow(z, -params.alpha - params.mu) *
                         std::pow(std::pow(z, ga - 1.0) + 1.0, -params.m) * ig;
        fmin = std::min(fmin, F);
    }
    if (!(fmin > 0.0) || !std::isfinite(fmin))
        throw std::domain_error("supersolution: no positive margin on the probe");
    return std::pow(0.5 * fmin, 1.0 / (params.m - 1.0));
}

WeightedGridFunction make_supersolution(const ProblemParams& params,
                                        std::shared_ptr<const Mesh> mesh,
                                        double scale) {
    if (!mesh) throw std::invalid_argument("supersolution: mesh required");
    const double ga = params.gamma();
    const int n = mesh->n();
    std::vector<double> w(n + 1);
    for (int j = 0; j <= n; ++j)
        w[j] = scale * (1.0 + std::pow(mesh->zeta[j], 1.0 - ga));
    return WeightedGridFunction::from_samples(std::move(mesh), std::move(w),
                                              1.0 - ga, WeightSide::left,
                                              ga - 1.0);
}

AuditReport audit_inequality_chain(const WeightedGridFunction& x,
                                   const ProblemParams& params,
                                   const TestFunction& tf) {
    params.validate();
    if (params.rho != 1.0)
        throw std::domain_error(
            "audit: the chain is evaluated at rho == 1 (the normalized tail "
            "constant relies on the linear substitute coordinate)");
    const double mstar = blowup_threshold(params);  // validates mu > -alpha
    if (!(params.m > 1.0))
        throw std::domain_error("audit: nonlinearity power must exceed 1");
    if (params.m >= mstar)
        throw std::domain_error(
            "audit: integrability fails for m >= (1+mu)/(1-alpha); the "
            "right-hand side need not exist and is not quadratured");
    const double ga = params.gamma();
    if (ga >= 1.0)
        throw std::domain_error(
            "audit: needs beta < 1 so the weighted mode zeta^{gamma-1} is a "
            "genuine singular mode");
    if (!x.mesh || x.side != WeightSide::left)
        throw std::invalid_argument("audit: x must be a left-weighted grid function");
    const Mesh& M = *x.mesh;
    if (std::fabs(M.a - params.a) > 1e-12 * std::max(1.0, std::fabs(params.a)) ||
        M.rho != 1.0)
        throw std::invalid_argument("audit: mesh and params disagree on (a, rho)");
    if (std::fabs(M.b - tf.T) > 1e-9 * tf.T ||
        std::fabs(tf.a - params.a) > 1e-12 * std::max(1.0, std::fabs(params.a)))
        throw std::invalid_argument("audit: mesh must span the [a, T] of the test function");

    const int n = M.n();
    const auto& zs = M.zeta;
    const double Z = M.length();
    const double al = params.alpha;
    const double kap = params.beta * (1.0 - al);
    const double m = params.m, mp = params.m_conj(), mu = params.mu;
    const double zth = tf.plateau_end() - params.a;

    AuditReport rep;
    rep.T = tf.T;
    rep.theta = tf.theta;

    const RampNodes ramp = ramp_on_mesh(M, tf);

    // raw samples of x and its density with the leading model
    std::vector<double> xv(n + 1);
    for (int j = 0; j <= n; ++j) xv[j] = x.raw(j);
    const double p0x = x.model_exp ? *x.model_exp : -x.weight_exp;
    const Density dens_x =
        (x.model_exp && *x.model_exp != -x.weight_exp)
            ? Density::modeled(zs, xv, std::clamp(p0x, -0.999, 6.0))
            : Density::from_weighted(zs, x.values, -x.weight_exp);

    // ---- weak-form left side: int phi * (D^{alpha,beta} x) dzeta ----
    // Two-stage derivative. When x carries the annihilated mode exactly
    // (model zeta^{gamma-1}), the differentiated transform is driven by the
    // next mode -- for the canonical supersolution that is the constant, so
    // the intermediate behaves like zeta^{-gamma} and D x like zeta^{-alpha}.
    const bool annihilated = std::fabs(p0x - (ga - 1.0)) <= 1e-12;
    const double p0dd =
        annihilated ? -ga : std::clamp(p0x - ga, -0.999, 6.0);
    std::vector<double> dd = detail::frac_integral_dgrid(1.0 - ga, dens_x);
    dd[0] = (p0dd < 0.0) ? kInf : 0.0;
    std::vector<double> Dx;
    if (kap > 0.0) {
        Dx = detail::frac_integral_grid(kap, Density::modeled(zs, dd, p0dd));
    } else {
        Dx = dd;
        Dx[0] = 0.0;
    }
    const double p0Dx = std::clamp(kap + p0dd, -0.999, 6.0);
    std::vector<double> li(n + 1, 0.0);
    for (int j = 1; j <= n; ++j) li[j] = ramp.phi[j] * Dx[j];
    rep.lhs = detail::integral_over(Density::modeled(zs, li, p0Dx), kW);

    // ---- right side: int lambda zeta^mu |x|^m phi dzeta ----
    const double p0r = mu + m * p0x;
    if (p0r <= -1.0)
        throw std::domain_error(
            "audit: integrability of the right side fails for this x "
            "(integrand steeper than 1/zeta)");
    std::vector<double> ri(n + 1, 0.0);
    for (int j = 1; j <= n; ++j)
        ri[j] = params.lambda * std::pow(zs[j], mu) *
                std::pow(std::fabs(xv[j]), m) * ramp.phi[j];
    rep.rhs = detail::integral_over(
        Density::modeled(zs, ri, std::clamp(p0r, -0.999, 6.0)), kW);

    // ---- pivot functional, both routes ----
    // gx = I^{1-gamma} x is bounded; products against it need no model.
    const std::vector<double> gx = detail::frac_integral_grid(1.0 - ga, dens_x);
    std::vector<double> rz(n + 1);
    for (int j = 0; j <= n; ++j) rz[j] = M.zeta_c[n - j];

    std::vector<double> dR(n + 1);
    if (kap > 0.0) {
        std::vector<double> rv(n + 1);
        for (int j = 0; j <= n; ++j) rv[j] = ramp.phi[n - j];
        const double p0r1 = detail::estimate_p0(rz, rv);
        const std::vector<double> ddr = detail::frac_integral_dgrid(
            kap, Density::modeled(rz, rv, p0r1));
        for (int j = 0; j <= n; ++j) dR[j] = -ddr[n - j];
    } else {
        dR = ramp.dphi;
    }
    dR[0] = 0.0;  // plateau: the transform is flat at the left end
    dR[n] = 0.0;  // reflected origin slot (no one-sided derivative there)
    std::vector<double> l1(n + 1);
    for (int j = 0; j <= n; ++j) l1[j] = gx[j] * (-dR[j]);
    rep.pivot = detail::integral_over(Density::modeled(zs, l1, 0.0), kW);

    std::vector<double> Rp(n + 1);
    if (kap > 0.0) {
        std::vector<double> rv2(n + 1), av(n + 1);
        for (int j = 0; j <= n; ++j) {
            rv2[j] = ramp.dphi[n - j];
            av[j] = std::fabs(rv2[j]);
        }
        const double p0r2 = detail::estimate_p0(rz, av);
        const std::vector<double> g2 = detail::frac_integral_grid(
            kap, Density::modeled(rz, rv2, p0r2));
        for (int j = 0; j <= n; ++j) Rp[j] = g2[n - j];
    } else {
        Rp = ramp.dphi;
    }
    std::vector<double> l2(n + 1);
    for (int j = 0; j <= n; ++j) l2[j] = gx[j] * Rp[j];
    rep.pivot_alt = -detail::integral_over(Density::modeled(zs, l2, 0.0), kW);

    // ---- normalized tail constant on [theta, 1] ----
    // quotient |phi'|/phi^{1/m} in the complement variable v:
    //   (6 lam / W) * (1-v) * v^{p0q} * (3-2v)^{eq},
    // p0q = 2*lam*(1-1/m) - 1 (> -1 for every m > 1), eq = lam*(1-1/m) - 1.
    const double lam_tf = tf.sharpening;
    const double p0q = 2.0 * lam_tf * (1.0 - 1.0 / m) - 1.0;
    const double eq = lam_tf * (1.0 - 1.0 / m) - 1.0;
    {
        const double Wc = 1.0 - tf.theta;
        const double qq = M.q;
        std::vector<double> s_(n + 1), w_(n + 1), v_(n + 1), psi(n + 1);
        for (int j = 0; j <= n; ++j) {
            const double u = static_cast<double>(j) / n;
            const double A = std::pow(u, qq), B = std::pow(1.0 - u, qq);
            w_[j] = A / (A + B);
            v_[j] = B / (A + B);
            s_[j] = Wc * w_[j];
            psi[j] = (6.0 * lam_tf / Wc) * w_[j] * std::pow(v_[j], p0q) *
                     std::pow(3.0 - 2.0 * v_[j], eq);
        }
        std::vector<double> rzc(n + 1), rpsi(n + 1);
        for (int j = 0; j <= n; ++j) {
            rzc[j] = Wc * v_[n - j];
            rpsi[j] = psi[n - j];
        }
        const std::vector<double> gci = detail::frac_integral_grid(
            1.0 - al, Density::modeled(rzc, rpsi, p0q));
        std::vector<double> gmp(n + 1);
        for (int j = 0; j <= n; ++j) gmp[j] = std::pow(gci[n - j], mp);
        const double pref_c =
            std::pow(std::max(1.0, std::pow(tf.theta, mu / m)), mp) *
            std::pow(recip_gamma(1.0 - al), mp);
        rep.tail_constant =
            pref_c * detail::integral_over(Density::modeled(s_, gmp, 0.0), kW);
    }
    rep.tail_bound = rep.tail_constant * std::pow(zth, -mu * mp / m);

    // ---- pointwise Young check on the ramp ----
    {
        const double Wr = Z - zth;
        std::vector<double> quot(n + 1);
        for (int j = 0; j <= n; ++j) {
            const double v = std::min(M.zeta_c[j] / Wr, 1.0);
            const double up = std::max(1.0 - v, 0.0);
            quot[j] = (up == 0.0)
                          ? 0.0
                          : (6.0 * lam_tf / Wr) * up * std::pow(v, p0q) *
                                std::pow(3.0 - 2.0 * v, eq);
        }
        std::vector<double> rquot(n + 1);
        for (int j = 0; j <= n; ++j) rquot[j] = quot[n - j];
        const std::vector<double> gyi = detail::frac_integral_grid(
            1.0 - al, Density::modeled(rz, rquot, p0q));
        const double pref_y = std::max(1.0, std::pow(tf.theta, mu / m)) *
                              std::pow(Z, -mu / m);
        rep.young_ok = true;
        for (int j = 1; j < n; ++j) {
            if (!(zs[j] > zth)) continue;
            const double uy = std::fabs(xv[j]) *
                              std::pow(ramp.phi[j], 1.0 / m) *
                              std::pow(zs[j], mu / m);
            const double vy = pref_y * gyi[n - j];
            if (!young_split(uy, vy, m).ok) {
                rep.young_ok = false;
                break;
            }
        }
    }

    rep.directions_ok = rep.lhs >= rep.rhs * (1.0 - 1e-6) &&
                        rep.pivot >= rep.rhs * (1.0 - 1e-6) &&
                        rep.rhs <= rep.tail_bound * (1.0 + 1e-6);
    return rep;
}

AuditReport audit_inequality_chain(const ScaledPower& x,
                                   const ProblemParams& params,
                                   const TestFunction& tf,
                                   std::shared_ptr<const Mesh> mesh) {
    if (!mesh) throw std::invalid_argument("audit: mesh required");
    if (x.is_zero()) {
        const int nn = mesh->n();
        auto xz = WeightedGridFunction::from_samples(
            std::move(mesh), std::vector<double>(nn + 1, 0.0));
        return audit_inequality_chain(xz, params, tf);
    }
    const double w = std::max(0.0, -x.exponent);
    return audit_inequality_chain(
        WeightedGridFunction::from_power(std::move(mesh), x, w), params, tf);
}

std::vector<AuditReport> vanishing_bound_trace(
    const ProblemParams& params, const std::vector<double>& T_values,
    double theta, int n, double q, int jobs) {
    params.validate();
    if (params.rho != 1.0)
        throw std::domain_error("audit trace: rho == 1 required");
    if (T_values.empty())
        throw std::invalid_argument("audit trace: need at least one horizon");
    for (std::size_t i = 1; i < T_values.size(); ++i)
        if (!(T_values[i] > T_values[i - 1]))
            throw std::invalid_argument("audit trace: horizons must increase");
    if (n < 8) throw std::invalid_argument("audit trace: mesh too coarse");

    // one scale serves every horizon: size the margin at the largest one
    const double scale =
        supersolution_scale(params, T_values.back() - params.a);

    std::vector<AuditReport> out(T_values.size());
    run_jobs(T_values.size(), jobs, [&](std::size_t i) {
        const double T = T_values[i];
        auto mesh = std::make_shared<Mesh>(
            Mesh::make(params.a, T, 1.0, n, q, Grading::both));
        const TestFunction tf = build_test_function(theta, T, params.a);
        AuditReport r = audit_inequality_chain(
            make_supersolution(params, mesh, scale), params, tf);
        r.scale = scale;
        if (params.mu < 0.0) {
            // the decaying form holds with a different constant; report the
            // envelope with the chain's constant and assert only the slope
            const double mp = params.m_conj();
            r.tail_bound = r.tail_constant *
                           std::pow(T - params.a, -mp - params.mu * mp / params.m);
            r.directions_ok = r.lhs >= r.rhs * (1.0 - 1e-6) &&
                              r.pivot >= r.rhs * (1.0 - 1e-6);
        }
        out[i] = r;
    });
    return out;
}

}  // namespace kfrac
