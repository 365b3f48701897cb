#include "kfrac/solver.hpp"

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

// Weighted-cell head scaled with the mesh; a fixed head loses accuracy to
// the marginal modes of the power problem as n grows.
int solver_kw(int n) { return std::max(16, n / 8); }

struct StepOutcome {
    enum Status { converged, no_root, failed };
    double x = kNaN;
    Status status = failed;
};

// Scalar collocation step for the power nonlinearity:
//   x = H + k*|x|^m sign(x),  k = c*kap.
// For m > 1, H > 0, k > 0 the increasing branch folds at
// R* = (1-1/m)(km)^{-1/(m-1)}; H beyond the fold admits no root and the
// trajectory has left the branch -- the discrete blow-up signal.
StepOutcome solve_power_step(double H, double c, double kap, double m,
                             double x0) {
    const double k = c * kap;
    if (m > 1.0 && H > 0.0 && k > 0.0) {
        const double rstar =
            (1.0 - 1.0 / m) * std::pow(k * m, -1.0 / (m - 1.0));
        if (H > rstar * (1.0 + 1e-13)) return {kNaN, StepOutcome::no_root};
    }
    double x = x0;
    for (int it = 0; it < 200; ++it) {
        const double fx = x - H - k * sgn_pow(x, m);
        const double dfx =
            (x != 0.0) ? 1.0 - k * m * std::pow(std::fabs(x), m - 1.0) : 1.0;
        double xn;
        if (std::fabs(dfx) > 1e-302)
            xn = x - fx / dfx;
        else
            xn = H + k * sgn_pow(x, m);
        if (!std::isfinite(xn)) xn = 0.5 * (x + H + k * sgn_pow(x, m));
        if (std::fabs(xn - x) <= 1e-14 * (1.0 + std::fabs(xn))) {
            x = xn;
            break;
        }
        x = xn;
    }
    const double resid = std::fabs(x - H - k * sgn_pow(x, m));
    if (std::isfinite(x) && resid <= 1e-9 * (1.0 + std::fabs(x)))
        return {x, StepOutcome::converged};
    return {kNaN, StepOutcome::no_root};
}

// Generic step: damped fixed point x <- base + c*f(t,x) (damping 0.5 when
// the updates oscillate), switching to Newton after half the budget.
StepOutcome solve_generic_step(double base, double c, const Rhs& rhs, double t,
                               double x0, double tol, int itmax) {
    double x = x0;
    double prev_dx = 0.0;
    const int picard_leg = std::max(1, itmax / 2);
    for (int it = 0; it < picard_leg; ++it) {
        const double g = base + c * rhs.f(t, x);
        if (!std::isfinite(g)) break;
        const double dx = g - x;
        if (std::fabs(dx) <= tol * (1.0 + std::fabs(g)))
            return {g, StepOutcome::converged};
        x += (dx * prev_dx < 0.0) ? 0.5 * dx : dx;
        prev_dx = dx;
    }
    for (int it = 0; it < itmax; ++it) {
        const double fv = rhs.f(t, x);
        const double F = x - base - c * fv;
        double df;
        if (rhs.dfdx) {
            df = rhs.dfdx(t, x);
        } else {
            const double h = std::max(std::fabs(x), 1.0) *
                             std::cbrt(std::numeric_limits<double>::epsilon());
            df = (rhs.f(t, x + h) - rhs.f(t, x - h)) / (2.0 * h);
        }
        const double Fp = 1.0 - c * df;
        if (!(std::fabs(Fp) > 1e-302)) break;
        const double xn = x - F / Fp;
        if (!std::isfinite(xn)) break;
        if (std::fabs(xn - x) <= tol * (1.0 + std::fabs(xn))) {
            x = xn;
            break;
        }
        x = xn;
    }
    const double resid = std::fabs(x - base - c * rhs.f(t, x));
    if (std::isfinite(x) && resid <= 1e-9 * (1.0 + std::fabs(x)))
        return {x, StepOutcome::converged};
    return {kNaN, StepOutcome::failed};
}

double zeta_to_t(double a, double rho, double z) {
    return std::pow(std::pow(a, rho) + rho * z, 1.0 / rho);
}

// Max relative defect of the exact power family in the discrete node
// equations (the certificate used when marching the family is ill-posed).
double family_certificate(const ProblemParams& p, const Mesh& M, double nu,
                          double cc) {
    const auto& zs = M.zeta;
    const int n = M.n();
    const int kw = solver_kw(n);
    const double p0 = std::clamp(p.mu + p.m * nu, -0.999, 6.0);
    std::vector<double> fv(n + 1);
    fv[0] = (p0 < 0.0) ? kInf : 0.0;
    std::vector<double> y(n + 1, kNaN);
    for (int j = 1; j <= n; ++j) {
        y[j] = cc * std::pow(zs[j], nu);
        fv[j] = p.lambda * (p.mu == 0.0 ? 1.0 : std::pow(zs[j], p.mu)) *
                sgn_pow(y[j], p.m);
    }
    const Density dens = Density::modeled(zs, fv, p0);
    double worst = 0.0;
    for (int j = 1; j <= n; ++j) {
        const auto hs = detail::node_affine(p.alpha, dens, j, kw);
        const double resid = y[j] - hs.head - hs.diag * fv[j];
        worst = std::max(worst, std::fabs(resid) / std::fabs(y[j]));
    }
    return worst;
}

}  // namespace

Rhs power_rhs(const ProblemParams& p) {
    Rhs r;
    const double lam = p.lambda, mu = p.mu, m = p.m, a = p.a, rho = p.rho;
    r.f = [lam, mu, m, a, rho](double t, double x) {
        const double z = (std::pow(t, rho) - std::pow(a, rho)) / rho;
        return lam * (mu == 0.0 ? 1.0 : std::pow(z, mu)) * sgn_pow(x, m);
    };
    r.dfdx = [lam, mu, m, a, rho](double t, double x) {
        const double z = (std::pow(t, rho) - std::pow(a, rho)) / rho;
        return lam * (mu == 0.0 ? 1.0 : std::pow(z, mu)) * m *
               std::pow(std::fabs(x), m - 1.0);
    };
    r.power = Rhs::PowerForm{lam, mu, m};
    return r;
}

const char* to_string(Classification c) {
    switch (c) {
        case Classification::global_tracked: return "global_tracked";
        case Classification::blowup: return "blowup";
        case Classification::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

SolveRun march(const ProblemParams& params, const Rhs& rhs,
               const SolveConfig& config, DatumMode mode) {
    params.validate();
    if (!rhs.f) throw std::invalid_argument("march: rhs callback is empty");
    if (!config.mesh || config.mesh->n() < 2)
        throw std::invalid_argument("march: config has no usable mesh");
    if (!(config.picard_tol > 0.0) || config.picard_max < 2 ||
        !(config.blowup_cap > 1.0))
        throw std::invalid_argument("march: bad iteration config");
    const Mesh& M = *config.mesh;
    if (std::fabs(M.a - params.a) >
            1e-12 * std::max(1.0, std::fabs(params.a)) ||
        M.rho != params.rho)
        throw std::invalid_argument("march: mesh and params disagree on (a, rho)");

    const double alpha = params.alpha;
    const double gamma = params.gamma();

    // matched-mode dispatch: the requested datum is the displayed initial
    // value of the global power family
    bool matched = false;
    double nu = 0.0, cseed = 0.0;
    if (mode != DatumMode::literal && params.m > 1.0 &&
        params.mu > -params.alpha) {
        const double mstar = blowup_threshold(params);
        if (params.m > mstar) {
            const ExactSolution es = exact_solution(params);
            if (mode == DatumMode::matched_power ||
                std::fabs(params.x_a - es.x_a) <=
                    1e-9 * std::max(1.0, std::fabs(es.x_a))) {
                matched = true;
                nu = es.nu;
                cseed = es.y.coeff;
            }
        }
    }
    if (mode == DatumMode::matched_power && !matched)
        throw std::invalid_argument(
            "march: matched mode needs the global power family (m > m*)");

    const int n = M.n();
    const auto& zs = M.zeta;
    const int kw = solver_kw(n);

    // density model of the rhs near a, taken from the canonical power
    // nonlinearity acting on the datum mode
    double p0 = matched ? params.mu + params.m * nu
                        : (gamma < 1.0 ? params.mu + params.m * (gamma - 1.0)
                                       : params.mu);
    p0 = std::clamp(p0, -0.999, 6.0);
    std::vector<double> fv(n + 1, 0.0);
    fv[0] = (p0 < 0.0) ? kInf : 0.0;
    Density dens = Density::modeled(zs, fv, p0);

    std::vector<double> x(n + 1, kNaN);
    if (gamma >= 1.0) x[0] = params.x_a;

    SolveRun run;
    run.matched = matched;
    const double rg = recip_gamma(gamma);
    for (int j = 1; j <= n; ++j) {
        const double datum =
            matched ? 0.0
                    : params.x_a * rg *
                          (gamma == 1.0 ? 1.0 : std::pow(zs[j], gamma - 1.0));
        const auto hs = detail::node_affine(alpha, dens, j, kw);
        double x0;
        if (matched)
            x0 = (j == 1) ? cseed * std::pow(zs[1], nu)
                          : x[j - 1] * std::pow(zs[j] / zs[j - 1], nu);
        else
            x0 = (j > 1 && std::isfinite(x[j - 1])) ? x[j - 1] : datum;

        StepOutcome so;
        double kap = 0.0;
        if (rhs.power) {
            kap = rhs.power->lambda *
                  (rhs.power->mu == 0.0 ? 1.0 : std::pow(zs[j], rhs.power->mu));
            so = solve_power_step(datum + hs.head, hs.diag, kap, rhs.power->m,
                                  x0);
        } else {
            so = solve_generic_step(datum + hs.head, hs.diag, rhs, M.t[j], x0,
                                    config.picard_tol, config.picard_max);
        }
        if (so.status == StepOutcome::failed) {
            run.error =
                "step iteration failed to converge at node " + std::to_string(j);
            break;
        }
        if (so.status == StepOutcome::no_root ||
            std::fabs(so.x) > config.blowup_cap) {
            run.blow_node = j;
            break;
        }
        x[j] = so.x;
        // the power path updates the density in exact zeta arithmetic; the
        // t-roundtrip would cancel near the singular end
        const double fval = rhs.power ? kap * sgn_pow(so.x, rhs.power->m)
                                      : rhs.f(M.t[j], so.x);
        dens.set_val(j, fval);
    }

    for (int j = n; j >= 0; --j)
        if (std::isfinite(x[j])) {
            run.final_norm = std::fabs(x[j]);
            break;
        }

    const double wq = 1.0 - gamma;
    std::vector<double> vals(n + 1, kNaN);
    for (int j = 1; j <= n; ++j)
        if (std::isfinite(x[j]))
            vals[j] = (wq == 0.0) ? x[j] : std::pow(zs[j], wq) * x[j];
    if (matched) {
        const double e0 = wq + nu;
        vals[0] = (e0 > 1e-12) ? 0.0 : cseed;
    } else {
        vals[0] = params.x_a * rg;
    }
    run.x = WeightedGridFunction::from_samples(
        config.mesh, std::move(vals), wq, WeightSide::left,
        matched ? nu : gamma - 1.0);
    return run;
}

WeightedGridFunction solve_ivp(const ProblemParams& params, const Rhs& rhs,
                               const SolveConfig& config, DatumMode mode) {
    SolveRun run = march(params, rhs, config, mode);
    if (!run.error.empty()) throw std::runtime_error("solve_ivp: " + run.error);
    if (run.blow_node) {
        const int j = *run.blow_node;
        throw std::runtime_error(
            "solve_ivp: blow-up before the end of the mesh (node " +
            std::to_string(j) + ", t = " + std::to_string(config.mesh->t[j]) +
            ", |x| last = " + std::to_string(run.final_norm) + ")");
    }
    return run.x;
}

std::vector<double> consistency_residual(const ProblemParams& params,
                                         const Rhs& rhs,
                                         const SolveRun& run) {
    if (!run.x.mesh)
        throw std::invalid_argument("consistency_residual: run has no mesh");
    const Mesh& M = *run.x.mesh;
    const int n = M.n();
    const auto& zs = M.zeta;
    const double gamma = params.gamma();
    const int kw = solver_kw(n);

    double p0;
    if (run.matched) {
        const ExactSolution es = exact_solution(params);
        p0 = std::clamp(params.mu + params.m * es.nu, -0.999, 6.0);
    } else {
        p0 = (gamma < 1.0)
                 ? std::clamp(params.mu + params.m * (gamma - 1.0), -0.999, 6.0)
                 : params.mu;
    }

    int last = 0;
    std::vector<double> fv(n + 1, kNaN);
    fv[0] = (p0 < 0.0) ? kInf : 0.0;
    std::vector<double> xj(n + 1, kNaN);
    for (int j = 1; j <= n; ++j) {
        const double x = run.x.raw(j);
        if (!std::isfinite(x)) break;
        xj[j] = x;
        fv[j] = rhs.power
                    ? rhs.power->lambda *
                          (rhs.power->mu == 0.0
                               ? 1.0
                               : std::pow(zs[j], rhs.power->mu)) *
                          sgn_pow(x, rhs.power->m)
                    : rhs.f(M.t[j], x);
        last = j;
    }
    for (int j = last + 1; j <= n; ++j) fv[j] = 0.0;
    const Density dens = Density::modeled(zs, fv, p0);

    std::vector<double> res(n + 1, kNaN);
    res[0] = 0.0;
    const double rg = recip_gamma(gamma);
    for (int j = 1; j <= last; ++j) {
        const double datum =
            run.matched ? 0.0
                        : params.x_a * rg *
                              (gamma == 1.0 ? 1.0
                                            : std::pow(zs[j], gamma - 1.0));
        const double I = detail::frac_integral_at(params.alpha, dens, j, kw);
        res[j] = std::fabs(xj[j] - datum - I) / std::max(1.0, std::fabs(xj[j]));
    }
    return res;
}

BlowupReport detect_blowup(const ProblemParams& params,
                           const SolveConfig& config) {
    BlowupReport rep;
    rep.params = params;
    if (!(params.x_a > 0.0))
        throw std::invalid_argument(
            "detect_blowup: requires a positive initial datum");
    const double mstar = blowup_threshold(params);  // checks mu > -alpha
    if (!(params.m > 1.0))
        throw std::domain_error(
            "detect_blowup: nonlinearity power must exceed 1");
    if (!config.mesh || config.mesh->n() < 8)
        throw std::invalid_argument("detect_blowup: config has no usable mesh");
    if (!(config.horizon > params.a))
        throw std::invalid_argument(
            "detect_blowup: horizon must exceed the left endpoint");

    const int n = config.mesh->n();
    const double q = config.mesh->q;
    const double a = params.a, rho = params.rho;
    const Rhs rhs = power_rhs(params);
    rep.mesh_levels_used = 2;

    auto level_config = [&](double T, int nn) {
        SolveConfig c = config;
        c.mesh = std::make_shared<Mesh>(
            Mesh::make(a, T, rho, nn, q, Grading::toward_a));
        return c;
    };

    // ---- global power family ----
    bool matched_family = false;
    ExactSolution es;
    if (params.m > mstar) {
        es = exact_solution(params);
        matched_family = std::fabs(params.x_a - es.x_a) <=
                         1e-9 * std::max(1.0, std::fabs(es.x_a));
    }
    if (matched_family) {
        const double T = config.horizon;
        bool tracked = true;
        double worst_track = 0.0;
        for (int L = 0; L < 2 && tracked; ++L) {
            const SolveConfig cl = level_config(T, n << L);
            const SolveRun run = march(params, rhs, cl, DatumMode::matched_power);
            if (run.blow_node || !run.error.empty()) {
                tracked = false;
                break;
            }
            // weighted relative error against the family
            const auto& zs = cl.mesh->zeta;
            const double wq = 1.0 - params.gamma();
            double num = 0.0, den = 0.0;
            for (int j = 1; j <= cl.mesh->n(); ++j) {
                const double yw = es.y.coeff * std::pow(zs[j], wq + es.nu);
                num = std::max(num, std::fabs(run.x.values[j] - yw));
                den = std::max(den, std::fabs(yw));
            }
            worst_track = std::max(worst_track, num / den);
            tracked = worst_track <= 1e-2;
            rep.final_norm = run.final_norm;
        }
        if (tracked) {
            rep.classification = Classification::global_tracked;
            rep.note = "tracked the global power family on both levels (rel " +
                       std::to_string(worst_track) + ")";
            return rep;
        }
        // marching the family can be ill-posed (the contraction that damps
        // the seed error reverses); certify the family in the node equations
        double worst_cert = 0.0;
        for (int L = 0; L < 2; ++L) {
            const SolveConfig cl = level_config(T, n << L);
            worst_cert = std::max(
                worst_cert,
                family_certificate(params, *cl.mesh, es.nu, es.y.coeff));
        }
        if (worst_cert <= 1e-4) {
            rep.classification = Classification::global_tracked;
            rep.note =
                "march does not track (ill-conditioned); exact family "
                "certified in the node equations, max rel defect " +
                std::to_string(worst_cert);
            const double Z = (std::pow(config.horizon, rho) - std::pow(a, rho)) / rho;
            rep.final_norm = std::fabs(es.y.coeff) * std::pow(Z, es.nu);
        } else {
            rep.classification = Classification::inconclusive;
            rep.note = "family neither tracked nor certified (defect " +
                       std::to_string(worst_cert) + ")";
        }
        return rep;
    }

    // ---- literal march with adaptive horizon ----
    const double Zfull = (std::pow(config.horizon, rho) - std::pow(a, rho)) / rho;
    double Zcur = Zfull;
    int rounds = 0;
    for (int round = 0; round < 4; ++round, ++rounds) {
        const double T = zeta_to_t(a, rho, Zcur);
        SolveRun runs[2];
        for (int L = 0; L < 2; ++L)
            runs[L] = march(params, rhs, level_config(T, n << L),
                            DatumMode::literal);
        for (int L = 0; L < 2; ++L)
            if (!runs[L].error.empty()) {
                rep.classification = Classification::inconclusive;
                rep.error = runs[L].error;
                return rep;
            }
        const bool b0 = runs[0].blow_node.has_value();
        const bool b1 = runs[1].blow_node.has_value();
        if (!b0 && !b1) {
            rep.classification = Classification::inconclusive;
            rep.final_norm = runs[1].final_norm;
            rep.note =
                "no cap crossing before the horizon; raise horizon or cap";
            return rep;
        }
        const double zb1 =
            b1 ? runs[1].x.mesh->zeta[*runs[1].blow_node] : Zcur;
        if (round < 3 && zb1 < Zcur / 5.0) {
            // blow-up sits in the first fifth of the scan: shrink so the
            // mesh resolves it, and re-run both levels
            Zcur = 2.5 * zb1;
            continue;
        }
        if (b0 != b1) {
            rep.classification = Classification::inconclusive;
            rep.note = "mesh levels disagree on cap crossing";
            rep.final_norm = runs[1].final_norm;
            return rep;
        }
        const double zb0 = runs[0].x.mesh->zeta[*runs[0].blow_node];
        const double agree = std::fabs(zb0 - zb1) / zb1;
        if (agree > 0.05) {
            rep.classification = Classification::inconclusive;
            rep.note = "blow-node estimates disagree by " +
                       std::to_string(100.0 * agree) + "%";
            rep.final_norm = runs[1].final_norm;
            return rep;
        }
        double zext = 2.0 * zb1 - zb0;  // Richardson across the two levels
        zext = std::clamp(zext, std::min(zb0, zb1) * 0.5, Zfull);
        rep.classification = Classification::blowup;
        rep.t_blow_estimate = std::min(zeta_to_t(a, rho, zext), config.horizon);
        rep.final_norm = runs[1].final_norm;
        if (rounds > 0)
            rep.note = "horizon adapted " + std::to_string(rounds) +
                       " time(s) to resolve the blow-up region";
        return rep;
    }
    rep.classification = Classification::inconclusive;
    rep.note = "horizon adaptation did not settle";
    return rep;
}

std::vector<BlowupReport> sweep(const ProblemParams& params_base,
                                const std::vector<double>& m_values,
                                const std::vector<double>& mu_values,
                                const SolveConfig& config, int jobs) {
    struct Cell {
        double m, mu;
    };
    std::vector<Cell> cells;
    cells.reserve(m_values.size() * mu_values.size());
    for (double m : m_values)
        for (double mu : mu_values) cells.push_back({m, mu});
    std::vector<BlowupReport> out(cells.size());

    auto work = [&](std::size_t i) {
        ProblemParams p = params_base;
        p.m = cells[i].m;
        p.mu = cells[i].mu;
        BlowupReport rep;
        rep.params = p;
        try {
            const double mstar = blowup_threshold(p);
            if (p.m > mstar) p.x_a = exact_solution(p).x_a;
            rep = detect_blowup(p, config);
        } catch (const std::exception& e) {
            rep.params = p;
            rep.classification = Classification::inconclusive;
            rep.error = e.what();
        }
        out[i] = std::move(rep);
    };

    if (jobs <= 1 || cells.size() <= 1) {
        for (std::size_t i = 0; i < cells.size(); ++i) work(i);
        return out;
    }
    std::atomic<std::size_t> next{0};
    const int nworkers =
        static_cast<int>(std::min<std::size_t>(jobs, cells.size()));
    std::vector<std::future<void>> pool;
    pool.reserve(nworkers);
    for (int w = 0; w < nworkers; ++w)
        pool.push_back(std::async(std::launch::async, [&]() {
            for (std::size_t i = next.fetch_add(1); i < cells.size();
                 i = next.fetch_add(1))
                work(i);
        }));
    for (auto& f : pool) f.get();
    return out;
}

}  // namespace kfrac
