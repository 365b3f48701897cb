// Acceptance gate: one line per criterion, [PASS]/[FAIL], nonzero exit on any
// failure. Tolerances are pinned here and nowhere else; every number printed
// is measured, not assumed.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "kfrac/audit.hpp"
#include "kfrac/core.hpp"
#include "kfrac/mesh.hpp"
#include "kfrac/operators.hpp"
#include "kfrac/solver.hpp"
#include "kfrac/special.hpp"

using kfrac::Grading;
using kfrac::Mesh;
using kfrac::ProblemParams;
using kfrac::ScaledPower;
using kfrac::WeightedGridFunction;
using kfrac::WeightSide;

namespace {

int g_failures = 0;

void report(int id, const char* name, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %d (%s): %s\n", pass ? "PASS" : "FAIL", id, name,
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::shared_ptr<Mesh> mk(double a, double b, double rho, int n, double q,
                         Grading g = Grading::toward_a) {
    return std::make_shared<Mesh>(Mesh::make(a, b, rho, n, q, g));
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

std::vector<int> probes(int n) {
    std::vector<int> js;
    for (int k = 1; k <= 10; ++k)
        js.push_back(static_cast<int>(std::llround(n * (k / 11.0))));
    return js;
}

// ---- 1: closed-form accuracy of the left integral over the 27-point grid ---
void criterion_1() {
    const auto t0 = std::chrono::steady_clock::now();
    const int n = 4096;
    double worst = 0.0;
    for (double al : {0.25, 0.5, 0.75})
        for (double sg : {0.5, 1.0, 2.0})
            for (double rho : {0.5, 1.0, 2.0}) {
                const double b = std::pow(1.0 + rho, 1.0 / rho);
                auto mesh = mk(1.0, b, rho, n, 3.0);
                const ScaledPower f{1.0, sg - 1.0, 1.0, rho};
                const auto g = kfrac::left_integral(f, al, mesh);
                const auto closed = kfrac::power_integral_closed(f, al);
                for (int j : probes(n)) {
                    const double want = closed.at_zeta(mesh->zeta[j]);
                    worst = std::max(
                        worst, std::fabs(g.raw(j) - want) / std::fabs(want));
                }
            }
    const double dt = seconds_since(t0);
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "27 cases x 10 nodes, max rel err %.3e (tol 1e-4), %.1f s "
                  "(budget 60 s)",
                  worst, dt);
    report(1, "integral power oracle", worst <= 1e-4 && dt <= 60.0, buf);
}

// ---- 2: annihilation of the kernel power by the matching derivative --------
void criterion_2() {
    const int n = 4096;
    double worst = 0.0;
    for (double al : {0.25, 0.5, 0.75})
        for (double rho : {0.5, 1.0, 2.0}) {
            const double b = std::pow(1.0 + rho, 1.0 / rho);
            auto mesh = mk(1.0, b, rho, n, 3.0);
            const auto d = kfrac::left_derivative(
                ScaledPower{1.0, al - 1.0, 1.0, rho}, al, mesh);
            for (int j = 1; j < n; ++j)
                worst = std::max(worst, std::fabs(d.values[j]));
        }
    char buf[120];
    std::snprintf(buf, sizeof buf,
                  "9 cases, max weighted magnitude %.3e (tol 1e-4)", worst);
    report(2, "kernel annihilation", worst <= 1e-4, buf);
}

// ---- 3: semigroup property --------------------------------------------------
void criterion_3() {
    const int n = 4096;
    auto mesh = mk(1.0, 2.0, 1.0, n, 3.0);
    double worst = 0.0;
    for (auto [al, b2] : {std::pair{0.3, 0.4}, std::pair{0.25, 0.5}}) {
        worst = std::max(worst, kfrac::semigroup_residual(
                                    [](double) { return 1.0; }, al, b2, mesh));
        const auto f = WeightedGridFunction::from_power(
            mesh, ScaledPower{1.0, 0.5, 1.0, 1.0});
        worst = std::max(worst, kfrac::semigroup_residual(f, al, b2));
    }
    char buf[120];
    std::snprintf(buf, sizeof buf, "4 cases, max residual %.3e (tol 1e-5)",
                  worst);
    report(3, "semigroup", worst <= 1e-5, buf);
}

// ---- 4: integration by parts ------------------------------------------------
void criterion_4() {
    const int n = 4096;
    auto one = [](double) { return 1.0; };
    double worst_resid = 0.0, worst_side = 0.0;
    const double closed = 0.7522527780636751;  // 1/Gamma(2.5)
    for (double rho : {1.0, 2.0}) {
        auto mesh = mk(1.0, 2.0, rho, n, 3.0, Grading::both);
        const auto sides = kfrac::int_by_parts_sides(one, one, 0.5, mesh);
        worst_resid = std::max(worst_resid, std::fabs(sides.lhs - sides.rhs));
        if (rho == 1.0) {
            worst_side = std::max({worst_side,
                                   std::fabs(sides.lhs - closed) / closed,
                                   std::fabs(sides.rhs - closed) / closed});
        }
    }
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "residual %.3e (tol 1e-6), sides vs 1/Gamma(2.5) %.3e (tol "
                  "1e-5)",
                  worst_resid, worst_side);
    report(4, "integration by parts", worst_resid <= 1e-6 && worst_side <= 1e-5,
           buf);
}

// ---- 5: generalized-derivative power rule -----------------------------------
void criterion_5() {
    const int n = 4096;
    auto mesh = mk(1.0, 2.0, 1.0, n, 3.0);
    double worst_rel = 0.0, worst_zero = 0.0;
    for (auto [al, be] : {std::pair{0.5, 0.5}, std::pair{0.7, 0.3}}) {
        ProblemParams p;
        p.alpha = al;
        p.beta = be;
        const double ga = p.gamma();
        for (double xi : {ga, ga + 0.25, 2.0}) {
            const ScaledPower f{1.0, xi - 1.0, 1.0, 1.0};
            const auto d = kfrac::generalized_derivative(f, p, mesh);
            if (xi == ga) {
                for (int j = 1; j < n; ++j)
                    worst_zero = std::max(worst_zero, std::fabs(d.values[j]));
            } else {
                const auto closed = kfrac::power_hilfer_closed(f, p);
                for (int j : probes(n)) {
                    const double want = closed.at_zeta(mesh->zeta[j]);
                    worst_rel = std::max(
                        worst_rel, std::fabs(d.raw(j) - want) / std::fabs(want));
                }
            }
        }
    }
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "power cases max rel %.3e (tol 1e-4), xi=gamma magnitude "
                  "%.3e (tol 1e-4)",
                  worst_rel, worst_zero);
    report(5, "generalized derivative oracle",
           worst_rel <= 1e-4 && worst_zero <= 1e-4, buf);
}

// ---- 6: exact-solution regression and convergence order ---------------------
void criterion_6() {
    ProblemParams p;  // alpha=0.5, beta=0.5, rho=1, a=1, mu=0, m=3, lambda=1
    const auto es = kfrac::exact_solution(p);
    p.x_a = es.x_a;
    const kfrac::Rhs rhs = kfrac::power_rhs(p);

    std::vector<double> errs;
    for (int n : {512, 1024, 2048}) {
        kfrac::SolveConfig cfg;
        cfg.mesh = mk(1.0, 2.0, 1.0, n, 3.0);
        cfg.horizon = 2.0;
        const auto run = kfrac::march(p, rhs, cfg);
        if (!run.error.empty() || run.blow_node) {
            report(6, "exact-solution regression", false,
                   "march failed: " + (run.error.empty() ? "blow-up" : run.error));
            return;
        }
        // weighted samples of the family at weight 1-gamma are the constant c
        double worst = 0.0;
        for (int j = 0; j <= n; ++j)
            worst = std::max(worst, std::fabs(run.x.values[j] - es.y.coeff) /
                                        es.y.coeff);
        errs.push_back(worst);
    }
    const double order01 = std::log2(errs[0] / errs[1]);
    const double order12 = std::log2(errs[1] / errs[2]);
    const double order = std::min(order01, order12);
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "weighted max err %.3e at n=2048 (tol 1e-3), observed order "
                  "%.2f (need >= 0.5)",
                  errs[2], order);
    report(6, "exact-solution regression", errs[2] <= 1e-3 && order >= 0.5, buf);
}

// ---- 7: blow-up dichotomy over the (alpha, mu, m-ratio) grid ----------------
struct SweepRow {
    double mu = 0.0, m = 0.0, mstar = 0.0;
    std::string cls;
};

bool run_sweep_cli(const std::string& cli, double alpha, int n,
                   const std::string& out, std::vector<SweepRow>& rows,
                   std::string& why) {
    {
        std::ostringstream cmd;
        cmd << "\"" << cli << "\" sweep --alpha " << alpha << " --n " << n
            << " --out " << out << " 2>/dev/null";
        const int rc = std::system(cmd.str().c_str());
        if (WEXITSTATUS(rc) != 0) {
            why = "cmd_sweep exit code " + std::to_string(WEXITSTATUS(rc));
            return false;
        }
    }
    std::ifstream f(out);
    std::string line;
    std::getline(f, line);  // header
    while (std::getline(f, line)) {
        SweepRow r;
        std::string cell;
        std::istringstream ss(line);
        int col = 0;
        while (std::getline(ss, cell, ',')) {
            switch (col) {
                case 2: r.mu = std::strtod(cell.c_str(), nullptr); break;
                case 3: r.m = cell.empty() ? 0.0 : std::strtod(cell.c_str(), nullptr); break;
                case 4: r.mstar = cell.empty() ? 0.0 : std::strtod(cell.c_str(), nullptr); break;
                case 5: r.cls = cell; break;
                default: break;
            }
            ++col;
        }
        rows.push_back(r);
    }
    return true;
}

void criterion_7() {
    const auto t0 = std::chrono::steady_clock::now();
    const char* cli = std::getenv("KFRAC_CLI_PATH");
    if (!cli) {
        report(7, "blow-up dichotomy", false, "KFRAC_CLI_PATH not set");
        return;
    }
    // the 0.6*m* cell at (alpha=0.3, mu=0) lands below m=1, outside the
    // solver's domain (the source result assumes a superlinear power);
    // it must come back as an error cell and is excluded from the dichotomy
    int checked = 0, excluded = 0;
    bool ok = true;
    std::string why;
    std::vector<std::string> base_cls;
    for (int level = 0; level < 2 && ok; ++level) {
        const int n = level == 0 ? 512 : 1024;
        std::vector<std::string> cls_this_level;
        for (double alpha : {0.3, 0.5, 0.7}) {
            std::vector<SweepRow> rows;
            if (!run_sweep_cli(cli, alpha, n, "/tmp/kfrac_acc_sweep.csv", rows,
                               why)) {
                ok = false;
                break;
            }
            if (rows.size() != 8) {
                ok = false;
                why = "expected 8 cells, got " + std::to_string(rows.size());
                break;
            }
            for (const auto& r : rows) {
                cls_this_level.push_back(r.cls);
                if (r.m <= 1.0 || r.cls == "error") {
                    if (r.m > 1.0) {
                        ok = false;
                        why = "error cell with admissible m";
                    }
                    ++excluded;
                    continue;
                }
                ++checked;
                if (r.m < r.mstar && r.cls != "blowup") {
                    ok = false;
                    why = "subcritical cell not classified blowup";
                } else if (r.m > r.mstar && r.cls != "global_tracked") {
                    ok = false;
                    why = "supercritical cell not classified global_tracked";
                }
            }
        }
        if (level == 0)
            base_cls = cls_this_level;
        else if (ok && base_cls != cls_this_level) {
            ok = false;
            why = "classifications changed under mesh refinement";
        }
    }
    const double dt = seconds_since(t0);
    if (ok && dt > 600.0) {
        ok = false;
        why = "runtime over budget";
    }
    char buf[220];
    std::snprintf(buf, sizeof buf,
                  "%d cells checked at two levels, %d sub-unit-power cells "
                  "excluded, %.1f s (budget 600 s)%s%s",
                  checked, excluded, dt, why.empty() ? "" : " -- ",
                  why.c_str());
    report(7, "blow-up dichotomy", ok, buf);
}

// ---- 8: audit of the nonexistence chain -------------------------------------
void criterion_8() {
    ProblemParams p;
    p.mu = 0.5;
    p.m = 2.0;
    const std::vector<double> Ts{10.0, 100.0, 1000.0};
    const auto reps = kfrac::vanishing_bound_trace(p, Ts, 0.5, 1024);
    bool ok = reps.size() == 3;
    double worst_route = 0.0;
    for (const auto& r : reps) {
        ok = ok && r.directions_ok && r.young_ok;
        worst_route = std::max(
            worst_route, std::fabs(r.pivot - r.pivot_alt) / std::fabs(r.pivot));
    }
    ok = ok && worst_route <= 1e-4;
    const bool decreasing = reps.size() == 3 &&
                            reps[0].tail_bound > reps[1].tail_bound &&
                            reps[1].tail_bound > reps[2].tail_bound;
    ok = ok && decreasing;

    ProblemParams p0;
    p0.mu = 0.0;
    p0.m = 1.5;
    const auto reps0 = kfrac::vanishing_bound_trace(p0, Ts, 0.5, 1024);
    bool constant = reps0.size() == 3;
    for (const auto& r : reps0) constant = constant && r.directions_ok;
    if (constant)
        constant = std::fabs(reps0[0].tail_bound - reps0[2].tail_bound) <=
                   1e-12 * reps0[0].tail_bound;
    ok = ok && constant;

    char buf[220];
    std::snprintf(buf, sizeof buf,
                  "directions hold at T={10,100,1000}, bound %s, mu=0 bound "
                  "%s, pivot routes agree to %.3e (tol 1e-4)",
                  decreasing ? "strictly decreasing" : "NOT decreasing",
                  constant ? "constant" : "NOT constant", worst_route);
    report(8, "nonexistence-chain audit", ok, buf);
}

// ---- 9: endpoint vanishing --------------------------------------------------
void criterion_9() {
    const int n = 4096;
    auto mesh_l = mk(1.0, 2.0, 1.0, n, 5.0);
    const auto left = kfrac::boundary_limit(ScaledPower{1.0, -0.25, 1.0, 1.0},
                                            0.5, WeightSide::left, mesh_l);
    auto mesh_r = mk(1.0, 2.0, 1.0, n, 5.0, Grading::toward_b);
    const auto xr = WeightedGridFunction::from_samples(
        mesh_r, std::vector<double>(n + 1, 1.0), 0.25, WeightSide::right, -0.25);
    const auto right = kfrac::boundary_limit(xr, 0.5, WeightSide::right);
    const double worst = std::max(std::fabs(left.value), std::fabs(right.value));
    char buf[120];
    std::snprintf(buf, sizeof buf, "endpoint values %.3e / %.3e (tol 1e-3)",
                  left.value, right.value);
    report(9, "boundary limits", worst <= 1e-3, buf);
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    if (g_failures == 0) {
        std::printf("all 9 acceptance criteria satisfied\n");
        return 0;
    }
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
}
