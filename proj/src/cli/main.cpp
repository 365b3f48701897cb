// kfrac: command-line front end for the fractional toolkit.
//
//   kfrac verify  -- closed-form identity suite, one CSV row per check
//   kfrac solve   -- march the initial-value problem, emit the trajectory
//   kfrac sweep   -- classify (m, mu) grid cells against the critical exponent
//   kfrac audit   -- evaluate the nonexistence inequality chain across horizons
//
// Config precedence: built-in defaults < --config JSON < explicit flags.
// Exit codes: 0 ok, 1 config/usage, 2 verify failure, 3 blow-up,
// 4 sweep contradiction, 5 audit direction violation.

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "kfrac/audit.hpp"
#include "kfrac/core.hpp"
#include "kfrac/mesh.hpp"
#include "kfrac/operators.hpp"
#include "kfrac/solver.hpp"
#include "kfrac/special.hpp"

namespace {

using kfrac::Grading;
using kfrac::Mesh;
using kfrac::ProblemParams;
using kfrac::ScaledPower;
using kfrac::WeightedGridFunction;
using kfrac::WeightSide;
using ordered_json = nlohmann::ordered_json;

// shortest round-trip decimal; the reason CSV output is byte-reproducible
std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string cell_to_string(const ordered_json& v) {
    if (v.is_null()) return "";
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    return fmt(v.get<double>());
}

int write_rows(const std::string& out_path, const std::string& format,
               const std::vector<std::string>& columns,
               const std::vector<ordered_json>& rows) {
    std::string text;
    if (format == "json") {
        ordered_json arr = ordered_json::array();
        for (const auto& r : rows) arr.push_back(r);
        text = arr.dump(2);
        text.push_back('\n');
    } else {
        for (std::size_t c = 0; c < columns.size(); ++c) {
            if (c) text.push_back(',');
            text += columns[c];
        }
        text.push_back('\n');
        for (const auto& r : rows) {
            for (std::size_t c = 0; c < columns.size(); ++c) {
                if (c) text.push_back(',');
                const auto it = r.find(columns[c]);
                if (it != r.end()) text += cell_to_string(*it);
            }
            text.push_back('\n');
        }
    }
    if (out_path.empty() || out_path == "-") {
        std::fwrite(text.data(), 1, text.size(), stdout);
        return 0;
    }
    std::ofstream f(out_path, std::ios::binary);
    if (!f) {
        std::cerr << "kfrac: cannot open output file '" << out_path << "'\n";
        return 1;
    }
    f.write(text.data(), static_cast<std::streamsize>(text.size()));
    return f ? 0 : 1;
}

// ---- configuration ---------------------------------------------------------

struct Overrides {
    std::optional<double> alpha, beta, rho, a, mu, m, lambda, xa;
    std::optional<double> theta, T, horizon, q;
    std::optional<int> n, jobs;
    std::optional<std::string> grading;
    std::optional<bool> matched;
    std::optional<std::vector<double>> T_values, m_values, mu_values, m_ratios;
    std::string config_path;
    std::string out = "-";
    std::string format = "csv";
};

Grading parse_grading(const std::string& s) {
    if (s == "toward_a") return Grading::toward_a;
    if (s == "toward_b") return Grading::toward_b;
    if (s == "both") return Grading::both;
    throw std::invalid_argument(
        "config: grading must be one of toward_a|toward_b|both, got '" + s + "'");
}

// fold the JSON config under the flag values already collected
void apply_json(Overrides& o, const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::invalid_argument("config: cannot read file '" + path + "'");
    ordered_json j;
    try {
        j = ordered_json::parse(f);
    } catch (const std::exception& e) {
        throw std::invalid_argument(std::string("config: JSON parse error: ") +
                                    e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("config: expected a flat JSON object");

    auto num = [&](const char* key, std::optional<double>& slot) {
        if (!j.contains(key)) return;
        if (!j[key].is_number())
            throw std::invalid_argument(std::string("config: '") + key +
                                        "' must be a number");
        if (!slot) slot = j[key].get<double>();
        j.erase(key);
    };
    auto integer = [&](const char* key, std::optional<int>& slot) {
        if (!j.contains(key)) return;
        if (!j[key].is_number_integer())
            throw std::invalid_argument(std::string("config: '") + key +
                                        "' must be an integer");
        if (!slot) slot = j[key].get<int>();
        j.erase(key);
    };
    auto list = [&](const char* key, std::optional<std::vector<double>>& slot) {
        if (!j.contains(key)) return;
        if (!j[key].is_array())
            throw std::invalid_argument(std::string("config: '") + key +
                                        "' must be an array of numbers");
        std::vector<double> v;
        for (const auto& e : j[key]) {
            if (!e.is_number())
                throw std::invalid_argument(std::string("config: '") + key +
                                            "' must contain only numbers");
            v.push_back(e.get<double>());
        }
        if (!slot) slot = std::move(v);
        j.erase(key);
    };

    num("alpha", o.alpha);
    num("beta", o.beta);
    num("rho", o.rho);
    num("a", o.a);
    num("mu", o.mu);
    num("m", o.m);
    num("lambda", o.lambda);
    num("xa", o.xa);
    num("theta", o.theta);
    num("T", o.T);
    num("horizon", o.horizon);
    num("q", o.q);
    integer("n", o.n);
    integer("jobs", o.jobs);
    list("T_values", o.T_values);
    list("m_values", o.m_values);
    list("mu_values", o.mu_values);
    list("m_ratios", o.m_ratios);
    if (j.contains("grading")) {
        if (!j["grading"].is_string())
            throw std::invalid_argument("config: 'grading' must be a string");
        if (!o.grading) o.grading = j["grading"].get<std::string>();
        j.erase("grading");
    }
    if (j.contains("matched")) {
        if (!j["matched"].is_boolean())
            throw std::invalid_argument("config: 'matched' must be a boolean");
        if (!o.matched) o.matched = j["matched"].get<bool>();
        j.erase("matched");
    }
    if (j.contains("out")) {
        if (!j["out"].is_string())
            throw std::invalid_argument("config: 'out' must be a string");
        if (o.out == "-") o.out = j["out"].get<std::string>();
        j.erase("out");
    }
    if (j.contains("format")) {
        if (!j["format"].is_string())
            throw std::invalid_argument("config: 'format' must be a string");
        if (o.format == "csv") o.format = j["format"].get<std::string>();
        j.erase("format");
    }
    if (!j.empty())
        throw std::invalid_argument("config: unknown key '" +
                                    j.begin().key() + "'");
}

ProblemParams make_params(const Overrides& o, const ProblemParams& defaults) {
    ProblemParams p = defaults;
    if (o.alpha) p.alpha = *o.alpha;
    if (o.beta) p.beta = *o.beta;
    if (o.rho) p.rho = *o.rho;
    if (o.a) p.a = *o.a;
    if (o.mu) p.mu = *o.mu;
    if (o.m) p.m = *o.m;
    if (o.lambda) p.lambda = *o.lambda;
    if (o.xa) p.x_a = *o.xa;
    p.validate();
    return p;
}

int default_jobs() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// ---- verify ----------------------------------------------------------------

struct CheckSink {
    std::vector<ordered_json> rows;
    bool all_pass = true;

    // expected == 0 means "residual check": rel_error column holds |computed|
    void add(const std::string& id, const std::string& params, double computed,
             double expected, double tol) {
        const double rel =
            (expected == 0.0)
                ? std::fabs(computed)
                : std::fabs(computed - expected) / std::fabs(expected);
        const bool pass = std::isfinite(rel) && rel <= tol;
        all_pass = all_pass && pass;
        ordered_json r;
        r["check_id"] = id;
        r["params"] = params;
        r["computed"] = computed;
        r["expected"] = expected;
        r["rel_error"] = rel;
        r["pass"] = pass;
        rows.push_back(std::move(r));
    }
};

std::vector<int> probe_nodes(int n) {
    std::vector<int> js;
    for (int k = 1; k <= 10; ++k)
        js.push_back(static_cast<int>(std::llround(n * (k / 11.0))));
    return js;
}

// worst probe-node disagreement, reported as the (computed, expected) pair at
// the offending node
struct WorstPair {
    double computed = 0.0;
    double expected = 0.0;
};
WorstPair worst_over_probes(const WeightedGridFunction& g,
                            const ScaledPower& closed,
                            const std::vector<double>& zs,
                            const std::vector<int>& js) {
    WorstPair w;
    double worst = -1.0;
    for (int j : js) {
        const double c = g.raw(j);
        const double e = closed.at_zeta(zs[j]);
        const double r = std::fabs(c - e) / std::fabs(e);
        if (r > worst) {
            worst = r;
            w = {c, e};
        }
    }
    return w;
}

int cmd_verify(const Overrides& o) {
    const int n = o.n.value_or(4096);
    const double qq = o.q.value_or(3.0);
    if (n < 8) {
        std::cerr << "kfrac verify: n must be at least 8\n";
        return 1;
    }
    CheckSink sink;

    // integral of the constant function against the square-root kernel
    {
        auto mesh = std::make_shared<Mesh>(
            Mesh::make(1.0, 2.0, 1.0, n, qq, Grading::toward_a));
        const auto g = kfrac::left_integral([](double) { return 1.0; }, 0.5, mesh);
        sink.add("const_integral", "alpha=0.5;rho=1;t=2", g.raw(n),
                 1.1283791670955126, 1e-5);
    }

    // power-rule oracle grid for the left integral
    for (double al : {0.25, 0.5, 0.75})
        for (double sg : {0.5, 1.0, 2.0})
            for (double rho : {0.5, 1.0, 2.0}) {
                const double b = std::pow(1.0 + rho, 1.0 / rho);
                auto mesh = std::make_shared<Mesh>(
                    Mesh::make(1.0, b, rho, n, qq, Grading::toward_a));
                const ScaledPower f{1.0, sg - 1.0, 1.0, rho};
                const auto g = kfrac::left_integral(f, al, mesh);
                const ScaledPower closed = kfrac::power_integral_closed(f, al);
                const WorstPair w =
                    worst_over_probes(g, closed, mesh->zeta, probe_nodes(n));
                sink.add("power_integral",
                         "alpha=" + fmt(al) + ";sigma=" + fmt(sg) +
                             ";rho=" + fmt(rho),
                         w.computed, w.expected, 1e-4);
            }

    // the kernel power is annihilated by the derivative of matching order
    for (double al : {0.25, 0.5, 0.75})
        for (double rho : {0.5, 1.0, 2.0}) {
            const double b = std::pow(1.0 + rho, 1.0 / rho);
            auto mesh = std::make_shared<Mesh>(
                Mesh::make(1.0, b, rho, n, qq, Grading::toward_a));
            const auto d = kfrac::left_derivative(
                ScaledPower{1.0, al - 1.0, 1.0, rho}, al, mesh);
            double worst = 0.0;
            for (int j = 1; j < n; ++j)
                worst = std::max(worst, std::fabs(d.values[j]));
            sink.add("annihilation", "alpha=" + fmt(al) + ";rho=" + fmt(rho),
                     worst, 0.0, 1e-4);
        }

    // additivity of integral orders
    {
        auto mesh = std::make_shared<Mesh>(
            Mesh::make(1.0, 2.0, 1.0, n, qq, Grading::toward_a));
        for (auto [al, b2] : {std::pair{0.3, 0.4}, std::pair{0.25, 0.5}}) {
            sink.add("semigroup_const",
                     "alpha=" + fmt(al) + ";beta2=" + fmt(b2),
                     kfrac::semigroup_residual([](double) { return 1.0; }, al,
                                               b2, mesh),
                     0.0, 1e-5);
            const auto f = WeightedGridFunction::from_power(
                mesh, ScaledPower{1.0, 0.5, 1.0, 1.0});
            sink.add("semigroup_power",
                     "alpha=" + fmt(al) + ";beta2=" + fmt(b2) + ";exponent=0.5",
                     kfrac::semigroup_residual(f, al, b2), 0.0, 1e-5);
        }
    }

    // integration by parts: residual and, against the closed form, both sides
    for (double rho : {1.0, 2.0}) {
        auto mesh = std::make_shared<Mesh>(
            Mesh::make(1.0, 2.0, rho, n, qq, Grading::both));
        auto one = [](double) { return 1.0; };
        const auto sides = kfrac::int_by_parts_sides(one, one, 0.5, mesh);
        sink.add("int_by_parts_residual", "alpha=0.5;rho=" + fmt(rho),
                 sides.lhs - sides.rhs, 0.0, 1e-6);
        if (rho == 1.0) {
            const double closed = 0.7522527780636751;  // 1/Gamma(5/2)
            sink.add("int_by_parts_lhs", "alpha=0.5;rho=1", sides.lhs, closed,
                     1e-5);
            sink.add("int_by_parts_rhs", "alpha=0.5;rho=1", sides.rhs, closed,
                     1e-5);
        }
    }

    // generalized derivative against the power rule (and its annihilated mode)
    for (auto [al, be] : {std::pair{0.5, 0.5}, std::pair{0.7, 0.3}}) {
        ProblemParams p;
        p.alpha = al;
        p.beta = be;
        const double ga = p.gamma();
        auto mesh = std::make_shared<Mesh>(
            Mesh::make(1.0, 2.0, 1.0, n, qq, Grading::toward_a));
        for (double xi : {ga, ga + 0.25, 2.0}) {
            const ScaledPower f{1.0, xi - 1.0, 1.0, 1.0};
            const auto d = kfrac::generalized_derivative(f, p, mesh);
            const std::string ps = "alpha=" + fmt(al) + ";beta=" + fmt(be) +
                                   ";xi=" + fmt(xi);
            if (xi == ga) {
                double worst = 0.0;
                for (int j = 1; j < n; ++j)
                    worst = std::max(worst, std::fabs(d.values[j]));
                sink.add("generalized_derivative_annihilation", ps, worst, 0.0,
                         1e-4);
            } else {
                const ScaledPower closed = kfrac::power_hilfer_closed(f, p);
                const WorstPair w =
                    worst_over_probes(d, closed, mesh->zeta, probe_nodes(n));
                sink.add("generalized_derivative_power", ps, w.computed,
                         w.expected, 1e-4);
            }
        }
    }

    // the closed-form family: coefficient identity and numeric residual
    {
        ProblemParams p1;  // defaults: alpha=beta=0.5, mu=0, m=3
        const auto e1 = kfrac::exact_solution(p1);
        sink.add("exact_family_coeff", "alpha=0.5;beta=0.5;mu=0;m=3",
                 e1.y.coeff * kfrac::gamma_fn(e1.nu + 1.0) *
                     kfrac::recip_gamma(e1.nu - p1.alpha + 1.0),
                 p1.lambda * std::pow(e1.y.coeff, p1.m), 1e-12);

        ProblemParams p2;
        p2.alpha = 0.7;
        p2.beta = 0.2;
        p2.mu = 0.5;
        p2.m = 8.0;
        const auto e2 = kfrac::exact_solution(p2);
        sink.add("exact_family_coeff", "alpha=0.7;beta=0.2;mu=0.5;m=8",
                 e2.y.coeff * kfrac::gamma_fn(e2.nu + 1.0) *
                     kfrac::recip_gamma(e2.nu - p2.alpha + 1.0),
                 p2.lambda * std::pow(e2.y.coeff, p2.m), 1e-12);

        // numeric: D^{alpha,beta} y == lambda zeta^mu y^m away from the
        // annihilated mode (nu > gamma-1 strictly here)
        auto mesh = std::make_shared<Mesh>(
            Mesh::make(1.0, 2.0, 1.0, n, qq, Grading::toward_a));
        const auto d = kfrac::generalized_derivative(e2.y, p2, mesh);
        WorstPair w;
        double worst = -1.0;
        for (int j : probe_nodes(n)) {
            const double z = mesh->zeta[j];
            const double c = d.raw(j);
            const double e = p2.lambda * std::pow(z, p2.mu) *
                             std::pow(e2.y.at_zeta(z), p2.m);
            const double r = std::fabs(c - e) / std::fabs(e);
            if (r > worst) {
                worst = r;
                w = {c, e};
            }
        }
        sink.add("exact_family_numeric", "alpha=0.7;beta=0.2;mu=0.5;m=8",
                 w.computed, w.expected, 1e-3);
    }

    // endpoint vanishing of the integral on a weighted input (strong grading)
    {
        auto mesh5 = std::make_shared<Mesh>(
            Mesh::make(1.0, 2.0, 1.0, n, 5.0, Grading::toward_a));
        const auto bl = kfrac::boundary_limit(ScaledPower{1.0, -0.25, 1.0, 1.0},
                                              0.5, WeightSide::left, mesh5);
        sink.add("boundary_limit_left", "alpha=0.5;weight=0.25;q=5", bl.value,
                 0.0, 1e-3);

        auto mesh5b = std::make_shared<Mesh>(
            Mesh::make(1.0, 2.0, 1.0, n, 5.0, Grading::toward_b));
        const auto xr = WeightedGridFunction::from_samples(
            mesh5b, std::vector<double>(n + 1, 1.0), 0.25, WeightSide::right,
            -0.25);
        const auto br = kfrac::boundary_limit(xr, 0.5, WeightSide::right);
        sink.add("boundary_limit_right", "alpha=0.5;weight=0.25;q=5", br.value,
                 0.0, 1e-3);
    }

    // the substitute-coordinate derivative normalizes t^rho/rho to slope one
    sink.add("delta_rho_unit", "rho=3;t=1.5",
             kfrac::delta_rho([](double t) { return std::pow(t, 3.0) / 3.0; },
                              1.5, 3.0),
             1.0, 1e-8);
    sink.add("delta_rho_power", "exponent=2;t=1.7",
             kfrac::delta_rho(ScaledPower{1.0, 2.0, 1.0, 1.0}, 1.7),
             2.0 * 0.7, 1e-12);

    const int werr = write_rows(
        o.out, o.format,
        {"check_id", "params", "computed", "expected", "rel_error", "pass"},
        sink.rows);
    if (werr) return 1;
    return sink.all_pass ? 0 : 2;
}

// ---- solve -----------------------------------------------------------------

int cmd_solve(const Overrides& o) {
    const ProblemParams p = make_params(o, ProblemParams{});
    const int n = o.n.value_or(2048);
    const double qq = o.q.value_or(3.0);
    const double horizon = o.horizon.value_or(p.a + 1.0);
    const Grading grading = parse_grading(o.grading.value_or("toward_a"));
    if (!(horizon > p.a)) {
        std::cerr << "kfrac solve: horizon must exceed a\n";
        return 1;
    }

    kfrac::SolveConfig cfg;
    cfg.mesh = std::make_shared<Mesh>(
        Mesh::make(p.a, horizon, p.rho, n, qq, grading));
    cfg.horizon = horizon;
    const auto rhs = kfrac::power_rhs(p);
    const auto mode = o.matched.value_or(false)
                          ? kfrac::DatumMode::matched_power
                          : kfrac::DatumMode::automatic;

    const kfrac::SolveRun run = kfrac::march(p, rhs, cfg, mode);
    if (!run.error.empty()) {
        std::cerr << "kfrac solve: " << run.error << "\n";
        return 1;
    }
    const std::vector<double> res = kfrac::consistency_residual(p, rhs, run);

    std::vector<ordered_json> rows;
    const Mesh& M = *cfg.mesh;
    for (int j = 0; j <= n; ++j) {
        if (j > 0 && !std::isfinite(run.x.values[j])) break;
        ordered_json r;
        r["t"] = M.t[j];
        r["z"] = M.zeta[j];
        r["x_weighted"] = run.x.values[j];
        r["x"] = run.x.raw(j);
        r["residual"] = res[j];
        rows.push_back(std::move(r));
    }
    const int werr = write_rows(o.out, o.format,
                                {"t", "z", "x_weighted", "x", "residual"}, rows);
    if (werr) return 1;
    if (run.blow_node) {
        std::cerr << "kfrac solve: blow-up at node " << *run.blow_node
                  << " (t = " << fmt(M.t[*run.blow_node])
                  << "); partial trajectory written\n";
        return 3;
    }
    return 0;
}

// ---- sweep -----------------------------------------------------------------

void sweep_rows(const std::vector<kfrac::BlowupReport>& reports,
                std::vector<ordered_json>& rows,
                std::vector<std::string>& contradictions) {
    for (const auto& rep : reports) {
        ordered_json r;
        r["alpha"] = rep.params.alpha;
        r["beta"] = rep.params.beta;
        r["mu"] = rep.params.mu;
        r["m"] = rep.params.m;
        double mstar = std::numeric_limits<double>::quiet_NaN();
        try {
            mstar = kfrac::blowup_threshold(rep.params);
            r["m_star"] = mstar;
        } catch (const std::exception&) {
            r["m_star"] = nullptr;
        }
        const bool errored = !rep.error.empty();
        r["classification"] =
            errored ? std::string("error") : std::string(to_string(rep.classification));
        if (rep.t_blow_estimate)
            r["t_blow_estimate"] = *rep.t_blow_estimate;
        else
            r["t_blow_estimate"] = nullptr;
        r["final_norm"] = rep.final_norm;
        rows.push_back(std::move(r));

        if (!errored && std::isfinite(mstar) && rep.params.m > 1.0) {
            const bool super = rep.params.m > mstar;
            const auto cls = rep.classification;
            const bool contra =
                (!super && cls == kfrac::Classification::global_tracked) ||
                (super && cls == kfrac::Classification::blowup);
            if (contra)
                contradictions.push_back(
                    "(alpha=" + fmt(rep.params.alpha) + ", mu=" +
                    fmt(rep.params.mu) + ", m=" + fmt(rep.params.m) +
                    ") classified " + to_string(cls) + " but m_star = " +
                    fmt(mstar));
        }
    }
}

int cmd_sweep(const Overrides& o) {
    const ProblemParams base = make_params(o, ProblemParams{});
    const int n = o.n.value_or(512);
    const double qq = o.q.value_or(3.0);
    const double horizon = o.horizon.value_or(50.0);
    const int jobs = o.jobs.value_or(default_jobs());
    if (o.m_values && o.m_ratios) {
        std::cerr << "kfrac sweep: give m_values or m_ratios, not both\n";
        return 1;
    }
    const std::vector<double> mu_values =
        o.mu_values.value_or(std::vector<double>{0.0, 0.5});

    kfrac::SolveConfig cfg;
    cfg.mesh = std::make_shared<Mesh>(
        Mesh::make(base.a, horizon, base.rho, n, qq, Grading::toward_a));
    cfg.horizon = horizon;

    std::vector<ordered_json> rows;
    std::vector<std::string> contradictions;
    if (o.m_values) {
        const auto reports =
            kfrac::sweep(base, *o.m_values, mu_values, cfg, jobs);
        sweep_rows(reports, rows, contradictions);
    } else {
        // ratio grid: m expressed relative to the critical exponent of each mu
        const std::vector<double> ratios =
            o.m_ratios.value_or(std::vector<double>{0.6, 0.8, 1.5, 2.0});
        for (double mu : mu_values) {
            ProblemParams pb = base;
            pb.mu = mu;
            double mstar;
            try {
                mstar = kfrac::blowup_threshold(pb);
            } catch (const std::exception& e) {
                for (double ratio : ratios) {
                    (void)ratio;
                    ordered_json r;
                    r["alpha"] = pb.alpha;
                    r["beta"] = pb.beta;
                    r["mu"] = mu;
                    r["m"] = nullptr;
                    r["m_star"] = nullptr;
                    r["classification"] = "error";
                    r["t_blow_estimate"] = nullptr;
                    r["final_norm"] = nullptr;
                    rows.push_back(std::move(r));
                }
                std::cerr << "kfrac sweep: mu=" << fmt(mu)
                          << " skipped: " << e.what() << "\n";
                continue;
            }
            std::vector<double> ms;
            for (double ratio : ratios) ms.push_back(ratio * mstar);
            const auto reports = kfrac::sweep(pb, ms, {mu}, cfg, jobs);
            sweep_rows(reports, rows, contradictions);
        }
    }

    const int werr = write_rows(o.out, o.format,
                                {"alpha", "beta", "mu", "m", "m_star",
                                 "classification", "t_blow_estimate",
                                 "final_norm"},
                                rows);
    if (werr) return 1;
    if (!contradictions.empty()) {
        std::cerr << "kfrac sweep: " << contradictions.size()
                  << " cell(s) contradict the critical exponent:\n";
        for (const auto& c : contradictions) std::cerr << "  " << c << "\n";
        return 4;
    }
    return 0;
}

// ---- audit -----------------------------------------------------------------

int cmd_audit(const Overrides& o) {
    ProblemParams defaults;
    defaults.mu = 0.5;  // the decaying-bound scenario unless told otherwise
    defaults.m = 2.0;
    const ProblemParams p = make_params(o, defaults);
    const int n = o.n.value_or(1024);
    const double qq = o.q.value_or(3.0);
    const double theta = o.theta.value_or(0.5);
    const int jobs = o.jobs.value_or(default_jobs());
    std::vector<double> Ts =
        o.T_values.value_or(std::vector<double>{10.0, 100.0, 1000.0});
    if (o.T) Ts = {*o.T};

    const auto reports =
        kfrac::vanishing_bound_trace(p, Ts, theta, n, qq, jobs);

    std::vector<ordered_json> rows;
    bool all_ok = true;
    for (const auto& rep : reports) {
        auto add = [&](const char* q2, double v) {
            ordered_json r;
            r["T"] = rep.T;
            r["theta"] = rep.theta;
            r["quantity"] = q2;
            r["value"] = v;
            rows.push_back(std::move(r));
        };
        add("lhs", rep.lhs);
        add("rhs", rep.rhs);
        add("pivot", rep.pivot);
        add("pivot_alt", rep.pivot_alt);
        add("tail_constant", rep.tail_constant);
        add("tail_bound", rep.tail_bound);
        add("scale", rep.scale);
        add("young_ok", rep.young_ok ? 1.0 : 0.0);
        add("directions_ok", rep.directions_ok ? 1.0 : 0.0);
        all_ok = all_ok && rep.directions_ok;
    }
    const int werr = write_rows(o.out, o.format,
                                {"T", "theta", "quantity", "value"}, rows);
    if (werr) return 1;
    if (!all_ok) {
        std::cerr << "kfrac audit: inequality direction violated\n";
        return 5;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical toolkit for the generalized fractional "
                 "initial-value problem"};
    app.require_subcommand(1);

    Overrides o;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config_path, "flat JSON config file");
        sub->add_option("--out", o.out, "output path ('-' = stdout)");
        sub->add_option("--format", o.format)
            ->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--jobs", o.jobs);
        sub->add_option("--alpha", o.alpha);
        sub->add_option("--beta", o.beta);
        sub->add_option("--rho", o.rho);
        sub->add_option("--a", o.a);
        sub->add_option("--mu", o.mu);
        sub->add_option("--m", o.m);
        sub->add_option("--lambda", o.lambda);
        sub->add_option("--xa", o.xa);
        sub->add_option("--n", o.n);
        sub->add_option("--grading", o.grading)
            ->check(CLI::IsMember({"toward_a", "toward_b", "both"}));
        sub->add_option("--theta", o.theta);
        sub->add_option("--T", o.T);
        sub->add_option("--horizon", o.horizon);
        sub->add_option("--q", o.q);
        sub->add_flag("--matched", [&](std::int64_t) { o.matched = true; },
                      "use the matched power-family datum");
        return sub;
    };
    auto* verify = add_common(app.add_subcommand(
        "verify", "run the closed-form identity suite"));
    auto* solve = add_common(app.add_subcommand(
        "solve", "march the initial-value problem"));
    auto* sweep = add_common(app.add_subcommand(
        "sweep", "classify an (m, mu) grid against the critical exponent"));
    auto* audit = add_common(app.add_subcommand(
        "audit", "evaluate the nonexistence inequality chain"));

    CLI11_PARSE(app, argc, argv);

    try {
        if (!o.config_path.empty()) apply_json(o, o.config_path);
        if (verify->parsed()) return cmd_verify(o);
        if (solve->parsed()) return cmd_solve(o);
        if (sweep->parsed()) return cmd_sweep(o);
        if (audit->parsed()) return cmd_audit(o);
    } catch (const std::exception& e) {
        std::cerr << "kfrac: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
