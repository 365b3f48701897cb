#include <doctest.h>

#include <cmath>
#include <memory>
#include <stdexcept>

#include "kfrac/audit.hpp"
#include "kfrac/core.hpp"
#include "kfrac/mesh.hpp"

using kfrac::Grading;
using kfrac::Mesh;
using kfrac::ProblemParams;
using kfrac::ScaledPower;
using kfrac::TestFunction;

namespace {

ProblemParams decaying_scenario() {
    ProblemParams p;
    p.mu = 0.5;
    p.m = 2.0;  // m* = 3
    return p;
}

}  // namespace

TEST_CASE("test function construction and validation") {
    CHECK_THROWS_AS(kfrac::build_test_function(0.6, 10.0, 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(kfrac::build_test_function(0.0, 10.0, 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(kfrac::build_test_function(0.5, 10.0, 6.0),
                    std::invalid_argument);  // a >= theta*T
    CHECK_NOTHROW(kfrac::build_test_function(0.5, 10.0, 1.0));
}

TEST_CASE("test function pointwise invariants") {
    const auto tf = kfrac::build_test_function(0.5, 10.0, 1.0);
    CHECK(tf.plateau_end() == doctest::Approx(5.0).epsilon(1e-15));

    const int N = 10000;
    double prev = 2.0;
    for (int i = 0; i <= N; ++i) {
        const double t = 1.0 + (10.0 - 1.0) * i / N;
        const double ph = tf.phi(t);
        CHECK(ph >= 0.0);
        CHECK(ph <= 1.0 + 1e-15);
        CHECK(ph <= prev + 1e-15);  // non-increasing
        CHECK(tf.phi_prime(t) <= 1e-15);
        prev = ph;
        if (t <= 5.0) {
            CHECK(ph == 1.0);
            CHECK(tf.phi_prime(t) == 0.0);
            CHECK(tf.ramp_quotient(t, 2.0) == 0.0);
        }
    }
    CHECK(tf.phi(10.0) == 0.0);
    CHECK(tf.phi(11.0) == 0.0);
    // C1 joins at both ramp ends
    CHECK(tf.phi_prime(5.0) == 0.0);
    CHECK(tf.phi_prime(10.0) == 0.0);
    CHECK(tf.ramp_quotient(10.0, 2.0) == 0.0);

    // spot value mid-ramp: smoothstep in the normalized backward coordinate
    const double t = 7.5, v = 0.5;
    CHECK(tf.phi(t) == doctest::Approx(v * v * (3.0 - 2.0 * v)).epsilon(1e-13));
    CHECK(tf.phi_prime(t) ==
          doctest::Approx(-6.0 * v * (1.0 - v) / 5.0).epsilon(1e-13));
    CHECK(tf.ramp_quotient(t, 2.0) ==
          doctest::Approx(std::fabs(tf.phi_prime(t)) /
                          std::sqrt(tf.phi(t))).epsilon(1e-13));
    // delta_phi folds in t^{1-rho}
    CHECK(tf.delta_phi(t, 2.0) ==
          doctest::Approx(tf.phi_prime(t) / t).epsilon(1e-13));
    CHECK(tf.delta_phi(t, 1.0) == doctest::Approx(tf.phi_prime(t)).epsilon(1e-15));
}

TEST_CASE("sharpening raises the cut-off to a power") {
    auto base = kfrac::build_test_function(0.5, 10.0, 1.0);
    TestFunction sq = base;
    sq.sharpening = 2.0;
    for (double t : {5.5, 7.0, 9.3}) {
        CHECK(sq.phi(t) == doctest::Approx(base.phi(t) * base.phi(t)).epsilon(1e-13));
        CHECK(sq.phi_prime(t) ==
              doctest::Approx(2.0 * base.phi(t) * base.phi_prime(t)).epsilon(1e-12));
    }
}

TEST_CASE("Young split") {
    const auto ys = kfrac::young_split(2.0, 3.0, 2.0);
    CHECK(ys.product == doctest::Approx(6.0).epsilon(1e-15));
    CHECK(ys.bound == doctest::Approx(6.5).epsilon(1e-15));
    CHECK(ys.ok);

    // equality case p = e for m = 2 must not be rejected by rounding
    const auto eq = kfrac::young_split(1.3, 1.3, 2.0);
    CHECK(eq.product == doctest::Approx(eq.bound).epsilon(1e-14));
    CHECK(eq.ok);

    const auto gen = kfrac::young_split(0.7, 1.9, 3.0);
    CHECK(gen.product == doctest::Approx(0.7 * 1.9).epsilon(1e-15));
    CHECK(gen.bound ==
          doctest::Approx(std::pow(0.7, 3.0) / 3.0 +
                          std::pow(1.9, 1.5) / 1.5).epsilon(1e-14));
    CHECK(gen.ok);
}

TEST_CASE("supersolution scale") {
    const auto p = decaying_scenario();
    const double c999 = kfrac::supersolution_scale(p, 999.0);
    CHECK(c999 == doctest::Approx(2.0353217320544717e-4).epsilon(1e-10));
    // widening the range can only tighten the margin
    const double c9 = kfrac::supersolution_scale(p, 9.0);
    CHECK(c999 <= c9);

    ProblemParams bad = p;
    bad.m = 0.9;  // rejected by parameter validation before anything runs
    CHECK_THROWS_AS(kfrac::supersolution_scale(bad, 9.0), std::invalid_argument);
    CHECK_THROWS_AS(kfrac::supersolution_scale(p, 0.0), std::invalid_argument);
}

TEST_CASE("supersolution grid representation") {
    const auto p = decaying_scenario();
    auto mesh = std::make_shared<Mesh>(
        Mesh::make(1.0, 10.0, 1.0, 128, 3.0, Grading::both));
    const double c = 1e-4;
    const auto x = kfrac::make_supersolution(p, mesh, c);
    CHECK(x.weight_exp == doctest::Approx(0.25).epsilon(1e-14));
    REQUIRE(x.model_exp.has_value());
    CHECK(*x.model_exp == doctest::Approx(-0.25).epsilon(1e-14));
    for (int j : {0, 1, 64, 128}) {
        const double z = mesh->zeta[j];
        const double want = c * (1.0 + std::pow(z, 0.25));
        CHECK(x.values[j] == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("inequality chain on the canonical supersolution") {
    const auto p = decaying_scenario();
    const double T = 10.0;
    auto mesh = std::make_shared<Mesh>(
        Mesh::make(1.0, T, 1.0, 512, 3.0, Grading::both));
    const auto tf = kfrac::build_test_function(0.5, T, 1.0);
    const double scale = kfrac::supersolution_scale(p, T - 1.0);
    const auto x = kfrac::make_supersolution(p, mesh, scale);

    const auto rep = kfrac::audit_inequality_chain(x, p, tf);
    CHECK(rep.lhs > 0.0);
    CHECK(rep.rhs > 0.0);
    CHECK(rep.lhs >= rep.rhs);
    CHECK(rep.young_ok);
    CHECK(rep.directions_ok);
    CHECK(rep.scale == 0.0);  // grid input: no scale was chosen here
    // both pivot routes measure the same functional
    CHECK(std::fabs(rep.pivot - rep.pivot_alt) <= 1e-4 * std::fabs(rep.pivot));
    // normalized tail constant (mesh-converged reference value)
    CHECK(rep.tail_constant == doctest::Approx(1.0372139390442676).epsilon(1e-6));
    CHECK(rep.tail_bound ==
          doctest::Approx(rep.tail_constant * std::pow(4.0, -0.5)).epsilon(1e-12));
}

TEST_CASE("tail constant is stable under mesh refinement") {
    const auto p = decaying_scenario();
    const double T = 10.0;
    const auto tf = kfrac::build_test_function(0.5, T, 1.0);
    double C[2];
    int idx = 0;
    for (int n : {256, 512}) {
        auto mesh = std::make_shared<Mesh>(
            Mesh::make(1.0, T, 1.0, n, 3.0, Grading::both));
        const auto x = kfrac::make_supersolution(p, mesh, 1e-4);
        C[idx++] = kfrac::audit_inequality_chain(x, p, tf).tail_constant;
    }
    CHECK(std::fabs(C[1] - C[0]) <= 0.01 * C[1]);
}

TEST_CASE("chain gates") {
    const auto tf = kfrac::build_test_function(0.5, 10.0, 1.0);
    auto mesh = std::make_shared<Mesh>(
        Mesh::make(1.0, 10.0, 1.0, 128, 3.0, Grading::both));
    const auto p = decaying_scenario();
    const auto x = kfrac::make_supersolution(p, mesh, 1e-4);

    SUBCASE("rho must be 1") {
        ProblemParams q = p;
        q.rho = 2.0;
        CHECK_THROWS_AS(kfrac::audit_inequality_chain(x, q, tf), std::domain_error);
    }
    SUBCASE("supercritical m is refused, not quadratured") {
        ProblemParams q = p;
        q.m = 3.5;  // >= m* = 3
        CHECK_THROWS_WITH_AS(kfrac::audit_inequality_chain(x, q, tf),
                             doctest::Contains("integrability"),
                             std::domain_error);
    }
    SUBCASE("beta = 1 has no singular mode to audit") {
        ProblemParams q = p;
        q.beta = 1.0;
        CHECK_THROWS_AS(kfrac::audit_inequality_chain(x, q, tf), std::domain_error);
    }
    SUBCASE("mesh must span the horizon") {
        auto shortmesh = std::make_shared<Mesh>(
            Mesh::make(1.0, 5.0, 1.0, 128, 3.0, Grading::both));
        const auto y = kfrac::make_supersolution(p, shortmesh, 1e-4);
        CHECK_THROWS_AS(kfrac::audit_inequality_chain(y, p, tf),
                        std::invalid_argument);
    }
}

TEST_CASE("degenerate and failing inputs behave as documented") {
    const auto p = decaying_scenario();
    const double T = 10.0;
    auto mesh = std::make_shared<Mesh>(
        Mesh::make(1.0, T, 1.0, 256, 3.0, Grading::both));
    const auto tf = kfrac::build_test_function(0.5, T, 1.0);

    SUBCASE("identically zero input passes trivially") {
        const ScaledPower zero{0.0, p.gamma() - 1.0, 1.0, 1.0};
        const auto rep = kfrac::audit_inequality_chain(zero, p, tf, mesh);
        CHECK(rep.lhs == 0.0);
        CHECK(rep.rhs == 0.0);
        CHECK(rep.directions_ok);
    }
    SUBCASE("a pure weighted power is not a supersolution at any scale") {
        // its generalized derivative vanishes identically, so lhs ~ 0 while
        // the right side is strictly positive: the direction must fail
        const ScaledPower mode{1e-3, p.gamma() - 1.0, 1.0, 1.0};
        const auto rep = kfrac::audit_inequality_chain(mode, p, tf, mesh);
        CHECK(rep.rhs > 0.0);
        CHECK(rep.lhs < rep.rhs);
        CHECK(!rep.directions_ok);
    }
}

TEST_CASE("bound trace across horizons") {
    SUBCASE("decaying scenario: strictly decreasing bound, one shared scale") {
        const auto reps = kfrac::vanishing_bound_trace(decaying_scenario(),
                                                       {10.0, 100.0, 1000.0},
                                                       0.5, 256);
        REQUIRE(reps.size() == 3);
        for (const auto& r : reps) {
            CHECK(r.directions_ok);
            CHECK(r.young_ok);
            CHECK(r.scale == doctest::Approx(reps[0].scale).epsilon(1e-15));
        }
        CHECK(reps[0].tail_bound > reps[1].tail_bound);
        CHECK(reps[1].tail_bound > reps[2].tail_bound);
    }
    SUBCASE("mu = 0: the bound is horizon-independent") {
        ProblemParams p;
        p.mu = 0.0;
        p.m = 1.5;  // m* = 2
        const auto reps =
            kfrac::vanishing_bound_trace(p, {10.0, 100.0, 1000.0}, 0.5, 256);
        REQUIRE(reps.size() == 3);
        for (const auto& r : reps) CHECK(r.directions_ok);
        CHECK(reps[0].tail_bound ==
              doctest::Approx(reps[1].tail_bound).epsilon(1e-13));
        CHECK(reps[1].tail_bound ==
              doctest::Approx(reps[2].tail_bound).epsilon(1e-13));
    }
    SUBCASE("mu < 0: the envelope slope replaces the plateau bound") {
        ProblemParams p;
        p.mu = -0.2;
        p.m = 1.4;  // m* = 1.6; m' = 3.5, envelope exponent -3
        const auto reps =
            kfrac::vanishing_bound_trace(p, {10.0, 100.0}, 0.5, 256);
        REQUIRE(reps.size() == 2);
        for (const auto& r : reps) CHECK(r.directions_ok);
        const double ratio = reps[1].tail_bound / reps[0].tail_bound;
        CHECK(ratio == doctest::Approx(std::pow(99.0 / 9.0, -3.0)).epsilon(1e-10));
    }
    SUBCASE("validation") {
        const auto p = decaying_scenario();
        CHECK_THROWS_AS(kfrac::vanishing_bound_trace(p, {100.0, 10.0}, 0.5, 256),
                        std::invalid_argument);
        CHECK_THROWS_AS(kfrac::vanishing_bound_trace(p, {}, 0.5, 256),
                        std::invalid_argument);
        CHECK_THROWS_AS(kfrac::vanishing_bound_trace(p, {10.0}, 0.5, 4),
                        std::invalid_argument);
        ProblemParams q = p;
        q.rho = 0.5;
        CHECK_THROWS_AS(kfrac::vanishing_bound_trace(q, {10.0}, 0.5, 256),
                        std::domain_error);
    }
    SUBCASE("parallel trace is deterministic") {
        const auto p = decaying_scenario();
        const auto serial =
            kfrac::vanishing_bound_trace(p, {10.0, 100.0, 1000.0}, 0.5, 128, 3.0, 1);
        const auto parallel =
            kfrac::vanishing_bound_trace(p, {10.0, 100.0, 1000.0}, 0.5, 128, 3.0, 3);
        REQUIRE(serial.size() == parallel.size());
        for (std::size_t i = 0; i < serial.size(); ++i) {
            CHECK(serial[i].lhs == parallel[i].lhs);
            CHECK(serial[i].tail_bound == parallel[i].tail_bound);
            CHECK(serial[i].directions_ok == parallel[i].directions_ok);
        }
    }
}
