#include <tuple>

#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "kfrac/core.hpp"
#include "kfrac/special.hpp"

using kfrac::ProblemParams;
using kfrac::ScaledPower;

TEST_CASE("ProblemParams validation names the offending field") {
    ProblemParams p;
    CHECK_NOTHROW(p.validate());

    p.alpha = 1.5;
    CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("alpha"),
                         std::invalid_argument);
    p = ProblemParams{};
    p.beta = -0.1;
    CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("beta"),
                         std::invalid_argument);
    p = ProblemParams{};
    p.rho = 0.0;
    CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("rho"),
                         std::invalid_argument);
    p = ProblemParams{};
    p.a = 0.0;
    CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("a"),
                         std::invalid_argument);
    p = ProblemParams{};
    p.m = 1.0;
    CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("m"),
                         std::invalid_argument);
    p = ProblemParams{};
    p.lambda = 0.0;
    CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("lambda"),
                         std::invalid_argument);
}

TEST_CASE("derived parameter formulas") {
    ProblemParams p;  // alpha = beta = 0.5
    CHECK(p.gamma() == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(p.m_conj() == doctest::Approx(1.5).epsilon(1e-15));

    p.alpha = 0.7;
    p.beta = 0.2;
    CHECK(p.gamma() == doctest::Approx(0.7 + 0.2 * 0.3).epsilon(1e-15));
    p.m = 8.0;
    CHECK(p.m_conj() == doctest::Approx(8.0 / 7.0).epsilon(1e-15));
}

TEST_CASE("ScaledPower coordinate maps and endpoint conventions") {
    ScaledPower f{2.0, -0.5, 1.0, 2.0};
    const double t = 1.7;
    const double z = f.zeta(t);
    CHECK(z == doctest::Approx((t * t - 1.0) / 2.0).epsilon(1e-15));
    CHECK(f.t_of_zeta(z) == doctest::Approx(t).epsilon(1e-14));
    CHECK(f(t) == doctest::Approx(2.0 * std::pow(z, -0.5)).epsilon(1e-14));

    // at the anchor: 0 / coeff / signed infinity by exponent sign
    CHECK(ScaledPower{3.0, 0.5, 1.0, 1.0}(1.0) == 0.0);
    CHECK(ScaledPower{3.0, 0.0, 1.0, 1.0}(1.0) == 3.0);
    CHECK(std::isinf(ScaledPower{3.0, -0.5, 1.0, 1.0}(1.0)));
    CHECK(ScaledPower{-3.0, -0.5, 1.0, 1.0}(1.0) < 0.0);
    CHECK(ScaledPower{0.0, -0.5, 1.0, 1.0}(1.0) == 0.0);
    CHECK(ScaledPower{0.0, 1.0, 1.0, 1.0}.is_zero());
}

TEST_CASE("blow-up threshold") {
    ProblemParams p;
    CHECK(kfrac::blowup_threshold(p) == doctest::Approx(2.0).epsilon(1e-15));
    p.alpha = 0.3;
    p.mu = 0.5;
    CHECK(kfrac::blowup_threshold(p) ==
          doctest::Approx(1.5 / 0.7).epsilon(1e-15));
    p.alpha = 0.5;
    p.mu = -0.6;
    CHECK_THROWS_AS(kfrac::blowup_threshold(p), std::domain_error);
}

TEST_CASE("power rule of the integral") {
    // I^alpha c*zeta^{sigma-1} = c*Gamma(sigma)/Gamma(sigma+alpha) zeta^{sigma-1+alpha}
    ScaledPower f{1.0, 0.0, 1.0, 1.0};  // sigma = 1
    const auto g = kfrac::power_integral_closed(f, 0.5);
    CHECK(g.exponent == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(g.coeff == doctest::Approx(2.0 / std::sqrt(M_PI)).epsilon(1e-14));
    CHECK(g.at_zeta(1.0) == doctest::Approx(1.1283791670955126).epsilon(1e-15));

    ScaledPower h{2.0, 1.0, 1.0, 2.0};  // sigma = 2, rho carried through
    const auto k = kfrac::power_integral_closed(h, 0.5);
    CHECK(k.exponent == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(k.coeff ==
          doctest::Approx(2.0 * kfrac::gamma_fn(2.0) / kfrac::gamma_fn(2.5))
              .epsilon(1e-14));
    CHECK(k.rho == 2.0);
    CHECK(k.anchor == 1.0);

    CHECK_THROWS_AS(kfrac::power_integral_closed(ScaledPower{1.0, -1.0, 1.0, 1.0}, 0.5),
                    std::domain_error);
    // order zero is the identity
    const auto id = kfrac::power_integral_closed(h, 0.0);
    CHECK(id.coeff == h.coeff);
    CHECK(id.exponent == h.exponent);
}

TEST_CASE("power rule of the generalized derivative") {
    ProblemParams p;  // alpha = beta = 0.5, gamma = 0.75

    SUBCASE("generic exponent") {
        ScaledPower f{1.0, 1.0, 1.0, 1.0};  // xi = 2 > gamma
        const auto d = kfrac::power_hilfer_closed(f, p);
        CHECK(d.exponent == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(d.coeff ==
              doctest::Approx(kfrac::gamma_fn(2.0) / kfrac::gamma_fn(1.5))
                  .epsilon(1e-14));
    }
    SUBCASE("xi = gamma is annihilated exactly") {
        ScaledPower f{3.0, p.gamma() - 1.0, 1.0, 1.0};
        const auto d = kfrac::power_hilfer_closed(f, p);
        CHECK(d.coeff == 0.0);
    }
    SUBCASE("xi = alpha is annihilated exactly for every type") {
        for (double beta : {0.0, 0.3, 1.0}) {
            ProblemParams q;
            q.beta = beta;
            ScaledPower f{1.0, q.alpha - 1.0, 1.0, 1.0};
            CHECK(kfrac::power_hilfer_closed(f, q).coeff == 0.0);
        }
    }
    SUBCASE("below gamma the displayed formula is not certified") {
        ScaledPower f{1.0, 0.6 - 1.0, 1.0, 1.0};  // xi = 0.6 < gamma, != alpha
        CHECK_THROWS_AS(kfrac::power_hilfer_closed(f, p), std::domain_error);
    }
}

TEST_CASE("exact global power family") {
    SUBCASE("reference scenario") {
        ProblemParams p;  // m = 3 > m* = 2
        const auto es = kfrac::exact_solution(p);
        CHECK(es.nu == doctest::Approx(-0.25).epsilon(1e-15));
        // c = [Gamma(nu+1) / (lambda Gamma(nu - alpha + 1))]^{1/(m-1)}
        const double c = std::sqrt(kfrac::gamma_fn(0.75) / kfrac::gamma_fn(0.25));
        CHECK(es.y.coeff == doctest::Approx(c).epsilon(1e-14));
        CHECK(es.y.coeff == doctest::Approx(0.5813683170191186).epsilon(1e-13));
        CHECK(es.x_a == es.y.coeff);
        // the zeta^{gamma-1} mode is annihilated: the Volterra datum vanishes
        CHECK(es.x_a_volterra == 0.0);
        CHECK(es.y.exponent == es.nu);
    }
    SUBCASE("coefficient identity c Gamma(nu+1)/Gamma(nu-alpha+1) = lambda c^m") {
        for (auto [al, be, mu, m] :
             {std::tuple{0.5, 0.5, 0.0, 3.0}, std::tuple{0.7, 0.2, 0.5, 8.0}}) {
            ProblemParams p;
            p.alpha = al;
            p.beta = be;
            p.mu = mu;
            p.m = m;
            const auto es = kfrac::exact_solution(p);
            const double lhs = es.y.coeff * kfrac::gamma_fn(es.nu + 1.0) *
                               kfrac::recip_gamma(es.nu - al + 1.0);
            const double rhs = p.lambda * std::pow(es.y.coeff, m);
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
        }
    }
    SUBCASE("lambda scaling of the coefficient") {
        ProblemParams p1, p2;
        p2.lambda = 2.0;
        const double ratio =
            kfrac::exact_solution(p2).y.coeff / kfrac::exact_solution(p1).y.coeff;
        CHECK(ratio == doctest::Approx(std::pow(2.0, -0.5)).epsilon(1e-14));
    }
    SUBCASE("at or below the threshold there is no global power solution") {
        ProblemParams p;
        p.m = 1.5;  // below m* = 2
        CHECK_THROWS_WITH_AS(kfrac::exact_solution(p),
                             doctest::Contains("threshold"), std::domain_error);
        p.m = 2.0;  // at the threshold
        CHECK_THROWS_AS(kfrac::exact_solution(p), std::domain_error);
    }
}
