#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "contagion/gumbel.hpp"
#include "contagion/quadrature.hpp"
#include "oracles.hpp"

using contagion::Alpha1Mode;
using contagion::GumbelParams;

TEST_CASE("joint survival closed form") {
    // independence: product of exponential survivals
    GumbelParams indep(1.0, 1.0, 1.0);
    CHECK(indep.joint_survival(1.0, 1.0) == Catch::Approx(std::exp(-2.0)).epsilon(1e-14));

    GumbelParams g(0.1, 0.1, 2.0);
    CHECK(g.joint_survival(1.0, 1.0) == Catch::Approx(std::exp(-std::sqrt(0.02))).epsilon(1e-14));
    CHECK(g.joint_survival(0.0, 0.0) == 1.0);
    CHECK(indep.joint_survival(0.0, 0.0) == 1.0);

    // nonincreasing in each argument
    double prev = 1.0;
    for (double t = 0.0; t <= 5.0; t += 0.25) {
        const double v = g.joint_survival(t, 0.7);
        CHECK(v <= prev + 1e-15);
        prev = v;
    }
    CHECK_THROWS_AS(g.joint_survival(-0.1, 1.0), std::domain_error);
}

TEST_CASE("joint survival matches quadrature of the density over the tail") {
    // independent oracle: 2-D quadrature of the density over (1, inf)^2
    GumbelParams g(0.1, 0.1, 2.0);
    auto inner = [&](double th1) {
        return oracles::integrate([&](double th2) { return g.density_unordered(th1, th2); }, 1.0,
                                  900.0, 1e-12);
    };
    const double mass = oracles::integrate(inner, 1.0, 900.0, 1e-10);
    CHECK(mass == Catch::Approx(g.joint_survival(1.0, 1.0)).epsilon(1e-8));
}

TEST_CASE("unordered density: independence case and normalization") {
    GumbelParams indep(1.0, 1.0, 1.0);
    CHECK(indep.density_unordered(1.0, 1.0) == Catch::Approx(std::exp(-2.0)).epsilon(1e-14));

    GumbelParams g(0.1, 0.3, 2.0);
    auto inner = [&](double th1) {
        return oracles::integrate([&](double th2) { return g.density_unordered(th1, th2); }, 1e-12,
                                  500.0, 1e-11);
    };
    const double mass = oracles::integrate(inner, 1e-12, 500.0, 1e-9);
    CHECK(mass == Catch::Approx(1.0).margin(1e-6));

    CHECK_THROWS_AS(g.density_unordered(0.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(g.density_unordered(1.0, 1e-13), std::domain_error);
}

TEST_CASE("density equals the mixed partial of the survival function") {
    GumbelParams g(0.01, 0.1, 2.0);
    auto fd = [&](double th1, double th2, double h) {
        return (g.joint_survival(th1 + h, th2 + h) - g.joint_survival(th1 + h, th2 - h) -
                g.joint_survival(th1 - h, th2 + h) + g.joint_survival(th1 - h, th2 - h)) /
               (4.0 * h * h);
    };
    for (double th1 : {0.3, 0.5, 0.9}) {
        for (double th2 : {0.4, 0.7, 1.3}) {
            // Richardson-extrapolated central differences; plain h = 1e-5
            // differences lose too many digits to cancellation at this scale.
            const double extrap = (4.0 * fd(th1, th2, 1e-3) - fd(th1, th2, 2e-3)) / 3.0;
            CHECK(extrap == Catch::Approx(g.density_unordered(th1, th2)).epsilon(1e-5));
        }
    }
}

TEST_CASE("ordered density slot mapping and normalization over the wedge") {
    GumbelParams g(0.1, 0.1, 2.0);
    CHECK(g.density_ordered(0.3, 0.8, 1, 2) == g.density_unordered(0.3, 0.8));
    CHECK(g.density_ordered(0.3, 0.8, 2, 1) == g.density_unordered(0.8, 0.3));
    CHECK_THROWS_AS(g.density_ordered(0.9, 0.8, 1, 2), std::domain_error);
    CHECK_THROWS_AS(g.density_ordered(0.3, 0.8, 1, 1), std::domain_error);

    auto wedge = [&](int i, int j) {
        return oracles::integrate(
            [&](double th1) {
                return oracles::integrate(
                    [&](double th2) { return g.density_ordered(th1, th2, i, j); }, th1, 800.0,
                    1e-11);
            },
            1e-12, 800.0, 1e-9);
    };
    CHECK(wedge(1, 2) + wedge(2, 1) == Catch::Approx(1.0).margin(1e-6));
}

TEST_CASE("alpha1: independence reduction, tail identity, mode factor") {
    GumbelParams indep(0.2, 0.3, 1.0);
    // derived mode at beta = 1: marginal density times partner survival
    CHECK(indep.alpha1(0.9, 0.4, 1, Alpha1Mode::Derived) ==
          Catch::Approx(0.2 * std::exp(-0.2 * 0.4 - 0.3 * 0.9)).epsilon(1e-12));

    GumbelParams g(0.1, 0.3, 2.0);
    const double direct = g.alpha1(0.9, 0.4, 1, Alpha1Mode::Derived);
    const double tail = oracles::integrate(
        [&](double s) { return g.density_ordered(0.4, s, 1, 2); }, 0.9, 500.0, 1e-12);
    CHECK(direct == Catch::Approx(tail).epsilon(1e-6));
    CHECK(direct == Catch::Approx(0.01115430538588484).epsilon(1e-10));

    // 5x5 grid of the defining identity
    for (int a = 1; a <= 5; ++a) {
        for (int b = 1; b <= 5; ++b) {
            const double th1 = 0.1 * a;
            const double t = th1 + 0.17 * b;
            for (int name : {1, 2}) {
                const int partner = name == 1 ? 2 : 1;
                const double lhs = g.alpha1(t, th1, name, Alpha1Mode::Derived);
                const double rhs = oracles::integrate(
                    [&](double s) { return g.density_ordered(th1, s, name, partner); }, t, 500.0,
                    1e-12);
                CHECK(lhs == Catch::Approx(rhs).epsilon(1e-6));
            }
        }
    }

    // the literal display equals the derived form times u^beta
    const double u = g.exponent_u(0.4, 0.9);
    CHECK(g.alpha1(0.9, 0.4, 1, Alpha1Mode::Literal) ==
          Catch::Approx(direct * std::pow(u, 2.0)).epsilon(1e-13));

    CHECK_THROWS_AS(g.alpha1(0.3, 0.4, 1, Alpha1Mode::Derived), std::domain_error);
    CHECK_THROWS_AS(g.alpha1(0.9, 0.0, 1, Alpha1Mode::Derived), std::domain_error);
}

TEST_CASE("alpha0 is the diagonal survival, exactly") {
    GumbelParams g(0.1, 0.1, 2.0);
    CHECK(g.alpha0(1.0) == g.joint_survival(1.0, 1.0));
    CHECK(g.alpha0(1.0) == Catch::Approx(std::exp(-std::sqrt(0.02))).epsilon(1e-14));
    CHECK(g.alpha0(0.0) == 1.0);

    GumbelParams indep(0.2, 0.3, 1.0);
    CHECK(indep.alpha0(2.0) == Catch::Approx(std::exp(-1.0)).epsilon(1e-14));
    for (double t = 0.1; t < 3.0; t += 0.3) CHECK(g.alpha0(t) == g.joint_survival(t, t));
}

TEST_CASE("beta = 1 reduces every closed form to independent exponentials") {
    GumbelParams g(0.2, 0.7, 1.0);
    for (double th1 : {0.1, 0.8, 2.0}) {
        for (double th2 : {0.2, 1.1, 3.0}) {
            CHECK(g.joint_survival(th1, th2) ==
                  Catch::Approx(std::exp(-0.2 * th1 - 0.7 * th2)).epsilon(1e-12));
            CHECK(g.density_unordered(th1, th2) ==
                  Catch::Approx(0.2 * 0.7 * std::exp(-0.2 * th1 - 0.7 * th2)).epsilon(1e-12));
        }
    }
    CHECK(g.alpha0(1.1) == Catch::Approx(std::exp(-0.9 * 1.1)).epsilon(1e-12));
    CHECK(g.alpha1(0.9, 0.5, 2, Alpha1Mode::Derived) ==
          Catch::Approx(0.7 * std::exp(-0.7 * 0.5 - 0.2 * 0.9)).epsilon(1e-12));
    CHECK(g.survival_correlation(1.0) == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("survival correlation reproduces the quoted values") {
    CHECK(GumbelParams(0.01, 0.1, 2.0).survival_correlation(1.0) == Catch::Approx(0.2936).margin(5e-4));
    CHECK(GumbelParams(0.1, 0.1, 2.0).survival_correlation(1.0) == Catch::Approx(0.5736).margin(5e-4));
    CHECK(GumbelParams(0.3, 0.1, 2.0).survival_correlation(1.0) == Catch::Approx(0.4555).margin(5e-4));
    CHECK(GumbelParams(0.01, 0.01, 2.0).survival_correlation(1.0) == Catch::Approx(0.5846).margin(5e-4));
    CHECK_THROWS_AS(GumbelParams(1e-200, 0.1, 2.0).survival_correlation(1.0), std::domain_error);
}

TEST_CASE("construction rejects invalid parameters") {
    CHECK_THROWS_AS(GumbelParams(0.0, 0.1, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(GumbelParams(0.1, -0.1, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(GumbelParams(0.1, 0.1, 0.5), std::invalid_argument);
}

TEST_CASE("positive stable sampler has the right Laplace transform") {
    std::mt19937_64 rng(777);
    const double alpha = 0.5;
    const int n = 200000;
    for (double s : {0.5, 1.0, 2.0}) {
        double acc = 0.0;
        std::mt19937_64 r2(778);
        for (int i = 0; i < n; ++i) acc += std::exp(-s * GumbelParams::positive_stable(alpha, r2));
        const double mc = acc / n;
        const double target = std::exp(-std::pow(s, alpha));
        CHECK(mc == Catch::Approx(target).margin(5e-3));
    }
    (void)rng;
}

TEST_CASE("default-time sampler: marginals, independence, dependence") {
    const int n = 100000;

    SECTION("independence: survival indicators uncorrelated") {
        GumbelParams g(0.5, 0.8, 1.0);
        std::mt19937_64 rng(2024);
        double s1 = 0, s2 = 0, s12 = 0;
        for (int i = 0; i < n; ++i) {
            auto [t1, t2] = g.sample_default_times(rng);
            const double i1 = t1 > 1.0, i2 = t2 > 1.0;
            s1 += i1; s2 += i2; s12 += i1 * i2;
        }
        const double p1 = s1 / n, p2 = s2 / n, p12 = s12 / n;
        const double corr = (p12 - p1 * p2) /
                            std::sqrt(p1 * (1 - p1) * p2 * (1 - p2));
        CHECK(std::abs(corr) < 3.0 / std::sqrt(static_cast<double>(n)));
    }

    SECTION("gumbel dependence: empirical survival correlation near closed form") {
        GumbelParams g(0.1, 0.1, 2.0);
        std::mt19937_64 rng(2025);
        const int big = 1000000;
        double s1 = 0, s2 = 0, s12 = 0;
        for (int i = 0; i < big; ++i) {
            auto [t1, t2] = g.sample_default_times(rng);
            const double i1 = t1 > 1.0, i2 = t2 > 1.0;
            s1 += i1; s2 += i2; s12 += i1 * i2;
        }
        const double p1 = s1 / big, p2 = s2 / big, p12 = s12 / big;
        const double corr = (p12 - p1 * p2) / std::sqrt(p1 * (1 - p1) * p2 * (1 - p2));
        // indicator-correlation estimator SE is ~ (1 - rho^2) / sqrt(n)
        CHECK(corr == Catch::Approx(0.573622).margin(3.0 * (1.0 - 0.573 * 0.573) / std::sqrt(big)));
    }

    SECTION("marginal of tau1 passes a KS test against its exponential law") {
        GumbelParams g(0.1, 0.4, 2.0);
        std::mt19937_64 rng(2026);
        std::vector<double> sample(n);
        for (int i = 0; i < n; ++i) sample[i] = g.sample_default_times(rng).first;
        const double d = oracles::ks_distance(
            sample, [](double t) { return 1.0 - std::exp(-0.1 * t); });
        CHECK(d < 1.628 / std::sqrt(static_cast<double>(n)));  // 1% critical value
    }

    SECTION("agrees with a conditional-inversion sampler on joint survival") {
        GumbelParams g(0.2, 0.3, 2.0);
        // secondary sampler: tau1 by marginal inversion, tau2 by bisection on
        // the conditional survival S(t2 | tau1) = -dG/dth1 (th1, t2) / (a1 e^{-a1 th1})
        auto conditional_sample = [&](std::mt19937_64& rng) {
            std::uniform_real_distribution<double> u01(1e-16, 1.0);
            const double t1 = -std::log(u01(rng)) / 0.2;
            const double target = u01(rng);
            auto cond_surv = [&](double t2) {
                // -dG/dth1 = a1^b th1^{b-1} u^{1-b} e^{-u}, normalized by a1 e^{-a1 th1}
                const double u = g.exponent_u(t1, t2);
                const double num = std::pow(0.2, 2.0) * t1 * std::pow(u, -1.0) * std::exp(-u);
                return num / (0.2 * std::exp(-0.2 * t1));
            };
            double lo = 0.0, hi = 1.0;
            while (cond_surv(hi) > target) hi *= 2.0;
            for (int it = 0; it < 80; ++it) {
                const double mid = 0.5 * (lo + hi);
                (cond_surv(mid) > target ? lo : hi) = mid;
            }
            return std::pair<double, double>{t1, 0.5 * (lo + hi)};
        };
        std::mt19937_64 ra(11), rb(12);
        const int m = 60000;
        double frailty_hits = 0, inversion_hits = 0;
        for (int i = 0; i < m; ++i) {
            auto [a1t, a2t] = g.sample_default_times(ra);
            frailty_hits += (a1t > 1.0 && a2t > 2.0);
            auto [b1t, b2t] = conditional_sample(rb);
            inversion_hits += (b1t > 1.0 && b2t > 2.0);
        }
        const double pf = frailty_hits / m, pi = inversion_hits / m;
        const double se = std::sqrt(pf * (1 - pf) / m + pi * (1 - pi) / m);
        CHECK(std::abs(pf - pi) < 4.0 * se);
        CHECK(pf == Catch::Approx(g.joint_survival(1.0, 2.0)).margin(4.0 * std::sqrt(pf * (1 - pf) / m)));
    }
}
