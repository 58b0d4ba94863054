#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "contagion/simulate.hpp"
#include "oracles.hpp"

using namespace contagion;

namespace {

struct Setup {
    GumbelParams copula;
    MarketParams market;
    TimeGrid grid;
    DiagonalTable diag;
    ScenarioSolution y0;

    Setup(double a1, double a2, double beta, double gamma, int steps, Alpha1Mode mode)
        : copula(a1, a2, beta),
          market({0.02, 0.02}, {0.1, 0.1}, 0.0, {0.01, 0.01}, {0.2, 0.2}, {gamma, gamma}, 1.0, 1.0),
          grid(0.0, 1.0, steps),
          diag(build_diagonal(market, copula, grid, mode)),
          y0(solve_y0(market, copula, grid, diag)) {}

    CascadePolicy policy(Alpha1Mode mode = Alpha1Mode::Derived) const {
        return {&market, &copula, &y0, mode};
    }
};

}  // namespace

TEST_CASE("zero strategy gives utility -1 with zero variance") {
    GumbelParams g(0.1, 0.1, 2.0);
    MarketParams m({0.02, 0.02}, {0.1, 0.1}, 0.0, {0.01, 0.01}, {0.2, 0.2}, {-0.5, -0.5}, 1.0, 1.0);
    SimConfig cfg;
    cfg.paths = 500;
    const SimReport rep = simulate_expected_utility(m, g, ConstantStrategy{{0.0, 0.0}},
                                                    TimeGrid(0.0, 1.0, 20), cfg);
    CHECK(rep.mean_utility == -1.0);
    CHECK(rep.std_error == 0.0);
    CHECK(rep.certainty_equivalent == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("degenerate dynamics: zero drift and vol, defaults suppressed") {
    GumbelParams g(1e-12, 1e-12, 1.0);
    MarketParams m({0.0, 0.0}, {1e-12, 1e-12}, 0.0, {0.0, 0.0}, {1e-12, 1e-12}, {0.0, 0.0}, 1.0,
                   1.0);
    SimConfig cfg;
    cfg.paths = 2000;
    const SimReport rep = simulate_expected_utility(m, g, ConstantStrategy{{1.3, -0.7}},
                                                    TimeGrid(0.0, 1.0, 20), cfg);
    CHECK(rep.mean_utility == Catch::Approx(-1.0).margin(1e-9));
    CHECK(rep.n_no_default == rep.n_paths);
}

TEST_CASE("determinism: identical config gives bit-identical reports") {
    const Setup s(0.1, 0.1, 2.0, -0.5, 40, Alpha1Mode::Derived);
    SimConfig cfg;
    cfg.paths = 4000;
    cfg.seed = 888;
    const SimReport a = simulate_expected_utility(s.market, s.copula, s.policy(), s.grid, cfg);
    const SimReport b = simulate_expected_utility(s.market, s.copula, s.policy(), s.grid, cfg);
    CHECK(a.mean_utility == b.mean_utility);
    CHECK(a.std_error == b.std_error);
    CHECK(a.n_no_default == b.n_no_default);

    // thread count must not change the result
    const SimReport c =
        simulate_expected_utility(s.market, s.copula, s.policy(), s.grid, cfg, /*threads=*/3);
    CHECK(a.mean_utility == c.mean_utility);
    CHECK(a.n_two_default == c.n_two_default);

    SimConfig other = cfg;
    other.seed = 889;
    const SimReport d = simulate_expected_utility(s.market, s.copula, s.policy(), s.grid, other);
    CHECK(a.mean_utility != d.mean_utility);
}

TEST_CASE("scenario frequencies match the closed forms") {
    const Setup s(0.1, 0.1, 2.0, -0.5, 40, Alpha1Mode::Derived);
    SimConfig cfg;
    cfg.paths = 60000;
    cfg.seed = 31;
    const SimReport rep = simulate_expected_utility(s.market, s.copula, s.policy(), s.grid, cfg);
    const double n = static_cast<double>(rep.n_paths);

    const double p0 = s.copula.alpha0(1.0);
    const double f0 = rep.n_no_default / n;
    CHECK(f0 == Catch::Approx(p0).margin(3.0 * std::sqrt(p0 * (1 - p0) / n)));

    // P(name 1 defaults first, by T) by quadrature of the tail density
    const double p_first_1 = oracles::integrate(
        [&](double t) { return s.copula.alpha1(t, t, 1, Alpha1Mode::Derived); }, 1e-12, 1.0,
        1e-10);
    SimConfig count_cfg = cfg;
    long first1 = 0;
    for (long i = 0; i < count_cfg.paths; ++i) {
        std::mt19937_64 rng(derive_stream_seed(count_cfg.seed, 2 * static_cast<std::uint64_t>(i)));
        const auto [t1, t2] = s.copula.sample_default_times(rng);
        if (std::min(t1, t2) <= 1.0 && t1 <= t2) ++first1;
    }
    const double f1 = first1 / n;
    CHECK(f1 == Catch::Approx(p_first_1).margin(3.0 * std::sqrt(p_first_1 * (1 - p_first_1) / n)));
}

TEST_CASE("cascade strategy matches the candidate value within 3 SE") {
    const Setup s(0.1, 0.1, 2.0, -0.5, 100, Alpha1Mode::Derived);
    SimConfig cfg;
    cfg.paths = 20000;
    cfg.seed = 777;
    cfg.substeps = 4;
    const SimReport rep = simulate_expected_utility(s.market, s.copula, s.policy(), s.grid, cfg);
    const double target = -std::exp(s.y0.y.front());
    CHECK(std::abs(rep.mean_utility - target) < 3.0 * rep.std_error);
}

TEST_CASE("antithetic pairs anticorrelate the no-default utilities") {
    const Setup s(0.1, 0.1, 2.0, -0.5, 40, Alpha1Mode::Derived);
    SimConfig anti;
    anti.paths = 20000;
    anti.seed = 55;
    anti.antithetic = true;
    // statistical check, not a per-run assertion of error reduction: estimate
    // the within-pair utility correlation over pairs with no default
    detail_sim::PathAccumulator acc;
    detail_sim::run_paths(s.copula, anti,
                          [&](double t1, double t2, auto& gauss) {
                              const TradingPolicy pol = s.policy();
                              return detail_sim::simulate_path(s.market, pol, t1, t2, s.grid,
                                                               anti.substeps, gauss);
                          },
                          acc);
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    long m = 0;
    for (long i = 0; i + 1 < anti.paths; i += 2) {
        if (acc.scenario[i] != 0 || acc.scenario[i + 1] != 0) continue;
        const double a = acc.utility[i], b = acc.utility[i + 1];
        sx += a; sy += b; sxx += a * a; syy += b * b; sxy += a * b;
        ++m;
    }
    const double corr = (sxy / m - sx / m * sy / m) /
                        std::sqrt((sxx / m - sx / m * sx / m) * (syy / m - sy / m * sy / m));
    CHECK(m > 1000);
    CHECK(corr < -0.2);
}

TEST_CASE("sweep: no-default limit reduces the cascade to the benchmark") {
    // negligible default intensities: cascade == single-regime model, whose
    // optimum is the static benchmark amount
    const Setup s(1e-8, 1e-8, 1.0, -0.5, 40, Alpha1Mode::Derived);
    SimConfig cfg;
    cfg.paths = 30000;
    cfg.seed = 99;
    const Vec2 merton = merton_strategy(s.market);
    const auto rows = constant_strategy_sweep(s.market, s.copula, s.policy(), {merton}, s.grid, cfg);
    REQUIRE(rows.size() == 1);
    CHECK(std::abs(rows[0].mean_diff) < 3.0 * rows[0].se_diff + 1e-12);
}

TEST_CASE("sweep: cascade dominates perturbed constants and a bad strategy loses") {
    const Setup s(0.01, 0.1, 2.0, -0.5, 100, Alpha1Mode::Derived);
    SimConfig cfg;
    cfg.paths = 30000;
    cfg.seed = 4242;
    const Vec2 center{s.y0.pi1[1], s.y0.pi2[1]};
    std::vector<Vec2> grid_pts;
    for (double dx : {-0.5, 0.0, 0.5})
        for (double dy : {-0.5, 0.0, 0.5}) grid_pts.push_back({center.x + dx, center.y + dy});
    grid_pts.push_back({-center.x, -center.y});  // deliberately bad
    const auto rows = constant_strategy_sweep(s.market, s.copula, s.policy(), grid_pts, s.grid, cfg);
    for (std::size_t i = 0; i + 1 < rows.size(); ++i)
        CHECK(rows[i].mean_diff > -3.0 * rows[i].se_diff);
    CHECK(rows.back().mean_diff > 5.0 * rows.back().se_diff);
}

TEST_CASE("common random numbers keep dominance conclusions stable across seeds") {
    const Setup s(0.1, 0.1, 2.0, -0.5, 60, Alpha1Mode::Derived);
    const Vec2 bad{-2.0, -2.0};
    double margin[2];
    for (int k = 0; k < 2; ++k) {
        SimConfig cfg;
        cfg.paths = 15000;
        cfg.seed = 1000 + static_cast<std::uint64_t>(k);
        const auto rows = constant_strategy_sweep(s.market, s.copula, s.policy(), {bad}, s.grid, cfg);
        margin[k] = rows[0].mean_diff / rows[0].se_diff;
    }
    CHECK(margin[0] > 5.0);
    CHECK(margin[1] > 5.0);
}

TEST_CASE("utility overflow paths are failures, and too many is an error") {
    GumbelParams g(0.1, 0.1, 2.0);
    // enormous leverage makes -p X_T overflow the exponential on most paths
    MarketParams m({0.02, 0.02}, {0.1, 0.1}, 0.0, {0.01, 0.01}, {0.2, 0.2}, {-0.5, -0.5}, 1.0, 1.0);
    SimConfig cfg;
    cfg.paths = 200;
    CHECK_THROWS_AS(simulate_expected_utility(m, g, ConstantStrategy{{9000.0, 9000.0}},
                                              TimeGrid(0.0, 1.0, 20), cfg),
                    std::runtime_error);
}

TEST_CASE("sim config validation") {
    SimConfig cfg;
    cfg.paths = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.paths = 10;
    cfg.substeps = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
