#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "contagion/gumbel.hpp"
#include "contagion/market.hpp"
#include "contagion/optimizer.hpp"
#include "contagion/parallel.hpp"

namespace contagion {

/// Uniform time grid with steps >= 1 intervals. Single-interval grids occur
/// as the tails [t_{N-1}, T] of the diagonal construction.
struct TimeGrid {
    double t_start;
    double t_end;
    int steps;

    TimeGrid(double t_start_, double t_end_, int steps_)
        : t_start(t_start_), t_end(t_end_), steps(steps_) {
        if (!(t_start < t_end)) throw std::invalid_argument("TimeGrid: needs t_start < t_end");
        if (steps < 1) throw std::invalid_argument("TimeGrid: needs steps >= 1");
    }
    double h() const { return (t_end - t_start) / steps; }
    double node(int k) const { return t_start + k * h(); }
    int nodes() const { return steps + 1; }
};

struct Scenario {
    bool pre_default = true;
    double theta1 = 0.0;  // first-default time, when !pre_default
    int defaulted = 0;    // defaulted name, when !pre_default

    static Scenario before_any_default() { return {}; }
    static Scenario one_default(double theta1, int name) { return {false, theta1, name}; }
};

/// Solved backward equation for one default scenario: Y values and the
/// optimal-strategy values at every grid node, plus the worst first-order
/// residual seen across the stored strategy points.
struct ScenarioSolution {
    Scenario scenario;
    TimeGrid grid;
    std::vector<double> y;
    std::vector<double> pi1;
    std::vector<double> pi2;  // empty for post-default (scalar) solutions
    double foc_residual_max = 0.0;

    double y_at(double t) const { return interp_linear(y, t); }
    double pi1_at(double t) const { return interp_linear(pi1, t); }
    double pi2_at(double t) const { return interp_linear(pi2, t); }

  private:
    double interp_linear(const std::vector<double>& v, double t) const {
        if (t < grid.t_start - 1e-12 || t > grid.t_end + 1e-12)
            throw std::domain_error("ScenarioSolution: time outside grid");
        const double s = std::min(std::max((t - grid.t_start) / grid.h(), 0.0),
                                  static_cast<double>(grid.steps));
        const int k = std::min(static_cast<int>(s), grid.steps - 1);
        const double w = s - k;
        return v[k] * (1.0 - w) + v[k + 1] * w;
    }
};

/// Fully-degenerate level after both defaults: (1/p) log of the ordered
/// density. Returns -infinity where the density vanishes.
inline double y2(const GumbelParams& copula, double theta1, double theta2, int first_name,
                 int second_name, double p) {
    return copula.log_density_ordered(theta1, theta2, first_name, second_name) / p;
}

namespace detail_cascade {

// Post-default generator f^{1,i}(t, y; theta1): constant -(sharpe^2)/(2p)
// plus the inner minimum with jump weight alpha(theta1, t, i, j) e^{-p y}.
struct PostGenerator {
    const GumbelParams& copula;
    const MarketParams& market;
    int defaulted;
    double theta1;
    MarketParams::SingleAsset survivor;

    PostGenerator(const GumbelParams& c, const MarketParams& m, int defaulted_name, double th1)
        : copula(c), market(m), defaulted(defaulted_name), theta1(th1),
          survivor(m.post_default_single_params(defaulted_name == 1 ? 2 : 1)) {}

    Solution1D inner(double t, double yval) const {
        const int j = defaulted == 1 ? 2 : 1;
        // RK4 endpoint evaluations can land one ulp below theta1
        const double t_eval = std::max(t, theta1);
        const double log_dens = copula.log_density_ordered(theta1, t_eval, defaulted, j);
        const double weight = std::exp(log_dens - market.p() * yval);
        PostDefaultProblem prob{survivor.sharpe, survivor.vol, market.p(), weight,
                                market.constraints().post_default};
        return solve_post_default(prob);
    }
    double operator()(double t, double yval) const {
        const double s = survivor.sharpe;
        return -s * s / (2.0 * market.p()) + inner(t, yval).value;
    }
};

// One classical RK4 step of dY/dt = -f(t, Y) with dt < 0 (backward march).
template <class F>
double rk4_backward_step(const F& f, double t, double y, double dt) {
    const double k1 = -f(t, y);
    const double k2 = -f(t + dt / 2.0, y + dt / 2.0 * k1);
    const double k3 = -f(t + dt / 2.0, y + dt / 2.0 * k2);
    const double k4 = -f(t + dt, y + dt * k3);
    return y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace detail_cascade

/// Backward solve of the post-first-default equation for Y^{1,i}(theta1) on
/// grid = [theta1, T]. Terminal value (1/p) log alpha^{1,i}_T(theta1); the
/// stored strategy at each node comes from the same inner solve the
/// right-hand side uses at full steps.
inline ScenarioSolution solve_y1(const MarketParams& market, const GumbelParams& copula,
                                 double theta1, int defaulted, const TimeGrid& grid,
                                 Alpha1Mode mode) {
    if (!(theta1 >= 0.0) || !(theta1 < market.T()))
        throw std::domain_error("solve_y1: needs 0 <= theta1 < T");
    if (std::abs(grid.t_start - theta1) > 1e-12 || std::abs(grid.t_end - market.T()) > 1e-12)
        throw std::invalid_argument("solve_y1: grid must span [theta1, T]");

    detail_cascade::PostGenerator f(copula, market, defaulted, theta1);
    const int n = grid.steps;
    ScenarioSolution sol{Scenario::one_default(theta1, defaulted), grid,
                         std::vector<double>(n + 1), std::vector<double>(n + 1), {}, 0.0};
    sol.y[n] = copula.log_alpha1(market.T(), theta1, defaulted, mode) / market.p();
    const double dt = -grid.h();
    for (int k = n; k > 0; --k)
        sol.y[k - 1] = detail_cascade::rk4_backward_step(f, grid.node(k), sol.y[k], dt);
    for (int k = 0; k <= n; ++k) {
        const Solution1D inner = f.inner(grid.node(k), sol.y[k]);
        sol.pi1[k] = inner.argmin;
        sol.foc_residual_max = std::max(sol.foc_residual_max, inner.foc_residual);
    }
    if (!(sol.foc_residual_max < 1e-8))
        throw std::runtime_error("solve_y1: stored strategy violates the residual bound");
    return sol;
}

/// Diagonal continuation values D^i(t) = Y^{1,i}_t(theta1 = t) on the
/// pre-default grid, one tail ODE solve per node. For beta > 1 the t = 0
/// node is the documented singular limit: d = -infinity, weight e^{p d} = 0.
struct DiagonalTable {
    TimeGrid grid;
    std::vector<double> d1;
    std::vector<double> d2;

    const std::vector<double>& values(int defaulted_name) const {
        return defaulted_name == 1 ? d1 : d2;
    }
};

inline DiagonalTable build_diagonal(const MarketParams& market, const GumbelParams& copula,
                                    const TimeGrid& grid, Alpha1Mode mode,
                                    unsigned n_threads = 0) {
    if (std::abs(grid.t_start) > 1e-12 || std::abs(grid.t_end - market.T()) > 1e-12)
        throw std::invalid_argument("build_diagonal: grid must span [0, T]");
    const int n = grid.steps;
    DiagonalTable table{grid, std::vector<double>(n + 1), std::vector<double>(n + 1)};
    const double T = market.T();

    parallel_for(static_cast<std::size_t>(n) + 1, [&](std::size_t k) {
        const double t = grid.node(static_cast<int>(k));
        for (int name = 1; name <= 2; ++name) {
            double value;
            if (static_cast<int>(k) == n) {
                value = copula.log_alpha1(T, T, name, mode) / market.p();
            } else if (k == 0 && copula.beta() > 1.0) {
                value = -std::numeric_limits<double>::infinity();
            } else {
                const TimeGrid tail(t, T, n - static_cast<int>(k));
                value = solve_y1(market, copula, t, name, tail, mode).y.front();
            }
            (name == 1 ? table.d1 : table.d2)[k] = value;
        }
    }, n_threads);
    return table;
}

namespace detail_cascade {

// Local 4-point (cubic) interpolation of node values on a uniform grid,
// used for the diagonal weights at RK4 half-steps. Values are weights
// (nonnegative); cubic overshoot near zero is floored at 0.
class WeightCurve {
  public:
    WeightCurve(const TimeGrid& grid, const std::vector<double>& log_values, double p)
        : grid_(grid), w_(log_values.size()) {
        for (std::size_t i = 0; i < log_values.size(); ++i) w_[i] = std::exp(p * log_values[i]);
    }

    double operator()(double t) const {
        const double s = (t - grid_.t_start) / grid_.h();
        const int n = grid_.steps;
        int k = static_cast<int>(std::floor(s));
        k = std::min(std::max(k, 0), n - 1);
        const double x = s - k;
        if (x == 0.0) return w_[k];
        if (n < 3) return w_[k] * (1.0 - x) + w_[k + 1] * x;
        const int base = std::min(std::max(k - 1, 0), n - 3);
        const double u = s - base;  // in [0, 3]
        const double f0 = w_[base], f1 = w_[base + 1], f2 = w_[base + 2], f3 = w_[base + 3];
        const double c0 = f0;
        const double c1 = f1 - f0;
        const double c2 = (f2 - 2.0 * f1 + f0) / 2.0;
        const double c3 = (f3 - 3.0 * f2 + 3.0 * f1 - f0) / 6.0;
        const double value = c0 + c1 * u + c2 * u * (u - 1.0) + c3 * u * (u - 1.0) * (u - 2.0);
        return std::max(value, 0.0);
    }

  private:
    TimeGrid grid_;
    std::vector<double> w_;
};

struct PreGenerator {
    const MarketParams& market;
    Vec2 lambda0;
    Mat2 sigma0;
    WeightCurve w1;
    WeightCurve w2;

    PreGenerator(const MarketParams& m, const DiagonalTable& diag)
        : market(m), lambda0(m.risk_premium0()), sigma0(m.sigma0_matrix()),
          w1(diag.grid, diag.d1, m.p()), w2(diag.grid, diag.d2, m.p()) {}

    Solution2D inner(double t, double yval) const {
        const double decay = std::exp(-market.p() * yval);
        PreDefaultProblem prob{lambda0, sigma0, market.p(), market.gamma(),
                               Vec2{decay * w1(t), decay * w2(t)},
                               market.constraints().pre_default};
        return solve_pre_default(prob);
    }
    double operator()(double t, double yval) const {
        return -lambda0.dot(lambda0) / (2.0 * market.p()) + inner(t, yval).value;
    }
};

}  // namespace detail_cascade

/// Backward solve of the pre-default equation on grid = [0, T] with the
/// diagonal table supplying the continuation weights. Terminal value
/// (1/p) log alpha^0_T = -(T/p) (a1^b + a2^b)^{1/b}.
inline ScenarioSolution solve_y0(const MarketParams& market, const GumbelParams& copula,
                                 const TimeGrid& grid, const DiagonalTable& diag) {
    if (std::abs(grid.t_start) > 1e-12 || std::abs(grid.t_end - market.T()) > 1e-12)
        throw std::invalid_argument("solve_y0: grid must span [0, T]");
    if (diag.grid.steps != grid.steps || std::abs(diag.grid.t_start - grid.t_start) > 1e-12 ||
        std::abs(diag.grid.t_end - grid.t_end) > 1e-12)
        throw std::invalid_argument("solve_y0: diagonal built on a different grid");

    detail_cascade::PreGenerator f(market, diag);
    const int n = grid.steps;
    ScenarioSolution sol{Scenario::before_any_default(), grid, std::vector<double>(n + 1),
                         std::vector<double>(n + 1), std::vector<double>(n + 1), 0.0};
    sol.y[n] = copula.log_alpha0(market.T()) / market.p();
    const double dt = -grid.h();
    for (int k = n; k > 0; --k)
        sol.y[k - 1] = detail_cascade::rk4_backward_step(f, grid.node(k), sol.y[k], dt);
    for (int k = 0; k <= n; ++k) {
        const Solution2D inner = f.inner(grid.node(k), sol.y[k]);
        sol.pi1[k] = inner.argmin.x;
        sol.pi2[k] = inner.argmin.y;
        sol.foc_residual_max = std::max(sol.foc_residual_max, inner.grad_norm);
    }
    if (!(sol.foc_residual_max < 1e-8))
        throw std::runtime_error("solve_y0: stored strategy violates the residual bound");
    return sol;
}

/// Pre-default value function V^0_t(x) = -e^{-p (x - Y^0_t)}, with Y linear
/// between nodes. Strictly negative, increasing in x.
inline double value_function(const ScenarioSolution& pre, const MarketParams& market, double t,
                             double x) {
    if (!pre.scenario.pre_default)
        throw std::invalid_argument("value_function: needs the pre-default solution");
    return -std::exp(-market.p() * (x - pre.y_at(t)));
}

/// Full strategy record for one realized scenario: the pre-default path on
/// [0, tau) and, when a default happens, the survivor's path on [tau, T],
/// with both one-sided values at the jump.
struct PiecewiseStrategy {
    ScenarioSolution pre;
    std::optional<ScenarioSolution> post;  // engaged when the scenario defaults
    double tau = std::numeric_limits<double>::infinity();
    int defaulted = 0;
    Vec2 jump_left{};    // pre-default amounts at tau-
    double jump_right = 0.0;  // survivor amount at tau+
};

inline PiecewiseStrategy strategy_path(const MarketParams& market, const GumbelParams& copula,
                                       const TimeGrid& grid, const Scenario& scenario,
                                       Alpha1Mode mode) {
    const DiagonalTable diag = build_diagonal(market, copula, grid, mode);
    PiecewiseStrategy path{solve_y0(market, copula, grid, diag), std::nullopt};
    if (scenario.pre_default) return path;
    if (!(scenario.theta1 > 0.0) || !(scenario.theta1 < market.T()))
        throw std::domain_error("strategy_path: default time must lie in (0, T)");
    const double tau = scenario.theta1;
    const int steps = std::max(1, static_cast<int>(std::ceil((market.T() - tau) / grid.h() - 1e-9)));
    const TimeGrid tail(tau, market.T(), steps);
    path.post = solve_y1(market, copula, tau, scenario.defaulted, tail, mode);
    path.tau = tau;
    path.defaulted = scenario.defaulted;
    path.jump_left = {path.pre.pi1_at(tau), path.pre.pi2_at(tau)};
    path.jump_right = path.post->pi1.front();
    return path;
}

}  // namespace contagion
