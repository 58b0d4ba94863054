#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <variant>
#include <vector>

#include "contagion/cascade.hpp"
#include "contagion/parallel.hpp"

namespace contagion {

/// splitmix64: deterministic stream derivation (master seed, stream id) ->
/// 64-bit seed. Path i's randomness depends only on (seed, i), never on the
/// thread schedule.
inline std::uint64_t derive_stream_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

struct SimConfig {
    long paths = 100000;
    std::uint64_t seed = 12345;
    int substeps = 4;
    bool antithetic = false;

    void validate() const {
        if (paths < 1) throw std::invalid_argument("SimConfig: paths must be >= 1");
        if (substeps < 1) throw std::invalid_argument("SimConfig: substeps must be >= 1");
    }
};

struct SimReport {
    double mean_utility = 0.0;
    double std_error = 0.0;
    double certainty_equivalent = 0.0;
    long n_paths = 0;
    long n_no_default = 0;
    long n_one_default = 0;
    long n_two_default = 0;
    long n_failures = 0;
};

/// Hold fixed amounts in both names pre-default; after the first default the
/// surviving component is held, the defaulted one is gone; after the second
/// default nothing is tradable.
struct ConstantStrategy {
    Vec2 amounts;
};

/// The solved cascade policy: pre-default amounts from the Y^0 solution, and
/// for a first default at tau the survivor's amounts from a fresh Y^{1,i}
/// solve on [tau, T]. Pure and deterministic per (scenario, tau).
struct CascadePolicy {
    const MarketParams* market;
    const GumbelParams* copula;
    const ScenarioSolution* pre;
    Alpha1Mode mode;

    ScenarioSolution solve_post(double tau, int defaulted) const {
        const double h = pre->grid.h();
        const int steps = std::max(1, static_cast<int>(std::ceil((market->T() - tau) / h - 1e-9)));
        return solve_y1(*market, *copula, tau, defaulted, TimeGrid(tau, market->T(), steps), mode);
    }
};

using TradingPolicy = std::variant<CascadePolicy, ConstantStrategy>;

namespace detail_sim {

struct PathAccumulator {
    std::vector<double> utility;   // per path; NaN marks an overflow failure
    std::vector<std::uint8_t> scenario;  // 0, 1, 2 defaults by horizon
};

// Deterministic pairwise sum, independent of thread count and vector order.
inline double pairwise_sum(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
    if (hi - lo <= 8) {
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += v[i];
        return s;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    return pairwise_sum(v, lo, mid) + pairwise_sum(v, mid, hi);
}

inline double pairwise_sum(const std::vector<double>& v) {
    return v.empty() ? 0.0 : pairwise_sum(v, 0, v.size());
}

struct PathResult {
    double utility;
    int defaults;
    bool failed;
};

// One wealth path under the given policy. `gauss` supplies N(0,1) draws
// (already sign-flipped for the antithetic member); the default times come
// from the pair-shared stream and are passed in.
template <class Gauss>
PathResult simulate_path(const MarketParams& market, const TradingPolicy& policy,
                         double tau1, double tau2, const TimeGrid& grid, int substeps,
                         Gauss&& gauss) {
    const double T = market.T();
    const double p = market.p();
    const Mat2 sigma0t = market.sigma0_matrix().transpose();
    const Vec2 b0 = market.b0();
    const double rho = market.rho();
    const double rho_c = std::sqrt(1.0 - rho * rho);

    const double t_first = std::min(tau1, tau2);
    const double t_second = std::max(tau1, tau2);
    const int first_name = tau1 <= tau2 ? 1 : 2;
    const int survivor = first_name == 1 ? 2 : 1;

    const ScenarioSolution* pre = nullptr;
    ScenarioSolution post_solved{Scenario{}, grid, {}, {}, {}, 0.0};
    const ConstantStrategy* constant = std::get_if<ConstantStrategy>(&policy);
    if (const CascadePolicy* cascade = std::get_if<CascadePolicy>(&policy)) {
        pre = cascade->pre;
        if (t_first < T) post_solved = cascade->solve_post(t_first, first_name);
    }

    auto pre_amounts = [&](double t) -> Vec2 {
        if (constant) return constant->amounts;
        return {pre->pi1_at(t), pre->pi2_at(t)};
    };
    auto post_amount = [&](double t) -> double {
        if (constant) return survivor == 1 ? constant->amounts.x : constant->amounts.y;
        return post_solved.pi1_at(std::min(t, T));
    };
    const MarketParams::SingleAsset surv = market.post_default_single_params(survivor);

    double x = 0.0;
    const double dt_nominal = grid.h() / substeps;
    const long n_sub = static_cast<long>(grid.steps) * substeps;

    // regime 0: [0, t_first ^ T); regime 1: [t_first, t_second ^ T); frozen after
    for (long s = 0; s < n_sub; ++s) {
        double lo = s * dt_nominal;
        double hi = std::min(T, lo + dt_nominal);
        if (lo >= t_second && t_second <= T) break;  // wealth frozen
        if (lo >= t_first) {
            // survivor regime, possibly split at the second default
            const double stop = std::min(hi, t_second);
            if (stop > lo) {
                const double dt = stop - lo;
                const double z1 = gauss();
                const double z2 = gauss();
                const double db = survivor == 1 ? rho_c * z1 + rho * z2 : z2;
                const double amount = post_amount(lo);
                x += amount * surv.drift * dt + amount * surv.vol * db * std::sqrt(dt);
            }
            if (t_second <= hi && t_second <= T) {
                x += post_amount(t_second) * (-1.0);  // survivor drops to zero
                break;
            }
            continue;
        }
        // pre-default regime, possibly split at the first default
        const double stop = std::min(hi, t_first);
        if (stop > lo) {
            const double dt = stop - lo;
            const double z1 = gauss();
            const double z2 = gauss();
            const Vec2 amounts = pre_amounts(lo);
            const Vec2 vol_row = sigma0t * amounts;
            x += amounts.dot(b0) * dt + (vol_row.x * z1 + vol_row.y * z2) * std::sqrt(dt);
        }
        if (t_first <= hi && t_first < T) {
            const Vec2 at_jump = pre_amounts(t_first);
            x += at_jump.dot(market.first_default_jump(first_name));
            // remainder of this sub-interval in the survivor regime
            const double lo2 = t_first;
            const double hi2 = std::min(hi, t_second);
            if (hi2 > lo2) {
                const double dt = hi2 - lo2;
                const double z1 = gauss();
                const double z2 = gauss();
                const double db = survivor == 1 ? rho_c * z1 + rho * z2 : z2;
                const double amount = post_amount(lo2);
                x += amount * surv.drift * dt + amount * surv.vol * db * std::sqrt(dt);
            }
            if (t_second <= hi && t_second <= T) {
                x += post_amount(t_second) * (-1.0);
                break;
            }
        } else if (t_first >= T) {
            continue;
        }
    }
    // counted with the same strictness as the applied jumps
    const int defaults = t_first >= T ? 0 : (t_second <= T ? 2 : 1);
    const double exponent = -p * x;
    if (std::abs(exponent) > kExpGuard) return {0.0, defaults, true};
    return {-std::exp(exponent), defaults, false};
}

template <class Fn>
void run_paths(const GumbelParams& copula, const SimConfig& cfg, const Fn& policy_eval,
               PathAccumulator& acc, unsigned n_threads = 0) {
    acc.utility.assign(cfg.paths, 0.0);
    acc.scenario.assign(cfg.paths, 0);
    parallel_for(static_cast<std::size_t>(cfg.paths), [&](std::size_t i) {
        const std::uint64_t pair_id = cfg.antithetic ? i / 2 : i;
        const bool mirror = cfg.antithetic && (i % 2 == 1);
        std::mt19937_64 rng_defaults(derive_stream_seed(cfg.seed, 2 * pair_id));
        std::mt19937_64 rng_gauss(derive_stream_seed(cfg.seed, 2 * pair_id + 1));
        const auto [tau1, tau2] = copula.sample_default_times(rng_defaults);
        std::normal_distribution<double> normal(0.0, 1.0);
        auto gauss = [&]() { return mirror ? -normal(rng_gauss) : normal(rng_gauss); };
        const PathResult r = policy_eval(tau1, tau2, gauss);
        acc.utility[i] = r.failed ? std::numeric_limits<double>::quiet_NaN() : r.utility;
        acc.scenario[i] = static_cast<std::uint8_t>(r.defaults);
    }, n_threads);
}

inline SimReport summarize(const MarketParams& market, const PathAccumulator& acc) {
    SimReport rep;
    rep.n_paths = static_cast<long>(acc.utility.size());
    std::vector<double> clean;
    clean.reserve(acc.utility.size());
    std::vector<double> sq;
    sq.reserve(acc.utility.size());
    for (std::size_t i = 0; i < acc.utility.size(); ++i) {
        if (std::isnan(acc.utility[i])) {
            ++rep.n_failures;
            continue;
        }
        clean.push_back(acc.utility[i]);
        switch (acc.scenario[i]) {
            case 0: ++rep.n_no_default; break;
            case 1: ++rep.n_one_default; break;
            default: ++rep.n_two_default; break;
        }
    }
    if (rep.n_failures * 10000 > rep.n_paths)
        throw std::runtime_error("simulate: utility overflow on more than 0.01% of paths");
    const double n = static_cast<double>(clean.size());
    const double mean = pairwise_sum(clean) / n;
    for (double& v : clean) {
        const double d = v - mean;
        sq.push_back(d * d);
    }
    const double var = pairwise_sum(sq) / std::max(1.0, n - 1.0);
    rep.mean_utility = mean;
    rep.std_error = std::sqrt(var / n);
    rep.certainty_equivalent = -std::log(-mean) / market.p();
    return rep;
}

}  // namespace detail_sim

/// Monte-Carlo estimate of E[-e^{-p X_T}] from x = 0 under the given policy:
/// exact copula default times first, then Euler increments on the
/// regime-split mesh. Deterministic for fixed (seed, paths, substeps).
inline SimReport simulate_expected_utility(const MarketParams& market, const GumbelParams& copula,
                                           const TradingPolicy& policy, const TimeGrid& grid,
                                           const SimConfig& cfg, unsigned n_threads = 0) {
    cfg.validate();
    detail_sim::PathAccumulator acc;
    detail_sim::run_paths(copula, cfg,
                          [&](double t1, double t2, auto& gauss) {
                              return detail_sim::simulate_path(market, policy, t1, t2, grid,
                                                               cfg.substeps, gauss);
                          },
                          acc, n_threads);
    return detail_sim::summarize(market, acc);
}

struct SweepEntry {
    Vec2 amounts;
    SimReport report;
    double mean_diff = 0.0;  // mean of (baseline utility - this utility), CRN
    double se_diff = 0.0;
};

/// Evaluate constant strategies under common random numbers against a
/// baseline policy; mean_diff > 0 means the baseline dominates. Differences
/// are computed path by path, which is what makes the comparison sharp.
inline std::vector<SweepEntry> constant_strategy_sweep(const MarketParams& market,
                                                       const GumbelParams& copula,
                                                       const TradingPolicy& baseline,
                                                       const std::vector<Vec2>& strategies,
                                                       const TimeGrid& grid, const SimConfig& cfg,
                                                       unsigned n_threads = 0) {
    cfg.validate();
    detail_sim::PathAccumulator base_acc;
    detail_sim::run_paths(copula, cfg,
                          [&](double t1, double t2, auto& gauss) {
                              return detail_sim::simulate_path(market, baseline, t1, t2, grid,
                                                               cfg.substeps, gauss);
                          },
                          base_acc, n_threads);

    std::vector<SweepEntry> out;
    out.reserve(strategies.size());
    for (const Vec2& s : strategies) {
        const TradingPolicy policy = ConstantStrategy{s};
        detail_sim::PathAccumulator acc;
        detail_sim::run_paths(copula, cfg,
                              [&](double t1, double t2, auto& gauss) {
                                  return detail_sim::simulate_path(market, policy, t1, t2, grid,
                                                                   cfg.substeps, gauss);
                              },
                              acc, n_threads);
        SweepEntry entry{s, detail_sim::summarize(market, acc), 0.0, 0.0};
        std::vector<double> diff;
        diff.reserve(acc.utility.size());
        for (std::size_t i = 0; i < acc.utility.size(); ++i) {
            if (std::isnan(base_acc.utility[i]) || std::isnan(acc.utility[i])) continue;
            diff.push_back(base_acc.utility[i] - acc.utility[i]);
        }
        const double n = static_cast<double>(diff.size());
        const double mean = detail_sim::pairwise_sum(diff) / n;
        std::vector<double> sq;
        sq.reserve(diff.size());
        for (double d : diff) sq.push_back((d - mean) * (d - mean));
        entry.mean_diff = mean;
        entry.se_diff = std::sqrt(detail_sim::pairwise_sum(sq) / std::max(1.0, n - 1.0) / n);
        out.push_back(entry);
    }
    return out;
}

}  // namespace contagion
