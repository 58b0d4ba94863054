#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "contagion/cascade.hpp"
#include "contagion/config.hpp"
#include "contagion/quadrature.hpp"
#include "contagion/reference.hpp"
#include "contagion/simulate.hpp"

namespace contagion {

// Exit codes of the command layer (and the CLI around it).
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;  // config/validation/io problems
inline constexpr int kExitSolver = 2;      // a solve failed to converge
inline constexpr int kExitCheck = 3;       // an invariant check failed

namespace detail_cmd {

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

class CsvFile {
  public:
    CsvFile(const std::string& dir, const std::string& name) : path_(dir + "/" + name) {
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        out_.open(path_, std::ios::trunc);
        if (!out_) throw ConfigError("output.dir", "cannot write '" + path_ + "'");
    }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
        out_ << "\n";
    }
    void numeric_row(const std::string& head, const std::vector<double>& cells) {
        out_ << head;
        for (double c : cells) out_ << "," << fmt(c);
        out_ << "\n";
    }
    const std::string& path() const { return path_; }

  private:
    std::string path_;
    std::ofstream out_;
};

// Run fn, mapping failures onto the exit-code contract.
inline int guarded(const char* stage, const std::function<void()>& fn) {
    try {
        fn();
        return kExitOk;
    } catch (const ConfigError& e) {
        std::cerr << "error (validation) in " << stage << ": " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error (validation) in " << stage << ": " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::domain_error& e) {
        std::cerr << "error (validation) in " << stage << ": " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error (solver) in " << stage << ": " << e.what() << "\n";
        return kExitSolver;
    }
}

struct CascadeRun {
    GumbelParams copula;
    MarketParams market;
    TimeGrid grid;
    DiagonalTable diag;
    ScenarioSolution y0;
};

inline CascadeRun run_cascade(const RunConfig& cfg) {
    GumbelParams copula = cfg.copula();
    MarketParams market = cfg.market();
    TimeGrid grid(0.0, market.T(), cfg.grid_steps);
    DiagonalTable diag = build_diagonal(market, copula, grid, cfg.mode);
    ScenarioSolution y0 = solve_y0(market, copula, grid, diag);
    return {std::move(copula), std::move(market), grid, std::move(diag), std::move(y0)};
}

}  // namespace detail_cmd

/// solve: run the cascade for the configured parameters and emit
/// y0.csv, pi0.csv and diagonal.csv into the output directory.
inline int cmd_solve(const RunConfig& cfg) {
    return detail_cmd::guarded("solve", [&] {
        const detail_cmd::CascadeRun run = detail_cmd::run_cascade(cfg);
        detail_cmd::CsvFile y0(cfg.out_dir, "y0.csv");
        y0.row({"t", "y0"});
        detail_cmd::CsvFile pi0(cfg.out_dir, "pi0.csv");
        pi0.row({"t", "pi1", "pi2"});
        detail_cmd::CsvFile diag(cfg.out_dir, "diagonal.csv");
        diag.row({"t", "d1", "d2"});
        for (int k = 0; k <= run.grid.steps; ++k) {
            const double t = run.grid.node(k);
            y0.numeric_row(detail_cmd::fmt(t), {run.y0.y[k]});
            pi0.numeric_row(detail_cmd::fmt(t), {run.y0.pi1[k], run.y0.pi2[k]});
            diag.numeric_row(detail_cmd::fmt(t), {run.diag.d1[k], run.diag.d2[k]});
        }
    });
}

/// table: run the cascade for every parameter block of the requested table
/// and emit initial strategies, survival correlation and the benchmark
/// column; --compare appends the embedded reference values and deviations.
inline int cmd_table(const RunConfig& cfg, int table_id, bool compare = false) {
    if (table_id != 1 && table_id != 2) {
        std::cerr << "error (validation) in table: table id must be 1 or 2\n";
        return kExitValidation;
    }
    return detail_cmd::guarded("table", [&] {
        const auto blocks = [&]() -> std::vector<reference::TableBlock> {
            if (table_id == 1) return {reference::kTable1.begin(), reference::kTable1.end()};
            return {reference::kTable2.begin(), reference::kTable2.end()};
        }();
        detail_cmd::CsvFile csv(cfg.out_dir, "table" + std::to_string(table_id) + ".csv");
        std::vector<std::string> head = {"a1", "a2", "beta", "rho", "rho_s", "quantity"};
        for (double g : reference::kGammaColumns) head.push_back("gamma_" + detail_cmd::fmt(g));
        head.push_back("merton");
        csv.row(head);

        for (const reference::TableBlock& blk : blocks) {
            RunConfig block_cfg = cfg;
            block_cfg.a1 = blk.a1;
            block_cfg.a2 = blk.a2;
            block_cfg.beta = blk.beta;
            block_cfg.rho = blk.rho;
            std::array<double, 5> pi1{}, pi2{};
            for (std::size_t gi = 0; gi < reference::kGammaColumns.size(); ++gi) {
                block_cfg.gamma = {reference::kGammaColumns[gi], reference::kGammaColumns[gi]};
                const detail_cmd::CascadeRun run = detail_cmd::run_cascade(block_cfg);
                pi1[gi] = run.y0.pi1.front();
                pi2[gi] = run.y0.pi2.front();
            }
            const GumbelParams copula(blk.a1, blk.a2, blk.beta);
            block_cfg.gamma = cfg.gamma;
            const MarketParams market = block_cfg.market();
            const double rho_s = copula.survival_correlation(market.T());
            const Vec2 merton = merton_strategy(market);
            const std::string tag = detail_cmd::fmt(blk.a1) + "," + detail_cmd::fmt(blk.a2) + "," +
                                    detail_cmd::fmt(blk.beta) + "," + detail_cmd::fmt(blk.rho) + "," +
                                    detail_cmd::fmt(rho_s);
            csv.numeric_row(tag + ",pi1", {pi1[0], pi1[1], pi1[2], pi1[3], pi1[4], merton.x});
            csv.numeric_row(tag + ",pi2", {pi2[0], pi2[1], pi2[2], pi2[3], pi2[4], merton.y});
            if (compare) {
                csv.numeric_row(tag + ",pi1_ref",
                                {blk.pi1[0], blk.pi1[1], blk.pi1[2], blk.pi1[3], blk.pi1[4], blk.merton});
                csv.numeric_row(tag + ",pi2_ref",
                                {blk.pi2[0], blk.pi2[1], blk.pi2[2], blk.pi2[3], blk.pi2[4], blk.merton});
                std::vector<double> d1(6), d2(6);
                for (int i = 0; i < 5; ++i) {
                    d1[i] = std::abs(pi1[i] - blk.pi1[i]);
                    d2[i] = std::abs(pi2[i] - blk.pi2[i]);
                }
                d1[5] = std::abs(merton.x - blk.merton);
                d2[5] = std::abs(merton.y - blk.merton);
                csv.numeric_row(tag + ",pi1_absdev", d1);
                csv.numeric_row(tag + ",pi2_absdev", d2);
            }
        }
    });
}

/// figure: plot-ready long-format CSV (series,x,y) for the three standard
/// figures. Figure 3 duplicates the jump node with its left and right values.
inline int cmd_figure(const RunConfig& cfg, int figure_id) {
    if (figure_id < 1 || figure_id > 3) {
        std::cerr << "error (validation) in figure: figure id must be 1, 2 or 3\n";
        return kExitValidation;
    }
    return detail_cmd::guarded("figure", [&] {
        detail_cmd::CsvFile csv(cfg.out_dir, "figure" + std::to_string(figure_id) + ".csv");
        csv.row({"series", "x", "y"});

        if (figure_id == 1) {
            // initial strategy vs gamma, symmetric intensities; the t = 0
            // value degenerates to the benchmark for beta > 1, so the first
            // interior node is emitted as a companion series.
            const double intensities[] = {0.01, 0.1, 0.3};
            for (double a : intensities) {
                for (double g = -0.5; g <= 1.0 + 1e-9; g += 0.1) {
                    RunConfig c = cfg;
                    c.a1 = c.a2 = a;
                    c.gamma = {g, g};
                    const detail_cmd::CascadeRun run = detail_cmd::run_cascade(c);
                    csv.row({"a=" + detail_cmd::fmt(a), detail_cmd::fmt(g),
                             detail_cmd::fmt(run.y0.pi1.front())});
                    csv.row({"a=" + detail_cmd::fmt(a) + " t=h", detail_cmd::fmt(g),
                             detail_cmd::fmt(run.y0.pi1[1])});
                }
            }
            RunConfig c = cfg;
            const Vec2 merton = merton_strategy(c.market());
            for (double g = -0.5; g <= 1.0 + 1e-9; g += 0.1)
                csv.row({"merton", detail_cmd::fmt(g), detail_cmd::fmt(merton.x)});
        } else if (figure_id == 2) {
            // pre-default value function t -> V_t(0) for several gammas
            for (double g : {-0.5, -0.1, 0.0, 0.5, 1.0}) {
                RunConfig c = cfg;
                c.gamma = {g, g};
                const detail_cmd::CascadeRun run = detail_cmd::run_cascade(c);
                for (int k = 0; k <= run.grid.steps; ++k)
                    csv.row({"gamma=" + detail_cmd::fmt(g), detail_cmd::fmt(run.grid.node(k)),
                             detail_cmd::fmt(value_function(run.y0, run.market, run.grid.node(k), 0.0))});
            }
        } else {
            // strategy path with a default of name 2 at tau = 0.6, two loss levels
            const double tau = 0.6;
            for (double g : {-0.5, -0.1}) {
                RunConfig c = cfg;
                c.gamma = {g, g};
                const GumbelParams copula = c.copula();
                const MarketParams market = c.market();
                const TimeGrid grid(0.0, market.T(), c.grid_steps);
                const PiecewiseStrategy path =
                    strategy_path(market, copula, grid, Scenario::one_default(tau, 2), c.mode);
                const std::string s = "gamma=" + detail_cmd::fmt(g);
                for (int k = 0; k <= grid.steps && grid.node(k) <= tau + 1e-12; ++k) {
                    csv.row({s + " pi1", detail_cmd::fmt(grid.node(k)),
                             detail_cmd::fmt(path.pre.pi1[k])});
                    csv.row({s + " pi2", detail_cmd::fmt(grid.node(k)),
                             detail_cmd::fmt(path.pre.pi2[k])});
                }
                // jump node duplicated: left value above, right value below
                const TimeGrid& pg = path.post->grid;
                for (int k = 0; k <= pg.steps; ++k)
                    csv.row({s + " survivor", detail_cmd::fmt(pg.node(k)),
                             detail_cmd::fmt(path.post->pi1[k])});
            }
        }
    });
}

/// simulate: Monte-Carlo verification of the solved cascade against the
/// closed-form candidate value -e^{p Y0_0}, plus a report CSV.
inline int cmd_simulate(const RunConfig& cfg, std::ostream& log = std::cout) {
    return detail_cmd::guarded("simulate", [&] {
        const detail_cmd::CascadeRun run = detail_cmd::run_cascade(cfg);
        const CascadePolicy policy{&run.market, &run.copula, &run.y0, cfg.mode};
        const SimReport rep =
            simulate_expected_utility(run.market, run.copula, policy, run.grid, cfg.sim);
        const double target = -std::exp(run.market.p() * run.y0.y.front());
        const double gap_se = (rep.mean_utility - target) / rep.std_error;
        log << "paths " << rep.n_paths << ", mean utility " << rep.mean_utility << " (se "
            << rep.std_error << "), candidate value " << target << ", gap " << gap_se
            << " se, certainty equivalent " << rep.certainty_equivalent << "\n";
        log << "scenario counts: no default " << rep.n_no_default << ", one " << rep.n_one_default
            << ", two " << rep.n_two_default << ", failures " << rep.n_failures << "\n";
        detail_cmd::CsvFile csv(cfg.out_dir, "simulate.csv");
        csv.row({"paths", "mean_utility", "std_error", "certainty_equivalent", "target",
                 "gap_in_se", "n_no_default", "n_one_default", "n_two_default", "n_failures"});
        csv.numeric_row(std::to_string(rep.n_paths),
                        {rep.mean_utility, rep.std_error, rep.certainty_equivalent, target, gap_se,
                         static_cast<double>(rep.n_no_default), static_cast<double>(rep.n_one_default),
                         static_cast<double>(rep.n_two_default), static_cast<double>(rep.n_failures)});
    });
}

/// check: the invariant battery. Prints one line per check with the measured
/// value against its bound; returns nonzero when any check fails. In `paper`
/// alpha1 mode the tail-integral identity is reported as the documented
/// expected deviation (factor u^beta), not a failure.
inline int cmd_check(const RunConfig& cfg, std::ostream& log = std::cout) {
    int validation = detail_cmd::guarded("check", [&] { cfg.validate(); });
    if (validation != kExitOk) return validation;

    bool all_pass = true;
    auto report = [&](const char* name, bool pass, double measured, double bound) {
        log << (pass ? "PASS " : "FAIL ") << name << ": measured " << measured << " vs bound "
            << bound << "\n";
        if (!pass) all_pass = false;
    };

    try {
        const GumbelParams copula = cfg.copula();
        const MarketParams market = cfg.market();
        const double T = market.T();

        {  // total density mass via nested adaptive quadrature
            const double cutoff1 = 40.0 / copula.a1() + 40.0 / copula.a2();
            auto inner = [&](double th1) {
                return integrate([&](double th2) { return copula.density_unordered(th1, th2); },
                                 1e-12, cutoff1, 1e-9);
            };
            const double mass = integrate(inner, 1e-12, cutoff1, 1e-8);
            report("copula.total_mass", std::abs(mass - 1.0) < 1e-6, std::abs(mass - 1.0), 1e-6);
        }
        {  // alpha1 tail identity on a 5x5 grid (defining relation in derived mode)
            double worst = 0.0;
            double worst_factor = 0.0;
            for (int a = 1; a <= 5; ++a) {
                for (int b = a; b <= 5; ++b) {
                    const double th1 = 0.15 * a;
                    const double t = 0.15 * b + 0.05;
                    const double cutoff = t + 40.0 / std::min(copula.a1(), copula.a2());
                    const double tail = integrate(
                        [&](double s) { return copula.density_ordered(th1, s, 1, 2); }, t, cutoff,
                        1e-10);
                    const double direct = copula.alpha1(t, th1, 1, cfg.mode);
                    worst = std::max(worst, std::abs(direct - tail) / tail);
                    const double u = copula.exponent_u(th1, t);
                    worst_factor = std::max(worst_factor,
                                            std::abs(direct / tail - std::pow(u, copula.beta())) /
                                                std::pow(u, copula.beta()));
                }
            }
            if (cfg.mode == Alpha1Mode::Derived) {
                report("copula.alpha1_tail_identity", worst < 1e-6, worst, 1e-6);
            } else {
                log << "EXPECTED-DEVIATION copula.alpha1_tail_identity: alpha1 mode 'paper' "
                       "differs from the tail integral by the factor u^beta (relative gap "
                    << worst << "); factor verified to " << worst_factor << "\n";
                report("copula.alpha1_factor_u_beta", worst_factor < 1e-6, worst_factor, 1e-6);
            }
        }
        {  // alpha0 equals the joint survival on the diagonal, same code path
            double worst = 0.0;
            for (int i = 1; i <= 10; ++i) {
                const double t = T * i / 10.0;
                worst = std::max(worst, std::abs(copula.alpha0(t) - copula.joint_survival(t, t)));
            }
            report("copula.alpha0_diagonal", worst == 0.0, worst, 0.0);
        }
        {  // density equals the mixed partial of the survival (Richardson FD)
            auto fd = [&](double th1, double th2, double h) {
                return (copula.joint_survival(th1 + h, th2 + h) - copula.joint_survival(th1 + h, th2 - h) -
                        copula.joint_survival(th1 - h, th2 + h) + copula.joint_survival(th1 - h, th2 - h)) /
                       (4.0 * h * h);
            };
            double worst = 0.0;
            for (double th1 : {0.4, 0.8}) {
                for (double th2 : {0.5, 1.1}) {
                    const double coarse = fd(th1, th2, 2e-3);
                    const double fine = fd(th1, th2, 1e-3);
                    const double extrap = (4.0 * fine - coarse) / 3.0;
                    const double dens = copula.density_unordered(th1, th2);
                    worst = std::max(worst, std::abs(extrap - dens) / dens);
                }
            }
            report("copula.density_is_mixed_partial", worst < 1e-5, worst, 1e-5);
        }
        {  // risk premium identity
            const Vec2 gap = market.sigma0_matrix() * market.risk_premium0() - market.b0();
            report("market.risk_premium_identity", gap.norm() < 1e-12, gap.norm(), 1e-12);
        }
        {  // Lambert-W route vs Newton-bisection route
            std::mt19937_64 rng(202406);
            std::uniform_real_distribution<double> u01(0.0, 1.0);
            double worst = 0.0;
            for (int i = 0; i < 100; ++i) {
                PostDefaultProblem prob{0.01 + u01(rng), 0.05 + u01(rng), 0.2 + 2.0 * u01(rng),
                                        u01(rng) < 0.1 ? 0.0 : std::exp(4.0 * u01(rng) - 4.0),
                                        std::nullopt};
                worst = std::max(worst, std::abs(solve_post_default(prob).argmin -
                                                 post_default_argmin_lambert(prob)));
            }
            report("optimizer.lambert_vs_bisection", worst < 1e-8, worst, 1e-8);
        }

        // full cascade at the configured parameters
        const TimeGrid grid(0.0, T, cfg.grid_steps);
        const DiagonalTable diag = build_diagonal(market, copula, grid, cfg.mode);
        const ScenarioSolution y0 = solve_y0(market, copula, grid, diag);
        {  // terminal identities
            double worst = std::abs(std::exp(market.p() * y0.y.back()) - copula.alpha0(T));
            for (int i = 1; i <= 10; ++i) {
                const double th1 = T * i / 11.0;
                const TimeGrid tail(th1, T, std::max(2, cfg.grid_steps / 10));
                const ScenarioSolution y1 = solve_y1(market, copula, th1, 1, tail, cfg.mode);
                worst = std::max(worst, std::abs(std::exp(market.p() * y1.y.back()) -
                                                 copula.alpha1(T, th1, 1, cfg.mode)));
            }
            report("cascade.terminal_identities", worst < 1e-12, worst, 1e-12);
        }
        report("cascade.foc_residual_max", y0.foc_residual_max < 1e-8, y0.foc_residual_max, 1e-8);
        {  // self-convergence of the backward integration across two halvings.
           // Smooth (beta = 1) parameter sets converge at h^4 (ratio ~16);
           // beta > 1 sets have a weakly singular diagonal weight at t = 0
           // and degrade to ~h^3 log-factors (ratio ~4), which is still
           // convergence -- so the check is on the ratio plus a small
           // absolute difference, not on a single fixed epsilon.
            auto y00_at = [&](int steps) {
                const TimeGrid g2(0.0, T, steps);
                const DiagonalTable d2 = build_diagonal(market, copula, g2, cfg.mode);
                return solve_y0(market, copula, g2, d2).y.front();
            };
            const double v1 = y0.y.front();
            const double v2 = y00_at(cfg.grid_steps * 2);
            const double v4 = y00_at(cfg.grid_steps * 4);
            const double d1 = std::abs(v1 - v2);
            const double d2 = std::abs(v2 - v4);
            report("cascade.self_convergence_gap", d2 < 1e-5, d2, 1e-5);
            report("cascade.self_convergence_ratio", d2 == 0.0 || d1 / d2 > 3.0,
                   d2 == 0.0 ? std::numeric_limits<double>::infinity() : d1 / d2, 3.0);
        }
        {  // Monte-Carlo consistency at a reduced path count. The simulator
           // draws from the actual default-time law, so this identity can
           // only hold in derived mode; in paper mode the solved candidate
           // value describes a model that differs from the sampled one by
           // the documented u^beta factor, and the gap is reported, not
           // failed.
            SimConfig sim = cfg.sim;
            sim.paths = std::min<long>(cfg.sim.paths, 20000);
            const CascadePolicy policy{&market, &copula, &y0, cfg.mode};
            const SimReport rep = simulate_expected_utility(market, copula, policy, grid, sim);
            const double target = -std::exp(market.p() * y0.y.front());
            const double gap = std::abs(rep.mean_utility - target);
            if (cfg.mode == Alpha1Mode::Derived) {
                report("verify.mc_consistency_3se", gap < 3.0 * rep.std_error, gap,
                       3.0 * rep.std_error);
            } else {
                log << "EXPECTED-DEVIATION verify.mc_consistency: alpha1 mode 'paper' solves a "
                       "model inconsistent with the sampled default-time law; simulated mean "
                    << rep.mean_utility << " vs candidate " << target << " (gap " << gap << ", "
                    << gap / rep.std_error << " se)\n";
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error (solver) in check: " << e.what() << "\n";
        return kExitSolver;
    }
    log << (all_pass ? "all checks passed\n" : "some checks FAILED\n");
    return all_pass ? kExitOk : kExitCheck;
}

}  // namespace contagion
