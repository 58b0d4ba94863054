#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include "contagion/linalg.hpp"

namespace contagion {

/// Pointwise minimization behind the post-first-default generator:
///   g(pi) = (p/2) (sharpe/p - vol*pi)^2 + (jump_weight/p) e^{p pi}
/// over `constraint` (all of R when absent). jump_weight absorbs the ordered
/// density and the e^{-p y} state factor.
struct PostDefaultProblem {
    double sharpe;
    double vol;
    double p;
    double jump_weight;
    std::optional<Interval> constraint;

    void validate() const {
        if (!(vol > 0.0)) throw std::invalid_argument("PostDefaultProblem: vol must be > 0");
        if (!(p > 0.0)) throw std::invalid_argument("PostDefaultProblem: p must be > 0");
        if (!(jump_weight >= 0.0)) throw std::invalid_argument("PostDefaultProblem: jump_weight must be >= 0");
    }
};

struct Solution1D {
    double value;
    double argmin;
    double foc_residual;  // |g'(argmin)| unconstrained, KKT residual otherwise
    int iterations;
};

/// Exponential utility of the wealth jump caps exponents at +-700 to stay in
/// double range; solvers must never accept an iterate that needed the cap.
inline constexpr double kExpGuard = 700.0;

/// Principal branch of w e^w = x for x >= 0, by Halley iteration.
inline double lambert_w0(double x) {
    if (!(x >= 0.0)) throw std::domain_error("lambert_w0: needs x >= 0");
    if (x == 0.0) return 0.0;
    double w = x < 1.0 ? x * (1.0 - x) : std::log(x) - std::log(std::max(1.0, std::log(x)));
    if (w <= 0.0) w = 1e-6;
    for (int it = 0; it < 100; ++it) {
        const double ew = std::exp(w);
        const double f = w * ew - x;
        const double step = f / (ew * (w + 1.0) - (w + 2.0) * f / (2.0 * w + 2.0));
        w -= step;
        if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(w))) break;
    }
    return w;
}

namespace detail_opt {

inline double post_objective(const PostDefaultProblem& pr, double pi) {
    const double q = pr.sharpe / pr.p - pr.vol * pi;
    return 0.5 * pr.p * q * q + (pr.jump_weight / pr.p) * std::exp(pr.p * pi);
}

// g'(pi) = p vol^2 pi - vol sharpe + C e^{p pi}, strictly increasing.
inline double post_foc(const PostDefaultProblem& pr, double pi) {
    return pr.p * pr.vol * pr.vol * pi - pr.vol * pr.sharpe + pr.jump_weight * std::exp(pr.p * pi);
}

}  // namespace detail_opt

/// Unconstrained root of the 1-D first-order condition: bracket downward from
/// pi = sharpe/(p vol) (where the FOC is >= 0), then safeguarded
/// Newton-bisection. Monotone FOC makes this unconditionally convergent.
inline double post_default_root(const PostDefaultProblem& pr, int* iterations = nullptr) {
    const double merton_pi = pr.sharpe / (pr.p * pr.vol);
    if (pr.jump_weight == 0.0) {
        if (iterations) *iterations = 0;
        return merton_pi;
    }
    double hi = merton_pi;
    double step = std::max(1.0, std::abs(merton_pi));
    double lo = hi - step;
    int its = 0;
    while (detail_opt::post_foc(pr, lo) > 0.0) {
        hi = lo;
        step *= 2.0;
        lo = hi - step;
        if (++its > 200) throw std::runtime_error("post_default_root: bracketing failed");
    }
    double pi = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const double g = detail_opt::post_foc(pr, pi);
        if (g > 0.0) hi = pi; else lo = pi;
        const double curv = pr.p * pr.vol * pr.vol + pr.p * pr.jump_weight * std::exp(pr.p * pi);
        double next = pi - g / curv;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);  // bisection safeguard
        const double moved = std::abs(next - pi);
        pi = next;
        ++its;
        if (std::abs(detail_opt::post_foc(pr, pi)) < 1e-13 && moved < 1e-12 * std::max(1.0, std::abs(pi))) break;
    }
    if (iterations) *iterations = its;
    return pi;
}

inline Solution1D solve_post_default(const PostDefaultProblem& pr) {
    pr.validate();
    int its = 0;
    double pi = post_default_root(pr, &its);
    double residual = std::abs(detail_opt::post_foc(pr, pi));
    if (pr.constraint) {
        const double clamped = pr.constraint->clamp(pi);
        if (clamped != pi) {
            pi = clamped;
            // KKT residual at an active bound: violation of the sign condition
            const double g = detail_opt::post_foc(pr, pi);
            residual = (pi == pr.constraint->lo) ? std::max(0.0, -g) : std::max(0.0, g);
        }
    }
    return {detail_opt::post_objective(pr, pi), pi, residual, its};
}

/// Closed-form route for the same root via the Lambert W function:
///   pi = sharpe/(p vol) - W((C / vol^2) e^{sharpe / vol}) / p.
/// Kept as an independent cross-check of the Newton-bisection path.
inline double post_default_argmin_lambert(const PostDefaultProblem& pr) {
    pr.validate();
    const double merton_pi = pr.sharpe / (pr.p * pr.vol);
    if (pr.jump_weight == 0.0) return merton_pi;
    const double x = pr.jump_weight / (pr.vol * pr.vol) * std::exp(pr.sharpe / pr.vol);
    return merton_pi - lambert_w0(x) / pr.p;
}

/// Pointwise minimization behind the pre-default generator:
///   h(pi) = (p/2) |lambda0/p - sigma0' pi|^2
///         + (1/p) [ W1 e^{p (pi1 - gamma2 pi2)} + W2 e^{p (pi2 - gamma1 pi1)} ]
/// exp_weights = (W1, W2) absorb e^{-p y} and the diagonal continuation
/// values. Strictly convex: the Hessian is p sigma0 sigma0' plus two rank-one
/// nonnegative terms along v1 = (1, -gamma2), v2 = (-gamma1, 1).
struct PreDefaultProblem {
    Vec2 lambda0;
    Mat2 sigma0;
    double p;
    Vec2 gamma;
    Vec2 exp_weights;
    std::optional<Box> constraint;

    void validate() const {
        if (!(p > 0.0)) throw std::invalid_argument("PreDefaultProblem: p must be > 0");
        if (!(exp_weights.x >= 0.0 && exp_weights.y >= 0.0))
            throw std::invalid_argument("PreDefaultProblem: exp_weights must be >= 0");
        if (std::abs(sigma0.det()) < 1e-300)
            throw std::invalid_argument("PreDefaultProblem: sigma0 must be full rank");
    }
};

struct Solution2D {
    double value;
    Vec2 argmin;
    double grad_norm;  // projected-gradient norm under constraints
    int iterations;
};

namespace detail_opt {

// Shared evaluation kit for the pre-default objective.
struct PreEval {
    const PreDefaultProblem& pr;
    Vec2 v1, v2;
    Mat2 St, A;
    Vec2 b;

    explicit PreEval(const PreDefaultProblem& problem)
        : pr(problem), v1{1.0, -problem.gamma.y}, v2{-problem.gamma.x, 1.0},
          St(problem.sigma0.transpose()), A(problem.sigma0 * St),
          b(problem.sigma0 * problem.lambda0) {}

    // A zero weight kills its exponential term outright (the t = 0 diagonal
    // weight is an exact zero for beta > 1), so only live terms are guarded.
    double exp_term(double weight, double q, bool guard) const {
        if (weight == 0.0) return 0.0;
        if (q > kExpGuard) {
            if (!guard)
                throw std::runtime_error("solve_pre_default: exponent overflow at accepted iterate");
            q = kExpGuard;
        }
        return weight * std::exp(q);
    }
    Vec2 exp_terms(const Vec2& pi, bool guard) const {
        return {exp_term(pr.exp_weights.x, pr.p * v1.dot(pi), guard),
                exp_term(pr.exp_weights.y, pr.p * v2.dot(pi), guard)};
    }
    double objective(const Vec2& pi, bool guard = true) const {
        const Vec2 e = exp_terms(pi, guard);
        const Vec2 q = pr.lambda0 * (1.0 / pr.p) - St * pi;
        return 0.5 * pr.p * q.dot(q) + (e.x + e.y) / pr.p;
    }
    // grad h = p A pi - sigma0 lambda0 + e1 v1 + e2 v2, e_i = W_i e^{p v_i.pi};
    // Hess h = p A + p e1 v1 v1' + p e2 v2 v2'.
    void grad_hess(const Vec2& pi, Vec2& g, Mat2& H) const {
        const Vec2 e = exp_terms(pi, /*guard=*/false);
        g = (A * pi) * pr.p - b + v1 * e.x + v2 * e.y;
        H.a11 = pr.p * (A.a11 + v1.x * v1.x * e.x + v2.x * v2.x * e.y);
        H.a12 = pr.p * (A.a12 + v1.x * v1.y * e.x + v2.x * v2.y * e.y);
        H.a21 = H.a12;
        H.a22 = pr.p * (A.a22 + v1.y * v1.y * e.x + v2.y * v2.y * e.y);
    }
    Vec2 gradient(const Vec2& pi) const {
        Vec2 g;
        Mat2 H;
        grad_hess(pi, g, H);
        return g;
    }

    // Damped Newton from a given start; Armijo (factor 0.5, c = 1e-4) far
    // from the optimum, plain Newton once inside the quadratic basin (where
    // objective differences drown in rounding noise and a line search would
    // stall on a floating-point plateau).
    Vec2 newton(Vec2 pi, double tol, int max_iter = 100) const {
        Vec2 g;
        Mat2 H;
        for (int it = 0; it < max_iter; ++it) {
            grad_hess(pi, g, H);
            if (g.norm() < tol) return pi;
            const Vec2 d = H.solve(-g);
            if (g.norm() < 1e-6) {
                pi = pi + d;
                continue;
            }
            const double f0 = objective(pi, /*guard=*/false);
            const double slope = g.dot(d);
            double t = 1.0;
            Vec2 cand = pi + d;
            for (int ls = 0; ls < 60; ++ls) {
                cand = pi + d * t;
                if (objective(cand) <= f0 + 1e-4 * t * slope) break;
                t *= 0.5;
            }
            pi = cand;
        }
        if (gradient(pi).norm() >= tol)
            throw std::runtime_error("solve_pre_default: no convergence in 100 iterations");
        return pi;
    }

    // Minimize along one edge of the box: coordinate `fixed` pinned, the
    // other restricted to [lo, hi]. The partial derivative is strictly
    // increasing, so bracketed Newton-bisection applies.
    Vec2 edge_argmin(int fixed, double pinned, double lo, double hi) const {
        const int free_i = 1 - fixed;
        auto point = [&](double s) {
            Vec2 pi;
            pi[fixed] = pinned;
            pi[free_i] = s;
            return pi;
        };
        auto deriv = [&](double s) { return gradient(point(s))[free_i]; };
        if (deriv(lo) >= 0.0) return point(lo);
        if (deriv(hi) <= 0.0) return point(hi);
        double a = lo, b2 = hi, s = 0.5 * (lo + hi);
        for (int it = 0; it < 200; ++it) {
            const double d = deriv(s);
            if (d > 0.0) b2 = s; else a = s;
            Vec2 g;
            Mat2 H;
            grad_hess(point(s), g, H);
            const double curv = free_i == 0 ? H.a11 : H.a22;
            double next = s - d / curv;
            if (!(next > a && next < b2)) next = 0.5 * (a + b2);
            if (std::abs(next - s) < 1e-14 * std::max(1.0, std::abs(s)) && std::abs(d) < 1e-11)
                return point(next);
            s = next;
        }
        return point(s);
    }
};

}  // namespace detail_opt

/// Newton with analytic gradient/Hessian from the Merton point; under a box
/// constraint, the unconstrained minimizer is checked first and the box
/// boundary (4 edges, 4 corners) is searched exactly otherwise -- in
/// dimension 2 this active-set enumeration is the projected-Newton endgame
/// without the zigzag. Exponents are capped at kExpGuard only inside
/// line-search trials; a capped accepted iterate is a hard error.
inline Solution2D solve_pre_default(const PreDefaultProblem& pr) {
    pr.validate();
    const detail_opt::PreEval ev(pr);
    const double tol = 1e-10;
    const Vec2 merton = ev.A.solve(ev.b) * (1.0 / pr.p);

    auto kkt_residual = [&](const Vec2& pi) {
        const Vec2 g = ev.gradient(pi);
        if (!pr.constraint) return g.norm();
        const Vec2 moved = pr.constraint->clamp(pi - g);
        return (pi - moved).norm();
    };

    if (!pr.constraint) {
        const Vec2 pi = ev.newton(merton, tol);
        return {ev.objective(pi, false), pi, kkt_residual(pi), 0};
    }

    const Box& box = *pr.constraint;
    const Vec2 interior = ev.newton(box.clamp(merton), tol);
    if (box.contains(interior)) {
        return {ev.objective(interior, false), interior, kkt_residual(interior), 0};
    }
    Vec2 best = box.clamp(interior);
    double best_val = ev.objective(best, false);
    const Vec2 candidates[] = {
        ev.edge_argmin(0, box.x1.lo, box.x2.lo, box.x2.hi),
        ev.edge_argmin(0, box.x1.hi, box.x2.lo, box.x2.hi),
        ev.edge_argmin(1, box.x2.lo, box.x1.lo, box.x1.hi),
        ev.edge_argmin(1, box.x2.hi, box.x1.lo, box.x1.hi),
    };
    for (const Vec2& cand : candidates) {
        const double val = ev.objective(cand, false);
        if (val < best_val) {
            best_val = val;
            best = cand;
        }
    }
    return {best_val, best, kkt_residual(best), 0};
}

}  // namespace contagion
