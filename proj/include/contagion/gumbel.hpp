#pragma once

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>

namespace contagion {

/// Two displayed variants of the post-first-default auxiliary density
/// alpha^{1,i}. `Derived` is the tail integral of the ordered joint density
/// (the defining relation); `Literal` is the alternative closed-form display,
/// which equals Derived multiplied by u^beta. They coincide at beta = 1 only
/// for Derived.
enum class Alpha1Mode { Derived, Literal };

inline const char* to_string(Alpha1Mode m) {
    return m == Alpha1Mode::Derived ? "derived" : "paper";
}

/// Gumbel-copula law of the two default times: marginals are exponential with
/// intensities a1, a2, dependence controlled by beta >= 1 (beta = 1 is
/// independence). Immutable after construction; all member functions are pure.
class GumbelParams {
  public:
    GumbelParams(double a1, double a2, double beta) : a1_(a1), a2_(a2), beta_(beta) {
        if (!(a1 > 0.0) || !std::isfinite(a1)) throw std::invalid_argument("GumbelParams: a1 must be > 0");
        if (!(a2 > 0.0) || !std::isfinite(a2)) throw std::invalid_argument("GumbelParams: a2 must be > 0");
        if (!(beta >= 1.0) || !std::isfinite(beta)) throw std::invalid_argument("GumbelParams: beta must be >= 1");
    }

    double a1() const { return a1_; }
    double a2() const { return a2_; }
    double beta() const { return beta_; }
    double intensity(int name) const { return name == 1 ? a1_ : a2_; }

    // Joint exponent u(th1, th2) = ((a1 th1)^b + (a2 th2)^b)^(1/b), computed
    // through logs so extreme parameter scans cannot overflow pow().
    double exponent_u(double theta1, double theta2) const {
        return exponent_u_generic(a1_ * theta1, a2_ * theta2);
    }

    /// log P[tau1 > th1, tau2 > th2] = -u.
    double log_joint_survival(double theta1, double theta2) const {
        require_nonneg(theta1, "joint_survival");
        require_nonneg(theta2, "joint_survival");
        return -exponent_u(theta1, theta2);
    }

    double joint_survival(double theta1, double theta2) const {
        return std::exp(log_joint_survival(theta1, theta2));
    }

    /// log of the unordered joint density of (tau1, tau2).
    /// For beta > 1 the density is singular along the axes; arguments at or
    /// below 1e-12 are then a domain error rather than an extrapolation.
    /// At beta = 1 the density is regular everywhere (independent product).
    double log_density_unordered(double theta1, double theta2) const {
        const double b = beta_;
        if (b == 1.0) {
            require_nonneg(theta1, "density");
            require_nonneg(theta2, "density");
            return -(a1_ * theta1 + a2_ * theta2) + std::log(a1_) + std::log(a2_);
        }
        require_positive(theta1, "density");
        require_positive(theta2, "density");
        const double u = exponent_u(theta1, theta2);
        return -u + b * (std::log(a1_) + std::log(a2_)) + (b - 1.0) * (std::log(theta1) + std::log(theta2)) +
               (1.0 - 2.0 * b) * std::log(u) + std::log(u + b - 1.0);
    }

    double density_unordered(double theta1, double theta2) const {
        return std::exp(log_density_unordered(theta1, theta2));
    }

    /// Ordered density alpha(theta1, theta2, i, j): name `first_name` defaults
    /// at theta1 <= theta2, name `second_name` at theta2. The name-k
    /// coordinate of the unordered density receives name k's default time.
    double log_density_ordered(double theta1, double theta2, int first_name, int second_name) const {
        check_mark_pair(first_name, second_name);
        if (theta1 > theta2) throw std::domain_error("density_ordered: needs theta1 <= theta2");
        return first_name == 1 ? log_density_unordered(theta1, theta2)
                               : log_density_unordered(theta2, theta1);
    }

    double density_ordered(double theta1, double theta2, int first_name, int second_name) const {
        return std::exp(log_density_ordered(theta1, theta2, first_name, second_name));
    }

    /// Auxiliary survival density alpha^{1,i}_t(theta1): name i defaulted at
    /// theta1 <= t, the survivor has not defaulted by t.
    ///   Derived: a_i^b theta1^(b-1) u^(1-b) e^-u   (= tail integral of the ordered density)
    ///   Literal: a_i^b theta1^(b-1) u       e^-u   (= Derived * u^b)
    /// with u over (a_i theta1, a_j t). At beta > 1 the value vanishes as
    /// theta1 -> 0; theta1 = 0 is accepted only when beta = 1 (regular there).
    double log_alpha1(double t, double theta1, int defaulted_name, Alpha1Mode mode) const {
        check_name(defaulted_name);
        if (theta1 < 0.0 || theta1 > t) throw std::domain_error("alpha1: needs 0 <= theta1 <= t");
        const double ai = intensity(defaulted_name);
        const double aj = intensity(other(defaulted_name));
        const double b = beta_;
        if (theta1 == 0.0 && b > 1.0)
            throw std::domain_error("alpha1: theta1 = 0 is singular for beta > 1");
        const double u = exponent_u_generic(ai * theta1, aj * t);
        const double log_theta_term = (b == 1.0) ? 0.0 : (b - 1.0) * std::log(theta1);
        const double log_u_term = (mode == Alpha1Mode::Derived) ? (1.0 - b) * safe_log(u) : safe_log(u);
        return b * std::log(ai) + log_theta_term + log_u_term - u;
    }

    double alpha1(double t, double theta1, int defaulted_name, Alpha1Mode mode) const {
        return std::exp(log_alpha1(t, theta1, defaulted_name, mode));
    }

    /// log P[tau1 > t, tau2 > t]; identical evaluation path to
    /// log_joint_survival(t, t) so alpha0(t) == joint_survival(t, t) exactly.
    double log_alpha0(double t) const { return log_joint_survival(t, t); }
    double alpha0(double t) const { return std::exp(log_alpha0(t)); }

    /// Linear correlation of the survival indicators 1_{tau_i > T}.
    double survival_correlation(double T) const {
        if (!(T > 0.0)) throw std::domain_error("survival_correlation: needs T > 0");
        const double p1 = std::exp(-a1_ * T);
        const double p2 = std::exp(-a2_ * T);
        const double v1 = p1 * (1.0 - p1);
        const double v2 = p2 * (1.0 - p2);
        if (v1 < 1e-300 || v2 < 1e-300)
            throw std::domain_error("survival_correlation: degenerate marginal indicator");
        return (joint_survival(T, T) - p1 * p2) / std::sqrt(v1 * v2);
    }

    /// Draw (tau1, tau2) by the Archimedean frailty construction: V positive
    /// stable of index 1/beta (Chambers-Mallows-Stuck), E_i unit exponentials,
    /// tau_i = (E_i / V)^(1/beta) / a_i. Exact and rejection-free.
    std::pair<double, double> sample_default_times(std::mt19937_64& rng) const {
        const double v = positive_stable(1.0 / beta_, rng);
        std::exponential_distribution<double> exp1(1.0);
        const double e1 = exp1(rng);
        const double e2 = exp1(rng);
        const double t1 = std::pow(e1 / v, 1.0 / beta_) / a1_;
        const double t2 = std::pow(e2 / v, 1.0 / beta_) / a2_;
        return {t1, t2};
    }

    /// One-sided positive stable variable with Laplace transform e^{-s^alpha},
    /// alpha in (0, 1]; degenerate at 1 for alpha = 1.
    static double positive_stable(double alpha, std::mt19937_64& rng) {
        if (alpha >= 1.0) return 1.0;
        std::uniform_real_distribution<double> unif(std::numeric_limits<double>::min(), 1.0);
        std::exponential_distribution<double> exp1(1.0);
        const double U = unif(rng) * 3.14159265358979323846;
        const double E = exp1(rng);
        const double s = std::sin(U);
        const double a_part = std::sin(alpha * U) / std::pow(s, 1.0 / alpha);
        const double b_part = std::pow(std::sin((1.0 - alpha) * U) / E, (1.0 - alpha) / alpha);
        return a_part * b_part;
    }

  private:
    static int other(int name) { return name == 1 ? 2 : 1; }
    static void check_name(int name) {
        if (name != 1 && name != 2) throw std::domain_error("name index must be 1 or 2");
    }
    static void check_mark_pair(int i, int j) {
        check_name(i);
        check_name(j);
        if (i == j) throw std::domain_error("ordered density: marks must name both firms");
    }
    static void require_nonneg(double t, const char* what) {
        if (!(t >= 0.0)) throw std::domain_error(std::string(what) + ": negative time");
    }
    static void require_positive(double t, const char* what) {
        // 1e-12 floor: the beta > 1 density is singular along the axes.
        if (!(t > 1e-12)) throw std::domain_error(std::string(what) + ": time at or below 1e-12");
    }
    static double safe_log(double v) { return v > 0.0 ? std::log(v) : -std::numeric_limits<double>::infinity(); }

    // ((x)^b + (y)^b)^(1/b) via log-sum-exp; x, y >= 0.
    double exponent_u_generic(double x, double y) const {
        if (x == 0.0 && y == 0.0) return 0.0;
        if (beta_ == 1.0) return x + y;
        // log u = max + log1p(exp(min - max)) / b over the b-scaled logs
        const double bm = beta_ * std::log(std::max(x, y));
        const double bn = (std::min(x, y) == 0.0) ? -std::numeric_limits<double>::infinity()
                                                  : beta_ * std::log(std::min(x, y));
        return std::exp((bm + std::log1p(std::exp(bn - bm))) / beta_);
    }

    double a1_;
    double a2_;
    double beta_;
};

}  // namespace contagion
