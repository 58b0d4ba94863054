#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>

#include "contagion/linalg.hpp"

namespace contagion {

/// Per-regime portfolio constraints. Every interval must contain 0 so that
/// the do-nothing strategy is always admissible. Absent means unconstrained.
struct RegimeConstraints {
    std::optional<Box> pre_default;
    std::optional<Interval> post_default;
};

/// All coefficients of the two-name market: pre-default drifts/vols with
/// Brownian correlation rho, post-first-default survivor coefficients,
/// contagion jump sizes gamma, risk aversion p and horizon T. After the
/// second default nothing is tradable; that regime intentionally carries no
/// coefficients. Immutable after construction.
class MarketParams {
  public:
    MarketParams(Vec2 b0, Vec2 sigma0_vol, double rho, Vec2 b1, Vec2 sigma1_vol, Vec2 gamma,
                 double p, double T, RegimeConstraints constraints = {})
        : b0_(b0), sigma0_vol_(sigma0_vol), rho_(rho), b1_(b1), sigma1_vol_(sigma1_vol),
          gamma_(gamma), p_(p), T_(T), constraints_(std::move(constraints)) {
        if (!(sigma0_vol.x > 0.0 && sigma0_vol.y > 0.0))
            throw std::invalid_argument("MarketParams: pre-default volatilities must be > 0");
        if (!(sigma1_vol.x > 0.0 && sigma1_vol.y > 0.0))
            throw std::invalid_argument("MarketParams: post-default volatilities must be > 0");
        if (!(std::abs(rho) < 1.0)) throw std::invalid_argument("MarketParams: needs |rho| < 1");
        if (!(gamma.x >= -1.0 && gamma.y >= -1.0))
            throw std::invalid_argument("MarketParams: jump sizes must be >= -1");
        if (!(p > 0.0)) throw std::invalid_argument("MarketParams: risk aversion must be > 0");
        if (!(T > 0.0)) throw std::invalid_argument("MarketParams: horizon must be > 0");
        if (constraints_.pre_default) {
            if (!constraints_.pre_default->contains({0.0, 0.0}))
                throw std::invalid_argument("MarketParams: pre-default constraint box must contain 0");
        }
        if (constraints_.post_default) {
            if (!constraints_.post_default->contains(0.0))
                throw std::invalid_argument("MarketParams: post-default constraint must contain 0");
        }
    }

    const Vec2& b0() const { return b0_; }
    const Vec2& sigma0_vol() const { return sigma0_vol_; }
    double rho() const { return rho_; }
    const Vec2& b1() const { return b1_; }
    const Vec2& sigma1_vol() const { return sigma1_vol_; }
    const Vec2& gamma() const { return gamma_; }
    double p() const { return p_; }
    double T() const { return T_; }
    const RegimeConstraints& constraints() const { return constraints_; }

    /// Upper-triangular pre-default volatility matrix: rows
    /// (s1 sqrt(1-rho^2), s1 rho) and (0, s2), so sigma0 sigma0' has the
    /// prescribed variances and covariance rho s1 s2.
    Mat2 sigma0_matrix() const {
        const double s1 = sigma0_vol_.x, s2 = sigma0_vol_.y;
        const double root = std::sqrt(1.0 - rho_ * rho_);
        return {s1 * root, s1 * rho_, 0.0, s2};
    }

    /// Pre-default risk premium lambda0 solving sigma0 lambda0 = b0.
    Vec2 risk_premium0() const {
        const double s1 = sigma0_vol_.x, s2 = sigma0_vol_.y;
        const double root = std::sqrt(1.0 - rho_ * rho_);
        return {(b0_.x / s1 - rho_ * b0_.y / s2) / root, b0_.y / s2};
    }

    /// Post-first-default coefficients of the surviving name.
    struct SingleAsset {
        double drift;
        double vol;
        double sharpe;
    };
    SingleAsset post_default_single_params(int survivor) const {
        if (survivor != 1 && survivor != 2)
            throw std::domain_error("post_default_single_params: survivor must be 1 or 2");
        const double b = survivor == 1 ? b1_.x : b1_.y;
        const double s = survivor == 1 ? sigma1_vol_.x : sigma1_vol_.y;
        return {b, s, b / s};
    }

    /// Wealth jump vector at the first default of `defaulted`: the defaulted
    /// name drops to zero (-1), the survivor jumps by its contagion size.
    Vec2 first_default_jump(int defaulted) const {
        if (defaulted == 1) return {-1.0, gamma_.y};
        if (defaulted == 2) return {gamma_.x, -1.0};
        throw std::domain_error("first_default_jump: name must be 1 or 2");
    }

  private:
    Vec2 b0_;
    Vec2 sigma0_vol_;
    double rho_;
    Vec2 b1_;
    Vec2 sigma1_vol_;
    Vec2 gamma_;
    double p_;
    double T_;
    RegimeConstraints constraints_;
};

/// No-jump benchmark amounts (1/p) (sigma0 sigma0')^{-1} b0, projected onto
/// the constraint box when one is present. The exact box projection of the
/// quadratic objective is found by enumerating the active sets of a 2-D box.
inline Vec2 merton_strategy(const MarketParams& m) {
    const Mat2 S = m.sigma0_matrix();
    const Mat2 A = S * S.transpose();
    const Vec2 unconstrained = A.solve(m.b0()) * (1.0 / m.p());
    if (!m.constraints().pre_default) return unconstrained;

    const Box& box = *m.constraints().pre_default;
    if (box.contains(unconstrained)) return unconstrained;

    // minimize (p/2) pi'A pi - b0'pi over the box: check each edge/corner.
    auto objective = [&](const Vec2& v) {
        return 0.5 * m.p() * v.dot(A * v) - m.b0().dot(v);
    };
    auto solve_with_fixed = [&](int fixed_coord, double value) {
        // optimize the free coordinate with the other one pinned
        if (fixed_coord == 0) {
            const double num = m.b0().y - m.p() * A.a21 * value;
            return Vec2{value, Interval(box.x2.lo, box.x2.hi).clamp(num / (m.p() * A.a22))};
        }
        const double num = m.b0().x - m.p() * A.a12 * value;
        return Vec2{Interval(box.x1.lo, box.x1.hi).clamp(num / (m.p() * A.a11)), value};
    };
    Vec2 best = box.clamp(unconstrained);
    double best_val = objective(best);
    for (const Vec2& cand : {solve_with_fixed(0, box.x1.lo), solve_with_fixed(0, box.x1.hi),
                             solve_with_fixed(1, box.x2.lo), solve_with_fixed(1, box.x2.hi)}) {
        const double v = objective(cand);
        if (v < best_val) {
            best_val = v;
            best = cand;
        }
    }
    return best;
}

}  // namespace contagion
