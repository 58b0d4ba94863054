#pragma once

#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include "contagion/gumbel.hpp"
#include "contagion/market.hpp"
#include "contagion/simulate.hpp"

namespace contagion {

/// Configuration or validation problem; carries the offending field name.
class ConfigError : public std::runtime_error {
  public:
    ConfigError(const std::string& field, const std::string& message)
        : std::runtime_error(field + ": " + message), field_(field) {}
    const std::string& field() const { return field_; }

  private:
    std::string field_;
};

/// One full run description: copula and market parameters, solver grid and
/// alpha1 formula mode, simulation settings, output directory. Parsed from a
/// flat `key = value` file with dotted section prefixes.
struct RunConfig {
    double a1 = 0.01;
    double a2 = 0.1;
    double beta = 2.0;

    Vec2 b0{0.02, 0.02};
    Vec2 sigma0{0.1, 0.1};
    double rho = 0.0;
    Vec2 b1{0.01, 0.01};
    Vec2 sigma1{0.2, 0.2};
    Vec2 gamma{-0.5, -0.5};
    double p = 1.0;
    double horizon = 1.0;
    std::optional<Box> constraint_pre;
    std::optional<Interval> constraint_post;

    int grid_steps = 200;
    Alpha1Mode mode = Alpha1Mode::Derived;

    SimConfig sim{};

    std::string out_dir = ".";

    GumbelParams copula() const {
        try {
            return GumbelParams(a1, a2, beta);
        } catch (const std::invalid_argument& e) {
            throw ConfigError("copula", e.what());
        }
    }
    MarketParams market() const {
        try {
            return MarketParams(b0, sigma0, rho, b1, sigma1, gamma, p, horizon,
                                RegimeConstraints{constraint_pre, constraint_post});
        } catch (const std::invalid_argument& e) {
            throw ConfigError("market", e.what());
        }
    }
    void validate() const {
        (void)copula();
        (void)market();
        if (grid_steps < 2) throw ConfigError("solver.steps", "must be >= 2");
        try {
            sim.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError("sim", e.what());
        }
    }
};

namespace detail_config {

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing characters");
        return d;
    } catch (const std::exception&) {
        throw ConfigError(key, "not a number: '" + v + "'");
    }
}

inline long parse_long(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const long d = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing characters");
        return d;
    } catch (const std::exception&) {
        throw ConfigError(key, "not an integer: '" + v + "'");
    }
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError(key, "not a boolean; use true/false");
}

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail_config

inline Alpha1Mode parse_alpha1_mode(const std::string& token) {
    if (token == "derived") return Alpha1Mode::Derived;
    if (token == "paper") return Alpha1Mode::Literal;
    throw ConfigError("solver.alpha1_formula", "must be 'derived' or 'paper', got '" + token + "'");
}

inline RunConfig parse_config_text(const std::string& text) {
    using namespace detail_config;
    RunConfig cfg;
    std::map<std::string, double> bounds;  // constraint bounds arrive in lo/hi pairs
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno), "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));

        if (key == "copula.a1") cfg.a1 = parse_double(key, value);
        else if (key == "copula.a2") cfg.a2 = parse_double(key, value);
        else if (key == "copula.beta") cfg.beta = parse_double(key, value);
        else if (key == "market.b0_1") cfg.b0.x = parse_double(key, value);
        else if (key == "market.b0_2") cfg.b0.y = parse_double(key, value);
        else if (key == "market.sigma0_1") cfg.sigma0.x = parse_double(key, value);
        else if (key == "market.sigma0_2") cfg.sigma0.y = parse_double(key, value);
        else if (key == "market.rho") cfg.rho = parse_double(key, value);
        else if (key == "market.b1_1") cfg.b1.x = parse_double(key, value);
        else if (key == "market.b1_2") cfg.b1.y = parse_double(key, value);
        else if (key == "market.sigma1_1") cfg.sigma1.x = parse_double(key, value);
        else if (key == "market.sigma1_2") cfg.sigma1.y = parse_double(key, value);
        else if (key == "market.gamma_1") cfg.gamma.x = parse_double(key, value);
        else if (key == "market.gamma_2") cfg.gamma.y = parse_double(key, value);
        else if (key == "market.p") cfg.p = parse_double(key, value);
        else if (key == "market.T") cfg.horizon = parse_double(key, value);
        else if (key == "constraints.pre1_lo" || key == "constraints.pre1_hi" ||
                 key == "constraints.pre2_lo" || key == "constraints.pre2_hi" ||
                 key == "constraints.post_lo" || key == "constraints.post_hi")
            bounds[key] = parse_double(key, value);
        else if (key == "solver.steps") cfg.grid_steps = static_cast<int>(parse_long(key, value));
        else if (key == "solver.alpha1_formula") cfg.mode = parse_alpha1_mode(value);
        else if (key == "sim.paths") cfg.sim.paths = parse_long(key, value);
        else if (key == "sim.seed") cfg.sim.seed = static_cast<std::uint64_t>(parse_long(key, value));
        else if (key == "sim.substeps") cfg.sim.substeps = static_cast<int>(parse_long(key, value));
        else if (key == "sim.antithetic") cfg.sim.antithetic = parse_bool(key, value);
        else if (key == "output.dir") cfg.out_dir = value;
        else throw ConfigError(key, "unknown key");
    }

    auto take_pair = [&](const std::string& lo, const std::string& hi) -> std::optional<Interval> {
        const bool has_lo = bounds.count(lo) > 0, has_hi = bounds.count(hi) > 0;
        if (has_lo != has_hi) throw ConfigError(lo, "constraint bounds must come in lo/hi pairs");
        if (!has_lo) return std::nullopt;
        try {
            return Interval(bounds[lo], bounds[hi]);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(lo, e.what());
        }
    };
    const auto pre1 = take_pair("constraints.pre1_lo", "constraints.pre1_hi");
    const auto pre2 = take_pair("constraints.pre2_lo", "constraints.pre2_hi");
    if (pre1.has_value() != pre2.has_value())
        throw ConfigError("constraints", "pre-default constraints need both assets");
    if (pre1) cfg.constraint_pre = Box{*pre1, *pre2};
    cfg.constraint_post = take_pair("constraints.post_lo", "constraints.post_hi");

    cfg.validate();
    return cfg;
}

inline RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

inline std::string serialize(const RunConfig& cfg) {
    using detail_config::format_double;
    std::ostringstream out;
    out << "copula.a1 = " << format_double(cfg.a1) << "\n";
    out << "copula.a2 = " << format_double(cfg.a2) << "\n";
    out << "copula.beta = " << format_double(cfg.beta) << "\n";
    out << "market.b0_1 = " << format_double(cfg.b0.x) << "\n";
    out << "market.b0_2 = " << format_double(cfg.b0.y) << "\n";
    out << "market.sigma0_1 = " << format_double(cfg.sigma0.x) << "\n";
    out << "market.sigma0_2 = " << format_double(cfg.sigma0.y) << "\n";
    out << "market.rho = " << format_double(cfg.rho) << "\n";
    out << "market.b1_1 = " << format_double(cfg.b1.x) << "\n";
    out << "market.b1_2 = " << format_double(cfg.b1.y) << "\n";
    out << "market.sigma1_1 = " << format_double(cfg.sigma1.x) << "\n";
    out << "market.sigma1_2 = " << format_double(cfg.sigma1.y) << "\n";
    out << "market.gamma_1 = " << format_double(cfg.gamma.x) << "\n";
    out << "market.gamma_2 = " << format_double(cfg.gamma.y) << "\n";
    out << "market.p = " << format_double(cfg.p) << "\n";
    out << "market.T = " << format_double(cfg.horizon) << "\n";
    if (cfg.constraint_pre) {
        out << "constraints.pre1_lo = " << format_double(cfg.constraint_pre->x1.lo) << "\n";
        out << "constraints.pre1_hi = " << format_double(cfg.constraint_pre->x1.hi) << "\n";
        out << "constraints.pre2_lo = " << format_double(cfg.constraint_pre->x2.lo) << "\n";
        out << "constraints.pre2_hi = " << format_double(cfg.constraint_pre->x2.hi) << "\n";
    }
    if (cfg.constraint_post) {
        out << "constraints.post_lo = " << format_double(cfg.constraint_post->lo) << "\n";
        out << "constraints.post_hi = " << format_double(cfg.constraint_post->hi) << "\n";
    }
    out << "solver.steps = " << cfg.grid_steps << "\n";
    out << "solver.alpha1_formula = " << to_string(cfg.mode) << "\n";
    out << "sim.paths = " << cfg.sim.paths << "\n";
    out << "sim.seed = " << cfg.sim.seed << "\n";
    out << "sim.substeps = " << cfg.sim.substeps << "\n";
    out << "sim.antithetic = " << (cfg.sim.antithetic ? "true" : "false") << "\n";
    out << "output.dir = " << cfg.out_dir << "\n";
    return out.str();
}

}  // namespace contagion
