#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "modloc/errors.hpp"
#include "modloc/grid_oracle.hpp"
#include "modloc/laguerre.hpp"
#include "modloc/localization.hpp"

namespace modloc {

inline constexpr int kFormatVersion = 1;

struct IntervalSpec {
    double a = 1.0;
    double b = 2.0;
    friend bool operator==(const IntervalSpec&, const IntervalSpec&) = default;
};

struct RunConfig {
    BasisSpec rep{1.0, 1.0, 256};
    int quad_order = 0;  // 0 selects 2M + ceil(2k) + 4
    GridSpec grid{4096, 40.0};

    std::vector<IntervalSpec> intervals{{1.0, 2.0}, {0.5, 1.0}, {4.0, 8.0}};
    std::string bump_family = "mollifier";
    bool adapt_beta = true;  // basis scale and grid extent follow each interval
    double grid_E_scale = 60.0;

    std::vector<std::string> scope{"all"};
    std::string profile = "default";
    std::vector<double> k_values{1.0, 1.5, 2.0};
    std::vector<int> M_ladder{64, 128, 256, 512};
    double interior_fraction = 0.8;
    double flow_fraction = 1.0 / 16.0;
    std::vector<double> weyl_t{0.1, 0.3};
    std::vector<double> weyl_a{0.2, 0.5};
    double inclusion_t = 0.05;
    double inclusion_a = 0.3;
    int alpha_points = 21;
    int f_fixtures = 5;

    std::uint64_t seed = 20240611;
    std::string out = "modloc_out";
    std::string format = "json";
    std::string artifact;  // optional representation file used in place of a fresh build

    friend bool operator==(const RunConfig&, const RunConfig&) = default;

    void validate() const {
        rep.validate();
        grid.validate();
        for (const auto& I : intervals)
            if (!(I.a > 0.0) || !(I.b > I.a) || !std::isfinite(I.b))
                throw ConfigError("interval [" + std::to_string(I.a) + ", " + std::to_string(I.b) +
                                  "] must satisfy 0 < a < b < inf");
        bump_family_from_string(bump_family);
        if (format != "json" && format != "csv" && format != "md") throw ConfigError("format must be json, csv or md");
        if (!(interior_fraction > 0.0 && interior_fraction <= 1.0) || !(flow_fraction > 0.0 && flow_fraction <= 1.0))
            throw ConfigError("interior fractions must lie in (0, 1]");
        if (alpha_points < 3) throw ConfigError("alpha grid needs at least three points");
    }
};

inline nlohmann::json to_json(const RunConfig& c) {
    nlohmann::json iv = nlohmann::json::array();
    for (const auto& I : c.intervals) iv.push_back({I.a, I.b});
    return {
        {"representation", {{"k", c.rep.k}, {"beta", c.rep.beta}, {"M", c.rep.M}, {"quad_order", c.quad_order}}},
        {"grid", {{"N", c.grid.N}, {"E_max", c.grid.E_max}}},
        {"localization",
         {{"intervals", iv}, {"bump", c.bump_family}, {"adapt_beta", c.adapt_beta}, {"grid_E_scale", c.grid_E_scale}}},
        {"suite",
         {{"scope", c.scope},
          {"profile", c.profile},
          {"k_values", c.k_values},
          {"M_ladder", c.M_ladder},
          {"interior_fraction", c.interior_fraction},
          {"flow_fraction", c.flow_fraction},
          {"weyl", {{"t", c.weyl_t}, {"a", c.weyl_a}}},
          {"inclusion", {{"t", c.inclusion_t}, {"a", c.inclusion_a}}},
          {"alpha_points", c.alpha_points},
          {"f_fixtures", c.f_fixtures}}},
        {"seed", c.seed},
        {"output", {{"path", c.out}, {"format", c.format}}},
        {"artifact", c.artifact},
    };
}

// Missing keys keep their defaults.
inline RunConfig config_from_json(const nlohmann::json& j) {
    RunConfig c;
    try {
        if (j.contains("representation")) {
            const auto& r = j["representation"];
            c.rep.k = r.value("k", c.rep.k);
            c.rep.beta = r.value("beta", c.rep.beta);
            c.rep.M = r.value("M", c.rep.M);
            c.quad_order = r.value("quad_order", c.quad_order);
        }
        if (j.contains("grid")) {
            c.grid.N = j["grid"].value("N", c.grid.N);
            c.grid.E_max = j["grid"].value("E_max", c.grid.E_max);
        }
        if (j.contains("localization")) {
            const auto& l = j["localization"];
            if (l.contains("intervals")) {
                c.intervals.clear();
                for (const auto& p : l["intervals"]) c.intervals.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
            }
            c.bump_family = l.value("bump", c.bump_family);
            c.adapt_beta = l.value("adapt_beta", c.adapt_beta);
            c.grid_E_scale = l.value("grid_E_scale", c.grid_E_scale);
        }
        if (j.contains("suite")) {
            const auto& s = j["suite"];
            c.scope = s.value("scope", c.scope);
            c.profile = s.value("profile", c.profile);
            c.k_values = s.value("k_values", c.k_values);
            c.M_ladder = s.value("M_ladder", c.M_ladder);
            c.interior_fraction = s.value("interior_fraction", c.interior_fraction);
            c.flow_fraction = s.value("flow_fraction", c.flow_fraction);
            if (s.contains("weyl")) {
                c.weyl_t = s["weyl"].value("t", c.weyl_t);
                c.weyl_a = s["weyl"].value("a", c.weyl_a);
            }
            if (s.contains("inclusion")) {
                c.inclusion_t = s["inclusion"].value("t", c.inclusion_t);
                c.inclusion_a = s["inclusion"].value("a", c.inclusion_a);
            }
            c.alpha_points = s.value("alpha_points", c.alpha_points);
            c.f_fixtures = s.value("f_fixtures", c.f_fixtures);
        }
        c.seed = j.value("seed", c.seed);
        if (j.contains("output")) {
            c.out = j["output"].value("path", c.out);
            c.format = j["output"].value("format", c.format);
        }
        c.artifact = j.value("artifact", c.artifact);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(e.what());
    }
    return c;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    try {
        return config_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
}

// Basis and grid used for states localized in [a, b].
inline BasisSpec basis_for(const RunConfig& c, double a, double b) {
    BasisSpec s = c.rep;
    if (c.adapt_beta) s.beta = adapted_beta(a, b);
    return s;
}

inline GridSpec grid_for(const RunConfig& c, double a, double b) {
    if (!c.adapt_beta) return c.grid;
    return adapted_grid(a, b, c.grid.N, c.grid_E_scale);
}

}  // namespace modloc
