#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <numbers>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"
#include "modloc/config.hpp"
#include "modloc/errors.hpp"
#include "modloc/grid_oracle.hpp"
#include "modloc/localization.hpp"
#include "modloc/mobius.hpp"
#include "modloc/spectral_rep.hpp"

namespace modloc {

enum class Status { Pass, Fail, Inconclusive, Error };

inline std::string to_string(Status s) {
    switch (s) {
        case Status::Pass: return "pass";
        case Status::Fail: return "fail";
        case Status::Inconclusive: return "inconclusive";
        case Status::Error: return "error";
    }
    return "?";
}

struct CheckReport {
    std::string name;
    std::string backend = "spectral";
    nlohmann::json params = nlohmann::json::object();
    nlohmann::json values = nlohmann::json::object();
    double residual = 0.0;
    double tolerance = 0.0;
    Status status = Status::Fail;
    std::string message;

    bool passed() const { return status == Status::Pass; }
    // pass iff residual <= tolerance
    CheckReport& judge(bool extra = true) {
        status = (residual <= tolerance && extra) ? Status::Pass : Status::Fail;
        return *this;
    }
    nlohmann::json to_json() const {
        return {{"name", name},         {"backend", backend},     {"params", params},
                {"values", values},     {"residual", residual},   {"tolerance", tolerance},
                {"status", to_string(status)}, {"message", message}};
    }
};

// Check name -> tolerance. Every registered check has an entry.
struct ToleranceProfile {
    std::string name;
    std::map<std::string, double> tol;

    double at(const std::string& check) const {
        const auto it = tol.find(check);
        if (it == tol.end()) throw ConfigError("tolerance profile '" + name + "' has no entry for " + check);
        return it->second;
    }

    static ToleranceProfile preset(const std::string& name) {
        // residual-type tolerances scale with the profile; structural ones do not
        std::map<std::string, double> base{
            {"commutators.spectral", 1e-6}, {"commutators.tilde", 1e-6},  {"commutators.grid", 1e-3},
            {"commutators.grid_tilde", 1e-3}, {"lowest_weights", 1e-6},  {"J_relations", 1e-10},
            {"rotation_swap", 1e-4},         {"translation", 1e-5},      {"prop31", 1e-8},
            {"D_positive", 1e-8},            {"HC_chain", 0.0},          {"Ct_chain", 0.0},
            {"T_bounds", 1e-6},              {"backend_T", 1e-3},        {"covariance", 1e-3},
            {"weyl", 1e-3},                  {"positive_inclusions", 1e-3}, {"F_alpha", 1e-8},
            {"S_invariance", 1e-3},          {"grid_order", 0.2},        {"symplectic", 1e-12},
            {"D_counterexample", 0.0},       {"S_strong", 1e12}};
        double scale = 1.0;
        if (name == "strict") scale = 1e-2;
        else if (name == "coarse") scale = 1e2;
        else if (name != "default") throw ConfigError("unknown tolerance profile '" + name + "'");
        ToleranceProfile p{name, base};
        for (auto& [k, v] : p.tol)
            if (k != "HC_chain" && k != "Ct_chain" && k != "D_counterexample" && k != "S_strong") v *= scale;
        return p;
    }
};

inline Eigen::Index interior_size(Eigen::Index M, double fraction) {
    return std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::ceil(fraction * M)), 1, M);
}

inline double interior_norm(const CMat& A, Eigen::Index p) { return norm2(A.topLeftCorner(p, p)); }

struct CommutatorResiduals {
    double HD = 0.0;  // [H,D] = iH
    double CD = 0.0;  // [C,D] = -iC
    double HC = 0.0;  // [H,C] = 2iD
    double max() const { return std::max({HD, CD, HC}); }
};

inline CommutatorResiduals commutator_residuals(const GeneratorSet& g, double fraction) {
    const Eigen::Index p = interior_size(g.dim(), fraction);
    const cplx I(0.0, 1.0);
    const CMat r1 = g.H * g.D - g.D * g.H - I * g.H;
    const CMat r2 = g.C * g.D - g.D * g.C + I * g.C;
    const CMat r3 = g.H * g.C - g.C * g.H - 2.0 * I * g.D;
    return {interior_norm(r1, p) / interior_norm(g.H, p), interior_norm(r2, p) / interior_norm(g.C, p),
            interior_norm(r3, p) / interior_norm(g.D, p)};
}

inline CheckReport check_commutators(const GeneratorSet& g, double fraction, double tol) {
    const CommutatorResiduals r = commutator_residuals(g, fraction);
    CheckReport rep;
    rep.name = "commutators";
    rep.backend = g.variant == Variant::Plain ? "spectral" : "spectral-tilde";
    rep.params = {{"k", g.spec.k}, {"beta", g.spec.beta}, {"M", g.spec.M}, {"basis", to_string(g.basis)},
                  {"interior_fraction", fraction}};
    rep.values = {{"HD", r.HD}, {"CD", r.CD}, {"HC", r.HC}};
    rep.residual = r.max();
    rep.tolerance = tol;
    return rep.judge();
}

// Smooth compactly supported probes inside (0, E_max); the grid identities are only
// meaningful on vectors the difference scheme resolves.
inline std::vector<CVec> grid_probes(const GridSpec& grid) {
    const RVec E = grid.nodes();
    std::vector<CVec> out;
    for (auto [lo, hi] : {std::pair{0.05, 0.3}, std::pair{0.125, 0.5}, std::pair{0.25, 0.75}}) {
        const double a = lo * grid.E_max, b = hi * grid.E_max;
        CVec v = CVec::Zero(E.size());
        for (Eigen::Index j = 0; j < E.size(); ++j) {
            const double u = (2.0 * E(j) - a - b) / (b - a);
            if (std::abs(u) < 1.0) v(j) = std::exp(-1.0 / (1.0 - u * u));
        }
        out.push_back(v);
    }
    return out;
}

inline CommutatorResiduals grid_commutator_residuals(const GridOps& g, const std::vector<CVec>& probes) {
    const cplx I(0.0, 1.0);
    CommutatorResiduals r;
    for (const CVec& v : probes) {
        const CVec Hv = g.H.apply(v), Dv = g.D.apply(v), Cv = g.C.apply(v);
        const CVec r1 = g.H.apply(Dv) - g.D.apply(Hv) - I * Hv;
        const CVec r2 = g.C.apply(Dv) - g.D.apply(Cv) + I * Cv;
        const CVec r3 = g.H.apply(Cv) - g.C.apply(Hv) - 2.0 * I * Dv;
        r.HD = std::max(r.HD, r1.norm() / Hv.norm());
        r.CD = std::max(r.CD, r2.norm() / Cv.norm());
        r.HC = std::max(r.HC, r3.norm() / Dv.norm());
    }
    return r;
}

inline CheckReport check_commutators_grid(const GridOps& g, double tol) {
    const CommutatorResiduals r = grid_commutator_residuals(g, grid_probes(g.grid));
    CheckReport rep;
    rep.name = "commutators";
    rep.backend = g.tilde ? "grid-tilde" : "grid";
    rep.params = {{"k", g.k}, {"N", g.grid.N}, {"E_max", g.grid.E_max}};
    rep.values = {{"HD", r.HD}, {"CD", r.CD}, {"HC", r.HC}};
    rep.residual = r.max();
    rep.tolerance = tol;
    return rep.judge();
}

struct LowestWeights {
    double plain = 0.0;
    double tilde = 0.0;
};

inline LowestWeights lowest_weights(const GeneratorSet& plain) {
    return {eigvalsh(plain.rotation_generator())(0),
            eigvalsh(build_tilde_generators(plain).rotation_generator())(0)};
}

inline CheckReport check_lowest_weights(const GeneratorSet& plain, double tol) {
    const LowestWeights w = lowest_weights(plain);
    const double k = plain.spec.k;
    CheckReport rep;
    rep.name = "lowest_weights";
    rep.params = {{"k", k}, {"beta", plain.spec.beta}, {"M", plain.spec.M}};
    rep.values = {{"plain", w.plain}, {"plain_target", k}, {"tilde", w.tilde}, {"tilde_target", 0.5 * k + 0.25}};
    rep.residual = std::max(std::abs(w.plain - k), std::abs(w.tilde - (0.5 * k + 0.25)));
    rep.tolerance = tol;
    return rep.judge();
}

inline CheckReport check_J_relations(const GeneratorSet& g, double tol) {
    CheckReport rep;
    rep.name = "J_relations";
    rep.params = {{"k", g.spec.k}, {"M", g.spec.M}};
    const double h = (conjugate_by_J(g.H) - g.H).cwiseAbs().maxCoeff();
    const double d = (conjugate_by_J(g.D) + g.D).cwiseAbs().maxCoeff();
    const double c = (conjugate_by_J(g.C) - g.C).cwiseAbs().maxCoeff();
    rep.values = {{"JHJ-H", h}, {"JDJ+D", d}, {"JCJ-C", c}};
    rep.residual = std::max({h, d, c});
    rep.tolerance = tol;
    return rep.judge();
}

// R = exp(i pi (H+C)/2) should exchange H and C and reverse D.
inline CheckReport check_rotation_swap(const GeneratorSet& g, double fraction, double tol) {
    const CMat R = unitary_flow(g.rotation_generator(), std::numbers::pi);
    const Eigen::Index p = interior_size(g.dim(), fraction);
    const double sw_h = interior_norm(R * g.H * R.adjoint() - g.C, p) / interior_norm(g.C, p);
    const double sw_d = interior_norm(R * g.D * R.adjoint() + g.D, p) / interior_norm(g.D, p);
    CheckReport rep;
    rep.name = "rotation_swap";
    rep.params = {{"k", g.spec.k}, {"M", g.spec.M}, {"interior_fraction", fraction}};
    rep.values = {{"RHR-C", sw_h}, {"RDR+D", sw_d}};
    rep.residual = std::max(sw_h, sw_d);
    rep.tolerance = tol;
    return rep.judge();
}

inline CheckReport check_translation(const GeneratorSet& g, const std::vector<double>& shifts, double fraction,
                                     double tol) {
    const Eigen::Index p = interior_size(g.dim(), fraction);
    const UnitaryFlow U(g.H, +1);
    double worst = 0.0, min_eig = std::numeric_limits<double>::infinity();
    nlohmann::json per = nlohmann::json::array();
    for (double a : shifts) {
        const GeneratorSet t = translate_generators(g, a);
        const CMat Ua = U.at(a);
        const CMat explicit_C = Ua.adjoint() * g.C * Ua;
        const double r = interior_norm(explicit_C - t.C, p) / interior_norm(t.C, p);
        const double lo = eigvalsh(t.C)(0);
        worst = std::max(worst, r);
        min_eig = std::min(min_eig, lo);
        per.push_back({{"a", a}, {"residual", r}, {"min_eig", lo}});
    }
    CheckReport rep;
    rep.name = "translation";
    rep.params = {{"k", g.spec.k}, {"M", g.spec.M}, {"interior_fraction", fraction}};
    rep.values = {{"per_shift", per}, {"min_eig", min_eig}};
    rep.residual = worst;
    rep.tolerance = tol;
    return rep.judge(min_eig >= -1e-8);
}

// ||H^{-1/2} psi||^2 <= (k - 1/2)^{-2} (psi, C psi) on random low-lying states.
inline CheckReport check_prop31(const GeneratorSet& g, std::uint64_t seed, int count, double fraction, double tol) {
    CheckReport rep;
    rep.name = "prop31";
    rep.params = {{"k", g.spec.k}, {"M", g.spec.M}, {"seed", seed}, {"count", count}};
    const double k = g.spec.k;
    if (!(k > 0.5)) {
        rep.status = Status::Inconclusive;
        rep.message = "bound is vacuous at k = 1/2";
        return rep;
    }
    const CMat Hinv = matrix_function(g.H, MatrixFunction::power(-1.0));
    const Eigen::Index p = interior_size(g.dim(), fraction);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    double worst = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < count; ++i) {
        CVec v = CVec::Zero(g.dim());
        for (Eigen::Index j = 0; j < p; ++j) v(j) = cplx(nd(rng), nd(rng));
        v.normalize();
        const double lhs = expect(Hinv, v);
        const double rhs = expect(g.C, v) / ((k - 0.5) * (k - 0.5));
        worst = std::max(worst, lhs - rhs);
    }
    rep.values = {{"max_lhs_minus_rhs", worst}};
    rep.residual = std::max(worst, 0.0);
    rep.tolerance = tol;
    return rep.judge();
}

// ---------- local states ----------

struct Expectations {
    double norm2 = 0.0;
    double H = 0.0, C = 0.0, D = 0.0, Ct = 0.0, T = 0.0;  // divided by norm2
};

inline nlohmann::json to_json(const Expectations& e) {
    return {{"norm2", e.norm2}, {"H", e.H}, {"C", e.C}, {"D", e.D}, {"Ct", e.Ct}, {"T", e.T}};
}

struct SpectralContext {
    GeneratorSet plain;
    GeneratorSet tilde;
    CMat T;
    HermitianEig two_Ct;
};

inline std::shared_ptr<SpectralContext> make_spectral_context(const GeneratorSet& plain) {
    auto c = std::make_shared<SpectralContext>();
    c->plain = plain;
    c->tilde = build_tilde_generators(plain);
    c->two_Ct = eigh(CMat(2.0 * c->tilde.C));
    c->T = 0.5 * matrix_function(c->two_Ct, MatrixFunction::log());
    return c;
}

struct GridContext {
    GridOps plain;
    GridOps tilde;
    GridT T;
};

inline std::shared_ptr<GridContext> make_grid_context(const GridSpec& grid, double k) {
    return std::make_shared<GridContext>(GridContext{build_grid_ops(grid, k), build_grid_tilde_ops(grid, k), GridT(grid, k)});
}

inline Expectations expectations(const SpectralContext& c, const CVec& v) {
    Expectations e;
    e.norm2 = v.squaredNorm();
    e.H = expect(c.plain.H, v) / e.norm2;
    e.C = expect(c.plain.C, v) / e.norm2;
    e.D = expect(c.plain.D, v) / e.norm2;
    e.Ct = expect(c.tilde.C, v) / e.norm2;
    e.T = expect(c.T, v) / e.norm2;
    return e;
}

inline Expectations expectations(const GridContext& c, const StateVector& s) {
    const CVec& v = s.coeffs;
    const auto ex = [&](const Tridiag& A) { return (v.dot(A.apply(v))).real() / v.squaredNorm(); };
    Expectations e;
    e.norm2 = s.coeff_norm2();
    e.H = ex(c.plain.H);
    e.C = ex(c.plain.C);
    e.D = ex(c.plain.D);
    e.Ct = ex(c.tilde.C);
    e.T = c.T.expectation(v);
    return e;
}

inline CheckReport check_D_positive(const std::vector<Expectations>& states, double tol, const std::string& backend) {
    CheckReport rep;
    rep.name = "D_positive";
    rep.backend = backend;
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& e : states) lo = std::min(lo, e.D);
    rep.params = {{"states", states.size()}};
    rep.values = {{"min_D", lo}};
    rep.residual = std::max(-lo, 0.0);
    rep.tolerance = tol;
    return rep.judge(!states.empty());
}

// a^2 <H> <= <C> <= b^2 <H>, with strictly positive slack.
inline CheckReport check_HC_chain(const std::vector<Expectations>& states, double a, double b, double tol,
                                  const std::string& backend) {
    CheckReport rep;
    rep.name = "HC_chain";
    rep.backend = backend;
    double lo_slack = std::numeric_limits<double>::infinity(), hi_slack = lo_slack;
    nlohmann::json ratios = nlohmann::json::array();
    for (const auto& e : states) {
        lo_slack = std::min(lo_slack, (e.C - a * a * e.H) / e.H);
        hi_slack = std::min(hi_slack, (b * b * e.H - e.C) / e.H);
        ratios.push_back(e.C / e.H);
    }
    rep.params = {{"a", a}, {"b", b}, {"states", states.size()}};
    rep.values = {{"min_lower_slack", lo_slack}, {"min_upper_slack", hi_slack}, {"C_over_H", ratios}};
    rep.residual = -std::min(lo_slack, hi_slack);
    rep.tolerance = tol;
    rep.status = (lo_slack > tol && hi_slack > tol && !states.empty()) ? Status::Pass : Status::Fail;
    return rep;
}

// a^2/2 < <Ct> < b^2/2
inline CheckReport check_Ct_chain(const std::vector<Expectations>& states, double a, double b, double tol,
                                  const std::string& backend) {
    CheckReport rep;
    rep.name = "Ct_chain";
    rep.backend = backend;
    double lo_slack = std::numeric_limits<double>::infinity(), hi_slack = lo_slack;
    for (const auto& e : states) {
        lo_slack = std::min(lo_slack, e.Ct - 0.5 * a * a);
        hi_slack = std::min(hi_slack, 0.5 * b * b - e.Ct);
    }
    rep.params = {{"a", a}, {"b", b}, {"states", states.size()}};
    rep.values = {{"min_lower_slack", lo_slack}, {"min_upper_slack", hi_slack}};
    rep.residual = -std::min(lo_slack, hi_slack);
    rep.tolerance = tol;
    rep.status = (lo_slack > tol && hi_slack > tol && !states.empty()) ? Status::Pass : Status::Fail;
    return rep;
}

// log a - tol <= <T> <= log b + tol
inline CheckReport check_T_bounds(const std::vector<Expectations>& states, double a, double b, double tol,
                                  const std::string& backend, const std::string& name = "T_bounds") {
    CheckReport rep;
    rep.name = name;
    rep.backend = backend;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    nlohmann::json Ts = nlohmann::json::array();
    for (const auto& e : states) {
        lo = std::min(lo, e.T);
        hi = std::max(hi, e.T);
        Ts.push_back(e.T);
    }
    rep.params = {{"a", a}, {"b", b}, {"states", states.size()}};
    rep.values = {{"min_T", lo}, {"max_T", hi}, {"log_a", std::log(a)}, {"log_b", std::log(b)}, {"T", Ts}};
    rep.residual = std::max({std::log(a) - lo, hi - std::log(b), 0.0});
    rep.tolerance = tol;
    return rep.judge(!states.empty());
}

inline CheckReport check_backend_T(const std::vector<Expectations>& spectral, const std::vector<Expectations>& grid,
                                   double tol) {
    CheckReport rep;
    rep.name = "backend_T";
    rep.backend = "spectral-vs-grid";
    if (spectral.size() != grid.size()) throw InvalidArgument("backend state lists differ in length");
    double worst = 0.0;
    for (size_t i = 0; i < spectral.size(); ++i)
        worst = std::max(worst, std::abs(spectral[i].T - grid[i].T) / std::max(std::abs(grid[i].T), 1e-3));
    rep.params = {{"states", spectral.size()}};
    rep.values = {{"max_rel_diff", worst}};
    rep.residual = worst;
    rep.tolerance = tol;
    return rep.judge(!spectral.empty());
}

inline CheckReport check_D_counterexample(const GeneratorSet& g, std::uint64_t seed, int count) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    int negative = 0;
    double lo = std::numeric_limits<double>::infinity();
    for (int i = 0; i < count; ++i) {
        CVec v(g.dim());
        for (Eigen::Index j = 0; j < v.size(); ++j) v(j) = cplx(nd(rng), nd(rng));
        const double d = expect(g.D, v) / v.squaredNorm();
        lo = std::min(lo, d);
        negative += d < 0.0;
    }
    CheckReport rep;
    rep.name = "D_counterexample";
    rep.params = {{"seed", seed}, {"count", count}, {"M", g.spec.M}};
    rep.values = {{"negative", negative}, {"min_D", lo}};
    rep.residual = 0.0;
    rep.status = negative >= 1 ? Status::Pass : Status::Fail;
    return rep;
}

// ---------- flows ----------

// ||P (V(t) W(a) - e^{i s a t} W(a) V(t)) P|| with V = exp(-itD), W = exp(iaX); s is the phase sign
// fixed by the commutator of X with D.
inline double weyl_residual(const UnitaryFlow& V, const UnitaryFlow& W, int phase_sign, double t, double a,
                            Eigen::Index p) {
    const CMat Vt = V.at(t), Wa = W.at(a);
    const cplx phase = std::exp(cplx(0.0, phase_sign * a * t));
    return interior_norm(Vt * Wa - phase * Wa * Vt, p);
}

inline CheckReport check_weyl(const std::string& pair, const GeneratorSet& g, const CMat& X, int phase_sign,
                              const std::vector<double>& ts, const std::vector<double>& as, double fraction,
                              double tol) {
    const UnitaryFlow V = modular_flow(g);
    const UnitaryFlow W(X, +1);
    const Eigen::Index p = interior_size(g.dim(), fraction);
    double worst = 0.0, wrong_sign = 0.0;
    nlohmann::json grid = nlohmann::json::array();
    for (double t : ts)
        for (double a : as) {
            const double r = weyl_residual(V, W, phase_sign, t, a, p);
            wrong_sign = std::max(wrong_sign, weyl_residual(V, W, -phase_sign, t, a, p));
            worst = std::max(worst, r);
            grid.push_back({{"t", t}, {"a", a}, {"residual", r}});
        }
    CheckReport rep;
    rep.name = "weyl";
    rep.params = {{"pair", pair}, {"phase_sign", phase_sign}, {"k", g.spec.k}, {"M", g.spec.M},
                  {"interior", p}};
    rep.values = {{"residuals", grid}, {"wrong_sign_max", wrong_sign}};
    rep.residual = worst;
    rep.tolerance = tol;
    return rep.judge();
}

// Delta^{it} U_h(a) Delta^{-it} = U_h(e^{-2 pi t} a), the same for U_c with e^{2 pi t},
// and J U(a) J = U(a)^*.
inline CheckReport check_positive_inclusions(const GeneratorSet& g, double t, double a, double fraction, double tol,
                                             double J_tol) {
    const UnitaryFlow V = modular_flow(g);
    const UnitaryFlow Uh(g.H, +1), Uc(g.C, +1);
    const Eigen::Index p = interior_size(g.dim(), fraction);
    const double s = 2.0 * std::numbers::pi * t;
    const CMat Vs = V.at(s), Vms = V.at(-s);
    const double rh = interior_norm(Vs * Uh.at(a) * Vms - Uh.at(std::exp(-s) * a), p);
    const double rc = interior_norm(Vs * Uc.at(a) * Vms - Uc.at(std::exp(s) * a), p);
    const double jh = (conjugate_by_J(Uh.at(a)) - Uh.at(a).adjoint()).cwiseAbs().maxCoeff();
    const double jc = (conjugate_by_J(Uc.at(a)) - Uc.at(a).adjoint()).cwiseAbs().maxCoeff();
    CheckReport rep;
    rep.name = "positive_inclusions";
    rep.params = {{"t", t}, {"a", a}, {"k", g.spec.k}, {"M", g.spec.M}, {"interior", p}};
    rep.values = {{"U_h", rh}, {"U_c", rc}, {"J_U_h", jh}, {"J_U_c", jc}};
    rep.residual = std::max(rh, rc);
    rep.tolerance = tol;
    return rep.judge(std::max(jh, jc) <= J_tol);
}

// ---------- F(alpha) ----------

struct FProfile {
    std::vector<double> alpha;
    std::vector<double> F;
};

// F(alpha) = a^{-2 alpha} (psi, (2 Ct)^alpha psi) / ||psi||^2
inline FProfile f_alpha_profile(const HermitianEig& two_Ct, const CVec& psi, double a, int points) {
    const CVec c = two_Ct.vectors.adjoint() * psi;
    const RVec w2 = c.cwiseAbs2();
    const auto moment = [&](double al) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < w2.size(); ++i) s += w2(i) * (al == 0.0 ? 1.0 : std::pow(two_Ct.values(i), al));
        return s;
    };
    const double n0 = moment(0.0);
    FProfile f;
    for (int i = 0; i < points; ++i) {
        const double al = -1.0 + 2.0 * i / (points - 1);
        f.alpha.push_back(al);
        f.F.push_back(al == 0.0 ? moment(0.0) / n0 : std::pow(a, -2.0 * al) * moment(al) / n0);
    }
    return f;
}

inline CheckReport check_F_alpha(const FProfile& f, double tol) {
    double F0 = std::numeric_limits<double>::quiet_NaN(), Fm1 = f.F.front();
    for (size_t i = 0; i < f.alpha.size(); ++i)
        if (f.alpha[i] == 0.0) F0 = f.F[i];
    double min_d2 = std::numeric_limits<double>::infinity();
    for (size_t i = 1; i + 1 < f.F.size(); ++i) min_d2 = std::min(min_d2, f.F[i + 1] - 2.0 * f.F[i] + f.F[i - 1]);
    CheckReport rep;
    rep.name = "F_alpha";
    rep.values = {{"F0", F0}, {"F_minus1", Fm1}, {"min_second_difference", min_d2}, {"alpha", f.alpha}, {"F", f.F}};
    rep.residual = std::max({Fm1 - 1.0, -min_d2, 0.0});
    rep.tolerance = tol;
    return rep.judge(F0 == 1.0);
}

// ---------- S-invariance ----------

struct WeakSProbes {
    std::vector<double> mu{-1.0, 0.0, 1.0, 2.0, 3.0};  // centres in log E, shifted by -log beta
    double sigma = 1.0;
    double half_width = 12.0;  // in units of sigma
    int points = 6001;
};

// max_j |<Delta^{1/2} phi_j, w> - <phi_j, J w>| / (||Delta^{1/2} phi_j|| ||w||) for w = i psi_+,
// phi_j(E) = E^{-1/2} exp(-(log E - mu_j)^2 / 2 sigma^2), Delta^{1/2} continuing log E -> log E + i pi.
inline double weak_S_residual(const StateVector& v, const WeakSProbes& probes = {}) {
    if (v.rep != Representation::ZSpectral) throw InvalidArgument("weak S residual uses Z coefficients");
    const CVec w = cplx(0.0, 1.0) * v.coeffs;
    const double shift = -std::log(v.basis.beta);
    double worst = 0.0;
    for (double mu0 : probes.mu) {
        const double mu = mu0 + shift, sg = probes.sigma;
        const double lo = mu - probes.half_width * sg, hi = mu + probes.half_width * sg;
        const int n = probes.points;
        const double du = (hi - lo) / (n - 1);
        RVec E(n), quad(n);
        CVec phi(n), dphi(n);
        for (int i = 0; i < n; ++i) {
            const double u = lo + du * i;
            E(i) = std::exp(u);
            quad(i) = E(i) * du * ((i == 0 || i == n - 1) ? 0.5 : 1.0);
            const double base = std::exp(-0.5 * u);
            phi(i) = base * std::exp(-(u - mu) * (u - mu) / (2.0 * sg * sg));
            const cplx z = cplx(u - mu, std::numbers::pi);
            dphi(i) = base * std::exp(-z * z / (2.0 * sg * sg));
        }
        const RMat Z = basis_table(v.basis, E, BasisKind::Z);
        const CVec ov_d = Z.cast<cplx>() * (dphi.conjugate().cwiseProduct(quad.cast<cplx>()));
        const CVec ov_p = Z.cast<cplx>() * (phi.cwiseProduct(quad.cast<cplx>()));
        const cplx L = (ov_d.transpose() * w)(0, 0);
        const cplx R = (ov_p.transpose() * w.conjugate())(0, 0);
        const double nd = std::sqrt(quad.dot(dphi.cwiseAbs2()));
        worst = std::max(worst, std::abs(L - R) / (nd * w.norm()));
    }
    return worst;
}

// ||exp(-pi D_M) w - J w|| / ||w||; throws OverflowAbort when the truncated exponential blows up.
inline double strong_S_residual(const GeneratorSet& g, const CVec& psi, double overflow) {
    const CVec w = cplx(0.0, 1.0) * psi;
    const HermitianEig e = eigh(g.D);
    CVec c = e.vectors.adjoint() * w;
    for (Eigen::Index i = 0; i < c.size(); ++i) {
        c(i) *= std::exp(-std::numbers::pi * e.values(i));
        if (!std::isfinite(std::abs(c(i))) || std::abs(c(i)) > overflow * w.norm())
            throw OverflowAbort("truncated exp(-pi D) amplifies a component beyond " + std::to_string(overflow));
    }
    return (e.vectors * c - conjugation_J(w)).norm() / w.norm();
}

// Trend check: non-increasing over the ladder and below the coarse tolerance at the top.
inline CheckReport check_S_invariance(const std::vector<int>& Ms, const std::vector<double>& r, double tol) {
    bool monotone = true;
    for (size_t i = 1; i < r.size(); ++i) monotone = monotone && r[i] <= r[i - 1];
    CheckReport rep;
    rep.name = "S_invariance";
    rep.params = {{"M_ladder", Ms}, {"form", "weak"}};
    rep.values = {{"r", r}, {"non_increasing", monotone}};
    rep.residual = r.empty() ? 0.0 : r.back();
    rep.tolerance = tol;
    return rep.judge(monotone && !r.empty());
}

// ---------- grid convergence ----------

// Observed order from successive differences of the lowest eigenvalues of Ct on grids with halving spacing.
inline std::vector<double> grid_convergence_orders(double E_max, double k, const std::vector<int>& Ns, int n_eigs) {
    std::vector<RVec> ev;
    for (int N : Ns) {
        const GridOps t = build_grid_tilde_ops({N, E_max}, k);
        ev.push_back(eigh_tridiagonal(t.C.diag, t.C.upper.real(), false).values.head(n_eigs));
    }
    std::vector<double> orders;
    for (size_t i = 0; i + 2 < ev.size(); ++i)
        for (int j = 0; j < n_eigs; ++j)
            orders.push_back(std::log2(std::abs(ev[i](j) - ev[i + 1](j)) / std::abs(ev[i + 1](j) - ev[i + 2](j))));
    return orders;
}

inline CheckReport check_grid_order(double E_max, double k, const std::vector<int>& Ns, int n_eigs, double tol) {
    const auto orders = grid_convergence_orders(E_max, k, Ns, n_eigs);
    double worst = 0.0;
    for (double o : orders) worst = std::max(worst, std::abs(o - 2.0));
    CheckReport rep;
    rep.name = "grid_order";
    rep.backend = "grid";
    rep.params = {{"E_max", E_max}, {"k", k}, {"N", Ns}, {"eigenvalues", n_eigs}};
    rep.values = {{"orders", orders}};
    rep.residual = worst;
    rep.tolerance = tol;
    return rep.judge(!orders.empty());
}

// ---------- suite ----------

inline const std::vector<std::string>& suite_scopes() {
    static const std::vector<std::string> s{"commutators", "lowest_weights", "algebra",  "localization",
                                            "covariance",  "weyl",           "positive_inclusions",
                                            "F_alpha",     "S_invariance",   "grid_order", "symplectic"};
    return s;
}

class SuiteContext {
public:
    SuiteContext(const RunConfig& cfg, std::shared_ptr<const GeneratorSet> preload = nullptr)
        : cfg_(cfg), preload_(std::move(preload)) {}

    const GeneratorSet& plain(const BasisSpec& s) { return spectral(s)->plain; }

    std::shared_ptr<SpectralContext> spectral(const BasisSpec& s) {
        const auto key = std::make_tuple(s.k, s.beta, s.M);
        auto it = spectral_.find(key);
        if (it != spectral_.end()) return it->second;
        std::shared_ptr<SpectralContext> c;
        if (preload_ && preload_->spec == s) c = make_spectral_context(*preload_);
        else c = make_spectral_context(build_generators(s, s == cfg_.rep ? cfg_.quad_order : 0));
        spectral_[key] = c;
        return c;
    }

    std::shared_ptr<GridContext> grid(const GridSpec& g, double k) {
        const auto key = std::make_tuple(g.N, g.E_max, k);
        auto it = grid_.find(key);
        if (it != grid_.end()) return it->second;
        auto c = make_grid_context(g, k);
        grid_[key] = c;
        return c;
    }

    const RunConfig& config() const { return cfg_; }

private:
    RunConfig cfg_;
    std::shared_ptr<const GeneratorSet> preload_;
    std::map<std::tuple<double, double, int>, std::shared_ptr<SpectralContext>> spectral_;
    std::map<std::tuple<int, double, double>, std::shared_ptr<GridContext>> grid_;
};

inline std::vector<BumpSpec> fixtures_for(const RunConfig& c, double a, double b) {
    std::vector<BumpSpec> out = local_fixtures(a, b);
    const BumpFamily fam = bump_family_from_string(c.bump_family);
    if (fam != BumpFamily::Mollifier)
        for (size_t i = 0; i < out.size(); ++i) {
            out[i].family = fam;
            out[i].shape = 6.0 + static_cast<double>(i / 4);
        }
    return out;
}

struct LocalBatch {
    std::vector<BumpSpec> specs;
    std::vector<StateVector> spectral_states;
    std::vector<Expectations> spectral;
    std::vector<Expectations> grid;
    std::vector<std::string> errors;
};

inline LocalBatch evaluate_local_states(SuiteContext& ctx, double a, double b, const std::vector<BumpSpec>& specs,
                                        bool with_grid = true) {
    const RunConfig& c = ctx.config();
    const BasisSpec bs = basis_for(c, a, b);
    auto sc = ctx.spectral(bs);
    std::shared_ptr<GridContext> gc;
    if (with_grid) gc = ctx.grid(grid_for(c, a, b), bs.k);
    LocalBatch out;
    for (const BumpSpec& s : specs) {
        try {
            const XSamples xs = make_bump(s);
            StateVector v = positive_frequency(xs, bs);
            v.provenance["bump"] = to_json(s);
            const Expectations es = expectations(*sc, v.coeffs);
            Expectations eg;
            if (with_grid) eg = expectations(*gc, positive_frequency(xs, gc->plain.grid));
            out.specs.push_back(s);
            out.spectral_states.push_back(std::move(v));
            out.spectral.push_back(es);
            if (with_grid) out.grid.push_back(eg);
        } catch (const Error& e) {
            out.errors.push_back(e.what());
        }
    }
    return out;
}

inline CheckReport error_report(const std::string& name, const std::string& what) {
    CheckReport r;
    r.name = name;
    r.status = Status::Error;
    r.message = what;
    return r;
}

inline std::vector<CheckReport> run_suite(const RunConfig& cfg, const ToleranceProfile& tp,
                                          const std::vector<std::string>& scope,
                                          std::shared_ptr<const GeneratorSet> preload = nullptr) {
    std::vector<CheckReport> out;
    if (scope.empty()) return out;
    const bool all = std::find(scope.begin(), scope.end(), "all") != scope.end();
    for (const auto& s : scope)
        if (s != "all" && std::find(suite_scopes().begin(), suite_scopes().end(), s) == suite_scopes().end())
            throw ConfigError("unknown scope '" + s + "'");
    const auto want = [&](const std::string& s) {
        return all || std::find(scope.begin(), scope.end(), s) != scope.end();
    };
    SuiteContext ctx(cfg, preload);
    const BasisSpec base = cfg.rep;
    const auto guarded = [&](const std::string& name, auto&& fn) {
        try {
            fn();
        } catch (const std::exception& e) {
            out.push_back(error_report(name, e.what()));
        }
    };

    if (want("commutators")) {
        guarded("commutators", [&] {
            out.push_back(check_commutators(ctx.plain(base), cfg.interior_fraction, tp.at("commutators.spectral")));
        });
        guarded("commutators", [&] {
            out.push_back(check_commutators(build_tilde_native(base), cfg.interior_fraction,
                                            tp.at("commutators.tilde")));
        });
        guarded("commutators", [&] {
            out.push_back(check_commutators_grid(build_grid_ops(cfg.grid, base.k), tp.at("commutators.grid")));
        });
        guarded("commutators", [&] {
            out.push_back(
                check_commutators_grid(build_grid_tilde_ops(cfg.grid, base.k), tp.at("commutators.grid_tilde")));
        });
    }

    if (want("lowest_weights")) {
        for (double k : cfg.k_values)
            guarded("lowest_weights", [&] {
                BasisSpec s = base;
                s.k = k;
                out.push_back(check_lowest_weights(ctx.plain(s), tp.at("lowest_weights")));
            });
    }

    if (want("algebra")) {
        guarded("J_relations", [&] { out.push_back(check_J_relations(ctx.plain(base), tp.at("J_relations"))); });
        guarded("rotation_swap", [&] {
            out.push_back(check_rotation_swap(ctx.plain(base), cfg.interior_fraction, tp.at("rotation_swap")));
        });
        guarded("translation", [&] {
            out.push_back(check_translation(ctx.plain(base), {0.5, 1.0, 2.0}, cfg.flow_fraction, tp.at("translation")));
        });
        guarded("prop31", [&] { out.push_back(check_prop31(ctx.plain(base), cfg.seed, 100, 0.5, tp.at("prop31"))); });
        guarded("D_counterexample",
                [&] { out.push_back(check_D_counterexample(ctx.plain(base), cfg.seed, 100)); });
    }

    if (want("localization")) {
        for (const auto& I : cfg.intervals) {
            guarded("localization", [&] {
                const LocalBatch lb = evaluate_local_states(ctx, I.a, I.b, fixtures_for(cfg, I.a, I.b));
                for (const auto& e : lb.errors) out.push_back(error_report("localization", e));
                const nlohmann::json iv = {I.a, I.b};
                for (const auto* backend : {"spectral", "grid"}) {
                    const auto& ex = std::string(backend) == "spectral" ? lb.spectral : lb.grid;
                    std::vector<CheckReport> batch{
                        check_D_positive(ex, tp.at("D_positive"), backend),
                        check_HC_chain(ex, I.a, I.b, tp.at("HC_chain"), backend),
                        check_Ct_chain(ex, I.a, I.b, tp.at("Ct_chain"), backend),
                        check_T_bounds(ex, I.a, I.b, tp.at("T_bounds"), backend)};
                    for (auto& r : batch) {
                        r.params["interval"] = iv;
                        out.push_back(std::move(r));
                    }
                }
                CheckReport agree = check_backend_T(lb.spectral, lb.grid, tp.at("backend_T"));
                agree.params["interval"] = iv;
                out.push_back(std::move(agree));
                // control: the same states against reversed bounds must fail
                CheckReport ctl = check_T_bounds(lb.spectral, I.b, I.a, tp.at("T_bounds"), "spectral");
                CheckReport ctl_out;
                ctl_out.name = "swapped_bounds_control";
                ctl_out.params = {{"interval", iv}};
                ctl_out.values = {{"control_status", to_string(ctl.status)}};
                ctl_out.status = ctl.passed() ? Status::Fail : Status::Pass;
                out.push_back(std::move(ctl_out));
            });
        }
    }

    if (want("covariance")) {
        guarded("covariance", [&] {
            const MoebiusMap g = dilation(2.0);
            const double a = 1.0, b = 2.0;
            const Interval img = act_interval(g, Interval(a, b));
            const double ga = img.lo.value(), gb = img.hi.value();
            const BasisSpec bs = basis_for(cfg, ga, gb);
            auto sc = ctx.spectral(bs);
            auto sc0 = ctx.spectral(basis_for(cfg, a, b));
            std::vector<Expectations> moved, orig;
            for (const BumpSpec& s : fixtures_for(cfg, a, b)) {
                const Wavefunction w = pushforward(g, bump_function(s));
                const int n = s.samples;
                const XSamples xs = sample(w, 0.0, s.extent * gb / (n - 1), n);
                moved.push_back(expectations(*sc, positive_frequency(xs, bs).coeffs));
                orig.push_back(expectations(*sc0, positive_frequency(make_bump(s), basis_for(cfg, a, b)).coeffs));
            }
            CheckReport r = check_T_bounds(moved, ga, gb, tp.at("covariance"), "spectral", "covariance");
            double shift_err = 0.0;
            for (size_t i = 0; i < moved.size(); ++i)
                shift_err = std::max(shift_err, std::abs(moved[i].T - orig[i].T - std::log(ga / a)));
            r.params["map"] = "dilation(2)";
            r.params["source_interval"] = {a, b};
            r.values["max_shift_error"] = shift_err;
            out.push_back(std::move(r));
        });
    }

    if (want("weyl")) {
        guarded("weyl", [&] {
            auto sc = ctx.spectral(base);
            const LogPair logs = build_Th_Tc(sc->plain);
            out.push_back(check_weyl("T_h,D", sc->plain, logs.Th, -1, cfg.weyl_t, cfg.weyl_a, cfg.flow_fraction,
                                     tp.at("weyl")));
            out.push_back(check_weyl("T,D", sc->plain, sc->T, +1, cfg.weyl_t, cfg.weyl_a, cfg.flow_fraction,
                                     tp.at("weyl")));
            out.push_back(check_weyl("T_c,D", sc->plain, logs.Tc, +1, cfg.weyl_t, cfg.weyl_a, cfg.flow_fraction,
                                     tp.at("weyl")));
        });
    }

    if (want("positive_inclusions")) {
        guarded("positive_inclusions", [&] {
            out.push_back(check_positive_inclusions(ctx.plain(base), cfg.inclusion_t, cfg.inclusion_a,
                                                    cfg.flow_fraction, tp.at("positive_inclusions"),
                                                    tp.at("J_relations")));
        });
    }

    if (want("F_alpha")) {
        for (const auto& I : cfg.intervals) {
            guarded("F_alpha", [&] {
                auto fx = fixtures_for(cfg, I.a, I.b);
                fx.resize(std::min<size_t>(fx.size(), static_cast<size_t>(cfg.f_fixtures)));
                const LocalBatch lb = evaluate_local_states(ctx, I.a, I.b, fx, false);
                for (const auto& e : lb.errors) out.push_back(error_report("F_alpha", e));
                auto sc = ctx.spectral(basis_for(cfg, I.a, I.b));
                for (size_t i = 0; i < lb.spectral_states.size(); ++i) {
                    CheckReport r = check_F_alpha(
                        f_alpha_profile(sc->two_Ct, lb.spectral_states[i].coeffs, I.a, cfg.alpha_points),
                        tp.at("F_alpha"));
                    r.params = {{"interval", {I.a, I.b}}, {"bump", to_json(lb.specs[i])}};
                    out.push_back(std::move(r));
                }
            });
        }
    }

    if (want("S_invariance")) {
        guarded("S_invariance", [&] {
            const double a = cfg.intervals.empty() ? 1.0 : cfg.intervals.front().a;
            const double b = cfg.intervals.empty() ? 2.0 : cfg.intervals.front().b;
            BumpSpec s = fixtures_for(cfg, a, b).front();
            s.samples = 8192;
            std::vector<double> weak, strong;
            std::string strong_note;
            for (int M : cfg.M_ladder) {
                BasisSpec bs = basis_for(cfg, a, b);
                bs.M = M;
                TransformOptions opt;
                opt.max_loss = 1.0;
                const StateVector v = positive_frequency(make_bump(s), bs, opt);
                weak.push_back(weak_S_residual(v));
                try {
                    strong.push_back(strong_S_residual(build_generators(bs), v.coeffs, tp.at("S_strong")));
                } catch (const OverflowAbort& e) {
                    strong_note = e.what();
                    strong.push_back(std::numeric_limits<double>::infinity());
                }
            }
            CheckReport r = check_S_invariance(cfg.M_ladder, weak, tp.at("S_invariance"));
            r.params["interval"] = {a, b};
            out.push_back(std::move(r));
            CheckReport st;
            st.name = "S_strong";
            st.params = {{"M_ladder", cfg.M_ladder}, {"interval", {a, b}}};
            nlohmann::json sj = nlohmann::json::array();
            for (double x : strong) sj.push_back(std::isfinite(x) ? nlohmann::json(x) : nlohmann::json("overflow"));
            st.values = {{"r", sj}};
            st.status = Status::Inconclusive;
            st.message = strong_note.empty() ? "truncated exp(-pi D) is not a trusted map" : strong_note;
            out.push_back(std::move(st));
        });
    }

    if (want("grid_order")) {
        guarded("grid_order", [&] {
            out.push_back(check_grid_order(cfg.grid.E_max, base.k, {511, 1023, 2047, 4095}, 5, tp.at("grid_order")));
        });
    }

    if (want("symplectic")) {
        guarded("symplectic", [&] {
            BumpSpec p, q;
            p.a = 1.0;
            p.b = 2.0;
            p.extent = 2.5;
            q.a = 3.0;
            q.b = 4.0;
            const XSamples xp = make_bump(p);
            const XSamples xq = sample(bump_function(q), xp.x0, xp.dx, static_cast<int>(xp.size()));
            const double disjoint = std::abs(symplectic(xp, xq));
            const double self = std::abs(symplectic(xp, xp));
            CheckReport r;
            r.name = "symplectic";
            r.params = {{"supports", {{1, 2}, {3, 4}}}};
            r.values = {{"disjoint", disjoint}, {"self", self}};
            r.residual = std::max(disjoint, self);
            r.tolerance = tp.at("symplectic");
            out.push_back(r.judge());
        });
    }
    return out;
}

struct Aggregate {
    int pass = 0, fail = 0, inconclusive = 0, error = 0;
    bool ok() const { return fail == 0 && error == 0; }
};

inline Aggregate aggregate(const std::vector<CheckReport>& reports) {
    Aggregate a;
    for (const auto& r : reports) {
        switch (r.status) {
            case Status::Pass: ++a.pass; break;
            case Status::Fail: ++a.fail; break;
            case Status::Inconclusive: ++a.inconclusive; break;
            case Status::Error: ++a.error; break;
        }
    }
    return a;
}

inline nlohmann::json report_document(const RunConfig& cfg, const std::vector<CheckReport>& reports) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : reports) arr.push_back(r.to_json());
    const Aggregate a = aggregate(reports);
    return {{"format", "modloc-report"},
            {"format_version", kFormatVersion},
            {"config", to_json(cfg)},
            {"reports", arr},
            {"aggregate",
             {{"pass", a.ok()}, {"n_pass", a.pass}, {"n_fail", a.fail}, {"n_inconclusive", a.inconclusive},
              {"n_error", a.error}}}};
}

}  // namespace modloc
