// One line per acceptance criterion; nonzero exit if any fails.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>

#include "modloc/artifact.hpp"
#include "modloc/verification.hpp"

using namespace modloc;

namespace {

// pinned tolerances
constexpr double kLowestWeightTol = 1e-6;
constexpr double kSpectralCommTol = 1e-6;
constexpr double kGridCommTol = 1e-3;
constexpr double kDTol = 1e-8;
constexpr double kTTol = 1e-6;
constexpr double kBackendTol = 1e-3;
constexpr double kCovarianceTol = 1e-3;
constexpr double kWeylTol = 1e-3;
constexpr double kInclusionTol = 1e-3;
constexpr double kJTol = 1e-10;
constexpr double kFTol = 1e-8;
constexpr double kOrderTol = 0.2;
constexpr double kInterior = 0.8;
constexpr double kFlowInterior = 1.0 / 16.0;
constexpr int kM = 256;

struct Outcome {
    bool pass;
    std::string detail;
};

int failures = 0;

void run(int id, const std::string& title, double budget_s, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o{false, ""};
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = dt <= budget_s;
    const bool ok = o.pass && in_time;
    if (!ok) ++failures;
    std::printf("criterion %d %-26s %s  %s  [%.1f s / %.0f s]\n", id, title.c_str(), ok ? "PASS" : "FAIL",
                o.detail.c_str(), dt, budget_s);
    std::fflush(stdout);
}

std::string sci(double x) {
    char b[32];
    std::snprintf(b, sizeof b, "%.2e", x);
    return b;
}

const std::vector<IntervalSpec> kIntervals{{1.0, 2.0}, {0.5, 1.0}, {4.0, 8.0}};

// criterion 3 on one context; returns pass flag and the worst margins
Outcome localization_chain(SuiteContext& ctx, const std::vector<IntervalSpec>& intervals, bool swap) {
    bool ok = true;
    int states = 0;
    double worst_agree = 0.0;
    std::string failed;
    for (const auto& I : intervals) {
        const LocalBatch lb = evaluate_local_states(ctx, I.a, I.b, local_fixtures(I.a, I.b));
        if (!lb.errors.empty() || lb.spectral.size() != 20) {
            ok = false;
            failed += " state-errors";
        }
        states += static_cast<int>(lb.spectral.size());
        const double lo = swap ? I.b : I.a, hi = swap ? I.a : I.b;
        for (const auto* backend : {"spectral", "grid"}) {
            const auto& e = std::string(backend) == "spectral" ? lb.spectral : lb.grid;
            const CheckReport r[] = {check_D_positive(e, kDTol, backend), check_HC_chain(e, lo, hi, 0.0, backend),
                                     check_Ct_chain(e, lo, hi, 0.0, backend), check_T_bounds(e, lo, hi, kTTol, backend)};
            for (const auto& x : r)
                if (!x.passed()) {
                    ok = false;
                    failed += " " + x.name + "/" + backend + "[" + std::to_string(I.a).substr(0, 4) + "]";
                }
        }
        const CheckReport agree = check_backend_T(lb.spectral, lb.grid, kBackendTol);
        worst_agree = std::max(worst_agree, agree.residual);
        if (!agree.passed()) {
            ok = false;
            failed += " backend_T";
        }
    }
    std::ostringstream d;
    d << states << " states x 2 backends, backend dT " << sci(worst_agree);
    if (!failed.empty()) d << ", failed:" << failed.substr(0, 120);
    return {ok, d.str()};
}

}  // namespace

int main() {
    RunConfig cfg;
    cfg.rep = {1.0, 1.0, kM};
    SuiteContext ctx(cfg);

    run(1, "lowest weights", 30.0, [&] {
        double worst = 0.0;
        bool ok = true;
        for (double k : {1.0, 1.5, 2.0}) {
            const CheckReport r = check_lowest_weights(build_generators({k, 1.0, kM}), kLowestWeightTol);
            worst = std::max(worst, r.residual);
            ok = ok && r.passed();
        }
        return Outcome{ok, "max |lambda_min - target| " + sci(worst) + " (k = 1, 1.5, 2; plain and tilde)"};
    });

    run(2, "commutator residuals", 60.0, [&] {
        const CheckReport s = check_commutators(ctx.plain(cfg.rep), kInterior, kSpectralCommTol);
        const CheckReport t = check_commutators(build_tilde_native(cfg.rep), kInterior, kSpectralCommTol);
        const CheckReport g = check_commutators_grid(build_grid_ops(cfg.grid, 1.0), kGridCommTol);
        const CheckReport gt = check_commutators_grid(build_grid_tilde_ops(cfg.grid, 1.0), kGridCommTol);
        return Outcome{s.passed() && t.passed() && g.passed() && gt.passed(),
                       "spectral " + sci(s.residual) + ", tilde " + sci(t.residual) + ", grid " + sci(g.residual) +
                           ", grid tilde " + sci(gt.residual)};
    });

    run(3, "localization chain", 180.0, [&] { return localization_chain(ctx, kIntervals, false); });

    run(4, "covariance transport", 30.0, [&] {
        const MoebiusMap g = dilation(2.0);
        const BasisSpec bs = basis_for(cfg, 4.0, 8.0);
        auto sc = ctx.spectral(bs);
        std::vector<Expectations> moved;
        for (const BumpSpec& s : local_fixtures(1.0, 2.0)) {
            const Wavefunction w = pushforward(g, bump_function(s));
            const XSamples xs = sample(w, 0.0, s.extent * 8.0 / (s.samples - 1), s.samples);
            moved.push_back(expectations(*sc, positive_frequency(xs, bs).coeffs));
        }
        const CheckReport r = check_T_bounds(moved, 4.0, 8.0, kCovarianceTol, "spectral", "covariance");
        return Outcome{r.passed(), "<T> in [" + sci(r.values["min_T"].get<double>()) + ", " +
                                       sci(r.values["max_T"].get<double>()) + "] vs [log 4, log 8]"};
    });

    run(5, "Weyl and flow identities", 60.0, [&] {
        auto sc = ctx.spectral(cfg.rep);
        const LogPair L = build_Th_Tc(sc->plain);
        const std::vector<double> ts{0.1, 0.3}, as{0.2, 0.5};
        const CheckReport wh = check_weyl("T_h,D", sc->plain, L.Th, -1, ts, as, kFlowInterior, kWeylTol);
        const CheckReport wt = check_weyl("T,D", sc->plain, sc->T, +1, ts, as, kFlowInterior, kWeylTol);
        const CheckReport pi =
            check_positive_inclusions(sc->plain, 0.05, 0.3, kFlowInterior, kInclusionTol, kJTol);
        const CheckReport j = check_J_relations(sc->plain, kJTol);
        return Outcome{wh.passed() && wt.passed() && pi.passed() && j.passed(),
                       "weyl T_h " + sci(wh.residual) + ", weyl T " + sci(wt.residual) + ", inclusions " +
                           sci(pi.residual) + ", J " + sci(j.residual)};
    });

    run(6, "F(alpha) profile", 30.0, [&] {
        auto fx = local_fixtures(1.0, 2.0);
        fx.resize(5);
        auto sc = ctx.spectral(basis_for(cfg, 1.0, 2.0));
        bool ok = true;
        double worst_m1 = -1.0, worst_d2 = 1.0;
        for (const BumpSpec& s : fx) {
            const StateVector v = positive_frequency(make_bump(s), basis_for(cfg, 1.0, 2.0));
            const FProfile f = f_alpha_profile(sc->two_Ct, v.coeffs, 1.0, 21);
            const CheckReport r = check_F_alpha(f, kFTol);
            ok = ok && r.passed();
            worst_m1 = std::max(worst_m1, r.values["F_minus1"].get<double>());
            worst_d2 = std::min(worst_d2, r.values["min_second_difference"].get<double>());
        }
        return Outcome{ok, "5 fixtures, F(0) = 1, max F(-1) " + sci(worst_m1) + ", min second difference " +
                               sci(worst_d2)};
    });

    run(7, "convergence trends", 120.0, [&] {
        BumpSpec s = local_fixtures(1.0, 2.0).front();
        s.samples = 8192;
        std::vector<double> r;
        const std::vector<int> Ms{64, 128, 256, 512};
        for (int M : Ms) {
            TransformOptions opt;
            opt.max_loss = 1.0;
            r.push_back(weak_S_residual(positive_frequency(make_bump(s), BasisSpec{1.0, 1.0, M}, opt)));
        }
        bool monotone = true;
        for (size_t i = 1; i < r.size(); ++i) monotone = monotone && r[i] <= r[i - 1];
        const auto orders = grid_convergence_orders(40.0, 1.0, {511, 1023, 2047, 4095}, 5);
        double worst = 0.0;
        for (double o : orders) worst = std::max(worst, std::abs(o - 2.0));
        std::string rs;
        for (double x : r) rs += sci(x) + " ";
        return Outcome{monotone && worst <= kOrderTol,
                       "r(M) = " + rs + (monotone ? "non-increasing" : "NOT monotone") + ", grid order 2 +- " + sci(worst)};
    });

    run(8, "mutation sensitivity", 120.0, [&] {
        // tamper with a stored artifact: C -> 2C
        const auto path = std::filesystem::temp_directory_path() / "modloc_acceptance_tampered.mlr";
        Container c = read_container([&] {
            write_representation(path.string(), ctx.plain(cfg.rep), to_json(cfg));
            return path.string();
        }());
        for (auto& [name, m] : c.blocks)
            if (name == "C") m *= 2.0;
        write_container(path.string(), c);
        auto tampered = std::make_shared<const GeneratorSet>(read_representation(path.string()));
        std::filesystem::remove(path);

        const bool c1_fails = !check_lowest_weights(*tampered, kLowestWeightTol).passed();
        SuiteContext bad(cfg, tampered);
        // [1, 2] is the interval whose adapted basis coincides with the artifact
        const bool c3_fails = !localization_chain(bad, {{1.0, 2.0}}, false).pass;
        const bool swap_fails = !localization_chain(ctx, {{1.0, 2.0}}, true).pass;
        return Outcome{c1_fails && c3_fails && swap_fails,
                       std::string("tampered artifact: criterion 1 ") + (c1_fails ? "fails" : "PASSES") +
                           ", criterion 3 " + (c3_fails ? "fails" : "PASSES") + "; swapped bounds: criterion 3 " +
                           (swap_fails ? "fails" : "PASSES")};
    });

    std::printf("%s: %d criteria failed\n", failures ? "ACCEPTANCE FAILED" : "ACCEPTANCE PASSED", failures);
    return failures ? 1 : 0;
}
