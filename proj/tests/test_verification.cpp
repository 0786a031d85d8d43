#include <gtest/gtest.h>

#include "modloc/verification.hpp"

using namespace modloc;

namespace {

Expectations ex(double H, double C, double D, double Ct, double T) { return {1.0, H, C, D, Ct, T}; }

}  // namespace

TEST(Verification, TolerancePresets) {
    const auto s = ToleranceProfile::preset("strict");
    const auto d = ToleranceProfile::preset("default");
    const auto c = ToleranceProfile::preset("coarse");
    EXPECT_EQ(s.tol.size(), d.tol.size());
    EXPECT_LT(s.at("commutators.spectral"), d.at("commutators.spectral"));
    EXPECT_LT(d.at("weyl"), c.at("weyl"));
    EXPECT_EQ(d.at("commutators.spectral"), 1e-6);
    EXPECT_EQ(d.at("commutators.grid"), 1e-3);
    EXPECT_EQ(s.at("HC_chain"), 0.0);
    EXPECT_THROW(ToleranceProfile::preset("loose"), ConfigError);
    EXPECT_THROW(d.at("no_such_check"), ConfigError);
}

TEST(Verification, ChainChecksOnSyntheticValues) {
    // a = 1, b = 2: 1 <= C/H <= 4, 1/2 < Ct < 2, 0 <= T <= log 2
    const std::vector<Expectations> good{ex(1.0, 2.0, 0.3, 1.0, 0.3), ex(2.0, 7.0, 1.0, 1.5, 0.6)};
    EXPECT_TRUE(check_HC_chain(good, 1.0, 2.0, 0.0, "x").passed());
    EXPECT_TRUE(check_Ct_chain(good, 1.0, 2.0, 0.0, "x").passed());
    EXPECT_TRUE(check_T_bounds(good, 1.0, 2.0, 1e-6, "x").passed());
    EXPECT_TRUE(check_D_positive(good, 1e-8, "x").passed());
    // swapped bounds
    EXPECT_FALSE(check_HC_chain(good, 2.0, 1.0, 0.0, "x").passed());
    EXPECT_FALSE(check_T_bounds(good, 2.0, 1.0, 1e-6, "x").passed());
    // boundary values carry no strict slack
    EXPECT_FALSE(check_HC_chain({ex(1.0, 4.0, 0.1, 1.0, 0.2)}, 1.0, 2.0, 0.0, "x").passed());
    EXPECT_FALSE(check_Ct_chain({ex(1.0, 2.0, 0.1, 0.5, 0.2)}, 1.0, 2.0, 0.0, "x").passed());
    EXPECT_FALSE(check_D_positive({ex(1.0, 2.0, -1e-6, 1.0, 0.2)}, 1e-8, "x").passed());
    // T within tolerance of the edge passes, beyond it fails
    EXPECT_TRUE(check_T_bounds({ex(1, 2, 0, 1, std::log(2.0) + 5e-7)}, 1.0, 2.0, 1e-6, "x").passed());
    EXPECT_FALSE(check_T_bounds({ex(1, 2, 0, 1, std::log(2.0) + 5e-6)}, 1.0, 2.0, 1e-6, "x").passed());
    // empty input is never a pass
    EXPECT_FALSE(check_T_bounds({}, 1.0, 2.0, 1e-6, "x").passed());
}

TEST(Verification, BackendAgreement) {
    const std::vector<Expectations> a{ex(1, 2, 0, 1, 0.40)}, b{ex(1, 2, 0, 1, 0.4002)}, c{ex(1, 2, 0, 1, 0.5)};
    EXPECT_TRUE(check_backend_T(a, b, 1e-3).passed());
    EXPECT_FALSE(check_backend_T(a, c, 1e-3).passed());
    EXPECT_THROW(check_backend_T(a, {}, 1e-3), InvalidArgument);
}

TEST(Verification, FAlphaProfile) {
    // 2Ct with spectrum {2, 3, 5}, a = 1: F(0) = 1, F(-1) = <1/lambda> <= 1, convex
    HermitianEig e{RVec(3), CMat::Identity(3, 3)};
    e.values << 2.0, 3.0, 5.0;
    CVec psi(3);
    psi << cplx(0.3, 0.1), 0.5, cplx(0.0, -0.2);
    const FProfile f = f_alpha_profile(e, psi, 1.0, 21);
    ASSERT_EQ(f.F.size(), 21u);
    EXPECT_EQ(f.alpha[10], 0.0);
    EXPECT_EQ(f.F[10], 1.0);
    const RVec w = psi.cwiseAbs2() / psi.squaredNorm();
    EXPECT_NEAR(f.F.front(), w(0) / 2 + w(1) / 3 + w(2) / 5, 1e-15);
    EXPECT_TRUE(check_F_alpha(f, 1e-8).passed());
    // a larger than the spectrum allows breaks F(-1) <= 1
    EXPECT_FALSE(check_F_alpha(f_alpha_profile(e, psi, 3.0, 21), 1e-8).passed());
}

TEST(Verification, STrendLogic) {
    EXPECT_TRUE(check_S_invariance({64, 128}, {1e-3, 1e-5}, 1e-3).passed());
    EXPECT_FALSE(check_S_invariance({64, 128}, {1e-5, 1e-3}, 1e-3).passed());
    EXPECT_FALSE(check_S_invariance({64, 128}, {1e-1, 1e-2}, 1e-3).passed());
}

TEST(Verification, LowestWeightMutationIsDetected) {
    GeneratorSet g = build_generators({1.0, 1.0, 64});
    EXPECT_TRUE(check_lowest_weights(g, 1e-6).passed());
    g.C *= 2.0;
    const CheckReport r = check_lowest_weights(g, 1e-6);
    EXPECT_FALSE(r.passed());
    EXPECT_GT(r.residual, 0.1);
}

TEST(Verification, SpectralChecksPassOnFreshBuild) {
    const GeneratorSet g = build_generators({1.0, 1.0, 128});
    EXPECT_TRUE(check_commutators(g, 0.8, 1e-6).passed());
    EXPECT_TRUE(check_J_relations(g, 1e-10).passed());
    EXPECT_TRUE(check_rotation_swap(g, 0.8, 1e-4).passed());
    EXPECT_TRUE(check_prop31(g, 5, 50, 0.5, 1e-8).passed());
    EXPECT_TRUE(check_D_counterexample(g, 5, 100).passed());
    EXPECT_TRUE(check_positive_inclusions(g, 0.05, 0.3, 1.0 / 16, 1e-3, 1e-10).passed());
    // k = 1/2 makes the inverse-H bound vacuous
    EXPECT_EQ(check_prop31(build_generators({0.5, 1.0, 32}), 5, 10, 0.5, 1e-8).status, Status::Inconclusive);
}

TEST(Verification, WeylPhaseSignMatters) {
    const GeneratorSet g = build_generators({1.0, 1.0, 128});
    const LogPair L = build_Th_Tc(g);
    const std::vector<double> ts{0.1}, as{0.2};
    EXPECT_TRUE(check_weyl("T_h,D", g, L.Th, -1, ts, as, 1.0 / 16, 1e-3).passed());
    EXPECT_FALSE(check_weyl("T_h,D", g, L.Th, +1, ts, as, 1.0 / 16, 1e-3).passed());
}

TEST(Verification, GridCommutatorsAndProbes) {
    const GridSpec grid{4096, 40.0};
    for (const CVec& v : grid_probes(grid)) {
        EXPECT_EQ(v(0), cplx(0.0));
        EXPECT_EQ(v(grid.N - 1), cplx(0.0));
        EXPECT_GT(v.norm(), 0.0);
    }
    EXPECT_TRUE(check_commutators_grid(build_grid_ops(grid, 1.0), 1e-3).passed());
    EXPECT_TRUE(check_commutators_grid(build_grid_tilde_ops(grid, 1.0), 1e-3).passed());
}

TEST(Verification, GridOrderNearTwo) {
    EXPECT_TRUE(check_grid_order(40.0, 1.0, {511, 1023, 2047, 4095}, 3, 0.2).passed());
}

TEST(Verification, WeakSResidualSeesTheSign) {
    BumpSpec p;
    const StateVector v = positive_frequency(make_bump(p), BasisSpec{1.0, 1.0, 256});
    EXPECT_LT(weak_S_residual(v), 1e-5);
    StateVector rotated = v;
    rotated.coeffs *= cplx(0.0, 1.0);
    EXPECT_GT(weak_S_residual(rotated), 1e-4);
    EXPECT_THROW(strong_S_residual(build_generators({1.0, 1.0, 256}), v.coeffs, 1e12), OverflowAbort);
}

TEST(Verification, SuiteScopeFiltering) {
    RunConfig c;
    c.rep.M = 64;
    c.grid.N = 512;
    const auto tp = ToleranceProfile::preset("default");
    EXPECT_TRUE(run_suite(c, tp, {}).empty());
    const auto reps = run_suite(c, tp, {"commutators"});
    ASSERT_EQ(reps.size(), 4u);
    for (const auto& r : reps) EXPECT_EQ(r.name, "commutators");
    EXPECT_THROW(run_suite(c, tp, {"everything"}), ConfigError);
}

TEST(Verification, SuiteUsesPreloadedArtifact) {
    RunConfig c;
    c.rep.M = 96;
    c.k_values = {1.0};
    const auto tp = ToleranceProfile::preset("default");
    auto g = std::make_shared<GeneratorSet>(build_generators(c.rep));
    EXPECT_TRUE(aggregate(run_suite(c, tp, {"lowest_weights"}, g)).ok());
    g->C *= 2.0;
    const auto reps = run_suite(c, tp, {"lowest_weights"}, g);
    EXPECT_FALSE(aggregate(reps).ok());
}

TEST(Verification, ReportDocument) {
    RunConfig c;
    CheckReport a;
    a.name = "x";
    a.status = Status::Pass;
    CheckReport b = error_report("y", "boom");
    CheckReport i;
    i.name = "z";
    i.status = Status::Inconclusive;
    const auto doc = report_document(c, {a, i});
    EXPECT_TRUE(doc["aggregate"]["pass"].get<bool>());
    EXPECT_EQ(doc["format_version"], kFormatVersion);
    EXPECT_EQ(config_from_json(doc["config"]), c);
    EXPECT_FALSE(report_document(c, {a, b})["aggregate"]["pass"].get<bool>());
    EXPECT_EQ(doc["reports"][1]["status"], "inconclusive");
}
