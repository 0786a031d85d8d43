#include <gtest/gtest.h>

#include <random>

#include "modloc/mobius.hpp"

using namespace modloc;

namespace {

MoebiusMap random_map(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (;;) {
        const double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
        const double det = a * d - b * c;
        if (det > 0.1) return {a, b, c, d};
        if (det < -0.1) return {b, a, d, c};  // swap columns flips the sign
    }
}

double raw_action(double a, double b, double c, double d, double x) { return (a * x + b) / (c * x + d); }

}  // namespace

TEST(Mobius, DeterminantIsNormalized) {
    const MoebiusMap g(2.0, 1.0, 1.0, 3.0);
    EXPECT_NEAR(g.det(), 1.0, 1e-15);
    EXPECT_THROW(MoebiusMap(1.0, 2.0, 2.0, 1.0), InvalidArgument);
}

TEST(Mobius, ActionMatchesFractionalLinearFormula) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ux(-5.0, 5.0);
    for (int i = 0; i < 200; ++i) {
        const MoebiusMap g = random_map(rng);
        const double x = ux(rng);
        const ExtReal y = act_point(g, x);
        ASSERT_FALSE(y.is_inf());
        EXPECT_NEAR(y.value(), raw_action(g.a(), g.b(), g.c(), g.d(), x), 1e-9 * std::max(1.0, std::abs(y.value())));
    }
}

TEST(Mobius, GroupLawOnRandomMaps) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ux(-4.0, 4.0);
    for (int i = 0; i < 1000; ++i) {
        const MoebiusMap g = random_map(rng), h = random_map(rng);
        const double x = ux(rng);
        const ExtReal hx = act_point(h, x);
        const ExtReal lhs = act_point(g * h, x);
        const ExtReal rhs = act_point(g, hx);
        ASSERT_TRUE(lhs.approx(rhs, 1e-8)) << lhs << " vs " << rhs;
        EXPECT_TRUE((g * g.inverse()).approx(identity_map(), 1e-12));
    }
}

TEST(Mobius, InfinityHandling) {
    const MoebiusMap g(1.0, 2.0, 1.0, 3.0);
    EXPECT_TRUE(act_point(g, ExtReal::infinity()).approx(ExtReal(1.0), 1e-15));
    EXPECT_TRUE(act_point(g, -3.0).is_inf());
    EXPECT_TRUE(act_point(translation(5.0), ExtReal::infinity()).is_inf());
    EXPECT_THROW(ExtReal::infinity().value(), InvalidArgument);
}

TEST(Mobius, IwasawaRoundTrip) {
    std::mt19937_64 rng(13);
    int done = 0;
    for (int i = 0; i < 1000; ++i) {
        const MoebiusMap g = random_map(rng);
        if (std::abs(g.d()) < 1e-3) continue;
        const IwasawaFactors f = iwasawa(g);
        EXPECT_GT(f.y, 0.0);
        EXPECT_TRUE(f.recompose().approx(g, 1e-9)) << f.x << " " << f.y << " " << f.z;
        ++done;
    }
    EXPECT_GT(done, 900);
}

TEST(Mobius, IwasawaFailsOnBoundary) {
    EXPECT_THROW(iwasawa(MoebiusMap(0.0, 1.0, -1.0, 0.0)), DecompositionFailure);
}

TEST(Mobius, MapFromStandardHitsEndpoints) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    for (int i = 0; i < 100; ++i) {
        double a = u(rng), b = u(rng);
        if (std::abs(a - b) < 1e-3) continue;
        const Interval I(a, b);
        const MoebiusMap g = map_from_standard(I);
        EXPECT_TRUE(act_point(g, 0.0).approx(I.lo, 1e-10));
        EXPECT_TRUE(act_point(g, ExtReal::infinity()).approx(I.hi, 1e-10));
        // interior goes to interior, orientation preserved
        const ExtReal y = act_point(g, 1.0);
        EXPECT_TRUE(y.is_inf() ? I.wraps() : I.contains(y.value()));
    }
    const Interval half_left(ExtReal::infinity(), 2.0);
    const MoebiusMap g = map_from_standard(half_left);
    EXPECT_TRUE(act_point(g, 0.0).is_inf());
    EXPECT_TRUE(act_point(g, ExtReal::infinity()).approx(ExtReal(2.0), 1e-12));
    EXPECT_TRUE(act_interval(map_from_standard(Interval(3.0, ExtReal::infinity())), standard_interval())
                    .approx(Interval(3.0, ExtReal::infinity()), 1e-12));
}

TEST(Mobius, DegenerateIntervalRejected) { EXPECT_THROW(Interval(1.0, 1.0), InvalidArgument); }

TEST(Mobius, RotationExamples) {
    // rotation by pi: x -> -1/x
    const MoebiusMap R = rotation(std::numbers::pi);
    EXPECT_NEAR(act_point(R, 2.0).value(), -0.5, 1e-15);
    EXPECT_TRUE(act_point(R, 0.0).is_inf());
    EXPECT_NEAR(act_point(R, ExtReal::infinity()).value(), 0.0, 1e-15);
    // full turn is -1, the identity as a map
    EXPECT_TRUE(rotation(2.0 * std::numbers::pi).approx(identity_map(), 1e-14));
    // conjugating translations by R(pi) gives special conformal maps
    for (double t : {-1.5, 0.3, 2.0})
        EXPECT_TRUE(conjugate_subgroup(R, Subgroup::Translation, t).approx(special_conformal(t), 1e-14));
    // R(pi) sends [0, inf] to [inf, 0]
    EXPECT_TRUE(act_interval(R, standard_interval()).approx(standard_interval().complement(), 1e-14));
}

TEST(Mobius, DilationFlowScalesTranslations) {
    for (double b : {-0.3, 0.1, 0.25})
        for (double t : {-1.0, 0.5, 2.0}) {
            const MoebiusMap L = dilation_flow(b);
            const double s = std::exp(2.0 * std::numbers::pi * b);
            EXPECT_TRUE((L * translation(t) * L.inverse()).approx(translation(s * t), 1e-12));
            EXPECT_TRUE((L * special_conformal(t) * L.inverse()).approx(special_conformal(t / s), 1e-12));
        }
    // dilations fix the standard interval and act as x -> y^2 x
    EXPECT_TRUE(act_interval(dilation(2.0), standard_interval()).approx(standard_interval(), 0.0));
    EXPECT_NEAR(act_point(dilation(2.0), 1.5).value(), 6.0, 1e-14);
}

TEST(Mobius, WrappedIntervals) {
    const Interval I(2.0, -1.0);
    EXPECT_TRUE(I.wraps());
    EXPECT_TRUE(I.contains(5.0));
    EXPECT_TRUE(I.contains(-7.0));
    EXPECT_FALSE(I.contains(0.0));
    const MoebiusMap g = map_from_standard(I);
    EXPECT_TRUE(act_interval(g, standard_interval()).approx(I, 1e-12));
}
