#include <gtest/gtest.h>

#include "modloc/grid_oracle.hpp"

using namespace modloc;

namespace {

const cplx I1(0.0, 1.0);

CVec bump_on(const RVec& E, double a, double b) {
    CVec v = CVec::Zero(E.size());
    for (Eigen::Index j = 0; j < E.size(); ++j) {
        const double u = (2.0 * E(j) - a - b) / (b - a);
        if (std::abs(u) < 1.0) v(j) = std::exp(-1.0 / (1.0 - u * u));
    }
    return v;
}

// exp(-itD) through the real symmetric matrix diag(i^j)^* D diag(i^j)
CVec exp_minus_itD(const Tridiag& D, const CVec& v, double t) {
    const Eigen::Index n = D.size();
    CVec phase(n);
    for (Eigen::Index j = 0; j < n; ++j) phase(j) = std::pow(I1, static_cast<int>(j % 4));
    RVec off(n - 1);
    for (Eigen::Index j = 0; j + 1 < n; ++j) {
        const cplx r = I1 * D.upper(j);
        EXPECT_NEAR(r.imag(), 0.0, 1e-12);
        off(j) = r.real();
    }
    const TridiagEig e = eigh_tridiagonal(D.diag, off, true);
    const CVec w = phase.conjugate().cwiseProduct(v);
    CVec c = e.vectors.transpose().cast<cplx>() * w;
    for (Eigen::Index i = 0; i < n; ++i) c(i) *= std::exp(-I1 * t * e.values(i));
    return phase.cwiseProduct(e.vectors.cast<cplx>() * c);
}

}  // namespace

TEST(GridOracle, NodesAndSpacing) {
    const GridSpec g{99, 10.0};
    EXPECT_DOUBLE_EQ(g.spacing(), 0.1);
    EXPECT_NEAR(g.nodes()(0), 0.1, 1e-15);
    EXPECT_NEAR(g.nodes()(98), 9.9, 1e-12);
    EXPECT_THROW((GridSpec{4, 1.0}.validate()), InvalidArgument);
    EXPECT_THROW((GridSpec{64, -1.0}.validate()), InvalidArgument);
}

TEST(GridOracle, DirichletSpectrum) {
    // k = 1 removes the inverse-square term: 2Ct is the Dirichlet second difference
    const GridSpec g{1023, 10.0};
    const GridOps t = build_grid_tilde_ops(g, 1.0);
    const RVec ev = eigh_tridiagonal(2.0 * t.C.diag, 2.0 * t.C.upper.real(), false).values;
    const double h = g.spacing();
    for (int n = 1; n <= 10; ++n) {
        const double discrete = 4.0 / (h * h) * std::pow(std::sin(n * std::numbers::pi * h / (2.0 * g.E_max)), 2);
        const double continuum = std::pow(n * std::numbers::pi / g.E_max, 2);
        EXPECT_NEAR(ev(n - 1), discrete, 1e-9 * discrete);
        EXPECT_NEAR(ev(n - 1), continuum, 1e-4 * continuum);
    }
}

TEST(GridOracle, OperatorsAreHermitianAndDenseMatches) {
    const GridOps g = build_grid_ops({64, 5.0}, 1.5);
    for (const Tridiag* A : {&g.H, &g.D, &g.C}) {
        const CMat M = A->dense();
        EXPECT_LT(hermiticity_defect(M), 1e-14);
        CVec v = CVec::LinSpaced(64, 0.0, 1.0);
        EXPECT_LT((M * v - A->apply(v)).norm(), 1e-12);
    }
}

TEST(GridOracle, CommutatorsOnSmoothProbes) {
    const GridSpec grid{4096, 40.0};
    for (bool tilde : {false, true}) {
        const GridOps g = tilde ? build_grid_tilde_ops(grid, 1.0) : build_grid_ops(grid, 1.0);
        for (auto [a, b] : {std::pair{2.0, 12.0}, std::pair{5.0, 20.0}, std::pair{10.0, 30.0}}) {
            const CVec v = bump_on(g.E, a, b);
            const CVec Hv = g.H.apply(v), Dv = g.D.apply(v), Cv = g.C.apply(v);
            EXPECT_LT((g.H.apply(Dv) - g.D.apply(Hv) - I1 * Hv).norm() / Hv.norm(), 1e-3);
            EXPECT_LT((g.C.apply(Dv) - g.D.apply(Cv) + I1 * Cv).norm() / Cv.norm(), 1e-3);
            EXPECT_LT((g.H.apply(Cv) - g.C.apply(Hv) - 2.0 * I1 * Dv).norm() / Dv.norm(), 1e-3);
        }
    }
}

TEST(GridOracle, DilationMatchesDiscreteFlow) {
    const GridSpec grid{4096, 40.0};
    const GridOps g = build_grid_ops(grid, 1.0);
    const CVec v = bump_on(g.E, 4.0, 12.0);
    for (double t : {0.2, -0.3}) {
        const CVec flow = exp_minus_itD(g.D, v, t);
        const GridState moved = grid_dilation({grid, v}, t);
        EXPECT_LT((flow - moved.samples).norm() / v.norm(), 1e-3) << t;
        // the other sign is far off
        const GridState wrong = grid_dilation({grid, v}, -t);
        EXPECT_GT((flow - wrong.samples).norm() / v.norm(), 0.1) << t;
    }
}

TEST(GridOracle, DilationPreservesNorm) {
    const GridSpec grid{2048, 40.0};
    const CVec v = bump_on(grid.nodes(), 3.0, 9.0);
    const GridState s{grid, v};
    for (double t : {-0.5, 0.4, 1.0}) EXPECT_NEAR(grid_dilation(s, t).norm2() / s.norm2(), 1.0, 1e-6) << t;
    EXPECT_THROW(grid_dilation(s, 2.0), SupportEscapesGrid);
}

TEST(GridOracle, SecondOrderConvergence) {
    const double E_max = 20.0, k = 1.5;
    std::vector<RVec> ev;
    for (int N : {255, 511, 1023, 2047}) {
        const GridOps t = build_grid_tilde_ops({N, E_max}, k);
        ev.push_back(eigh_tridiagonal(t.C.diag, t.C.upper.real(), false).values.head(4));
    }
    for (int j = 0; j < 4; ++j) {
        const double order = std::log2(std::abs(ev[1](j) - ev[2](j)) / std::abs(ev[2](j) - ev[3](j)));
        EXPECT_NEAR(order, 2.0, 0.1) << j;
    }
}

TEST(GridOracle, TOnEigenvectors) {
    const GridSpec grid{256, 10.0};
    const GridT T(grid, 1.0);
    const GridOps t = build_grid_tilde_ops(grid, 1.0);
    const TridiagEig e = eigh_tridiagonal(2.0 * t.C.diag, 2.0 * t.C.upper.real(), true);
    for (int n : {0, 5, 40}) {
        const CVec v = e.vectors.col(n).cast<cplx>();
        EXPECT_NEAR(T.expectation(v), 0.5 * std::log(e.values(n)), 1e-10);
        EXPECT_NEAR(T.power_expectation(v, -1.0), 1.0 / e.values(n), 1e-10 / e.values(n));
        EXPECT_LT((T.apply(v) - 0.5 * std::log(e.values(n)) * v).norm(), 1e-10);
    }
    EXPECT_NEAR(T.spectrum()(0), 0.5 * std::log(e.values(0)), 1e-12);
}
