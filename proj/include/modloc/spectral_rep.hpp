#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "modloc/errors.hpp"
#include "modloc/laguerre.hpp"
#include "modloc/linalg.hpp"

namespace modloc {

enum class Variant { Plain, Tilde };

inline std::string to_string(Variant v) { return v == Variant::Plain ? "plain" : "tilde"; }
inline std::string to_string(BasisKind b) { return b == BasisKind::Z ? "Z" : "Ztilde"; }

struct GeneratorSet {
    CMat H, D, C;
    BasisSpec spec;
    Variant variant = Variant::Plain;
    BasisKind basis = BasisKind::Z;
    int quad_order = 0;
    double asymmetry = 0.0;  // before Hermitization

    Eigen::Index dim() const { return H.rows(); }
    CMat rotation_generator() const { return (H + C) / 2.0; }
};

inline int default_quad_order(const BasisSpec& s) {
    return 2 * s.M + static_cast<int>(std::ceil(2.0 * s.k)) + 4;
}

namespace detail {

struct SampledBasis {
    RVec x;
    RMat P;  // sqrt(w) * p_n(x)
    RMat r;  // sqrt(w) * (p_n'(x) - p_n(x)/2)
};

// Orthonormal Laguerre functions of parameter alpha sampled on the rule for weight x^{rule_alpha} e^{-x}.
inline SampledBasis sample_basis(double alpha, double rule_alpha, int M, int order) {
    const QuadratureRule q = gauss_laguerre(order, rule_alpha);
    SampledBasis s;
    s.x = q.nodes;
    const RVec half_lw = 0.5 * q.log_weights;
    s.P = orthonormal_laguerre_table(q.nodes, alpha, M, half_lw);
    const RMat up = orthonormal_laguerre_table(q.nodes, alpha + 1.0, M, half_lw);
    s.r = -0.5 * s.P;
    for (int n = 1; n < M; ++n) s.r.row(n) -= std::sqrt(static_cast<double>(n)) * up.row(n - 1);
    return s;
}

inline RMat ones(int M) { return RMat::Ones(M, M); }

}  // namespace detail

inline GeneratorSet build_generators(const BasisSpec& spec, int order = 0) {
    spec.validate();
    const double k = spec.k, beta = spec.beta;
    const int M = spec.M;
    if (order == 0) order = default_quad_order(spec);
    if (order < 2 * M + 2 * k + 4 - 1e-12)
        throw QuadratureUnderResolved("quadrature order below 2M + 2k + 4");
    const double alpha = 2.0 * k - 1.0;
    const bool half = std::abs(k - 0.5) < 1e-14;

    const auto s = detail::sample_basis(alpha, alpha, M, order);
    const RMat xP = s.P * s.x.asDiagonal();
    const RMat H = xP * s.P.transpose() / (2.0 * beta);
    const RMat A = s.P * (k * s.P + s.r * s.x.asDiagonal()).transpose();
    RMat Cm = k * (s.P * s.r.transpose());
    Cm = Cm + Cm.transpose().eval();
    Cm += s.r * s.x.asDiagonal() * s.r.transpose();
    if (!half) {
        const auto lower = detail::sample_basis(alpha, alpha - 1.0, M, order);
        Cm += k * (2.0 * k - 1.0) * lower.P * lower.P.transpose();
    }
    RMat C = 2.0 * beta * Cm;
    // At k = 1/2 the basis does not vanish at E = 0 and the form picks up a boundary contribution.
    if (half) C += beta * detail::ones(M);

    GeneratorSet g;
    g.spec = spec;
    g.quad_order = order;
    g.asymmetry = std::max({(A + A.transpose()).cwiseAbs().maxCoeff(), (C - C.transpose()).cwiseAbs().maxCoeff(),
                            (H - H.transpose()).cwiseAbs().maxCoeff()});
    if (g.asymmetry > 1e-8)
        throw QuadratureUnderResolved("pre-symmetrization asymmetry " + std::to_string(g.asymmetry));
    g.H = hermitize(H.cast<cplx>());
    g.D = cplx(0.0, -0.5) * (A - A.transpose()).cast<cplx>();
    g.C = hermitize(C.cast<cplx>());
    return g;
}

// The second triple assembled directly from its differential expressions
// E^2/2, D/2 and (-d^2/dE^2 + (k^2-k)/E^2)/2 in the Ztilde basis of lowest weight k/2 + 1/4.
inline GeneratorSet build_tilde_native(const BasisSpec& spec, int order = 0) {
    spec.validate();
    const double k = spec.k, beta = spec.beta;
    const int M = spec.M;
    const double kappa = 0.5 * k + 0.25;
    BasisSpec tspec{kappa, beta, M};
    if (order == 0) order = default_quad_order(spec);
    const double alpha = 2.0 * kappa - 1.0;
    const bool half = std::abs(k - 0.5) < 1e-14;

    const auto s = detail::sample_basis(alpha, alpha, M, order);
    const RMat H = s.P * s.x.asDiagonal() * s.P.transpose() / (4.0 * beta);
    const RMat A = s.P * (kappa * s.P + s.r * s.x.asDiagonal()).transpose();
    RMat Cm = 0.5 * k * (s.P * s.r.transpose());
    Cm = Cm + Cm.transpose().eval();
    Cm += s.r * s.x.asDiagonal() * s.r.transpose();
    if (!half) {
        const auto lower = detail::sample_basis(alpha, alpha - 1.0, M, order);
        Cm += 0.25 * k * (2.0 * k - 1.0) * lower.P * lower.P.transpose();
    }
    RMat C = 4.0 * beta * Cm;
    if (half) C += beta * detail::ones(M);

    GeneratorSet g;
    g.spec = tspec;
    g.variant = Variant::Tilde;
    g.basis = BasisKind::Ztilde;
    g.quad_order = order;
    g.asymmetry = std::max({(A + A.transpose()).cwiseAbs().maxCoeff(), (C - C.transpose()).cwiseAbs().maxCoeff(),
                            (H - H.transpose()).cwiseAbs().maxCoeff()});
    if (g.asymmetry > 1e-8)
        throw QuadratureUnderResolved("pre-symmetrization asymmetry " + std::to_string(g.asymmetry));
    g.H = hermitize(H.cast<cplx>());
    g.D = cplx(0.0, -0.5) * (A - A.transpose()).cast<cplx>();
    g.C = hermitize(C.cast<cplx>());
    return g;
}

struct MatrixFunction {
    enum class Kind { Sqrt, InvSqrt, Log, ExpScaled, Power } kind;
    double param = 0.0;

    static MatrixFunction sqrt() { return {Kind::Sqrt}; }
    static MatrixFunction inv_sqrt() { return {Kind::InvSqrt}; }
    static MatrixFunction log() { return {Kind::Log}; }
    static MatrixFunction exp_scaled(double s) { return {Kind::ExpScaled, s}; }
    static MatrixFunction power(double a) { return {Kind::Power, a}; }
};

// eps_cut is relative to the largest eigenvalue magnitude.
inline CMat matrix_function(const HermitianEig& e, MatrixFunction f, double eps_cut = 1e-10) {
    const double top = e.values.size() ? e.values.cwiseAbs().maxCoeff() : 0.0;
    const double cut = eps_cut * top;
    const double lo = e.values.size() ? e.values.minCoeff() : 0.0;
    using K = MatrixFunction::Kind;
    const bool needs_positive = f.kind == K::InvSqrt || f.kind == K::Log || (f.kind == K::Power && f.param < 0.0);
    const bool needs_nonneg = f.kind == K::Sqrt || (f.kind == K::Power && f.param > 0.0);
    if (needs_positive && !(lo > cut))
        throw SpectrumOutOfDomain("smallest eigenvalue " + std::to_string(lo) + " is not above the cut " +
                                  std::to_string(cut));
    if (needs_nonneg && lo < -cut)
        throw SpectrumOutOfDomain("negative eigenvalue " + std::to_string(lo));
    return from_eig(e, [&](double w) -> cplx {
        switch (f.kind) {
            case K::Sqrt: return std::sqrt(std::max(w, 0.0));
            case K::InvSqrt: return 1.0 / std::sqrt(w);
            case K::Log: return std::log(w);
            case K::ExpScaled: return std::exp(f.param * w);
            case K::Power: return f.param == 0.0 ? 1.0 : std::pow(std::max(w, 0.0), f.param);
        }
        return 0.0;
    });
}

inline CMat matrix_function(const CMat& A, MatrixFunction f, double eps_cut = 1e-10) {
    return matrix_function(eigh(A), f, eps_cut);
}

inline GeneratorSet build_tilde_generators(const GeneratorSet& g, double singular_cut = 1e-12) {
    if (g.variant != Variant::Plain) throw InvalidArgument("tilde triple is built from the plain triple");
    const HermitianEig eh = eigh(g.H);
    if (!(eh.values.minCoeff() > singular_cut))
        throw SingularH("smallest eigenvalue of H is " + std::to_string(eh.values.minCoeff()));
    const CMat Hm = from_eig(eh, [](double w) -> cplx { return 1.0 / std::sqrt(w); });
    GeneratorSet t = g;
    t.variant = Variant::Tilde;
    t.H = hermitize(g.H * g.H / 2.0);
    t.D = g.D / 2.0;
    t.C = hermitize(Hm * g.C * Hm / 2.0);
    return t;
}

// T = log(2 Ct) / 2
inline CMat build_T(const GeneratorSet& tilde) {
    if (tilde.variant != Variant::Tilde) throw InvalidArgument("T is built from the tilde triple");
    return 0.5 * matrix_function(CMat(2.0 * tilde.C), MatrixFunction::log());
}

struct LogPair {
    CMat Th;
    CMat Tc;
};

inline LogPair build_Th_Tc(const GeneratorSet& g) {
    if (g.variant != Variant::Plain) throw InvalidArgument("T_h and T_c are built from the plain triple");
    return {matrix_function(g.H, MatrixFunction::log()), matrix_function(g.C, MatrixFunction::log())};
}

// s -> exp(i * sign * s * A) from one eigendecomposition.
class UnitaryFlow {
public:
    UnitaryFlow(const CMat& generator, int sign = +1) : eig_(eigh(generator)), sign_(sign) {
        if (sign != 1 && sign != -1) throw InvalidArgument("flow sign must be +1 or -1");
    }
    CMat at(double s) const {
        return from_eig(eig_, [&](double w) { return std::exp(cplx(0.0, sign_ * s * w)); });
    }
    CVec apply(double s, const CVec& v) const {
        CVec c = eig_.vectors.adjoint() * v;
        for (Eigen::Index i = 0; i < c.size(); ++i) c(i) *= std::exp(cplx(0.0, sign_ * s * eig_.values(i)));
        return eig_.vectors * c;
    }
    int sign() const { return sign_; }
    const HermitianEig& eig() const { return eig_; }

private:
    HermitianEig eig_;
    int sign_;
};

inline CMat unitary_flow(const CMat& A, double t, int sign = +1) { return UnitaryFlow(A, sign).at(t); }

// V(t) = Delta^{it/(2 pi)} = exp(-i t D)
inline UnitaryFlow modular_flow(const GeneratorSet& g) { return UnitaryFlow(g.D, -1); }

inline CVec conjugation_J(const CVec& v) { return v.conjugate(); }
inline CMat conjugate_by_J(const CMat& A) { return A.conjugate(); }

// Conjugation by exp(i a H): (H, D + aH, C + 2aD + a^2 H).
inline GeneratorSet translate_generators(const GeneratorSet& g, double a) {
    if (g.variant != Variant::Plain) throw InvalidArgument("translation acts on the plain triple");
    GeneratorSet t = g;
    t.D = g.D + a * g.H;
    t.C = g.C + 2.0 * a * g.D + a * a * g.H;
    return t;
}

inline double expect(const CMat& A, const CVec& v) { return (v.adjoint() * A * v)(0, 0).real(); }

}  // namespace modloc
