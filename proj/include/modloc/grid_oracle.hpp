#pragma once

#include <cmath>
#include <optional>

#include "modloc/errors.hpp"
#include "modloc/linalg.hpp"

namespace modloc {

struct GridSpec {
    int N = 4096;
    double E_max = 40.0;

    void validate() const {
        if (N < 16) throw InvalidArgument("grid needs at least 16 points");
        if (!(E_max > 0.0)) throw InvalidArgument("grid extent must be positive");
    }
    double spacing() const { return E_max / (N + 1); }
    RVec nodes() const {
        RVec E(N);
        const double h = spacing();
        for (int j = 0; j < N; ++j) E(j) = h * (j + 1);
        return E;
    }
    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

// Hermitian tridiagonal: real diagonal, upper entries u_j = A(j, j+1), lower entries conj(u_j).
struct Tridiag {
    RVec diag;
    CVec upper;

    Eigen::Index size() const { return diag.size(); }
    CVec apply(const CVec& v) const {
        const Eigen::Index n = size();
        CVec out = diag.cast<cplx>().cwiseProduct(v);
        out.head(n - 1) += upper.cwiseProduct(v.tail(n - 1));
        out.tail(n - 1) += upper.conjugate().cwiseProduct(v.head(n - 1));
        return out;
    }
    CMat dense() const {
        const Eigen::Index n = size();
        CMat A = CMat::Zero(n, n);
        for (Eigen::Index j = 0; j < n; ++j) A(j, j) = diag(j);
        for (Eigen::Index j = 0; j + 1 < n; ++j) {
            A(j, j + 1) = upper(j);
            A(j + 1, j) = std::conj(upper(j));
        }
        return A;
    }
    Tridiag scaled(double s) const { return {diag * s, upper * s}; }
};

struct GridOps {
    GridSpec grid;
    double k = 1.0;
    bool tilde = false;
    RVec E;
    Tridiag H, D, C;
};

namespace detail {

inline Tridiag grid_D(const RVec& E, double h) {
    const Eigen::Index n = E.size();
    Tridiag D{RVec::Zero(n), CVec(n - 1)};
    // -i sqrt(E) d/dE sqrt(E), centered difference
    for (Eigen::Index j = 0; j + 1 < n; ++j) D.upper(j) = cplx(0.0, -std::sqrt(E(j) * E(j + 1)) / (2.0 * h));
    return D;
}

}  // namespace detail

inline GridOps build_grid_ops(const GridSpec& grid, double k) {
    grid.validate();
    GridOps g;
    g.grid = grid;
    g.k = k;
    g.E = grid.nodes();
    const double h = grid.spacing();
    const Eigen::Index n = grid.N;
    g.H = {g.E, CVec::Zero(n - 1)};
    g.D = detail::grid_D(g.E, h);
    g.C.diag.resize(n);
    g.C.upper.resize(n - 1);
    for (Eigen::Index j = 0; j < n; ++j) g.C.diag(j) = 2.0 * g.E(j) / (h * h) + (k * k - k) / g.E(j);
    for (Eigen::Index j = 0; j + 1 < n; ++j) g.C.upper(j) = -std::sqrt(g.E(j) * g.E(j + 1)) / (h * h);
    return g;
}

// E^2/2, D/2, (-d^2/dE^2 + (k^2-k)/E^2)/2
inline GridOps build_grid_tilde_ops(const GridSpec& grid, double k) {
    grid.validate();
    GridOps g;
    g.grid = grid;
    g.k = k;
    g.tilde = true;
    g.E = grid.nodes();
    const double h = grid.spacing();
    const Eigen::Index n = grid.N;
    g.H = {0.5 * g.E.array().square().matrix(), CVec::Zero(n - 1)};
    g.D = detail::grid_D(g.E, h).scaled(0.5);
    g.C.diag.resize(n);
    for (Eigen::Index j = 0; j < n; ++j) g.C.diag(j) = 0.5 * (2.0 / (h * h) + (k * k - k) / (g.E(j) * g.E(j)));
    g.C.upper = CVec::Constant(n - 1, cplx(-0.5 / (h * h), 0.0));
    return g;
}

struct GridState {
    GridSpec grid;
    CVec samples;

    double norm2() const { return grid.spacing() * samples.squaredNorm(); }
};

// T = log(2 Ct)/2 on the grid, kept in eigen-coordinates of 2 Ct.
class GridT {
public:
    GridT(const GridSpec& grid, double k) : grid_(grid) {
        const GridOps t = build_grid_tilde_ops(grid, k);
        RVec d = 2.0 * t.C.diag;
        RVec e = 2.0 * t.C.upper.real();
        eig_ = eigh_tridiagonal(d, e, true);
        if (!(eig_.values(0) > 0.0))
            throw SpectrumOutOfDomain("grid 2Ct has non-positive eigenvalue " + std::to_string(eig_.values(0)));
    }
    RVec spectrum() const { return 0.5 * eig_.values.array().log().matrix(); }
    const RVec& spectrum_of_2Ct() const { return eig_.values; }

    // <psi, T psi> / <psi, psi>
    double expectation(const CVec& psi) const {
        const CVec c = to_eigen_coords(psi);
        double num = 0.0;
        for (Eigen::Index i = 0; i < c.size(); ++i) num += 0.5 * std::log(eig_.values(i)) * std::norm(c(i));
        return num / psi.squaredNorm();
    }
    // <psi, (2 Ct)^alpha psi> / <psi, psi>
    double power_expectation(const CVec& psi, double alpha) const {
        const CVec c = to_eigen_coords(psi);
        double num = 0.0;
        for (Eigen::Index i = 0; i < c.size(); ++i) num += std::pow(eig_.values(i), alpha) * std::norm(c(i));
        return num / psi.squaredNorm();
    }
    CVec apply(const CVec& psi) const {
        CVec c = to_eigen_coords(psi);
        for (Eigen::Index i = 0; i < c.size(); ++i) c(i) *= 0.5 * std::log(eig_.values(i));
        return from_eigen_coords(c);
    }
    const GridSpec& grid() const { return grid_; }

private:
    CVec to_eigen_coords(const CVec& psi) const {
        const RVec re = eig_.vectors.transpose() * psi.real();
        const RVec im = eig_.vectors.transpose() * psi.imag();
        CVec c(re.size());
        c.real() = re;
        c.imag() = im;
        return c;
    }
    CVec from_eigen_coords(const CVec& c) const {
        const RVec re = eig_.vectors * c.real();
        const RVec im = eig_.vectors * c.imag();
        CVec v(re.size());
        v.real() = re;
        v.imag() = im;
        return v;
    }

    GridSpec grid_;
    TridiagEig eig_;
};

inline GridT grid_T(const GridSpec& grid, double k) { return GridT(grid, k); }

namespace detail {

// Catmull-Rom cubic through uniform samples y_j = f(h (j+1)), with f(0) = 0 and zero beyond the last node.
inline cplx cubic_sample(const CVec& y, double h, double E) {
    const double s = E / h - 1.0;
    const Eigen::Index n = y.size();
    if (s < -1.0 || s > static_cast<double>(n)) return 0.0;
    const auto at = [&](Eigen::Index j) -> cplx { return (j < 0 || j >= n) ? cplx(0.0) : y(j); };
    const Eigen::Index j = static_cast<Eigen::Index>(std::floor(s));
    const double t = s - j;
    const cplx p0 = at(j - 1), p1 = at(j), p2 = at(j + 1), p3 = at(j + 2);
    return 0.5 * (2.0 * p1 + (-p0 + p2) * t + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * t * t +
                  (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * t * t * t);
}

}  // namespace detail

// exp(-i t D) psi, i.e. E -> e^{-t/2} psi(e^{-t} E).
inline GridState grid_dilation(const GridState& state, double t, double negligible = 1e-12) {
    const Eigen::Index n = state.samples.size();
    const double h = state.grid.spacing();
    const double peak = state.samples.cwiseAbs().maxCoeff();
    Eigen::Index last = -1;
    for (Eigen::Index j = 0; j < n; ++j)
        if (std::abs(state.samples(j)) > negligible * peak) last = j;
    if (last >= 0 && std::exp(t) * h * (last + 2) >= state.grid.E_max)
        throw SupportEscapesGrid("dilated support leaves (0, E_max)");
    GridState out{state.grid, CVec(n)};
    const double scale = std::exp(-0.5 * t);
    for (Eigen::Index j = 0; j < n; ++j)
        out.samples(j) = scale * detail::cubic_sample(state.samples, h, std::exp(-t) * h * (j + 1));
    return out;
}

}  // namespace modloc
