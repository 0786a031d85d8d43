#pragma once

#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Dense>
#include <lapacke.h>

#include "modloc/errors.hpp"

namespace modloc {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

struct HermitianEig {
    RVec values;   // ascending
    CMat vectors;  // columns
};

inline HermitianEig eigh(const CMat& A) {
    const lapack_int n = static_cast<lapack_int>(A.rows());
    HermitianEig e;
    e.vectors = A;
    e.values.resize(n);
    if (n == 0) return e;
    const lapack_int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'U', n,
                                           reinterpret_cast<lapack_complex_double*>(e.vectors.data()), n,
                                           e.values.data());
    if (info != 0) throw EigenFailure("zheevd returned " + std::to_string(info));
    return e;
}

inline RVec eigvalsh(const CMat& A) {
    const lapack_int n = static_cast<lapack_int>(A.rows());
    CMat work = A;
    RVec w(n);
    if (n == 0) return w;
    const lapack_int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'N', 'U', n,
                                           reinterpret_cast<lapack_complex_double*>(work.data()), n, w.data());
    if (info != 0) throw EigenFailure("zheevd returned " + std::to_string(info));
    return w;
}

struct TridiagEig {
    RVec values;
    RMat vectors;  // empty when only values were requested
};

// Symmetric tridiagonal with diagonal d and off-diagonal e (size n-1).
inline TridiagEig eigh_tridiagonal(const RVec& d, const RVec& e, bool want_vectors) {
    const lapack_int n = static_cast<lapack_int>(d.size());
    TridiagEig out;
    out.values.resize(n);
    if (n == 0) return out;
    RVec dd = d;
    RVec ee(n);
    ee.head(n - 1) = e;
    ee(n - 1) = 0.0;
    lapack_int m = 0;
    std::vector<lapack_int> isuppz(2 * static_cast<size_t>(n));
    double* z = nullptr;
    if (want_vectors) {
        out.vectors.resize(n, n);
        z = out.vectors.data();
    }
    const lapack_int info = LAPACKE_dstevr(LAPACK_COL_MAJOR, want_vectors ? 'V' : 'N', 'A', n, dd.data(), ee.data(),
                                           0.0, 0.0, 0, 0, 0.0, &m, out.values.data(), want_vectors ? z : dd.data(),
                                           n, isuppz.data());
    if (info != 0 || m != n) throw EigenFailure("dstevr returned " + std::to_string(info));
    return out;
}

inline double hermiticity_defect(const CMat& A) { return (A - A.adjoint()).cwiseAbs().maxCoeff(); }

inline CMat hermitize(const CMat& A) { return (A + A.adjoint()) / 2.0; }

// Spectral norm.
inline double norm2(const CMat& A) {
    if (A.size() == 0) return 0.0;
    Eigen::BDCSVD<CMat> svd(A);
    return svd.singularValues()(0);
}

inline CMat from_eig(const HermitianEig& e, const std::function<cplx(double)>& f) {
    CVec fw(e.values.size());
    for (Eigen::Index i = 0; i < e.values.size(); ++i) fw(i) = f(e.values(i));
    return e.vectors * fw.asDiagonal() * e.vectors.adjoint();
}

inline CMat leading_block(const CMat& A, Eigen::Index p) { return A.topLeftCorner(p, p); }

}  // namespace modloc
