#pragma once

#include <cmath>
#include <vector>

#include "modloc/errors.hpp"
#include "modloc/linalg.hpp"

namespace modloc {

inline double laguerre_eval(int n, double alpha, double x) {
    if (n < 0) throw InvalidArgument("laguerre degree must be non-negative");
    if (!(alpha > -1.0)) throw InvalidArgument("laguerre alpha must exceed -1");
    double prev = 0.0, cur = 1.0;
    for (int j = 0; j < n; ++j) {
        const double next = ((2.0 * j + 1.0 + alpha - x) * cur - (j + alpha) * prev) / (j + 1.0);
        prev = cur;
        cur = next;
    }
    return cur;
}

// Row n, column i holds exp(logpref_i) * p_n(x_i), where p_n is L_n^alpha normalized
// against x^alpha e^{-x}. Mantissas are rescaled on the fly so nothing overflows
// before the prefactor is applied.
inline RMat orthonormal_laguerre_table(const RVec& x, double alpha, int nmax, const RVec& logpref) {
    const Eigen::Index npts = x.size();
    RMat out(nmax, npts);
    constexpr double big = 1e100;
    const double log_big = std::log(big);
    for (Eigen::Index i = 0; i < npts; ++i) {
        double ls = logpref(i) - 0.5 * std::lgamma(alpha + 1.0);
        double prev = 0.0, cur = 1.0;
        if (nmax > 0) out(0, i) = std::exp(ls);
        for (int n = 0; n + 1 < nmax; ++n) {
            const double next = ((2.0 * n + 1.0 + alpha - x(i)) * cur - std::sqrt(n * (n + alpha)) * prev) /
                                std::sqrt((n + 1.0) * (n + 1.0 + alpha));
            prev = cur;
            cur = next;
            if (std::abs(cur) > big) {
                cur /= big;
                prev /= big;
                ls += log_big;
            }
            out(n + 1, i) = cur * std::exp(ls);
        }
    }
    return out;
}

struct QuadratureRule {
    RVec nodes;
    RVec weights;      // may underflow to zero for large orders
    RVec log_weights;
    int order = 0;
    double alpha = 0.0;
};

// Golub-Welsch nodes; weights from the Christoffel function so they survive underflow.
inline QuadratureRule gauss_laguerre(int order, double alpha) {
    if (order < 1) throw InvalidArgument("quadrature order must be at least 1");
    if (!(alpha > -1.0)) throw InvalidArgument("quadrature alpha must exceed -1");
    RVec d(order), e(std::max(order - 1, 0));
    for (int n = 0; n < order; ++n) d(n) = 2.0 * n + alpha + 1.0;
    for (int n = 1; n < order; ++n) e(n - 1) = -std::sqrt(n * (n + alpha));
    QuadratureRule q;
    q.order = order;
    q.alpha = alpha;
    q.nodes = eigh_tridiagonal(d, e, false).values;

    q.log_weights.resize(order);
    constexpr double big = 1e100;
    const double log_big = std::log(big);
    for (int i = 0; i < order; ++i) {
        const double x = q.nodes(i);
        double ls = -0.5 * std::lgamma(alpha + 1.0);
        double prev = 0.0, cur = 1.0;
        // log-sum-exp of 2 log|p_j(x)| over j < order
        double acc_max = 2.0 * ls;
        double acc = 1.0;
        for (int n = 0; n + 1 < order; ++n) {
            const double next = ((2.0 * n + 1.0 + alpha - x) * cur - std::sqrt(n * (n + alpha)) * prev) /
                                std::sqrt((n + 1.0) * (n + 1.0 + alpha));
            prev = cur;
            cur = next;
            if (std::abs(cur) > big) {
                cur /= big;
                prev /= big;
                ls += log_big;
            }
            if (cur == 0.0) continue;
            const double term = 2.0 * (std::log(std::abs(cur)) + ls);
            if (term > acc_max) {
                acc = acc * std::exp(acc_max - term) + 1.0;
                acc_max = term;
            } else {
                acc += std::exp(term - acc_max);
            }
        }
        q.log_weights(i) = -(acc_max + std::log(acc));
    }
    q.weights = q.log_weights.array().exp();
    return q;
}

struct BasisSpec {
    double k = 1.0;
    double beta = 1.0;
    int M = 64;

    void validate() const {
        if (!(k >= 0.5)) throw InvalidArgument("lowest weight k must satisfy k >= 1/2");
        if (!(beta > 0.0)) throw InvalidArgument("scale beta must be positive");
        if (M < 1) throw InvalidArgument("truncation M must be at least 1");
    }
    // The main localization results are stated for k >= 1.
    bool covered_by_theorems() const { return k >= 1.0; }
    friend bool operator==(const BasisSpec&, const BasisSpec&) = default;
};

enum class BasisKind { Z, Ztilde };

inline double basis_log_prefactor(const BasisSpec& s, double E, BasisKind which) {
    if (which == BasisKind::Z) {
        const double x = 2.0 * s.beta * E;
        return 0.5 * std::log(2.0 * s.beta) + (s.k - 0.5) * std::log(x) - 0.5 * x;
    }
    const double u = 2.0 * s.beta * E * E;
    return 0.5 * std::log(2.0) - 0.5 * std::log(E) + s.k * std::log(u) - 0.5 * u;
}

inline double basis_argument(const BasisSpec& s, double E, BasisKind which) {
    return which == BasisKind::Z ? 2.0 * s.beta * E : 2.0 * s.beta * E * E;
}

// Row n = m - k of the table is the basis function of index m, sampled at E.
inline RMat basis_table(const BasisSpec& s, const RVec& E, BasisKind which) {
    s.validate();
    RVec x(E.size()), lp(E.size());
    for (Eigen::Index i = 0; i < E.size(); ++i) {
        if (!(E(i) > 0.0)) throw InvalidArgument("basis functions are evaluated at E > 0");
        x(i) = basis_argument(s, E(i), which);
        lp(i) = basis_log_prefactor(s, E(i), which);
    }
    return orthonormal_laguerre_table(x, 2.0 * s.k - 1.0, s.M, lp);
}

inline double basis_eval(const BasisSpec& s, int n, double E, BasisKind which) {
    if (n < 0 || n >= s.M) throw InvalidArgument("basis index outside the truncation");
    RVec e(1);
    e(0) = E;
    BasisSpec t = s;
    t.M = n + 1;
    return basis_table(t, e, which)(n, 0);
}

}  // namespace modloc
