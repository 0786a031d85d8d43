#pragma once

#include <cmath>

#include "modloc/errors.hpp"
#include "modloc/linalg.hpp"

namespace modloc {

struct LineRule {
    RVec nodes;
    RVec weights;
};

// Golub-Welsch on [-1, 1].
inline LineRule gauss_legendre(int n) {
    if (n < 1) throw InvalidArgument("Gauss-Legendre needs at least one node");
    RVec d = RVec::Zero(n), e(std::max(n - 1, 0));
    for (int j = 1; j < n; ++j) e(j - 1) = j / std::sqrt(4.0 * j * j - 1.0);
    const TridiagEig t = eigh_tridiagonal(d, e, true);
    LineRule r{t.values, RVec(n)};
    for (int i = 0; i < n; ++i) r.weights(i) = 2.0 * t.vectors(0, i) * t.vectors(0, i);
    return r;
}

inline LineRule gauss_legendre(int n, double lo, double hi) {
    LineRule r = gauss_legendre(n);
    const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
    r.nodes = (r.nodes.array() * half + mid).matrix();
    r.weights *= half;
    return r;
}

// Composite Gauss-Legendre in s = sqrt(E) on [0, E_cut]; resolves the sqrt(E) onset at the origin.
inline LineRule energy_rule(double E_cut, double panel = 0.05, int per_panel = 16) {
    if (!(E_cut > 0.0)) throw InvalidArgument("energy cutoff must be positive");
    const double S = std::sqrt(E_cut);
    const int panels = static_cast<int>(std::ceil(S / panel));
    const LineRule base = gauss_legendre(per_panel);
    LineRule r{RVec(panels * per_panel), RVec(panels * per_panel)};
    for (int p = 0; p < panels; ++p) {
        const double lo = S * p / panels, hi = S * (p + 1) / panels;
        for (int i = 0; i < per_panel; ++i) {
            const double s = 0.5 * (lo + hi) + 0.5 * (hi - lo) * base.nodes(i);
            const double w = 0.5 * (hi - lo) * base.weights(i);
            r.nodes(p * per_panel + i) = s * s;
            r.weights(p * per_panel + i) = 2.0 * s * w;
        }
    }
    return r;
}

}  // namespace modloc
