#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "json.hpp"
#include "modloc/errors.hpp"
#include "modloc/grid_oracle.hpp"
#include "modloc/laguerre.hpp"
#include "modloc/linalg.hpp"
#include "modloc/mobius.hpp"
#include "modloc/quadrature.hpp"

namespace modloc {

enum class BumpFamily { Mollifier, SineWindow, PolynomialWindow };

inline std::string to_string(BumpFamily f) {
    switch (f) {
        case BumpFamily::Mollifier: return "mollifier";
        case BumpFamily::SineWindow: return "sine-window";
        case BumpFamily::PolynomialWindow: return "polynomial-window";
    }
    return "?";
}

inline BumpFamily bump_family_from_string(const std::string& s) {
    if (s == "mollifier") return BumpFamily::Mollifier;
    if (s == "sine-window") return BumpFamily::SineWindow;
    if (s == "polynomial-window") return BumpFamily::PolynomialWindow;
    throw ConfigError("unknown bump family '" + s + "'");
}

// A real profile on [a, b], or one of its derivatives. Derivatives have zero mean.
struct BumpSpec {
    double a = 1.0;
    double b = 2.0;
    BumpFamily family = BumpFamily::Mollifier;
    double shape = 2.0;  // steepness s of exp(-s/(1-u^2)), or the window power
    int derivative = 1;
    int samples = 4096;
    double extent = 4.0;  // x-grid is [0, extent * b]

    void validate() const {
        if (!(a > 0.0) || !(b > a) || !std::isfinite(b))
            throw InvalidArgument("bump interval must satisfy 0 < a < b < inf");
        if (!(shape > 0.0)) throw InvalidArgument("bump shape parameter must be positive");
        const int max_derivative = family == BumpFamily::Mollifier ? 2 : 1;
        if (derivative < 0 || derivative > max_derivative)
            throw InvalidArgument("derivative order not available for " + to_string(family));
        if (family == BumpFamily::SineWindow && shape < 2.0)
            throw InvalidArgument("sine-window power must be at least 2");
        if (samples < 16) throw InvalidArgument("too few x samples");
    }
    double dx() const { return extent * b / (samples - 1); }
};

inline nlohmann::json to_json(const BumpSpec& s) {
    return {{"a", s.a}, {"b", s.b}, {"family", to_string(s.family)}, {"shape", s.shape},
            {"derivative", s.derivative}, {"samples", s.samples}, {"extent", s.extent}};
}

inline BumpSpec bump_from_json(const nlohmann::json& j) {
    BumpSpec s;
    s.a = j.value("a", s.a);
    s.b = j.value("b", s.b);
    s.family = bump_family_from_string(j.value("family", to_string(s.family)));
    s.shape = j.value("shape", s.shape);
    s.derivative = j.value("derivative", s.derivative);
    s.samples = j.value("samples", s.samples);
    s.extent = j.value("extent", s.extent);
    return s;
}

namespace detail {

inline double bump_profile(const BumpSpec& s, double x) {
    const double w = s.b - s.a;
    const double u = (2.0 * x - s.a - s.b) / w;
    if (!(std::abs(u) < 1.0)) return 0.0;
    const double du = 2.0 / w;
    const double g = 1.0 - u * u;
    switch (s.family) {
        case BumpFamily::Mollifier: {
            const double f = std::exp(-s.shape / g);
            if (s.derivative == 0) return f;
            const double h = -2.0 * s.shape * u / (g * g);
            if (s.derivative == 1) return f * h * du;
            const double hp = -2.0 * s.shape * (1.0 / (g * g) + 4.0 * u * u / (g * g * g));
            return f * (h * h + hp) * du * du;
        }
        case BumpFamily::SineWindow: {
            const double t = std::numbers::pi * (x - s.a) / w;
            if (s.derivative == 0) return std::pow(std::sin(t), s.shape);
            return s.shape * std::pow(std::sin(t), s.shape - 1.0) * std::cos(t) * std::numbers::pi / w;
        }
        case BumpFamily::PolynomialWindow: {
            if (s.derivative == 0) return std::pow(g, s.shape);
            return -2.0 * s.shape * u * std::pow(g, s.shape - 1.0) * du;
        }
    }
    return 0.0;
}

}  // namespace detail

// Real function with compact support [lo, hi].
struct Wavefunction {
    std::function<double(double)> f;
    double lo = 0.0;
    double hi = 0.0;
    double operator()(double x) const { return (x < lo || x > hi) ? 0.0 : f(x); }
};

// Uniform samples x_j = x0 + j dx.
struct XSamples {
    double x0 = 0.0;
    double dx = 0.0;
    RVec values;
    double lo = 0.0;  // support
    double hi = 0.0;

    double x(Eigen::Index j) const { return x0 + dx * j; }
    Eigen::Index size() const { return values.size(); }
};

inline XSamples sample(const Wavefunction& w, double x0, double dx, int n) {
    XSamples s{x0, dx, RVec(n), w.lo, w.hi};
    for (int j = 0; j < n; ++j) s.values(j) = w(x0 + dx * j);
    return s;
}

inline XSamples make_bump(const BumpSpec& spec) {
    spec.validate();
    const double dx = spec.dx();
    if (spec.b - spec.a < 4.0 * dx) throw DegenerateInterval("interval narrower than four x samples");
    XSamples s{0.0, dx, RVec(spec.samples), spec.a, spec.b};
    for (int j = 0; j < spec.samples; ++j) s.values(j) = detail::bump_profile(spec, dx * j);
    const double peak = s.values.cwiseAbs().maxCoeff();
    if (!(peak > 0.0)) throw DegenerateInterval("bump vanishes on the sample grid");
    s.values /= peak;
    return s;
}

// Same function as make_bump, as a callable (scaled by the same sampled peak).
inline Wavefunction bump_function(const BumpSpec& spec) {
    const XSamples s = make_bump(spec);
    double peak = 0.0;
    for (int j = 0; j < spec.samples; ++j) peak = std::max(peak, std::abs(detail::bump_profile(spec, s.x(j))));
    return {[spec, peak](double x) { return detail::bump_profile(spec, x) / peak; }, spec.a, spec.b};
}

enum class Representation { ZSpectral, EGrid };

inline std::string to_string(Representation r) { return r == Representation::ZSpectral ? "Z-spectral" : "E-grid"; }

struct StateVector {
    Representation rep = Representation::ZSpectral;
    CVec coeffs;             // Z coefficients or grid samples
    double norm2 = 0.0;      // ||psi~_+||^2 before truncation
    double loss = 0.0;       // fraction of that norm outside the truncated basis
    BasisSpec basis;
    GridSpec grid;
    nlohmann::json provenance = nlohmann::json::object();

    double coeff_norm2() const {
        return rep == Representation::EGrid ? grid.spacing() * coeffs.squaredNorm() : coeffs.squaredNorm();
    }
};

struct TransformOptions {
    double cutoff_factor = 4.0;  // E_cut = cutoff_factor * M / beta
    double panel = 0.05;
    int per_panel = 16;
    double max_loss = 1e-4;
};

// int psi(x) e^{iEx} dx by the trapezoid rule over the sampled support.
inline CVec fourier_transform(const XSamples& s, const RVec& E) {
    Eigen::Index first = s.size(), last = -1;
    for (Eigen::Index j = 0; j < s.size(); ++j)
        if (s.values(j) != 0.0) {
            first = std::min(first, j);
            last = j;
        }
    CVec out = CVec::Zero(E.size());
    if (last < 0) return out;
    for (Eigen::Index i = 0; i < E.size(); ++i) {
        const cplx step = std::exp(cplx(0.0, E(i) * s.dx));
        cplx phase = std::exp(cplx(0.0, E(i) * s.x(first)));
        cplx acc = 0.0;
        for (Eigen::Index j = first; j <= last; ++j) {
            acc += s.values(j) * phase;
            phase *= step;
        }
        out(i) = s.dx * acc;
    }
    return out;
}

// psi~_+(E) = sqrt(E/pi) int psi(x) e^{iEx} dx
inline CVec positive_frequency_samples(const XSamples& s, const RVec& E) {
    CVec f = fourier_transform(s, E);
    for (Eigen::Index i = 0; i < E.size(); ++i) f(i) *= std::sqrt(E(i) / std::numbers::pi);
    return f;
}

inline void check_nyquist(const XSamples& s, double E_top) {
    if (E_top > std::numbers::pi / s.dx)
        throw NyquistViolation("energy range " + std::to_string(E_top) + " exceeds pi/dx = " +
                               std::to_string(std::numbers::pi / s.dx));
}

inline StateVector positive_frequency(const XSamples& s, const BasisSpec& basis, const TransformOptions& opt = {}) {
    basis.validate();
    const double E_cut = opt.cutoff_factor * basis.M / basis.beta;
    check_nyquist(s, E_cut);
    const LineRule rule = energy_rule(E_cut, opt.panel, opt.per_panel);
    const CVec f = positive_frequency_samples(s, rule.nodes);
    const RMat Z = basis_table(basis, rule.nodes, BasisKind::Z);
    StateVector v;
    v.rep = Representation::ZSpectral;
    v.basis = basis;
    v.coeffs = Z.cast<cplx>() * rule.weights.cast<cplx>().cwiseProduct(f);
    v.norm2 = rule.weights.dot(f.cwiseAbs2());
    v.loss = v.norm2 > 0.0 ? std::max(0.0, 1.0 - v.coeffs.squaredNorm() / v.norm2) : 0.0;
    v.provenance = {{"E_cut", E_cut}, {"E_nodes", rule.nodes.size()}};
    if (v.loss > opt.max_loss)
        throw ProjectionLoss("fraction " + std::to_string(v.loss) + " of the norm lies outside the basis");
    return v;
}

inline StateVector positive_frequency(const XSamples& s, const GridSpec& grid) {
    grid.validate();
    check_nyquist(s, grid.E_max);
    StateVector v;
    v.rep = Representation::EGrid;
    v.grid = grid;
    v.coeffs = positive_frequency_samples(s, grid.nodes());
    v.norm2 = v.coeff_norm2();
    return v;
}

inline GridState to_grid_state(const StateVector& v) {
    if (v.rep != Representation::EGrid) throw InvalidArgument("state is not an E-grid state");
    return {v.grid, v.coeffs};
}

// sigma(psi, psi') = int (psi psi'_x - psi' psi_x) dx with an eighth-order centered difference.
inline double symplectic(const XSamples& p, const XSamples& q) {
    if (p.size() != q.size() || p.x0 != q.x0 || p.dx != q.dx)
        throw InvalidArgument("symplectic form needs a common x grid");
    static constexpr double c[4] = {4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0};
    const Eigen::Index n = p.size();
    const auto deriv = [&](const RVec& v, Eigen::Index j) {
        double d = 0.0;
        for (int m = 1; m <= 4; ++m) {
            const double fwd = (j + m < n) ? v(j + m) : 0.0;
            const double bwd = (j - m >= 0) ? v(j - m) : 0.0;
            d += c[m - 1] * (fwd - bwd);
        }
        return d / p.dx;
    };
    double acc = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) acc += p.values(j) * deriv(q.values, j) - q.values(j) * deriv(p.values, j);
    return acc * p.dx;
}

// ||psi~_+||^2 = i sigma(conj psi_+, psi_+) written in x-space:
// (1/2pi) int int (psi(x) - psi(y))^2 / (x - y)^2 dx dy.
inline double sigma_norm(const Wavefunction& w, int outer = 160, int inner = 320) {
    const double width = w.hi - w.lo;
    if (!(width > 0.0)) throw DegenerateInterval("wavefunction support is empty");
    const LineRule full = gauss_legendre(inner, w.lo, w.hi);
    double norm = 0.0;
    for (Eigen::Index i = 0; i < full.nodes.size(); ++i) norm += full.weights(i) * std::pow(w(full.nodes(i)), 2);
    const LineRule tr = gauss_legendre(outer, 0.0, width);
    double acc = 0.0;
    for (Eigen::Index m = 0; m < tr.nodes.size(); ++m) {
        const double t = tr.nodes(m);
        const LineRule xr = gauss_legendre(inner, w.lo - t, w.hi);
        double g = 0.0;
        for (Eigen::Index i = 0; i < xr.nodes.size(); ++i) {
            const double q = (w(xr.nodes(i) + t) - w(xr.nodes(i))) / t;
            g += xr.weights(i) * q * q;
        }
        acc += tr.weights(m) * g;
    }
    return (2.0 * acc + 4.0 * norm / width) / (2.0 * std::numbers::pi);
}

namespace detail {

inline double cubic_real(const XSamples& s, double x) {
    const double u = (x - s.x0) / s.dx;
    const Eigen::Index n = s.size();
    if (u < -1.0 || u > static_cast<double>(n)) return 0.0;
    const auto at = [&](Eigen::Index j) { return (j < 0 || j >= n) ? 0.0 : s.values(j); };
    const Eigen::Index j = static_cast<Eigen::Index>(std::floor(u));
    const double t = u - j;
    const double p0 = at(j - 1), p1 = at(j), p2 = at(j + 1), p3 = at(j + 2);
    return 0.5 * (2.0 * p1 + (-p0 + p2) * t + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * t * t +
                  (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * t * t * t);
}

// Image of [lo, hi] under g when it stays bounded.
inline std::pair<double, double> bounded_image(const MoebiusMap& g, double lo, double hi) {
    if (g.c() != 0.0) {
        const double pole = -g.d() / g.c();
        if (pole >= lo && pole <= hi) throw SupportEscapesGrid("map sends part of the support to infinity");
    }
    const double p = act_point(g, lo).value(), q = act_point(g, hi).value();
    return {std::min(p, q), std::max(p, q)};
}

}  // namespace detail

// (U_g psi)(x) = psi(g^{-1} x) - psi(g^{-1} inf): the support moves from I to gI.
inline Wavefunction pushforward(const MoebiusMap& g, const Wavefunction& w) {
    const auto [lo, hi] = detail::bounded_image(g, w.lo, w.hi);
    const MoebiusMap inv = g.inverse();
    const ExtReal at_inf = act_point(inv, ExtReal::infinity());
    const double offset = at_inf.is_inf() ? 0.0 : w(at_inf.value());
    return {[w, inv, offset](double x) {
                const ExtReal y = act_point(inv, x);
                return (y.is_inf() ? 0.0 : w(y.value())) - offset;
            },
            lo, hi};
}

inline XSamples moebius_on_wavefunction(const MoebiusMap& g, const XSamples& in, double x0, double dx, int n) {
    const auto [lo, hi] = detail::bounded_image(g, in.lo, in.hi);
    if (lo <= x0 || hi >= x0 + dx * (n - 1)) throw SupportEscapesGrid("transformed support leaves the x grid");
    const MoebiusMap inv = g.inverse();
    const ExtReal at_inf = act_point(inv, ExtReal::infinity());
    const double offset = at_inf.is_inf() ? 0.0 : detail::cubic_real(in, at_inf.value());
    XSamples out{x0, dx, RVec(n), lo, hi};
    for (int j = 0; j < n; ++j) {
        const double x = x0 + dx * j;
        if (x < lo || x > hi) {
            out.values(j) = 0.0;
            continue;
        }
        const ExtReal y = act_point(inv, x);
        out.values(j) = (y.is_inf() ? 0.0 : detail::cubic_real(in, y.value())) - offset;
    }
    return out;
}

inline XSamples moebius_on_wavefunction(const MoebiusMap& g, const XSamples& in, double extent = 4.0) {
    const auto [lo, hi] = detail::bounded_image(g, in.lo, in.hi);
    (void)lo;
    const int n = static_cast<int>(in.size());
    return moebius_on_wavefunction(g, in, 0.0, extent * hi / (n - 1), n);
}

inline double adapted_beta(double a, double b) { return std::sqrt(a * b / 2.0); }

inline GridSpec adapted_grid(double a, double b, int N = 4096, double E_scale = 60.0) {
    return {N, E_scale / adapted_beta(a, b)};
}

// Twenty zero-mean mollifier derivatives in [a, b]: five steepnesses times four sub-supports.
inline std::vector<BumpSpec> local_fixtures(double a, double b) {
    std::vector<BumpSpec> out;
    const double w = b - a, inset = 0.04 * w;
    const std::pair<double, double> supports[] = {{a, b}, {a + inset, b}, {a, b - inset}, {a + inset, b - inset}};
    for (double s : {2.0, 2.5, 3.0, 3.5, 4.0})
        for (const auto& [lo, hi] : supports) {
            BumpSpec spec;
            spec.a = lo;
            spec.b = hi;
            spec.shape = s;
            spec.derivative = 1;
            out.push_back(spec);
        }
    return out;
}

}  // namespace modloc
