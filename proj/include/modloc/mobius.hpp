#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <ostream>

#include "modloc/errors.hpp"

namespace modloc {

// A point of the compactified line. Infinity is a distinct state, never a big float.
class ExtReal {
public:
    constexpr ExtReal() = default;
    constexpr ExtReal(double v) : v_(v) {}
    static constexpr ExtReal infinity() { ExtReal e; e.inf_ = true; return e; }

    bool is_inf() const { return inf_; }
    double value() const {
        if (inf_) throw InvalidArgument("finite value requested from the point at infinity");
        return v_;
    }
    bool approx(const ExtReal& o, double tol) const {
        if (inf_ || o.inf_) return inf_ == o.inf_;
        return std::abs(v_ - o.v_) <= tol * std::max(1.0, std::abs(o.v_));
    }
    friend bool operator==(const ExtReal& x, const ExtReal& y) {
        return x.inf_ == y.inf_ && (x.inf_ || x.v_ == y.v_);
    }
    friend std::ostream& operator<<(std::ostream& os, const ExtReal& x) {
        return x.inf_ ? (os << "inf") : (os << x.v_);
    }

private:
    double v_ = 0.0;
    bool inf_ = false;
};

// Row-major (a b; c d), kept at determinant one.
class MoebiusMap {
public:
    MoebiusMap() = default;
    MoebiusMap(double a, double b, double c, double d) : m_{a, b, c, d} {
        const double det = a * d - b * c;
        if (!(det > 0.0) || !std::isfinite(det))
            throw InvalidArgument("Moebius map needs a positive finite determinant");
        const double s = 1.0 / std::sqrt(det);
        for (double& e : m_) e *= s;
    }

    double a() const { return m_[0]; }
    double b() const { return m_[1]; }
    double c() const { return m_[2]; }
    double d() const { return m_[3]; }
    double det() const { return m_[0] * m_[3] - m_[1] * m_[2]; }
    const std::array<double, 4>& entries() const { return m_; }

    MoebiusMap operator*(const MoebiusMap& o) const {
        MoebiusMap r;
        r.m_ = {a() * o.a() + b() * o.c(), a() * o.b() + b() * o.d(),
                c() * o.a() + d() * o.c(), c() * o.b() + d() * o.d()};
        return r;
    }
    MoebiusMap inverse() const {
        MoebiusMap r;
        r.m_ = {d(), -b(), -c(), a()};
        return r;
    }

    // Projective distance: min over the two sign representatives.
    double distance(const MoebiusMap& o) const {
        double plus = 0.0, minus = 0.0;
        for (int i = 0; i < 4; ++i) {
            plus = std::max(plus, std::abs(m_[i] - o.m_[i]));
            minus = std::max(minus, std::abs(m_[i] + o.m_[i]));
        }
        return std::min(plus, minus);
    }
    bool approx(const MoebiusMap& o, double tol) const { return distance(o) <= tol; }
    friend bool operator==(const MoebiusMap& x, const MoebiusMap& y) { return x.distance(y) <= 1e-12; }

private:
    std::array<double, 4> m_{1.0, 0.0, 0.0, 1.0};
};

inline MoebiusMap identity_map() { return {}; }
inline MoebiusMap translation(double t) { return {1.0, t, 0.0, 1.0}; }
inline MoebiusMap dilation(double y) {
    if (!(y > 0.0)) throw InvalidArgument("dilation parameter must be positive");
    return {y, 0.0, 0.0, 1.0 / y};
}
inline MoebiusMap special_conformal(double z) { return {1.0, 0.0, -z, 1.0}; }
// Dilation along its one-parameter flow, normalized so that it scales translations by e^{2 pi b}.
inline MoebiusMap dilation_flow(double b) { return dilation(std::exp(std::numbers::pi * b)); }
// Generated by (h + c)/2; rotation(pi) sends x to -1/x.
inline MoebiusMap rotation(double theta) {
    // snap rounding residue so that quarter turns are exact
    const auto snap = [](double v) { return std::abs(v) < 4e-16 ? 0.0 : v; };
    const double c = snap(std::cos(theta / 2)), s = snap(std::sin(theta / 2));
    return {c, s, -s, c};
}

inline ExtReal act_point(const MoebiusMap& g, const ExtReal& x) {
    if (x.is_inf()) {
        if (g.c() == 0.0) return ExtReal::infinity();
        return g.a() / g.c();
    }
    const double den = g.c() * x.value() + g.d();
    if (den == 0.0) return ExtReal::infinity();
    return (g.a() * x.value() + g.b()) / den;
}

// Oriented arc of the circle from lo to hi in the increasing direction; wraps when it passes through infinity.
struct Interval {
    ExtReal lo;
    ExtReal hi;

    Interval(ExtReal l, ExtReal h) : lo(l), hi(h) {
        if (lo == hi) throw InvalidArgument("interval is not proper: endpoints coincide");
    }
    bool wraps() const { return !lo.is_inf() && !hi.is_inf() && lo.value() > hi.value(); }
    Interval complement() const { return {hi, lo}; }
    bool contains(double x) const {
        if (lo.is_inf()) return x <= hi.value();
        if (hi.is_inf()) return x >= lo.value();
        if (wraps()) return x >= lo.value() || x <= hi.value();
        return x >= lo.value() && x <= hi.value();
    }
    bool approx(const Interval& o, double tol) const { return lo.approx(o.lo, tol) && hi.approx(o.hi, tol); }
};

inline Interval standard_interval() { return {0.0, ExtReal::infinity()}; }

inline Interval act_interval(const MoebiusMap& g, const Interval& I) {
    return {act_point(g, I.lo), act_point(g, I.hi)};
}

// g with g [0, inf] = I.
inline MoebiusMap map_from_standard(const Interval& I) {
    if (I.lo.is_inf()) return {I.hi.value(), -1.0, 1.0, 0.0};
    if (I.hi.is_inf()) return translation(I.lo.value());
    const double a = I.lo.value(), b = I.hi.value();
    if (b > a) return {b, a, 1.0, 1.0};
    return {-b, a, -1.0, 1.0};
}

struct IwasawaFactors {
    double x = 0.0;
    double y = 1.0;
    double z = 0.0;
    MoebiusMap recompose() const { return translation(x) * dilation(y) * special_conformal(z); }
};

inline IwasawaFactors iwasawa(const MoebiusMap& g, double underflow = 1e-14) {
    // T(x) L(y) P(z) = (y - xz/y, x/y; -z/y, 1/y)
    double b = g.b(), c = g.c(), d = g.d();
    const double scale = std::max({std::abs(g.a()), std::abs(b), std::abs(c), std::abs(d)});
    if (std::abs(d) <= underflow * scale)
        throw DecompositionFailure("lower-right entry vanishes; map lies on the coset boundary");
    if (d < 0.0) { b = -b; c = -c; d = -d; }
    return {b / d, 1.0 / d, -c / d};
}

enum class Subgroup { Translation, Dilation, SpecialConformal, Rotation };

inline MoebiusMap subgroup_element(Subgroup which, double param) {
    switch (which) {
        case Subgroup::Translation: return translation(param);
        case Subgroup::Dilation: return dilation(param);
        case Subgroup::SpecialConformal: return special_conformal(param);
        case Subgroup::Rotation: return rotation(param);
    }
    return {};
}

inline MoebiusMap conjugate_subgroup(const MoebiusMap& g, Subgroup which, double param) {
    return g * subgroup_element(which, param) * g.inverse();
}

}  // namespace modloc
