#pragma once

// Truncated Taylor arithmetic in three variables, to total order 3.
// Used to evaluate exact jets (values and covariant derivatives up to third
// order) of closed-form test maps and model frames; there are no finite
// differences on this path.

#include <array>
#include <cmath>

#include "phg/core.hpp"

namespace phg {

namespace detail {
// Symmetric index maps for 3 variables.
inline constexpr int h_idx_tab[3][3] = {{0, 1, 2}, {1, 3, 4}, {2, 4, 5}};
inline int hidx(int a, int b) { return h_idx_tab[a][b]; }
inline int tidx(int a, int b, int c) {
    // sort a<=b<=c
    if (a > b) std::swap(a, b);
    if (b > c) std::swap(b, c);
    if (a > b) std::swap(a, b);
    static constexpr int tab[3][3][3] = {
        {{0, 1, 2}, {-1, 3, 4}, {-1, -1, 5}},
        {{-1, -1, -1}, {-1, 6, 7}, {-1, -1, 8}},
        {{-1, -1, -1}, {-1, -1, -1}, {-1, -1, 9}}};
    return tab[a][b][c];
}
}  // namespace detail

struct Jet3 {
    double v = 0.0;                  // value
    std::array<double, 3> g{};       // gradient
    std::array<double, 6> h{};       // symmetric second derivatives
    std::array<double, 10> t{};      // symmetric third derivatives

    Jet3() = default;
    explicit Jet3(double val) : v(val) {}

    static Jet3 constant(double c) { return Jet3(c); }
    static Jet3 coordinate(int a, double val) {
        Jet3 j(val);
        j.g[a] = 1.0;
        return j;
    }

    double grad(int a) const { return g[a]; }
    double hess(int a, int b) const { return h[detail::hidx(a, b)]; }
    double third(int a, int b, int c) const { return t[detail::tidx(a, b, c)]; }

    Jet3& operator+=(const Jet3& o) {
        v += o.v;
        for (int i = 0; i < 3; ++i) g[i] += o.g[i];
        for (int i = 0; i < 6; ++i) h[i] += o.h[i];
        for (int i = 0; i < 10; ++i) t[i] += o.t[i];
        return *this;
    }
    Jet3& operator-=(const Jet3& o) {
        v -= o.v;
        for (int i = 0; i < 3; ++i) g[i] -= o.g[i];
        for (int i = 0; i < 6; ++i) h[i] -= o.h[i];
        for (int i = 0; i < 10; ++i) t[i] -= o.t[i];
        return *this;
    }
};

inline Jet3 operator+(Jet3 a, const Jet3& b) { return a += b; }
inline Jet3 operator-(Jet3 a, const Jet3& b) { return a -= b; }
inline Jet3 operator-(const Jet3& a) {
    Jet3 r;
    r.v = -a.v;
    for (int i = 0; i < 3; ++i) r.g[i] = -a.g[i];
    for (int i = 0; i < 6; ++i) r.h[i] = -a.h[i];
    for (int i = 0; i < 10; ++i) r.t[i] = -a.t[i];
    return r;
}
inline Jet3 operator*(double s, Jet3 a) {
    a.v *= s;
    for (int i = 0; i < 3; ++i) a.g[i] *= s;
    for (int i = 0; i < 6; ++i) a.h[i] *= s;
    for (int i = 0; i < 10; ++i) a.t[i] *= s;
    return a;
}
inline Jet3 operator+(Jet3 a, double c) {
    a.v += c;
    return a;
}
inline Jet3 operator+(double c, Jet3 a) {
    a.v += c;
    return a;
}
inline Jet3 operator-(Jet3 a, double c) {
    a.v -= c;
    return a;
}

inline Jet3 operator*(const Jet3& f, const Jet3& gj) {
    Jet3 r;
    r.v = f.v * gj.v;
    for (int a = 0; a < 3; ++a) r.g[a] = f.g[a] * gj.v + f.v * gj.g[a];
    for (int a = 0; a < 3; ++a)
        for (int b = a; b < 3; ++b)
            r.h[detail::hidx(a, b)] = f.hess(a, b) * gj.v + f.g[a] * gj.g[b] +
                                      f.g[b] * gj.g[a] + f.v * gj.hess(a, b);
    for (int a = 0; a < 3; ++a)
        for (int b = a; b < 3; ++b)
            for (int c = b; c < 3; ++c)
                r.t[detail::tidx(a, b, c)] =
                    f.third(a, b, c) * gj.v + f.hess(a, b) * gj.g[c] +
                    f.hess(a, c) * gj.g[b] + f.hess(b, c) * gj.g[a] +
                    f.g[a] * gj.hess(b, c) + f.g[b] * gj.hess(a, c) +
                    f.g[c] * gj.hess(a, b) + f.v * gj.third(a, b, c);
    return r;
}

// Composition with a scalar function given by value and first three
// derivatives at f.v.
inline Jet3 compose(const Jet3& f, double s0, double s1, double s2, double s3) {
    Jet3 r;
    r.v = s0;
    for (int a = 0; a < 3; ++a) r.g[a] = s1 * f.g[a];
    for (int a = 0; a < 3; ++a)
        for (int b = a; b < 3; ++b)
            r.h[detail::hidx(a, b)] = s2 * f.g[a] * f.g[b] + s1 * f.hess(a, b);
    for (int a = 0; a < 3; ++a)
        for (int b = a; b < 3; ++b)
            for (int c = b; c < 3; ++c)
                r.t[detail::tidx(a, b, c)] =
                    s3 * f.g[a] * f.g[b] * f.g[c] +
                    s2 * (f.hess(a, b) * f.g[c] + f.hess(a, c) * f.g[b] +
                          f.hess(b, c) * f.g[a]) +
                    s1 * f.third(a, b, c);
    return r;
}

inline Jet3 sin(const Jet3& f) {
    double s = std::sin(f.v), c = std::cos(f.v);
    return compose(f, s, c, -s, -c);
}
inline Jet3 cos(const Jet3& f) {
    double s = std::sin(f.v), c = std::cos(f.v);
    return compose(f, c, -s, -c, s);
}
inline Jet3 exp(const Jet3& f) {
    double e = std::exp(f.v);
    return compose(f, e, e, e, e);
}
inline Jet3 recip(const Jet3& f) {
    double u = f.v;
    return compose(f, 1.0 / u, -1.0 / (u * u), 2.0 / (u * u * u), -6.0 / (u * u * u * u));
}

// Partial derivative: returns the jet of df/dx_a, exact to order 2 (the
// third-order slots of the result are zero by truncation).
inline Jet3 partial(const Jet3& f, int a) {
    Jet3 r;
    r.v = f.g[a];
    for (int b = 0; b < 3; ++b) r.g[b] = f.hess(a, b);
    for (int b = 0; b < 3; ++b)
        for (int c = b; c < 3; ++c) r.h[detail::hidx(b, c)] = f.third(a, b, c);
    return r;
}

// Directional derivative along a vector with Jet3 coefficients.
inline Jet3 dderiv(const Jet3& f, const std::array<Jet3, 3>& dir) {
    Jet3 r;
    for (int a = 0; a < 3; ++a) r += dir[a] * partial(f, a);
    return r;
}

}  // namespace phg
