#pragma once

#include <array>
#include <cmath>

namespace vagsim {

/// Forward-mode derivative carrier: a value and its gradient with respect to
/// N local unknowns. Used to compose closed-form property partials into
/// mobilities, accumulations and fluxes without hand-expanding the chain rule.
template <int N>
struct Dual {
    double v = 0.0;
    std::array<double, N> d{};

    Dual() = default;
    constexpr Dual(double value) : v(value) {} // NOLINT: implicit constant lift

    static Dual variable(double value, int index)
    {
        Dual r(value);
        r.d[index] = 1.0;
        return r;
    }

    Dual& operator+=(const Dual& o)
    {
        v += o.v;
        for (int i = 0; i < N; ++i)
            d[i] += o.d[i];
        return *this;
    }
    Dual& operator-=(const Dual& o)
    {
        v -= o.v;
        for (int i = 0; i < N; ++i)
            d[i] -= o.d[i];
        return *this;
    }
    Dual& operator*=(double s)
    {
        v *= s;
        for (auto& x : d)
            x *= s;
        return *this;
    }
};

template <int N>
Dual<N> operator+(Dual<N> a, const Dual<N>& b)
{
    return a += b;
}
template <int N>
Dual<N> operator-(Dual<N> a, const Dual<N>& b)
{
    return a -= b;
}
template <int N>
Dual<N> operator-(Dual<N> a)
{
    a *= -1.0;
    return a;
}
template <int N>
Dual<N> operator*(Dual<N> a, double s)
{
    return a *= s;
}
template <int N>
Dual<N> operator*(double s, Dual<N> a)
{
    return a *= s;
}
template <int N>
Dual<N> operator*(const Dual<N>& a, const Dual<N>& b)
{
    Dual<N> r(a.v * b.v);
    for (int i = 0; i < N; ++i)
        r.d[i] = a.d[i] * b.v + a.v * b.d[i];
    return r;
}
template <int N>
Dual<N> operator/(const Dual<N>& a, const Dual<N>& b)
{
    const double inv = 1.0 / b.v;
    Dual<N> r(a.v * inv);
    for (int i = 0; i < N; ++i)
        r.d[i] = (a.d[i] - r.v * b.d[i]) * inv;
    return r;
}
template <int N>
Dual<N> operator/(const Dual<N>& a, double s)
{
    return a * (1.0 / s);
}
template <int N>
Dual<N> operator/(double s, const Dual<N>& b)
{
    return Dual<N>(s) / b;
}
template <int N>
Dual<N> operator+(Dual<N> a, double s)
{
    a.v += s;
    return a;
}
template <int N>
Dual<N> operator+(double s, Dual<N> a)
{
    a.v += s;
    return a;
}
template <int N>
Dual<N> operator-(Dual<N> a, double s)
{
    a.v -= s;
    return a;
}
template <int N>
Dual<N> operator-(double s, Dual<N> a)
{
    a *= -1.0;
    a.v += s;
    return a;
}

template <int N>
Dual<N> exp(const Dual<N>& a)
{
    const double e = std::exp(a.v);
    Dual<N> r(e);
    for (int i = 0; i < N; ++i)
        r.d[i] = e * a.d[i];
    return r;
}

/// Value part, so generic code can branch identically on double and Dual.
inline double value(double x) { return x; }
template <int N>
double value(const Dual<N>& a)
{
    return a.v;
}

/// Embed the gradient of `a` into slots [offset, offset + N) of a wider carrier.
template <int M, int N>
Dual<M> lift(const Dual<N>& a, int offset)
{
    static_assert(M >= N);
    Dual<M> r(a.v);
    for (int i = 0; i < N; ++i)
        r.d[offset + i] = a.d[i];
    return r;
}

} // namespace vagsim
