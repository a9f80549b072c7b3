#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Core>

namespace cpinn {

/// Value, gradient and diagonal Hessian of a scalar field at one point.
struct Jet2 {
    double value = 0.0;
    std::vector<double> grad;
    std::vector<double> hess_diag;

    Jet2() = default;
    explicit Jet2(int dim) : grad(dim, 0.0), hess_diag(dim, 0.0) {}

    int dim() const { return static_cast<int>(grad.size()); }
};

/// Jets of one scalar field over a batch of points. Row i is point i;
/// column k of grad/hess is the derivative along input axis k.
struct JetBatch {
    Eigen::ArrayXd value;
    Eigen::ArrayXXd grad;
    Eigen::ArrayXXd hess;

    JetBatch() = default;
    JetBatch(Eigen::Index n_points, int dim)
        : value(Eigen::ArrayXd::Zero(n_points)),
          grad(Eigen::ArrayXXd::Zero(n_points, dim)),
          hess(Eigen::ArrayXXd::Zero(n_points, dim)) {}

    Eigen::Index size() const { return value.size(); }
    int dim() const { return static_cast<int>(grad.cols()); }

    Jet2 at(Eigen::Index i) const {
        Jet2 j(dim());
        j.value = value(i);
        for (int k = 0; k < dim(); ++k) {
            j.grad[k] = grad(i, k);
            j.hess_diag[k] = hess(i, k);
        }
        return j;
    }
};

/// Second-order forward-mode number along a single seeded direction:
/// carries f, f' and f''. Used to differentiate closed-form expressions.
template <typename T>
struct Dual2 {
    T v{};
    T d{};
    T dd{};

    constexpr Dual2() = default;
    constexpr Dual2(T value) : v(value) {}
    constexpr Dual2(T value, T first, T second) : v(value), d(first), dd(second) {}

    static constexpr Dual2 variable(T value) { return Dual2(value, T(1), T(0)); }

    Dual2& operator+=(const Dual2& o) { v += o.v; d += o.d; dd += o.dd; return *this; }
    Dual2& operator-=(const Dual2& o) { v -= o.v; d -= o.d; dd -= o.dd; return *this; }
    Dual2& operator*=(const Dual2& o) {
        dd = dd * o.v + T(2) * d * o.d + v * o.dd;
        d = d * o.v + v * o.d;
        v *= o.v;
        return *this;
    }
    Dual2& operator/=(const Dual2& o) {
        const T inv = T(1) / o.v;
        const T q = v * inv;
        const T dq = (d - q * o.d) * inv;
        const T ddq = (dd - T(2) * dq * o.d - q * o.dd) * inv;
        v = q;
        d = dq;
        dd = ddq;
        return *this;
    }
};

template <typename T> Dual2<T> operator+(Dual2<T> a, const Dual2<T>& b) { return a += b; }
template <typename T> Dual2<T> operator-(Dual2<T> a, const Dual2<T>& b) { return a -= b; }
template <typename T> Dual2<T> operator*(Dual2<T> a, const Dual2<T>& b) { return a *= b; }
template <typename T> Dual2<T> operator/(Dual2<T> a, const Dual2<T>& b) { return a /= b; }
template <typename T> Dual2<T> operator-(const Dual2<T>& a) { return {-a.v, -a.d, -a.dd}; }

template <typename T> Dual2<T> operator+(Dual2<T> a, T b) { a.v += b; return a; }
template <typename T> Dual2<T> operator+(T a, Dual2<T> b) { b.v += a; return b; }
template <typename T> Dual2<T> operator-(Dual2<T> a, T b) { a.v -= b; return a; }
template <typename T> Dual2<T> operator-(T a, const Dual2<T>& b) { return {a - b.v, -b.d, -b.dd}; }
template <typename T> Dual2<T> operator*(const Dual2<T>& a, T b) { return {a.v * b, a.d * b, a.dd * b}; }
template <typename T> Dual2<T> operator*(T a, const Dual2<T>& b) { return b * a; }
template <typename T> Dual2<T> operator/(const Dual2<T>& a, T b) { return {a.v / b, a.d / b, a.dd / b}; }
template <typename T> Dual2<T> operator/(T a, const Dual2<T>& b) { return Dual2<T>(a) / b; }

template <typename T>
Dual2<T> exp(const Dual2<T>& a) {
    using std::exp;
    const T e = exp(a.v);
    return {e, e * a.d, e * (a.dd + a.d * a.d)};
}

template <typename T>
Dual2<T> sin(const Dual2<T>& a) {
    using std::cos;
    using std::sin;
    const T s = sin(a.v);
    const T c = cos(a.v);
    return {s, c * a.d, c * a.dd - s * a.d * a.d};
}

template <typename T>
Dual2<T> cos(const Dual2<T>& a) {
    using std::cos;
    using std::sin;
    const T s = sin(a.v);
    const T c = cos(a.v);
    return {c, -s * a.d, -s * a.dd - c * a.d * a.d};
}

template <typename T>
Dual2<T> tanh(const Dual2<T>& a) {
    using std::tanh;
    const T t = tanh(a.v);
    const T s = T(1) - t * t;
    return {t, s * a.d, s * a.dd - T(2) * t * s * a.d * a.d};
}

} // namespace cpinn
