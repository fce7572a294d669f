#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace boolezeta {

using cplx = std::complex<double>;

/// Truncated Taylor series c[0] + c[1] e + ... + c[n-1] e^(n-1) in a small
/// increment e of the complex variable s.
struct Jet {
    static constexpr int kCapacity = 48;

    int n = 1;
    std::array<cplx, kCapacity> c;

    Jet() { c[0] = 0.0; }
    explicit Jet(int size) : n(size) {
        if (size < 1 || size > kCapacity) throw std::out_of_range("Jet size out of range");
        std::fill_n(c.begin(), size, cplx(0.0));
    }

    static Jet constant(int size, cplx v) {
        Jet j(size);
        j.c[0] = v;
        return j;
    }
    /// The identity jet s0 + e.
    static Jet variable(int size, cplx s0) {
        Jet j(size);
        j.c[0] = s0;
        if (size > 1) j.c[1] = 1.0;
        return j;
    }
    /// exp(-(s0 + e) L) for a real L.
    static Jet exp_neg_linear(int size, cplx s0, double L) {
        Jet j(size);
        cplx v = std::exp(-s0 * L);
        j.c[0] = v;
        for (int m = 1; m < size; ++m) {
            v *= -L / m;
            j.c[m] = v;
        }
        return j;
    }

    cplx& operator[](int i) { return c[static_cast<std::size_t>(i)]; }
    const cplx& operator[](int i) const { return c[static_cast<std::size_t>(i)]; }

    Jet& operator+=(const Jet& o) {
        for (int i = 0; i < n; ++i) c[i] += o.c[i];
        return *this;
    }
    Jet& operator-=(const Jet& o) {
        for (int i = 0; i < n; ++i) c[i] -= o.c[i];
        return *this;
    }
    Jet& operator*=(cplx k) {
        for (int i = 0; i < n; ++i) c[i] *= k;
        return *this;
    }
    /// Multiply by the linear jet (a + e).
    Jet& mul_linear(cplx a) {
        for (int i = n - 1; i >= 1; --i) c[i] = a * c[i] + c[i - 1];
        c[0] *= a;
        return *this;
    }

    friend Jet operator+(Jet a, const Jet& b) { return a += b; }
    friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
    friend Jet operator*(Jet a, cplx k) { return a *= k; }
    friend Jet operator*(cplx k, Jet a) { return a *= k; }
    friend Jet operator*(const Jet& a, const Jet& b) {
        Jet r(std::min(a.n, b.n));
        for (int i = 0; i < r.n; ++i) {
            cplx acc = 0.0;
            for (int j = 0; j <= i; ++j) acc += a.c[j] * b.c[i - j];
            r.c[i] = acc;
        }
        return r;
    }

    /// 1 / (a + e) expanded in e.
    static Jet reciprocal_linear(int size, cplx a) {
        if (a == cplx(0.0)) throw std::domain_error("reciprocal of a jet with zero constant term");
        Jet r(size);
        cplx v = 1.0 / a, q = -1.0 / a;
        for (int m = 0; m < size; ++m) {
            r.c[m] = v;
            v *= q;
        }
        return r;
    }

    [[nodiscard]] Jet truncated(int size) const {
        Jet r(size);
        for (int i = 0; i < std::min(size, n); ++i) r.c[i] = c[i];
        return r;
    }

    /// Largest coefficient modulus (a scale for relative tolerances).
    [[nodiscard]] double norm() const {
        double m = 0.0;
        for (int i = 0; i < n; ++i) m = std::max(m, std::abs(c[i]));
        return m;
    }

    /// k-th derivative at the expansion point.
    [[nodiscard]] cplx derivative(int k) const {
        if (k >= n) throw std::out_of_range("jet too short for requested derivative");
        double f = 1.0;
        for (int i = 2; i <= k; ++i) f *= i;
        return c[k] * f;
    }
};

/// Given N(e) with N(-delta) = 0, return N(e)/(e + delta) by synthetic division.
inline Jet divide_by_root(const Jet& num, cplx delta, int out_size) {
    if (out_size >= num.n) throw std::out_of_range("divide_by_root: numerator jet too short");
    Jet q(out_size);
    // q_m = sum_{j>m} N_j (-delta)^(j-m-1)
    for (int m = 0; m < out_size; ++m) {
        cplx acc = 0.0, pw = 1.0;
        for (int j = m + 1; j < num.n; ++j) {
            acc += num.c[j] * pw;
            pw *= -delta;
        }
        q.c[m] = acc;
    }
    return q;
}

}  // namespace boolezeta
