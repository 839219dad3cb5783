// Independent reference implementations used only by the test suites.
// Nothing here calls into the library code it is used to check.
#pragma once

#include <cmath>
#include <complex>
#include <utility>
#include <vector>

namespace oracle {

using cld = std::complex<long double>;
using cplx = std::complex<double>;
inline constexpr long double PI_L = 3.141592653589793238462643383279502884L;

/// j_l(z) from its power series, summed in long double.
inline cplx sph_bessel_series(int l, cplx zd) {
    const cld z(zd.real(), zd.imag());
    cld pre = 1.0L;
    for (int k = 0; k < l; ++k) pre *= z;
    long double dfact = 1.0L;
    for (int k = 3; k <= 2 * l + 1; k += 2) dfact *= k;
    pre /= dfact;
    cld sum = 0.0L, term = 1.0L;
    const cld w = -z * z / 2.0L;
    for (int k = 0; k < 400; ++k) {
        if (k > 0) term *= w / (static_cast<long double>(k) * (2.0L * l + 2.0L * k + 1.0L));
        sum += term;
        if (std::abs(term) < 1e-30L * std::abs(sum)) break;
    }
    const cld r = pre * sum;
    return {static_cast<double>(r.real()), static_cast<double>(r.imag())};
}

inline long double binom(int n, int k) {
    long double r = 1.0L;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

/// P_l^m(x), Condon-Shortley phase, from the explicit polynomial of P_l
/// differentiated m times term by term.
inline double legendre_explicit(int l, int m, double xd) {
    const long double x = xd;
    long double deriv = 0.0L;
    for (int k = 0; 2 * k <= l; ++k) {
        const int p = l - 2 * k;
        if (p < m) continue;
        long double c = binom(l, k) * binom(2 * l - 2 * k, l) / std::pow(2.0L, l);
        if (k % 2) c = -c;
        long double fall = 1.0L;
        for (int i = 0; i < m; ++i) fall *= (p - i);
        deriv += c * fall * std::pow(x, p - m);
    }
    const long double s = std::pow(1.0L - x * x, m / 2.0L);
    const long double sign = (m % 2) ? -1.0L : 1.0L;
    return static_cast<double>(sign * s * deriv);
}

/// Gauss-Legendre nodes and weights on [-1, 1] via Newton iteration.
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
    std::vector<double> x(n), w(n);
    for (int i = 0; i < n; ++i) {
        long double z = std::cos(PI_L * (i + 0.75L) / (n + 0.5L));
        long double dp = 0;
        for (int it = 0; it < 100; ++it) {
            long double p0 = 1.0L, p1 = z;
            for (int k = 2; k <= n; ++k) {
                const long double p2 = ((2.0L * k - 1.0L) * z * p1 - (k - 1.0L) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) { p1 = z; p0 = 1.0L; }
            dp = n * (z * p1 - p0) / (z * z - 1.0L);
            const long double dz = p1 / dp;
            z -= dz;
            if (std::fabs(dz) < 1e-19L) break;
        }
        x[i] = static_cast<double>(z);
        w[i] = static_cast<double>(2.0L / ((1.0L - z * z) * dp * dp));
    }
    return {x, w};
}

/// Orthonormal Y_lm at a real direction, built from legendre_explicit.
inline cplx ylm_explicit(int l, int m, double theta, double phi) {
    const int am = std::abs(m);
    long double ratio = 1.0L;
    for (int k = l - am + 1; k <= l + am; ++k) ratio /= k;
    const long double norm = std::sqrt((2.0L * l + 1.0L) / (4.0L * PI_L) * ratio);
    const double p = legendre_explicit(l, am, std::cos(theta));
    cplx y = static_cast<double>(norm) * p * std::exp(cplx(0, am * phi));
    if (m < 0) y = ((am % 2) ? -1.0 : 1.0) * std::conj(y);
    return y;
}

/// Integral of Y1 Y2 conj(Y3) by tensor Gauss-Legendre x trapezoid quadrature.
inline double gaunt_quadrature(int l1, int m1, int l2, int m2, int l3, int m3) {
    const int n = (l1 + l2 + l3) / 2 + 8;
    auto [x, w] = gauss_legendre(n);
    const int nphi = 2 * (l1 + l2 + l3) + 8;
    std::complex<long double> acc = 0.0L;
    for (int i = 0; i < n; ++i) {
        const double th = std::acos(x[i]);
        for (int j = 0; j < nphi; ++j) {
            const double ph = 2.0 * static_cast<double>(PI_L) * j / nphi;
            const cplx v = ylm_explicit(l1, m1, th, ph) * ylm_explicit(l2, m2, th, ph) * std::conj(ylm_explicit(l3, m3, th, ph));
            acc += std::complex<long double>(v.real(), v.imag()) * static_cast<long double>(w[i]);
        }
    }
    acc *= 2.0L * PI_L / nphi;
    return static_cast<double>(acc.real());
}

}  // namespace oracle
