/*
 * Copyright (C) 2026 The phem Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/**
 * Special functions for spherical-wave expansions with complex arguments.
 *
 * Spherical-harmonic convention, used by every other header:
 *
 *   Y_lm(theta, phi) = N_lm P_l^m(cos theta) exp(i m phi),
 *   N_lm = sqrt((2l+1)/(4 pi) (l-m)!/(l+m)!),
 *
 * orthonormal over the unit sphere, with the Condon-Shortley phase carried by
 * P_l^m (so P_1^1(x) = -sqrt(1-x^2)) and Y_{l,-m} = (-1)^m conj(Y_lm).
 *
 * Harmonics of complex directions (evanescent plane waves) are the polynomial
 * continuation of the real-direction formulas: cos(theta) and sin(theta) are
 * passed separately as complex numbers and never reconstructed via sqrt.
 */

#ifndef PHEM_SPECFUN_HPP
#define PHEM_SPECFUN_HPP

#include <phem/core.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <mutex>
#include <vector>

namespace phem {

/// Largest supported multipole order of a sphere T-matrix.
inline constexpr int lmax_cap = 14;
inline constexpr int lmax_default = 7;

/// Orbital/azimuthal index pair with |m| <= l.
struct AngularIndex {
    int l = 0;
    int m = 0;

    constexpr AngularIndex() = default;
    constexpr AngularIndex(int l_, int m_) : l(l_), m(m_) {}
    constexpr bool valid() const noexcept { return l >= 0 && m >= -l && m <= l; }
    friend constexpr bool operator==(AngularIndex, AngularIndex) = default;
};

/// Flat index of (l, m) in tables running over l = 0..lmax, m = -l..l.
constexpr int lm_index(int l, int m) noexcept { return l * l + l + m; }
constexpr int lm_count(int lmax) noexcept { return (lmax + 1) * (lmax + 1); }

namespace detail {

inline void check_finite(cplx z, const char* who) {
    if (!is_finite(z)) throw InvalidArgument(std::string(who) + ": non-finite argument");
}

inline const std::array<long double, 171>& factorial_table() {
    static const std::array<long double, 171> table = [] {
        std::array<long double, 171> t{};
        t[0] = 1.0L;
        for (std::size_t i = 1; i < t.size(); ++i) t[i] = t[i - 1] * static_cast<long double>(i);
        return t;
    }();
    return table;
}

}  // namespace detail

inline long double factorial(int n) {
    if (n < 0 || n > 170) throw InvalidArgument("factorial: argument out of range");
    return detail::factorial_table()[static_cast<std::size_t>(n)];
}

/// (2n+1)!! = 1*3*5*...*(2n+1); double_factorial_odd(-1) == 1.
inline double double_factorial_odd(int n) {
    double r = 1.0;
    for (int k = 3; k <= 2 * n + 1; k += 2) r *= k;
    return r;
}

// ---------------------------------------------------------------------------
// Spherical Bessel and Hankel functions
// ---------------------------------------------------------------------------

/// j_l(z) for l = 0..lmax by Miller's downward recurrence, normalised against
/// whichever of the closed forms j_0, j_1 is larger in magnitude. Downward
/// recurrence is used for every z: j_l is the minimal solution once l > |z|,
/// and below that the two directions are equally stable.
inline std::vector<cplx> sph_bessel(int lmax, cplx z) {
    if (lmax < 0) throw InvalidArgument("sph_bessel: lmax must be >= 0");
    detail::check_finite(z, "sph_bessel");
    std::vector<cplx> out(static_cast<std::size_t>(lmax) + 1, cplx{});
    if (z == cplx{}) {
        out[0] = 1.0;
        return out;
    }
    const double az = std::abs(z);
    const int top = std::max(lmax, static_cast<int>(std::ceil(az)));
    const int start = top + 20 + static_cast<int>(std::ceil(std::sqrt(40.0 * top)));

    cplx f_next{0.0, 0.0};
    cplx f{1e-300, 0.0};
    cplx f0{}, f1{};
    std::vector<cplx> raw(static_cast<std::size_t>(std::max(lmax, 1)) + 1);
    for (int l = start; l >= 1; --l) {
        const cplx f_prev = static_cast<double>(2 * l + 1) / z * f - f_next;
        f_next = f;
        f = f_prev;  // now f = f_{l-1}, f_next = f_l
        if (l <= static_cast<int>(raw.size()) - 1) raw[static_cast<std::size_t>(l)] = f_next;
        if (std::abs(f) > 1e200) {
            f *= 1e-200;
            f_next *= 1e-200;
            for (auto& v : raw) v *= 1e-200;
        }
    }
    raw[0] = f;
    f0 = raw[0];
    f1 = raw[1];
    const cplx s = std::sin(z);
    const cplx c = std::cos(z);
    const cplx j0 = s / z;
    cplx scale;
    if (std::abs(f0) >= std::abs(f1)) {
        scale = j0 / f0;
    } else {
        const cplx j1 = s / (z * z) - c / z;
        scale = j1 / f1;
    }
    for (int l = 0; l <= lmax; ++l) out[static_cast<std::size_t>(l)] = raw[static_cast<std::size_t>(l)] * scale;
    return out;
}

/// h^(1)_l(z) for l = 0..lmax by upward recurrence from the closed forms.
inline std::vector<cplx> sph_hankel1(int lmax, cplx z) {
    if (lmax < 0) throw InvalidArgument("sph_hankel1: lmax must be >= 0");
    detail::check_finite(z, "sph_hankel1");
    if (z == cplx{}) throw SingularArgument("sph_hankel1: z = 0 is a singular point");
    std::vector<cplx> h(static_cast<std::size_t>(lmax) + 1);
    const cplx e = std::exp(I * z);
    h[0] = -I * e / z;
    if (lmax >= 1) h[1] = -e * (z + I) / (z * z);
    for (int l = 1; l < lmax; ++l)
        h[static_cast<std::size_t>(l) + 1] =
            static_cast<double>(2 * l + 1) / z * h[static_cast<std::size_t>(l)] - h[static_cast<std::size_t>(l) - 1];
    return h;
}

/// h^(2)_l(z) for l = 0..lmax. Decays in the lower half-plane.
inline std::vector<cplx> sph_hankel2(int lmax, cplx z) {
    if (lmax < 0) throw InvalidArgument("sph_hankel2: lmax must be >= 0");
    detail::check_finite(z, "sph_hankel2");
    if (z == cplx{}) throw SingularArgument("sph_hankel2: z = 0 is a singular point");
    std::vector<cplx> h(static_cast<std::size_t>(lmax) + 1);
    const cplx e = std::exp(-I * z);
    h[0] = I * e / z;
    if (lmax >= 1) h[1] = -e * (z - I) / (z * z);
    for (int l = 1; l < lmax; ++l)
        h[static_cast<std::size_t>(l) + 1] =
            static_cast<double>(2 * l + 1) / z * h[static_cast<std::size_t>(l)] - h[static_cast<std::size_t>(l) - 1];
    return h;
}

/// y_l(z) = -i (h^(1)_l - j_l).
inline std::vector<cplx> sph_neumann(int lmax, cplx z) {
    auto h = sph_hankel1(lmax, z);
    const auto j = sph_bessel(lmax, z);
    for (std::size_t l = 0; l < h.size(); ++l) h[l] = -I * (h[l] - j[l]);
    return h;
}

/// f'_l from a table f_0..f_{lmax+1} of any spherical Bessel-type function.
inline std::vector<cplx> sph_derivative(const std::vector<cplx>& f, cplx z) {
    std::vector<cplx> d(f.size() - 1);
    d[0] = -f[1];
    for (std::size_t l = 1; l < d.size(); ++l) d[l] = f[l - 1] - static_cast<double>(l + 1) / z * f[l];
    return d;
}

// ---------------------------------------------------------------------------
// Associated Legendre functions and spherical harmonics
// ---------------------------------------------------------------------------

/// Table of P_l^m (Condon-Shortley phase, unnormalised) for 0 <= m <= l <= lmax.
/// Entry (l, m) lives at index l*(l+1)/2 + m.
template <class T>
std::vector<T> assoc_legendre_table(int lmax, T x, T s) {
    std::vector<T> p(static_cast<std::size_t>((lmax + 1) * (lmax + 2) / 2));
    auto at = [&](int l, int m) -> T& { return p[static_cast<std::size_t>(l * (l + 1) / 2 + m)]; };
    T pmm = T(1);
    for (int m = 0; m <= lmax; ++m) {
        if (m > 0) pmm *= -static_cast<double>(2 * m - 1) * s;
        at(m, m) = pmm;
        if (m + 1 <= lmax) at(m + 1, m) = static_cast<double>(2 * m + 1) * x * pmm;
        for (int l = m + 2; l <= lmax; ++l)
            at(l, m) = (static_cast<double>(2 * l - 1) * x * at(l - 1, m) - static_cast<double>(l + m - 1) * at(l - 2, m)) /
                       static_cast<double>(l - m);
    }
    return p;
}

inline constexpr int legendre_index(int l, int m) noexcept { return l * (l + 1) / 2 + m; }

/// P_l^m(x) for real |x| <= 1.
inline std::vector<double> assoc_legendre(int lmax, double x) {
    if (lmax < 0) throw InvalidArgument("assoc_legendre: lmax must be >= 0");
    if (!(std::abs(x) <= 1.0)) throw InvalidArgument("assoc_legendre: |x| must be <= 1");
    const double s = std::sqrt(std::max(0.0, (1.0 - x) * (1.0 + x)));
    return assoc_legendre_table<double>(lmax, x, s);
}

inline double ylm_norm(int l, int m) {
    const int am = std::abs(m);
    return static_cast<double>(
        std::sqrt(static_cast<long double>(2 * l + 1) / (4.0L * std::numbers::pi_v<long double>) * factorial(l - am) /
                  factorial(l + am)));
}

/// Y_lm for all l <= lmax, indexed by lm_index. The direction is given by
/// cos(theta), sin(theta) (complex for evanescent waves) and exp(i phi).
/// Negative m uses Y_{l,-m} = (-1)^m N_lm P_l^m exp(-i m phi), which keeps the
/// result analytic in the direction cosines.
inline std::vector<cplx> spherical_harmonics(int lmax, cplx cos_t, cplx sin_t, cplx eiphi) {
    const auto p = assoc_legendre_table<cplx>(lmax, cos_t, sin_t);
    std::vector<cplx> y(static_cast<std::size_t>(lm_count(lmax)));
    std::vector<cplx> epow(static_cast<std::size_t>(lmax) + 1);
    epow[0] = 1.0;
    for (int m = 1; m <= lmax; ++m) epow[static_cast<std::size_t>(m)] = epow[static_cast<std::size_t>(m) - 1] * eiphi;
    for (int l = 0; l <= lmax; ++l) {
        for (int m = 0; m <= l; ++m) {
            const cplx base = ylm_norm(l, m) * p[static_cast<std::size_t>(legendre_index(l, m))];
            const cplx em = epow[static_cast<std::size_t>(m)];
            y[static_cast<std::size_t>(lm_index(l, m))] = base * em;
            if (m > 0) {
                // exp(-i m phi) = 1/exp(i m phi) for a real azimuth
                const double sign = (m % 2 == 0) ? 1.0 : -1.0;
                y[static_cast<std::size_t>(lm_index(l, -m))] = sign * base / em;
            }
        }
    }
    return y;
}

/// Harmonics of a real unit direction given by its polar angles.
inline std::vector<cplx> spherical_harmonics(int lmax, double theta, double phi) {
    return spherical_harmonics(lmax, std::cos(theta), std::sin(theta), std::exp(I * phi));
}

// ---------------------------------------------------------------------------
// Wigner 3j symbols and Gaunt coefficients
// ---------------------------------------------------------------------------

/// Wigner 3j symbol by the Racah sum, evaluated in long double.
inline double wigner3j(int j1, int j2, int j3, int m1, int m2, int m3) {
    if (m1 + m2 + m3 != 0) return 0.0;
    if (j3 < std::abs(j1 - j2) || j3 > j1 + j2) return 0.0;
    if (std::abs(m1) > j1 || std::abs(m2) > j2 || std::abs(m3) > j3) return 0.0;
    const auto& f = detail::factorial_table();
    auto F = [&](int n) { return f[static_cast<std::size_t>(n)]; };
    const long double delta = F(j1 + j2 - j3) * F(j1 - j2 + j3) * F(-j1 + j2 + j3) / F(j1 + j2 + j3 + 1);
    const long double pre = std::sqrt(delta * F(j1 + m1) * F(j1 - m1) * F(j2 + m2) * F(j2 - m2) * F(j3 + m3) * F(j3 - m3));
    const int kmin = std::max({0, j2 - j3 - m1, j1 - j3 + m2});
    const int kmax = std::min({j1 + j2 - j3, j1 - m1, j2 + m2});
    long double sum = 0.0L, biggest = 0.0L;
    for (int k = kmin; k <= kmax; ++k) {
        const long double term =
            1.0L / (F(k) * F(j3 - j2 + k + m1) * F(j3 - j1 + k - m2) * F(j1 + j2 - j3 - k) * F(j1 - k - m1) * F(j2 - k + m2));
        sum += (k % 2 == 0) ? term : -term;
        biggest = std::max(biggest, term);
    }
    // Accidental zeros of the symbol are exact; do not leave rounding residue.
    if (std::fabs(sum) < 1e-15L * biggest) return 0.0;
    const int phase = j1 - j2 - m3;
    const long double r = pre * sum * ((((phase % 2) + 2) % 2 == 0) ? 1.0L : -1.0L);
    return static_cast<double>(r);
}

/// Integral of Y_{a1} Y_{a2} conj(Y_{a3}) over the unit sphere. Exact zero
/// whenever a selection rule fails.
inline double gaunt(AngularIndex a1, AngularIndex a2, AngularIndex a3) {
    if (!a1.valid() || !a2.valid() || !a3.valid()) return 0.0;
    if (a3.m != a1.m + a2.m) return 0.0;
    if ((a1.l + a2.l + a3.l) % 2 != 0) return 0.0;
    if (a3.l < std::abs(a1.l - a2.l) || a3.l > a1.l + a2.l) return 0.0;
    const double w0 = wigner3j(a1.l, a2.l, a3.l, 0, 0, 0);
    const double wm = wigner3j(a1.l, a2.l, a3.l, a1.m, a2.m, -a3.m);
    const double pre = std::sqrt((2.0 * a1.l + 1.0) * (2.0 * a2.l + 1.0) * (2.0 * a3.l + 1.0) / (4.0 * pi));
    const double sign = (a3.m % 2 == 0) ? 1.0 : -1.0;
    return sign * pre * w0 * wm;
}

/// Precomputed gaunt(l1 m1, l2 m2, l3 m3) for l1, l3 <= lmax and l2 <= 2*lmax.
/// m2 is implied by m3 - m1. Instances are immutable after construction.
class GauntTable {
public:
    explicit GauntTable(int lmax) : lmax_(lmax), lmax2_(2 * lmax) {
        const int n = lm_count(lmax);
        values_.assign(static_cast<std::size_t>(n) * n * (lmax2_ + 1), 0.0);
        for (int l1 = 0; l1 <= lmax; ++l1)
            for (int m1 = -l1; m1 <= l1; ++m1)
                for (int l3 = 0; l3 <= lmax; ++l3)
                    for (int m3 = -l3; m3 <= l3; ++m3)
                        for (int l2 = std::abs(l1 - l3); l2 <= l1 + l3; l2 += 2)
                            at(l1, m1, l2, l3, m3) = gaunt({l1, m1}, {l2, m3 - m1}, {l3, m3});
    }

    int lmax() const noexcept { return lmax_; }

    double operator()(int l1, int m1, int l2, int l3, int m3) const {
        return values_[offset(l1, m1, l2, l3, m3)];
    }

    /// Shared instance per lmax.
    static const GauntTable& get(int lmax) {
        static std::mutex mtx;
        static std::array<std::unique_ptr<GauntTable>, 2 * lmax_cap + 3> cache;
        if (lmax < 0 || lmax > 2 * lmax_cap + 2) throw InvalidArgument("GauntTable: lmax out of range");
        std::lock_guard<std::mutex> lock(mtx);
        auto& slot = cache[static_cast<std::size_t>(lmax)];
        if (!slot) slot = std::make_unique<GauntTable>(lmax);
        return *slot;
    }

private:
    std::size_t offset(int l1, int m1, int l2, int l3, int m3) const {
        const auto n = static_cast<std::size_t>(lm_count(lmax_));
        return (static_cast<std::size_t>(lm_index(l1, m1)) * n + static_cast<std::size_t>(lm_index(l3, m3))) *
                   static_cast<std::size_t>(lmax2_ + 1) +
               static_cast<std::size_t>(l2);
    }
    double& at(int l1, int m1, int l2, int l3, int m3) { return values_[offset(l1, m1, l2, l3, m3)]; }

    int lmax_;
    int lmax2_;
    std::vector<double> values_;
};

// ---------------------------------------------------------------------------
// Faddeeva function w(z) = exp(-z^2) erfc(-i z) and complex erfc
// ---------------------------------------------------------------------------

namespace detail {

// Weideman's rational expansion, valid in the closed upper half plane.
struct WeidemanCoefficients {
    static constexpr int N = 64;
    double L = 0.0;
    std::array<double, N> a{};

    WeidemanCoefficients() {
        const int M = 2 * N;
        const int M2 = 2 * M;
        L = std::sqrt(N / std::sqrt(2.0));
        // f sampled on k = -M+1..M-1, shifted so that index 0 holds the k=0 sample
        std::vector<double> f(static_cast<std::size_t>(M2), 0.0);
        for (int k = -M + 1; k <= M - 1; ++k) {
            const double theta = k * pi / M;
            const double t = L * std::tan(theta / 2.0);
            const double val = std::exp(-t * t) * (L * L + t * t);
            f[static_cast<std::size_t>((k + M2) % M2)] = val;
        }
        // a_j = Re(DFT(f))_j / M2 for j = 1..N, then reversed for Horner.
        for (int j = 1; j <= N; ++j) {
            long double acc = 0.0L;
            for (int n = 0; n < M2; ++n)
                acc += static_cast<long double>(f[static_cast<std::size_t>(n)]) *
                       std::cos(2.0L * std::numbers::pi_v<long double> * j * n / M2);
            a[static_cast<std::size_t>(N - j)] = static_cast<double>(acc / M2);
        }
    }
};

inline const WeidemanCoefficients& weideman() {
    static const WeidemanCoefficients c;
    return c;
}

inline cplx faddeeva_upper(cplx z) {
    const double az = std::abs(z);
    if (az > 12.0) {
        // Laplace continued fraction, evaluated bottom-up.
        cplx frac{0.0, 0.0};
        for (int k = 40; k >= 1; --k) frac = (0.5 * k) / (z - frac);
        return I / std::sqrt(pi) / (z - frac);
    }
    const auto& c = weideman();
    const cplx Z = (c.L + I * z) / (c.L - I * z);
    cplx p = 0.0;
    for (double coef : c.a) p = p * Z + coef;
    const cplx d = c.L - I * z;
    return 2.0 * p / (d * d) + 1.0 / (std::sqrt(pi) * d);
}

}  // namespace detail

inline cplx faddeeva(cplx z) {
    if (z.imag() >= 0.0) return detail::faddeeva_upper(z);
    return 2.0 * std::exp(-z * z) - detail::faddeeva_upper(-z);
}

inline cplx erfc_complex(cplx z) {
    if (z.real() >= 0.0) return std::exp(-z * z) * detail::faddeeva_upper(I * z);
    return 2.0 - std::exp(-z * z) * detail::faddeeva_upper(-I * z);
}

}  // namespace phem

#endif  // PHEM_SPECFUN_HPP
