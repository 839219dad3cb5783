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

// Two-dimensional Bravais lattices, diffraction orders and the lattice sums
// that couple the spheres of one plane.
//
// The sums are
//
//   D_{lm}(q, k) = sum_{R != 0} exp(i k.R) h_l(q|R|) Y_lm(-R/|R|),
//
// evaluated by a two-dimensional Ewald split of the Green's function
// exp(iq|r-R|)/|r-R|. With splitting parameter E the integral
// representation  exp(iq rho)/rho = (2/sqrt(pi)) int_0^inf exp(-rho^2 t^2 + q^2/4t^2) dt
// is cut at t = E; the part below E is summed in reciprocal space, the part
// above in real space, and the R = 0 image is subtracted from the former.

#ifndef PHEM_LATTICE_HPP
#define PHEM_LATTICE_HPP

#include <phem/core.hpp>
#include <phem/specfun.hpp>
#include <phem/vsh.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <tuple>
#include <vector>

namespace phem {

using Vec2 = std::array<double, 2>;

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a[0] + b[0], a[1] + b[1]}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a[0] - b[0], a[1] - b[1]}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a[0], s * a[1]}; }
inline double dot(Vec2 a, Vec2 b) { return a[0] * b[0] + a[1] * b[1]; }
inline double norm(Vec2 a) { return std::hypot(a[0], a[1]); }

struct Lattice2D {
    Vec2 a1{1.0, 0.0};
    Vec2 a2{0.0, 1.0};

    double area() const { return std::abs(a1[0] * a2[1] - a1[1] * a2[0]); }

    void validate() const {
        const double scale = norm(a1) * norm(a2);
        if (!(scale > 0.0) || !std::isfinite(scale) || area() <= 1e-12 * scale)
            throw InvalidArgument("lattice basis vectors are degenerate");
    }

    static Lattice2D square(double a) { return {{a, 0.0}, {0.0, a}}; }
    static Lattice2D hexagonal(double a) { return {{a, 0.0}, {0.5 * a, 0.5 * std::sqrt(3.0) * a}}; }

    friend bool operator==(const Lattice2D&, const Lattice2D&) = default;
};

/// b_i . a_j = 2 pi delta_ij.
inline std::pair<Vec2, Vec2> reciprocal_basis(const Lattice2D& lat) {
    lat.validate();
    const double det = lat.a1[0] * lat.a2[1] - lat.a1[1] * lat.a2[0];
    const double f = 2.0 * pi / det;
    return {Vec2{f * lat.a2[1], -f * lat.a2[0]}, Vec2{-f * lat.a1[1], f * lat.a1[0]}};
}

/// k = kpar + n1 b1 + n2 b2 with kpar in the first Brillouin zone.
struct FoldedKpar {
    Vec2 kpar{};
    int n1 = 0;
    int n2 = 0;
};

inline FoldedKpar fold_kpar(const Lattice2D& lat, Vec2 k) {
    const auto [b1, b2] = reciprocal_basis(lat);
    const int c1 = static_cast<int>(std::lround(dot(k, lat.a1) / (2.0 * pi)));
    const int c2 = static_cast<int>(std::lround(dot(k, lat.a2) / (2.0 * pi)));
    FoldedKpar best{k, 0, 0};
    double best_norm = norm(k);
    bool first = true;
    for (int n1 = c1 - 2; n1 <= c1 + 2; ++n1)
        for (int n2 = c2 - 2; n2 <= c2 + 2; ++n2) {
            const Vec2 r = k - (static_cast<double>(n1) * b1 + static_cast<double>(n2) * b2);
            const double nr = norm(r);
            // Zone-boundary ties resolve to the lexicographically smallest shift.
            if (first || nr < best_norm - 1e-12 * (1.0 + best_norm)) {
                best = {r, n1, n2};
                best_norm = nr;
                first = false;
            }
        }
    return best;
}

struct Beam {
    int n1 = 0, n2 = 0;
    Vec2 g{};
    Vec2 k{};  // kpar + g
    double kmag = 0.0;
};

/// Diffraction orders for one (omega, kpar).
struct BeamSet {
    double omega = 0.0;
    Vec2 kpar{};       // folded
    int fold_n1 = 0;   // the caller's k equals kpar + fold_n1 b1 + fold_n2 b2
    int fold_n2 = 0;
    Material ambient{};
    double cutoff = 0.0;
    std::vector<Beam> beams;

    std::size_t size() const noexcept { return beams.size(); }

    cplx kz(std::size_t i, const Material& m) const {
        const double k2 = beams[i].kmag * beams[i].kmag;
        return sqrt_branch(m.eps * omega * omega - k2);
    }
    cplx kz(std::size_t i) const { return kz(i, ambient); }

    bool propagating(std::size_t i, const Material& m) const {
        return m.lossless() && m.eps.real() * omega * omega - beams[i].kmag * beams[i].kmag > 0.0;
    }
    bool propagating(std::size_t i) const { return propagating(i, ambient); }

    int index_of(int n1, int n2) const {
        for (std::size_t i = 0; i < beams.size(); ++i)
            if (beams[i].n1 == n1 && beams[i].n2 == n2) return static_cast<int>(i);
        return -1;
    }
    /// Beam carrying the caller's (unfolded) parallel wavevector.
    int specular_index() const { return index_of(fold_n1, fold_n2); }
};

inline BeamSet beam_set(const Lattice2D& lat, double omega, Vec2 kpar, const Material& ambient, double cutoff) {
    if (!(omega > 0.0) || !std::isfinite(omega)) throw InvalidArgument("beam_set: omega must be positive");
    if (!(cutoff >= omega * std::sqrt(std::abs(ambient.eps)) * (1.0 - 1e-12)))
        throw InvalidArgument("beam_set: cutoff must be at least omega*sqrt|eps| so that every propagating order is kept");
    if (norm(kpar) > cutoff) throw InvalidArgument("beam_set: cutoff excludes the specular beam");
    const auto [b1, b2] = reciprocal_basis(lat);
    const FoldedKpar f = fold_kpar(lat, kpar);
    BeamSet bs;
    bs.omega = omega;
    bs.kpar = f.kpar;
    bs.fold_n1 = f.n1;
    bs.fold_n2 = f.n2;
    bs.ambient = ambient;
    bs.cutoff = cutoff;
    const double area_b = std::abs(b1[0] * b2[1] - b1[1] * b2[0]);
    const int n1max = static_cast<int>(std::ceil((cutoff + norm(f.kpar)) * norm(b2) / area_b)) + 1;
    const int n2max = static_cast<int>(std::ceil((cutoff + norm(f.kpar)) * norm(b1) / area_b)) + 1;
    const double lim = cutoff * (1.0 + 1e-12);
    for (int n1 = -n1max; n1 <= n1max; ++n1)
        for (int n2 = -n2max; n2 <= n2max; ++n2) {
            Beam b;
            b.n1 = n1;
            b.n2 = n2;
            b.g = static_cast<double>(n1) * b1 + static_cast<double>(n2) * b2;
            b.k = f.kpar + b.g;
            b.kmag = norm(b.k);
            if (b.kmag <= lim) bs.beams.push_back(b);
        }
    std::sort(bs.beams.begin(), bs.beams.end(), [](const Beam& x, const Beam& y) {
        const auto qx = std::llround(x.kmag * 1e9), qy = std::llround(y.kmag * 1e9);
        return std::tie(qx, x.n1, x.n2) < std::tie(qy, y.n1, y.n2);
    });
    return bs;
}

// ---------------------------------------------------------------------------
// Lattice sums
// ---------------------------------------------------------------------------

namespace detail {

inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
    std::vector<double> x(static_cast<std::size_t>(n)), w(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        long double z = std::cos(pi * (i + 0.75) / (n + 0.5));
        long double dp = 1.0L;
        for (int it = 0; it < 100; ++it) {
            long double p0 = 1.0L, p1 = z;
            for (int k = 2; k <= n; ++k) {
                const long double p2 = ((2.0L * k - 1.0L) * z * p1 - (k - 1.0L) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1.0L, p1 = z;
            dp = n * (z * p1 - p0) / (z * z - 1.0L);
            const long double dz = p1 / dp;
            z -= dz;
            if (std::fabs(dz) < 1e-18L) break;
        }
        x[static_cast<std::size_t>(i)] = static_cast<double>(z);
        w[static_cast<std::size_t>(i)] = static_cast<double>(2.0L / ((1.0L - z * z) * dp * dp));
    }
    return {x, w};
}

// Angular factors of the reciprocal-space term, one per (L, M, n) with L+M
// even and p = L - 2n >= |M|:
//   2 pi 2^-p C(p, (p+M)/2) (-1)^n / (p! n!) int_{-1}^{1} N_LM P_L^M(x) (1-x^2)^{p/2} x^{2n} dx
struct ReciprocalTable {
    int lam_max = 0;
    std::vector<double> coef;  // [lm_index(L,M) * (lam_max/2 + 1) + n]
    int stride = 0;
    double at(int L, int M, int n) const {
        return coef[static_cast<std::size_t>(lm_index(L, M) * stride + n)];
    }
};

inline ReciprocalTable make_reciprocal_table(int lam_max) {
    ReciprocalTable t;
    t.lam_max = lam_max;
    t.stride = lam_max / 2 + 1;
    t.coef.assign(static_cast<std::size_t>(lm_count(lam_max) * t.stride), 0.0);
    const auto [x, w] = gauss_legendre(lam_max + 2);
    std::vector<std::vector<cplx>> ys;
    for (double xi : x) ys.push_back(spherical_harmonics(lam_max, xi, std::sqrt(1.0 - xi * xi), 1.0));
    for (int L = 0; L <= lam_max; ++L)
        for (int M = -L; M <= L; ++M) {
            if ((L + M) % 2) continue;
            for (int n = 0; 2 * n <= L - std::abs(M); ++n) {
                const int p = L - 2 * n;
                long double integral = 0.0L;
                for (std::size_t i = 0; i < x.size(); ++i) {
                    const double s2 = 1.0 - x[i] * x[i];
                    integral += static_cast<long double>(w[i]) * ys[i][static_cast<std::size_t>(lm_index(L, M))].real() *
                                std::pow(s2, 0.5 * p) * std::pow(x[i], 2 * n);
                }
                long double binom = 1.0L;
                const int k = (p + M) / 2;
                for (int j = 1; j <= k; ++j) binom = binom * (p - k + j) / j;
                const long double c = 2.0L * pi * std::pow(2.0L, -p) * binom * ((n % 2) ? -1.0L : 1.0L) /
                                      (factorial(p) * factorial(n)) * integral;
                t.coef[static_cast<std::size_t>(lm_index(L, M) * t.stride + n)] = static_cast<double>(c);
            }
        }
    return t;
}

inline const ReciprocalTable& reciprocal_table(int lam_max) {
    static std::mutex mtx;
    static std::map<int, std::unique_ptr<ReciprocalTable>> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto& slot = cache[lam_max];
    if (!slot) slot = std::make_unique<ReciprocalTable>(make_reciprocal_table(lam_max));
    return *slot;
}

// Generalised exponential integral E_nu(x) by its continued fraction
// (modified Lentz). Valid away from the negative real axis, fast for |x| > 1.
inline cplx expint_cf(double nu, cplx x) {
    const double tiny = 1e-300;
    cplx b = x + nu;
    cplx c = 1.0 / tiny;
    cplx d = 1.0 / b;
    cplx h = d;
    for (int i = 1; i < 2000; ++i) {
        const double an = -i * (nu - 1.0 + i);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        const cplx del = c * d;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) return h * std::exp(-x);
    }
    throw ConvergenceFailure("expint continued fraction did not converge at x = " + format_complex(x));
}

// G_n(kappa) = int_0^E t^(2n-2) exp(-kappa^2 / 4t^2) dt, n = 0..nmax.
inline void ewald_g(cplx kappa, double E, int nmax, std::vector<cplx>& g) {
    g.resize(static_cast<std::size_t>(nmax) + 1);
    const cplx x = kappa * kappa / (4.0 * E * E);
    if (x.real() > 1.0 && std::abs(x) > 1.5) {
        double epow = 1.0 / E;
        for (int n = 0; n <= nmax; ++n) {
            g[static_cast<std::size_t>(n)] = epow * 0.5 * expint_cf(n + 0.5, x);
            epow *= E * E;
        }
        return;
    }
    if (std::abs(kappa) < 1e-10)
        throw ConvergenceFailure("lattice sum at a Wood anomaly: a diffraction order is exactly grazing");
    const cplx ex = std::exp(-x);
    g[0] = std::sqrt(pi) / kappa * erfc_complex(kappa / (2.0 * E));
    double epow = 1.0 / E;
    for (int n = 1; n <= nmax; ++n) {
        epow *= E * E;
        g[static_cast<std::size_t>(n)] = (epow * ex - 0.5 * kappa * kappa * g[static_cast<std::size_t>(n) - 1]) / (2.0 * n - 1.0);
    }
}

// K_L(R) = int_E^inf t^(2L) exp(-R^2 t^2 + q^2/4t^2) dt, L = 0..lmax.
inline void ewald_k(double R, cplx q, double E, int lmax, std::vector<cplx>& k) {
    k.resize(static_cast<std::size_t>(lmax) + 1);
    const cplx pre = std::exp(-R * R * E * E + q * q / (4.0 * E * E));
    const cplx z1 = I * R * E + q / (2.0 * E);
    const cplx z2 = I * R * E - q / (2.0 * E);
    const cplx w1 = faddeeva(z1), w2 = faddeeva(z2);
    const double sp = std::sqrt(pi);
    cplx km1 = sp / (2.0 * I * q) * pre * (w1 - w2);
    cplx k0 = sp / (4.0 * R) * pre * (w1 + w2);
    k[0] = k0;
    double epow = 1.0 / E;
    cplx prev2 = km1, prev1 = k0;
    for (int L = 1; L <= lmax; ++L) {
        epow *= E * E;
        const cplx kl = ((2.0 * L - 1.0) * prev1 - 0.5 * q * q * prev2 + epow * pre) / (2.0 * R * R);
        k[static_cast<std::size_t>(L)] = kl;
        prev2 = prev1;
        prev1 = kl;
    }
}

}  // namespace detail

/// Default Ewald parameter sqrt(pi / cell area), raised when q/2E would exceed 2
/// (large q/2E costs digits through exp(q^2/4E^2) cancellation).
inline double default_ewald_eta(const Lattice2D& lat, cplx q) {
    return std::max(std::sqrt(pi / lat.area()), std::abs(q) / 4.0);
}

/// D_{lm}, l <= lam_max, indexed by lm_index, by Ewald summation.
inline std::vector<cplx> lattice_sums(const Lattice2D& lat, cplx q, Vec2 k, int lam_max, double eta = 0.0) {
    lat.validate();
    if (!is_finite(q) || q.imag() < 0.0 || std::abs(q) == 0.0) throw InvalidArgument("lattice_sums: bad wavenumber");
    const double E = eta > 0.0 ? eta : default_ewald_eta(lat, q);
    const double A = lat.area();
    const auto [b1, b2] = reciprocal_basis(lat);
    const int nl = lm_count(lam_max);
    std::vector<cplx> a(static_cast<std::size_t>(nl), cplx{});
    const double reach = 6.8 + std::sqrt(static_cast<double>(lam_max));

    // Reciprocal-space part.
    {
        const auto& tab = detail::reciprocal_table(lam_max);
        const double kmax = 2.0 * E * reach + std::abs(q);
        const double area_b = std::abs(b1[0] * b2[1] - b1[1] * b2[0]);
        const int n1max = static_cast<int>(std::ceil((kmax + norm(k)) * norm(b2) / area_b)) + 1;
        const int n2max = static_cast<int>(std::ceil((kmax + norm(k)) * norm(b1) / area_b)) + 1;
        std::vector<cplx> g, kpow(static_cast<std::size_t>(lam_max) + 1), eim(static_cast<std::size_t>(2 * lam_max + 1));
        std::vector<cplx> acc(static_cast<std::size_t>(nl), cplx{});
        for (int n1 = -n1max; n1 <= n1max; ++n1)
            for (int n2 = -n2max; n2 <= n2max; ++n2) {
                const Vec2 K = k + (static_cast<double>(n1) * b1 + static_cast<double>(n2) * b2);
                const double km = norm(K);
                if (km > kmax) continue;
                const cplx kz = sqrt_branch(q * q - km * km);
                detail::ewald_g(-I * kz, E, lam_max / 2, g);
                kpow[0] = 1.0;
                for (int p = 1; p <= lam_max; ++p) kpow[static_cast<std::size_t>(p)] = kpow[static_cast<std::size_t>(p) - 1] * (I * km);
                const cplx emi = km > 0.0 ? cplx(K[0] / km, -K[1] / km) : cplx(1.0, 0.0);  // exp(-i phi)
                eim[static_cast<std::size_t>(lam_max)] = 1.0;
                for (int M = 1; M <= lam_max; ++M) {
                    eim[static_cast<std::size_t>(lam_max + M)] = eim[static_cast<std::size_t>(lam_max + M - 1)] * emi;
                    eim[static_cast<std::size_t>(lam_max - M)] = std::conj(eim[static_cast<std::size_t>(lam_max + M)]);
                }
                for (int L = 0; L <= lam_max; ++L)
                    for (int M = -L; M <= L; M += 1) {
                        if ((L + M) % 2) continue;
                        cplx s{};
                        for (int n = 0; 2 * n <= L - std::abs(M); ++n)
                            s += tab.at(L, M, n) * kpow[static_cast<std::size_t>(L - 2 * n)] * g[static_cast<std::size_t>(n)];
                        acc[static_cast<std::size_t>(lm_index(L, M))] += s * eim[static_cast<std::size_t>(lam_max + M)];
                    }
            }
        const double pref = 2.0 / std::sqrt(pi) * pi / A;
        cplx qpow = 1.0;
        for (int L = 0; L <= lam_max; ++L) {
            const double df = double_factorial_odd(L);  // (2L+1)!!
            for (int M = -L; M <= L; ++M) a[static_cast<std::size_t>(lm_index(L, M))] += pref * df / qpow * acc[static_cast<std::size_t>(lm_index(L, M))];
            qpow *= q;
        }
    }

    // Real-space part.
    {
        const double rmax = reach / E;
        const double hmin1 = A / norm(lat.a2), hmin2 = A / norm(lat.a1);
        const int n1max = static_cast<int>(std::ceil(rmax / hmin1)) + 1;
        const int n2max = static_cast<int>(std::ceil(rmax / hmin2)) + 1;
        const auto yeq = spherical_harmonics(lam_max, 0.0, 1.0, 1.0);  // N_LM P_L^M(0)
        std::vector<cplx> kl, acc(static_cast<std::size_t>(nl), cplx{});
        std::vector<cplx> eim(static_cast<std::size_t>(2 * lam_max + 1));
        for (int n1 = -n1max; n1 <= n1max; ++n1)
            for (int n2 = -n2max; n2 <= n2max; ++n2) {
                if (n1 == 0 && n2 == 0) continue;
                const Vec2 R = static_cast<double>(n1) * lat.a1 + static_cast<double>(n2) * lat.a2;
                const double r = norm(R);
                if (r > rmax) continue;
                detail::ewald_k(r, q, E, lam_max, kl);
                const cplx phase = std::exp(I * dot(k, R));
                const cplx emi(R[0] / r, -R[1] / r);
                eim[static_cast<std::size_t>(lam_max)] = 1.0;
                for (int M = 1; M <= lam_max; ++M) {
                    eim[static_cast<std::size_t>(lam_max + M)] = eim[static_cast<std::size_t>(lam_max + M - 1)] * emi;
                    eim[static_cast<std::size_t>(lam_max - M)] = std::conj(eim[static_cast<std::size_t>(lam_max + M)]);
                }
                double rpow = 1.0;
                for (int L = 0; L <= lam_max; ++L) {
                    const cplx base = phase * rpow * kl[static_cast<std::size_t>(L)];
                    for (int M = -L; M <= L; M += 2)
                        acc[static_cast<std::size_t>(lm_index(L, M))] +=
                            base * yeq[static_cast<std::size_t>(lm_index(L, M))].real() * eim[static_cast<std::size_t>(lam_max + M)];
                    rpow *= r;
                }
            }
        cplx f = 4.0 * pi * 2.0 / std::sqrt(pi);
        for (int L = 0; L <= lam_max; ++L) {
            for (int M = -L; M <= L; ++M) a[static_cast<std::size_t>(lm_index(L, M))] += f * acc[static_cast<std::size_t>(lm_index(L, M))];
            f *= 2.0 / q;
        }
    }

    // Remove the R = 0 image from the reciprocal part.
    {
        const cplx g1 = E * std::exp(q * q / (4.0 * E * E)) + I * q * std::sqrt(pi) / 2.0 * erfc_complex(-I * q / (2.0 * E));
        a[0] -= 4.0 * g1;
    }

    std::vector<cplx> d(static_cast<std::size_t>(nl));
    const cplx norm_f = 1.0 / (4.0 * pi * I * q);
    for (int L = 0; L <= lam_max; ++L)
        for (int M = -L; M <= L; ++M) {
            const double s = ((L + M) % 2 == 0) ? 1.0 : -1.0;
            d[static_cast<std::size_t>(lm_index(L, M))] = s * norm_f * a[static_cast<std::size_t>(lm_index(L, -M))];
        }
    for (const auto& v : d)
        if (!is_finite(v)) throw ConvergenceFailure("lattice sum produced a non-finite value (q = " + format_complex(q) + ")");
    return d;
}

/// Plain real-space summation over |R| <= rmax. Converges only for lossy hosts;
/// kept as a cross-check of the Ewald path.
inline std::vector<cplx> lattice_sums_direct(const Lattice2D& lat, cplx q, Vec2 k, int lam_max, double rmax) {
    lat.validate();
    const int nl = lm_count(lam_max);
    std::vector<cplx> d(static_cast<std::size_t>(nl), cplx{});
    const double A = lat.area();
    const int n1max = static_cast<int>(std::ceil(rmax * norm(lat.a2) / A)) + 1;
    const int n2max = static_cast<int>(std::ceil(rmax * norm(lat.a1) / A)) + 1;
    for (int n1 = -n1max; n1 <= n1max; ++n1)
        for (int n2 = -n2max; n2 <= n2max; ++n2) {
            if (n1 == 0 && n2 == 0) continue;
            const Vec2 R = static_cast<double>(n1) * lat.a1 + static_cast<double>(n2) * lat.a2;
            const double r = norm(R);
            if (r > rmax) continue;
            const auto h = sph_hankel1(lam_max, q * r);
            const auto y = spherical_harmonics(lam_max, 0.0, 1.0, cplx(-R[0] / r, -R[1] / r));
            const cplx phase = std::exp(I * dot(k, R));
            for (int L = 0; L <= lam_max; ++L)
                for (int M = -L; M <= L; M += 2)
                    d[static_cast<std::size_t>(lm_index(L, M))] +=
                        phase * h[static_cast<std::size_t>(L)] * y[static_cast<std::size_t>(lm_index(L, M))];
        }
    return d;
}

// ---------------------------------------------------------------------------
// Structure constants with memoisation
// ---------------------------------------------------------------------------

struct StructureOptions {
    double eta = 0.0;            // 0 selects default_ewald_eta
    bool direct = false;         // test-only: plain real-space sum
    double direct_rmax = 60.0;
};

struct StructureConstants {
    double omega = 0.0;
    Vec2 kpar{};
    Material host{};
    int lmax = 0;
    double eta = 0.0;
    MatrixC scalar;  // S_{LM;lm}, lm_index order, L, l <= lmax
    MatrixC A, B;    // vector blocks, vsh_index order

    /// [[A, -B], [B, A]] acting on [bH; bE].
    MatrixC vector_matrix() const { return vector_translation_matrix(A, B); }
};

inline StructureConstants structure_constants_uncached(const Lattice2D& lat, double omega, Vec2 kpar, const Material& host,
                                                       int lmax, const StructureOptions& opt = {}) {
    if (!(omega > 0.0) || !std::isfinite(omega)) throw InvalidArgument("structure_constants: omega must be positive");
    if (lmax < 1 || lmax > lmax_cap) throw InvalidArgument("structure_constants: lmax must lie in [1, 14]");
    StructureConstants sc;
    sc.omega = omega;
    sc.kpar = kpar;
    sc.host = host;
    sc.lmax = lmax;
    const cplx q = host.wavenumber(omega);
    sc.eta = opt.eta > 0.0 ? opt.eta : default_ewald_eta(lat, q);
    const auto d = opt.direct ? lattice_sums_direct(lat, q, kpar, 2 * lmax, opt.direct_rmax)
                              : lattice_sums(lat, q, kpar, 2 * lmax, sc.eta);
    sc.scalar = structure_from_sums(d, lmax);
    std::tie(sc.A, sc.B) = vector_translation_blocks(sc.scalar, lmax);
    return sc;
}

namespace detail {

struct StructureKey {
    double omega, k0, k1, a10, a11, a20, a21, er, ei, eta;
    int lmax;
    bool direct;
    double rmax;
    auto tie() const { return std::tie(omega, k0, k1, a10, a11, a20, a21, er, ei, eta, lmax, direct, rmax); }
    bool operator<(const StructureKey& o) const { return tie() < o.tie(); }
};

struct StructureCache {
    std::shared_mutex mtx;
    std::map<StructureKey, std::shared_ptr<const StructureConstants>> map;
    static constexpr std::size_t capacity = 2048;
};

inline StructureCache& structure_cache() {
    static StructureCache c;
    return c;
}

}  // namespace detail

/// Memoised structure constants keyed by (omega, folded kpar, lmax, lattice,
/// host, options). Safe for concurrent callers: lookups share a reader lock
/// and a miss computes outside any lock before publishing.
inline std::shared_ptr<const StructureConstants> structure_constants(const Lattice2D& lat, double omega, Vec2 kpar,
                                                                     const Material& host, int lmax,
                                                                     const StructureOptions& opt = {}) {
    lat.validate();
    const Vec2 kf = fold_kpar(lat, kpar).kpar;
    // Folding leaves round-off of order |b| * 1e-16; snap so equivalent k share a key.
    auto snap = [](double v) { return std::round(v * 1e10) * 1e-10; };
    const detail::StructureKey key{omega, snap(kf[0]), snap(kf[1]), lat.a1[0], lat.a1[1], lat.a2[0], lat.a2[1],
                                   host.eps.real(), host.eps.imag(), opt.eta, lmax, opt.direct, opt.direct ? opt.direct_rmax : 0.0};
    auto& cache = detail::structure_cache();
    {
        std::shared_lock lock(cache.mtx);
        auto it = cache.map.find(key);
        if (it != cache.map.end()) return it->second;
    }
    auto value = std::make_shared<const StructureConstants>(structure_constants_uncached(lat, omega, kf, host, lmax, opt));
    std::unique_lock lock(cache.mtx);
    if (cache.map.size() >= detail::StructureCache::capacity) cache.map.clear();
    auto [it, inserted] = cache.map.emplace(key, value);
    return it->second;
}

inline std::size_t structure_cache_size() {
    auto& cache = detail::structure_cache();
    std::shared_lock lock(cache.mtx);
    return cache.map.size();
}

inline void structure_cache_clear() {
    auto& cache = detail::structure_cache();
    std::unique_lock lock(cache.mtx);
    cache.map.clear();
}

}  // namespace phem

#endif  // PHEM_LATTICE_HPP
