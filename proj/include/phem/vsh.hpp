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

// Vector spherical waves and their translation.
//
//   X_lm = L Y_lm / sqrt(l(l+1)),  L = -i r x grad
//   H-type wave:  f_l(qr) X_lm
//   E-type wave:  (i/q) curl( f_l(qr) X_lm )
//
// Coefficients are stored in one vector index per (l, m), l >= 1:
// vsh_index(l, m) = l^2 + l + m - 1.

#ifndef PHEM_VSH_HPP
#define PHEM_VSH_HPP

#include <phem/core.hpp>
#include <phem/specfun.hpp>

#include <Eigen/Dense>

#include <array>
#include <vector>

namespace phem {

using Vec3c = std::array<cplx, 3>;
using MatrixC = Eigen::MatrixXcd;
using VectorC = Eigen::VectorXcd;

constexpr int vsh_index(int l, int m) noexcept { return l * l + l + m - 1; }
constexpr int vsh_count(int lmax) noexcept { return lmax * (lmax + 2); }

inline double c_plus(int l, int m) { return std::sqrt(static_cast<double>((l - m) * (l + m + 1))); }
inline double c_minus(int l, int m) { return std::sqrt(static_cast<double>((l + m) * (l - m + 1))); }

inline cplx dot(const Vec3c& a, const Vec3c& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline Vec3c cross(const Vec3c& a, const Vec3c& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

namespace detail {

inline Vec3c x_from_y(int l, int m, cplx yp, cplx ym, cplx y0, bool conjugate) {
    const double n = 1.0 / std::sqrt(static_cast<double>(l * (l + 1)));
    const cplx a = c_plus(l, m) * yp;
    const cplx b = c_minus(l, m) * ym;
    const cplx vy = (a - b) / (2.0 * I);
    return {n * (a + b) / 2.0, n * (conjugate ? -vy : vy), n * static_cast<double>(m) * y0};
}

}  // namespace detail

/// X_lm at a (possibly complex) unit direction, for 1 <= l <= lmax.
inline std::vector<Vec3c> vsh_x(int lmax, cplx cos_t, cplx sin_t, cplx eiphi) {
    const auto y = spherical_harmonics(lmax, cos_t, sin_t, eiphi);
    std::vector<Vec3c> out(static_cast<std::size_t>(vsh_count(lmax)));
    for (int l = 1; l <= lmax; ++l)
        for (int m = -l; m <= l; ++m) {
            auto at = [&](int mm) { return std::abs(mm) > l ? cplx{} : y[static_cast<std::size_t>(lm_index(l, mm))]; };
            out[static_cast<std::size_t>(vsh_index(l, m))] = detail::x_from_y(l, m, at(m + 1), at(m - 1), at(m), false);
        }
    return out;
}

/// Analytic continuation of conj(X_lm): exact conjugate for real directions,
/// built from Ybar_lm = (-1)^m Y_{l,-m} so it stays analytic in the direction.
inline std::vector<Vec3c> vsh_x_bar(int lmax, cplx cos_t, cplx sin_t, cplx eiphi) {
    const auto y = spherical_harmonics(lmax, cos_t, sin_t, eiphi);
    std::vector<Vec3c> out(static_cast<std::size_t>(vsh_count(lmax)));
    for (int l = 1; l <= lmax; ++l)
        for (int m = -l; m <= l; ++m) {
            auto bar = [&](int mm) {
                if (std::abs(mm) > l) return cplx{};
                const double s = (mm % 2 == 0) ? 1.0 : -1.0;
                return s * y[static_cast<std::size_t>(lm_index(l, -mm))];
            };
            out[static_cast<std::size_t>(vsh_index(l, m))] = detail::x_from_y(l, m, bar(m + 1), bar(m - 1), bar(m), true);
        }
    return out;
}

/// Contracts lattice (or single-site) sums D_{lambda mu} of h_lambda Y_{lambda mu}(-R)
/// with Gaunt coefficients:  S_{LM;lm} = 4 pi sum_lambda i^{L+lambda-l} gaunt(LM, lambda m-M, lm) D_{lambda,m-M}.
inline MatrixC structure_from_sums(const std::vector<cplx>& d, int lmax) {
    const auto& g = GauntTable::get(lmax);
    const int n = lm_count(lmax);
    MatrixC s = MatrixC::Zero(n, n);
    static const cplx ipow[4] = {1.0, I, -1.0, -I};
    for (int L = 0; L <= lmax; ++L)
        for (int M = -L; M <= L; ++M)
            for (int l = 0; l <= lmax; ++l)
                for (int m = -l; m <= l; ++m) {
                    const int mu = m - M;
                    cplx acc{};
                    for (int lam = std::max(std::abs(L - l), std::abs(mu)); lam <= L + l; ++lam) {
                        if ((L + lam + l) % 2) continue;
                        const double gc = g(L, M, lam, l, m);
                        if (gc == 0.0) continue;
                        acc += ipow[((L + lam - l) % 4 + 4) % 4] * gc * d[static_cast<std::size_t>(lm_index(lam, mu))];
                    }
                    s(lm_index(L, M), lm_index(l, m)) = 4.0 * pi * acc;
                }
    return s;
}

/// Coefficients G_{LM;lm} of  h_l(q|r-R|) Y_lm(r-R) = sum_LM G j_L(qr) Y_LM(r),
/// valid for |r| < |R|. Rows and columns are lm_index over l, L <= lmax.
inline MatrixC scalar_translation(const std::array<double, 3>& R, cplx q, int lmax) {
    const double rr = std::sqrt(R[0] * R[0] + R[1] * R[1] + R[2] * R[2]);
    if (rr == 0.0) throw SingularArgument("scalar_translation: zero displacement");
    const int lam = 2 * lmax;
    const auto h = sph_hankel1(lam, q * rr);
    // -R direction
    const double ct = -R[2] / rr;
    const double rho = std::hypot(R[0], R[1]);
    const double st = rho / rr;
    const cplx eiphi = rho > 0.0 ? cplx(-R[0] / rho, -R[1] / rho) : cplx(1.0, 0.0);
    const auto y = spherical_harmonics(lam, ct, st, eiphi);
    std::vector<cplx> d(static_cast<std::size_t>(lm_count(lam)));
    for (int l = 0; l <= lam; ++l)
        for (int m = -l; m <= l; ++m)
            d[static_cast<std::size_t>(lm_index(l, m))] = h[static_cast<std::size_t>(l)] * y[static_cast<std::size_t>(lm_index(l, m))];
    return structure_from_sums(d, lmax);
}

/// Vector translation blocks (A, B) built from a scalar coefficient matrix S.
/// Outgoing H/E waves with coefficients (bH, bE) become regular waves with
///   aH = A bH - B bE,   aE = B bH + A bE.
inline std::pair<MatrixC, MatrixC> vector_translation_blocks(const MatrixC& s, int lmax) {
    const int n = vsh_count(lmax);
    MatrixC A = MatrixC::Zero(n, n), B = MatrixC::Zero(n, n);
    auto S = [&](int L, int M, int l, int m) -> cplx {
        if (std::abs(M) > L || std::abs(m) > l) return cplx{};
        return s(lm_index(L, M), lm_index(l, m));
    };
    for (int lp = 1; lp <= lmax; ++lp)
        for (int mp = -lp; mp <= lp; ++mp)
            for (int l = 1; l <= lmax; ++l) {
                const double norm_l = 1.0 / std::sqrt(static_cast<double>(l * (l + 1)));
                const double norm_lp = 1.0 / std::sqrt(static_cast<double>(lp * (lp + 1)));
                for (int m = -l; m <= l; ++m) {
                    const cplx a = 0.5 * c_minus(l, m) * c_minus(lp, mp) * S(lp, mp - 1, l, m - 1) +
                                   0.5 * c_plus(l, m) * c_plus(lp, mp) * S(lp, mp + 1, l, m + 1) +
                                   static_cast<double>(m * mp) * S(lp, mp, l, m);
                    A(vsh_index(lp, mp), vsh_index(l, m)) = a * norm_l * norm_lp;

                    // E-type content from the lowest radial order of r.F.
                    const int j1 = lp - 1;
                    const double den = (2.0 * j1 + 1.0);
                    const double cg_p = std::sqrt((j1 + mp) * (j1 + mp + 1.0) / (den * (2.0 * j1 + 2.0)));
                    const double cg_0 = std::sqrt((j1 - mp + 1.0) * (j1 + mp + 1.0) / (den * (j1 + 1.0)));
                    const double cg_m = std::sqrt((j1 - mp) * (j1 - mp + 1.0) / (den * (2.0 * j1 + 2.0)));
                    const cplx u_p = -c_minus(l, m) / std::sqrt(2.0) * S(j1, mp - 1, l, m - 1);
                    const cplx u_0 = static_cast<double>(m) * S(j1, mp, l, m);
                    const cplx u_m = c_plus(l, m) / std::sqrt(2.0) * S(j1, mp + 1, l, m + 1);
                    const cplx sum = u_p * cg_p + u_0 * cg_0 + u_m * cg_m;
                    B(vsh_index(lp, mp), vsh_index(l, m)) = -std::sqrt((2.0 * lp + 1.0) / (lp + 1.0)) * norm_l * sum;
                }
            }
    return {A, B};
}

/// Assemble the 2n x 2n map [aH; aE] = [[A, -B], [B, A]] [bH; bE].
inline MatrixC vector_translation_matrix(const MatrixC& A, const MatrixC& B) {
    const auto n = A.rows();
    MatrixC out(2 * n, 2 * n);
    out.topLeftCorner(n, n) = A;
    out.topRightCorner(n, n) = -B;
    out.bottomLeftCorner(n, n) = B;
    out.bottomRightCorner(n, n) = A;
    return out;
}

}  // namespace phem

#endif  // PHEM_VSH_HPP
