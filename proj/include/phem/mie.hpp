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

// Single homogeneous sphere in a (possibly absorbing) host.
//
// T-matrix convention: an incident regular wave  a * j_l(qr) X_lm  produces
// the outgoing wave  T_l * a * h_l(qr) X_lm  (q = host wavenumber). With the
// usual Mie coefficients a_l, b_l this means T^E_l = -a_l and T^M_l = -b_l.

#ifndef PHEM_MIE_HPP
#define PHEM_MIE_HPP

#include <phem/core.hpp>
#include <phem/specfun.hpp>

#include <optional>
#include <vector>

namespace phem {

struct SphereScatterer {
    double radius = 0.0;
    Material inside{};
    Material host{};

    void validate() const {
        if (!(radius > 0.0) || !std::isfinite(radius)) throw InvalidArgument("sphere radius must be positive");
    }
    friend bool operator==(const SphereScatterer&, const SphereScatterer&) = default;
};

/// Per-channel T-matrix elements; index l runs 0..lmax with l = 0 unused (zero).
struct MieT {
    int lmax = 0;
    std::vector<cplx> te;
    std::vector<cplx> tm;
};

namespace detail {

// psi_l(z) = z j_l(z) and its derivative from a j table that runs to lmax.
inline void riccati(const std::vector<cplx>& f, cplx z, int l, cplx& psi, cplx& dpsi) {
    const auto L = static_cast<std::size_t>(l);
    psi = z * f[L];
    dpsi = z * f[L - 1] - static_cast<double>(l) * f[L];
}

// Mie a_l, b_l for l = 1..lmax, relative index m, host size parameter x.
inline void mie_ab(cplx m, cplx x, int lmax, std::vector<cplx>& a, std::vector<cplx>& b) {
    const cplx mx = m * x;
    const auto jx = sph_bessel(lmax, x);
    const auto hx = sph_hankel1(lmax, x);
    const auto jm = sph_bessel(lmax, mx);
    a.assign(static_cast<std::size_t>(lmax) + 1, cplx{});
    b.assign(static_cast<std::size_t>(lmax) + 1, cplx{});
    for (int l = 1; l <= lmax; ++l) {
        cplx px, dpx, xx, dxx, pm, dpm;
        riccati(jx, x, l, px, dpx);
        riccati(hx, x, l, xx, dxx);
        riccati(jm, mx, l, pm, dpm);
        const auto L = static_cast<std::size_t>(l);
        a[L] = (m * pm * dpx - px * dpm) / (m * pm * dxx - xx * dpm);
        b[L] = (pm * dpx - m * px * dpm) / (pm * dxx - m * xx * dpm);
    }
}

}  // namespace detail

inline MieT mie_t(const SphereScatterer& s, double omega, int lmax) {
    s.validate();
    if (!(omega > 0.0) || !std::isfinite(omega)) throw InvalidArgument("mie_t: omega must be positive");
    if (lmax < 1 || lmax > lmax_cap) throw InvalidArgument("mie_t: lmax must lie in [1, 14]");
    MieT out;
    out.lmax = lmax;
    const auto L = static_cast<std::size_t>(lmax) + 1;
    if (s.inside.eps == s.host.eps) {
        out.te.assign(L, cplx{});
        out.tm.assign(L, cplx{});
        return out;
    }
    const cplx nh = sqrt_branch(s.host.eps);
    const cplx m = sqrt_branch(s.inside.eps) / nh;
    std::vector<cplx> a, b;
    detail::mie_ab(m, omega * nh * s.radius, lmax, a, b);
    out.te.resize(L);
    out.tm.resize(L);
    for (std::size_t l = 0; l < L; ++l) {
        out.te[l] = -a[l];
        out.tm[l] = -b[l];
        if (!is_finite(out.te[l]) || !is_finite(out.tm[l])) throw InternalError("mie_t: non-finite coefficient");
    }
    return out;
}

struct MieEfficiencies {
    double ext = 0.0;
    double sca = 0.0;
    double abs = 0.0;
    int terms = 0;
};

/// Extinction, scattering and absorption efficiencies (cross section over
/// pi r^2). Returns nullopt for an absorbing host, where the far-field
/// normalisation is not uniquely defined.
inline std::optional<MieEfficiencies> mie_cross_sections(const SphereScatterer& s, double omega) {
    s.validate();
    if (!(omega > 0.0) || !std::isfinite(omega)) throw InvalidArgument("mie_cross_sections: omega must be positive");
    if (!s.host.lossless()) return std::nullopt;
    MieEfficiencies q;
    if (s.inside.eps == s.host.eps) return q;
    const double nh = std::sqrt(s.host.eps.real());
    const double x = omega * nh * s.radius;
    const cplx m = sqrt_branch(s.inside.eps) / nh;
    // Wiscombe's truncation rule with a safety margin.
    const int n = static_cast<int>(x + 4.0 * std::cbrt(x) + 2.0) + 4;
    std::vector<cplx> a, b;
    detail::mie_ab(m, x, n, a, b);
    double ext = 0.0, sca = 0.0;
    for (int l = 1; l <= n; ++l) {
        const auto L = static_cast<std::size_t>(l);
        ext += (2 * l + 1) * (a[L] + b[L]).real();
        sca += (2 * l + 1) * (std::norm(a[L]) + std::norm(b[L]));
    }
    q.ext = 2.0 / (x * x) * ext;
    q.sca = 2.0 / (x * x) * sca;
    q.abs = q.ext - q.sca;
    q.terms = n;
    return q;
}

}  // namespace phem

#endif  // PHEM_MIE_HPP
