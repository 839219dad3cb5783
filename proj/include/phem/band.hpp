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

// Complex band structure of an infinitely repeated slice.
//
// With Bloch amplitudes (a+, a-) on the left of a slice and lambda (a+, a-)
// on its right, the S-matrix relations
//   a+_R = tpp a+_L + rmp a-_R,   a-_L = rpm a+_L + tmm a-_R
// become the pencil
//   [tpp  0] [a+]          [I  -rmp] [a+]
//   [-rpm I] [a-] = lambda [0   tmm] [a-],
// solved by QZ so that no (possibly near-singular) block is ever inverted.
// lambda = exp(i kz d).

#ifndef PHEM_BAND_HPP
#define PHEM_BAND_HPP

#include <phem/stack.hpp>

#include <complex>

#ifndef lapack_complex_float
#define lapack_complex_float std::complex<float>
#endif
#ifndef lapack_complex_double
#define lapack_complex_double std::complex<double>
#endif
#include <lapacke.h>

#include <functional>
#include <limits>
#include <vector>

namespace phem {

/// |lambda| within this of 1 marks a propagating Bloch mode.
inline constexpr double propagating_tolerance = 1e-6;

struct BandPoint {
    double omega = 0.0;
    Vec2 kpar{};
    double period = 0.0;
    /// One representative per (lambda, 1/conj(lambda)) pair, Im kz >= 0;
    /// propagating modes appear in both directions. Re kz in (-pi/d, pi/d].
    std::vector<cplx> kz_list;
    /// Eigenvalues matching kz_list, and their unit-norm eigenvectors (columns).
    std::vector<cplx> lambda;
    MatrixC modes;
    /// Every finite eigenvalue of the pencil.
    std::vector<cplx> all_lambda;

    bool is_propagating(std::size_t i) const { return std::abs(std::abs(lambda[i]) - 1.0) < propagating_tolerance; }

    bool has_propagating() const {
        for (std::size_t i = 0; i < lambda.size(); ++i)
            if (is_propagating(i)) return true;
        return false;
    }

    /// Smallest Im kz among the evanescent modes (infinity if there are none).
    double min_decay() const {
        double m = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < kz_list.size(); ++i)
            if (!is_propagating(i)) m = std::min(m, kz_list[i].imag());
        return m;
    }
};

/// Bloch wavevector of an eigenvalue, folded into the first zone.
inline cplx kz_from_lambda(cplx lambda, double period) {
    return -I * std::log(lambda) / period;
}

/// Folds Re kz into (-pi/d, pi/d].
inline cplx fold_kz(cplx kz, double period) {
    const double g = 2.0 * pi / period;
    double re = std::remainder(kz.real(), g);
    if (re <= -pi / period) re += g;
    return {re, kz.imag()};
}

namespace detail {

inline double block_condition(const MatrixC& m) {
    Eigen::JacobiSVD<MatrixC> svd(m);
    const auto& s = svd.singularValues();
    return s(s.size() - 1) > 0.0 ? s(0) / s(s.size() - 1) : std::numeric_limits<double>::infinity();
}

}  // namespace detail

/// Complex bands from the S-matrix of one period of thickness `period`.
inline BandPoint complex_bands(const LayerS& unit, double period, double omega, Vec2 kpar) {
    if (!(period > 0.0)) throw InvalidArgument("complex_bands: period must be positive");
    if (!(unit.left == unit.right)) throw InvalidArgument("complex_bands: slice must have the same medium on both sides");
    const Eigen::Index n = unit.dim();
    const Eigen::Index N = 2 * n;
    MatrixC A = MatrixC::Zero(N, N), B = MatrixC::Zero(N, N);
    A.topLeftCorner(n, n) = unit.tpp;
    A.bottomLeftCorner(n, n) = -unit.rpm;
    A.bottomRightCorner(n, n).setIdentity();
    B.topLeftCorner(n, n).setIdentity();
    B.topRightCorner(n, n) = -unit.rmp;
    B.bottomRightCorner(n, n) = unit.tmm;

    VectorC alpha(N), beta(N);
    MatrixC vr(N, N);
    const lapack_int info = LAPACKE_zggev(LAPACK_COL_MAJOR, 'N', 'V', static_cast<lapack_int>(N), A.data(), static_cast<lapack_int>(N),
                                          B.data(), static_cast<lapack_int>(N), alpha.data(), beta.data(), nullptr, 1, vr.data(),
                                          static_cast<lapack_int>(N));
    if (info != 0) {
        throw ConvergenceFailure("complex_bands: generalized eigensolver failed (info " + std::to_string(info) +
                                 ") at omega = " + std::to_string(omega) + "; cond(tpp) = " + std::to_string(detail::block_condition(unit.tpp)) +
                                 ", cond(tmm) = " + std::to_string(detail::block_condition(unit.tmm)));
    }

    BandPoint bp;
    bp.omega = omega;
    bp.kpar = kpar;
    bp.period = period;
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < N; ++i) {
        if (std::abs(beta(i)) <= 1e-300 * std::abs(alpha(i)) || beta(i) == 0.0) continue;
        const cplx lam = alpha(i) / beta(i);
        if (!is_finite(lam) || lam == 0.0) continue;
        bp.all_lambda.push_back(lam);
        if (std::abs(lam) <= 1.0 + propagating_tolerance) keep.push_back(i);
    }
    bp.modes.resize(N, static_cast<Eigen::Index>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j) {
        const cplx lam = alpha(keep[j]) / beta(keep[j]);
        bp.lambda.push_back(lam);
        bp.kz_list.push_back(kz_from_lambda(lam, period));
        bp.modes.col(static_cast<Eigen::Index>(j)) = vr.col(keep[j]).normalized();
    }
    return bp;
}

/// Reorders `cur` so that slot i continues the mode in slot i of `prev`
/// (largest eigenvector overlap, greedy). Unmatched modes go last.
inline void connect_bands(const BandPoint& prev, BandPoint& cur) {
    if (prev.modes.rows() != cur.modes.rows() || prev.kz_list.empty() || cur.kz_list.empty()) return;
    const Eigen::MatrixXd ov = (prev.modes.adjoint() * cur.modes).cwiseAbs();
    const auto np = static_cast<std::size_t>(ov.rows()), nc = static_cast<std::size_t>(ov.cols());
    std::vector<bool> used(nc, false);
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < np && order.size() < nc; ++i) {
        std::size_t best = nc;
        double bv = -1.0;
        for (std::size_t j = 0; j < nc; ++j)
            if (!used[j] && ov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) > bv) {
                bv = ov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                best = j;
            }
        used[best] = true;
        order.push_back(best);
    }
    for (std::size_t j = 0; j < nc; ++j)
        if (!used[j]) order.push_back(j);
    BandPoint out = cur;
    for (std::size_t k = 0; k < nc; ++k) {
        out.kz_list[k] = cur.kz_list[order[k]];
        out.lambda[k] = cur.lambda[order[k]];
        out.modes.col(static_cast<Eigen::Index>(k)) = cur.modes.col(static_cast<Eigen::Index>(order[k]));
    }
    cur = std::move(out);
}

struct GapInterval {
    double lo = 0.0;
    double hi = 0.0;
    friend bool operator==(const GapInterval&, const GapInterval&) = default;
};

/// Maximal frequency intervals without a propagating mode. With `eval`, each
/// interior edge is refined by bisection to `tol`; otherwise edges sit
/// midway between scan points. Intervals touching the scan ends stop there.
inline std::vector<GapInterval> gap_edges(const std::vector<BandPoint>& scan, const std::function<BandPoint(double)>& eval = {},
                                          double tol = 1e-4) {
    for (std::size_t i = 1; i < scan.size(); ++i)
        if (!(scan[i].omega > scan[i - 1].omega)) throw InvalidArgument("gap_edges: omega scan must be strictly increasing");
    auto edge = [&](double a, double b, bool gap_at_b) {
        if (!eval) return 0.5 * (a + b);
        while (b - a > tol) {
            const double m = 0.5 * (a + b);
            const bool gap = !eval(m).has_propagating();
            if (gap == gap_at_b) b = m;
            else a = m;
        }
        return 0.5 * (a + b);
    };
    std::vector<GapInterval> out;
    std::size_t i = 0;
    while (i < scan.size()) {
        if (scan[i].has_propagating()) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < scan.size() && !scan[j + 1].has_propagating()) ++j;
        GapInterval g;
        g.lo = i == 0 ? scan[0].omega : edge(scan[i - 1].omega, scan[i].omega, true);
        g.hi = j + 1 == scan.size() ? scan[j].omega : edge(scan[j].omega, scan[j + 1].omega, false);
        out.push_back(g);
        i = j + 1;
    }
    return out;
}

/// Stacking period of a repeat body: gaps and plates (sphere planes are
/// infinitely thin in this bookkeeping; their extent lives in the gaps).
inline double slice_period(const std::vector<Element>& body) {
    double d = 0.0;
    for (const auto& e : body) {
        if (auto g = std::get_if<Gap>(&e.v)) d += g->distance;
        else if (auto p = std::get_if<Plate>(&e.v)) d += p->thickness;
        else if (auto r = std::get_if<Repeat>(&e.v)) d += r->count * slice_period(r->body);
    }
    return d;
}

/// Bands of an infinitely repeated `body` embedded in `medium`.
inline BandPoint band_point(const std::vector<Element>& body, const Material& medium, double omega, Vec2 kpar,
                            const NumericalControls& nc = {}) {
    if (!medium.lossless()) throw InvalidArgument("complex bands need a lossless embedding medium");
    StackDescription d;
    d.incident = medium;
    d.elements = body;
    d.exit = {medium, false};
    StackSolver solver(d, omega, kpar, nc);
    return complex_bands(solver.solve(), slice_period(body), omega, kpar);
}

}  // namespace phem

#endif  // PHEM_BAND_HPP
