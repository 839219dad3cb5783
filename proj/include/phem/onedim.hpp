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

// Transfer matrices for planar multilayers.
//
// Amplitudes (a+, a-) of the forward and backward plane waves on the left of
// an element are M times those on its right. Amplitudes are tangential
// electric fields, and D = [[1, 1], [y, -y]] maps them to the tangential
// (E, H) pair with admittance y = kz (s) or eps/kz (p, up to a common
// factor omega^2). s and p coincide at normal incidence. A layer of thickness d is
// D P D^-1 with P = diag(exp(-i kz d), exp(i kz d)), written in the basis of
// the incident ambient medium.
//
// With the exit medium carrying only an outgoing wave t,
//   [1; r] = M [t; 0]   =>   t = 1/M11,  r = M21/M11.

#ifndef PHEM_ONEDIM_HPP
#define PHEM_ONEDIM_HPP

#include <phem/core.hpp>
#include <phem/stack.hpp>

#include <Eigen/Dense>

#include <vector>

namespace phem {

using OneDimMatrix = Eigen::Matrix2cd;

struct OneDimLayer {
    Material material{};
    double thickness = 0.0;

    void validate() const {
        if (!(thickness >= 0.0) || !std::isfinite(thickness)) throw InvalidArgument("layer thickness must be >= 0");
    }
};

namespace detail {

inline double transverse_k(double omega, double theta0, const Material& ambient) {
    if (!(theta0 >= 0.0 && theta0 < pi / 2)) throw InvalidArgument("theta0 must lie in [0, pi/2)");
    if (!ambient.lossless()) throw InvalidArgument("incident ambient must be lossless");
    return omega * std::sqrt(ambient.eps.real()) * std::sin(theta0);
}

inline cplx kz_of(const Material& m, double omega, double K) { return sqrt_branch(m.eps * omega * omega - K * K); }

inline cplx admittance(const Material& m, double omega, double K, Polarization pol) {
    const cplx kz = kz_of(m, omega, K);
    if (kz == 0.0) throw SingularArgument("grazing wave (kz = 0) in a transfer matrix");
    return pol == Polarization::s ? kz : m.eps * omega * omega / kz;
}

inline OneDimMatrix dyn(const Material& m, double omega, double K, Polarization pol) {
    const cplx y = admittance(m, omega, K, pol);
    OneDimMatrix d;
    d << 1.0, 1.0, y, -y;
    return d;
}

inline OneDimMatrix dyn_inv(const Material& m, double omega, double K, Polarization pol) {
    const cplx y = admittance(m, omega, K, pol);
    OneDimMatrix d;
    d << 0.5, 0.5 / y, 0.5, -0.5 / y;
    return d;
}

// D P D^-1 in the layer's own basis.
inline OneDimMatrix propagation(const OneDimLayer& l, double omega, double K, Polarization pol) {
    const cplx kz = kz_of(l.material, omega, K);
    OneDimMatrix p = OneDimMatrix::Zero();
    p(0, 0) = std::exp(-I * kz * l.thickness);
    p(1, 1) = std::exp(I * kz * l.thickness);
    return dyn(l.material, omega, K, pol) * p * dyn_inv(l.material, omega, K, pol);
}

/// Flux carried by a unit outgoing amplitude, relative to the incident one.
inline double flux_weight(const Material& m, double omega, double K, Polarization pol) {
    return admittance(m, omega, K, pol).real();
}

}  // namespace detail

/// One layer embedded in the ambient medium (basis of the ambient).
inline OneDimMatrix layer_matrix(const OneDimLayer& layer, double omega, double theta0, Polarization pol, const Material& ambient) {
    layer.validate();
    const double K = detail::transverse_k(omega, theta0, ambient);
    return detail::dyn_inv(ambient, omega, K, pol) * detail::propagation(layer, omega, K, pol) * detail::dyn(ambient, omega, K, pol);
}

/// Ordered product through every layer, including the entry and exit boundaries.
inline OneDimMatrix stack_matrix(const std::vector<OneDimLayer>& layers, double omega, double theta0, Polarization pol,
                                 const Material& ambient, const Material& exit) {
    if (layers.empty()) throw InvalidArgument("stack_matrix: empty layer sequence");
    const double K = detail::transverse_k(omega, theta0, ambient);
    OneDimMatrix m = detail::dyn_inv(ambient, omega, K, pol);
    for (const auto& l : layers) {
        l.validate();
        m = m * detail::propagation(l, omega, K, pol);
    }
    return m * detail::dyn(exit, omega, K, pol);
}

struct OneDimResult {
    cplx r{}, t{};
    double R = 0.0, T = 0.0, A = 0.0;
};

/// r, t and flux fractions; exit_flux is the exit/incident flux ratio per |t|^2.
inline OneDimResult rt_from_matrix(const OneDimMatrix& m, double exit_flux = 1.0) {
    if (m(0, 0) == 0.0 || !is_finite(m(0, 0)))
        throw SingularSolve("rt_from_matrix: M11 vanishes", std::numeric_limits<double>::infinity());
    OneDimResult o;
    o.t = 1.0 / m(0, 0);
    o.r = m(1, 0) / m(0, 0);
    o.R = std::norm(o.r);
    o.T = std::norm(o.t) * exit_flux;
    o.A = 1.0 - o.R - o.T;
    return o;
}

/// Full solve; an opaque exit counts nothing as transmitted.
inline OneDimResult solve_onedim(const std::vector<OneDimLayer>& layers, double omega, double theta0, Polarization pol,
                                 const Material& ambient, const Material& exit, bool opaque_exit = false) {
    if (!opaque_exit && !exit.lossless()) throw InvalidArgument("an absorbing exit half-space must be declared opaque");
    const double K = detail::transverse_k(omega, theta0, ambient);
    const OneDimMatrix m = layers.empty() ? OneDimMatrix(detail::dyn_inv(ambient, omega, K, pol) * detail::dyn(exit, omega, K, pol))
                                          : stack_matrix(layers, omega, theta0, pol, ambient, exit);
    const double w = opaque_exit ? 0.0 : detail::flux_weight(exit, omega, K, pol) / detail::flux_weight(ambient, omega, K, pol);
    return rt_from_matrix(m, w);
}

/// Equivalent layered StackDescription for the 3D engine (plates as
/// interfaces plus gaps), used by the cross-engine checks and the CLI.
inline StackDescription as_stack(const std::vector<OneDimLayer>& layers, const Material& ambient, const Material& exit, bool opaque) {
    StackDescription d;
    d.incident = ambient;
    Material cur = ambient;
    for (const auto& l : layers) {
        if (!(l.material == cur)) d.elements.emplace_back(Interface{l.material});
        d.elements.emplace_back(Gap{l.thickness});
        cur = l.material;
    }
    if (d.elements.empty()) d.elements.emplace_back(Gap{0.0});
    d.exit = {exit, opaque};
    return d;
}

namespace detail {

inline void flatten_layers(const std::vector<Element>& els, Material& cur, std::vector<OneDimLayer>& out) {
    for (const auto& e : els) {
        if (auto g = std::get_if<Gap>(&e.v)) {
            out.push_back({cur, g->distance});
        } else if (auto p = std::get_if<Plate>(&e.v)) {
            out.push_back({p->material, p->thickness});
        } else if (auto i = std::get_if<Interface>(&e.v)) {
            cur = i->to;
        } else if (auto r = std::get_if<Repeat>(&e.v)) {
            for (int k = 0; k < r->count; ++k) flatten_layers(r->body, cur, out);
        } else {
            throw InvalidArgument("a stack with sphere planes has no transfer-matrix equivalent");
        }
    }
}

}  // namespace detail

/// Layer sequence of a planar StackDescription (inverse of as_stack).
inline std::vector<OneDimLayer> to_onedim(const StackDescription& d) {
    validate(d);
    std::vector<OneDimLayer> out;
    Material cur = d.incident;
    detail::flatten_layers(d.elements, cur, out);
    return out;
}

}  // namespace phem

#endif  // PHEM_ONEDIM_HPP
