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

// Layer scattering matrices in the plane-wave (beam) basis.
//
// A plane wave in medium eps travelling along K = (kpar + g, +-kz) is
//   E = E0 e exp(i K.r),   amplitude a = E0 sqrt(kz),
// with e the s or p unit vector of that beam. With this scaling a
// propagating beam in a lossless medium carries flux |a|^2, and S-matrix
// blocks are directly unitary-comparable. Index of (beam i, pol) is 2i + pol,
// pol 0 = s, 1 = p.
//
// Polarisation vectors, for a beam of parallel wavevector K at azimuth phi:
//   s = (-sin phi, cos phi, 0)
//   p = (cos t cos phi, cos t sin phi, -sin t),  cos t = +-kz/q, sin t = |K|/q
// continued analytically into lossy media and evanescent orders (p.p = 1).
// At |K| = 0 the azimuth is fixed at -pi/2 so that s is the lattice x axis.
//
// Blocks (left medium at z < 0, right medium at z > 0):
//   tpp: +z waves in on the left  -> +z waves out on the right
//   rpm: +z waves in on the left  -> -z waves out on the left
//   rmp: -z waves in on the right -> +z waves out on the right
//   tmm: -z waves in on the right -> -z waves out on the left

#ifndef PHEM_LAYER_HPP
#define PHEM_LAYER_HPP

#include <phem/core.hpp>
#include <phem/lattice.hpp>
#include <phem/mie.hpp>
#include <phem/vsh.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace phem {

struct LayerS {
    BeamSet beams;
    Material left{};
    Material right{};
    MatrixC tpp, rpm, rmp, tmm;

    Eigen::Index dim() const noexcept { return tpp.rows(); }

    static LayerS identity(const BeamSet& bs, const Material& m) {
        const auto n = static_cast<Eigen::Index>(2 * bs.size());
        LayerS s;
        s.beams = bs;
        s.left = s.right = m;
        s.tpp = s.tmm = MatrixC::Identity(n, n);
        s.rpm = s.rmp = MatrixC::Zero(n, n);
        return s;
    }
};

struct PlaneOfSpheres {
    Lattice2D lattice;
    SphereScatterer scatterer;
    Vec2 offset{};

    void validate() const {
        lattice.validate();
        scatterer.validate();
        double nn = std::numeric_limits<double>::infinity();
        for (int i = -2; i <= 2; ++i)
            for (int j = -2; j <= 2; ++j)
                if (i || j) nn = std::min(nn, norm(static_cast<double>(i) * lattice.a1 + static_cast<double>(j) * lattice.a2));
        if (!(2.0 * scatterer.radius < nn))
            throw InvalidArgument("sphere diameter must be smaller than the in-plane nearest-neighbour distance");
    }
};

struct Plate {
    double thickness = 0.0;
    Material material{};

    void validate() const {
        if (!(thickness >= 0.0) || !std::isfinite(thickness)) throw InvalidArgument("plate thickness must be >= 0");
    }
};

/// Unit vectors of one beam in one medium; dir = +1 or -1 selects the sign of kz.
struct BeamFrame {
    Vec3c khat, es, ep;
    cplx cos_t, sin_t, eiphi;
};

inline BeamFrame beam_frame(const Beam& b, cplx kz, cplx q, int dir) {
    double cp = 0.0, sp = -1.0;
    if (b.kmag > 1e-12 * (1.0 + std::abs(q))) {
        cp = b.k[0] / b.kmag;
        sp = b.k[1] / b.kmag;
    }
    BeamFrame f;
    f.cos_t = static_cast<double>(dir) * kz / q;
    f.sin_t = b.kmag / q;
    f.eiphi = cplx(cp, sp);
    f.khat = {f.sin_t * cp, f.sin_t * sp, f.cos_t};
    f.es = {-sp, cp, 0.0};
    f.ep = {f.cos_t * cp, f.cos_t * sp, -f.sin_t};
    return f;
}

namespace detail {

// Normalised Fresnel coefficients of one channel, left medium 1, right medium 2.
struct Channel {
    cplx r12, t12, r21, t21;
};

inline Channel fresnel(cplx kz1, cplx kz2, cplx e1, cplx e2, bool p) {
    Channel c;
    const cplx s = std::sqrt(kz1) * std::sqrt(kz2);
    if (!p) {
        const cplx den = kz1 + kz2;
        c.r12 = (kz1 - kz2) / den;
        c.r21 = -c.r12;
        c.t12 = c.t21 = 2.0 * s / den;
    } else {
        const cplx den = kz1 * e2 + kz2 * e1;
        c.r12 = (kz1 * e2 - kz2 * e1) / den;
        c.r21 = -c.r12;
        c.t12 = c.t21 = 2.0 * s * sqrt_branch(e1) * sqrt_branch(e2) / den;
    }
    return c;
}

}  // namespace detail

/// Flat boundary between two half-spaces, reference plane at the boundary.
inline LayerS interface_smatrix(const Material& left, const Material& right, const BeamSet& bs) {
    LayerS s = LayerS::identity(bs, left);
    s.right = right;
    if (left == right) return s;
    for (std::size_t i = 0; i < bs.size(); ++i) {
        const cplx k1 = bs.kz(i, left), k2 = bs.kz(i, right);
        if (k1 == 0.0 || k2 == 0.0) throw SingularArgument("interface at a grazing (Wood) beam: kz = 0");
        for (int p = 0; p < 2; ++p) {
            const auto c = detail::fresnel(k1, k2, left.eps, right.eps, p == 1);
            const auto k = static_cast<Eigen::Index>(2 * i) + p;
            s.tpp(k, k) = c.t12;
            s.rpm(k, k) = c.r12;
            s.rmp(k, k) = c.r21;
            s.tmm(k, k) = c.t21;
        }
    }
    return s;
}

/// Free propagation over a distance in a homogeneous medium (default: beams.ambient).
inline LayerS gap_smatrix(double distance, const BeamSet& bs, const Material& medium) {
    if (!(distance >= 0.0) || !std::isfinite(distance)) throw InvalidArgument("gap distance must be >= 0");
    LayerS s = LayerS::identity(bs, medium);
    if (distance == 0.0) return s;
    for (std::size_t i = 0; i < bs.size(); ++i) {
        const cplx ph = std::exp(I * bs.kz(i, medium) * distance);
        for (int p = 0; p < 2; ++p) {
            const auto k = static_cast<Eigen::Index>(2 * i) + p;
            s.tpp(k, k) = s.tmm(k, k) = ph;
        }
    }
    return s;
}

inline LayerS gap_smatrix(double distance, const BeamSet& bs) { return gap_smatrix(distance, bs, bs.ambient); }

/// Homogeneous plate between two media; reference planes on its two faces.
/// Closed-form Fabry-Perot resummation per channel. exp(i kz d) underflows to
/// an exact zero for opaque plates, leaving the front-face reflection.
inline LayerS plate_smatrix(const Plate& plate, const BeamSet& bs, const Material& left, const Material& right) {
    plate.validate();
    LayerS s = LayerS::identity(bs, left);
    s.right = right;
    const Material& m = plate.material;
    for (std::size_t i = 0; i < bs.size(); ++i) {
        const cplx k1 = bs.kz(i, left), k2 = bs.kz(i, m), k3 = bs.kz(i, right);
        const cplx ph = plate.thickness == 0.0 ? cplx(1.0) : std::exp(I * k2 * plate.thickness);
        for (int p = 0; p < 2; ++p) {
            const bool pp = p == 1;
            const auto a = left == m ? detail::Channel{0.0, 1.0, 0.0, 1.0} : detail::fresnel(k1, k2, left.eps, m.eps, pp);
            const auto b = m == right ? detail::Channel{0.0, 1.0, 0.0, 1.0} : detail::fresnel(k2, k3, m.eps, right.eps, pp);
            const cplx ph2 = ph * ph;
            const cplx den = 1.0 - a.r21 * b.r12 * ph2;
            const auto k = static_cast<Eigen::Index>(2 * i) + p;
            s.tpp(k, k) = a.t12 * ph * b.t12 / den;
            s.rpm(k, k) = a.r12 + a.t12 * ph2 * b.r12 * a.t21 / den;
            s.tmm(k, k) = b.t21 * ph * a.t21 / den;
            s.rmp(k, k) = b.r21 + b.t21 * ph2 * a.r21 * b.t12 / den;
        }
    }
    return s;
}

/// Plane-wave to spherical-wave projection about the sphere centre, for every
/// (beam, pol) with the given propagation direction. Rows follow the
/// [H; E] spherical basis, columns the beam basis; normalised amplitudes in.
inline MatrixC plane_to_spherical(const BeamSet& bs, const Material& host, int lmax, int dir, Vec2 offset = {}) {
    const int n = vsh_count(lmax);
    const cplx q = host.wavenumber(bs.omega);
    MatrixC P(2 * n, static_cast<Eigen::Index>(2 * bs.size()));
    static const cplx ipow[4] = {1.0, I, -1.0, -I};
    for (std::size_t g = 0; g < bs.size(); ++g) {
        const cplx kz = bs.kz(g, host);
        const BeamFrame f = beam_frame(bs.beams[g], kz, q, dir);
        const auto xb = vsh_x_bar(lmax, f.cos_t, f.sin_t, f.eiphi);
        const cplx shift = std::exp(I * dot(bs.beams[g].k, offset)) / std::sqrt(kz);
        const Vec3c e[2] = {f.es, f.ep};
        for (int p = 0; p < 2; ++p) {
            const Vec3c ke = cross(f.khat, e[p]);
            const auto col = static_cast<Eigen::Index>(2 * g) + p;
            for (int l = 1; l <= lmax; ++l)
                for (int m = -l; m <= l; ++m) {
                    const int j = vsh_index(l, m);
                    const auto& X = xb[static_cast<std::size_t>(j)];
                    const cplx c = 4.0 * pi * ipow[l % 4] * shift;
                    P(j, col) = c * dot(X, e[p]);
                    P(n + j, col) = c * dot(X, ke);
                }
        }
    }
    return P;
}

/// Plane waves radiated by a periodic array of outgoing spherical waves, in
/// normalised beam amplitudes at the plane of the sphere centres.
inline MatrixC spherical_to_plane(const BeamSet& bs, const Material& host, double area, int lmax, int dir, Vec2 offset = {}) {
    const int n = vsh_count(lmax);
    const cplx q = host.wavenumber(bs.omega);
    MatrixC Q(static_cast<Eigen::Index>(2 * bs.size()), 2 * n);
    static const cplx mipow[4] = {1.0, -I, -1.0, I};
    for (std::size_t g = 0; g < bs.size(); ++g) {
        const cplx kz = bs.kz(g, host);
        if (kz == 0.0) throw SingularArgument("sphere plane at a grazing (Wood) beam: kz = 0");
        const BeamFrame f = beam_frame(bs.beams[g], kz, q, dir);
        const auto x = vsh_x(lmax, f.cos_t, f.sin_t, f.eiphi);
        const cplx pref = 2.0 * pi / (area * q * kz) * std::sqrt(kz) * std::exp(-I * dot(bs.beams[g].k, offset));
        const Vec3c e[2] = {f.es, f.ep};
        for (int p = 0; p < 2; ++p) {
            const auto row = static_cast<Eigen::Index>(2 * g) + p;
            for (int l = 1; l <= lmax; ++l)
                for (int m = -l; m <= l; ++m) {
                    const int j = vsh_index(l, m);
                    const auto& X = x[static_cast<std::size_t>(j)];
                    const Vec3c kx = cross(f.khat, X);
                    const cplx c = pref * mipow[l % 4];
                    Q(row, j) = c * dot(X, e[p]);
                    Q(row, n + j) = -c * dot(kx, e[p]);
                }
        }
    }
    return Q;
}

/// Diagonal Mie T over the [H; E] basis: magnetic (H-type) channels take T^M,
/// electric (E-type) channels T^E.
inline VectorC mie_diagonal(const MieT& t) {
    const int n = vsh_count(t.lmax);
    VectorC d(2 * n);
    for (int l = 1; l <= t.lmax; ++l)
        for (int m = -l; m <= l; ++m) {
            d(vsh_index(l, m)) = t.tm[static_cast<std::size_t>(l)];
            d(n + vsh_index(l, m)) = t.te[static_cast<std::size_t>(l)];
        }
    return d;
}

/// Self-consistent in-plane multiple scattering: outgoing coefficients
/// b = (I - T Omega)^{-1} T a for regular incident coefficients a.
inline MatrixC plane_scattering_operator(const VectorC& t, const MatrixC& omega, double max_condition = 1e10) {
    const auto n = t.size();
    MatrixC m = MatrixC::Identity(n, n) - t.asDiagonal() * omega;
    Eigen::PartialPivLU<MatrixC> lu(m);
    const double rc = lu.rcond();
    if (!(rc * max_condition >= 1.0))
        throw ResonanceSingularity("sphere plane: I - T*Omega is singular (condition ~ " + std::to_string(1.0 / rc) + ")", 1.0 / rc);
    MatrixC out = lu.solve(MatrixC(t.asDiagonal()));
    return out;
}

/// Layer of spheres on a 2D lattice, reference planes through the centres
/// (zero thickness); host medium on both sides.
inline LayerS sphere_plane_smatrix(const PlaneOfSpheres& plane, const StructureConstants& sc, const BeamSet& bs, int lmax,
                                   double max_condition = 1e10) {
    plane.validate();
    if (lmax != sc.lmax) throw InvalidArgument("sphere_plane_smatrix: lmax differs from the structure constants");
    if (std::abs(bs.omega - sc.omega) > 1e-12 * bs.omega) throw InvalidArgument("sphere_plane_smatrix: omega mismatch");
    if (!(sc.host == plane.scatterer.host)) throw InvalidArgument("sphere_plane_smatrix: host mismatch");
    {
        const Vec2 d = fold_kpar(plane.lattice, bs.kpar - sc.kpar).kpar;
        if (norm(d) > 1e-9 * (1.0 + norm(bs.kpar))) throw InvalidArgument("sphere_plane_smatrix: kpar mismatch");
    }
    const Material& host = plane.scatterer.host;
    LayerS s = LayerS::identity(bs, host);
    const MieT mt = mie_t(plane.scatterer, bs.omega, lmax);
    const VectorC t = mie_diagonal(mt);
    if (t.cwiseAbs().maxCoeff() == 0.0) return s;
    const MatrixC M = plane_scattering_operator(t, sc.vector_matrix(), max_condition);
    const double area = plane.lattice.area();
    const Vec2 off = plane.offset;
    const MatrixC Pp = plane_to_spherical(bs, host, lmax, +1, off);
    const MatrixC Pm = plane_to_spherical(bs, host, lmax, -1, off);
    const MatrixC Qp = spherical_to_plane(bs, host, area, lmax, +1, off);
    const MatrixC Qm = spherical_to_plane(bs, host, area, lmax, -1, off);
    const MatrixC MPp = M * Pp, MPm = M * Pm;
    s.tpp.noalias() += Qp * MPp;
    s.rpm.noalias() = Qm * MPp;
    s.rmp.noalias() = Qp * MPm;
    s.tmm.noalias() += Qm * MPm;
    for (const MatrixC* b : {&s.tpp, &s.rpm, &s.rmp, &s.tmm})
        if (!b->allFinite()) throw InternalError("sphere_plane_smatrix: non-finite S-matrix element");
    return s;
}

}  // namespace phem

#endif  // PHEM_LAYER_HPP
