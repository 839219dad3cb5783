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

// Composition of layer S-matrices into a finite structure, and the
// reflectance / transmittance / absorbance of one incident beam.

#ifndef PHEM_STACK_HPP
#define PHEM_STACK_HPP

#include <phem/layer.hpp>

#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace phem {

/// Numerical controls threaded through every solve.
struct NumericalControls {
    int lmax = lmax_default;
    /// Beam cutoff |kpar + g| in 1/a; <= 0 selects cutoff_factor * |b|min.
    double cutoff = 0.0;
    double cutoff_factor = 2.6;
    /// Star-product solves fail below this reciprocal condition number.
    double pivot_tolerance = 1e-14;
    /// Sphere-plane solves fail above this condition number.
    double max_condition = 1e10;

    friend bool operator==(const NumericalControls&, const NumericalControls&) = default;
};

// ---------------------------------------------------------------------------
// Star product
// ---------------------------------------------------------------------------

namespace detail {

inline Eigen::PartialPivLU<MatrixC> checked_lu(const MatrixC& m, double tol, const char* what) {
    Eigen::PartialPivLU<MatrixC> lu(m);
    const double rc = lu.rcond();
    if (!(rc >= tol)) throw SingularSolve(std::string(what) + ": singular inter-layer solve (condition ~ " + std::to_string(1.0 / rc) + ")", 1.0 / rc);
    return lu;
}

}  // namespace detail

/// Redheffer composition: s1 on the left, s2 on the right.
inline LayerS star_product(const LayerS& s1, const LayerS& s2, double pivot_tolerance = 1e-14) {
    if (s1.dim() != s2.dim()) throw InvalidArgument("star_product: beam sets differ in size");
    if (!(s1.right == s2.left)) throw InvalidArgument("star_product: media at the junction differ");
    const auto n = s1.dim();
    const MatrixC Id = MatrixC::Identity(n, n);
    const auto lu1 = detail::checked_lu(Id - s1.rmp * s2.rpm, pivot_tolerance, "star_product");
    const auto lu2 = detail::checked_lu(Id - s2.rpm * s1.rmp, pivot_tolerance, "star_product");
    LayerS out;
    out.beams = s1.beams;
    out.left = s1.left;
    out.right = s2.right;
    const MatrixC u = lu1.solve(s1.tpp);   // (I - r1mp r2pm)^-1 t1pp
    const MatrixC v = lu2.solve(s2.tmm);   // (I - r2pm r1mp)^-1 t2mm
    out.tpp.noalias() = s2.tpp * u;
    out.rpm = s1.rpm;
    out.rpm.noalias() += s1.tmm * (s2.rpm * u);
    out.tmm.noalias() = s1.tmm * v;
    out.rmp = s2.rmp;
    out.rmp.noalias() += s2.tpp * (s1.rmp * v);
    return out;
}

/// n-fold composition of s with itself by repeated doubling.
inline LayerS repeat_slice(const LayerS& s, int n, double pivot_tolerance = 1e-14) {
    if (n < 0) throw InvalidArgument("repeat_slice: negative count");
    if (n == 0) return LayerS::identity(s.beams, s.left);
    if (!(s.left == s.right)) throw InvalidArgument("repeat_slice: slice must have the same medium on both sides");
    std::optional<LayerS> acc;
    LayerS p = s;
    while (true) {
        if (n & 1) acc = acc ? star_product(*acc, p, pivot_tolerance) : p;
        n >>= 1;
        if (!n) break;
        p = star_product(p, p, pivot_tolerance);
    }
    return *acc;
}

// ---------------------------------------------------------------------------
// Stack description
// ---------------------------------------------------------------------------

/// Boundary into a new medium; later elements live in `to`.
struct Interface {
    Material to{};
    friend bool operator==(const Interface&, const Interface&) = default;
};

/// Free propagation in the current medium.
struct Gap {
    double distance = 0.0;
    friend bool operator==(const Gap&, const Gap&) = default;
};

struct Element;

struct Repeat {
    std::vector<Element> body;
    int count = 1;
    friend bool operator==(const Repeat&, const Repeat&);
};

/// One stack element. A Plate and a PlaneOfSpheres sit in the current medium;
/// a plane's host must equal that medium.
struct Element {
    std::variant<PlaneOfSpheres, Plate, Interface, Gap, Repeat> v;

    Element(PlaneOfSpheres x) : v(std::move(x)) {}  // NOLINT
    Element(Plate x) : v(std::move(x)) {}           // NOLINT
    Element(Interface x) : v(std::move(x)) {}       // NOLINT
    Element(Gap x) : v(std::move(x)) {}             // NOLINT
    Element(Repeat x) : v(std::move(x)) {}          // NOLINT
};

inline bool operator==(const PlaneOfSpheres& a, const PlaneOfSpheres& b) {
    return a.lattice.a1 == b.lattice.a1 && a.lattice.a2 == b.lattice.a2 && a.scatterer == b.scatterer && a.offset == b.offset;
}
inline bool operator==(const Plate& a, const Plate& b) { return a.thickness == b.thickness && a.material == b.material; }
inline bool operator==(const Element& a, const Element& b) { return a.v == b.v; }
inline bool operator==(const Repeat& a, const Repeat& b) { return a.count == b.count && a.body == b.body; }

struct Termination {
    Material medium{};
    /// Opaque: nothing is counted as transmitted (semi-infinite absorber).
    bool opaque = false;
    friend bool operator==(const Termination&, const Termination&) = default;
};

struct StackDescription {
    Material incident{};
    std::vector<Element> elements;
    Termination exit{};

    friend bool operator==(const StackDescription&, const StackDescription&) = default;
};

namespace detail {

inline const Lattice2D* find_lattice(const std::vector<Element>& els) {
    for (const auto& e : els) {
        if (auto p = std::get_if<PlaneOfSpheres>(&e.v)) return &p->lattice;
        if (auto r = std::get_if<Repeat>(&e.v))
            if (auto l = find_lattice(r->body)) return l;
    }
    return nullptr;
}

inline void validate_elements(const std::vector<Element>& els, Material& cur, const Lattice2D* lat) {
    for (const auto& e : els) {
        std::visit(
            [&](const auto& x) {
                using T = std::decay_t<decltype(x)>;
                if constexpr (std::is_same_v<T, PlaneOfSpheres>) {
                    x.validate();
                    if (!(x.scatterer.host == cur))
                        throw InvalidArgument("sphere plane host " + format_complex(x.scatterer.host.eps) +
                                              " differs from the surrounding medium " + format_complex(cur.eps));
                    if (!(x.lattice.a1 == lat->a1 && x.lattice.a2 == lat->a2))
                        throw InvalidArgument("all sphere planes must share one lattice");
                } else if constexpr (std::is_same_v<T, Plate>) {
                    x.validate();
                } else if constexpr (std::is_same_v<T, Interface>) {
                    cur = x.to;
                } else if constexpr (std::is_same_v<T, Gap>) {
                    if (!(x.distance >= 0.0) || !std::isfinite(x.distance)) throw InvalidArgument("gap distance must be >= 0");
                } else {
                    if (x.count < 0) throw InvalidArgument("repeat count must be >= 0");
                    if (x.body.empty()) throw InvalidArgument("repeat body must not be empty");
                    Material inner = cur;
                    validate_elements(x.body, inner, lat);
                    if (!(inner == cur)) throw InvalidArgument("repeat body must end in the medium it starts in");
                }
            },
            e.v);
    }
}

}  // namespace detail

inline void validate(const StackDescription& d) {
    if (!d.incident.lossless()) throw InvalidArgument("incident medium must be lossless");
    if (!d.exit.opaque && !d.exit.medium.lossless())
        throw InvalidArgument("an absorbing exit half-space must be declared opaque");
    Material cur = d.incident;
    detail::validate_elements(d.elements, cur, detail::find_lattice(d.elements));
}

/// Lattice shared by the sphere planes, if any.
inline std::optional<Lattice2D> stack_lattice(const StackDescription& d) {
    if (auto l = detail::find_lattice(d.elements)) return *l;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Solving
// ---------------------------------------------------------------------------

enum class Polarization { s, p };

inline const char* to_string(Polarization p) { return p == Polarization::s ? "s" : "p"; }

struct SpectrumPoint {
    double omega = 0.0;
    double theta = 0.0;
    double phi = 0.0;
    Polarization pol = Polarization::s;
    double R = 0.0;
    double T = 0.0;
    double A = 0.0;
    double E = 0.0;
};

/// Parallel wavevector of a plane wave incident from `incident` at (theta, phi).
inline Vec2 incident_kpar(const Material& incident, double omega, double theta, double phi) {
    const double k = omega * std::sqrt(incident.eps.real()) * std::sin(theta);
    return {k * std::cos(phi), k * std::sin(phi)};
}

/// Single-beam basis for stacks without sphere planes.
inline BeamSet specular_beam_set(double omega, Vec2 kpar, const Material& ambient) {
    BeamSet bs;
    bs.omega = omega;
    bs.kpar = kpar;
    bs.ambient = ambient;
    bs.cutoff = norm(kpar);
    Beam b;
    b.k = kpar;
    b.kmag = norm(kpar);
    bs.beams.push_back(b);
    return bs;
}

inline double resolved_cutoff(const Lattice2D& lat, double omega, const StackDescription& d, const NumericalControls& nc) {
    if (nc.cutoff > 0.0) return nc.cutoff;
    const auto [b1, b2] = reciprocal_basis(lat);
    const double bmin = std::min({norm(b1), norm(b2), norm(b1 + b2), norm(b1 - b2)});
    return std::max(nc.cutoff_factor * bmin, 1.05 * omega * std::sqrt(std::abs(d.incident.eps)));
}

/// Builds the full S-matrix of a stack at one (omega, kpar).
class StackSolver {
public:
    StackSolver(const StackDescription& d, double omega, Vec2 kpar, const NumericalControls& nc)
        : desc_(d), nc_(nc), omega_(omega) {
        validate(d);
        if (!(omega > 0.0) || !std::isfinite(omega)) throw InvalidArgument("omega must be positive");
        if (auto lat = stack_lattice(d)) {
            lattice_ = *lat;
            beams_ = beam_set(*lat, omega, kpar, d.incident, resolved_cutoff(*lat, omega, d, nc));
        } else {
            beams_ = specular_beam_set(omega, kpar, d.incident);
        }
    }

    const BeamSet& beams() const { return beams_; }

    LayerS solve() {
        Material cur = desc_.incident;
        LayerS s = build(desc_.elements, cur);
        if (!(cur == desc_.exit.medium)) s = star(s, interface_smatrix(cur, desc_.exit.medium, beams_));
        return s;
    }

private:
    LayerS star(const LayerS& a, const LayerS& b) const { return star_product(a, b, nc_.pivot_tolerance); }

    LayerS plane(const PlaneOfSpheres& p) {
        // Planes differing only by an in-plane offset share one solve; the
        // offset enters as exp(-i (g - g').s) on every block.
        PlaneOfSpheres base = p;
        base.offset = {0.0, 0.0};
        auto it = planes_.find(key(base));
        if (it == planes_.end()) {
            const auto sc = structure_constants(lattice_, omega_, beams_.kpar, p.scatterer.host, nc_.lmax);
            it = planes_.emplace(key(base), sphere_plane_smatrix(base, *sc, beams_, nc_.lmax, nc_.max_condition)).first;
        }
        if (p.offset[0] == 0.0 && p.offset[1] == 0.0) return it->second;
        LayerS s = it->second;
        const auto n = static_cast<Eigen::Index>(beams_.size());
        VectorC ph(2 * n);
        for (Eigen::Index i = 0; i < n; ++i) ph(2 * i) = ph(2 * i + 1) = std::exp(-I * dot(beams_.beams[static_cast<std::size_t>(i)].g, p.offset));
        const VectorC phc = ph.conjugate();
        for (MatrixC* b : {&s.tpp, &s.rpm, &s.rmp, &s.tmm}) *b = ph.asDiagonal() * (*b) * phc.asDiagonal();
        return s;
    }

    static std::string key(const PlaneOfSpheres& p) {
        std::ostringstream os;
        os.precision(17);
        os << p.scatterer.radius << '|' << p.scatterer.inside.eps << '|' << p.scatterer.host.eps;
        return os.str();
    }

    LayerS build(const std::vector<Element>& els, Material& cur) {
        std::optional<LayerS> acc;
        auto push = [&](const LayerS& s) { acc = acc ? star(*acc, s) : s; };
        for (const auto& e : els) {
            std::visit(
                [&](const auto& x) {
                    using T = std::decay_t<decltype(x)>;
                    if constexpr (std::is_same_v<T, PlaneOfSpheres>) {
                        push(plane(x));
                    } else if constexpr (std::is_same_v<T, Plate>) {
                        push(plate_smatrix(x, beams_, cur, cur));
                    } else if constexpr (std::is_same_v<T, Interface>) {
                        push(interface_smatrix(cur, x.to, beams_));
                        cur = x.to;
                    } else if constexpr (std::is_same_v<T, Gap>) {
                        push(gap_smatrix(x.distance, beams_, cur));
                    } else {
                        Material inner = cur;
                        push(repeat_slice(build(x.body, inner), x.count, nc_.pivot_tolerance));
                    }
                },
                e.v);
        }
        return acc ? *acc : LayerS::identity(beams_, cur);
    }

    const StackDescription& desc_;
    NumericalControls nc_;
    double omega_;
    Lattice2D lattice_{};
    BeamSet beams_;
    std::map<std::string, LayerS> planes_;
};

namespace detail {

inline SpectrumPoint extract(const LayerS& s, const StackDescription& d, double omega, double theta, double phi, Polarization pol) {
    const BeamSet& bs = s.beams;
    const int spec = bs.specular_index();
    if (spec < 0) throw InternalError("incident beam missing from the beam set");
    const Eigen::Index col = 2 * spec + (pol == Polarization::p ? 1 : 0);
    double R = 0.0, T = 0.0;
    for (std::size_t i = 0; i < bs.size(); ++i) {
        for (int p = 0; p < 2; ++p) {
            const Eigen::Index row = static_cast<Eigen::Index>(2 * i) + p;
            const cplx r = s.rpm(row, col), t = s.tpp(row, col);
            if (!is_finite(r) || !is_finite(t)) throw InternalError("non-finite amplitude at omega = " + std::to_string(omega));
            if (bs.propagating(i, d.incident)) R += std::norm(r);
            if (!d.exit.opaque && bs.propagating(i, d.exit.medium)) T += std::norm(t);
        }
    }
    SpectrumPoint sp;
    sp.omega = omega;
    sp.theta = theta;
    sp.phi = phi;
    sp.pol = pol;
    sp.R = R;
    sp.T = T;
    sp.A = 1.0 - R - T;
    sp.E = sp.A;
    return sp;
}

}  // namespace detail

/// Both polarisations from one S-matrix.
inline std::pair<SpectrumPoint, SpectrumPoint> solve_stack_both(const StackDescription& d, double omega, double theta, double phi,
                                                                const NumericalControls& nc = {}) {
    if (!(theta >= 0.0 && theta < pi / 2)) throw InvalidArgument("theta must lie in [0, pi/2)");
    StackSolver solver(d, omega, incident_kpar(d.incident, omega, theta, phi), nc);
    const LayerS s = solver.solve();
    return {detail::extract(s, d, omega, theta, phi, Polarization::s), detail::extract(s, d, omega, theta, phi, Polarization::p)};
}

inline SpectrumPoint solve_stack(const StackDescription& d, double omega, double theta, double phi, Polarization pol,
                                 const NumericalControls& nc = {}) {
    auto both = solve_stack_both(d, omega, theta, phi, nc);
    return pol == Polarization::s ? both.first : both.second;
}

}  // namespace phem

#endif  // PHEM_STACK_HPP
