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

#ifndef PHEM_CORE_HPP
#define PHEM_CORE_HPP

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>

namespace phem {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr cplx I{0.0, 1.0};

// ---------------------------------------------------------------------------
// Error hierarchy. Every failure raised by the library derives from Error so
// callers can catch one type; the subclasses let tests pin the failure mode.
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Argument at a singular point of the function (e.g. h_l(0)).
class SingularArgument : public Error {
public:
    using Error::Error;
};

/// A series or lattice sum failed to converge; the message carries diagnostics.
class ConvergenceFailure : public Error {
public:
    using Error::Error;
};

/// A dense linear solve whose reciprocal condition number fell below the
/// configured tolerance.
class SingularSolve : public Error {
public:
    SingularSolve(const std::string& what, double condition)
        : Error(what), condition_(condition) {}
    double condition() const noexcept { return condition_; }

private:
    double condition_;
};

/// (I - T*Omega) of a sphere plane is numerically singular.
class ResonanceSingularity : public SingularSolve {
public:
    using SingularSolve::SingularSolve;
};

/// Non-finite numbers appeared where the algorithm guarantees finite ones.
class InternalError : public Error {
public:
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Branch rule shared by every module: sqrt(w) with Im >= 0, and Re >= 0 when
// Im == 0. Waves exp(i*kz*z) therefore decay (or propagate) towards +z.
// ---------------------------------------------------------------------------

inline cplx sqrt_branch(cplx w) {
    cplx s = std::sqrt(w);
    if (s.imag() < 0.0 || (s.imag() == 0.0 && s.real() < 0.0)) s = -s;
    return s;
}

inline bool is_finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

/// Homogeneous, non-magnetic, passive medium.
struct Material {
    cplx eps{1.0, 0.0};

    Material() = default;
    Material(cplx e) : eps(e) {  // NOLINT: implicit from a permittivity is intended
        if (!is_finite(e)) throw InvalidArgument("material permittivity must be finite");
        if (e.imag() < 0.0) throw InvalidArgument("material must be passive (Im eps >= 0)");
    }
    Material(double e) : Material(cplx(e, 0.0)) {}  // NOLINT

    bool lossless() const noexcept { return eps.imag() == 0.0; }
    /// Wavenumber omega*sqrt(eps) in units of 1/a.
    cplx wavenumber(double omega) const { return omega * sqrt_branch(eps); }

    friend bool operator==(const Material&, const Material&) = default;
};

inline std::string format_complex(cplx z) {
    std::ostringstream os;
    os.precision(12);
    os << z.real();
    if (z.imag() != 0.0) os << (z.imag() < 0 ? "-" : "+") << std::abs(z.imag()) << "i";
    return os.str();
}

}  // namespace phem

#endif  // PHEM_CORE_HPP
