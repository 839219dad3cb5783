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

// Kirchhoff emissivity (E = A), angle-frequency maps and Planck weighting.

#ifndef PHEM_EMISSIVITY_HPP
#define PHEM_EMISSIVITY_HPP

#include <phem/stack.hpp>

#include <atomic>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

namespace phem {

inline double emissivity_point(const StackDescription& d, double omega, double theta, Polarization pol,
                               const NumericalControls& nc = {}, double phi = 0.0) {
    return solve_stack(d, omega, theta, phi, pol, nc).E;
}

struct EmissivityMap {
    std::vector<double> omega;
    std::vector<double> theta;  // radians
    /// Rows follow omega, columns theta.
    Eigen::MatrixXd s, p, avg;
};

class SweepError : public Error {
public:
    SweepError(const std::string& what, double omega, double theta) : Error(what), omega_(omega), theta_(theta) {}
    double omega() const noexcept { return omega_; }
    double theta() const noexcept { return theta_; }

private:
    double omega_, theta_;
};

namespace detail {

inline void require_monotone(const std::vector<double>& g, const char* name) {
    if (g.empty()) throw InvalidArgument(std::string(name) + " grid must not be empty");
    bool up = true, down = true;
    for (std::size_t i = 1; i < g.size(); ++i) {
        up = up && g[i] > g[i - 1];
        down = down && g[i] < g[i - 1];
    }
    if (!up && !down) throw InvalidArgument(std::string(name) + " grid must be strictly monotone");
}

/// Runs f(i) for i in [0, n) on up to `threads` workers; the first failure is rethrown.
template <class F>
void parallel_for(std::size_t n, int threads, F&& f) {
    const auto workers = static_cast<std::size_t>(std::max(1, threads));
    if (workers == 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr err;
    std::mutex m;
    auto run = [&] {
        for (std::size_t i; !failed && (i = next++) < n;) {
            try {
                f(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(m);
                if (!err) err = std::current_exception();
                failed = true;
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min(workers, n); ++t) pool.emplace_back(run);
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

}  // namespace detail

/// E(omega, theta) for s, p and their average. Each point is independent, so
/// the result does not depend on `threads`.
inline EmissivityMap angular_map(const StackDescription& d, const std::vector<double>& omega, const std::vector<double>& theta,
                                 const NumericalControls& nc = {}, int threads = 1, double phi = 0.0) {
    detail::require_monotone(omega, "omega");
    detail::require_monotone(theta, "theta");
    validate(d);
    EmissivityMap m;
    m.omega = omega;
    m.theta = theta;
    const auto nw = static_cast<Eigen::Index>(omega.size()), nt = static_cast<Eigen::Index>(theta.size());
    m.s.resize(nw, nt);
    m.p.resize(nw, nt);
    detail::parallel_for(omega.size() * theta.size(), threads, [&](std::size_t k) {
        const auto i = static_cast<Eigen::Index>(k / theta.size()), j = static_cast<Eigen::Index>(k % theta.size());
        const double w = omega[static_cast<std::size_t>(i)], th = theta[static_cast<std::size_t>(j)];
        try {
            const auto [s, p] = solve_stack_both(d, w, th, phi, nc);
            m.s(i, j) = s.E;
            m.p(i, j) = p.E;
        } catch (const std::exception& e) {
            throw SweepError(std::string(e.what()) + " (omega = " + std::to_string(w) + ", theta = " + std::to_string(th) + ")", w, th);
        }
    });
    m.avg = 0.5 * (m.s + m.p);
    return m;
}

// ---------------------------------------------------------------------------
// Gap extraction
// ---------------------------------------------------------------------------

struct EmissionGap {
    double lo = 0.0;
    double hi = 0.0;
    double center() const { return 0.5 * (lo + hi); }
    double width() const { return hi - lo; }
};

/// Widest interval with E below `threshold` that is bounded on both sides by
/// grid points at or above it. Edges are linear threshold crossings. A
/// spectrum that never rises back above the threshold has no gap.
inline std::optional<EmissionGap> emission_gap(const std::vector<double>& omega, const std::vector<double>& E, double threshold = 0.2) {
    if (omega.size() != E.size()) throw InvalidArgument("emission_gap: grid and values differ in length");
    for (std::size_t i = 1; i < omega.size(); ++i)
        if (!(omega[i] > omega[i - 1])) throw InvalidArgument("emission_gap: omega grid must be increasing");
    auto cross = [&](std::size_t a, std::size_t b) {
        const double t = (threshold - E[a]) / (E[b] - E[a]);
        return omega[a] + t * (omega[b] - omega[a]);
    };
    std::optional<EmissionGap> best;
    std::size_t i = 0;
    while (i < E.size()) {
        if (E[i] >= threshold) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < E.size() && E[j + 1] < threshold) ++j;
        if (i > 0 && j + 1 < E.size()) {
            EmissionGap g{cross(i - 1, i), cross(j, j + 1)};
            if (!best || g.width() > best->width()) best = g;
        }
        i = j + 1;
    }
    return best;
}

// ---------------------------------------------------------------------------
// Planck weighting
// ---------------------------------------------------------------------------

/// b(x) = x^3 / (e^x - 1), the photon-energy form of Planck's law.
inline double planck_b(double x) {
    if (x < 0.0) throw InvalidArgument("planck_b: x must be >= 0");
    if (x == 0.0) return 0.0;
    return x * x * x / std::expm1(x);
}

/// Integral of b over [0, inf).
inline constexpr double planck_total = pi * pi * pi * pi / 15.0;

/// Location of the maximum of b, by golden-section search.
inline double planck_peak() {
    double a = 1.0, b = 5.0;
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - r * (b - a), d = a + r * (b - a);
    while (b - a > 1e-13) {
        if (planck_b(c) > planck_b(d)) b = d;
        else a = c;
        c = b - r * (b - a);
        d = a + r * (b - a);
    }
    return 0.5 * (a + b);
}

struct PlanckSpectrum {
    std::vector<double> omega;
    /// E(omega) b(omega/x0) / Z, with Z the trapezoid integral of b over the grid.
    std::vector<double> weighted;
    /// Fraction of the full Planck integral inside the grid.
    double coverage = 0.0;
    /// Set when coverage < 0.8.
    bool coverage_warning = false;
    /// Trapezoid integral of `weighted` (the band-averaged emissivity).
    double integral = 0.0;
};

inline double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
    double s = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) s += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
    return s;
}

/// Weights an emissivity spectrum with Planck's law at scale x0 = a kB T / (hbar c).
inline PlanckSpectrum planck_weight(const std::vector<double>& omega, const std::vector<double>& E, double x0) {
    if (!(x0 > 0.0)) throw InvalidArgument("planck_weight: temperature scale must be positive");
    if (omega.size() != E.size() || omega.size() < 2) throw InvalidArgument("planck_weight: need matching grids of at least two points");
    for (std::size_t i = 1; i < omega.size(); ++i)
        if (!(omega[i] > omega[i - 1])) throw InvalidArgument("planck_weight: omega grid must be increasing");
    if (omega.front() < 0.0) throw InvalidArgument("planck_weight: omega must be >= 0");
    std::vector<double> b(omega.size());
    for (std::size_t i = 0; i < omega.size(); ++i) b[i] = planck_b(omega[i] / x0);
    const double Z = trapezoid(omega, b);
    if (!(Z > 0.0)) throw InvalidArgument("planck_weight: grid carries no Planck weight");
    PlanckSpectrum out;
    out.omega = omega;
    out.weighted.resize(omega.size());
    for (std::size_t i = 0; i < omega.size(); ++i) out.weighted[i] = E[i] * b[i] / Z;
    out.coverage = Z / x0 / planck_total;
    out.coverage_warning = out.coverage < 0.8;
    out.integral = trapezoid(omega, out.weighted);
    return out;
}

}  // namespace phem

#endif  // PHEM_EMISSIVITY_HPP
