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

// Subcommand drivers behind the phem tool. Each one computes in parallel,
// assembles its tables on one thread in grid order, and writes files.

#ifndef PHEM_CLI_HPP
#define PHEM_CLI_HPP

#include <phem/band.hpp>
#include <phem/emissivity.hpp>
#include <phem/lattice.hpp>
#include <phem/mie.hpp>
#include <phem/onedim.hpp>
#include <phem/output.hpp>
#include <phem/scene.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace phem {

struct RunOptions {
    std::filesystem::path out = ".";
    int threads = 1;
};

struct RunResult {
    std::vector<std::filesystem::path> files;
    /// Human-readable summary for stdout.
    std::string report;
    int exit_code = 0;
};

namespace detail {

inline std::filesystem::path write_file(const std::filesystem::path& dir, const std::string& name, const std::string& body) {
    std::filesystem::create_directories(dir);
    const auto p = dir / name;
    std::ofstream f(p, std::ios::binary);
    if (!f) throw Error("cannot open " + p.string() + " for writing");
    f << body;
    f.close();
    if (!f) throw Error("failed writing " + p.string());
    return p;
}

inline std::string omega_header(const Scene& s) { return std::string("omega[") + to_string(s.sweep.units) + "]"; }

inline double deg(double x) { return x * pi / 180.0; }

}  // namespace detail

/// Both polarisations at one (omega, theta) with the scene's engine; omega in
/// c/a (angular), theta in radians.
inline std::pair<SpectrumPoint, SpectrumPoint> solve_scene_point(const Scene& s, const StackDescription& d, double omega, double theta) {
    if (s.resolved_engine() == Engine::onedim) {
        const auto layers = to_onedim(d);
        std::pair<SpectrumPoint, SpectrumPoint> out;
        for (auto pol : {Polarization::s, Polarization::p}) {
            const auto r = solve_onedim(layers, omega, theta, pol, d.incident, d.exit.medium, d.exit.opaque);
            SpectrumPoint sp{omega, theta, detail::deg(s.sweep.phi), pol, r.R, r.T, r.A, r.A};
            (pol == Polarization::s ? out.first : out.second) = sp;
        }
        return out;
    }
    return solve_stack_both(d, omega, theta, detail::deg(s.sweep.phi), s.numerics);
}

/// Spectra on the scene grid, indexed [theta][omega].
inline std::vector<std::vector<std::pair<SpectrumPoint, SpectrumPoint>>> scene_spectra(const Scene& s, int threads) {
    const auto d = s.stack();
    const auto w = s.omega_grid(), th = s.theta_grid_deg();
    std::vector<std::vector<std::pair<SpectrumPoint, SpectrumPoint>>> out(th.size(), std::vector<std::pair<SpectrumPoint, SpectrumPoint>>(w.size()));
    detail::parallel_for(w.size() * th.size(), threads, [&](std::size_t k) {
        const std::size_t j = k / w.size(), i = k % w.size();
        const double omega = s.to_angular(w[i]), theta = detail::deg(th[j]);
        try {
            out[j][i] = solve_scene_point(s, d, omega, theta);
        } catch (const std::exception& e) {
            throw SweepError(std::string(e.what()) + " (omega = " + format_number(w[i]) + ", theta = " + format_number(th[j]) + " deg)", omega, theta);
        }
    });
    return out;
}

inline std::string gap_line(const Scene& s, double theta_deg, const char* pol, const std::vector<double>& w, const std::vector<double>& E) {
    std::ostringstream os;
    os << "  theta " << format_number(theta_deg) << " deg, " << pol << ": ";
    if (const auto g = emission_gap(w, E)) {
        os << "E < 0.2 on [" << format_number(g->lo) << ", " << format_number(g->hi) << "], centre " << format_number(g->center()) << ' '
           << to_string(s.sweep.units);
    } else {
        os << "no bounded E < 0.2 band";
    }
    return os.str() + "\n";
}

inline RunResult run_spectrum(const Scene& s, const RunOptions& o) {
    const auto pts = scene_spectra(s, o.threads);
    const auto w = s.omega_grid(), th = s.theta_grid_deg();
    CsvWriter csv({detail::omega_header(s), "theta[deg]", "pol", "R", "T", "A", "E"});
    RunResult r;
    r.report = std::string("spectrum (") + to_string(s.resolved_engine()) + " engine)\n";
    for (std::size_t j = 0; j < th.size(); ++j) {
        std::vector<double> es, ep;
        for (std::size_t i = 0; i < w.size(); ++i) {
            for (const auto* p : {&pts[j][i].first, &pts[j][i].second})
                csv.row({format_number(w[i]), format_number(th[j]), to_string(p->pol), format_number(p->R), format_number(p->T),
                         format_number(p->A), format_number(p->E)});
            es.push_back(pts[j][i].first.E);
            ep.push_back(pts[j][i].second.E);
        }
        r.report += gap_line(s, th[j], "s", w, es) + gap_line(s, th[j], "p", w, ep);
    }
    r.files.push_back(detail::write_file(o.out, "spectrum.csv", csv.str()));
    r.files.push_back(detail::write_file(o.out, "scene.ini", serialize(s)));
    return r;
}

inline RunResult run_sweep(const Scene& s, const RunOptions& o) {
    const auto pts = scene_spectra(s, o.threads);
    const auto w = s.omega_grid(), th = s.theta_grid_deg();
    const auto nw = static_cast<Eigen::Index>(w.size()), nt = static_cast<Eigen::Index>(th.size());
    Eigen::MatrixXd es(nw, nt), ep(nw, nt);
    for (Eigen::Index j = 0; j < nt; ++j)
        for (Eigen::Index i = 0; i < nw; ++i) {
            es(i, j) = pts[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)].first.E;
            ep(i, j) = pts[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)].second.E;
        }
    const Eigen::MatrixXd ea = 0.5 * (es + ep);
    CsvWriter csv({detail::omega_header(s), "theta[deg]", "pol", "E"});
    for (Eigen::Index j = 0; j < nt; ++j)
        for (Eigen::Index i = 0; i < nw; ++i) {
            const auto W = format_number(w[static_cast<std::size_t>(i)]), T = format_number(th[static_cast<std::size_t>(j)]);
            csv.row({W, T, "s", format_number(es(i, j))});
            csv.row({W, T, "p", format_number(ep(i, j))});
            csv.row({W, T, "avg", format_number(ea(i, j))});
        }
    RunResult r;
    r.report = std::string("sweep (") + to_string(s.resolved_engine()) + " engine)\n";
    for (Eigen::Index j = 0; j < nt; ++j) {
        const auto col = [&](const Eigen::MatrixXd& m) { return std::vector<double>(m.col(j).data(), m.col(j).data() + nw); };
        const double t = th[static_cast<std::size_t>(j)];
        r.report += gap_line(s, t, "s", w, col(es)) + gap_line(s, t, "p", w, col(ep)) + gap_line(s, t, "avg", w, col(ea));
    }
    r.files.push_back(detail::write_file(o.out, "sweep.csv", csv.str()));
    for (const auto& [name, m] : {std::pair<const char*, const Eigen::MatrixXd*>{"s", &es}, {"p", &ep}, {"avg", &ea}}) {
        Heatmap h{std::string("Emissivity (") + name + ")", "theta [deg]", std::string("omega [c/a, ") + to_string(s.sweep.units) + "]", "E", th, w, *m};
        r.files.push_back(detail::write_file(o.out, std::string("sweep_") + name + ".svg", render_heatmap(h)));
    }
    r.files.push_back(detail::write_file(o.out, "scene.ini", serialize(s)));
    return r;
}

// ---------------------------------------------------------------------------
// Bands
// ---------------------------------------------------------------------------

/// First top-level repeat of the stack and the medium it sits in.
inline std::pair<std::vector<Element>, Material> band_body(const StackDescription& d) {
    Material cur = d.incident;
    for (const auto& e : d.elements) {
        if (auto i = std::get_if<Interface>(&e.v)) cur = i->to;
        if (auto r = std::get_if<Repeat>(&e.v)) return {r->body, cur};
    }
    throw InvalidArgument("band structure needs a repeat block in [stack]");
}

inline RunResult run_band(const Scene& s, const RunOptions& o) {
    const auto d = s.stack();
    const auto [body, medium] = band_body(d);
    if (!medium.lossless())
        throw InvalidArgument("band structure needs a lossless host; the repeat sits in eps = " + format_complex(medium.eps));
    const double period = slice_period(body);
    const auto w = s.omega_grid();
    const double theta = detail::deg(s.sweep.theta_min), phi = detail::deg(s.sweep.phi);
    std::vector<BandPoint> bands(w.size());
    std::vector<std::pair<SpectrumPoint, SpectrumPoint>> trans(w.size());
    detail::parallel_for(w.size(), o.threads, [&](std::size_t i) {
        const double omega = s.to_angular(w[i]);
        try {
            bands[i] = band_point(body, medium, omega, incident_kpar(d.incident, omega, theta, phi), s.numerics);
            trans[i] = solve_scene_point(s, d, omega, theta);
        } catch (const std::exception& e) {
            throw SweepError(std::string(e.what()) + " (omega = " + format_number(w[i]) + ")", omega, theta);
        }
    });
    for (std::size_t i = 1; i < bands.size(); ++i) connect_bands(bands[i - 1], bands[i]);

    CsvWriter csv({detail::omega_header(s), "Re(kz)d/pi", "Im(kz)d", "propagating"});
    Series re{"propagating", "#1f4e9c", {}, {}}, im{"least decay", "#c0392b", {}, {}};
    Series ts{"T (s)", "#1f4e9c", {}, {}, false}, tp{"T (p)", "#c0392b", {}, {}, false};
    for (std::size_t i = 0; i < w.size(); ++i) {
        const auto& b = bands[i];
        for (std::size_t k = 0; k < b.kz_list.size(); ++k) {
            const double x = b.kz_list[k].real() * period / pi, y = b.kz_list[k].imag() * period;
            csv.row({format_number(w[i]), format_number(x), format_number(y), b.is_propagating(k) ? "1" : "0"});
            if (b.is_propagating(k)) {
                re.x.push_back(std::abs(x));
                re.y.push_back(w[i]);
            }
        }
        if (std::isfinite(b.min_decay())) {
            im.x.push_back(b.min_decay() * period);
            im.y.push_back(w[i]);
        }
        ts.x.push_back(std::log10(std::max(trans[i].first.T, 1e-300)));
        ts.y.push_back(w[i]);
        tp.x.push_back(std::log10(std::max(trans[i].second.T, 1e-300)));
        tp.y.push_back(w[i]);
    }
    const std::string wl = std::string("omega [c/a, ") + to_string(s.sweep.units) + "]";
    Panel p1{"Re(kz) d / pi", wl, {re}}, p2{"Im(kz) d", wl, {im}}, p3{"log10 T", wl, {ts, tp}};
    p1.y0 = p2.y0 = p3.y0 = w.front();
    p1.y1 = p2.y1 = p3.y1 = w.back();

    RunResult r;
    r.report = "band structure (period " + format_number(period) + ", theta " + format_number(s.sweep.theta_min) + " deg)\n";
    std::vector<BandPoint> scan;
    for (auto b : bands) {
        b.omega = s.from_angular(b.omega);
        scan.push_back(std::move(b));
    }
    const auto gaps = w.size() > 1 ? gap_edges(scan) : std::vector<GapInterval>{};
    for (const auto& g : gaps) r.report += "  no propagating mode on [" + format_number(g.lo) + ", " + format_number(g.hi) + "]\n";
    if (gaps.empty()) r.report += "  no band gap on the scanned grid\n";
    r.files.push_back(detail::write_file(o.out, "band.csv", csv.str()));
    r.files.push_back(detail::write_file(o.out, "band.svg", render_panels("Complex bands and transmittance", {p1, p2, p3})));
    r.files.push_back(detail::write_file(o.out, "scene.ini", serialize(s)));
    return r;
}

// ---------------------------------------------------------------------------
// Mie
// ---------------------------------------------------------------------------

namespace detail {

inline void collect_spheres(const std::vector<Element>& els, std::vector<SphereScatterer>& out) {
    for (const auto& e : els) {
        if (auto p = std::get_if<PlaneOfSpheres>(&e.v)) {
            if (std::find(out.begin(), out.end(), p->scatterer) == out.end()) out.push_back(p->scatterer);
        } else if (auto r = std::get_if<Repeat>(&e.v)) {
            collect_spheres(r->body, out);
        }
    }
}

}  // namespace detail

inline RunResult run_mie(const Scene& s, const RunOptions& o) {
    std::vector<SphereScatterer> spheres;
    detail::collect_spheres(s.stack().elements, spheres);
    if (spheres.empty()) throw InvalidArgument("the scene contains no spheres");
    const auto w = s.omega_grid();
    CsvWriter csv({detail::omega_header(s), "radius", "eps_inside", "eps_host", "Q_ext", "Q_sca", "Q_abs"});
    RunResult r;
    for (const auto& sp : spheres) {
        for (double x : w) {
            const auto q = mie_cross_sections(sp, s.to_angular(x));
            auto f = [&](double v) { return q ? format_number(v) : std::string("n/a"); };
            csv.row({format_number(x), format_number(sp.radius), format_complex(sp.inside.eps), format_complex(sp.host.eps), f(q ? q->ext : 0),
                     f(q ? q->sca : 0), f(q ? q->abs : 0)});
        }
        if (!sp.host.lossless())
            r.report += "sphere r = " + format_number(sp.radius) + " in eps " + format_complex(sp.host.eps) +
                        ": absorbing host, efficiencies not defined (n/a)\n";
    }
    r.files.push_back(detail::write_file(o.out, "mie.csv", csv.str()));
    return r;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct Check {
    std::string scene, name;
    double residual = 0.0, threshold = 0.0;
    bool pass() const { return residual < threshold; }
};

namespace detail {

/// The same scene with every permittivity made real and the exit transparent.
inline Scene lossless_variant(Scene s) {
    for (auto& [k, v] : s.materials) v = cplx(v.real(), 0.0);
    s.exit_opaque = false;
    return s;
}

inline std::vector<std::size_t> sample_indices(std::size_t n) {
    std::vector<std::size_t> k;
    for (std::size_t q = 0; q <= 4; ++q) {
        const std::size_t i = (n - 1) * q / 4;
        if (k.empty() || k.back() != i) k.push_back(i);
    }
    return k;
}

}  // namespace detail

/// Invariant residuals of one scene on a coarse sample of its grid.
inline std::vector<Check> validate_scene(const std::string& name, const Scene& s) {
    std::vector<Check> out;
    const auto d = s.stack();
    const auto wg = s.omega_grid(), tg = s.theta_grid_deg();
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i : detail::sample_indices(wg.size()))
        for (double t : {tg.front(), tg.back()}) {
            pts.emplace_back(s.to_angular(wg[i]), detail::deg(t));
            if (tg.size() == 1) break;
        }

    // Passivity of the scene itself.
    Check pas{name, "0 <= R, T, A <= 1", 0.0, 1e-9};
    for (auto [w, t] : pts) {
        const auto [ps, pp] = solve_scene_point(s, d, w, t);
        for (const auto* p : {&ps, &pp})
            for (double v : {p->R, p->T, p->A}) pas.residual = std::max({pas.residual, -v, v - 1.0});
    }
    out.push_back(pas);

    // Energy conservation with losses switched off.
    const Scene ls = detail::lossless_variant(s);
    const auto ld = ls.stack();
    const bool threed = s.resolved_engine() == Engine::stack;
    Check en{name, "lossless |R + T - 1|", 0.0, threed ? 1e-6 : 1e-10};
    for (auto [w, t] : pts) {
        const auto [ps, pp] = solve_scene_point(ls, ld, w, t);
        en.residual = std::max({en.residual, std::abs(ps.R + ps.T - 1.0), std::abs(pp.R + pp.T - 1.0)});
    }
    out.push_back(en);

    if (!s.has_planes()) {
        Check de{name, "stack vs transfer matrix (R, T, A)", 0.0, 1e-10};
        Scene st = s;
        st.engine = Engine::stack;
        Scene od = s;
        od.engine = Engine::onedim;
        for (auto [w, t] : pts) {
            const auto a = solve_scene_point(st, d, w, t), b = solve_scene_point(od, d, w, t);
            for (auto [x, y] : {std::pair{&a.first, &b.first}, std::pair{&a.second, &b.second}})
                de.residual = std::max({de.residual, std::abs(x->R - y->R), std::abs(x->T - y->T), std::abs(x->A - y->A)});
        }
        out.push_back(de);
        return out;
    }

    // Sphere T-matrices.
    std::vector<SphereScatterer> spheres;
    detail::collect_spheres(d.elements, spheres);
    // The bound |1 + 2T| <= 1 needs a lossless host: a sphere less absorbing
    // than its host is a net source relative to it. Spheres of the lossless
    // variant are checked for unitarity in every case.
    std::vector<SphereScatterer> mie_set;
    detail::collect_spheres(ld.elements, mie_set);
    for (const auto& sp : spheres)
        if (sp.host.lossless() && std::find(mie_set.begin(), mie_set.end(), sp) == mie_set.end()) mie_set.push_back(sp);
    Check mu{name, "Mie |1 + 2T| unitarity / passivity", 0.0, 1e-10};
    for (const auto& sp : mie_set)
        for (auto [w, t] : pts) {
            const auto m = mie_t(sp, w, s.numerics.lmax);
            const bool lossless = sp.inside.lossless() && sp.host.lossless();
            for (std::size_t l = 1; l < m.te.size(); ++l)
                for (cplx x : {m.te[l], m.tm[l]}) {
                    const double dev = std::abs(1.0 + 2.0 * x) - 1.0;
                    mu.residual = std::max(mu.residual, lossless ? std::abs(dev) : std::max(dev, 0.0));
                }
        }
    out.push_back(mu);

    // Ewald splitting-parameter independence.
    Check ew{name, "lattice sums vs Ewald parameter", 0.0, 1e-8};
    const Lattice2D lat = *s.lattice;
    for (const auto& sp : spheres) {
        const double w = pts[pts.size() / 2].first;
        const cplx q = sp.host.wavenumber(w);
        const Vec2 k = incident_kpar(d.incident, w, detail::deg(tg.back()), detail::deg(s.sweep.phi));
        const double eta0 = default_ewald_eta(lat, q);
        const int lam = 2 * s.numerics.lmax;
        const auto a = lattice_sums(lat, q, k, lam, eta0 / std::sqrt(2.0)), b = lattice_sums(lat, q, k, lam, eta0 * std::sqrt(2.0));
        double scale = 0.0, diff = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            scale = std::max(scale, std::abs(a[i]));
            diff = std::max(diff, std::abs(a[i] - b[i]));
        }
        ew.residual = std::max(ew.residual, diff / scale);
    }
    out.push_back(ew);

    // Truncation: lmax + 1 and a 30% larger beam cutoff.
    Check cv{name, "E change for lmax + 1, cutoff x 1.3", 0.0, 1e-3};
    Scene fine = s;
    fine.numerics.lmax = std::min(lmax_cap, s.numerics.lmax + 1);
    if (fine.numerics.cutoff > 0.0) fine.numerics.cutoff *= 1.3;
    else fine.numerics.cutoff_factor *= 1.3;
    for (auto [w, t] : pts) {
        const auto a = solve_scene_point(s, d, w, t), b = solve_scene_point(fine, d, w, t);
        cv.residual = std::max({cv.residual, std::abs(a.first.E - b.first.E), std::abs(a.second.E - b.second.E)});
    }
    out.push_back(cv);
    return out;
}

inline RunResult run_validate(const std::vector<std::pair<std::string, Scene>>& scenes, const RunOptions& o) {
    std::vector<Check> all;
    for (const auto& [n, s] : scenes) {
        auto c = validate_scene(n, s);
        all.insert(all.end(), c.begin(), c.end());
    }
    CsvWriter csv({"scene", "check", "residual", "threshold", "status"});
    RunResult r;
    for (const auto& c : all) {
        csv.row({c.scene, c.name, format_number(c.residual), format_number(c.threshold), c.pass() ? "pass" : "FAIL"});
        r.report += std::string(c.pass() ? "pass " : "FAIL ") + c.scene + ": " + c.name + "  residual " + format_number(c.residual) + " (< " +
                    format_number(c.threshold) + ")\n";
        if (!c.pass()) r.exit_code = 1;
    }
    r.files.push_back(detail::write_file(o.out, "validate.csv", csv.str()));
    return r;
}

}  // namespace phem

#endif  // PHEM_CLI_HPP
