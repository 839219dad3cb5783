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

// phem: emissivity, spectra and band structure of photonic-crystal films.

#include <phem/cli.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

struct Common {
    std::string config, preset, out = ".", units;
    int threads = 1;
    std::optional<int> lmax;
    std::optional<double> cutoff;
};

std::string read_text(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw phem::Error("cannot read " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// Re-expresses the sweep grid in the requested unit; the physical range is unchanged.
void set_units(phem::Scene& s, const std::string& u) {
    if (u.empty()) return;
    const phem::Units want = u == "ordinary" ? phem::Units::ordinary : phem::Units::angular;
    if (want == s.sweep.units) return;
    const double f = want == phem::Units::ordinary ? 1.0 / (2.0 * phem::pi) : 2.0 * phem::pi;
    s.sweep.omega_min *= f;
    s.sweep.omega_max *= f;
    s.sweep.units = want;
}

phem::Scene load(const Common& c) {
    if (!c.config.empty() && !c.preset.empty()) throw phem::InvalidArgument("give either --config or --preset, not both");
    if (c.config.empty() && c.preset.empty()) throw phem::InvalidArgument("a scene is required: --config PATH or --preset NAME");
    phem::Scene s = c.config.empty() ? phem::preset(c.preset) : phem::parse_config(read_text(c.config));
    if (c.lmax) {
        if (*c.lmax < 1 || *c.lmax > phem::lmax_cap) throw phem::InvalidArgument("--lmax must lie in [1, 14]");
        s.numerics.lmax = *c.lmax;
    }
    if (c.cutoff) {
        if (!(*c.cutoff >= 0.0)) throw phem::InvalidArgument("--cutoff must be >= 0");
        s.numerics.cutoff = *c.cutoff;
    }
    set_units(s, c.units);
    return s;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"phem: thermal emissivity of photonic-crystal films by layer multiple scattering"};
    app.require_subcommand(1);
    app.fallthrough();
    Common c;
    app.add_option("--config", c.config, "Scene file")->check(CLI::ExistingFile);
    app.add_option("--preset", c.preset, "Built-in scene")->check(CLI::IsMember(phem::preset_names()));
    app.add_option("--out", c.out, "Output directory")->capture_default_str();
    app.add_option("--threads", c.threads, "Worker threads for sweeps")->check(CLI::Range(1, 1024))->capture_default_str();
    app.add_option("--lmax", c.lmax, "Multipole cutoff (overrides the scene)");
    app.add_option("--cutoff", c.cutoff, "Beam cutoff |k + g| in 1/a; 0 selects the default (overrides the scene)");
    app.add_option("--units", c.units, "Frequency unit of inputs and outputs")->check(CLI::IsMember({"angular", "ordinary"}));

    auto* spectrum = app.add_subcommand("spectrum", "R, T, A and E on the scene grid (spectrum.csv)");
    auto* sweep = app.add_subcommand("sweep", "Emissivity maps over frequency and angle (sweep.csv, sweep_{s,p,avg}.svg)");
    auto* band = app.add_subcommand("band", "Complex band structure of the repeated slice (band.csv, band.svg)");
    auto* mie = app.add_subcommand("mie", "Single-sphere efficiencies (mie.csv)");
    auto* validate = app.add_subcommand("validate", "Invariant residuals; all presets when no scene is given");

    CLI11_PARSE(app, argc, argv);

    try {
        const phem::RunOptions opt{c.out, c.threads};
        phem::RunResult r;
        if (validate->parsed()) {
            std::vector<std::pair<std::string, phem::Scene>> scenes;
            if (c.config.empty() && c.preset.empty()) {
                for (const auto& n : phem::preset_names()) {
                    Common one = c;
                    one.preset = n;
                    scenes.emplace_back(n, load(one));
                }
            } else {
                scenes.emplace_back(c.preset.empty() ? c.config : c.preset, load(c));
            }
            r = phem::run_validate(scenes, opt);
        } else {
            const phem::Scene s = load(c);
            if (spectrum->parsed()) r = phem::run_spectrum(s, opt);
            else if (sweep->parsed()) r = phem::run_sweep(s, opt);
            else if (band->parsed()) r = phem::run_band(s, opt);
            else if (mie->parsed()) r = phem::run_mie(s, opt);
        }
        std::cout << r.report;
        for (const auto& f : r.files) std::cout << "wrote " << f.string() << '\n';
        return r.exit_code;
    } catch (const phem::ConfigError& e) {
        std::cerr << "phem: invalid scene\n" << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "phem: " << e.what() << '\n';
        return 1;
    }
}
