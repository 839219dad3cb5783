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

// Scene files and built-in presets.
//
// A scene is a sectioned "key = value" text:
//
//   [materials]   name = 12+0.1i           (the name "vacuum" is built in)
//   [lattice]     type = hexagonal | square, constant = a
//                 or a1 = x, y and a2 = x, y
//   [stack]       incident, exit, exit_opaque, backplane_spacing, then the
//                 elements in order:
//                   interface = <material>
//                   gap = <distance>
//                   plate = <material> <thickness>
//                   plane = <inside material> <radius> [f1 f2]
//                   repeat = <count>  ...  end = repeat
//   [sweep]       omega_min, omega_max, omega_points, theta_min, theta_max,
//                 theta_points (degrees), phi (degrees), units
//   [numerics]    lmax, cutoff, cutoff_factor, pivot_tolerance,
//                 max_condition, engine = auto | stack | onedim
//
// A plane's host is the medium current at its position, and its offset is
// f1 a1 + f2 a2. "#" starts a comment. Unknown sections and keys are errors.

#ifndef PHEM_SCENE_HPP
#define PHEM_SCENE_HPP

#include <phem/onedim.hpp>
#include <phem/stack.hpp>

#include <charconv>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace phem {

enum class Units { angular, ordinary };
enum class Engine { automatic, stack, onedim };

inline const char* to_string(Units u) { return u == Units::angular ? "angular" : "ordinary"; }
inline const char* to_string(Engine e) {
    switch (e) {
        case Engine::stack: return "stack";
        case Engine::onedim: return "onedim";
        default: return "auto";
    }
}

struct ConfigIssue {
    int line = 0;  // 0 when the problem has no single location
    std::string message;
};

class ConfigError : public InvalidArgument {
public:
    explicit ConfigError(std::vector<ConfigIssue> issues) : InvalidArgument(join(issues)), issues_(std::move(issues)) {}
    const std::vector<ConfigIssue>& issues() const noexcept { return issues_; }

private:
    static std::string join(const std::vector<ConfigIssue>& v) {
        std::string s;
        for (const auto& i : v) {
            if (!s.empty()) s += '\n';
            s += (i.line > 0 ? "line " + std::to_string(i.line) + ": " : std::string()) + i.message;
        }
        return s;
    }
    std::vector<ConfigIssue> issues_;
};

/// One [stack] entry, kept by name so that scenes serialize back verbatim.
struct StackItem {
    enum class Kind { interface, gap, plate, plane, repeat };
    Kind kind = Kind::gap;
    std::string material;  // interface target, plate material, plane inside
    double value = 0.0;    // gap distance, plate thickness, plane radius
    double f1 = 0.0, f2 = 0.0;
    int count = 0;
    std::vector<StackItem> body;
    int line = 0;  // source line; not part of equality

    bool operator==(const StackItem& o) const {
        return kind == o.kind && material == o.material && value == o.value && f1 == o.f1 && f2 == o.f2 && count == o.count &&
               body == o.body;
    }
};

struct SweepSpec {
    double omega_min = 1.0, omega_max = 3.0;
    int omega_points = 101;
    double theta_min = 0.0, theta_max = 0.0;  // degrees
    int theta_points = 1;
    double phi = 0.0;  // degrees
    Units units = Units::angular;

    friend bool operator==(const SweepSpec&, const SweepSpec&) = default;
};

struct Scene {
    std::map<std::string, cplx> materials;
    std::optional<Lattice2D> lattice;
    std::string incident = "vacuum";
    std::string exit = "vacuum";
    bool exit_opaque = false;
    /// Extra host thickness between the last element and the exit medium.
    double backplane_spacing = 0.0;
    std::vector<StackItem> items;
    SweepSpec sweep;
    NumericalControls numerics;
    Engine engine = Engine::automatic;

    bool operator==(const Scene& o) const {
        const bool lat = lattice.has_value() == o.lattice.has_value() &&
                         (!lattice || (lattice->a1 == o.lattice->a1 && lattice->a2 == o.lattice->a2));
        return lat && materials == o.materials && incident == o.incident && exit == o.exit && exit_opaque == o.exit_opaque &&
               backplane_spacing == o.backplane_spacing && items == o.items && sweep == o.sweep && numerics == o.numerics &&
               engine == o.engine;
    }

    Material material(const std::string& name) const {
        if (auto it = materials.find(name); it != materials.end()) return Material(it->second);
        if (name == "vacuum") return Material{};
        throw InvalidArgument("unknown material '" + name + "'");
    }

    /// The solver-level description, with the backplane gap appended.
    StackDescription stack() const {
        StackDescription d;
        d.incident = material(incident);
        Material cur = d.incident;
        d.elements = build(items, cur);
        if (backplane_spacing > 0.0) d.elements.emplace_back(Gap{backplane_spacing});
        d.exit = {material(exit), exit_opaque};
        return d;
    }

    bool has_planes() const { return has_planes(items); }

    /// Engine actually used for spectra: auto picks the transfer matrix for planar scenes.
    Engine resolved_engine() const {
        if (engine != Engine::automatic) return engine;
        return has_planes() ? Engine::stack : Engine::onedim;
    }

    /// Conversion from the scene's frequency unit to omega a / c.
    double to_angular(double w) const { return sweep.units == Units::angular ? w : 2.0 * pi * w; }
    double from_angular(double w) const { return sweep.units == Units::angular ? w : w / (2.0 * pi); }

    /// Frequencies in the scene's own unit.
    std::vector<double> omega_grid() const { return grid(sweep.omega_min, sweep.omega_max, sweep.omega_points); }
    std::vector<double> theta_grid_deg() const { return grid(sweep.theta_min, sweep.theta_max, sweep.theta_points); }

    static std::vector<double> grid(double lo, double hi, int n) {
        std::vector<double> g(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
        return g;
    }

private:
    std::vector<Element> build(const std::vector<StackItem>& its, Material& cur) const {
        std::vector<Element> out;
        for (const auto& it : its) {
            switch (it.kind) {
                case StackItem::Kind::interface:
                    cur = material(it.material);
                    out.emplace_back(Interface{cur});
                    break;
                case StackItem::Kind::gap: out.emplace_back(Gap{it.value}); break;
                case StackItem::Kind::plate: out.emplace_back(Plate{it.value, material(it.material)}); break;
                case StackItem::Kind::plane: {
                    if (!lattice) throw InvalidArgument("a sphere plane needs a [lattice] section");
                    out.emplace_back(PlaneOfSpheres{*lattice, {it.value, material(it.material), cur}, it.f1 * lattice->a1 + it.f2 * lattice->a2});
                    break;
                }
                case StackItem::Kind::repeat: {
                    Material inner = cur;
                    out.emplace_back(Repeat{build(it.body, inner), it.count});
                    // A body that changes medium leaves the last one current.
                    cur = inner;
                    break;
                }
            }
        }
        return out;
    }

    static bool has_planes(const std::vector<StackItem>& its) {
        for (const auto& it : its)
            if (it.kind == StackItem::Kind::plane || (it.kind == StackItem::Kind::repeat && has_planes(it.body))) return true;
        return false;
    }
};

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
        std::size_t j = i;
        while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

inline std::optional<double> parse_double(std::string_view s) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

inline std::optional<int> parse_int(std::string_view s) {
    s = trim(s);
    int v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

/// "a", "a+bi", "a-bi" or "bi".
inline std::optional<cplx> parse_complex(std::string_view s) {
    std::string t;
    for (char c : s)
        if (c != ' ' && c != '\t') t += c;
    if (t.empty()) return std::nullopt;
    if (t.back() != 'i') {
        auto re = parse_double(t);
        return re ? std::optional<cplx>(cplx(*re, 0.0)) : std::nullopt;
    }
    t.pop_back();
    std::size_t split = std::string::npos;
    for (std::size_t k = t.size(); k-- > 1;)
        if ((t[k] == '+' || t[k] == '-') && t[k - 1] != 'e' && t[k - 1] != 'E') {
            split = k;
            break;
        }
    auto imag_of = [](std::string_view x) -> std::optional<double> {
        if (x.empty() || x == "+") return 1.0;
        if (x == "-") return -1.0;
        return parse_double(x);
    };
    if (split == std::string::npos) {
        auto im = imag_of(t);
        return im ? std::optional<cplx>(cplx(0.0, *im)) : std::nullopt;
    }
    auto re = parse_double(std::string_view(t).substr(0, split));
    auto im = imag_of(std::string_view(t).substr(split));
    if (!re || !im) return std::nullopt;
    return cplx(*re, *im);
}

inline bool valid_name(std::string_view s) {
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    for (char c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
    return true;
}

class SceneParser {
public:
    Scene run(std::string_view text) {
        int lineno = 0;
        std::size_t pos = 0;
        std::vector<std::vector<StackItem>*> open{&scene_.items};
        std::vector<int> open_lines;
        while (pos <= text.size()) {
            const auto nl = text.find('\n', pos);
            std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
            pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
            ++lineno;
            if (auto h = raw.find('#'); h != std::string_view::npos) raw = raw.substr(0, h);
            const auto line = trim(raw);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (open.size() > 1) {
                    error(open_lines.back(), "repeat is not closed by 'end = repeat'");
                    open.resize(1);
                    open_lines.clear();
                }
                section(lineno, line);
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string_view::npos) {
                error(lineno, "expected 'key = value'");
                continue;
            }
            const std::string key(trim(line.substr(0, eq)));
            const auto value = trim(line.substr(eq + 1));
            if (key.empty()) {
                error(lineno, "missing key before '='");
                continue;
            }
            if (value.empty()) {
                error(lineno, "missing value for '" + key + "'");
                continue;
            }
            if (section_.empty()) {
                error(lineno, "'" + key + "' appears before any [section]");
                continue;
            }
            if (section_ == "?") continue;  // already reported
            if (section_ == "stack") stack_key(lineno, key, value, open, open_lines);
            else if (section_ == "materials") material_key(lineno, key, value);
            else if (section_ == "lattice") lattice_key(lineno, key, value);
            else if (section_ == "sweep") sweep_key(lineno, key, value);
            else numerics_key(lineno, key, value);
        }
        if (open.size() > 1) error(open_lines.back(), "repeat is not closed by 'end = repeat'");
        finish();
        if (!issues_.empty()) throw ConfigError(issues_);
        return scene_;
    }

private:
    void error(int line, std::string msg) { issues_.push_back({line, std::move(msg)}); }

    static StackItem make_item(StackItem::Kind k, std::string material = {}) {
        StackItem it;
        it.kind = k;
        it.material = std::move(material);
        return it;
    }

    bool once(int line, const std::string& key) {
        if (!seen_.insert(section_ + "." + key).second) {
            error(line, "duplicate key '" + key + "' in [" + section_ + "]");
            return false;
        }
        return true;
    }

    void section(int line, std::string_view s) {
        static const std::set<std::string> known = {"materials", "lattice", "stack", "sweep", "numerics"};
        if (s.back() != ']') {
            error(line, "malformed section header");
            section_ = "?";
            return;
        }
        const std::string name(trim(s.substr(1, s.size() - 2)));
        if (!known.count(name)) {
            error(line, "unknown section [" + name + "]");
            section_ = "?";
            return;
        }
        if (!sections_.insert(name).second) error(line, "duplicate section [" + name + "]");
        section_ = name;
        if (name == "stack") stack_line_ = line;
        if (name == "lattice") lattice_line_ = line;
    }

    void unknown(int line, const std::string& key) { error(line, "unknown key '" + key + "' in [" + section_ + "]"); }

    template <class T>
    bool number(int line, const std::string& key, std::string_view v, T& out) {
        if constexpr (std::is_same_v<T, int>) {
            auto x = parse_int(v);
            if (!x) return error(line, "'" + key + "' expects an integer, got '" + std::string(v) + "'"), false;
            out = *x;
        } else {
            auto x = parse_double(v);
            if (!x) return error(line, "'" + key + "' expects a number, got '" + std::string(v) + "'"), false;
            out = *x;
        }
        return true;
    }

    void material_key(int line, const std::string& key, std::string_view v) {
        if (!valid_name(key)) return error(line, "invalid material name '" + key + "'");
        if (key == "vacuum") return error(line, "'vacuum' is built in and cannot be redefined");
        if (!once(line, key)) return;
        auto z = parse_complex(v);
        if (!z) return error(line, "'" + key + "' expects a permittivity like 12+0.1i, got '" + std::string(v) + "'");
        try {
            (void)Material(*z);
        } catch (const Error& e) {
            return error(line, e.what());
        }
        scene_.materials[key] = *z;
    }

    void lattice_key(int line, const std::string& key, std::string_view v) {
        if (key != "type" && key != "constant" && key != "a1" && key != "a2") return unknown(line, key);
        if (!once(line, key)) return;
        if (key == "type") {
            if (v != "hexagonal" && v != "square") return error(line, "lattice type must be hexagonal or square");
            lat_type_ = std::string(v);
        } else if (key == "constant") {
            double c = 0.0;
            if (!number(line, key, v, c)) return;
            if (!(c > 0.0)) return error(line, "lattice constant must be positive");
            lat_const_ = c;
        } else {
            const auto comma = v.find(',');
            auto x = comma == std::string_view::npos ? std::nullopt : parse_double(v.substr(0, comma));
            auto y = comma == std::string_view::npos ? std::nullopt : parse_double(v.substr(comma + 1));
            if (!x || !y) return error(line, "'" + key + "' expects 'x, y'");
            (key == "a1" ? a1_ : a2_) = Vec2{*x, *y};
        }
    }

    void stack_key(int line, const std::string& key, std::string_view v, std::vector<std::vector<StackItem>*>& open,
                   std::vector<int>& open_lines) {
        auto& s = scene_;
        if (key == "incident" || key == "exit") {
            if (open.size() > 1) return error(line, "'" + key + "' cannot appear inside a repeat");
            if (!once(line, key)) return;
            (key == "incident" ? s.incident : s.exit) = std::string(v);
            (key == "incident" ? incident_line_ : exit_line_) = line;
        } else if (key == "exit_opaque") {
            if (!once(line, key)) return;
            if (v != "true" && v != "false") return error(line, "exit_opaque must be true or false");
            s.exit_opaque = v == "true";
        } else if (key == "backplane_spacing") {
            if (!once(line, key)) return;
            double b = 0.0;
            if (!number(line, key, v, b)) return;
            if (!(b >= 0.0)) return error(line, "backplane_spacing must be >= 0");
            s.backplane_spacing = b;
        } else if (key == "interface") {
            StackItem it = make_item(StackItem::Kind::interface, std::string(v));
            it.line = line;
            open.back()->push_back(std::move(it));
        } else if (key == "gap") {
            StackItem it = make_item(StackItem::Kind::gap);
            it.line = line;
            if (!number(line, key, v, it.value)) return;
            if (!(it.value >= 0.0)) return error(line, "gap must be >= 0");
            open.back()->push_back(std::move(it));
        } else if (key == "plate") {
            const auto w = split_ws(v);
            if (w.size() != 2) return error(line, "plate expects '<material> <thickness>'");
            StackItem it = make_item(StackItem::Kind::plate, std::string(w[0]));
            it.line = line;
            if (!number(line, key, w[1], it.value)) return;
            if (!(it.value >= 0.0)) return error(line, "plate thickness must be >= 0");
            open.back()->push_back(std::move(it));
        } else if (key == "plane") {
            const auto w = split_ws(v);
            if (w.size() != 2 && w.size() != 4) return error(line, "plane expects '<material> <radius> [f1 f2]'");
            StackItem it = make_item(StackItem::Kind::plane, std::string(w[0]));
            it.line = line;
            if (!number(line, key, w[1], it.value)) return;
            if (!(it.value > 0.0)) return error(line, "sphere radius must be positive");
            if (w.size() == 4 && (!number(line, key, w[2], it.f1) || !number(line, key, w[3], it.f2))) return;
            open.back()->push_back(std::move(it));
        } else if (key == "repeat") {
            StackItem it = make_item(StackItem::Kind::repeat);
            it.line = line;
            if (!number(line, key, v, it.count)) return;
            if (it.count < 0) return error(line, "repeat count must be >= 0");
            open.back()->push_back(std::move(it));
            open.push_back(&open.back()->back().body);
            open_lines.push_back(line);
        } else if (key == "end") {
            if (v != "repeat") return error(line, "'end' only closes a repeat ('end = repeat')");
            if (open.size() == 1) return error(line, "'end = repeat' without an open repeat");
            open.pop_back();
            open_lines.pop_back();
        } else {
            unknown(line, key);
        }
    }

    void sweep_key(int line, const std::string& key, std::string_view v) {
        static const std::set<std::string> known = {"omega_min", "omega_max", "omega_points", "theta_min",
                                                    "theta_max", "theta_points", "phi", "units"};
        auto& w = scene_.sweep;
        if (!known.count(key)) return unknown(line, key);
        if (!once(line, key)) return;
        if (key == "omega_min") number(line, key, v, w.omega_min);
        else if (key == "omega_max") number(line, key, v, w.omega_max);
        else if (key == "omega_points") number(line, key, v, w.omega_points);
        else if (key == "theta_min") number(line, key, v, w.theta_min);
        else if (key == "theta_max") number(line, key, v, w.theta_max);
        else if (key == "theta_points") number(line, key, v, w.theta_points);
        else if (key == "phi") number(line, key, v, w.phi);
        else if (key == "units") {
            if (v == "angular") w.units = Units::angular;
            else if (v == "ordinary") w.units = Units::ordinary;
            else error(line, "units must be angular or ordinary");
        }
        sweep_lines_[key] = line;
    }

    void numerics_key(int line, const std::string& key, std::string_view v) {
        auto& n = scene_.numerics;
        if (!once(line, key)) return;
        if (key == "lmax") {
            if (number(line, key, v, n.lmax) && (n.lmax < 1 || n.lmax > lmax_cap))
                error(line, "lmax must lie in [1, " + std::to_string(lmax_cap) + "]");
        } else if (key == "cutoff") {
            if (number(line, key, v, n.cutoff) && n.cutoff < 0.0) error(line, "cutoff must be >= 0 (0 selects the default)");
        } else if (key == "cutoff_factor") {
            if (number(line, key, v, n.cutoff_factor) && !(n.cutoff_factor > 0.0)) error(line, "cutoff_factor must be positive");
        } else if (key == "pivot_tolerance") {
            if (number(line, key, v, n.pivot_tolerance) && !(n.pivot_tolerance > 0.0)) error(line, "pivot_tolerance must be positive");
        } else if (key == "max_condition") {
            if (number(line, key, v, n.max_condition) && !(n.max_condition > 1.0)) error(line, "max_condition must exceed 1");
        } else if (key == "engine") {
            if (v == "auto") scene_.engine = Engine::automatic;
            else if (v == "stack") scene_.engine = Engine::stack;
            else if (v == "onedim") scene_.engine = Engine::onedim;
            else error(line, "engine must be auto, stack or onedim");
        } else {
            unknown(line, key);
        }
    }

    void finish() {
        auto& s = scene_;
        // Lattice.
        const bool by_type = lat_type_ || lat_const_, by_vec = a1_ || a2_;
        if (by_type && by_vec) error(lattice_line_, "give either type and constant or a1 and a2, not both");
        else if (by_type) {
            if (!lat_type_ || !lat_const_) error(lattice_line_, "lattice needs both type and constant");
            else s.lattice = *lat_type_ == "hexagonal" ? Lattice2D::hexagonal(*lat_const_) : Lattice2D::square(*lat_const_);
        } else if (by_vec) {
            if (!a1_ || !a2_) error(lattice_line_, "lattice needs both a1 and a2");
            else s.lattice = Lattice2D{*a1_, *a2_};
        }
        if (s.lattice) {
            try {
                s.lattice->validate();
            } catch (const Error& e) {
                error(lattice_line_, e.what());
                s.lattice.reset();
            }
        }

        // Sweep.
        auto sl = [&](const char* k) { return sweep_lines_.count(k) ? sweep_lines_.at(k) : 0; };
        const auto& w = s.sweep;
        if (w.omega_points < 1) error(sl("omega_points"), "omega_points must be >= 1");
        if (!(w.omega_min > 0.0)) error(sl("omega_min"), "omega_min must be positive");
        if (!(w.omega_max >= w.omega_min)) error(sl("omega_max"), "omega_max must be >= omega_min");
        if (w.omega_points == 1 && w.omega_max != w.omega_min) error(sl("omega_points"), "a single frequency needs omega_max = omega_min");
        if (w.omega_points > 1 && !(w.omega_max > w.omega_min)) error(sl("omega_max"), "omega_max must exceed omega_min");
        if (w.theta_points < 1) error(sl("theta_points"), "theta_points must be >= 1");
        if (!(w.theta_min >= 0.0 && w.theta_max < 90.0 && w.theta_max >= w.theta_min))
            error(sl("theta_max"), "angles must satisfy 0 <= theta_min <= theta_max < 90");
        if (w.theta_points == 1 && w.theta_max != w.theta_min) error(sl("theta_points"), "a single angle needs theta_max = theta_min");
        if (w.theta_points > 1 && !(w.theta_max > w.theta_min)) error(sl("theta_max"), "theta_max must exceed theta_min");

        // Stack.
        if (s.items.empty()) {
            error(stack_line_, "stack must contain at least one element");
            return;
        }
        bool ok = true;
        auto mat = [&](const std::string& name, int line) -> std::optional<Material> {
            if (name == "vacuum" || s.materials.count(name)) return s.material(name);
            error(line, "unknown material '" + name + "'");
            ok = false;
            return std::nullopt;
        };
        auto inc = mat(s.incident, incident_line_);
        auto ex = mat(s.exit, exit_line_);
        if (inc && !inc->lossless()) error(incident_line_, "incident medium must be lossless");
        if (ex && !ex->lossless() && !s.exit_opaque) error(exit_line_, "an absorbing exit medium must be declared exit_opaque = true");
        check_items(s.items, mat);
        if (!ok || !issues_.empty()) return;
        if (s.engine == Engine::onedim && s.has_planes()) error(stack_line_, "engine onedim cannot handle sphere planes");
        try {
            validate(s.stack());
        } catch (const Error& e) {
            error(stack_line_, e.what());
        }
    }

    template <class F>
    void check_items(const std::vector<StackItem>& its, F& mat) {
        for (const auto& it : its) {
            if (it.kind == StackItem::Kind::interface || it.kind == StackItem::Kind::plate || it.kind == StackItem::Kind::plane)
                mat(it.material, it.line);
            if (it.kind == StackItem::Kind::plane && !scene_.lattice) error(it.line, "a sphere plane needs a [lattice] section");
            if (it.kind == StackItem::Kind::repeat) check_items(it.body, mat);
        }
    }

    Scene scene_;
    std::vector<ConfigIssue> issues_;
    std::string section_;
    std::set<std::string> sections_, seen_;
    std::map<std::string, int> sweep_lines_;
    int stack_line_ = 0, lattice_line_ = 0, incident_line_ = 0, exit_line_ = 0;
    std::optional<std::string> lat_type_;
    std::optional<double> lat_const_;
    std::optional<Vec2> a1_, a2_;
};

inline std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline void write_items(std::ostringstream& os, const std::vector<StackItem>& its, int depth) {
    const std::string ind(static_cast<std::size_t>(2 * depth), ' ');
    for (const auto& it : its) {
        switch (it.kind) {
            case StackItem::Kind::interface: os << ind << "interface = " << it.material << '\n'; break;
            case StackItem::Kind::gap: os << ind << "gap = " << fmt17(it.value) << '\n'; break;
            case StackItem::Kind::plate: os << ind << "plate = " << it.material << ' ' << fmt17(it.value) << '\n'; break;
            case StackItem::Kind::plane:
                os << ind << "plane = " << it.material << ' ' << fmt17(it.value) << ' ' << fmt17(it.f1) << ' ' << fmt17(it.f2) << '\n';
                break;
            case StackItem::Kind::repeat:
                os << ind << "repeat = " << it.count << '\n';
                write_items(os, it.body, depth + 1);
                os << ind << "end = repeat\n";
                break;
        }
    }
}

}  // namespace detail

/// Parses and validates a scene; every problem found is reported with its line.
inline Scene parse_config(std::string_view text) { return detail::SceneParser{}.run(text); }

/// Canonical text of a scene. Numbers carry 17 significant digits, so
/// parse_config(serialize(s)) == s exactly.
inline std::string serialize(const Scene& s) {
    using detail::fmt17;
    std::ostringstream os;
    os << "[materials]\n";
    for (const auto& [k, v] : s.materials) {
        os << k << " = " << fmt17(v.real());
        if (v.imag() != 0.0) os << (std::signbit(v.imag()) ? "" : "+") << fmt17(v.imag()) << 'i';
        os << '\n';
    }
    if (s.lattice) {
        os << "\n[lattice]\n";
        os << "a1 = " << fmt17(s.lattice->a1[0]) << ", " << fmt17(s.lattice->a1[1]) << '\n';
        os << "a2 = " << fmt17(s.lattice->a2[0]) << ", " << fmt17(s.lattice->a2[1]) << '\n';
    }
    os << "\n[stack]\n";
    os << "incident = " << s.incident << '\n';
    os << "exit = " << s.exit << '\n';
    os << "exit_opaque = " << (s.exit_opaque ? "true" : "false") << '\n';
    os << "backplane_spacing = " << fmt17(s.backplane_spacing) << '\n';
    detail::write_items(os, s.items, 0);
    const auto& w = s.sweep;
    os << "\n[sweep]\n";
    os << "units = " << to_string(w.units) << '\n';
    os << "omega_min = " << fmt17(w.omega_min) << '\n';
    os << "omega_max = " << fmt17(w.omega_max) << '\n';
    os << "omega_points = " << w.omega_points << '\n';
    os << "theta_min = " << fmt17(w.theta_min) << '\n';
    os << "theta_max = " << fmt17(w.theta_max) << '\n';
    os << "theta_points = " << w.theta_points << '\n';
    os << "phi = " << fmt17(w.phi) << '\n';
    const auto& n = s.numerics;
    os << "\n[numerics]\n";
    os << "engine = " << to_string(s.engine) << '\n';
    os << "lmax = " << n.lmax << '\n';
    os << "cutoff = " << fmt17(n.cutoff) << '\n';
    os << "cutoff_factor = " << fmt17(n.cutoff_factor) << '\n';
    os << "pivot_tolerance = " << fmt17(n.pivot_tolerance) << '\n';
    os << "max_condition = " << fmt17(n.max_condition) << '\n';
    return os.str();
}

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

namespace detail {

// Inverted opal: four ABC periods of fcc(111) air-sphere planes (nearest
// neighbour a/sqrt2, spacing a/sqrt3) in a slab tangent to the outer spheres.
inline constexpr const char* opal_stack_body = R"(repeat = PERIODS
  gap = 0.28867513459481292
  plane = air 0.30618621 0 0
  gap = 0.28867513459481292
  gap = 0.28867513459481292
  plane = air 0.30618621 0.33333333333333331 0.33333333333333331
  gap = 0.28867513459481292
  gap = 0.28867513459481292
  plane = air 0.30618621 0.66666666666666663 0.66666666666666663
  gap = 0.28867513459481292
end = repeat
)";

inline std::string opal_preset(const char* host, const char* exit, bool opaque, int periods, const std::string& sweep) {
    std::string body = opal_stack_body;
    body.replace(body.find("PERIODS"), 7, std::to_string(periods));
    return std::string("[materials]\nhost = ") + host + "\nair = 1\n" + (std::string(exit) == "vacuum" ? "" : std::string("substrate = ") + exit + "\n") +
           "\n[lattice]\ntype = hexagonal\nconstant = 0.70710678118654746\n\n[stack]\nincident = vacuum\nexit = " +
           (std::string(exit) == "vacuum" ? "vacuum" : "substrate") + "\nexit_opaque = " + (opaque ? "true" : "false") +
           "\ninterface = host\ngap = 0.017511075405187093\n" + body + "gap = 0.017511075405187093\n\n" + sweep +
           "\n[numerics]\nlmax = 7\n";
}

}  // namespace detail

inline const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = {"paper-fig2", "paper-fig3", "paper-fig4"};
    return names;
}

/// Config text of a built-in preset.
inline std::string preset_text(const std::string& name) {
    if (name == "paper-fig2") {
        return detail::opal_preset("12+0.1i", "12+7i", true, 4,
                                   "[sweep]\nomega_min = 1.5\nomega_max = 3.0\nomega_points = 150\n"
                                   "theta_min = 0\ntheta_max = 60\ntheta_points = 13\n");
    }
    if (name == "paper-fig3") {
        return "[materials]\nlayer1 = 2.6\nlayer2 = 1.44\nsubstrate = 12+7i\n\n"
               "[stack]\nincident = vacuum\nexit = substrate\nexit_opaque = true\n"
               "repeat = 16\n  plate = layer1 0.6\n  plate = layer2 0.81\nend = repeat\n\n"
               "[sweep]\nomega_min = 1.0\nomega_max = 2.5\nomega_points = 301\n"
               "theta_min = 0\ntheta_max = 60\ntheta_points = 4\n\n[numerics]\nengine = auto\n";
    }
    if (name == "paper-fig4") {
        return detail::opal_preset("22", "vacuum", false, 8,
                                   "[sweep]\nomega_min = 1.2\nomega_max = 2.6\nomega_points = 141\n"
                                   "theta_min = 0\ntheta_max = 0\ntheta_points = 1\n");
    }
    throw InvalidArgument("unknown preset '" + name + "' (known: paper-fig2, paper-fig3, paper-fig4)");
}

inline Scene preset(const std::string& name) { return parse_config(preset_text(name)); }

}  // namespace phem

#endif  // PHEM_SCENE_HPP
