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

#include <phem/scene.hpp>

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace phem;

namespace {

// Line numbers of every reported issue.
std::vector<int> issue_lines(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        std::vector<int> v;
        for (const auto& i : e.issues()) v.push_back(i.line);
        return v;
    }
    return {};
}

std::string first_message(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.issues().front().message;
    }
    return {};
}

const char* kMinimal = R"([materials]
glass = 2.25

[stack]
plate = glass 0.5
)";

int count_planes(const std::vector<Element>& els) {
    int n = 0;
    for (const auto& e : els) {
        if (std::holds_alternative<PlaneOfSpheres>(e.v)) ++n;
        if (auto r = std::get_if<Repeat>(&e.v)) n += r->count * count_planes(r->body);
    }
    return n;
}

}  // namespace

TEST(ParseConfig, MinimalScene) {
    const Scene s = parse_config(kMinimal);
    EXPECT_EQ(s.materials.at("glass"), cplx(2.25, 0.0));
    ASSERT_EQ(s.items.size(), 1u);
    EXPECT_EQ(s.items[0].kind, StackItem::Kind::plate);
    EXPECT_EQ(s.resolved_engine(), Engine::onedim);
    const StackDescription d = s.stack();
    EXPECT_EQ(d.elements.size(), 1u);
    EXPECT_EQ(d.exit.medium, Material{});
}

TEST(ParseConfig, EmptyStackIsAnError) {
    const std::string text = "[materials]\nglass = 2\n\n[stack]\nincident = vacuum\n";
    EXPECT_EQ(first_message(text), "stack must contain at least one element");
    EXPECT_EQ(issue_lines(text), std::vector<int>{4});
    EXPECT_EQ(first_message("[materials]\nglass = 2\n"), "stack must contain at least one element");
}

TEST(ParseConfig, UnknownKeysAreErrorsWithLines) {
    const std::string text = std::string(kMinimal) + "\n[sweep]\nomega_min = 1\nomega_mx = 2\n\n[numerics]\nlmax = 5\ntolerance = 3\n";
    EXPECT_EQ(issue_lines(text), (std::vector<int>{9, 13}));
    EXPECT_NE(first_message(text).find("omega_mx"), std::string::npos);
    EXPECT_EQ(issue_lines("[stack]\ngap = 1\nwidget = 2\n"), std::vector<int>{3});
    EXPECT_EQ(issue_lines("[materials]\n[colour]\nred = 1\n[stack]\ngap = 1\n"), (std::vector<int>{2}));
}

TEST(ParseConfig, SyntaxErrorsCarryLines) {
    EXPECT_EQ(issue_lines("[stack]\ngap 1\n"), (std::vector<int>{2, 1}));
    EXPECT_EQ(issue_lines("gap = 1\n[stack]\ngap = 1\n"), std::vector<int>{1});
    EXPECT_EQ(issue_lines("[stack\ngap = 1\n"), (std::vector<int>{1, 0}));
    EXPECT_EQ(issue_lines("[stack]\ngap =\n"), (std::vector<int>{2, 1}));
    EXPECT_EQ(issue_lines("[stack]\ngap = 1x\n"), (std::vector<int>{2, 1}));
    // Every problem is reported, not just the first.
    EXPECT_EQ(issue_lines("[materials]\na = 1+\nb = 2-1i\n[stack]\nplate = c 1\n"), (std::vector<int>{2, 3, 5}));
}

TEST(ParseConfig, InvariantViolations) {
    // Unknown material reference.
    EXPECT_EQ(issue_lines("[stack]\ngap = 1\ninterface = glass\n"), std::vector<int>{3});
    // Sphere plane without a lattice.
    EXPECT_EQ(issue_lines("[stack]\nplane = vacuum 0.3\n"), std::vector<int>{2});
    // Repeat bookkeeping.
    EXPECT_EQ(issue_lines("[stack]\nrepeat = 2\ngap = 1\n"), std::vector<int>{2});
    EXPECT_EQ(issue_lines("[stack]\ngap = 1\nend = repeat\n"), std::vector<int>{3});
    EXPECT_EQ(issue_lines("[stack]\nrepeat = -1\ngap = 1\nend = repeat\n"), (std::vector<int>{2, 4}));
    // Absorbing exit must be opaque; the incident side must be lossless.
    EXPECT_EQ(issue_lines("[materials]\nm = 4+1i\n[stack]\nexit = m\ngap = 1\n"), std::vector<int>{4});
    EXPECT_EQ(issue_lines("[materials]\nm = 4+1i\n[stack]\nincident = m\nexit_opaque = true\nexit = m\ngap = 1\n"), std::vector<int>{4});
    // Duplicates and reserved names.
    EXPECT_EQ(issue_lines("[materials]\nm = 2\nm = 3\n[stack]\ngap = 1\n"), std::vector<int>{3});
    EXPECT_EQ(issue_lines("[materials]\nvacuum = 2\n[stack]\ngap = 1\n"), std::vector<int>{2});
    // Numerics ranges and engine choice.
    EXPECT_EQ(issue_lines(std::string(kMinimal) + "[numerics]\nlmax = 15\n"), std::vector<int>{7});
    EXPECT_EQ(issue_lines(std::string(kMinimal) + "[sweep]\ntheta_max = 90\ntheta_points = 3\n"), std::vector<int>{7});
    EXPECT_EQ(issue_lines("[lattice]\ntype = square\nconstant = 1\n[stack]\nplane = vacuum 0.3\n[numerics]\nengine = onedim\n"),
              std::vector<int>{4});
    // A geometric violation found by the solver-level validation points at [stack].
    EXPECT_EQ(issue_lines("[lattice]\ntype = square\nconstant = 1\n[stack]\nplane = vacuum 0.7\n"), std::vector<int>{4});
}

TEST(ParseConfig, ComplexValues) {
    const Scene s = parse_config(
        "[materials]\na = 12+0.1i\nb = 12 + 7i\nc = 3i\nd = -2.5+1e-3i\ne = 1e1+2E-1i\nf = 4\n# comment\n[stack]\ngap = 1 # trailing\n");
    EXPECT_EQ(s.materials.at("a"), cplx(12.0, 0.1));
    EXPECT_EQ(s.materials.at("b"), cplx(12.0, 7.0));
    EXPECT_EQ(s.materials.at("c"), cplx(0.0, 3.0));
    EXPECT_EQ(s.materials.at("d"), cplx(-2.5, 1e-3));
    EXPECT_EQ(s.materials.at("e"), cplx(10.0, 0.2));
    EXPECT_EQ(s.materials.at("f"), cplx(4.0, 0.0));
    EXPECT_FALSE(detail::parse_complex("1+2j").has_value());
    EXPECT_FALSE(detail::parse_complex("i1").has_value());
}

TEST(ParseConfig, LatticeForms) {
    const Scene a = parse_config("[lattice]\ntype = hexagonal\nconstant = 2\n[stack]\ngap = 1\n");
    const Scene b = parse_config("[lattice]\na1 = 2, 0\na2 = 1, 1.7320508075688772\n[stack]\ngap = 1\n");
    EXPECT_EQ(a.lattice->a1, b.lattice->a1);
    EXPECT_NEAR(a.lattice->a2[1], b.lattice->a2[1], 1e-15);
    EXPECT_EQ(issue_lines("[lattice]\ntype = hexagonal\na1 = 1, 0\n[stack]\ngap = 1\n"), std::vector<int>{1});
    EXPECT_EQ(issue_lines("[lattice]\na1 = 1, 0\na2 = 2, 0\n[stack]\ngap = 1\n"), std::vector<int>{1});
}

TEST(Presets, Fig2HoldsTheInvertedOpalConstants) {
    const Scene s = preset("paper-fig2");
    EXPECT_EQ(s.materials.at("host"), cplx(12.0, 0.1));
    EXPECT_EQ(s.materials.at("substrate"), cplx(12.0, 7.0));
    EXPECT_EQ(s.materials.at("air"), cplx(1.0, 0.0));
    EXPECT_TRUE(s.exit_opaque);
    EXPECT_EQ(s.backplane_spacing, 0.0);
    const double a = 1.0 / std::sqrt(2.0), d = 1.0 / std::sqrt(3.0), r = 0.30618621;
    EXPECT_NEAR(s.lattice->a1[0], a, 1e-16);
    EXPECT_NEAR(s.lattice->a2[1], a * std::sqrt(3.0) / 2, 1e-15);
    const StackDescription st = s.stack();
    EXPECT_EQ(count_planes(st.elements), 12);
    EXPECT_EQ(std::get<Repeat>(st.elements[2].v).count, 4);
    EXPECT_NEAR(std::get<Gap>(st.elements[1].v).distance, r - d / 2, 1e-16);
    const auto& body = std::get<Repeat>(st.elements[2].v).body;
    EXPECT_NEAR(std::get<Gap>(body[0].v).distance, d / 2, 1e-16);
    const auto& p1 = std::get<PlaneOfSpheres>(body[4].v);
    EXPECT_EQ(p1.scatterer.radius, r);
    EXPECT_EQ(p1.scatterer.host, Material(cplx(12.0, 0.1)));
    EXPECT_EQ(p1.scatterer.inside, Material{});
    const Vec2 off = (1.0 / 3.0) * (s.lattice->a1 + s.lattice->a2);
    EXPECT_NEAR(p1.offset[0], off[0], 1e-15);
    EXPECT_NEAR(p1.offset[1], off[1], 1e-15);
    EXPECT_EQ(s.numerics.lmax, 7);
    EXPECT_EQ(s.sweep.omega_points * s.sweep.theta_points, 150 * 13);
    EXPECT_EQ(s.sweep.theta_max, 60.0);
    EXPECT_EQ(s.resolved_engine(), Engine::stack);
}

TEST(Presets, Fig3AndFig4) {
    const Scene f3 = preset("paper-fig3");
    EXPECT_EQ(f3.materials.at("layer1"), cplx(2.6, 0.0));
    EXPECT_EQ(f3.materials.at("layer2"), cplx(1.44, 0.0));
    const auto layers = to_onedim(f3.stack());
    ASSERT_EQ(layers.size(), 32u);
    EXPECT_EQ(layers[0].thickness, 0.6);
    EXPECT_EQ(layers[1].thickness, 0.81);
    EXPECT_EQ(f3.resolved_engine(), Engine::onedim);
    EXPECT_EQ(f3.theta_grid_deg(), (std::vector<double>{0, 20, 40, 60}));

    const Scene f4 = preset("paper-fig4");
    EXPECT_EQ(f4.materials.at("host"), cplx(22.0, 0.0));
    EXPECT_FALSE(f4.exit_opaque);
    EXPECT_EQ(f4.exit, "vacuum");
    EXPECT_EQ(count_planes(f4.stack().elements), 24);
    EXPECT_THROW(preset("paper-fig5"), InvalidArgument);
}

TEST(Serialize, RoundTripsPresets) {
    for (const auto& n : preset_names()) {
        const Scene s = preset(n);
        const std::string text = serialize(s);
        const Scene t = parse_config(text);
        EXPECT_EQ(t, s) << n;
        EXPECT_EQ(serialize(t), text) << n;
        EXPECT_EQ(t.stack(), s.stack()) << n;
    }
}

TEST(Serialize, RoundTripsRandomScenes) {
    std::mt19937_64 rng(20261016);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        Scene s;
        s.materials["m1"] = cplx(1.0 + 10 * u(rng), u(rng) < 0.5 ? 0.0 : u(rng));
        s.materials["m2"] = cplx(1.0 + 10 * u(rng), 0.0);
        s.lattice = Lattice2D{{1.0 + u(rng), 0.0}, {u(rng), 1.0 + u(rng)}};
        s.exit = "m1";
        s.exit_opaque = true;
        s.backplane_spacing = u(rng) < 0.5 ? 0.0 : u(rng);
        StackItem gap;
        gap.value = u(rng) / 3;
        StackItem plate;
        plate.kind = StackItem::Kind::plate;
        plate.material = "m2";
        plate.value = u(rng);
        StackItem rep;
        rep.kind = StackItem::Kind::repeat;
        rep.count = 1 + static_cast<int>(5 * u(rng));
        rep.body = {gap, plate, gap};
        s.items = {gap, rep};
        s.sweep.omega_min = 0.1 + u(rng);
        s.sweep.omega_max = s.sweep.omega_min + u(rng);
        s.sweep.omega_points = 2 + trial;
        s.sweep.theta_max = 80 * u(rng);
        s.sweep.theta_points = 3;
        s.sweep.phi = 360 * u(rng);
        s.sweep.units = trial % 2 ? Units::ordinary : Units::angular;
        s.numerics.cutoff = u(rng) * 20;
        s.numerics.pivot_tolerance = 1e-14 * (1 + u(rng));
        s.engine = trial % 3 ? Engine::automatic : Engine::stack;
        const Scene t = parse_config(serialize(s));
        ASSERT_EQ(t, s) << serialize(s);
    }
}

TEST(Scene, UnitsAndGrids) {
    Scene s = parse_config(std::string(kMinimal) + "[sweep]\nunits = ordinary\nomega_min = 0.25\nomega_max = 0.5\nomega_points = 3\n");
    EXPECT_EQ(s.omega_grid(), (std::vector<double>{0.25, 0.375, 0.5}));
    EXPECT_DOUBLE_EQ(s.to_angular(0.5), pi);
    EXPECT_DOUBLE_EQ(s.from_angular(pi), 0.5);
    s.sweep.units = Units::angular;
    EXPECT_EQ(s.to_angular(0.5), 0.5);
}

TEST(Scene, BackplaneSpacingExtendsTheLastMedium) {
    Scene s = preset("paper-fig2");
    s.backplane_spacing = 0.25;
    const auto d = s.stack();
    EXPECT_EQ(std::get<Gap>(d.elements.back().v).distance, 0.25);
    EXPECT_EQ(d.elements.size(), preset("paper-fig2").stack().elements.size() + 1);
}

TEST(OneDimBridge, AsStackAndBackAgree) {
    const std::vector<OneDimLayer> layers = {{Material(2.6), 0.6}, {Material(1.44), 0.81}, {Material(cplx(3.0, 0.2)), 0.3}};
    const Material exit(cplx(12.0, 7.0));
    const auto d = as_stack(layers, Material{}, exit, true);
    const auto back = to_onedim(d);
    ASSERT_EQ(back.size(), layers.size());
    for (double w : {0.7, 1.6, 2.9})
        for (auto pol : {Polarization::s, Polarization::p}) {
            const auto a = solve_onedim(layers, w, 0.4, pol, Material{}, exit, true);
            const auto b = solve_onedim(back, w, 0.4, pol, Material{}, exit, true);
            EXPECT_NEAR(a.R, b.R, 1e-14);
            EXPECT_NEAR(a.A, b.A, 1e-14);
        }
    StackDescription with_plane = preset("paper-fig2").stack();
    EXPECT_THROW(to_onedim(with_plane), InvalidArgument);
}

TEST(Scene, ExampleConfigsParseAndRoundTrip) {
    int n = 0;
    for (const auto& e : std::filesystem::directory_iterator(PHEM_EXAMPLES_DIR)) {
        if (e.path().extension() != ".ini") continue;
        std::ifstream f(e.path());
        std::stringstream ss;
        ss << f.rdbuf();
        const Scene s = parse_config(ss.str());
        EXPECT_EQ(parse_config(serialize(s)), s) << e.path();
        ++n;
    }
    EXPECT_GE(n, 4);
}
