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

#include <phem/emissivity.hpp>

#include <gtest/gtest.h>

#include <algorithm>

using namespace phem;

namespace {

const double kRadius = 0.30618621;
const Lattice2D kHex = Lattice2D::hexagonal(1.0 / std::sqrt(2.0));

StackDescription opal_on_substrate(int periods) {
    const Material host(cplx(12.0, 0.1));
    const double d = 1.0 / std::sqrt(3.0);
    auto plane = [&](double f) { return PlaneOfSpheres{kHex, {kRadius, Material{}, host}, f * (kHex.a1 + kHex.a2)}; };
    StackDescription s;
    s.elements = {Interface{host}, Gap{kRadius - d / 2},
                  Repeat{{Gap{d / 2}, plane(0), Gap{d / 2}, Gap{d / 2}, plane(1.0 / 3), Gap{d / 2}, Gap{d / 2}, plane(2.0 / 3), Gap{d / 2}},
                         periods},
                  Gap{kRadius - d / 2}};
    s.exit = {Material(cplx(12.0, 7.0)), true};
    return s;
}

// Root of 3 (1 - e^-x) = x on [1, 5] by bisection.
double planck_peak_oracle() {
    double a = 1.0, b = 5.0;
    for (int i = 0; i < 200; ++i) {
        const double m = 0.5 * (a + b);
        if (3.0 * (1.0 - std::exp(-m)) - m > 0) a = m;
        else b = m;
    }
    return 0.5 * (a + b);
}

}  // namespace

TEST(EmissivityPoint, LosslessSceneDoesNotEmit) {
    StackDescription d;
    d.elements = {Plate{0.4, Material(9.0)}, Gap{0.3}, Plate{0.2, Material(2.0)}};
    d.exit = {Material(2.25), false};
    for (double w : {0.5, 1.7, 3.3})
        for (auto pol : {Polarization::s, Polarization::p}) EXPECT_NEAR(emissivity_point(d, w, 0.3, pol), 0.0, 1e-6);
}

TEST(EmissivityPoint, BareSubstrate) {
    StackDescription d;
    d.exit = {Material(cplx(12.0, 7.0)), true};
    const cplx n = std::sqrt(cplx(12.0, 7.0));
    EXPECT_NEAR(emissivity_point(d, 2.0, 0.0, Polarization::s), 1.0 - std::norm((1.0 - n) / (1.0 + n)), 1e-14);
}

TEST(EmissivityPoint, OpalBandEdgeReachesBlackbody) {
    // The band-edge resonance is the first local maximum of E below the gap.
    const auto d = opal_on_substrate(4);
    const double theta = 50.0 * pi / 180.0;
    std::vector<double> w, e;
    for (double x = 1.95; x <= 2.6; x += 0.003) {
        w.push_back(x);
        e.push_back(emissivity_point(d, x, theta, Polarization::s));
    }
    const auto gap = emission_gap(w, e);
    ASSERT_TRUE(gap.has_value());
    EXPECT_LT(emissivity_point(d, 2.27, theta, Polarization::s), 0.2);
    std::size_t k = 0;
    while (w[k + 1] < gap->lo) ++k;
    while (k > 0 && e[k - 1] > e[k]) --k;
    ASSERT_GT(k, 0u);
    EXPECT_GE(e[k], 0.98);
}

TEST(AngularMap, DeterministicAcrossThreadCounts) {
    const auto d = opal_on_substrate(1);
    NumericalControls nc;
    nc.lmax = 4;
    const std::vector<double> w = {1.8, 2.0, 2.2, 2.4}, th = {0.0, 0.3, 0.6};
    const auto a = angular_map(d, w, th, nc, 1), b = angular_map(d, w, th, nc, 3);
    EXPECT_TRUE((a.s.array() == b.s.array()).all());
    EXPECT_TRUE((a.p.array() == b.p.array()).all());
    EXPECT_TRUE((a.avg.array() == 0.5 * (a.s + a.p).array()).all());
    for (Eigen::Index i = 0; i < a.s.size(); ++i) {
        EXPECT_GE(a.s(i), -1e-9);
        EXPECT_LE(a.s(i), 1.0 + 1e-9);
    }
    // Reversing the angle grid reverses the columns and nothing else.
    std::vector<double> rth(th.rbegin(), th.rend());
    const auto r = angular_map(d, w, rth, nc, 2);
    for (Eigen::Index j = 0; j < 3; ++j) EXPECT_TRUE((r.s.col(j).array() == a.s.col(2 - j).array()).all());
}

TEST(AngularMap, SinglePointWrapsEmissivityPoint) {
    const auto d = opal_on_substrate(1);
    NumericalControls nc;
    nc.lmax = 4;
    const auto m = angular_map(d, {2.1}, {0.2}, nc);
    EXPECT_EQ(m.s(0, 0), emissivity_point(d, 2.1, 0.2, Polarization::s, nc));
    EXPECT_EQ(m.p(0, 0), emissivity_point(d, 2.1, 0.2, Polarization::p, nc));
}

TEST(AngularMap, FailuresCarryCoordinates) {
    StackDescription d;
    d.exit = {Material(cplx(4.0, 1.0)), true};
    try {
        angular_map(d, {1.0, 2.0}, {0.0, pi / 2}, {}, 2);
        FAIL() << "expected a failure";
    } catch (const SweepError& e) {
        EXPECT_EQ(e.theta(), pi / 2);
        EXPECT_NE(std::string(e.what()).find("theta"), std::string::npos);
    }
    EXPECT_THROW(angular_map(d, {}, {0.0}), InvalidArgument);
    EXPECT_THROW(angular_map(d, {1.0, 1.0}, {0.0}), InvalidArgument);
}

TEST(EmissionGap, Extraction) {
    const std::vector<double> w = {1, 2, 3, 4, 5, 6, 7, 8, 9};
    // Two dips; the wider one wins; edges are linear crossings of 0.2.
    const std::vector<double> e = {0.9, 0.1, 0.5, 0.6, 0.1, 0.1, 0.1, 0.6, 0.7};
    const auto g = emission_gap(w, e);
    ASSERT_TRUE(g.has_value());
    EXPECT_NEAR(g->lo, 4.0 + 0.4 / 0.5, 1e-14);
    EXPECT_NEAR(g->hi, 7.0 + 0.1 / 0.5, 1e-14);
    // Unbounded on the right: no gap.
    EXPECT_FALSE(emission_gap(w, {0.9, 0.5, 0.1, 0.1, 0.1, 0.0, 0.0, 0.0, 0.0}).has_value());
    // Identically zero (lossless) spectrum: no gap.
    EXPECT_FALSE(emission_gap(w, std::vector<double>(9, 0.0)).has_value());
}

TEST(Planck, PeakMatchesOracle) {
    // Maximising a flat peak resolves x only to ~sqrt(machine epsilon).
    EXPECT_NEAR(planck_peak(), planck_peak_oracle(), 1e-7);
    EXPECT_NEAR(planck_peak(), 2.8214, 1e-3);
}

TEST(Planck, Normalisation) {
    std::vector<double> w, one, zero;
    for (int i = 0; i <= 4000; ++i) {
        w.push_back(0.01 * i);
        one.push_back(1.0);
        zero.push_back(0.0);
    }
    const auto a = planck_weight(w, one, 1.5);
    EXPECT_NEAR(a.integral, 1.0, 1e-12);
    EXPECT_GT(a.coverage, 0.999);
    EXPECT_FALSE(a.coverage_warning);
    const auto z = planck_weight(w, zero, 1.5);
    for (double v : z.weighted) EXPECT_EQ(v, 0.0);
    // A window far below the peak covers little of the spectrum.
    const auto narrow = planck_weight({0.1, 0.2, 0.3}, {1.0, 1.0, 1.0}, 1.0);
    EXPECT_TRUE(narrow.coverage_warning);
}

TEST(Planck, SmallArgumentLimit) {
    const double x = 1e-3;
    EXPECT_NEAR(planck_b(x) / (x * x), 1.0, 1e-3);
    EXPECT_EQ(planck_b(0.0), 0.0);
    EXPECT_THROW(planck_b(-1.0), InvalidArgument);
}
