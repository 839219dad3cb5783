#include <phem/layer.hpp>

#include <gtest/gtest.h>

#include <random>

#include "oracles/field_oracle.hpp"

using namespace phem;
using oracle::vnorm;

namespace {

const double kRadius = 0.30618621;
const Lattice2D kHex = Lattice2D::hexagonal(1.0 / std::sqrt(2.0));

std::vector<Eigen::Index> propagating_indices(const BeamSet& bs, const Material& m) {
    std::vector<Eigen::Index> idx;
    for (std::size_t i = 0; i < bs.size(); ++i)
        if (bs.propagating(i, m)) {
            idx.push_back(static_cast<Eigen::Index>(2 * i));
            idx.push_back(static_cast<Eigen::Index>(2 * i + 1));
        }
    return idx;
}

// Full S restricted to propagating channels: [out+ right; out- left] = S [in+ left; in- right].
MatrixC propagating_s(const LayerS& s) {
    const auto L = propagating_indices(s.beams, s.left), R = propagating_indices(s.beams, s.right);
    const auto nl = static_cast<Eigen::Index>(L.size()), nr = static_cast<Eigen::Index>(R.size());
    MatrixC S(nr + nl, nl + nr);
    for (Eigen::Index i = 0; i < nr; ++i) {
        for (Eigen::Index j = 0; j < nl; ++j) S(i, j) = s.tpp(R[i], L[j]);
        for (Eigen::Index j = 0; j < nr; ++j) S(i, nl + j) = s.rmp(R[i], R[j]);
    }
    for (Eigen::Index i = 0; i < nl; ++i) {
        for (Eigen::Index j = 0; j < nl; ++j) S(nr + i, j) = s.rpm(L[i], L[j]);
        for (Eigen::Index j = 0; j < nr; ++j) S(nr + i, nl + j) = s.tmm(L[i], R[j]);
    }
    return S;
}

double unitarity_defect(const LayerS& s) {
    const MatrixC S = propagating_s(s);
    return (S.adjoint() * S - MatrixC::Identity(S.cols(), S.cols())).cwiseAbs().maxCoeff();
}

// Index map for beam reversal K -> -K, plus the sign picked up by the s vector.
struct Reversal {
    std::vector<Eigen::Index> map;
    std::vector<double> sign;
};

Reversal reversal(const BeamSet& a, const BeamSet& b) {
    Reversal r;
    for (std::size_t i = 0; i < a.size(); ++i) {
        int found = -1;
        for (std::size_t j = 0; j < b.size(); ++j)
            if (std::abs(a.beams[i].k[0] + b.beams[j].k[0]) < 1e-9 && std::abs(a.beams[i].k[1] + b.beams[j].k[1]) < 1e-9)
                found = static_cast<int>(j);
        EXPECT_GE(found, 0);
        const bool normal = a.beams[i].kmag < 1e-12;
        r.map.push_back(2 * found);
        r.map.push_back(2 * found + 1);
        r.sign.push_back(normal ? 1.0 : -1.0);
        r.sign.push_back(1.0);
    }
    return r;
}

double reciprocity_defect(const LayerS& f, const LayerS& b) {
    const auto rv = reversal(f.beams, b.beams);
    double worst = 0.0, scale = 0.0;
    const auto n = f.dim();
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            const auto I_ = rv.map[static_cast<std::size_t>(i)], J = rv.map[static_cast<std::size_t>(j)];
            const double sg = rv.sign[static_cast<std::size_t>(i)] * rv.sign[static_cast<std::size_t>(j)];
            worst = std::max(worst, std::abs(f.tpp(i, j) - sg * b.tmm(J, I_)));
            worst = std::max(worst, std::abs(f.tmm(i, j) - sg * b.tpp(J, I_)));
            worst = std::max(worst, std::abs(f.rpm(i, j) - sg * b.rpm(J, I_)));
            worst = std::max(worst, std::abs(f.rmp(i, j) - sg * b.rmp(J, I_)));
            scale = std::max({scale, std::abs(f.tpp(i, j)), std::abs(f.rpm(i, j))});
        }
    return worst / scale;
}

LayerS plane_layer(const PlaneOfSpheres& pl, double w, Vec2 k, double cutoff, int lmax = 7) {
    const auto bs = beam_set(pl.lattice, w, k, pl.scatterer.host, cutoff);
    const auto sc = structure_constants(pl.lattice, w, k, pl.scatterer.host, lmax);
    return sphere_plane_smatrix(pl, *sc, bs, lmax);
}

}  // namespace

// ---- spherical-wave projections ---------------------------------------------

TEST(Projection, PlaneWaveExpansionMatchesField) {
    // A single incident beam (propagating and evanescent, lossy host) rebuilt
    // from its regular-wave coefficients near the origin.
    const Material host(cplx(4.0, 0.3));
    const double w = 1.7;
    const int lmax = 14;
    const auto bs = beam_set(kHex, w, {0.8, -0.4}, host, 14.0);
    const cplx q = host.wavenumber(w);
    const oracle::P3 r{0.05, -0.08, 0.06};
    const int n = vsh_count(lmax);
    std::vector<Vec3c> jx, jn;
    for (int l = 1; l <= lmax; ++l)
        for (int m = -l; m <= l; ++m) {
            jx.push_back(oracle::h_wave(false, l, m, q, r));
            jn.push_back(oracle::e_wave(false, l, m, q, r));
        }
    for (int dir : {+1, -1}) {
        const MatrixC P = plane_to_spherical(bs, host, lmax, dir);
        for (std::size_t g : {std::size_t{0}, std::size_t{3}, bs.size() - 1}) {
            const cplx kz = bs.kz(g, host);
            const BeamFrame f = beam_frame(bs.beams[g], kz, q, dir);
            const cplx phase = std::exp(I * (bs.beams[g].k[0] * r[0] + bs.beams[g].k[1] * r[1] + static_cast<double>(dir) * kz * r[2]));
            for (int p = 0; p < 2; ++p) {
                const Vec3c& e = p == 0 ? f.es : f.ep;
                const cplx e0 = 1.0 / std::sqrt(kz);
                const Vec3c direct{e0 * e[0] * phase, e0 * e[1] * phase, e0 * e[2] * phase};
                Vec3c series{};
                const auto col = static_cast<Eigen::Index>(2 * g) + p;
                for (int j = 0; j < n; ++j)
                    for (std::size_t c = 0; c < 3; ++c)
                        series[c] += P(j, col) * jx[static_cast<std::size_t>(j)][c] + P(n + j, col) * jn[static_cast<std::size_t>(j)][c];
                EXPECT_LT(vnorm(oracle::vsub(series, direct)), 1e-8 * vnorm(direct)) << "dir " << dir << " beam " << g << " pol " << p;
            }
        }
    }
}

TEST(Projection, LatticeOfOutgoingWavesMatchesPlaneWaveSum) {
    // Direct lattice sum of outgoing vector waves (absolutely convergent in a
    // lossy host) against the diffraction-order representation above the plane.
    const Material host(cplx(4.0, 1.0));
    const double w = 1.5;
    const Vec2 k{0.3, 0.2};
    const int lmax = 3;
    const cplx q = host.wavenumber(w);
    const auto bs = beam_set(kHex, w, k, host, 75.0);
    const oracle::P3 r{0.11, -0.07, 0.45};
    for (int dir : {+1, -1}) {
        const oracle::P3 rp{r[0], r[1], dir * r[2]};
        const MatrixC Q = spherical_to_plane(bs, host, kHex.area(), lmax, dir);
        for (auto [l, m, type] : {std::tuple{1, 0, 0}, {2, 1, 0}, {1, -1, 1}, {3, 2, 1}}) {
            const int col = (type == 0 ? 0 : vsh_count(lmax)) + vsh_index(l, m);
            Vec3c plane{};
            for (std::size_t g = 0; g < bs.size(); ++g) {
                const cplx kz = bs.kz(g, host);
                const BeamFrame f = beam_frame(bs.beams[g], kz, q, dir);
                const cplx ph = std::exp(I * (bs.beams[g].k[0] * rp[0] + bs.beams[g].k[1] * rp[1] + static_cast<double>(dir) * kz * rp[2]));
                for (int p = 0; p < 2; ++p) {
                    const Vec3c& e = p == 0 ? f.es : f.ep;
                    const cplx a = Q(static_cast<Eigen::Index>(2 * g) + p, col) / std::sqrt(kz) * ph;
                    for (std::size_t c = 0; c < 3; ++c) plane[c] += a * e[c];
                }
            }
            Vec3c direct{};
            const double rmax = 38.0 / q.imag();
            const int nmax = static_cast<int>(rmax / 0.6) + 2;
            for (int i = -nmax; i <= nmax; ++i)
                for (int j = -nmax; j <= nmax; ++j) {
                    const Vec2 R = static_cast<double>(i) * kHex.a1 + static_cast<double>(j) * kHex.a2;
                    if (norm(R) > rmax) continue;
                    const oracle::P3 d{rp[0] - R[0], rp[1] - R[1], rp[2]};
                    const Vec3c v = type == 0 ? oracle::h_wave(true, l, m, q, d) : oracle::e_wave(true, l, m, q, d);
                    const cplx ph = std::exp(I * dot(k, R));
                    for (std::size_t c = 0; c < 3; ++c) direct[c] += ph * v[c];
                }
            EXPECT_LT(vnorm(oracle::vsub(plane, direct)), 1e-8 * vnorm(direct)) << "dir " << dir << " l " << l << " m " << m << " type " << type;
        }
    }
}

// ---- sphere planes ----------------------------------------------------------

TEST(SpherePlane, IndexMatchedSpheresAreTransparent) {
    const PlaneOfSpheres pl{kHex, {kRadius, 12.0, 12.0}, {}};
    const auto s = plane_layer(pl, 2.27, {0.0, 0.0}, 25.0);
    const auto n = s.dim();
    EXPECT_LT((s.tpp - MatrixC::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((s.tmm - MatrixC::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT(s.rpm.cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT(s.rmp.cwiseAbs().maxCoeff(), 1e-10);
}

TEST(SpherePlane, LosslessPlaneIsUnitary) {
    const PlaneOfSpheres pl{kHex, {kRadius, 1.0, 12.0}, {}};
    EXPECT_LT(unitarity_defect(plane_layer(pl, 2.27, {0.0, 0.0}, 25.0)), 1e-6);
    // Oblique, several propagating orders in the host.
    EXPECT_LT(unitarity_defect(plane_layer(pl, 3.4, {1.3, 0.6}, 30.0)), 1e-6);
}

TEST(SpherePlane, LossyPlaneIsSubunitary) {
    const PlaneOfSpheres pl{kHex, {kRadius, cplx(2.0, 0.8), 12.0}, {}};
    const auto s = plane_layer(pl, 2.27, {0.4, 0.0}, 25.0);
    Eigen::JacobiSVD<MatrixC> svd(propagating_s(s));
    EXPECT_LT(svd.singularValues()(0), 1.0);
}

TEST(SpherePlane, Reciprocity) {
    const PlaneOfSpheres pl{kHex, {kRadius, 1.0, cplx(12.0, 0.1)}, {0.13, 0.21}};
    const Vec2 k{0.9, 0.35};
    const auto f = plane_layer(pl, 2.27, k, 25.0);
    const auto b = plane_layer(pl, 2.27, Vec2{0.0, 0.0} - k, 25.0);
    EXPECT_LT(reciprocity_defect(f, b), 1e-8);
}

TEST(SpherePlane, OffsetIsAPhaseConjugation) {
    const PlaneOfSpheres p0{kHex, {kRadius, 1.0, 12.0}, {}};
    PlaneOfSpheres p1 = p0;
    p1.offset = {0.35355339, 0.20412415};
    const auto a = plane_layer(p0, 2.0, {0.5, 0.1}, 25.0);
    const auto b = plane_layer(p1, 2.0, {0.5, 0.1}, 25.0);
    const double tol = 1e-13 * std::max(a.rpm.cwiseAbs().maxCoeff(), a.tpp.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < a.dim(); ++i)
        for (Eigen::Index j = 0; j < a.dim(); ++j) {
            const Vec2 dg = a.beams.beams[static_cast<std::size_t>(i / 2)].g - a.beams.beams[static_cast<std::size_t>(j / 2)].g;
            const cplx ph = std::exp(-I * dot(dg, p1.offset));
            EXPECT_LT(std::abs(b.rpm(i, j) - ph * a.rpm(i, j)), tol);
            EXPECT_LT(std::abs(b.tpp(i, j) - ph * a.tpp(i, j)), tol);
        }
}

TEST(SpherePlane, DiluteLimitMatchesDipoleSheet) {
    // Sheet of point dipoles p = alpha E, alpha = r^3 (eps - 1)/(eps + 2), with
    // density 1/A radiates E = 2 pi i q alpha / A at normal incidence.
    const double r = 0.02, eps = 4.0, w = 0.5;
    const PlaneOfSpheres pl{Lattice2D::square(1.0), {r, eps, 1.0}, {}};
    const auto s = plane_layer(pl, w, {0.0, 0.0}, 2 * pi * 1.5, 3);
    const double alpha = r * r * r * (eps - 1.0) / (eps + 2.0);
    const cplx born = 2.0 * pi * I * w * alpha / 1.0;
    const auto spec = static_cast<Eigen::Index>(2 * s.beams.specular_index());
    for (int p = 0; p < 2; ++p) {
        const double Rs = std::norm(s.rpm(spec + p, spec + p));
        EXPECT_NEAR(Rs, std::norm(born), 0.03 * std::norm(born)) << p;
    }
}

TEST(SpherePlane, RejectsMismatchedInputs) {
    const PlaneOfSpheres pl{kHex, {kRadius, 1.0, 12.0}, {}};
    const auto bs = beam_set(kHex, 2.0, {0.0, 0.0}, Material(12.0), 25.0);
    const auto sc = structure_constants(kHex, 2.1, {0.0, 0.0}, Material(12.0), 7);
    EXPECT_THROW(sphere_plane_smatrix(pl, *sc, bs, 7), InvalidArgument);
    const PlaneOfSpheres fat{kHex, {0.4, 1.0, 12.0}, {}};
    EXPECT_THROW(fat.validate(), InvalidArgument);
}

TEST(SpherePlane, SingularPlaneOperatorIsReported) {
    VectorC t(2);
    t << 1.0, 1.0;
    try {
        plane_scattering_operator(t, MatrixC::Identity(2, 2));
        FAIL() << "expected ResonanceSingularity";
    } catch (const ResonanceSingularity& e) {
        EXPECT_GT(e.condition(), 1e10);
    }
}

// ---- plates, interfaces, gaps ------------------------------------------------

TEST(Interface, EqualMediaGiveIdentity) {
    const auto bs = beam_set(kHex, 1.0, {0.2, 0.0}, Material(2.0), 20.0);
    const auto s = interface_smatrix(2.0, 2.0, bs);
    EXPECT_EQ((s.tpp - MatrixC::Identity(s.dim(), s.dim())).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(s.rpm.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Interface, NormalIncidenceFresnel) {
    const auto bs = beam_set(kHex, 1.0, {0.0, 0.0}, Material(1.0), 20.0);
    const auto s = interface_smatrix(1.0, 12.0, bs);
    const double n = std::sqrt(12.0);
    EXPECT_NEAR(std::abs(s.rpm(0, 0) - (1.0 - n) / (1.0 + n)), 0.0, 1e-14);
    EXPECT_NEAR(s.rpm(0, 0).real(), -0.5519815, 1e-7);
    // The p vector flips with the direction of travel, so r_p = -r_s here.
    EXPECT_NEAR(std::abs(s.rpm(1, 1) + s.rpm(0, 0)), 0.0, 1e-14);
}

TEST(Interface, TotalInternalReflection) {
    const double w = 1.0;
    const auto bs = beam_set(kHex, w, {2.0, 0.5}, Material(12.0), 40.0);
    const auto s = interface_smatrix(12.0, 1.0, bs);
    ASSERT_TRUE(bs.propagating(0, Material(12.0)));
    ASSERT_FALSE(bs.propagating(0, Material(1.0)));
    EXPECT_NEAR(std::abs(s.rpm(0, 0)), 1.0, 1e-12);
    EXPECT_NEAR(std::abs(s.rpm(1, 1)), 1.0, 1e-12);
}

TEST(Interface, LosslessPairConservesFlux) {
    const auto bs = beam_set(kHex, 2.0, {1.1, -0.4}, Material(1.0), 30.0);
    EXPECT_LT(unitarity_defect(interface_smatrix(1.0, 5.0, bs)), 1e-13);
    EXPECT_LT(unitarity_defect(interface_smatrix(5.0, 2.0, bs)), 1e-13);
}

TEST(Interface, ReciprocityWithLoss) {
    const Vec2 k{0.7, 0.3};
    const auto bf = beam_set(kHex, 2.0, k, Material(1.0), 30.0);
    const auto bb = beam_set(kHex, 2.0, Vec2{0.0, 0.0} - k, Material(1.0), 30.0);
    const Material a(cplx(3.0, 0.5)), b(cplx(7.0, 2.0));
    EXPECT_LT(reciprocity_defect(interface_smatrix(a, b, bf), interface_smatrix(a, b, bb)), 1e-13);
    EXPECT_LT(reciprocity_defect(plate_smatrix({0.7, b}, bf, 1.0, a), plate_smatrix({0.7, b}, bb, 1.0, a)), 1e-13);
}

TEST(Gap, PhasesAndDecay) {
    const auto bs = beam_set(kHex, 1.0, {0.0, 0.0}, Material(1.0), 30.0);
    const auto z = gap_smatrix(0.0, bs);
    EXPECT_EQ((z.tpp - MatrixC::Identity(z.dim(), z.dim())).cwiseAbs().maxCoeff(), 0.0);
    const auto g = gap_smatrix(5.0, bs);
    EXPECT_NEAR(std::abs(g.tpp(0, 0)), 1.0, 1e-15);
    EXPECT_NEAR(std::abs(g.tpp(0, 0) - std::exp(I * 5.0)), 0.0, 1e-14);
    for (std::size_t i = 1; i < bs.size(); ++i) {
        const double kappa = std::sqrt(bs.beams[i].kmag * bs.beams[i].kmag - 1.0);
        const auto k = static_cast<Eigen::Index>(2 * i);
        EXPECT_NEAR(std::abs(g.tpp(k, k)), std::exp(-kappa * 5.0), 1e-15);
        EXPECT_LE(std::abs(g.tmm(k + 1, k + 1)), 1.0);
    }
    EXPECT_THROW(gap_smatrix(-1.0, bs), InvalidArgument);
}

TEST(Plate, ZeroThicknessIsInterface) {
    const auto bs = beam_set(kHex, 1.0, {0.0, 0.0}, Material(1.0), 30.0);
    const auto s = plate_smatrix({0.0, 4.0}, bs, 1.0, 4.0);
    EXPECT_NEAR(std::abs(s.rpm(0, 0) - (-1.0 / 3.0)), 0.0, 1e-15);
    EXPECT_NEAR(std::norm(s.rpm(0, 0)), 1.0 / 9.0, 1e-15);
    EXPECT_LT((s.rpm - interface_smatrix(1.0, 4.0, bs).rpm).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Plate, VacuumSlabIsPurePhase) {
    const auto bs = beam_set(kHex, 1.3, {0.0, 0.0}, Material(1.0), 30.0);
    const auto s = plate_smatrix({2.4, 1.0}, bs, 1.0, 1.0);
    EXPECT_NEAR(std::abs(s.tpp(0, 0) - std::exp(I * 1.3 * 2.4)), 0.0, 1e-14);
    EXPECT_EQ(s.rpm.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Plate, OpaqueSubstrateEqualsHalfSpace) {
    const Material sub(cplx(12.0, 7.0));
    const double height = 4.0 * std::sqrt(3.0);
    for (double w : {0.5, 2.27, 4.0}) {
        const auto bs = beam_set(kHex, w, {0.3 * w, 0.0}, Material(1.0), 30.0);
        const auto s = plate_smatrix({1e8 * height, sub}, bs, 1.0, 1.0);
        const auto h = interface_smatrix(1.0, sub, bs);
        EXPECT_EQ(s.tpp.cwiseAbs().maxCoeff(), 0.0);
        EXPECT_TRUE(s.rpm.allFinite() && s.rmp.allFinite());
        for (int p = 0; p < 2; ++p) EXPECT_NEAR(std::norm(s.rpm(p, p)), std::norm(h.rpm(p, p)), 1e-12);
    }
}

TEST(Plate, MatchesFabryPerotClosedForm) {
    // Single lossy slab between different media at oblique incidence, s polarisation.
    const double w = 1.7, d = 0.83;
    const cplx e1 = 1.0, e2(6.0, 0.4), e3 = 2.25;
    const Vec2 k{0.9, 0.0};
    const auto bs = beam_set(kHex, w, k, Material(e1), 30.0);
    const auto s = plate_smatrix({d, Material(e2)}, bs, Material(e1), Material(e3));
    const double K2 = 0.81;
    const cplx k1 = sqrt_branch(e1 * w * w - K2), k2 = sqrt_branch(e2 * w * w - K2), k3 = sqrt_branch(e3 * w * w - K2);
    const cplx r12 = (k1 - k2) / (k1 + k2), r23 = (k2 - k3) / (k2 + k3);
    const cplx t12 = 2.0 * k1 / (k1 + k2), t23 = 2.0 * k2 / (k2 + k3);
    const cplx ph = std::exp(I * k2 * d);
    const cplx r = (r12 + r23 * ph * ph) / (1.0 + r12 * r23 * ph * ph);
    const cplx t = t12 * t23 * ph / (1.0 + r12 * r23 * ph * ph);
    EXPECT_NEAR(std::abs(s.rpm(0, 0) - r), 0.0, 1e-13);
    EXPECT_NEAR(std::abs(s.tpp(0, 0) - t * std::sqrt(k3) / std::sqrt(k1)), 0.0, 1e-13);
}
