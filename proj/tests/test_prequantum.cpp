#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "geoq/prequantum.hpp"

using namespace geoq;

namespace {

constexpr double kPi = std::numbers::pi;

SectionGrid box(int n, double half = 4.0, Boundary b = Boundary::Periodic) {
    return SectionGrid(-half, half, n, -half, half, n, b);
}

const GaussianSpec kGauss = kProbeGaussian;

double max_abs(const CMat& m) { return m.cwiseAbs().maxCoeff(); }

SectionGrid random_section(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d;
    SectionGrid g = box(n);
    g.fill([&](double, double) { return cplx(d(rng), d(rng)); });
    return g;
}

}  // namespace

TEST(Grid, RejectsTooFewNodes) {
    EXPECT_THROW(SectionGrid(-1, 1, 15, -1, 1, 32), InvalidArgument);
    EXPECT_THROW(SectionGrid(-1, 1, 32, -1, 1, 8), InvalidArgument);
    EXPECT_THROW(SectionGrid(1, -1, 32, -1, 1, 32), InvalidArgument);
    EXPECT_NO_THROW(SectionGrid(-1, 1, 16, -1, 1, 16));
    EXPECT_EQ(boundary_from_string("zero-padded"), Boundary::ZeroPadded);
    EXPECT_THROW(boundary_from_string("reflecting"), InvalidArgument);
}

TEST(ApplyP, PlaneWaveEigenvalue) {
    // k = 2π·2/L fits the periodic box.
    const double L = 8.0, hbar = 0.1, k = 2 * kPi * 2 / L;
    SectionGrid psi = box(128);
    psi.fill([&](double q, double p) { return std::exp(cplx(0, k * q)) * std::exp(-p * p / 2); });
    const SectionGrid out = apply_P(psi, hbar);
    CMat r = out.values() - hbar * k * psi.values();
    // 4th-order symbol error: k(1 − sinc-type factor) ≈ k⁵Δ⁴/30.
    const double dq = psi.dq();
    EXPECT_LT(max_abs(r), hbar * std::pow(k, 5) * std::pow(dq, 4) / 30 * 1.01 + 1e-15);
    EXPECT_LT(max_abs(r), 1e-6);
}

TEST(ApplyP, ConstantGivesZero) {
    SectionGrid psi = box(32);
    psi.fill([](double, double) { return cplx(2.5, -1.0); });
    EXPECT_EQ(max_abs(apply_P(psi, 0.1).values()), 0.0);
}

TEST(ApplyP, FourthOrderConvergenceOnGaussian) {
    const double hbar = 0.1;
    auto err = [&](int n) {
        SectionGrid psi = gaussian_section(box(n), kGauss);
        SectionGrid exact = box(n);
        exact.fill([&](double q, double p) {
            const double r2 = (q - kGauss.q0) * (q - kGauss.q0) + (p - kGauss.p0) * (p - kGauss.p0);
            const cplx f = std::exp(-r2 / 2) * std::exp(cplx(0, kGauss.kq * q + kGauss.kp * p));
            return cplx(0, -hbar) * (cplx(-(q - kGauss.q0), kGauss.kq) * f);
        });
        SectionGrid d = apply_P(psi, hbar);
        d.values() -= exact.values();
        return d.norm(SectionGrid::kStencilReach) / psi.norm(SectionGrid::kStencilReach);
    };
    const double ratio = err(64) / err(128);
    EXPECT_NEAR(ratio, 16.0, 16.0 * 0.1);
}

TEST(ApplyQ, PolarizedSectionIsMultiplication) {
    const SectionGrid psi = polarized_section(box(64), 0.4, 0.8);
    const SectionGrid out = apply_Q(psi, 0.1);
    for (int j = 0; j < psi.np(); ++j)
        for (int i = 0; i < psi.nq(); ++i) ASSERT_EQ(out(i, j), psi.q(i) * psi(i, j));
}

TEST(ApplyQ, MomentumPlaneWave) {
    const double L = 8.0, hbar = 0.1, m = 2 * kPi * 2 / L;
    SectionGrid psi = box(128);
    psi.fill([&](double q, double p) { return std::exp(cplx(0, m * p)) * std::exp(-q * q / 2); });
    const SectionGrid out = apply_Q(psi, hbar);
    double r = 0.0;
    for (int j = 0; j < psi.np(); ++j)
        for (int i = 0; i < psi.nq(); ++i) r = std::max(r, std::abs(out(i, j) - (psi.q(i) - hbar * m) * psi(i, j)));
    EXPECT_LT(r, 1e-6);
}

TEST(ApplyQ, Linearity) {
    const SectionGrid a = random_section(32, 1), b = random_section(32, 2);
    const cplx ca(0.7, -1.2), cb(-0.3, 0.4);
    SectionGrid mix = a;
    mix.values() = ca * a.values() + cb * b.values();
    const SectionGrid lhs = apply_Q(mix, 0.1);
    CMat rhs = ca * apply_Q(a, 0.1).values() + cb * apply_Q(b, 0.1).values();
    EXPECT_LT(max_abs(lhs.values() - rhs), 1e-13);
}

TEST(SelfAdjoint, PeriodicGrid) {
    const SectionGrid phi = random_section(32, 3), psi = random_section(32, 4);
    for (auto op : {+[](const SectionGrid& s) { return apply_P(s, 0.1); },
                    +[](const SectionGrid& s) { return apply_Q(s, 0.1); }}) {
        const cplx lhs = phi.inner(op(psi));
        const cplx rhs = op(phi).inner(psi);
        EXPECT_LT(std::abs(lhs - rhs), 1e-12 * std::max(1.0, std::abs(lhs)));
    }
}

TEST(Ccr, GaussianResidualSmall) {
    const double r = ccr_residual(gaussian_section(box(128), kGauss), 0.1);
    EXPECT_LE(r, 1e-6);
    EXPECT_GT(r, 0.0);
}

TEST(Ccr, FourthOrderRatio) {
    const double r64 = ccr_residual(gaussian_section(box(64), kGauss), 0.1);
    const double r128 = ccr_residual(gaussian_section(box(128), kGauss), 0.1);
    const double r256 = ccr_residual(gaussian_section(box(256), kGauss), 0.1);
    EXPECT_NEAR(r64 / r128, 16.0, 16.0 * 0.3);
    EXPECT_NEAR(r128 / r256, 16.0, 16.0 * 0.3);
}

TEST(Ccr, PolarizedSection) {
    // Only the q-derivative of q·f survives; its stencil error is the residual.
    const double r = ccr_residual(polarized_section(box(128)), 0.1);
    EXPECT_LE(r, 1e-6);
}

TEST(Ccr, ZeroPaddedInterior) {
    const double r = ccr_residual(gaussian_section(box(128, 4.0, Boundary::ZeroPadded), kGauss), 0.1);
    EXPECT_LE(r, 1e-6);
}

TEST(Ccr, ZeroSectionRejected) { EXPECT_THROW(ccr_residual(box(32), 0.1), InvalidArgument); }

TEST(Polarization, PolarizedIsExactlyZero) {
    EXPECT_EQ(polarization_residual(polarized_section(box(64), 0.2, 1.3)), 0.0);
}

TEST(Polarization, GaussianMatchesClosedForm) {
    const double r = polarization_residual(gaussian_section(box(128), kGauss));
    EXPECT_NEAR(r, gaussian_polarization_exact(kGauss), 1e-4);
    EXPECT_GT(r, 0.1);
}

TEST(Polarization, LostUnderPrequantumEvolution) {
    const SectionGrid psi = polarized_section(box(128), 0.5, 1.0);
    const SectionGrid next = prequantum_step(psi, 0.1, 0.05);
    EXPECT_GT(polarization_residual(next), 1e-2);
}

TEST(Polarization, ZeroSectionRejected) { EXPECT_THROW(polarization_residual(box(16)), InvalidArgument); }

TEST(Prequantum, HarmonicGeneratorOnLinearObservables) {
    // ô(h) applied to the Gaussian agrees with ½(Q̂² + P̂²) up to the
    // ordering term, checked here through its commutator with Q̂:
    // [ô(h), Q̂] = iℏ·ô({h, q}) = −iℏ·P̂ since {h, q} = −p.
    const double hbar = 0.1;
    const SectionGrid psi = gaussian_section(box(128), kGauss);
    const SectionGrid a = apply_prequantum_harmonic(apply_Q(psi, hbar), hbar);
    const SectionGrid b = apply_Q(apply_prequantum_harmonic(psi, hbar), hbar);
    SectionGrid r = psi.like();
    r.values() = a.values() - b.values() - cplx(0, -hbar) * apply_P(psi, hbar).values();
    EXPECT_LT(r.norm(8) / psi.norm(8), 1e-5);
}

TEST(Prequantum, StepIsNearlyUnitary) {
    const SectionGrid psi = gaussian_section(box(128), kGauss);
    const SectionGrid next = prequantum_step(psi, 0.1, 0.01);
    EXPECT_NEAR(next.norm() / psi.norm(), 1.0, 1e-6);
}
