#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "geoq/magnetic_operator.hpp"
#include "geoq/quantum_reduction.hpp"

using namespace geoq;

namespace {

double rayleigh(const SpMat& A, const CVec& v) { return (v.dot(A * v)).real() / v.squaredNorm(); }

CVec random_vector(Eigen::Index n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d;
    CVec v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = cplx(d(rng), d(rng));
    return v;
}

// Product of the link phases around the plaquette with lower-left node (iq, ip).
cplx plaquette(const MagneticOperator& op, int iq, int ip) {
    const auto& g = op.grid;
    auto U = [&](Eigen::Index a, Eigen::Index b) { return -op.K.coeff(a, b) / std::abs(op.K.coeff(a, b)); };
    const auto a = g.index(iq, ip), b = g.index(iq + 1, ip), c = g.index(iq + 1, ip + 1), d = g.index(iq, ip + 1);
    return U(a, b) * U(b, c) * U(c, d) * U(d, a);
}

}  // namespace

TEST(Grid, SpacingAndValidation) {
    const GridSpec g{2.0, 127};
    EXPECT_DOUBLE_EQ(g.spacing(), 4.0 / 128);
    EXPECT_DOUBLE_EQ(g.x(0), -2.0 + 4.0 / 128);
    EXPECT_DOUBLE_EQ(g.x(126), 2.0 - 4.0 / 128);
    EXPECT_NO_THROW(g.validate(0.05));
    EXPECT_THROW((GridSpec{6.0, 128}).validate(0.1), PreconditionError);  // Δ ≈ 0.093 > 0.079
    EXPECT_THROW((GridSpec{-1.0, 64}).validate(0.1), InvalidArgument);
    EXPECT_THROW((GridSpec{1.0, 4}).validate(0.1), InvalidArgument);
    EXPECT_THROW(build_hamiltonian(GridSpec{6.0, 128}, models::constant(1), 0.1), PreconditionError);
    EXPECT_THROW(build_hamiltonian(GridSpec{2.0, 64}, models::constant(2), 0.1), PreconditionError);
}

TEST(Assembly, HermitianForQuartic) {
    const auto op = build_hamiltonian(GridSpec{2.0, 64}, models::quartic(1), 0.1);
    EXPECT_LE(op.symmetry_residual(), 1e-12);
    EXPECT_EQ(op.model_id, "quartic");
    EXPECT_EQ(op.gauge_id, "symmetric");
    EXPECT_EQ(op.A.rows(), 64 * 64);
    for (Eigen::Index k = 0; k < op.A.rows(); ++k) EXPECT_EQ(op.A.coeff(k, k).imag(), 0.0);
}

TEST(Assembly, NonnegativeKineticForm) {
    const auto op = build_hamiltonian(GridSpec{2.0, 48}, models::shifted_harmonic(1), 0.2);
    for (std::uint64_t s = 1; s <= 20; ++s) {
        const CVec v = random_vector(op.K.rows(), s);
        EXPECT_GE(rayleigh(op.K, v), -1e-12);
        EXPECT_GE(rayleigh(op.A, v), -1e-12);
    }
}

TEST(Assembly, PlaquetteFluxIsGaugeInvariant) {
    const double hbar = 0.1;
    const GridSpec g{1.0, 40};
    const auto sym = build_hamiltonian(g, models::constant(1), hbar, gauges::symmetric(1));
    const auto can = build_hamiltonian(g, models::constant(1), hbar, gauges::canonical(1));
    const double d = g.spacing();
    for (int i : {0, 10, 38})
        for (int j : {0, 21, 38}) {
            const cplx a = plaquette(sym, i, j), b = plaquette(can, i, j);
            EXPECT_LT(std::abs(a - b), 1e-12);
            // Unit field: the enclosed phase is Δ²/ℏ in magnitude.
            EXPECT_NEAR(std::abs(std::arg(a)), d * d / hbar, 1e-12);
        }
}

TEST(Spectrum, DirichletLaplacianBoxModes) {
    const double hbar = 1.0, R = 1.0;
    const auto op = build_hamiltonian(GridSpec{R, 127}, models::constant(1), hbar, gauges::zero(1));
    const auto s = lowest_spectrum(op, 6, 1);
    ASSERT_TRUE(s.converged);
    std::vector<double> want;
    for (int j = 1; j <= 4; ++j)
        for (int k = 1; k <= 4; ++k) want.push_back(std::pow(std::numbers::pi / (2 * R), 2) * (j * j + k * k));
    std::sort(want.begin(), want.end());
    for (int i = 0; i < 6; ++i) EXPECT_NEAR(s.values[i] * 2 / hbar / want[i], 1.0, 5e-3) << i;
    for (double r : s.residuals) EXPECT_LE(r, 1e-8);
}

TEST(Spectrum, FlatLandauGroundLevel) {
    // R = 2 holds about 25 states per level at ℏ = 0.1; the ten lowest are bulk.
    const double hbar = 0.1;
    const auto op = build_hamiltonian(GridSpec{2.0, 127}, models::constant(1), hbar);
    const auto s = lowest_spectrum(op, 10, 1);
    ASSERT_TRUE(s.converged);
    for (double v : s.values) EXPECT_NEAR(v, 0.5, 0.005);
    for (int l : s.labels) EXPECT_EQ(l, 0);
}

TEST(Spectrum, GaugeShiftIsUnitary) {
    const double hbar = 0.1;
    const GridSpec g{2.0, 63};
    const auto h = models::quartic(1);
    const auto a = lowest_spectrum(build_hamiltonian(g, h, hbar, gauges::symmetric(1)), 6, 1);
    const auto b = lowest_spectrum(
        build_hamiltonian(g, h, hbar, gauge_transform(gauges::symmetric(1), qp_gauge_function(1))), 6, 1);
    const auto c = lowest_spectrum(build_hamiltonian(g, h, hbar, gauges::canonical(1)), 6, 1);
    for (int i = 0; i < 6; ++i) {
        EXPECT_NEAR(a.values[i], b.values[i], 1e-8);
        EXPECT_NEAR(a.values[i], c.values[i], 1e-8);
    }
}

TEST(Spectrum, DeterministicForSeed) {
    const auto op = build_hamiltonian(GridSpec{2.0, 48}, models::quartic(1), 0.2);
    const auto a = lowest_spectrum(op, 5, 42);
    const auto b = lowest_spectrum(op, 5, 42);
    ASSERT_EQ(a.values.size(), b.values.size());
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        EXPECT_EQ(a.values[i], b.values[i]);
        EXPECT_EQ(a.residuals[i], b.residuals[i]);
        EXPECT_EQ(a.fast_action[i], b.fast_action[i]);
    }
}

TEST(Spectrum, GroundStateDecaysBeforeTheWall) {
    const auto op = build_hamiltonian(GridSpec{4.0, 127}, models::shifted_harmonic(1), 0.1);
    const auto s = lowest_spectrum(op, 4, 1);
    EXPECT_LT(s.max_boundary_amplitude, 1e-8);
    EXPECT_THROW(lowest_spectrum(op, 0, 1), PreconditionError);
}
