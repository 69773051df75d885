#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "geoq/phase_space.hpp"

using namespace geoq;

namespace {

ScalarField coord(int i) {
    ScalarField f;
    f.value = [i](const Vec& x) { return x[i]; };
    return f;
}

Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }

}  // namespace

TEST(Omega, BlockFormN1) {
    Mat w = omega_matrix(1);
    Mat want(2, 2);
    want << 0, -1, 1, 0;
    EXPECT_EQ(w, want);
    Mat wb(2, 2);
    wb << 0, 1, -1, 0;
    EXPECT_EQ(omega_bar(1), wb);
}

TEST(Omega, BlockFormN2) {
    Mat w = omega_matrix(2);
    EXPECT_EQ(w.topLeftCorner(2, 2), Mat::Zero(2, 2));
    EXPECT_EQ(w.topRightCorner(2, 2), -Mat::Identity(2, 2));
    EXPECT_EQ(w.bottomLeftCorner(2, 2), Mat::Identity(2, 2));
}

TEST(Omega, AntisymmetricAndInverseUpToN4) {
    for (int n = 1; n <= 4; ++n) {
        const Mat w = omega_matrix(n);
        EXPECT_EQ(w, Mat(-w.transpose()));
        EXPECT_EQ(Mat(w * omega_bar(n)), Mat::Identity(2 * n, 2 * n));
        // ω̄ is the solution of ω·M = I.
        EXPECT_LT((w.inverse() - omega_bar(n)).cwiseAbs().maxCoeff(), 1e-15);
    }
}

TEST(Omega, RejectsNonPositiveN) {
    EXPECT_THROW(omega_matrix(0), InvalidArgument);
}

TEST(Bracket, CanonicalPair) {
    for (const auto& x : random_points(1, 10, 5)) {
        EXPECT_NEAR(poisson_bracket(coord(0), coord(1), x), 1.0, 1e-10);
        EXPECT_NEAR(poisson_bracket(coord(1), coord(0), x), -1.0, 1e-10);
    }
    for (const auto& x : random_points(2, 10, 6)) {
        EXPECT_NEAR(poisson_bracket(coord(0), coord(2), x), 1.0, 1e-10);
        EXPECT_NEAR(poisson_bracket(coord(1), coord(3), x), 1.0, 1e-10);
        EXPECT_NEAR(poisson_bracket(coord(0), coord(3), x), 0.0, 1e-10);
        EXPECT_NEAR(poisson_bracket(coord(0), coord(1), x), 0.0, 1e-10);
    }
}

TEST(Bracket, QSquaredWithP) {
    ScalarField q2;
    q2.value = [](const Vec& x) { return x[0] * x[0]; };
    EXPECT_NEAR(poisson_bracket(q2, coord(1), v2(3, 0.7)), 6.0, 1e-8);
}

TEST(Bracket, SelfBracketVanishes) {
    const auto h = models::quartic(1).as_scalar();
    for (const auto& x : random_points(1, 20, 9)) EXPECT_EQ(poisson_bracket(h, h, x), 0.0);
}

TEST(Bracket, AxiomsOnRandomCubics) {
    std::mt19937_64 rng(11);
    for (int n : {1, 2}) {
        for (const auto& x : random_points(n, 20, 12, 1.0)) {
            const ScalarField f = random_cubic(n, rng), g = random_cubic(n, rng), k = random_cubic(n, rng);
            const double fg = poisson_bracket(f, g, x);
            EXPECT_NEAR(fg, -poisson_bracket(g, f, x), 1e-12);
            // Bilinearity in the first slot.
            ScalarField lin;
            lin.value = [&](const Vec& y) { return 2.0 * f(y) - 3.0 * k(y); };
            lin.gradient = [&](const Vec& y) { return Vec(2.0 * f.grad(y) - 3.0 * k.grad(y)); };
            EXPECT_NEAR(poisson_bracket(lin, g, x), 2 * fg - 3 * poisson_bracket(k, g, x), 1e-11);
            // Leibniz rule.
            ScalarField prod;
            prod.value = [&](const Vec& y) { return f(y) * g(y); };
            prod.gradient = [&](const Vec& y) { return Vec(g(y) * f.grad(y) + f(y) * g.grad(y)); };
            EXPECT_NEAR(poisson_bracket(prod, k, x), f(x) * poisson_bracket(g, k, x) + g(x) * poisson_bracket(f, k, x),
                        1e-10);
        }
    }
}

TEST(Bracket, JacobiIdentityOnRandomCubics) {
    std::mt19937_64 rng(21);
    for (int n : {1, 2, 3}) {
        double worst = 0.0;
        for (const auto& x : random_points(n, 30, 22, 1.0)) {
            const ScalarField f = random_cubic(n, rng), g = random_cubic(n, rng), k = random_cubic(n, rng);
            worst = std::max(worst, jacobi_residual(f, g, k, x, 1e-5));
        }
        EXPECT_LE(worst, 1e-7) << "n = " << n;
    }
}

TEST(RandomCubic, GradientMatchesFiniteDifferences) {
    std::mt19937_64 rng(8);
    const ScalarField f = random_cubic(2, rng);
    for (const auto& x : random_points(2, 5, 1, 1.0)) {
        const Vec fd = fd_gradient(f.value, x);
        EXPECT_LT((fd - f.grad(x)).cwiseAbs().maxCoeff(), 1e-9);
    }
}

TEST(Flow, HarmonicOrientation) {
    const auto h = models::shifted_harmonic(1, 1.0);
    const Vec x = v2(0.4, -1.3);
    const Vec v = hamiltonian_vector_field(h.grad(x));
    EXPECT_NEAR(v[0], x[1], 1e-14);   // q̇ = p
    EXPECT_NEAR(v[1], -x[0], 1e-14);  // ṗ = −q
}

TEST(Models, ValuesAndAnalyticGradients) {
    const auto c = models::constant(2, 1.5);
    const auto s = models::shifted_harmonic(1, 1.0);
    const auto q = models::quartic(1, 1.0, 0.1);
    const Vec x = v2(0.7, -0.2);
    EXPECT_EQ(c(Vec::Constant(4, 3.0)), 1.5);
    EXPECT_EQ(c.grad(Vec::Constant(4, 3.0)), Vec::Zero(4));
    EXPECT_NEAR(s(x), 1 + 0.5 * (0.49 + 0.04), 1e-15);
    EXPECT_NEAR(q(x), 1 + 0.5 * (0.49 + 0.04) + 0.1 * std::pow(0.7, 4), 1e-15);
    for (const auto* m : {&s, &q}) {
        for (const auto& y : random_points(1, 10, 4)) {
            const Vec fd = fd_gradient(m->value, y);
            EXPECT_LT((fd - m->grad(y)).cwiseAbs().maxCoeff(), 1e-8) << m->id;
        }
    }
}

TEST(Models, PositivityAndIds) {
    EXPECT_THROW(models::constant(1, 0.0), InvalidArgument);
    EXPECT_THROW(models::by_id("cubic", 1), InvalidArgument);
    for (const char* id : {"constant", "shifted-harmonic", "quartic"}) {
        const auto h = models::by_id(id, 1);
        EXPECT_EQ(h.id, id);
        EXPECT_GT(h.h_min, 0.0);
        for (const auto& y : random_points(1, 20, 2, 3.0)) EXPECT_GE(h(y), h.h_min);
    }
    EXPECT_TRUE(models::quartic(1).mechanical());
    EXPECT_TRUE(models::shifted_harmonic(1).harmonic);
}

TEST(Gauge, CanonicalAndSymmetricCurl) {
    const auto pts = random_points(1, 100, 17);
    EXPECT_LE(gauge_check(gauges::canonical(1), pts, 1e-10).max_residual, 1e-10);
    EXPECT_LE(gauge_check(gauges::symmetric(1), pts, 1e-10).max_residual, 1e-10);
    const auto pts2 = random_points(2, 50, 18);
    EXPECT_TRUE(gauge_check(gauges::canonical(2), pts2, 1e-10).passed);
    EXPECT_TRUE(gauge_check(gauges::symmetric(2), pts2, 1e-10).passed);
}

TEST(Gauge, ValuesOfBuiltIns) {
    const Vec x = v2(0.6, -1.1);
    EXPECT_EQ(gauges::canonical(1)(x), v2(0.0, -0.6));
    EXPECT_EQ(gauges::symmetric(1)(x), v2(-0.55, -0.3));
}

TEST(Gauge, TotalDerivativeLeavesCurl) {
    const auto pts = random_points(1, 100, 19);
    const auto shifted = gauge_transform(gauges::canonical(1), qp_gauge_function(1));
    EXPECT_LE(gauge_check(shifted, pts, 1e-8).max_residual, 1e-8);
    // θ' = (0, −q) + (p, q) = (p, 0).
    const Vec x = v2(0.25, 1.5);
    EXPECT_NEAR((shifted(x) - v2(1.5, 0.0)).norm(), 0.0, 1e-14);
}

TEST(Gauge, ZeroChiIsIdentity) {
    ScalarField zero;
    zero.value = [](const Vec&) { return 0.0; };
    zero.gradient = [](const Vec& x) { return Vec(Vec::Zero(x.size())); };
    zero.hessian = [](const Vec& x) { return Mat(Mat::Zero(x.size(), x.size())); };
    const auto th = gauges::symmetric(1);
    const auto same = gauge_transform(th, zero);
    for (const auto& x : random_points(1, 10, 3)) EXPECT_EQ(same(x), th(x));
}

TEST(Gauge, CurlInvariantUnderSmoothChiWithFiniteDifferences) {
    ScalarField chi;
    chi.value = [](const Vec& x) { return std::sin(x[0]) * std::cos(0.5 * x[1]) + 0.3 * x[0] * x[0] * x[1]; };
    const auto pts = random_points(1, 50, 23);
    const double tol = 1e-8;
    const auto base = gauge_check(gauges::canonical(1), pts, tol);
    const auto moved = gauge_check(gauge_transform(gauges::canonical(1), chi), pts, tol);
    EXPECT_LE(moved.max_residual, std::max(2 * base.max_residual, tol));
}

TEST(Gauge, BrokenPotentialFails) {
    const auto pts = random_points(1, 100, 29);
    const auto r = gauge_check(gauges::scaled(gauges::canonical(1), 2.0), pts, 1e-8);
    EXPECT_FALSE(r.passed);
    EXPECT_NEAR(r.max_residual, 1.0, 1e-8);
}

TEST(Gauge, EmptySampleSetIsAPreconditionError) {
    EXPECT_THROW(gauge_check(gauges::canonical(1), {}, 1e-8), PreconditionError);
}

TEST(Metric, UnitHamiltonian) {
    const auto m = metric_eval(ConformalMetric(models::constant(2)), Vec::Constant(4, 0.3));
    EXPECT_EQ(m.g, Mat::Identity(4, 4));
    EXPECT_EQ(m.g_inv, Mat::Identity(4, 4));
    EXPECT_EQ(m.det, 1.0);
}

TEST(Metric, DeterminantForHEqualTwo) {
    const auto m = metric_eval(ConformalMetric(models::constant(1, 2.0)), v2(0.1, 0.2));
    EXPECT_DOUBLE_EQ(m.det, 0.25);
}

TEST(Metric, IdentitiesForAllModels) {
    for (const char* id : {"constant", "shifted-harmonic", "quartic"}) {
        for (int n : {1, 2}) {
            const auto h = models::by_id(id, n);
            const ConformalMetric g(h);
            for (const auto& x : random_points(n, 20, 31, 2.0)) {
                const auto v = g.eval(x);
                EXPECT_NEAR(v.det * std::pow(h(x), 2 * n), 1.0, 1e-13) << id;
                EXPECT_LT((v.g_inv * v.g - Mat::Identity(2 * n, 2 * n)).cwiseAbs().maxCoeff(), 1e-14);
                EXPECT_EQ(v.g, Mat(v.g.transpose()));
                EXPECT_GT(v.g.diagonal().minCoeff(), 0.0);
            }
        }
    }
}

TEST(Metric, BelowFloorIsADomainViolation) {
    HamiltonianField h = models::constant(1, 1.0);
    h.value = [](const Vec& x) { return x[0]; };
    h.h_min = 0.5;
    EXPECT_THROW(metric_eval(ConformalMetric(h), v2(0.1, 0.0)), DomainViolation);
    EXPECT_NO_THROW(metric_eval(ConformalMetric(h), v2(1.0, 0.0)));
}

TEST(Flux, TorusOfArea4Pi) {
    const auto r = kostant_flux(surfaces::flat_torus(std::sqrt(4 * std::numbers::pi)));
    EXPECT_EQ(r.nearest_integer, 2);
    EXPECT_LE(r.integrality_residual, 1e-8);
    EXPECT_NEAR(r.flux_over_2pi, 2.0, 1e-10);
}

TEST(Flux, NonIntegralTorusIsReported) {
    const auto r = kostant_flux(surfaces::flat_torus(std::sqrt(3 * std::numbers::pi)));
    EXPECT_NEAR(r.flux_over_2pi, 1.5, 1e-10);
    EXPECT_NEAR(r.integrality_residual, 0.5, 1e-10);
}

TEST(Flux, ClosedImmersedSurfaceVanishes) {
    for (auto axes : {std::array<int, 3>{0, 2, 1}, std::array<int, 3>{0, 1, 3}, std::array<int, 3>{1, 3, 2}}) {
        const auto r = kostant_flux(surfaces::sphere(2, axes, 1.3, 16));
        EXPECT_NEAR(r.flux_over_2pi, 0.0, 1e-10);
    }
}

TEST(Flux, DegenerateMeshIsZero) {
    EXPECT_EQ(kostant_flux(surfaces::degenerate(1)).flux_over_2pi, 0.0);
}

TEST(Flux, OpenSurfaceIsRejected) {
    EXPECT_THROW(kostant_flux(surfaces::disk(1.0)), PreconditionError);
    // Its raw flux is the enclosed area over 2π (sign set by the cell orientation).
    EXPECT_NEAR(std::abs(flux_over_2pi(surfaces::disk(1.0, 1, 64))), 0.5, 1e-12);
}

TEST(RandomPoints, DeterministicPerSeed) {
    const auto a = random_points(2, 5, 42);
    const auto b = random_points(2, 5, 42);
    const auto c = random_points(2, 5, 43);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i], b[i]);
    EXPECT_NE(a[0], c[0]);
}
