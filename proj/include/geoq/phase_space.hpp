#pragma once

// Symplectic primitives on a canonical chart ξ = (q¹..qⁿ, p₁..pₙ).

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "geoq/error.hpp"

namespace geoq {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Degrees of freedom n of a canonical chart; phase-space dimension is 2n.
class CanonicalChart {
public:
    explicit CanonicalChart(int n) : n_(n) {
        if (n < 1) throw InvalidArgument("canonical chart needs n >= 1, got " + std::to_string(n));
    }
    int n() const noexcept { return n_; }
    int dim() const noexcept { return 2 * n_; }
    // 0-based: q^μ at index μ, p_μ at index n+μ.
    int q_index(int mu) const noexcept { return mu; }
    int p_index(int mu) const noexcept { return n_ + mu; }

private:
    int n_;
};

namespace detail {

inline double fd_step(const Vec& x) { return 1e-4 * std::max(1.0, x.norm()); }

inline void require_finite(const Vec& g, const char* what) {
    if (!g.allFinite()) throw EvaluationFailure(std::string("non-finite ") + what);
}

}  // namespace detail

/// Fourth-order central-difference gradient.
inline Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x,
                       std::optional<double> step = std::nullopt) {
    const double h = step.value_or(detail::fd_step(x));
    Vec g(x.size());
    Vec y = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double xi = x[i];
        y[i] = xi + 2 * h; const double f2p = f(y);
        y[i] = xi + h;     const double f1p = f(y);
        y[i] = xi - h;     const double f1m = f(y);
        y[i] = xi - 2 * h; const double f2m = f(y);
        y[i] = xi;
        g[i] = (-f2p + 8 * f1p - 8 * f1m + f2m) / (12 * h);
    }
    return g;
}

/// Fourth-order central-difference Jacobian, J(i, j) = ∂_i F_j.
inline Mat fd_jacobian(const std::function<Vec(const Vec&)>& F, const Vec& x,
                       std::optional<double> step = std::nullopt) {
    const double h = step.value_or(detail::fd_step(x));
    const Vec f0 = F(x);
    Mat J(x.size(), f0.size());
    Vec y = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double xi = x[i];
        y[i] = xi + 2 * h; const Vec f2p = F(y);
        y[i] = xi + h;     const Vec f1p = F(y);
        y[i] = xi - h;     const Vec f1m = F(y);
        y[i] = xi - 2 * h; const Vec f2m = F(y);
        y[i] = xi;
        J.row(i) = ((-f2p + 8 * f1p - 8 * f1m + f2m) / (12 * h)).transpose();
    }
    return J;
}

/// Scalar field on phase space with an optional analytic gradient and Hessian.
struct ScalarField {
    std::function<double(const Vec&)> value;
    std::function<Vec(const Vec&)> gradient;  // empty: finite differences
    std::function<Mat(const Vec&)> hessian;   // empty: finite differences of the gradient

    double operator()(const Vec& x) const { return value(x); }

    Vec grad(const Vec& x) const {
        Vec g = gradient ? gradient(x) : fd_gradient(value, x);
        detail::require_finite(g, "gradient");
        return g;
    }

    Mat hess(const Vec& x) const {
        if (hessian) return hessian(x);
        return fd_jacobian([this](const Vec& y) { return grad(y); }, x);
    }
};

// ---------------------------------------------------------------------------
// Two-form and bracket

/// ω_ij in block form [[0, −I], [I, 0]].
inline Mat omega_matrix(int n) {
    const CanonicalChart chart(n);
    Mat w = Mat::Zero(chart.dim(), chart.dim());
    w.topRightCorner(n, n) = -Mat::Identity(n, n);
    w.bottomLeftCorner(n, n) = Mat::Identity(n, n);
    return w;
}

/// ω̄^{ij} with ω·ω̄ = I, i.e. [[0, I], [−I, 0]].
inline Mat omega_bar(int n) {
    const CanonicalChart chart(n);
    Mat w = Mat::Zero(chart.dim(), chart.dim());
    w.topRightCorner(n, n) = Mat::Identity(n, n);
    w.bottomLeftCorner(n, n) = -Mat::Identity(n, n);
    return w;
}

/// {f, g}(ξ) = ∂_i f ω̄^{ij} ∂_j g, oriented so that {q^μ, p_μ} = +1.
inline double poisson_bracket(const ScalarField& f, const ScalarField& g, const Vec& xi) {
    const int n = static_cast<int>(xi.size() / 2);
    if (xi.size() != 2 * n || n < 1) throw InvalidArgument("phase-space point must have even dimension");
    const Vec gf = f.grad(xi);
    const Vec gg = g.grad(xi);
    // ω̄ = [[0, I], [−I, 0]] applied without forming the matrix.
    double s = 0.0;
    for (int mu = 0; mu < n; ++mu) s += gf[mu] * gg[n + mu] - gf[n + mu] * gg[mu];
    return s;
}

/// Hamiltonian vector field ξ̇^i = ω̄^{ij} ∂_j h.
inline Vec hamiltonian_vector_field(const Vec& grad_h) {
    const Eigen::Index n = grad_h.size() / 2;
    Vec v(grad_h.size());
    v.head(n) = grad_h.tail(n);
    v.tail(n) = -grad_h.head(n);
    return v;
}

/// The bracket {f, g} as a new scalar field (gradient by finite differences).
inline ScalarField bracket_field(ScalarField f, ScalarField g) {
    ScalarField out;
    out.value = [f = std::move(f), g = std::move(g)](const Vec& x) { return poisson_bracket(f, g, x); };
    return out;
}

/// Random polynomial of total degree ≤ 3 in 2n variables, coefficients in [−1, 1].
/// The gradient is analytic.
inline ScalarField random_cubic(int n, std::mt19937_64& rng) {
    const int d = 2 * n;
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    struct Term {
        std::array<int, 3> idx;  // −1: unused slot
        double c;
    };
    std::vector<Term> terms{{{-1, -1, -1}, u(rng)}};
    for (int i = 0; i < d; ++i) {
        terms.push_back({{i, -1, -1}, u(rng)});
        for (int j = i; j < d; ++j) {
            terms.push_back({{i, j, -1}, u(rng)});
            for (int k = j; k < d; ++k) terms.push_back({{i, j, k}, u(rng)});
        }
    }
    ScalarField f;
    f.value = [terms](const Vec& x) {
        double s = 0.0;
        for (const auto& t : terms) {
            double m = t.c;
            for (int a : t.idx)
                if (a >= 0) m *= x[a];
            s += m;
        }
        return s;
    };
    f.gradient = [terms, d](const Vec& x) {
        Vec g = Vec::Zero(d);
        for (const auto& t : terms)
            for (int s = 0; s < 3; ++s) {
                if (t.idx[s] < 0) continue;
                double m = t.c;
                for (int r = 0; r < 3; ++r)
                    if (r != s && t.idx[r] >= 0) m *= x[t.idx[r]];
                g[t.idx[s]] += m;
            }
        return g;
    };
    return f;
}

/// |{f,{g,k}} + {g,{k,f}} + {k,{f,g}}| at x. The outer gradients are
/// fourth-order central differences with the given step.
inline double jacobi_residual(const ScalarField& f, const ScalarField& g, const ScalarField& k, const Vec& x,
                              double step = 1e-5) {
    auto outer = [&](const ScalarField& a, const ScalarField& b, const ScalarField& c) {
        ScalarField bc;
        bc.value = [&](const Vec& y) { return poisson_bracket(b, c, y); };
        bc.gradient = [&](const Vec& y) { return fd_gradient(bc.value, y, step); };
        return poisson_bracket(a, bc, x);
    };
    return std::abs(outer(f, g, k) + outer(g, k, f) + outer(k, f, g));
}

// ---------------------------------------------------------------------------
// Hamiltonian models

struct HamiltonianField {
    std::string id;
    int n = 1;
    double h_min = 0.0;  // positivity floor, > 0 for metric-compatible models
    std::function<double(const Vec&)> value;
    std::function<Vec(const Vec&)> gradient;  // empty: finite differences
    // Set only for mechanical-form models h = c + ½|p|² + V(q).
    std::function<double(const Vec&)> potential;
    double offset = 0.0;
    bool harmonic = false;  // V(q) = ½|q|²

    double operator()(const Vec& x) const { return value(x); }

    Vec grad(const Vec& x) const {
        Vec g = gradient ? gradient(x) : fd_gradient(value, x);
        detail::require_finite(g, "gradient");
        return g;
    }

    ScalarField as_scalar() const {
        ScalarField s;
        s.value = value;
        s.gradient = gradient;
        return s;
    }

    bool mechanical() const noexcept { return static_cast<bool>(potential); }
    bool is_constant() const noexcept { return id == "constant"; }

    double checked(const Vec& x) const {
        const double v = value(x);
        if (!std::isfinite(v) || v < h_min || v <= 0.0)
            throw DomainViolation(id + ": h = " + std::to_string(v) + " below positivity floor " +
                                  std::to_string(h_min));
        return v;
    }
};

namespace models {

inline HamiltonianField constant(int n, double c = 1.0) {
    if (!(c > 0)) throw InvalidArgument("constant model needs c > 0");
    CanonicalChart chart(n);
    HamiltonianField h;
    h.id = "constant";
    h.n = n;
    h.h_min = c;
    h.offset = c;
    h.value = [c](const Vec&) { return c; };
    h.gradient = [d = chart.dim()](const Vec&) { return Vec::Zero(d); };
    return h;
}

/// h = c + ½ Σ (q² + p²).
inline HamiltonianField shifted_harmonic(int n, double c = 1.0) {
    if (!(c > 0)) throw InvalidArgument("shifted-harmonic model needs c > 0");
    CanonicalChart chart(n);
    HamiltonianField h;
    h.id = "shifted-harmonic";
    h.n = n;
    h.h_min = c;
    h.offset = c;
    h.harmonic = true;
    h.value = [c](const Vec& x) { return c + 0.5 * x.squaredNorm(); };
    h.gradient = [](const Vec& x) { return Vec(x); };
    h.potential = [](const Vec& q) { return 0.5 * q.squaredNorm(); };
    return h;
}

/// h = c + ½ Σ (q² + p²) + λ Σ q⁴.
inline HamiltonianField quartic(int n, double c = 1.0, double lambda = 0.1) {
    if (!(c > 0)) throw InvalidArgument("quartic model needs c > 0");
    if (lambda < 0) throw InvalidArgument("quartic model needs lambda >= 0");
    CanonicalChart chart(n);
    HamiltonianField h;
    h.id = "quartic";
    h.n = n;
    h.h_min = c;
    h.offset = c;
    h.value = [c, lambda, n](const Vec& x) {
        double v = c + 0.5 * x.squaredNorm();
        for (int mu = 0; mu < n; ++mu) v += lambda * std::pow(x[mu], 4);
        return v;
    };
    h.gradient = [lambda, n](const Vec& x) {
        Vec g = x;
        for (int mu = 0; mu < n; ++mu) g[mu] += 4 * lambda * std::pow(x[mu], 3);
        return g;
    };
    h.potential = [lambda](const Vec& q) {
        double v = 0.5 * q.squaredNorm();
        for (Eigen::Index mu = 0; mu < q.size(); ++mu) v += lambda * std::pow(q[mu], 4);
        return v;
    };
    return h;
}

/// Built-in lookup by identifier: "constant", "shifted-harmonic", "quartic".
inline HamiltonianField by_id(const std::string& id, int n, double c = 1.0, double lambda = 0.1) {
    if (id == "constant") return constant(n, c);
    if (id == "shifted-harmonic") return shifted_harmonic(n, c);
    if (id == "quartic") return quartic(n, c, lambda);
    throw InvalidArgument("unknown model id '" + id + "'");
}

}  // namespace models

// ---------------------------------------------------------------------------
// Gauge potentials

struct GaugePotential {
    std::string id;
    std::function<Vec(const Vec&)> value;
    std::function<Mat(const Vec&)> jacobian;  // J(i, j) = ∂_i θ_j; empty: finite differences

    Vec operator()(const Vec& x) const { return value(x); }

    Mat jac(const Vec& x) const { return jacobian ? jacobian(x) : fd_jacobian(value, x); }
};

namespace gauges {

/// θ = (0, …, 0, −q¹, …, −qⁿ).
inline GaugePotential canonical(int n) {
    CanonicalChart chart(n);
    GaugePotential t;
    t.id = "canonical";
    t.value = [n](const Vec& x) {
        Vec th = Vec::Zero(2 * n);
        th.tail(n) = -x.head(n);
        return th;
    };
    t.jacobian = [n](const Vec&) {
        Mat J = Mat::Zero(2 * n, 2 * n);
        J.topRightCorner(n, n) = -Mat::Identity(n, n);
        return J;
    };
    return t;
}

/// θ = (p/2, −q/2).
inline GaugePotential symmetric(int n) {
    CanonicalChart chart(n);
    GaugePotential t;
    t.id = "symmetric";
    t.value = [n](const Vec& x) {
        Vec th(2 * n);
        th.head(n) = 0.5 * x.tail(n);
        th.tail(n) = -0.5 * x.head(n);
        return th;
    };
    t.jacobian = [n](const Vec&) {
        Mat J = Mat::Zero(2 * n, 2 * n);
        J.topRightCorner(n, n) = -0.5 * Mat::Identity(n, n);
        J.bottomLeftCorner(n, n) = 0.5 * Mat::Identity(n, n);
        return J;
    };
    return t;
}

/// θ = 0: no magnetic field (Laplacian sanity scenarios only).
inline GaugePotential zero(int n) {
    GaugePotential t;
    t.id = "zero";
    t.value = [n](const Vec&) { return Vec(Vec::Zero(2 * n)); };
    t.jacobian = [n](const Vec&) { return Mat(Mat::Zero(2 * n, 2 * n)); };
    return t;
}

/// θ scaled by s; curl is s·ω, so any s ≠ 1 is a broken potential.
inline GaugePotential scaled(GaugePotential base, double s) {
    GaugePotential t;
    t.id = base.id + "*" + std::to_string(s);
    t.value = [base, s](const Vec& x) { return Vec(s * base.value(x)); };
    t.jacobian = [base, s](const Vec& x) { return Mat(s * base.jac(x)); };
    return t;
}

inline GaugePotential by_id(const std::string& id, int n) {
    if (id == "canonical" || id == "landau") return canonical(n);
    if (id == "symmetric") return symmetric(n);
    if (id == "zero") return zero(n);
    throw InvalidArgument("unknown gauge id '" + id + "'");
}

}  // namespace gauges

/// χ = Σ q^μ p_μ with analytic derivatives.
inline ScalarField qp_gauge_function(int n) {
    ScalarField chi;
    chi.value = [n](const Vec& x) { return x.head(n).dot(x.tail(n)); };
    chi.gradient = [n](const Vec& x) {
        Vec g(2 * n);
        g.head(n) = x.tail(n);
        g.tail(n) = x.head(n);
        return g;
    };
    chi.hessian = [n](const Vec&) {
        Mat H = Mat::Zero(2 * n, 2 * n);
        H.topRightCorner(n, n) = Mat::Identity(n, n);
        H.bottomLeftCorner(n, n) = Mat::Identity(n, n);
        return H;
    };
    return chi;
}

/// θ_i → θ_i + ∂_i χ.
inline GaugePotential gauge_transform(const GaugePotential& theta, const ScalarField& chi) {
    GaugePotential t;
    t.id = theta.id + "+dchi";
    t.value = [theta, chi](const Vec& x) { return Vec(theta.value(x) + chi.grad(x)); };
    t.jacobian = [theta, chi](const Vec& x) { return Mat(theta.jac(x) + chi.hess(x)); };
    return t;
}

struct GaugeCheckResult {
    double max_residual = 0.0;
    double tolerance = 0.0;
    bool passed = false;
};

/// max over points of max_ij |∂_iθ_j − ∂_jθ_i − ω_ij|.
inline GaugeCheckResult gauge_check(const GaugePotential& theta, const std::vector<Vec>& points, double tol) {
    if (points.empty()) throw PreconditionError("gauge_check needs a nonempty sample set");
    const int n = static_cast<int>(points.front().size() / 2);
    const Mat w = omega_matrix(n);
    GaugeCheckResult r;
    r.tolerance = tol;
    for (const auto& x : points) {
        const Mat J = theta.jac(x);
        const Mat curl = J - J.transpose();
        r.max_residual = std::max(r.max_residual, (curl - w).cwiseAbs().maxCoeff());
    }
    r.passed = r.max_residual <= tol;
    return r;
}

/// Uniform samples in the box [−half_width, half_width]^{2n}.
inline std::vector<Vec> random_points(int n, std::size_t count, std::uint64_t seed, double half_width = 2.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-half_width, half_width);
    std::vector<Vec> pts;
    pts.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        Vec x(2 * n);
        for (int i = 0; i < 2 * n; ++i) x[i] = u(rng);
        pts.push_back(std::move(x));
    }
    return pts;
}

// ---------------------------------------------------------------------------
// Conformal metric g_ij = h⁻¹ δ_ij

struct MetricValues {
    Mat g;
    Mat g_inv;
    double det = 0.0;
};

class ConformalMetric {
public:
    explicit ConformalMetric(HamiltonianField h) : h_(std::move(h)) {}

    const HamiltonianField& hamiltonian() const noexcept { return h_; }

    /// g^{ij} = h·δ^{ij}; only the conformal factor is needed by most callers.
    double inverse_factor(const Vec& x) const { return h_.checked(x); }

    MetricValues eval(const Vec& x) const {
        const double h = h_.checked(x);
        const auto d = x.size();
        MetricValues m;
        m.g = Mat::Identity(d, d) / h;
        m.g_inv = Mat::Identity(d, d) * h;
        m.det = std::pow(h, -static_cast<double>(d));
        return m;
    }

private:
    HamiltonianField h_;
};

inline MetricValues metric_eval(const ConformalMetric& metric, const Vec& x) { return metric.eval(x); }

// ---------------------------------------------------------------------------
// Closed surfaces and flux

struct SurfaceCell {
    Vec base;
    Vec t1;
    Vec t2;
    double weight = 1.0;
};

enum class SurfaceKind { AnalyticTorus, Degenerate, ImmersedClosed, Open };

/// Oriented quadrature cells of a 2-surface. A generator, when present,
/// rebuilds the cells at a given resolution so the flux can be refined.
class SurfaceMesh {
public:
    using Generator = std::function<std::vector<SurfaceCell>(int resolution)>;

    SurfaceMesh(SurfaceKind kind, std::vector<SurfaceCell> cells)
        : kind_(kind), cells_(std::move(cells)) {}

    SurfaceMesh(SurfaceKind kind, Generator gen, int resolution)
        : kind_(kind), gen_(std::move(gen)), resolution_(resolution), cells_(gen_(resolution)) {}

    SurfaceKind kind() const noexcept { return kind_; }
    bool closed() const noexcept { return kind_ != SurfaceKind::Open; }
    bool refinable() const noexcept { return static_cast<bool>(gen_); }
    int resolution() const noexcept { return resolution_; }
    const std::vector<SurfaceCell>& cells() const noexcept { return cells_; }

    SurfaceMesh refined() const {
        if (!gen_) return *this;
        return SurfaceMesh(kind_, gen_, 2 * resolution_);
    }

private:
    SurfaceKind kind_;
    Generator gen_;
    int resolution_ = 0;
    std::vector<SurfaceCell> cells_;
};

namespace surfaces {

/// Fundamental domain [0, L]² of the (q¹, p₁) plane, identified as a flat torus.
/// Tangents are ordered (∂_p, ∂_q) so that ω(t1, t2) > 0.
inline SurfaceMesh flat_torus(double side, int n = 1, int resolution = 8) {
    CanonicalChart chart(n);
    auto gen = [side, n](int res) {
        std::vector<SurfaceCell> cells;
        const double d = side / res;
        for (int a = 0; a < res; ++a)
            for (int b = 0; b < res; ++b) {
                SurfaceCell c;
                c.base = Vec::Zero(2 * n);
                c.base[0] = (a + 0.5) * d;
                c.base[n] = (b + 0.5) * d;
                c.t1 = Vec::Zero(2 * n);
                c.t2 = Vec::Zero(2 * n);
                c.t1[n] = d;
                c.t2[0] = d;
                cells.push_back(std::move(c));
            }
        return cells;
    };
    return SurfaceMesh(SurfaceKind::AnalyticTorus, gen, resolution);
}

inline SurfaceMesh degenerate(int n = 1) {
    SurfaceCell c;
    c.base = Vec::Zero(2 * n);
    c.t1 = Vec::Zero(2 * n);
    c.t2 = Vec::Zero(2 * n);
    return SurfaceMesh(SurfaceKind::Degenerate, std::vector<SurfaceCell>{c});
}

/// Round sphere of the given radius spanned by three coordinate axes of ℝ^{2n}.
inline SurfaceMesh sphere(int n, std::array<int, 3> axes, double radius = 1.0, int resolution = 16,
                          Vec center = Vec()) {
    CanonicalChart chart(n);
    for (int a : axes)
        if (a < 0 || a >= chart.dim()) throw InvalidArgument("sphere axis out of range");
    if (center.size() == 0) center = Vec::Zero(2 * n);
    auto gen = [n, axes, radius, center](int res) {
        std::vector<SurfaceCell> cells;
        const double dth = std::numbers::pi / res;
        const double dph = 2 * std::numbers::pi / (2 * res);
        for (int a = 0; a < res; ++a)
            for (int b = 0; b < 2 * res; ++b) {
                const double th = (a + 0.5) * dth;
                const double ph = (b + 0.5) * dph;
                SurfaceCell c;
                c.base = center;
                c.t1 = Vec::Zero(2 * n);
                c.t2 = Vec::Zero(2 * n);
                c.base[axes[0]] += radius * std::sin(th) * std::cos(ph);
                c.base[axes[1]] += radius * std::sin(th) * std::sin(ph);
                c.base[axes[2]] += radius * std::cos(th);
                c.t1[axes[0]] = radius * std::cos(th) * std::cos(ph) * dth;
                c.t1[axes[1]] = radius * std::cos(th) * std::sin(ph) * dth;
                c.t1[axes[2]] = -radius * std::sin(th) * dth;
                c.t2[axes[0]] = -radius * std::sin(th) * std::sin(ph) * dph;
                c.t2[axes[1]] = radius * std::sin(th) * std::cos(ph) * dph;
                cells.push_back(std::move(c));
            }
        return cells;
    };
    return SurfaceMesh(SurfaceKind::ImmersedClosed, gen, resolution);
}

/// Flat disk in the (q¹, p₁) plane; used to exercise the open-surface precondition.
inline SurfaceMesh disk(double radius = 1.0, int n = 1, int resolution = 8) {
    auto gen = [radius, n](int res) {
        std::vector<SurfaceCell> cells;
        const double dr = radius / res;
        const double dph = 2 * std::numbers::pi / (4 * res);
        for (int a = 0; a < res; ++a)
            for (int b = 0; b < 4 * res; ++b) {
                const double r = (a + 0.5) * dr;
                const double ph = (b + 0.5) * dph;
                SurfaceCell c;
                c.base = Vec::Zero(2 * n);
                c.base[0] = r * std::cos(ph);
                c.base[n] = r * std::sin(ph);
                c.t1 = Vec::Zero(2 * n);
                c.t2 = Vec::Zero(2 * n);
                c.t1[0] = std::cos(ph) * dr;
                c.t1[n] = std::sin(ph) * dr;
                c.t2[0] = -r * std::sin(ph) * dph;
                c.t2[n] = r * std::cos(ph) * dph;
                cells.push_back(std::move(c));
            }
        return cells;
    };
    return SurfaceMesh(SurfaceKind::Open, gen, resolution);
}

}  // namespace surfaces

struct FluxResult {
    double flux_over_2pi = 0.0;
    double integrality_residual = 0.0;
    long nearest_integer = 0;
    int refinements = 0;
};

/// Σ_cells weight·ω(t1, t2) / 2π for one fixed mesh.
inline double flux_over_2pi(const SurfaceMesh& mesh) {
    if (mesh.cells().empty()) return 0.0;
    const int n = static_cast<int>(mesh.cells().front().base.size() / 2);
    const Mat w = omega_matrix(n);
    double s = 0.0;
    for (const auto& c : mesh.cells()) s += c.weight * c.t1.dot(w * c.t2);
    return s / (2 * std::numbers::pi);
}

/// Flux of ω through a closed surface in units of 2π, refined by doubling
/// until successive values agree to 1e-8.
inline FluxResult kostant_flux(const SurfaceMesh& mesh, double refine_tol = 1e-8, int max_refinements = 8) {
    if (!mesh.closed()) throw PreconditionError("kostant_flux needs a closed surface");
    FluxResult r;
    double prev = flux_over_2pi(mesh);
    if (mesh.refinable()) {
        SurfaceMesh cur = mesh;
        for (int k = 0; k < max_refinements; ++k) {
            cur = cur.refined();
            const double next = flux_over_2pi(cur);
            ++r.refinements;
            const bool done = std::abs(next - prev) < refine_tol;
            prev = next;
            if (done) break;
        }
    }
    r.flux_over_2pi = prev;
    r.nearest_integer = std::lround(prev);
    r.integrality_residual = std::abs(prev - static_cast<double>(r.nearest_integer));
    return r;
}

}  // namespace geoq
