#pragma once

// Prequantum operators on sections ψ(q, p) of the phase plane (n = 1), gauge θ = (0, −q).

#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "geoq/error.hpp"

namespace geoq {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;

enum class Boundary { Periodic, ZeroPadded };

inline Boundary boundary_from_string(const std::string& s) {
    if (s == "periodic") return Boundary::Periodic;
    if (s == "zero-padded") return Boundary::ZeroPadded;
    throw InvalidArgument("unknown boundary '" + s + "'");
}

/// Complex section sampled at q_i = q_min + iΔq, p_j = p_min + jΔp, with
/// Δ = (max − min)/N. Values are stored as values(i, j).
class SectionGrid {
public:
    static constexpr int kMinNodes = 16;
    /// Nodes lost at each edge when a 4th-order first-derivative stencil is applied.
    static constexpr int kStencilReach = 2;

    SectionGrid(double q_min, double q_max, int nq, double p_min, double p_max, int np,
                Boundary boundary = Boundary::Periodic)
        : q_min_(q_min), p_min_(p_min), dq_((q_max - q_min) / nq), dp_((p_max - p_min) / np),
          boundary_(boundary), values_(CMat::Zero(nq, np)) {
        if (nq < kMinNodes || np < kMinNodes)
            throw InvalidArgument("section grid needs at least 16 nodes per axis");
        if (!(q_max > q_min) || !(p_max > p_min)) throw InvalidArgument("section grid box is empty");
    }

    int nq() const noexcept { return static_cast<int>(values_.rows()); }
    int np() const noexcept { return static_cast<int>(values_.cols()); }
    double dq() const noexcept { return dq_; }
    double dp() const noexcept { return dp_; }
    double q(int i) const noexcept { return q_min_ + i * dq_; }
    double p(int j) const noexcept { return p_min_ + j * dp_; }
    Boundary boundary() const noexcept { return boundary_; }

    CMat& values() noexcept { return values_; }
    const CMat& values() const noexcept { return values_; }
    cplx& operator()(int i, int j) { return values_(i, j); }
    cplx operator()(int i, int j) const { return values_(i, j); }

    /// Same geometry, zero values.
    SectionGrid like() const {
        SectionGrid g = *this;
        g.values_.setZero();
        return g;
    }

    template <class F>
    SectionGrid& fill(F&& f) {
        for (int j = 0; j < np(); ++j)
            for (int i = 0; i < nq(); ++i) values_(i, j) = f(q(i), p(j));
        return *this;
    }

    /// L² norm with area element ΔqΔp over nodes at least `margin` away from every edge.
    double norm(int margin = 0) const {
        double s = 0.0;
        for (int j = margin; j < np() - margin; ++j)
            for (int i = margin; i < nq() - margin; ++i) s += std::norm(values_(i, j));
        return std::sqrt(s * dq_ * dp_);
    }

    cplx inner(const SectionGrid& other) const {
        return (values_.conjugate().cwiseProduct(other.values_)).sum() * (dq_ * dp_);
    }

private:
    double q_min_, p_min_, dq_, dp_;
    Boundary boundary_;
    CMat values_;
};

namespace detail {

/// 4th-order central first derivative along q (axis 0) or p (axis 1).
inline SectionGrid derivative(const SectionGrid& psi, int axis) {
    SectionGrid out = psi.like();
    const int nq = psi.nq(), np = psi.np();
    const double d = axis == 0 ? psi.dq() : psi.dp();
    const bool periodic = psi.boundary() == Boundary::Periodic;
    auto at = [&](int i, int j) -> cplx {
        if (periodic) return psi((i % nq + nq) % nq, (j % np + np) % np);
        if (i < 0 || i >= nq || j < 0 || j >= np) return 0.0;
        return psi(i, j);
    };
    for (int j = 0; j < np; ++j)
        for (int i = 0; i < nq; ++i) {
            const int di = axis == 0 ? 1 : 0, dj = axis == 1 ? 1 : 0;
            // Paired differences, so a section constant along the axis gives exactly 0.
            const cplx v = (8.0 * (at(i + di, j + dj) - at(i - di, j - dj)) -
                            (at(i + 2 * di, j + 2 * dj) - at(i - 2 * di, j - 2 * dj))) /
                           (12.0 * d);
            out(i, j) = v;
        }
    return out;
}

}  // namespace detail

/// p → −iℏ ∂/∂q.
inline SectionGrid apply_P(const SectionGrid& psi, double hbar) {
    SectionGrid out = detail::derivative(psi, 0);
    out.values() *= cplx(0.0, -hbar);
    return out;
}

/// q → iℏ ∂/∂p + q.
inline SectionGrid apply_Q(const SectionGrid& psi, double hbar) {
    SectionGrid out = detail::derivative(psi, 1);
    out.values() *= cplx(0.0, hbar);
    for (int j = 0; j < psi.np(); ++j)
        for (int i = 0; i < psi.nq(); ++i) out(i, j) += psi.q(i) * psi(i, j);
    return out;
}

/// ‖(Q̂P̂ − P̂Q̂ − iℏ)ψ‖ / ‖ψ‖ over nodes unaffected by the boundary.
inline double ccr_residual(const SectionGrid& psi, double hbar) {
    const SectionGrid qp = apply_Q(apply_P(psi, hbar), hbar);
    const SectionGrid pq = apply_P(apply_Q(psi, hbar), hbar);
    SectionGrid r = psi.like();
    r.values() = qp.values() - pq.values() - cplx(0.0, hbar) * psi.values();
    const int margin = 2 * SectionGrid::kStencilReach;
    const double den = psi.norm(margin);
    if (!(den > 0)) throw InvalidArgument("ccr_residual: zero-norm section");
    return r.norm(margin) / den;
}

/// ‖∂ψ/∂p‖ / ‖ψ‖: zero exactly for vertically polarized sections.
inline double polarization_residual(const SectionGrid& psi) {
    const int margin = SectionGrid::kStencilReach;
    const double den = psi.norm(margin);
    if (!(den > 0)) throw InvalidArgument("polarization_residual: zero-norm section");
    return detail::derivative(psi, 1).norm(margin) / den;
}

/// Prequantum operator of h = ½(q² + p²) in this gauge:
/// −iℏ(p∂_q − q∂_p) + ½(q² − p²). It reduces to the P̂, Q̂ rules on linear observables.
inline SectionGrid apply_prequantum_harmonic(const SectionGrid& psi, double hbar) {
    const SectionGrid dq = detail::derivative(psi, 0);
    const SectionGrid dp = detail::derivative(psi, 1);
    SectionGrid out = psi.like();
    for (int j = 0; j < psi.np(); ++j)
        for (int i = 0; i < psi.nq(); ++i) {
            const double q = psi.q(i), p = psi.p(j);
            out(i, j) = cplx(0.0, -hbar) * (p * dq(i, j) - q * dp(i, j)) + 0.5 * (q * q - p * p) * psi(i, j);
        }
    return out;
}

/// One classical RK4 step of iℏ ∂_t ψ = ô(h)ψ for the harmonic generator.
inline SectionGrid prequantum_step(const SectionGrid& psi, double hbar, double dt) {
    auto rhs = [hbar](const SectionGrid& s) {
        SectionGrid r = apply_prequantum_harmonic(s, hbar);
        r.values() *= cplx(0.0, -1.0 / hbar);
        return r;
    };
    auto axpy = [](const SectionGrid& a, double w, const SectionGrid& b) {
        SectionGrid r = a;
        r.values() += w * b.values();
        return r;
    };
    const SectionGrid k1 = rhs(psi);
    const SectionGrid k2 = rhs(axpy(psi, dt / 2, k1));
    const SectionGrid k3 = rhs(axpy(psi, dt / 2, k2));
    const SectionGrid k4 = rhs(axpy(psi, dt, k3));
    SectionGrid out = psi;
    out.values() += (dt / 6) * (k1.values() + 2.0 * k2.values() + 2.0 * k3.values() + k4.values());
    return out;
}

// Built-in test sections.

struct GaussianSpec {
    double q0 = 0.0, p0 = 0.0;
    double width = 1.0;
    double kq = 0.0, kp = 0.0;  // plane-wave factor exp(i(kq q + kp p))
};

inline SectionGrid gaussian_section(SectionGrid grid, const GaussianSpec& g) {
    grid.fill([&](double q, double p) {
        const double r2 = (q - g.q0) * (q - g.q0) + (p - g.p0) * (p - g.p0);
        return std::exp(-r2 / (2 * g.width * g.width)) * std::exp(cplx(0.0, g.kq * q + g.kp * p));
    });
    return grid;
}

/// ‖∂_pψ‖/‖ψ‖ of `gaussian_section` in the continuum.
inline double gaussian_polarization_exact(const GaussianSpec& g) {
    return std::sqrt(1.0 / (2 * g.width * g.width) + g.kp * g.kp);
}

/// Default smooth probe for the commutator and polarization checks: a unit
/// Gaussian on [−4, 4]², four widths to each edge.
inline constexpr GaussianSpec kProbeGaussian{0.3, -0.2, 1.0, 0.25, 0.7};

inline SectionGrid probe_grid(int n, Boundary boundary = Boundary::Periodic) {
    return SectionGrid(-4, 4, n, -4, 4, n, boundary);
}

/// p-independent section f(q) = exp(−(q − q0)²/(2w²)).
inline SectionGrid polarized_section(SectionGrid grid, double q0 = 0.0, double width = 1.0) {
    grid.fill([&](double q, double) { return cplx(std::exp(-(q - q0) * (q - q0) / (2 * width * width)), 0.0); });
    return grid;
}

}  // namespace geoq
