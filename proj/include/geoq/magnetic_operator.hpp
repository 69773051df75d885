#pragma once

// Lattice discretization of the quantum Hamiltonian h-weighted ½ΣΠ_iΠ_i on the
// phase plane (n = 1) with Dirichlet walls.
//
// Π_i = −iℏ^{1/2}∂_i − θ_i/ℏ^{1/2} becomes a covariant difference along each
// lattice link with the Peierls phase U = exp(−(i/ℏ)∫θ·dξ). The kinetic form
//   K[ψ] = (ℏ/2Δ²) Σ_links |U_ab ψ_b − ψ_a|²
// is the sandwich D‡D, so K is Hermitian and nonnegative by construction.
// With inverse metric g^{ij} = hδ and density g^{1/2} = h⁻¹ the link weight
// g^{1/2}g^{ij} is 1, and the generalized problem Kψ = λMψ, M = diag(h⁻¹), is symmetrized as
// A = M^{-1/2} K M^{-1/2}.

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "geoq/eigensolver.hpp"
#include "geoq/error.hpp"
#include "geoq/phase_space.hpp"

namespace geoq {

/// Square box [−R, R]² with N interior nodes per axis; the ghost layer at ±R is zero.
struct GridSpec {
    double R = 6.0;
    int N = 256;

    double spacing() const { return 2 * R / (N + 1); }
    double x(int i) const { return -R + (i + 1) * spacing(); }
    Eigen::Index index(int iq, int ip) const { return static_cast<Eigen::Index>(iq) * N + ip; }
    Eigen::Index size() const { return static_cast<Eigen::Index>(N) * N; }

    void validate(double hbar) const {
        if (!(R > 0)) throw InvalidArgument("grid half-width R must be positive");
        if (N < 8) throw InvalidArgument("grid needs at least 8 nodes per axis");
        if (!(hbar > 0)) throw InvalidArgument("hbar must be positive");
        if (spacing() > std::sqrt(hbar) / 4 * (1 + 1e-12))
            throw PreconditionError("grid spacing " + std::to_string(spacing()) +
                                    " does not resolve the magnetic length: need <= sqrt(hbar)/4 = " +
                                    std::to_string(std::sqrt(hbar) / 4));
    }
};

struct MagneticOperator {
    SpMat A;            // symmetrized Hamiltonian
    SpMat K;            // flat kinetic part ½ΣΠΠ, used for fast-action labels
    Eigen::VectorXd h;  // h at the nodes
    GridSpec grid;
    double hbar = 0.0;
    std::string model_id;
    std::string gauge_id;
    std::string ordering = "link-sandwich, I1=I2=0";

    double symmetry_residual() const {
        const SpMat D = SpMat(A.adjoint()) - A;
        double m = 0.0;
        for (Eigen::Index k = 0; k < D.outerSize(); ++k)
            for (SpMat::InnerIterator it(D, k); it; ++it) m = std::max(m, std::abs(it.value()));
        return m;
    }
};

namespace detail {

/// ∫θ·dξ along the straight link a → b (Simpson; exact for θ up to cubic).
inline double link_integral(const GaugePotential& theta, const Vec& a, const Vec& b) {
    const Vec d = b - a;
    const Vec m = 0.5 * (a + b);
    return (theta.value(a).dot(d) + 4 * theta.value(m).dot(d) + theta.value(b).dot(d)) / 6.0;
}

}  // namespace detail

/// Assembles the operator. A zero gauge potential (`gauges::zero`) with h ≡ 1 gives
/// ℏ/2 times the Dirichlet Laplacian, a useful sanity scenario.
inline MagneticOperator build_hamiltonian(const GridSpec& grid, const HamiltonianField& model, double hbar,
                                          const GaugePotential& theta) {
    if (model.n != 1) throw PreconditionError("the quantum solver supports n = 1 only");
    grid.validate(hbar);
    const int N = grid.N;
    const double d = grid.spacing();
    const double c = 0.5 * hbar / (d * d);

    MagneticOperator op;
    op.grid = grid;
    op.hbar = hbar;
    op.model_id = model.id;
    op.gauge_id = theta.id;
    op.h.resize(grid.size());

    auto node = [&](int iq, int ip) {
        Vec v(2);
        v << grid.x(iq), grid.x(ip);
        return v;
    };

    for (int iq = 0; iq < N; ++iq)
        for (int ip = 0; ip < N; ++ip) op.h[grid.index(iq, ip)] = model.checked(node(iq, ip));

    std::vector<Eigen::Triplet<cplx>> tk;
    tk.reserve(static_cast<std::size_t>(5 * grid.size()));
    for (int iq = 0; iq < N; ++iq)
        for (int ip = 0; ip < N; ++ip) {
            const Eigen::Index a = grid.index(iq, ip);
            // Every node has four links; those ending on the ghost layer only add to the diagonal.
            tk.emplace_back(a, a, 4 * c);
            const int nb[2][2] = {{iq + 1, ip}, {iq, ip + 1}};
            for (const auto& nbr : nb) {
                if (nbr[0] >= N || nbr[1] >= N) continue;
                const Eigen::Index b = grid.index(nbr[0], nbr[1]);
                const cplx U = std::exp(cplx(0.0, -detail::link_integral(theta, node(iq, ip), node(nbr[0], nbr[1])) / hbar));
                tk.emplace_back(a, b, -c * U);
                tk.emplace_back(b, a, -c * std::conj(U));
            }
        }
    op.K.resize(grid.size(), grid.size());
    op.K.setFromTriplets(tk.begin(), tk.end());
    op.K.makeCompressed();

    // A = h^{1/2} K h^{1/2}, assembled entrywise so the two triangles stay exact conjugates.
    op.A = op.K;
    for (Eigen::Index k = 0; k < op.A.outerSize(); ++k)
        for (SpMat::InnerIterator it(op.A, k); it; ++it)
            it.valueRef() *= std::sqrt(op.h[it.row()]) * std::sqrt(op.h[it.col()]);
    return op;
}

inline MagneticOperator build_hamiltonian(const GridSpec& grid, const HamiltonianField& model, double hbar) {
    return build_hamiltonian(grid, model, hbar, gauges::symmetric(1));
}

/// Largest |φ| on the outermost ring of nodes relative to max |φ|.
inline double boundary_amplitude(const GridSpec& grid, const CVec& v) {
    const double top = v.cwiseAbs().maxCoeff();
    double edge = 0.0;
    for (int i = 0; i < grid.N; ++i) {
        edge = std::max({edge, std::abs(v[grid.index(0, i)]), std::abs(v[grid.index(grid.N - 1, i)]),
                         std::abs(v[grid.index(i, 0)]), std::abs(v[grid.index(i, grid.N - 1)])});
    }
    return top > 0 ? edge / top : 0.0;
}

}  // namespace geoq
