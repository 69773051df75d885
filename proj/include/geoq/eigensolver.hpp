#pragma once

// Shift-invert block Krylov eigensolver for sparse Hermitian operators.
//
// Windows of eigenpairs nearest a shift σ are computed from a restarted block
// Krylov space of (A − σI)⁻¹ with Rayleigh–Ritz on A. The LDLᴴ factor of
// A − σI also yields the inertia ν(σ) = #{λ < σ}, which certifies that a set
// of windows covers an interval of the spectrum without gaps.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "geoq/error.hpp"

namespace geoq {

using cplx = std::complex<double>;
using SpMat = Eigen::SparseMatrix<cplx>;
using CVec = Eigen::VectorXcd;
using CDense = Eigen::MatrixXcd;

struct EigenOptions {
    double tol = 1e-8;          // ‖Av − λv‖/‖v‖ per returned pair
    int extra_block = 8;        // guard Ritz pairs kept beyond the requested count
    int block = 4;              // Krylov block width; wider blocks resolve clusters
    int max_cycles = 200;       // thick restarts
    std::uint64_t seed = 1;
};

struct EigenWindow {
    double sigma = 0.0;
    long inertia_below = 0;     // #{λ < σ} from the LDLᴴ factor
    std::vector<double> values;  // ascending
    std::vector<CVec> vectors;   // unit norm
    std::vector<double> residuals;
    bool converged = false;
    int cycles = 0;
};

/// LDLᴴ factorization of A − σI with inertia.
class ShiftedFactor {
public:
    ShiftedFactor(const SpMat& A, double sigma) : sigma_(sigma) {
        SpMat S = A;
        for (Eigen::Index i = 0; i < S.rows(); ++i) S.coeffRef(i, i) -= sigma;
        S.makeCompressed();
        ldlt_.compute(S);
        if (ldlt_.info() != Eigen::Success)
            throw EigensolverError("LDL factorization of A - sigma I failed at sigma = " + std::to_string(sigma));
        const auto D = ldlt_.vectorD();
        for (Eigen::Index i = 0; i < D.size(); ++i) {
            const double d = D[i].real();
            if (!std::isfinite(d) || d == 0.0)
                throw EigensolverError("singular pivot in A - sigma I at sigma = " + std::to_string(sigma));
            if (d < 0) ++negatives_;
        }
    }

    double sigma() const noexcept { return sigma_; }
    long negatives() const noexcept { return negatives_; }
    CDense solve(const CDense& B) const { return ldlt_.solve(B); }

private:
    double sigma_;
    long negatives_ = 0;
    Eigen::SimplicialLDLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
};

namespace detail {

/// Orthonormalize the columns of B against Q (two passes) and among themselves;
/// columns that become numerically dependent are dropped.
inline CDense orthonormalize_against(const CDense& Q, CDense B) {
    for (int pass = 0; pass < 2; ++pass)
        if (Q.cols() > 0) B -= Q * (Q.adjoint() * B);
    std::vector<CVec> kept;
    for (Eigen::Index j = 0; j < B.cols(); ++j) {
        CVec v = B.col(j);
        const double n0 = v.norm();
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& u : kept) v -= u * u.dot(v);
            if (Q.cols() > 0) v -= Q * (Q.adjoint() * v);
        }
        const double n1 = v.norm();
        if (n1 > 1e-10 * std::max(n0, 1e-300) && n1 > 1e-300) kept.push_back(v / n1);
    }
    CDense out(B.rows(), static_cast<Eigen::Index>(kept.size()));
    for (std::size_t j = 0; j < kept.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = kept[j];
    return out;
}

inline CDense random_block(Eigen::Index n, Eigen::Index b, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    CDense V(n, b);
    for (Eigen::Index j = 0; j < b; ++j)
        for (Eigen::Index i = 0; i < n; ++i) V(i, j) = cplx(g(rng), g(rng));
    return orthonormalize_against(CDense(n, 0), V);
}

}  // namespace detail

inline double hermitian_residual(const SpMat& A, const CVec& v, double lambda) {
    return (A * v - lambda * v).norm() / v.norm();
}

/// The m eigenpairs of A nearest σ, using a precomputed factor of A − σI.
/// Thick-restart block Krylov on T = (A − σI)⁻¹: the basis grows block by block
/// to 2(m + guard) + block columns, Rayleigh–Ritz on T picks the pairs of largest
/// |μ|, and the kept Ritz vectors seed the next cycle together with the pending
/// block. Residuals are measured on A itself.
inline EigenWindow eigs_near(const SpMat& A, const ShiftedFactor& factor, int m, const EigenOptions& opt = {}) {
    const Eigen::Index n = A.rows();
    if (m < 1) throw InvalidArgument("eigs_near needs m >= 1");
    if (m >= n) throw PreconditionError("requested eigenpair count must be well below the operator dimension");
    const double sigma = factor.sigma();
    const Eigen::Index bs = std::clamp<Eigen::Index>(opt.block, 1, n / 4);
    const Eigen::Index keep = std::min<Eigen::Index>(n / 4, m + std::max(opt.extra_block, 1));
    const Eigen::Index maxb = std::min<Eigen::Index>(n / 2, 2 * keep + bs);

    EigenWindow w;
    w.sigma = sigma;
    w.inertia_below = factor.negatives();

    CDense V(n, 0), TV(n, 0);
    CDense F = detail::random_block(n, bs, opt.seed);
    std::uint64_t refill = opt.seed;
    std::vector<double> lam, res;
    CDense Y;
    for (int cycle = 1; cycle <= opt.max_cycles; ++cycle) {
        w.cycles = cycle;
        while (V.cols() + F.cols() <= maxb) {
            const CDense TF = factor.solve(F);
            CDense V2(n, V.cols() + F.cols()), T2(n, V.cols() + F.cols());
            V2 << V, F;
            T2 << TV, TF;
            V.swap(V2);
            TV.swap(T2);
            CDense next = detail::orthonormalize_against(V, TF);
            if (next.cols() < bs) {
                // Deflated directions are replaced by fresh random ones.
                const CDense fill = detail::orthonormalize_against(
                    V, detail::random_block(n, bs, ++refill + 0x9e3779b97f4a7c15ULL));
                CDense g(n, next.cols() + fill.cols());
                g << next, fill;
                next = detail::orthonormalize_against(V, g).leftCols(std::min<Eigen::Index>(bs, g.cols()));
            }
            F.swap(next);
            if (F.cols() == 0) break;
        }
        CDense H = V.adjoint() * TV;
        H = 0.5 * (H + H.adjoint()).eval();
        Eigen::SelfAdjointEigenSolver<CDense> es(H);
        if (es.info() != Eigen::Success) throw EigensolverError("Rayleigh-Ritz eigensolve failed");
        const Eigen::VectorXd mu = es.eigenvalues();
        std::vector<Eigen::Index> order(static_cast<std::size_t>(mu.size()));
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](Eigen::Index a, Eigen::Index c) { return std::abs(mu[a]) > std::abs(mu[c]); });
        const Eigen::Index k = std::min<Eigen::Index>(keep, static_cast<Eigen::Index>(order.size()));
        CDense S(V.cols(), k);
        lam.assign(static_cast<std::size_t>(k), 0.0);
        for (Eigen::Index j = 0; j < k; ++j) {
            const Eigen::Index c = order[static_cast<std::size_t>(j)];
            S.col(j) = es.eigenvectors().col(c);
            lam[static_cast<std::size_t>(j)] = mu[c] != 0.0 ? sigma + 1.0 / mu[c] : std::numeric_limits<double>::infinity();
        }
        Y = V * S;
        const Eigen::Index mm = std::min<Eigen::Index>(m, k);
        res.assign(static_cast<std::size_t>(mm), 0.0);
        bool all = k >= m;
        for (Eigen::Index j = 0; j < mm; ++j) {
            res[static_cast<std::size_t>(j)] = hermitian_residual(A, Y.col(j), lam[static_cast<std::size_t>(j)]);
            if (!(res[static_cast<std::size_t>(j)] <= opt.tol)) all = false;
        }
        if (all) {
            w.converged = true;
            break;
        }
        CDense TY = TV * S;
        V.swap(Y);
        TV.swap(TY);
        Y = V;
        // F is orthogonal to the old basis, hence to the kept Ritz vectors.
        if (F.cols() == 0) F = detail::orthonormalize_against(V, detail::random_block(n, bs, ++refill));
    }

    const int count = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(m), res.size()));
    std::vector<int> idx(static_cast<std::size_t>(count));
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int c) { return lam[a] < lam[c]; });
    for (int j : idx) {
        CVec v = Y.col(j);
        v /= v.norm();
        w.values.push_back(lam[static_cast<std::size_t>(j)]);
        w.residuals.push_back(hermitian_residual(A, v, lam[static_cast<std::size_t>(j)]));
        w.vectors.push_back(std::move(v));
    }
    for (double r : w.residuals)
        if (!(r <= opt.tol)) w.converged = false;
    return w;
}

inline EigenWindow eigs_near(const SpMat& A, double sigma, int m, const EigenOptions& opt = {}) {
    const ShiftedFactor f(A, sigma);
    return eigs_near(A, f, m, opt);
}

/// Gershgorin lower bound of the spectrum of a Hermitian matrix.
inline double gershgorin_lower(const SpMat& A) {
    Eigen::VectorXd off = Eigen::VectorXd::Zero(A.rows());
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(A.rows());
    for (Eigen::Index k = 0; k < A.outerSize(); ++k)
        for (SpMat::InnerIterator it(A, k); it; ++it) {
            if (it.row() == it.col()) diag[it.row()] = it.value().real();
            else off[it.row()] += std::abs(it.value());
        }
    return (diag - off).minCoeff();
}

/// The m smallest eigenpairs. The shift sits at or below the Gershgorin bound,
/// so the window nearest it is the bottom of the spectrum.
inline EigenWindow smallest_eigs(const SpMat& A, int m, const EigenOptions& opt = {}) {
    const double g = gershgorin_lower(A);
    const double sigma = std::min(0.0, g) - 1e-3 * std::max(1.0, std::abs(g));
    EigenWindow w = eigs_near(A, sigma, m, opt);
    if (w.inertia_below != 0) throw EigensolverError("shift below the spectrum has nonzero inertia");
    return w;
}

/// Gershgorin upper bound of the spectrum of a Hermitian matrix.
inline double gershgorin_upper(const SpMat& A) {
    Eigen::VectorXd row = Eigen::VectorXd::Zero(A.rows());
    for (Eigen::Index k = 0; k < A.outerSize(); ++k)
        for (SpMat::InnerIterator it(A, k); it; ++it)
            row[it.row()] += it.row() == it.col() ? it.value().real() : std::abs(it.value());
    return row.maxCoeff();
}

/// ν(x) = #{λ < x}; x is nudged upward if A − xI has an exactly singular pivot.
inline long inertia_at(const SpMat& A, double& x) {
    for (int k = 0; k < 8; ++k) {
        try {
            return ShiftedFactor(A, x).negatives();
        } catch (const EigensolverError&) {
            x += 1e-9 * std::max(1.0, std::abs(x));
        }
    }
    throw EigensolverError("no regular shift found near " + std::to_string(x));
}

struct SliceResult {
    std::vector<double> values;
    std::vector<CVec> vectors;
    std::vector<double> residuals;
    bool converged = true;
    double certified_below = 0.0;  // every eigenvalue below this is in `values`
    int windows = 0;
    int factorizations = 0;
};

/// Collects the spectrum from the bottom upward in certified slices until
/// `stop(collected)` returns true or `max_values` eigenvalues are found.
/// Each slice (top, hi] is chosen by inertia bisection to hold at most `window`
/// eigenvalues (or one cluster that cannot be split), and exactly that many
/// pairs nearest its midpoint are computed. A slice is accepted only when all
/// of them lie inside it, so every eigenvalue below `certified_below` is
/// present exactly once.
inline SliceResult spectrum_slices(const SpMat& A, int window, int max_values,
                                   const std::function<bool(const SliceResult&)>& stop, const EigenOptions& opt = {}) {
    if (window < 1) throw InvalidArgument("slice window must be >= 1");
    SliceResult out;
    const double g = gershgorin_lower(A);
    double top = std::min(0.0, g) - 1e-3 * std::max(1.0, std::abs(g));
    const double upper = gershgorin_upper(A);
    if (inertia_at(A, top) != 0) throw EigensolverError("shift below the spectrum has nonzero inertia");
    ++out.factorizations;
    out.certified_below = top;
    double step = 1e-3 * (upper - top);
    const double resolution = 1e-12 * std::max(1.0, upper - top);

    while (static_cast<int>(out.values.size()) < max_values && !(stop && stop(out))) {
        const long have = static_cast<long>(out.values.size());
        double lo = top, hi = std::min(top + step, upper + 1.0);
        long c = inertia_at(A, hi) - have;
        ++out.factorizations;
        while (c == 0) {
            if (hi > upper) throw PreconditionError("spectrum exhausted before the slicing goal was reached");
            lo = hi;
            step *= 2;
            hi = std::min(top + step, upper + 1.0);
            c = inertia_at(A, hi) - have;
            ++out.factorizations;
        }
        while (c > window && hi - lo > resolution) {
            double mid = 0.5 * (lo + hi);
            const long cm = inertia_at(A, mid) - have;
            ++out.factorizations;
            if (cm == 0) {
                lo = mid;
            } else {
                hi = mid;
                c = cm;
            }
        }
        if (c < 0) throw EigensolverError("inertia decreased between slices");

        const int m = static_cast<int>(c);
        EigenOptions o = opt;
        if (m > window) o.block = std::max(opt.block, m + opt.extra_block);
        double center = 0.5 * (top + hi);
        const ShiftedFactor* fp = nullptr;
        std::optional<ShiftedFactor> factor;
        for (int k = 0; k < 8 && !fp; ++k) {
            try {
                factor.emplace(A, center);
                fp = &*factor;
            } catch (const EigensolverError&) {
                center += 1e-9 * (hi - top);
            }
        }
        if (!fp) throw EigensolverError("no regular slice midpoint");
        ++out.factorizations;
        EigenWindow w = eigs_near(A, *fp, m, o);
        ++out.windows;
        long inside = 0;
        for (double v : w.values)
            if (v > top && v < hi) ++inside;
        if (inside != c) {
            // Retry once from a different start block before giving up.
            o.seed = opt.seed + 0x5851f42d4c957f2dULL;
            o.max_cycles = 2 * opt.max_cycles;
            w = eigs_near(A, *fp, m, o);
            ++out.windows;
            inside = 0;
            for (double v : w.values)
                if (v > top && v < hi) ++inside;
            if (inside != c)
                throw EigensolverError("slice (" + std::to_string(top) + ", " + std::to_string(hi) + ") holds " +
                                       std::to_string(c) + " eigenvalues but " + std::to_string(inside) +
                                       " were found");
        }
        for (std::size_t j = 0; j < w.values.size(); ++j) {
            out.values.push_back(w.values[j]);
            out.vectors.push_back(w.vectors[j]);
            out.residuals.push_back(w.residuals[j]);
            if (!(w.residuals[j] <= opt.tol)) out.converged = false;
        }
        // Aim the next slice at about `window` eigenvalues using the local density.
        step = std::max(0.9 * (hi - top) * window / static_cast<double>(std::max(1L, c)), resolution);
        top = hi;
        out.certified_below = hi;
    }
    return out;
}

}  // namespace geoq
