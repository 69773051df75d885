#pragma once

// Low-lying spectra of the lattice magnetic operator, band analysis, and the
// one-dimensional oracle for the reduced dynamics.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "geoq/eigensolver.hpp"
#include "geoq/error.hpp"
#include "geoq/magnetic_operator.hpp"
#include "geoq/phase_space.hpp"

namespace geoq {

struct SpectrumResult {
    std::vector<double> values;     // ascending
    std::vector<double> residuals;
    std::vector<double> fast_action;  // J = ⟨φ, Kφ⟩/⟨φ, φ⟩
    std::vector<int> labels;          // band index k = round(J − ½)
    double max_boundary_amplitude = 0.0;
    bool converged = false;
    double certified_below = std::numeric_limits<double>::quiet_NaN();
    int windows = 0;
};

inline double fast_action(const MagneticOperator& op, const CVec& v) {
    return (v.dot(op.K * v)).real() / v.squaredNorm();
}

inline int band_label(double J) { return std::max(0, static_cast<int>(std::lround(J - 0.5))); }

namespace detail {

inline SpectrumResult label_pairs(const MagneticOperator& op, const std::vector<double>& values,
                                  const std::vector<CVec>& vectors, const std::vector<double>& residuals, double tol) {
    SpectrumResult s;
    s.values = values;
    s.residuals = residuals;
    s.converged = true;
    for (std::size_t j = 0; j < values.size(); ++j) {
        const double J = fast_action(op, vectors[j]);
        s.fast_action.push_back(J);
        s.labels.push_back(band_label(J));
        s.max_boundary_amplitude = std::max(s.max_boundary_amplitude, boundary_amplitude(op.grid, vectors[j]));
        if (!(residuals[j] <= tol)) s.converged = false;
    }
    return s;
}

}  // namespace detail

/// The m smallest eigenpairs. Not converging is reported through `converged`, with
/// the partial results kept.
inline SpectrumResult lowest_spectrum(const MagneticOperator& op, int m, std::uint64_t seed,
                                      EigenOptions opt = {}) {
    if (m < 1 || m * 10L > op.A.rows()) throw PreconditionError("eigenpair count must be much smaller than N^2");
    opt.seed = seed;
    const EigenWindow w = smallest_eigs(op.A, m, opt);
    SpectrumResult s = detail::label_pairs(op, w.values, w.vectors, w.residuals, opt.tol);
    s.windows = 1;
    return s;
}

/// Certified bottom-up spectrum, continued until `done` holds for the labeled
/// partial result or `max_values` eigenvalues are found.
inline SpectrumResult sliced_spectrum(const MagneticOperator& op, int window, int max_values,
                                      const std::function<bool(const SpectrumResult&)>& done, std::uint64_t seed,
                                      EigenOptions opt = {}) {
    opt.seed = seed;
    auto stop = [&](const SliceResult& r) {
        if (r.values.empty()) return false;
        return done(detail::label_pairs(op, r.values, r.vectors, r.residuals, opt.tol));
    };
    const SliceResult r = spectrum_slices(op.A, window, max_values, stop, opt);
    SpectrumResult s = detail::label_pairs(op, r.values, r.vectors, r.residuals, opt.tol);
    s.converged = s.converged && r.converged;
    s.certified_below = r.certified_below;
    s.windows = r.windows;
    return s;
}

/// All eigenvalues of the bands up to and including the bottom of band `k`.
inline SpectrumResult ladder_to_band(const MagneticOperator& op, int k, std::uint64_t seed, int window = 24,
                                     int max_values = 2000, const EigenOptions& opt = {}) {
    return sliced_spectrum(
        op, window, max_values,
        [k](const SpectrumResult& s) {
            return std::any_of(s.labels.begin(), s.labels.end(), [k](int l) { return l >= k; });
        },
        seed, opt);
}

/// Every eigenvalue below `emax`.
inline SpectrumResult spectrum_below(const MagneticOperator& op, double emax, std::uint64_t seed, int window = 24,
                                     int max_values = 4000, const EigenOptions& opt = {}) {
    return sliced_spectrum(
        op, window, max_values, [emax](const SpectrumResult& s) { return s.values.back() >= emax; }, seed, opt);
}

// ---------------------------------------------------------------------------
// Bands

struct Band {
    int k = 0;
    std::vector<double> values;
    std::vector<double> splittings;  // consecutive differences
    double bottom() const { return values.front(); }
    double max_splitting() const {
        return splittings.empty() ? 0.0 : *std::max_element(splittings.begin(), splittings.end());
    }
};

struct BandReport {
    std::vector<Band> bands;
    std::vector<std::vector<double>> clusters;  // gap-rule clusters of the raw values
    double gap = std::numeric_limits<double>::quiet_NaN();  // bottom(band 1) − bottom(band 0)
    double max_splitting = std::numeric_limits<double>::quiet_NaN();  // lowest band
    double ratio = std::numeric_limits<double>::quiet_NaN();
    double ratio_floor = 0.0;  // 0.7 · 0.5/ℏ
    bool separated = false;
    bool labels_consistent = true;
    bool flagged = false;
    std::string message;
};

/// Splits ascending values wherever a gap exceeds `factor` times the median
/// spacing inside the clusters; the median is re-estimated until the split is stable.
inline std::vector<std::vector<double>> gap_clusters(std::vector<double> v, double factor = 10.0) {
    std::sort(v.begin(), v.end());
    std::vector<double> gaps;
    for (std::size_t i = 1; i < v.size(); ++i) gaps.push_back(v[i] - v[i - 1]);
    auto median = [](std::vector<double> x) {
        if (x.empty()) return 0.0;
        std::nth_element(x.begin(), x.begin() + static_cast<long>(x.size() / 2), x.end());
        return x[x.size() / 2];
    };
    std::vector<bool> cut(gaps.size(), false);
    for (int it = 0; it < 50; ++it) {
        std::vector<double> inner;
        for (std::size_t i = 0; i < gaps.size(); ++i)
            if (!cut[i]) inner.push_back(gaps[i]);
        const double med = median(inner);
        std::vector<bool> next(gaps.size());
        for (std::size_t i = 0; i < gaps.size(); ++i) next[i] = gaps[i] > factor * med;
        if (next == cut) break;
        cut = next;
    }
    std::vector<std::vector<double>> out;
    if (v.empty()) return out;
    out.push_back({v[0]});
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (cut[i - 1]) out.emplace_back();
        out.back().push_back(v[i]);
    }
    return out;
}

inline Band make_band(int k, std::vector<double> values) {
    Band b;
    b.k = k;
    std::sort(values.begin(), values.end());
    b.values = std::move(values);
    for (std::size_t i = 1; i < b.values.size(); ++i) b.splittings.push_back(b.values[i] - b.values[i - 1]);
    return b;
}

/// Groups eigenvalues into bands: by band label when labels are given, else by the gap rule.
/// `splitting_count` limits the lowest-band splittings to its first levels (0: all).
inline BandReport band_analysis(const std::vector<double>& values, const std::vector<int>& labels, double hbar,
                                std::size_t splitting_count = 0) {
    if (values.size() < 4) throw PreconditionError("band analysis needs at least 4 eigenvalues");
    if (!labels.empty() && labels.size() != values.size())
        throw InvalidArgument("band labels do not match the eigenvalues");
    BandReport r;
    r.clusters = gap_clusters(values);
    if (r.clusters.size() < 2) {
        r.flagged = true;
        r.message = "no detectable clustering";
    }
    if (labels.empty()) {
        for (std::size_t i = 0; i < r.clusters.size(); ++i) r.bands.push_back(make_band(static_cast<int>(i), r.clusters[i]));
    } else {
        std::map<int, std::vector<double>> by;
        for (std::size_t i = 0; i < values.size(); ++i) by[labels[i]].push_back(values[i]);
        for (auto& [k, v] : by) r.bands.push_back(make_band(k, v));
        // Each gap cluster should carry a single label.
        for (const auto& c : r.clusters) {
            std::vector<int> seen;
            for (double x : c)
                for (std::size_t i = 0; i < values.size(); ++i)
                    if (values[i] == x) seen.push_back(labels[i]);
            if (std::adjacent_find(seen.begin(), seen.end(), std::not_equal_to<>()) != seen.end())
                r.labels_consistent = false;
        }
    }
    const Band& low = r.bands.front();
    std::vector<double> split = low.splittings;
    if (splitting_count > 1 && split.size() > splitting_count - 1) split.resize(splitting_count - 1);
    r.max_splitting = split.empty() ? 0.0 : *std::max_element(split.begin(), split.end());
    if (r.bands.size() >= 2) {
        r.gap = r.bands[1].bottom() - low.bottom();
        if (r.max_splitting > 0) r.ratio = r.gap / r.max_splitting;
    } else if (r.message.empty()) {
        r.flagged = true;
        r.message = "only one band present";
    }
    r.ratio_floor = 0.7 * 0.5 / hbar;
    r.separated = std::isfinite(r.ratio) && r.ratio >= r.ratio_floor;
    return r;
}

inline BandReport band_analysis(const SpectrumResult& s, double hbar, std::size_t splitting_count = 0) {
    return band_analysis(s.values, s.labels, hbar, splitting_count);
}

/// Near-degenerate clusters: runs of at least `min_size` values whose consecutive
/// relative spacing is below `rel_tol`. Returns their mean values.
inline std::vector<double> degenerate_levels(std::vector<double> v, double rel_tol = 1e-6, std::size_t min_size = 3) {
    std::sort(v.begin(), v.end());
    std::vector<double> out;
    std::size_t start = 0;
    for (std::size_t i = 1; i <= v.size(); ++i) {
        const bool brk = i == v.size() || v[i] - v[i - 1] > rel_tol * std::max(1.0, std::abs(v[i]));
        if (!brk) continue;
        if (i - start >= min_size) {
            double s = 0;
            for (std::size_t j = start; j < i; ++j) s += v[j];
            out.push_back(s / static_cast<double>(i - start));
        }
        start = i;
    }
    return out;
}

// ---------------------------------------------------------------------------
// One-dimensional oracle

struct OracleSpectrum {
    std::vector<double> values;
    bool analytic = false;
    double refinement_change = 0.0;  // |Richardson(Δ/2) − Richardson(Δ)| of the top value
    double half_width = 0.0;
    int nodes = 0;
};

namespace detail {

/// k-th smallest eigenvalue (0-based) of the symmetric tridiagonal (d, e) by Sturm bisection.
inline double tridiagonal_eigenvalue(const std::vector<double>& d, const std::vector<double>& e, int k) {
    double lo = std::numeric_limits<double>::max(), hi = std::numeric_limits<double>::lowest();
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double r = (i > 0 ? std::abs(e[i - 1]) : 0.0) + (i + 1 < d.size() ? std::abs(e[i]) : 0.0);
        lo = std::min(lo, d[i] - r);
        hi = std::max(hi, d[i] + r);
    }
    auto below = [&](double x) {
        int count = 0;
        double q = 1.0;
        for (std::size_t i = 0; i < d.size(); ++i) {
            q = d[i] - x - (i > 0 ? e[i - 1] * e[i - 1] / q : 0.0);
            if (q == 0.0) q = -1e-300;
            if (q < 0) ++count;
        }
        return count;
    };
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (below(mid) > k) hi = mid;
        else lo = mid;
    }
    return 0.5 * (lo + hi);
}

/// Lowest m eigenvalues of c + ½(−iℏ d/dq)² + V(q) on [−L, L] with M interior nodes, Dirichlet.
inline std::vector<double> grid_levels(const std::function<double(double)>& V, double c, double hbar, int m, double L,
                                       int M) {
    const double dx = 2 * L / (M + 1);
    const double t = 0.5 * hbar * hbar / (dx * dx);
    std::vector<double> d(static_cast<std::size_t>(M)), e(static_cast<std::size_t>(M - 1), -t);
    for (int i = 0; i < M; ++i) d[static_cast<std::size_t>(i)] = c + 2 * t + V(-L + (i + 1) * dx);
    std::vector<double> out;
    for (int k = 0; k < m; ++k) out.push_back(tridiagonal_eigenvalue(d, e, k));
    return out;
}

}  // namespace detail

/// Lowest m eigenvalues of the standard quantization of h on the reduced
/// q-representation. Analytic for constant and harmonic models, otherwise a
/// 1D grid solve with Richardson extrapolation over two refinements.
inline OracleSpectrum oracle_h_spectrum(const HamiltonianField& model, double hbar, int m) {
    if (model.n != 1) throw PreconditionError("oracle spectrum is one-dimensional (n = 1)");
    if (!(hbar > 0)) throw InvalidArgument("hbar must be positive");
    if (m < 1) throw InvalidArgument("oracle needs m >= 1");
    OracleSpectrum o;
    if (model.is_constant()) {
        o.values.assign(static_cast<std::size_t>(m), model.offset);
        o.analytic = true;
        return o;
    }
    if (!model.mechanical()) throw PreconditionError("oracle requires a mechanical-form model h = c + p^2/2 + V(q)");
    if (model.harmonic) {
        for (int k = 0; k < m; ++k) o.values.push_back(model.offset + hbar * (k + 0.5));
        o.analytic = true;
        return o;
    }
    const auto V = [&](double q) {
        Vec v(1);
        v << q;
        return model.potential(v);
    };
    // Half-width: the WKB tunnelling exponent beyond the top turning point must exceed 40.
    const double emax_guess = model.offset + hbar * (m + 0.5) * 2.0 + V(0.0);
    auto exponent = [&](double L) {
        double s = 0.0;
        const int K = 400;
        for (int i = 0; i < K; ++i) {
            const double q = (i + 0.5) * L / K;
            s += std::sqrt(std::max(0.0, 2 * (model.offset + V(q) - emax_guess))) * L / K;
        }
        return s / hbar;
    };
    double L = 1.0;
    while (exponent(L) < 40 && L < 1e4) L *= 1.25;
    L = std::max(L, 1.0);
    // Resolve the shortest de Broglie length at the top level with ≥ 40 nodes.
    const double kmax = std::sqrt(2 * std::max(emax_guess - model.offset, hbar)) / hbar;
    int M = std::max(400, static_cast<int>(std::ceil(2 * L * kmax * 40 / (2 * std::numbers::pi))));
    const auto e1 = detail::grid_levels(V, model.offset, hbar, m, L, M);
    const auto e2 = detail::grid_levels(V, model.offset, hbar, m, L, 2 * M + 1);
    const auto e4 = detail::grid_levels(V, model.offset, hbar, m, L, 4 * M + 3);
    // Δ halves exactly with M → 2M + 1; second-order error gives (4E(Δ/2) − E(Δ))/3.
    for (int k = 0; k < m; ++k) {
        const auto kk = static_cast<std::size_t>(k);
        const double r1 = (4 * e2[kk] - e1[kk]) / 3;
        const double r2 = (4 * e4[kk] - e2[kk]) / 3;
        o.values.push_back(r2 + (r2 - r1) / 15);  // next Richardson level, fourth-order error
        o.refinement_change = std::max(o.refinement_change, std::abs(r2 - r1));
    }
    o.half_width = L;
    o.nodes = 4 * M + 3;
    return o;
}

/// E_{k,m} = (k + ½)·E^oracle_m.
inline std::vector<double> effective_prediction(const OracleSpectrum& oracle, int k) {
    if (k < 0) throw InvalidArgument("band index must be >= 0");
    std::vector<double> out;
    for (double e : oracle.values) out.push_back((k + 0.5) * e);
    return out;
}

struct BandComparison {
    std::vector<double> level_rel_error;      // lowest band
    std::vector<double> splitting_rel_error;  // lowest band
    double gap_rel_error = std::numeric_limits<double>::quiet_NaN();
    double max_level_error = 0.0;
    double max_splitting_error = 0.0;
    bool pass = false;
    std::vector<std::string> warnings;
};

struct CompareTolerances {
    double level = 0.05;
    double splitting = 0.25;
    double gap = 0.25;
};

inline double rel_error(double got, double want) {
    return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

/// `prediction[k]` holds the predicted levels of band k.
inline BandComparison compare_bands(const BandReport& report, const std::vector<std::vector<double>>& prediction,
                                    const CompareTolerances& tol = {}) {
    if (report.bands.empty()) throw PreconditionError("band comparison needs at least one band");
    if (prediction.empty()) throw PreconditionError("band comparison needs a prediction");
    BandComparison c;
    const Band& low = report.bands.front();
    const std::vector<double>& pred = prediction.front();
    const std::size_t n = std::min(low.values.size(), pred.size());
    if (n < low.values.size() || n < pred.size())
        c.warnings.push_back("lowest band has " + std::to_string(low.values.size()) + " levels, prediction " +
                             std::to_string(pred.size()) + "; truncated to " + std::to_string(n));
    for (std::size_t i = 0; i < n; ++i) {
        c.level_rel_error.push_back(rel_error(low.values[i], pred[i]));
        c.max_level_error = std::max(c.max_level_error, c.level_rel_error.back());
    }
    for (std::size_t i = 1; i < n; ++i) {
        const double want = pred[i] - pred[i - 1];
        const double got = low.values[i] - low.values[i - 1];
        const double e = want == 0.0 ? std::abs(got) : rel_error(got, want);
        c.splitting_rel_error.push_back(e);
        c.max_splitting_error = std::max(c.max_splitting_error, e);
    }
    bool gap_ok = true;
    if (report.bands.size() >= 2 && prediction.size() >= 2 && !prediction[1].empty()) {
        c.gap_rel_error = rel_error(report.gap, prediction[1].front() - pred.front());
        gap_ok = c.gap_rel_error <= tol.gap;
    } else if (prediction.size() >= 2) {
        c.warnings.push_back("no second band to compare the gap against");
    }
    c.pass = c.max_level_error <= tol.level && c.max_splitting_error <= tol.splitting && gap_ok;
    return c;
}

}  // namespace geoq
