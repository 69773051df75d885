#pragma once

// The extended system on T*M: a particle of mass ℏ on (M, g = h⁻¹δ) in the
// magnetic field ω, its guiding-center decomposition, and the ℏ → 0 study.

#include <algorithm>
#include <cmath>
#include <future>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "geoq/error.hpp"
#include "geoq/fit.hpp"
#include "geoq/integrators.hpp"
#include "geoq/phase_space.hpp"

namespace geoq {

/// h together with its gauge potential and the conformal metric built from h.
struct PhaseModel {
    HamiltonianField h;
    GaugePotential theta;

    int n() const noexcept { return h.n; }
    ConformalMetric metric() const { return ConformalMetric(h); }
};

inline PhaseModel make_model(HamiltonianField h, std::optional<GaugePotential> theta = std::nullopt) {
    const int n = h.n;
    PhaseModel m{std::move(h), theta ? std::move(*theta) : gauges::canonical(n)};
    return m;
}

struct ExtendedState {
    Vec xi;  // position on M
    Vec p;   // canonical momentum conjugate to ξ
    double t = 0.0;

    Vec packed() const {
        Vec y(xi.size() + p.size());
        y << xi, p;
        return y;
    }
    static ExtendedState unpack(const Vec& y, double t) {
        const auto d = y.size() / 2;
        return {y.head(d), y.tail(d), t};
    }
};

struct GuidingDecomposition {
    Vec X;     // guiding center
    Vec Pi;    // kinematical momenta
    double J;  // ½ Σ Π_i Π_i
};

namespace detail {

/// ω̄·v for the block form [[0, I], [−I, 0]].
inline Vec omega_bar_apply(const Vec& v) { return hamiltonian_vector_field(v); }

inline void require_hbar(double hbar) {
    if (!(hbar > 0) || !std::isfinite(hbar)) throw InvalidArgument("hbar must be a positive finite number");
}

}  // namespace detail

/// H = (1/2ℏ) g^{ij}(ξ)(p_i − θ_i)(p_j − θ_j) = h(ξ)·J under the conformal metric.
inline double extended_hamiltonian(const ExtendedState& s, const PhaseModel& model, double hbar) {
    detail::require_hbar(hbar);
    const double ginv = model.metric().inverse_factor(s.xi);
    const Vec u = s.p - model.theta(s.xi);
    return ginv * u.squaredNorm() / (2 * hbar);
}

/// Π = (p − θ)/ℏ^{1/2}, X = ξ − ℏ^{1/2} ω̄Π.
///
/// The sign makes X a constant of motion for constant h and gives
/// {X^i, Π_j} = 0, {X^μ, X^{n+μ}} = +1 under the flow orientation of
/// `poisson_bracket`.
inline GuidingDecomposition to_guiding(const ExtendedState& s, const PhaseModel& model, double hbar) {
    detail::require_hbar(hbar);
    const double rh = std::sqrt(hbar);
    GuidingDecomposition g;
    g.Pi = (s.p - model.theta(s.xi)) / rh;
    g.X = s.xi - rh * detail::omega_bar_apply(g.Pi);
    g.J = 0.5 * g.Pi.squaredNorm();
    return g;
}

/// Inverse of `to_guiding`: ξ = X + ℏ^{1/2} ω̄Π, p = θ(ξ) + ℏ^{1/2} Π.
inline ExtendedState from_guiding(const Vec& X, const Vec& Pi, const PhaseModel& model, double hbar) {
    detail::require_hbar(hbar);
    const double rh = std::sqrt(hbar);
    ExtendedState s;
    s.xi = X + rh * detail::omega_bar_apply(Pi);
    s.p = model.theta(s.xi) + rh * Pi;
    return s;
}

/// Initial kinematical momenta of fast action J0 along (1, 1, …)/norm.
inline Vec normalized_fast_momenta(int n, double J0) {
    if (J0 < 0) throw InvalidArgument("fast action J(0) must be nonnegative");
    return Vec::Constant(2 * n, std::sqrt(2 * J0) / std::sqrt(2.0 * n));
}

/// Canonical vector field of the extended Hamiltonian on the packed state (ξ, p).
inline Vec extended_rhs(const Vec& y, const PhaseModel& model, double hbar) {
    const auto d = y.size() / 2;
    const Vec xi = y.head(d);
    const Vec u = y.tail(d) - model.theta(xi);
    const double h = model.h.checked(xi);
    const Vec gh = model.h.grad(xi);
    const Mat Jt = model.theta.jac(xi);  // ∂_k θ_i
    Vec dy(2 * d);
    dy.head(d) = (h / hbar) * u;
    dy.tail(d) = -(u.squaredNorm() / (2 * hbar)) * gh + (h / hbar) * (Jt * u);
    return dy;
}

struct TrajectoryRecord {
    std::vector<double> t;
    std::vector<ExtendedState> states;
    std::vector<GuidingDecomposition> guiding;
    std::vector<double> energy;
    IntegratorStats stats;
    double hbar = 0.0;
};

/// Cyclotron period 2πℏ/h(ξ).
inline double cyclotron_period(const PhaseModel& model, const Vec& xi, double hbar) {
    return 2 * std::numbers::pi * hbar / model.h.checked(xi);
}

inline TrajectoryRecord integrate_extended(const ExtendedState& s0, double T, const PhaseModel& model, double hbar,
                                           const IntegratorConfig& cfg) {
    detail::require_hbar(hbar);
    if (s0.xi.size() != 2 * model.n() || s0.p.size() != 2 * model.n())
        throw InvalidArgument("extended state dimension does not match the model");
    const double period = cyclotron_period(model, s0.xi, hbar);
    const double auto_step = period / 50;
    const double sample_dt = cfg.sample_interval.value_or(std::min(T / 2000, period / 16));
    auto f = [&](const Vec& y) { return extended_rhs(y, model, hbar); };
    auto energy = [&](const Vec& y) {
        return extended_hamiltonian(ExtendedState::unpack(y, 0.0), model, hbar);
    };
    SampledRun run = integrate(f, energy, s0.packed(), T, auto_step, sample_dt, cfg);

    TrajectoryRecord rec;
    rec.hbar = hbar;
    rec.stats = run.stats;
    rec.t.reserve(run.t.size());
    for (std::size_t k = 0; k < run.t.size(); ++k) {
        ExtendedState s = ExtendedState::unpack(run.y[k], s0.t + run.t[k]);
        rec.t.push_back(s.t);
        rec.guiding.push_back(to_guiding(s, model, hbar));
        rec.energy.push_back(energy(run.y[k]));
        rec.states.push_back(std::move(s));
    }
    return rec;
}

struct ReferenceTrajectory {
    std::vector<double> t;
    std::vector<Vec> xi;
    IntegratorStats stats;
};

/// Hamilton flow ξ̇ = ω̄ ∇h. The automatic step is 2π/100000, which keeps
/// a half-step rerun within 1e-8 for the quartic model.
inline ReferenceTrajectory reference_flow(const Vec& xi0, double T, const HamiltonianField& h,
                                          const IntegratorConfig& cfg) {
    if (xi0.size() != 2 * h.n) throw InvalidArgument("reference initial point dimension does not match the model");
    const double auto_step = 2 * std::numbers::pi / 100000;
    const double sample_dt = cfg.sample_interval.value_or(T / 2000);
    auto f = [&](const Vec& x) { return hamiltonian_vector_field(h.grad(x)); };
    auto energy = [&](const Vec& x) { return h(x); };
    SampledRun run = integrate(f, energy, xi0, T, auto_step, sample_dt, cfg);
    return {std::move(run.t), std::move(run.y), run.stats};
}

// ---------------------------------------------------------------------------
// Resampling and deviations

/// Cubic (4-point Lagrange) interpolation of a sampled vector series at time t.
inline Vec cubic_interpolate(const std::vector<double>& ts, const std::vector<Vec>& ys, double t) {
    const std::size_t m = ts.size();
    if (m == 0) throw PreconditionError("cannot interpolate an empty series");
    if (m == 1) return ys.front();
    auto it = std::upper_bound(ts.begin(), ts.end(), t);
    std::size_t j = it == ts.begin() ? 0 : static_cast<std::size_t>(it - ts.begin()) - 1;
    j = std::min(j, m - 2);
    if (m < 4) {
        const double w = (t - ts[j]) / (ts[j + 1] - ts[j]);
        return (1 - w) * ys[j] + w * ys[j + 1];
    }
    std::size_t lo = j == 0 ? 0 : j - 1;
    lo = std::min(lo, m - 4);
    Vec out = Vec::Zero(ys.front().size());
    for (std::size_t a = lo; a < lo + 4; ++a) {
        double w = 1.0;
        for (std::size_t b = lo; b < lo + 4; ++b)
            if (b != a) w *= (t - ts[b]) / (ts[a] - ts[b]);
        out += w * ys[a];
    }
    return out;
}

struct DeviationMetrics {
    double sup_xi_ref = 0.0;   // sup |ξ − ξ_ref|
    double sup_X_ref = 0.0;    // sup |X − ξ_ref|
    double sup_xi_X = 0.0;     // sup |ξ − X|
    double J_rel_drift = 0.0;  // sup |J − J(0)| / J(0)
    std::size_t samples = 0;
};

/// Sup-norm deviations over the common window, evaluated on the coarser of the
/// two sample grids with cubic interpolation of the finer one.
inline DeviationMetrics deviation_metrics(const TrajectoryRecord& traj, const ReferenceTrajectory& ref) {
    if (traj.t.empty() || ref.t.empty()) throw PreconditionError("empty trajectory");
    const double t0 = std::max(traj.t.front(), ref.t.front());
    const double t1 = std::min(traj.t.back(), ref.t.back());
    if (t1 < t0) throw PreconditionError("trajectories have no overlapping time window");

    std::vector<Vec> xi_series, X_series;
    xi_series.reserve(traj.t.size());
    X_series.reserve(traj.t.size());
    for (std::size_t k = 0; k < traj.t.size(); ++k) {
        xi_series.push_back(traj.states[k].xi);
        X_series.push_back(traj.guiding[k].X);
    }

    DeviationMetrics d;
    const double J0 = traj.guiding.front().J;
    const bool same_grid = traj.t == ref.t;
    const bool traj_coarser = traj.t.size() <= ref.t.size();
    auto in_window = [&](double t) { return t >= t0 - 1e-12 && t <= t1 + 1e-12; };

    auto accumulate = [&](const Vec& xi, const Vec& X, const Vec& xr) {
        d.sup_xi_ref = std::max(d.sup_xi_ref, (xi - xr).norm());
        d.sup_X_ref = std::max(d.sup_X_ref, (X - xr).norm());
        ++d.samples;
    };
    if (same_grid) {
        for (std::size_t k = 0; k < traj.t.size(); ++k) accumulate(xi_series[k], X_series[k], ref.xi[k]);
    } else if (traj_coarser) {
        for (std::size_t k = 0; k < traj.t.size(); ++k)
            if (in_window(traj.t[k])) accumulate(xi_series[k], X_series[k], cubic_interpolate(ref.t, ref.xi, traj.t[k]));
    } else {
        for (std::size_t k = 0; k < ref.t.size(); ++k)
            if (in_window(ref.t[k]))
                accumulate(cubic_interpolate(traj.t, xi_series, ref.t[k]), cubic_interpolate(traj.t, X_series, ref.t[k]),
                           ref.xi[k]);
    }
    if (d.samples == 0) throw PreconditionError("trajectories have no overlapping samples");
    // Intrinsic quantities of the extended run need no resampling.
    for (std::size_t k = 0; k < traj.t.size(); ++k) {
        if (!in_window(traj.t[k])) continue;
        d.sup_xi_X = std::max(d.sup_xi_X, (xi_series[k] - X_series[k]).norm());
        if (J0 > 0) d.J_rel_drift = std::max(d.J_rel_drift, std::abs(traj.guiding[k].J - J0) / J0);
    }
    return d;
}

/// sup_t |X(t) − X(0)|.
inline double guiding_center_drift(const TrajectoryRecord& traj) {
    double s = 0.0;
    for (const auto& g : traj.guiding) s = std::max(s, (g.X - traj.guiding.front().X).norm());
    return s;
}

// ---------------------------------------------------------------------------
// Scaling study

/// A classical scan: guiding center starts at ξ0 with fast action J0.
struct ClassicalScenario {
    PhaseModel model;
    Vec xi0;
    double J0 = 1.0;
    double T = 5.0;
    IntegratorConfig cfg;
    IntegratorConfig ref_cfg;
};

struct ScalingPoint {
    double hbar = 0.0;
    bool ok = false;
    std::string error;
    DeviationMetrics metrics;
    double X_drift = 0.0;  // sup |X − X(0)|
    IntegratorStats stats;
};

struct ScalingReport {
    std::vector<double> hbars;
    std::vector<ScalingPoint> points;
    PowerLawFit X_ref_fit;   // sup |X − ξ_ref| vs ℏ
    PowerLawFit xi_X_fit;    // sup |ξ − X| vs ℏ
    PowerLawFit J_drift_fit; // J drift vs ℏ
    bool tracking_better = false;  // sup|X − ξ_ref| < sup|ξ − ξ_ref| at every ℏ
};

struct ScalingRun {
    ScalingPoint point;
    TrajectoryRecord trajectory;
};

inline ExtendedState initial_state(const ClassicalScenario& sc, double hbar) {
    return from_guiding(sc.xi0, normalized_fast_momenta(sc.model.n(), sc.J0), sc.model, hbar);
}

/// One ℏ point of a scan. Failures are recorded, never thrown.
inline ScalingRun run_scaling_point(const ClassicalScenario& sc, double hbar, const ReferenceTrajectory& ref) {
    ScalingRun r;
    r.point.hbar = hbar;
    try {
        r.trajectory = integrate_extended(initial_state(sc, hbar), sc.T, sc.model, hbar, sc.cfg);
        r.point.metrics = deviation_metrics(r.trajectory, ref);
        r.point.X_drift = guiding_center_drift(r.trajectory);
        r.point.stats = r.trajectory.stats;
        r.point.ok = true;
    } catch (const Error& e) {
        r.point.error = e.what();
    }
    return r;
}

/// Runs independent ℏ points on up to `jobs` threads; results keep ℏ order.
inline std::vector<ScalingRun> run_scaling_points(const ClassicalScenario& sc, const std::vector<double>& hbars,
                                                  const ReferenceTrajectory& ref, unsigned jobs = 1) {
    std::vector<ScalingRun> runs(hbars.size());
    jobs = std::max(1u, jobs);
    for (std::size_t start = 0; start < hbars.size(); start += jobs) {
        std::vector<std::future<ScalingRun>> batch;
        const std::size_t end = std::min(hbars.size(), start + jobs);
        for (std::size_t k = start; k < end; ++k)
            batch.push_back(std::async(jobs > 1 ? std::launch::async : std::launch::deferred,
                                       [&, k] { return run_scaling_point(sc, hbars[k], ref); }));
        for (std::size_t k = start; k < end; ++k) runs[k] = batch[k - start].get();
    }
    return runs;
}

/// J drifts below this are fixed-point noise of the midpoint iteration, not
/// dynamics; a scan sitting entirely below it has no exponent to fit.
inline constexpr double kJDriftFloor = 1e-9;

inline ScalingReport summarize_scaling(const std::vector<ScalingPoint>& points) {
    ScalingReport rep;
    std::vector<double> hb, xr, xx, jd;
    rep.tracking_better = !points.empty();
    for (const auto& p : points) {
        rep.hbars.push_back(p.hbar);
        rep.points.push_back(p);
        if (!p.ok) {
            rep.tracking_better = false;
            continue;
        }
        hb.push_back(p.hbar);
        xr.push_back(p.metrics.sup_X_ref);
        xx.push_back(p.metrics.sup_xi_X);
        jd.push_back(p.metrics.J_rel_drift);
        if (!(p.metrics.sup_X_ref < p.metrics.sup_xi_ref)) rep.tracking_better = false;
    }
    rep.X_ref_fit = fit_power_law(hb, xr);
    rep.xi_X_fit = fit_power_law(hb, xx);
    rep.J_drift_fit = fit_power_law(hb, jd, kJDriftFloor);
    return rep;
}

/// log–log exponents of the reduction deviations against ℏ.
inline ScalingReport scaling_study(const ClassicalScenario& sc, const std::vector<double>& hbars, unsigned jobs = 1) {
    if (hbars.size() < 3) throw PreconditionError("scaling study needs at least 3 hbar values");
    const auto [lo, hi] = std::minmax_element(hbars.begin(), hbars.end());
    if (!(*lo > 0)) throw InvalidArgument("hbar values must be positive");
    if (*hi < 10 * *lo * (1 - 1e-12)) throw PreconditionError("hbar values must span at least one decade");
    const ReferenceTrajectory ref = reference_flow(sc.xi0, sc.T, sc.model.h, sc.ref_cfg);
    std::vector<ScalingPoint> pts;
    for (auto& r : run_scaling_points(sc, hbars, ref, jobs)) pts.push_back(std::move(r.point));
    return summarize_scaling(pts);
}

}  // namespace geoq
