#pragma once

// One-step integrators for autonomous systems ẏ = f(y) with uniform sampling.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "geoq/error.hpp"
#include "geoq/phase_space.hpp"

namespace geoq {

enum class Scheme {
    ImplicitMidpoint,
    DormandPrince,  // explicit 5(4) pair with step control
};

inline const char* to_string(Scheme s) {
    return s == Scheme::ImplicitMidpoint ? "implicit-midpoint" : "dormand-prince";
}

inline Scheme scheme_from_string(const std::string& s) {
    if (s == "implicit-midpoint") return Scheme::ImplicitMidpoint;
    if (s == "dormand-prince" || s == "explicit-adaptive") return Scheme::DormandPrince;
    throw InvalidArgument("unknown integrator scheme '" + s + "'");
}

struct IntegratorConfig {
    Scheme scheme = Scheme::ImplicitMidpoint;
    std::optional<double> step;        // nullopt: automatic
    double fixed_point_tol = 1e-12;    // relative, max-norm
    int fixed_point_max_iter = 100;
    long max_steps = 200'000'000;
    double energy_tol = 1e-6;          // relative drift contract
    int max_refinements = 10;          // step reductions when the contract fails
    double rtol = 1e-11;               // Dormand–Prince only
    double atol = 1e-13;
    std::optional<double> sample_interval;  // nullopt: automatic

    void validate() const {
        if (step && !(*step > 0)) throw InvalidArgument("integrator step must be positive");
        if (!(fixed_point_tol > 0)) throw InvalidArgument("fixed-point tolerance must be positive");
        if (max_steps < 1) throw InvalidArgument("max_steps must be >= 1");
        if (!(energy_tol > 0)) throw InvalidArgument("energy tolerance must be positive");
        if (sample_interval && !(*sample_interval > 0)) throw InvalidArgument("sample interval must be positive");
        if (!(rtol > 0) || !(atol > 0)) throw InvalidArgument("tolerances must be positive");
    }
};

struct IntegratorStats {
    long steps = 0;
    long rejected_steps = 0;
    long fixed_point_iterations = 0;
    double max_energy_drift = 0.0;
    double step = 0.0;  // final fixed step (midpoint) or initial step (Dormand–Prince)
    int refinements = 0;
};

struct SampledRun {
    std::vector<double> t;
    std::vector<Vec> y;
    IntegratorStats stats;
};

using Rhs = std::function<Vec(const Vec&)>;
using Energy = std::function<double(const Vec&)>;

namespace detail {

inline double rel_drift(double e, double e0) { return std::abs(e - e0) / std::max(1.0, std::abs(e0)); }

/// Fixed-step implicit midpoint, y₁ = y₀ + dt·f((y₀ + y₁)/2).
inline SampledRun run_midpoint(const Rhs& f, const Energy& energy, const Vec& y0, double T, double dt,
                               double sample_dt, const IntegratorConfig& cfg) {
    long steps = static_cast<long>(std::ceil(T / dt - 1e-9));
    steps = std::max(1L, steps);
    if (steps > cfg.max_steps)
        throw IntegrationError(IntegrationFailure::MaxStepsExceeded,
                               std::to_string(steps) + " steps requested, limit " + std::to_string(cfg.max_steps));
    long stride = std::max(1L, static_cast<long>(std::floor(sample_dt / (T / steps) + 1e-9)));
    // Round the step count up to a multiple of the stride so samples are uniform and T is hit.
    steps = ((steps + stride - 1) / stride) * stride;
    const double h = T / steps;
    if (!(h > 1e-15 * std::max(1.0, T)))
        throw IntegrationError(IntegrationFailure::StepUnderflow, "step " + std::to_string(h));

    SampledRun run;
    run.stats.step = h;
    const double e0 = energy(y0);
    Vec y = y0;
    run.t.push_back(0.0);
    run.y.push_back(y);
    Vec mid(y0.size());
    for (long k = 0; k < steps; ++k) {
        // Solve mid = y + (h/2) f(mid), starting from an explicit Euler predictor.
        mid = y + 0.5 * h * f(y);
        int it = 0;
        for (;; ++it) {
            if (it >= cfg.fixed_point_max_iter)
                throw IntegrationError(IntegrationFailure::FixedPointNonConvergence,
                                       "no convergence at t = " + std::to_string(k * h));
            const Vec next = y + 0.5 * h * f(mid);
            const double diff = (next - mid).lpNorm<Eigen::Infinity>();
            mid = next;
            if (diff <= cfg.fixed_point_tol * std::max(1.0, mid.lpNorm<Eigen::Infinity>())) break;
        }
        run.stats.fixed_point_iterations += it + 1;
        y = 2.0 * mid - y;
        if (!y.allFinite())
            throw IntegrationError(IntegrationFailure::StepUnderflow, "non-finite state at t = " + std::to_string((k + 1) * h));
        if ((k + 1) % stride == 0) {
            run.t.push_back((k + 1) * h);
            run.y.push_back(y);
            run.stats.max_energy_drift = std::max(run.stats.max_energy_drift, rel_drift(energy(y), e0));
        }
    }
    run.stats.steps = steps;
    return run;
}

/// Dormand–Prince 5(4) with PI-free classic step control; steps are clipped to hit sample times.
inline SampledRun run_dopri(const Rhs& f, const Energy& energy, const Vec& y0, double T, double dt0,
                            double sample_dt, const IntegratorConfig& cfg, double tol_scale) {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;
    (void)c2; (void)c3; (void)c4; (void)c5;

    const long nsamples = std::max(1L, static_cast<long>(std::llround(T / sample_dt)));
    const double sdt = T / nsamples;
    const double rtol = cfg.rtol * tol_scale, atol = cfg.atol * tol_scale;

    SampledRun run;
    run.stats.step = dt0;
    const double e0 = energy(y0);
    Vec y = y0;
    double t = 0.0;
    double h = dt0;
    run.t.push_back(0.0);
    run.y.push_back(y);
    Vec k1 = f(y);
    for (long s = 1; s <= nsamples; ++s) {
        const double target = s * sdt;
        while (t < target - 1e-14 * std::max(1.0, T)) {
            if (run.stats.steps + run.stats.rejected_steps >= cfg.max_steps)
                throw IntegrationError(IntegrationFailure::MaxStepsExceeded, "at t = " + std::to_string(t));
            const double hs = std::min(h, target - t);
            if (!(hs > 1e-15 * std::max(1.0, T)))
                throw IntegrationError(IntegrationFailure::StepUnderflow, "step " + std::to_string(hs));
            const Vec k2 = f(y + hs * (a21 * k1));
            const Vec k3 = f(y + hs * (a31 * k1 + a32 * k2));
            const Vec k4 = f(y + hs * (a41 * k1 + a42 * k2 + a43 * k3));
            const Vec k5 = f(y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
            const Vec k6 = f(y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
            const Vec y1 = y + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
            const Vec k7 = f(y1);
            const Vec err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
            double en = 0.0;
            for (Eigen::Index i = 0; i < y.size(); ++i) {
                const double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(y1[i]));
                en = std::max(en, std::abs(err[i]) / sc);
            }
            if (en <= 1.0) {
                t += hs;
                y = y1;
                k1 = k7;
                ++run.stats.steps;
            } else {
                ++run.stats.rejected_steps;
            }
            const double fac = en > 0 ? 0.9 * std::pow(en, -0.2) : 5.0;
            const double grown = hs * std::clamp(fac, 0.2, 5.0);
            // Do not let a clipped landing step shrink the proposal.
            h = (en <= 1.0 && hs < h) ? std::max(h, grown) : grown;
        }
        t = target;
        run.t.push_back(target);
        run.y.push_back(y);
        run.stats.max_energy_drift = std::max(run.stats.max_energy_drift, rel_drift(energy(y), e0));
    }
    return run;
}

}  // namespace detail

/// Integrates ẏ = f(y) on [0, T] and enforces the relative energy-drift contract.
/// With an automatic step the step is reduced and the run repeated until the
/// contract holds; a user-fixed step that violates it is rejected.
inline SampledRun integrate(const Rhs& f, const Energy& energy, const Vec& y0, double T, double auto_step,
                            double sample_dt, const IntegratorConfig& cfg) {
    cfg.validate();
    if (!(T > 0)) throw InvalidArgument("integration horizon T must be positive");
    if (!y0.allFinite()) throw InvalidArgument("initial state is not finite");
    const bool fixed = cfg.step.has_value();
    double dt = cfg.step.value_or(auto_step);
    double tol_scale = 1.0;
    sample_dt = std::min(sample_dt, T);
    for (int attempt = 0;; ++attempt) {
        SampledRun run = cfg.scheme == Scheme::ImplicitMidpoint
                             ? detail::run_midpoint(f, energy, y0, T, dt, sample_dt, cfg)
                             : detail::run_dopri(f, energy, y0, T, dt, sample_dt, cfg, tol_scale);
        run.stats.refinements = attempt;
        const double drift = run.stats.max_energy_drift;
        if (drift <= cfg.energy_tol) return run;
        if (fixed && cfg.scheme == Scheme::ImplicitMidpoint)
            throw IntegrationError(IntegrationFailure::EnergyContract,
                                   "drift " + std::to_string(drift) + " with fixed step " + std::to_string(dt));
        if (attempt >= cfg.max_refinements)
            throw IntegrationError(IntegrationFailure::EnergyContract,
                                   "drift " + std::to_string(drift) + " after " + std::to_string(attempt) +
                                       " refinements");
        if (cfg.scheme == Scheme::ImplicitMidpoint) {
            // Midpoint energy error is O(dt²).
            const double factor = std::clamp(0.8 * std::sqrt(cfg.energy_tol / drift), 1.0 / 16, 0.5);
            dt *= factor;
            if (!(dt > 1e-15 * T)) throw IntegrationError(IntegrationFailure::StepUnderflow, "after refinement");
        } else {
            tol_scale *= 0.1;
            if (cfg.rtol * tol_scale < 1e-15)
                throw IntegrationError(IntegrationFailure::StepUnderflow, "tolerance below round-off");
        }
    }
}

}  // namespace geoq
