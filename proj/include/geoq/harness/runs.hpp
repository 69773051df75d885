#pragma once

// Run orchestration for the CLI subcommands. Every numeric output file starts
// with the config hash; timestamps live only in manifest.json so reruns with
// the same config produce byte-identical CSV/JSON data.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <future>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "geoq/error.hpp"
#include "geoq/extended_dynamics.hpp"
#include "geoq/harness/config.hpp"
#include "geoq/harness/io.hpp"
#include "geoq/magnetic_operator.hpp"
#include "geoq/phase_space.hpp"
#include "geoq/prequantum.hpp"
#include "geoq/quantum_reduction.hpp"

namespace geoq::harness {

namespace fs = std::filesystem;

enum ExitCode : int {
    kExitOk = 0,
    kExitChecksFailed = 1,
    kExitConfig = 2,
    kExitIntegration = 3,
    kExitEigensolver = 4,
};

struct CheckOutcome {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct RunManifest {
    std::string command;
    std::string scenario;
    std::string config_hash;
    std::string artifact_version = kArtifactVersion;
    std::string started;
    std::string finished;
    fs::path out_dir;
    std::vector<std::string> files;  // relative to out_dir
    std::vector<CheckOutcome> checks;
    ojson points = ojson::array();   // per-point status
    int exit_code = kExitOk;

    bool passed() const {
        return exit_code == kExitOk;
    }

    ojson to_json() const {
        ojson j;
        j["config_hash"] = config_hash;
        j["artifact_version"] = artifact_version;
        j["command"] = command;
        j["scenario"] = scenario;
        j["started"] = started;
        j["finished"] = finished;
        j["out_dir"] = out_dir.string();
        j["files"] = files;
        ojson cs = ojson::array();
        for (const auto& c : checks) cs.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
        j["checks"] = cs;
        j["points"] = points;
        j["exit_code"] = exit_code;
        j["status"] = passed() ? "pass" : "fail";
        return j;
    }
};

struct RunOptions {
    fs::path out;  // empty: $GEOQ_OUT/<scenario> or ./geoq-out/<scenario>
    unsigned jobs = 0;  // 0: available parallelism
    bool quiet = false;

    unsigned workers() const { return jobs ? jobs : std::max(1u, std::thread::hardware_concurrency()); }
};

inline fs::path resolve_out_dir(const ScenarioConfig& c, const RunOptions& o) {
    if (!o.out.empty()) return o.out;
    if (c.output) return *c.output;
    const char* env = std::getenv("GEOQ_OUT");
    const fs::path base = env && *env ? fs::path(env) : fs::path("geoq-out");
    return base / c.scenario;
}

namespace detail {

inline void log(const RunOptions& o, const std::string& msg) {
    if (!o.quiet) std::cerr << msg << '\n';
}

/// f(i) for i in [0, n) on up to `jobs` threads; results keep index order.
template <class F>
auto parallel_map(std::size_t n, unsigned jobs, F&& f) {
    using R = decltype(f(std::size_t{0}));
    std::vector<R> out(n);
    jobs = std::max(1u, jobs);
    for (std::size_t start = 0; start < n; start += jobs) {
        std::vector<std::future<R>> batch;
        const std::size_t end = std::min(n, start + jobs);
        for (std::size_t k = start; k < end; ++k)
            batch.push_back(std::async(jobs > 1 ? std::launch::async : std::launch::deferred, [&f, k] { return f(k); }));
        for (std::size_t k = start; k < end; ++k) out[k] = batch[k - start].get();
    }
    return out;
}

inline RunManifest begin(const std::string& command, const ScenarioConfig& c, const RunOptions& o) {
    RunManifest m;
    m.command = command;
    m.scenario = c.scenario;
    m.config_hash = config_hash(c);
    m.started = utc_now();
    m.out_dir = resolve_out_dir(c, o);
    std::error_code ec;
    fs::create_directories(m.out_dir, ec);
    if (ec) throw Error("cannot create output directory " + m.out_dir.string() + ": " + ec.message());
    return m;
}

inline void finish(RunManifest& m, const ScenarioConfig& c) {
    if (m.exit_code == kExitOk)
        for (const auto& ch : m.checks)
            if (!ch.pass) m.exit_code = kExitChecksFailed;
    m.finished = utc_now();
    ojson cfg = ojson::parse(canonical_json(c).dump());
    write_json(m.out_dir / "config.json", ojson{{"config_hash", m.config_hash}, {"config", cfg}});
    m.files.push_back("config.json");
    write_json(m.out_dir / "manifest.json", m.to_json());
}

inline void add(RunManifest& m, std::string name, bool pass, std::string detail) {
    m.checks.push_back({std::move(name), pass, std::move(detail)});
}

inline std::string g(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", x);
    return buf;
}

inline ojson fit_json(const PowerLawFit& f) {
    return {{"exponent", f.degenerate ? ojson(nullptr) : num(f.exponent)},
            {"log_prefactor", f.degenerate ? ojson(nullptr) : num(f.log_prefactor)},
            {"rms_residual", f.degenerate ? ojson(nullptr) : num(f.rms_residual)},
            {"max_residual", f.degenerate ? ojson(nullptr) : num(f.max_residual)},
            {"points", f.points},
            {"degenerate", f.degenerate},
            {"reason", f.reason}};
}

inline Vec to_vec(const std::vector<double>& v) { return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())); }

inline std::vector<std::string> coord_names(const std::string& prefix, int n) {
    std::vector<std::string> out;
    for (int mu = 1; mu <= n; ++mu) out.push_back(prefix + "_q" + std::to_string(mu));
    for (int mu = 1; mu <= n; ++mu) out.push_back(prefix + "_p" + std::to_string(mu));
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// classical-scan

struct ClassicalPoint {
    ScalingRun run;
    double T = 0.0;
};

inline RunManifest run_classical_scan(const ScenarioConfig& c, const RunOptions& o = {}) {
    if (c.hbar.size() < 3) throw ConfigError("classical-scan needs at least 3 hbar values, got " + std::to_string(c.hbar.size()));
    RunManifest m = detail::begin("classical-scan", c, o);
    const auto& k = c.classical;

    ClassicalScenario sc;
    sc.model = make_model(c.hamiltonian(), gauges::by_id(k.gauge, c.n));
    sc.xi0 = detail::to_vec(k.xi0);
    sc.J0 = k.J0;
    sc.T = k.T;
    sc.cfg = k.integrator;
    sc.ref_cfg = k.reference;

    auto horizon = [&](double hbar) {
        return k.cyclotron_periods ? *k.cyclotron_periods * cyclotron_period(sc.model, sc.xi0, hbar) : k.T;
    };
    // One reference flow serves every point unless the horizon depends on ℏ.
    std::optional<ReferenceTrajectory> shared_ref;
    std::string ref_error;
    if (!k.cyclotron_periods) {
        try {
            shared_ref = reference_flow(sc.xi0, k.T, sc.model.h, sc.ref_cfg);
        } catch (const Error& e) {
            ref_error = std::string("reference flow: ") + e.what();
        }
    }

    const auto points = detail::parallel_map(c.hbar.size(), o.workers(), [&](std::size_t i) {
        const double hbar = c.hbar[i];
        ClassicalPoint p;
        p.T = horizon(hbar);
        p.run.point.hbar = hbar;
        ClassicalScenario local = sc;
        local.T = p.T;
        try {
            if (shared_ref) {
                p.run = run_scaling_point(local, hbar, *shared_ref);
            } else if (!ref_error.empty()) {
                p.run.point.error = ref_error;
            } else {
                p.run = run_scaling_point(local, hbar, reference_flow(sc.xi0, p.T, sc.model.h, sc.ref_cfg));
            }
        } catch (const Error& e) {
            p.run.point.ok = false;
            p.run.point.error = e.what();
        }
        return p;
    });

    const int n = c.n;
    std::vector<ScalingPoint> pts;
    bool any_failed = false;
    for (const auto& p : points) {
        const auto& pt = p.run.point;
        pts.push_back(pt);
        m.points.push_back({{"hbar", pt.hbar}, {"status", pt.ok ? "ok" : "failed"}, {"error", pt.error}});
        if (!pt.ok) {
            any_failed = true;
            detail::log(o, "hbar=" + hbar_tag(pt.hbar) + ": integration failed: " + pt.error);
            continue;
        }
        detail::log(o, "hbar=" + hbar_tag(pt.hbar) + ": sup|xi-X|=" + detail::g(pt.metrics.sup_xi_X) +
                           " sup|X-ref|=" + detail::g(pt.metrics.sup_X_ref) + " X_drift=" + detail::g(pt.X_drift));
        if (!k.write_trajectories) continue;
        const auto& tr = p.run.trajectory;
        std::vector<std::string> header{"t"};
        for (auto& s : detail::coord_names("xi", n)) header.push_back(s);
        for (auto& s : detail::coord_names("X", n)) header.push_back(s);
        header.insert(header.end(), {"J", "H", "energy_drift"});
        const std::string name = "trajectory_hbar" + hbar_tag(pt.hbar) + ".csv";
        CsvWriter w(m.out_dir / name, m.config_hash, header);
        const double H0 = tr.energy.front();
        const double scale = std::abs(H0) > 0 ? std::abs(H0) : 1.0;
        for (std::size_t s = 0; s < tr.t.size(); ++s) {
            std::vector<double> row{tr.t[s]};
            for (int i = 0; i < 2 * n; ++i) row.push_back(tr.states[s].xi[i]);
            for (int i = 0; i < 2 * n; ++i) row.push_back(tr.guiding[s].X[i]);
            row.push_back(tr.guiding[s].J);
            row.push_back(tr.energy[s]);
            row.push_back((tr.energy[s] - H0) / scale);
            w.row(row);
        }
        m.files.push_back(name);
    }

    {
        CsvWriter w(m.out_dir / "metrics.csv", m.config_hash,
                    {"hbar", "T", "status", "sup_xi_ref", "sup_X_ref", "sup_xi_X", "J_rel_drift", "X_drift", "steps",
                     "step", "refinements", "max_energy_drift"});
        for (std::size_t i = 0; i < points.size(); ++i) {
            const auto& pt = points[i].run.point;
            if (!pt.ok) {
                w.row(std::vector<std::string>{fmt(pt.hbar), fmt(points[i].T), "failed", "", "", "", "", "", "", "", "", ""});
                continue;
            }
            w.row(std::vector<std::string>{fmt(pt.hbar), fmt(points[i].T), "ok", fmt(pt.metrics.sup_xi_ref),
                                           fmt(pt.metrics.sup_X_ref), fmt(pt.metrics.sup_xi_X),
                                           fmt(pt.metrics.J_rel_drift), fmt(pt.X_drift),
                                           std::to_string(pt.stats.steps), fmt(pt.stats.step),
                                           std::to_string(pt.stats.refinements), fmt(pt.stats.max_energy_drift)});
        }
        m.files.push_back("metrics.csv");
    }

    const ScalingReport rep = summarize_scaling(pts);
    const auto& e = k.expect;
    std::size_t ok_points = 0;
    for (const auto& p : pts) ok_points += p.ok;
    detail::add(m, "all hbar points integrated", !any_failed, std::to_string(ok_points) + "/" + std::to_string(pts.size()));
    if (e.X_drift_max) {
        double worst = 0.0;
        for (const auto& p : pts)
            if (p.ok) worst = std::max(worst, p.X_drift);
        detail::add(m, "guiding-center drift <= " + detail::g(*e.X_drift_max), ok_points > 0 && worst <= *e.X_drift_max,
                    "max X_drift " + detail::g(worst));
    }
    auto exponent_check = [&](const std::string& what, const PowerLawFit& f, double lo, double hi) {
        const bool ok = !f.degenerate && f.exponent >= lo && f.exponent <= hi;
        std::string range = hi < 1e300 ? "in [" + detail::g(lo) + ", " + detail::g(hi) + "]" : ">= " + detail::g(lo);
        detail::add(m, what + " exponent " + range, ok,
                    f.degenerate ? "degenerate fit: " + f.reason : "exponent " + detail::g(f.exponent));
    };
    if (e.xi_X_exponent) exponent_check("sup|xi-X|", rep.xi_X_fit, (*e.xi_X_exponent)[0], (*e.xi_X_exponent)[1]);
    if (e.X_ref_exponent_min) exponent_check("sup|X-xi_ref|", rep.X_ref_fit, *e.X_ref_exponent_min, 1e301);
    if (e.J_drift_exponent_min) exponent_check("J drift", rep.J_drift_fit, *e.J_drift_exponent_min, 1e301);
    if (e.tracking)
        detail::add(m, "sup|X-xi_ref| < sup|xi-xi_ref| at every hbar", rep.tracking_better, "");
    if (e.fit_residual_max) {
        double worst = 0.0;
        bool present = true;
        for (const PowerLawFit* f : {&rep.xi_X_fit, &rep.X_ref_fit, &rep.J_drift_fit}) {
            if (f->degenerate) present = false;
            else worst = std::max(worst, f->rms_residual);
        }
        detail::add(m, "log-log fit residuals < " + detail::g(*e.fit_residual_max), present && worst < *e.fit_residual_max,
                    present ? "max rms residual " + detail::g(worst) : "a fit is degenerate");
    }

    ojson summary;
    summary["config_hash"] = m.config_hash;
    summary["scenario"] = c.scenario;
    summary["model"] = sc.model.h.id;
    summary["gauge"] = k.gauge;
    summary["hbar"] = rep.hbars;
    ojson ps = ojson::array();
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& pt = points[i].run.point;
        ojson pj{{"hbar", pt.hbar}, {"T", points[i].T}, {"status", pt.ok ? "ok" : "failed"}};
        if (pt.ok) {
            pj["sup_xi_ref"] = num(pt.metrics.sup_xi_ref);
            pj["sup_X_ref"] = num(pt.metrics.sup_X_ref);
            pj["sup_xi_X"] = num(pt.metrics.sup_xi_X);
            pj["J_rel_drift"] = num(pt.metrics.J_rel_drift);
            pj["X_drift"] = num(pt.X_drift);
            pj["samples"] = pt.metrics.samples;
        } else {
            pj["error"] = pt.error;
        }
        ps.push_back(pj);
    }
    summary["points"] = ps;
    summary["fits"] = {{"sup_xi_X", detail::fit_json(rep.xi_X_fit)},
                       {"sup_X_ref", detail::fit_json(rep.X_ref_fit)},
                       {"J_rel_drift", detail::fit_json(rep.J_drift_fit)}};
    summary["tracking_better"] = rep.tracking_better;
    ojson cs = ojson::array();
    for (const auto& ch : m.checks) cs.push_back({{"name", ch.name}, {"pass", ch.pass}, {"detail", ch.detail}});
    summary["checks"] = cs;
    write_json(m.out_dir / "scaling.json", summary);
    m.files.push_back("scaling.json");

    if (any_failed) m.exit_code = kExitIntegration;
    detail::finish(m, c);
    return m;
}

// ---------------------------------------------------------------------------
// quantum-spectrum

struct QuantumPoint {
    double hbar = 0.0;
    bool ok = false;
    std::string error;
    SpectrumResult spectrum;
    std::optional<BandReport> bands;
    std::optional<BandComparison> comparison;
    std::vector<double> predicted;      // lowest band, effective formula
    std::vector<double> predicted_k1;   // band 1
    std::vector<double> levels;         // landau mode
    double mean_splitting = std::numeric_limits<double>::quiet_NaN();
    double symmetry_residual = 0.0;
};

inline QuantumPoint quantum_point(const ScenarioConfig& c, double hbar) {
    const auto& q = c.quantum;
    QuantumPoint p;
    p.hbar = hbar;
    const HamiltonianField h = c.hamiltonian();
    try {
        const MagneticOperator op = build_hamiltonian(q.grid, h, hbar, gauges::by_id(q.gauge, 1));
        p.symmetry_residual = op.symmetry_residual();
        if (q.mode == "landau") {
            p.spectrum = spectrum_below(op, q.emax, c.seed, q.window);
            p.levels = degenerate_levels(p.spectrum.values, q.cluster_tol, 3);
        } else {
            p.spectrum = ladder_to_band(op, 1, c.seed, q.window);
            BandReport rep = band_analysis(p.spectrum, hbar, static_cast<std::size_t>(q.eigenpairs));
            const OracleSpectrum oracle = oracle_h_spectrum(h, hbar, q.eigenpairs);
            p.predicted = effective_prediction(oracle, 0);
            p.predicted_k1 = effective_prediction(oracle, 1);
            BandReport lowest = rep;
            auto& v = lowest.bands.front().values;
            if (v.size() > static_cast<std::size_t>(q.eigenpairs)) v.resize(static_cast<std::size_t>(q.eigenpairs));
            lowest.bands.front() = make_band(lowest.bands.front().k, v);
            p.comparison = compare_bands(lowest, {p.predicted, p.predicted_k1}, q.compare);
            const auto& s = lowest.bands.front().splittings;
            if (!s.empty()) {
                double sum = 0.0;
                for (double x : s) sum += x;
                p.mean_splitting = sum / static_cast<double>(s.size());
            }
            p.bands = std::move(rep);
        }
        p.ok = p.spectrum.converged;
        if (!p.ok) p.error = "eigensolver residuals above tolerance";
    } catch (const EigensolverError& e) {
        p.error = std::string("eigensolver: ") + e.what();
    }
    return p;
}

inline RunManifest run_quantum_spectrum(const ScenarioConfig& c, const RunOptions& o = {}) {
    if (c.n != 1)
        throw ConfigError("quantum-spectrum supports n = 1 only (the 2D phase-space grid); config has n = " +
                          std::to_string(c.n));
    if (c.hbar.empty()) throw ConfigError("quantum-spectrum needs at least one hbar value");
    if (c.quantum.mode == "bands" && c.quantum.eigenpairs * 10L > c.quantum.grid.size())
        throw ConfigError("quantum.eigenpairs must be much smaller than N^2");
    for (double hbar : c.hbar) {
        try {
            c.quantum.grid.validate(hbar);
        } catch (const Error& e) {
            throw ConfigError("quantum.grid at hbar = " + hbar_tag(hbar) + ": " + e.what());
        }
    }

    RunManifest m = detail::begin("quantum-spectrum", c, o);
    const auto& q = c.quantum;
    const auto points = detail::parallel_map(c.hbar.size(), o.workers(), [&](std::size_t i) {
        return quantum_point(c, c.hbar[i]);
    });

    bool any_failed = false;
    ojson summary;
    summary["config_hash"] = m.config_hash;
    summary["scenario"] = c.scenario;
    summary["model"] = c.model.id;
    summary["gauge"] = q.gauge;
    summary["mode"] = q.mode;
    summary["grid"] = {{"R", q.grid.R}, {"N", q.grid.N}};
    ojson ps = ojson::array();

    for (const auto& p : points) {
        const std::string tag = hbar_tag(p.hbar);
        m.points.push_back({{"hbar", p.hbar}, {"status", p.ok ? "ok" : "failed"}, {"error", p.error}});
        if (!p.ok) {
            any_failed = true;
            detail::log(o, "hbar=" + tag + ": " + p.error);
        }
        const auto& s = p.spectrum;
        if (!s.values.empty()) {
            const std::string name = "eigenvalues_hbar" + tag + ".csv";
            CsvWriter w(m.out_dir / name, m.config_hash, {"index", "value", "residual", "J", "label"});
            for (std::size_t i = 0; i < s.values.size(); ++i)
                w.row(std::vector<std::string>{std::to_string(i), fmt(s.values[i]), fmt(s.residuals[i]),
                                               fmt(s.fast_action[i]), std::to_string(s.labels[i])});
            m.files.push_back(name);
        }

        ojson bj;
        bj["config_hash"] = m.config_hash;
        bj["hbar"] = p.hbar;
        bj["status"] = p.ok ? "ok" : "failed";
        bj["eigenvalues"] = s.values.size();
        bj["windows"] = s.windows;
        bj["certified_below"] = num(s.certified_below);
        bj["max_boundary_amplitude"] = num(s.max_boundary_amplitude);
        bj["symmetry_residual"] = num(p.symmetry_residual);
        if (q.mode == "landau") {
            bj["levels"] = p.levels;
            ojson expected = ojson::array();
            for (std::size_t i = 0; i < q.expect.levels.size(); ++i) {
                const double want = q.expect.levels[i];
                const bool have = i < p.levels.size();
                const double err = have ? rel_error(p.levels[i], want) : std::numeric_limits<double>::quiet_NaN();
                expected.push_back({{"expected", want}, {"found", have ? num(p.levels[i]) : ojson(nullptr)}, {"rel_error", num(err)}});
                if (p.ok)
                    detail::add(m, "hbar=" + tag + " level " + detail::g(want) + " within " + detail::g(100 * q.expect.level_rel_tol) + "%",
                                have && err <= q.expect.level_rel_tol,
                                have ? "found " + detail::g(p.levels[i]) : "level not found");
            }
            bj["expected_levels"] = expected;
        } else if (p.bands) {
            const BandReport& r = *p.bands;
            ojson bands = ojson::array();
            for (const auto& b : r.bands)
                bands.push_back({{"k", b.k}, {"count", b.values.size()}, {"bottom", b.bottom()}, {"values", b.values}});
            bj["bands"] = bands;
            bj["gap"] = num(r.gap);
            bj["max_splitting"] = num(r.max_splitting);
            bj["mean_splitting"] = num(p.mean_splitting);
            bj["ratio"] = num(r.ratio);
            bj["ratio_floor"] = num(r.ratio_floor);
            bj["separated"] = r.separated;
            bj["labels_consistent"] = r.labels_consistent;
            bj["flagged"] = r.flagged;
            bj["message"] = r.message;
            const BandComparison& cmp = *p.comparison;
            bj["comparison"] = {{"max_level_error", num(cmp.max_level_error)},
                                {"max_splitting_error", num(cmp.max_splitting_error)},
                                {"gap_rel_error", num(cmp.gap_rel_error)},
                                {"pass", cmp.pass},
                                {"warnings", cmp.warnings}};

            const std::string name = "comparison_hbar" + tag + ".csv";
            CsvWriter w(m.out_dir / name, m.config_hash,
                        {"index", "level", "predicted", "level_rel_error", "splitting", "predicted_splitting",
                         "splitting_rel_error"});
            const auto& low = r.bands.front().values;
            for (std::size_t i = 0; i < cmp.level_rel_error.size(); ++i) {
                std::vector<std::string> row{std::to_string(i), fmt(low[i]), fmt(p.predicted[i]), fmt(cmp.level_rel_error[i])};
                if (i == 0) {
                    row.insert(row.end(), {"", "", ""});
                } else {
                    row.push_back(fmt(low[i] - low[i - 1]));
                    row.push_back(fmt(p.predicted[i] - p.predicted[i - 1]));
                    row.push_back(fmt(cmp.splitting_rel_error[i - 1]));
                }
                w.row(row);
            }
            m.files.push_back(name);

            if (p.ok) {
                const auto& e = q.expect;
                if (e.splitting_rel_tol)
                    detail::add(m, "hbar=" + tag + " splittings within " + detail::g(100 * *e.splitting_rel_tol) + "% of the effective formula",
                                !cmp.splitting_rel_error.empty() && cmp.max_splitting_error <= *e.splitting_rel_tol,
                                "max error " + detail::g(100 * cmp.max_splitting_error) + "%");
                if (e.gap_value) {
                    const double err = std::isfinite(r.gap) ? rel_error(r.gap, *e.gap_value) : INFINITY;
                    detail::add(m, "hbar=" + tag + " gap within " + detail::g(100 * e.gap_rel_tol) + "% of " + detail::g(*e.gap_value),
                                err <= e.gap_rel_tol, "gap " + detail::g(r.gap));
                }
                if (e.ratio_min)
                    detail::add(m, "hbar=" + tag + " gap/splitting >= " + detail::g(*e.ratio_min),
                                std::isfinite(r.ratio) && r.ratio >= *e.ratio_min, "ratio " + detail::g(r.ratio));
                detail::add(m, "hbar=" + tag + " band separation >= 0.35/hbar", r.separated,
                            "ratio " + detail::g(r.ratio) + ", floor " + detail::g(r.ratio_floor));
            }
        }
        const std::string bname = "bands_hbar" + tag + ".json";
        write_json(m.out_dir / bname, bj);
        m.files.push_back(bname);
        ps.push_back(bj);
    }

    // Cross-ℏ relations.
    ojson cross = ojson::array();
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        const auto& a = points[i];
        const auto& b = points[i + 1];
        if (!a.ok || !b.ok) continue;
        const std::string pair = "hbar=" + hbar_tag(a.hbar) + "/" + hbar_tag(b.hbar);
        if (q.mode == "bands") {
            const double ratio = a.mean_splitting / b.mean_splitting;
            const double want = a.hbar / b.hbar;
            cross.push_back({{"pair", pair}, {"splitting_ratio", num(ratio)}, {"hbar_ratio", want}});
            if (q.expect.splitting_ratio_tol)
                detail::add(m, pair + " splitting ratio within " + detail::g(*q.expect.splitting_ratio_tol) + " of " + detail::g(want),
                            std::isfinite(ratio) && std::abs(ratio - want) <= *q.expect.splitting_ratio_tol,
                            "ratio " + detail::g(ratio));
        } else if (!q.expect.levels.empty()) {
            double worst = 0.0;
            const std::size_t nl = std::min({a.levels.size(), b.levels.size(), q.expect.levels.size()});
            for (std::size_t l = 0; l < nl; ++l) worst = std::max(worst, rel_error(a.levels[l], b.levels[l]));
            cross.push_back({{"pair", pair}, {"max_level_change", worst}});
            detail::add(m, pair + " levels hbar-independent within " + detail::g(100 * q.expect.level_rel_tol) + "%",
                        nl == q.expect.levels.size() && worst <= q.expect.level_rel_tol, "max change " + detail::g(100 * worst) + "%");
        }
    }
    summary["points"] = ps;
    summary["cross_hbar"] = cross;
    ojson cs = ojson::array();
    for (const auto& ch : m.checks) cs.push_back({{"name", ch.name}, {"pass", ch.pass}, {"detail", ch.detail}});
    summary["checks"] = cs;
    write_json(m.out_dir / "quantum_summary.json", summary);
    m.files.push_back("quantum_summary.json");

    if (any_failed) m.exit_code = kExitEigensolver;
    detail::finish(m, c);
    return m;
}

// ---------------------------------------------------------------------------
// checks

/// sup-norm distance of the ξ-trajectories under θ and θ + ∂χ with χ = qp.
inline double classical_gauge_difference(const ScenarioConfig& c) {
    const auto& x = c.checks;
    const HamiltonianField h = c.hamiltonian();
    const GaugePotential theta = gauges::canonical(c.n);
    const GaugePotential shifted = gauge_transform(theta, qp_gauge_function(c.n));
    const Vec X0 = detail::to_vec(c.classical.xi0);
    const Vec Pi0 = normalized_fast_momenta(c.n, c.classical.J0);
    auto run = [&](const GaugePotential& g) {
        const PhaseModel model = make_model(h, g);
        return integrate_extended(from_guiding(X0, Pi0, model, x.classical_gauge_hbar), x.classical_gauge_T, model,
                                  x.classical_gauge_hbar, c.classical.integrator);
    };
    const TrajectoryRecord a = run(theta);
    const TrajectoryRecord b = run(shifted);
    if (a.t.size() != b.t.size()) throw Error("gauge-transformed run has a different sample grid");
    double d = 0.0;
    for (std::size_t k = 0; k < a.t.size(); ++k) d = std::max(d, (a.states[k].xi - b.states[k].xi).norm());
    return d;
}

/// Largest eigenvalue difference of the lowest pairs in the Landau and symmetric gauges.
inline double quantum_gauge_difference(const ScenarioConfig& c) {
    const auto& x = c.checks;
    const HamiltonianField h = c.hamiltonian();
    const auto a = lowest_spectrum(build_hamiltonian(x.quantum_gauge_grid, h, x.quantum_gauge_hbar, gauges::canonical(1)),
                                   x.quantum_gauge_eigenpairs, c.seed);
    const auto b = lowest_spectrum(build_hamiltonian(x.quantum_gauge_grid, h, x.quantum_gauge_hbar, gauges::symmetric(1)),
                                   x.quantum_gauge_eigenpairs, c.seed);
    if (!a.converged || !b.converged) throw EigensolverError("gauge comparison spectra did not converge");
    double d = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) d = std::max(d, std::abs(a.values[i] - b.values[i]));
    return d;
}

inline RunManifest run_checks(const ScenarioConfig& c, const RunOptions& o = {}) {
    const auto& x = c.checks;
    if (x.gauge_invariance) {
        if (c.n != 1) throw ConfigError("checks.gauge_invariance compares quantum spectra, which need n = 1; set it to false for n = " + std::to_string(c.n));
        try {
            x.quantum_gauge_grid.validate(x.quantum_gauge_hbar);
        } catch (const Error& e) {
            throw ConfigError(std::string("checks.quantum_gauge_grid: ") + e.what());
        }
    }
    RunManifest m = detail::begin("checks", c, o);
    ojson report;
    report["config_hash"] = m.config_hash;
    report["scenario"] = c.scenario;
    ojson items = ojson::array();
    auto record = [&](const std::string& name, bool pass, const std::string& detail_text, ojson data) {
        detail::add(m, name, pass, detail_text);
        data["name"] = name;
        data["pass"] = pass;
        items.push_back(std::move(data));
    };

    // Curl of the gauge potential.
    const auto pts = random_points(c.n, static_cast<std::size_t>(x.gauge_points), c.seed);
    std::vector<std::pair<std::string, GaugePotential>> gs{{"canonical", gauges::canonical(c.n)},
                                                            {"symmetric", gauges::symmetric(c.n)}};
    if (x.broken_gauge) gs.push_back({"broken theta=(0,-2q)", gauges::scaled(gauges::canonical(c.n), 2.0)});
    for (const auto& [name, g] : gs) {
        const GaugeCheckResult r = gauge_check(g, pts, x.gauge_tol);
        record("gauge_check " + name, r.passed, "residual " + detail::g(r.max_residual),
               {{"residual", r.max_residual}, {"tolerance", r.tolerance}});
    }

    // CCR convergence under simultaneous refinement.
    {
        std::vector<double> res;
        for (int N : x.ccr_grids) res.push_back(ccr_residual(gaussian_section(probe_grid(N), kProbeGaussian), x.ccr_hbar));
        std::vector<double> ratios;
        bool ok = true;
        for (std::size_t i = 0; i + 1 < res.size(); ++i) {
            const double f = static_cast<double>(x.ccr_grids[i + 1]) / x.ccr_grids[i];
            const double want = std::pow(x.ccr_ratio, std::log2(f));  // the target is per doubling
            ratios.push_back(res[i] / res[i + 1]);
            ok = ok && std::abs(ratios.back() / want - 1) <= x.ccr_ratio_tol;
        }
        std::string d = "ratios";
        for (double r : ratios) d += " " + detail::g(r);
        record("CCR residual 4th-order convergence", ok, d, {{"grids", x.ccr_grids}, {"residuals", res}, {"ratios", ratios}});
    }

    // Vertical polarization.
    {
        const double r = polarization_residual(polarized_section(probe_grid(64), 0.3, 1.0));
        record("polarization residual of f(q) is 0", r == 0.0, "residual " + detail::g(r), {{"residual", r}});
    }

    // Jacobi identity.
    {
        std::mt19937_64 rng(c.seed);
        const auto xs = random_points(c.n, static_cast<std::size_t>(x.jacobi_points), c.seed + 1, 1.0);
        double worst = 0.0;
        for (const auto& p : xs) {
            const ScalarField f = random_cubic(c.n, rng), g = random_cubic(c.n, rng), k = random_cubic(c.n, rng);
            worst = std::max(worst, jacobi_residual(f, g, k, p));
        }
        record("Jacobi identity residual <= " + detail::g(x.jacobi_tol), worst <= x.jacobi_tol, "residual " + detail::g(worst),
               {{"residual", worst}, {"tolerance", x.jacobi_tol}});
    }

    // Flux integrality.
    {
        const FluxResult t = kostant_flux(surfaces::flat_torus(std::sqrt(x.torus_area), c.n));
        const double want = x.torus_area / (2 * std::numbers::pi);
        const bool ok = t.integrality_residual <= x.flux_tol && std::abs(t.flux_over_2pi - want) <= x.flux_tol;
        record("torus flux integral", ok,
               "flux/2pi " + fmt(t.flux_over_2pi) + ", integrality residual " + detail::g(t.integrality_residual),
               {{"area", x.torus_area}, {"flux_over_2pi", t.flux_over_2pi}, {"nearest_integer", t.nearest_integer},
                {"integrality_residual", t.integrality_residual}});
        const FluxResult s = kostant_flux(surfaces::sphere(2, {0, 2, 1}));
        record("sphere flux vanishes", s.nearest_integer == 0 && s.integrality_residual <= x.flux_tol,
               "flux/2pi " + detail::g(s.flux_over_2pi), {{"flux_over_2pi", s.flux_over_2pi}});
    }

    // Gauge invariance of the dynamics and of the spectrum.
    int exit_override = kExitOk;
    if (x.gauge_invariance) {
        try {
            const double d = classical_gauge_difference(c);
            record("classical trajectories gauge invariant (chi=qp)", d <= x.classical_gauge_tol, "sup|dxi| " + detail::g(d),
                   {{"sup_difference", d}, {"tolerance", x.classical_gauge_tol}});
        } catch (const IntegrationError& e) {
            record("classical trajectories gauge invariant (chi=qp)", false, e.what(), ojson::object());
            exit_override = kExitIntegration;
        }
        try {
            const double d = quantum_gauge_difference(c);
            record("quantum spectra Landau vs symmetric gauge", d <= x.quantum_gauge_tol, "max |dE| " + detail::g(d),
                   {{"max_difference", d}, {"tolerance", x.quantum_gauge_tol}});
        } catch (const EigensolverError& e) {
            record("quantum spectra Landau vs symmetric gauge", false, e.what(), ojson::object());
            if (exit_override == kExitOk) exit_override = kExitEigensolver;
        }
    }

    report["checks"] = items;
    bool all = true;
    for (const auto& ch : m.checks) all = all && ch.pass;
    report["status"] = all ? "pass" : "fail";
    write_json(m.out_dir / "checks.json", report);
    m.files.push_back("checks.json");
    m.exit_code = exit_override;
    detail::finish(m, c);
    return m;
}

// ---------------------------------------------------------------------------
// report

struct ReportSummary {
    std::vector<ojson> manifests;
    std::string text;
    int exit_code = kExitOk;
};

/// Collects manifest.json files under `dir` (one level of scenario subdirectories).
inline ReportSummary build_report(const fs::path& dir) {
    ReportSummary out;
    std::vector<fs::path> found;
    if (fs::exists(dir / "manifest.json")) found.push_back(dir / "manifest.json");
    if (fs::is_directory(dir))
        for (const auto& e : fs::directory_iterator(dir))
            if (e.is_directory() && fs::exists(e.path() / "manifest.json")) found.push_back(e.path() / "manifest.json");
    std::sort(found.begin(), found.end());
    if (found.empty()) {
        out.exit_code = kExitConfig;
        out.text = "no manifest.json found under " + dir.string() + "\n";
        return out;
    }
    std::string t;
    for (const auto& f : found) {
        std::ifstream in(f);
        ojson j = ojson::parse(in);
        const bool pass = j.value("status", "fail") == "pass";
        if (!pass) out.exit_code = kExitChecksFailed;
        t += (pass ? "PASS " : "FAIL ") + j.value("command", "") + " " + j.value("scenario", "") + " (" +
             j.value("config_hash", "") + ", exit " + std::to_string(j.value("exit_code", -1)) + ")\n";
        for (const auto& ch : j["checks"])
            t += std::string("  ") + (ch.value("pass", false) ? "ok   " : "FAIL ") + ch.value("name", "") +
                 (ch.value("detail", "").empty() ? "" : ": " + ch.value("detail", "")) + "\n";
        out.manifests.push_back(std::move(j));
    }
    out.text = t;
    return out;
}

}  // namespace geoq::harness
