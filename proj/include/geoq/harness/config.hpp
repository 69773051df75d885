#pragma once

// Scenario configuration: JSON parsing with strict validation, built-in
// scenarios, and the canonical form used for the config hash.

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "geoq/error.hpp"
#include "geoq/harness/io.hpp"
#include "geoq/integrators.hpp"
#include "geoq/magnetic_operator.hpp"
#include "geoq/phase_space.hpp"
#include "geoq/prequantum.hpp"
#include "geoq/quantum_reduction.hpp"

namespace geoq::harness {

/// Schema violations; the CLI maps these to exit code 2.
class ConfigError : public Error {
public:
    using Error::Error;
};

inline constexpr const char* kArtifactVersion = "1.0.0";

struct ModelConfig {
    std::string id = "quartic";
    double c = 1.0;
    double lambda = 0.1;
};

struct ClassicalExpect {
    std::optional<double> X_drift_max;
    std::optional<std::array<double, 2>> xi_X_exponent;
    std::optional<double> X_ref_exponent_min;
    std::optional<double> J_drift_exponent_min;
    bool tracking = false;
    std::optional<double> fit_residual_max;
};

struct ClassicalConfig {
    double T = 5.0;
    std::optional<double> cyclotron_periods;  // overrides T per ℏ when set
    double J0 = 1.0;
    std::vector<double> xi0;                  // empty: model default
    std::string gauge = "canonical";
    IntegratorConfig integrator;
    IntegratorConfig reference;
    bool write_trajectories = true;
    ClassicalExpect expect;
};

struct QuantumExpect {
    std::optional<double> splitting_rel_tol;   // lowest-band splittings vs the effective formula
    std::optional<double> gap_value;
    double gap_rel_tol = 0.25;
    std::optional<double> ratio_min;           // gap / max splitting
    std::optional<double> splitting_ratio_tol; // splitting(ℏ_a)/splitting(ℏ_b) vs ℏ_a/ℏ_b
    std::vector<double> levels;                // flat mode: expected band energies
    double level_rel_tol = 0.01;
};

struct QuantumConfig {
    GridSpec grid{6.0, 256};
    std::string mode = "bands";  // "bands": harmonic-type bands; "landau": degenerate clusters
    std::string gauge = "symmetric";
    int eigenpairs = 10;
    int window = 24;
    double emax = 2.7;         // landau mode: slice the spectrum below this energy
    double cluster_tol = 1e-4; // landau mode: relative spacing inside a degenerate level
    CompareTolerances compare;
    QuantumExpect expect;
};

struct ChecksConfig {
    int gauge_points = 100;
    double gauge_tol = 1e-8;
    bool broken_gauge = false;  // adds θ = (0, −2q), which must fail
    std::vector<int> ccr_grids{64, 128, 256};
    double ccr_hbar = 0.1;
    double ccr_ratio = 16.0;
    double ccr_ratio_tol = 0.3;
    int jacobi_points = 50;
    double jacobi_tol = 1e-7;
    double torus_area = 4 * std::numbers::pi;
    double flux_tol = 1e-8;
    bool gauge_invariance = true;
    double classical_gauge_hbar = 0.05;
    double classical_gauge_T = 5.0;
    double classical_gauge_tol = 1e-8;
    double quantum_gauge_hbar = 0.1;
    GridSpec quantum_gauge_grid{4.0, 127};
    int quantum_gauge_eigenpairs = 10;
    double quantum_gauge_tol = 1e-6;
};

struct ScenarioConfig {
    std::string scenario = "custom";
    int n = 1;
    ModelConfig model;
    std::vector<double> hbar;
    ClassicalConfig classical;
    QuantumConfig quantum;
    ChecksConfig checks;
    std::optional<std::string> output;
    std::uint64_t seed = 1;

    HamiltonianField hamiltonian() const { return models::by_id(model.id, n, model.c, model.lambda); }
};

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail("must be an object");
    }

    void allow(std::initializer_list<const char*> keys) const {
        std::set<std::string> ok(keys.begin(), keys.end());
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!ok.count(it.key())) throw ConfigError(path_ + ": unknown key '" + it.key() + "'");
    }

    bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }
    bool is_string(const char* key) const { return has(key) && j_.at(key).is_string(); }

    double number(const char* key, double def) const { return has(key) ? number(key) : def; }
    double number(const char* key) const {
        const json& v = at(key);
        if (!v.is_number()) fail(key, "must be a number");
        const double x = v.get<double>();
        if (!std::isfinite(x)) fail(key, "must be finite");
        return x;
    }
    double positive(const char* key, double def) const {
        const double x = number(key, def);
        if (!(x > 0)) fail(key, "must be positive");
        return x;
    }
    long integer(const char* key, long def) const {
        if (!has(key)) return def;
        const json& v = at(key);
        if (!v.is_number_integer()) fail(key, "must be an integer");
        return v.get<long>();
    }
    bool boolean(const char* key, bool def) const {
        if (!has(key)) return def;
        const json& v = at(key);
        if (!v.is_boolean()) fail(key, "must be true or false");
        return v.get<bool>();
    }
    std::string string(const char* key, const std::string& def) const {
        if (!has(key)) return def;
        const json& v = at(key);
        if (!v.is_string()) fail(key, "must be a string");
        return v.get<std::string>();
    }
    std::vector<double> numbers(const char* key) const {
        const json& v = at(key);
        if (!v.is_array()) fail(key, "must be an array of numbers");
        std::vector<double> out;
        for (const auto& e : v) {
            if (!e.is_number()) fail(key, "must be an array of numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }
    Reader child(const char* key) const { return Reader(at(key), path_ + "." + key); }

    [[noreturn]] void fail(const std::string& msg) const { throw ConfigError(path_ + ": " + msg); }
    [[noreturn]] void fail(const char* key, const std::string& msg) const {
        throw ConfigError(path_ + "." + key + ": " + msg);
    }

private:
    const json& at(const char* key) const {
        if (!j_.contains(key)) fail(key, "is required");
        return j_.at(key);
    }
    const json& j_;
    std::string path_;
};

inline IntegratorConfig parse_integrator(const Reader& r, IntegratorConfig cfg) {
    r.allow({"scheme", "step", "fixed_point_tol", "max_steps", "energy_tol", "rtol", "atol", "sample_interval"});
    try {
        cfg.scheme = scheme_from_string(r.string("scheme", to_string(cfg.scheme)));
    } catch (const InvalidArgument& e) {
        r.fail("scheme", e.what());
    }
    if (r.has("step")) {
        if (r.is_string("step")) {
            if (r.string("step", "") != "auto") r.fail("step", "must be a positive number or \"auto\"");
            cfg.step.reset();
        } else {
            cfg.step = r.positive("step", 1.0);
        }
    }
    cfg.fixed_point_tol = r.positive("fixed_point_tol", cfg.fixed_point_tol);
    cfg.max_steps = r.integer("max_steps", cfg.max_steps);
    if (cfg.max_steps < 1) r.fail("max_steps", "must be >= 1");
    cfg.energy_tol = r.positive("energy_tol", cfg.energy_tol);
    cfg.rtol = r.positive("rtol", cfg.rtol);
    cfg.atol = r.positive("atol", cfg.atol);
    if (r.has("sample_interval")) cfg.sample_interval = r.positive("sample_interval", 1.0);
    return cfg;
}

inline GridSpec parse_grid(const Reader& r, GridSpec g) {
    r.allow({"R", "N"});
    g.R = r.positive("R", g.R);
    g.N = static_cast<int>(r.integer("N", g.N));
    if (g.N < 8) r.fail("N", "must be >= 8");
    return g;
}

inline json integrator_json(const IntegratorConfig& c) {
    json j{{"scheme", to_string(c.scheme)},
           {"fixed_point_tol", c.fixed_point_tol},
           {"max_steps", c.max_steps},
           {"energy_tol", c.energy_tol},
           {"rtol", c.rtol},
           {"atol", c.atol}};
    j["step"] = c.step ? json(*c.step) : json("auto");
    j["sample_interval"] = c.sample_interval ? json(*c.sample_interval) : json(nullptr);
    return j;
}

template <class T>
json opt_json(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

}  // namespace detail

/// Default guiding-center start for the classical scan of a model.
/// For the quartic model ∇h(ξ0) is made orthogonal to ω̄Π(0) ∝ (1, −1), so the
/// initial gyrophase does not bias the averaged rate.
inline std::vector<double> default_xi0(const ModelConfig& m, int n) {
    std::vector<double> x(static_cast<std::size_t>(2 * n), 0.0);
    for (int mu = 0; mu < n; ++mu) {
        const double q = 0.8;
        x[static_cast<std::size_t>(mu)] = q;
        x[static_cast<std::size_t>(n + mu)] = m.id == "quartic" ? q + 4 * m.lambda * q * q * q : q;
    }
    return x;
}

inline ScenarioConfig parse_config(const json& j) {
    ScenarioConfig c;
    const detail::Reader r(j, "config");
    r.allow({"scenario", "n", "model", "hbar", "classical", "quantum", "checks", "output", "seed", "$schema"});
    c.scenario = r.string("scenario", c.scenario);
    c.n = static_cast<int>(r.integer("n", 1));
    if (c.n < 1) r.fail("n", "must be >= 1");

    if (r.has("model")) {
        const auto m = r.child("model");
        m.allow({"id", "c", "lambda"});
        c.model.id = m.string("id", c.model.id);
        c.model.c = m.positive("c", c.model.c);
        c.model.lambda = m.number("lambda", c.model.lambda);
        if (c.model.lambda < 0) m.fail("lambda", "must be >= 0");
        try {
            (void)c.hamiltonian();
        } catch (const InvalidArgument& e) {
            m.fail("id", e.what());
        }
    }

    if (r.has("hbar")) {
        c.hbar = r.numbers("hbar");
        if (c.hbar.empty()) r.fail("hbar", "must not be empty");
        for (std::size_t i = 0; i < c.hbar.size(); ++i) {
            if (!(c.hbar[i] > 0)) r.fail("hbar", "values must be positive");
            if (i > 0 && !(c.hbar[i] < c.hbar[i - 1])) r.fail("hbar", "values must be strictly decreasing");
        }
    }

    if (r.has("classical")) {
        const auto k = r.child("classical");
        k.allow({"T", "cyclotron_periods", "J0", "xi0", "gauge", "integrator", "reference_integrator",
                 "write_trajectories", "expect"});
        c.classical.T = k.positive("T", c.classical.T);
        if (k.has("cyclotron_periods")) c.classical.cyclotron_periods = k.positive("cyclotron_periods", 1.0);
        c.classical.J0 = k.number("J0", c.classical.J0);
        if (c.classical.J0 < 0) k.fail("J0", "must be >= 0");
        if (k.has("xi0")) {
            c.classical.xi0 = k.numbers("xi0");
            if (c.classical.xi0.size() != static_cast<std::size_t>(2 * c.n)) k.fail("xi0", "must have 2n entries");
        }
        c.classical.gauge = k.string("gauge", c.classical.gauge);
        if (k.has("integrator")) c.classical.integrator = detail::parse_integrator(k.child("integrator"), {});
        if (k.has("reference_integrator"))
            c.classical.reference = detail::parse_integrator(k.child("reference_integrator"), {});
        c.classical.write_trajectories = k.boolean("write_trajectories", true);
        if (k.has("expect")) {
            const auto e = k.child("expect");
            e.allow({"X_drift_max", "xi_X_exponent", "X_ref_exponent_min", "J_drift_exponent_min", "tracking",
                     "fit_residual_max"});
            if (e.has("X_drift_max")) c.classical.expect.X_drift_max = e.positive("X_drift_max", 1.0);
            if (e.has("xi_X_exponent")) {
                const auto v = e.numbers("xi_X_exponent");
                if (v.size() != 2 || !(v[0] <= v[1])) e.fail("xi_X_exponent", "must be [low, high]");
                c.classical.expect.xi_X_exponent = std::array<double, 2>{v[0], v[1]};
            }
            if (e.has("X_ref_exponent_min")) c.classical.expect.X_ref_exponent_min = e.number("X_ref_exponent_min");
            if (e.has("J_drift_exponent_min"))
                c.classical.expect.J_drift_exponent_min = e.number("J_drift_exponent_min");
            c.classical.expect.tracking = e.boolean("tracking", false);
            if (e.has("fit_residual_max")) c.classical.expect.fit_residual_max = e.positive("fit_residual_max", 1.0);
        }
    }
    try {
        (void)gauges::by_id(c.classical.gauge, c.n);
    } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("config.classical.gauge: ") + e.what());
    }

    if (r.has("quantum")) {
        const auto q = r.child("quantum");
        q.allow({"grid", "mode", "gauge", "eigenpairs", "window", "emax", "cluster_tol", "compare", "expect"});
        if (q.has("grid")) c.quantum.grid = detail::parse_grid(q.child("grid"), c.quantum.grid);
        c.quantum.mode = q.string("mode", c.quantum.mode);
        if (c.quantum.mode != "bands" && c.quantum.mode != "landau") q.fail("mode", "must be \"bands\" or \"landau\"");
        c.quantum.gauge = q.string("gauge", c.quantum.gauge);
        c.quantum.eigenpairs = static_cast<int>(q.integer("eigenpairs", c.quantum.eigenpairs));
        if (c.quantum.eigenpairs < 4) q.fail("eigenpairs", "must be >= 4");
        c.quantum.window = static_cast<int>(q.integer("window", c.quantum.window));
        if (c.quantum.window < 1) q.fail("window", "must be >= 1");
        c.quantum.emax = q.positive("emax", c.quantum.emax);
        c.quantum.cluster_tol = q.positive("cluster_tol", c.quantum.cluster_tol);
        if (q.has("compare")) {
            const auto t = q.child("compare");
            t.allow({"level", "splitting", "gap"});
            c.quantum.compare.level = t.positive("level", c.quantum.compare.level);
            c.quantum.compare.splitting = t.positive("splitting", c.quantum.compare.splitting);
            c.quantum.compare.gap = t.positive("gap", c.quantum.compare.gap);
        }
        if (q.has("expect")) {
            const auto e = q.child("expect");
            e.allow({"splitting_rel_tol", "gap_value", "gap_rel_tol", "ratio_min", "splitting_ratio_tol", "levels",
                     "level_rel_tol"});
            auto& x = c.quantum.expect;
            if (e.has("splitting_rel_tol")) x.splitting_rel_tol = e.positive("splitting_rel_tol", 1.0);
            if (e.has("gap_value")) x.gap_value = e.positive("gap_value", 1.0);
            x.gap_rel_tol = e.positive("gap_rel_tol", x.gap_rel_tol);
            if (e.has("ratio_min")) x.ratio_min = e.positive("ratio_min", 1.0);
            if (e.has("splitting_ratio_tol")) x.splitting_ratio_tol = e.positive("splitting_ratio_tol", 1.0);
            if (e.has("levels")) x.levels = e.numbers("levels");
            x.level_rel_tol = e.positive("level_rel_tol", x.level_rel_tol);
        }
    }
    try {
        (void)gauges::by_id(c.quantum.gauge, 1);
    } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("config.quantum.gauge: ") + e.what());
    }

    if (r.has("checks")) {
        const auto k = r.child("checks");
        k.allow({"gauge_points", "gauge_tol", "broken_gauge", "ccr_grids", "ccr_hbar", "ccr_ratio", "ccr_ratio_tol",
                 "jacobi_points", "jacobi_tol", "torus_area", "flux_tol", "gauge_invariance", "classical_gauge_hbar",
                 "classical_gauge_T", "classical_gauge_tol", "quantum_gauge_hbar", "quantum_gauge_grid",
                 "quantum_gauge_eigenpairs", "quantum_gauge_tol"});
        auto& x = c.checks;
        x.gauge_points = static_cast<int>(k.integer("gauge_points", x.gauge_points));
        if (x.gauge_points < 1) k.fail("gauge_points", "must be >= 1");
        x.gauge_tol = k.positive("gauge_tol", x.gauge_tol);
        x.broken_gauge = k.boolean("broken_gauge", x.broken_gauge);
        if (k.has("ccr_grids")) {
            x.ccr_grids.clear();
            for (double v : k.numbers("ccr_grids")) {
                if (v != std::floor(v) || v < SectionGrid::kMinNodes) k.fail("ccr_grids", "entries must be integers >= 16");
                x.ccr_grids.push_back(static_cast<int>(v));
            }
            if (x.ccr_grids.size() < 2) k.fail("ccr_grids", "needs at least two grids");
        }
        x.ccr_hbar = k.positive("ccr_hbar", x.ccr_hbar);
        x.ccr_ratio = k.positive("ccr_ratio", x.ccr_ratio);
        x.ccr_ratio_tol = k.positive("ccr_ratio_tol", x.ccr_ratio_tol);
        x.jacobi_points = static_cast<int>(k.integer("jacobi_points", x.jacobi_points));
        if (x.jacobi_points < 1) k.fail("jacobi_points", "must be >= 1");
        x.jacobi_tol = k.positive("jacobi_tol", x.jacobi_tol);
        x.torus_area = k.positive("torus_area", x.torus_area);
        x.flux_tol = k.positive("flux_tol", x.flux_tol);
        x.gauge_invariance = k.boolean("gauge_invariance", x.gauge_invariance);
        x.classical_gauge_hbar = k.positive("classical_gauge_hbar", x.classical_gauge_hbar);
        x.classical_gauge_T = k.positive("classical_gauge_T", x.classical_gauge_T);
        x.classical_gauge_tol = k.positive("classical_gauge_tol", x.classical_gauge_tol);
        x.quantum_gauge_hbar = k.positive("quantum_gauge_hbar", x.quantum_gauge_hbar);
        if (k.has("quantum_gauge_grid")) x.quantum_gauge_grid = detail::parse_grid(k.child("quantum_gauge_grid"), x.quantum_gauge_grid);
        x.quantum_gauge_eigenpairs = static_cast<int>(k.integer("quantum_gauge_eigenpairs", x.quantum_gauge_eigenpairs));
        if (x.quantum_gauge_eigenpairs < 1) k.fail("quantum_gauge_eigenpairs", "must be >= 1");
        x.quantum_gauge_tol = k.positive("quantum_gauge_tol", x.quantum_gauge_tol);
    }

    if (r.has("output")) c.output = r.string("output", "");
    if (r.has("seed")) {
        const json& s = j.at("seed");
        if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0))
            r.fail("seed", "must be a nonnegative integer");
        c.seed = s.get<std::uint64_t>();
    }
    if (c.classical.xi0.empty()) c.classical.xi0 = default_xi0(c.model, c.n);
    return c;
}

/// Every parameter with defaults filled in; keys are sorted, so the dump is canonical.
/// The output directory is excluded: it does not affect any numeric result.
inline json canonical_json(const ScenarioConfig& c) {
    using detail::opt_json;
    const auto& k = c.classical;
    const auto& q = c.quantum;
    const auto& x = c.checks;
    json j;
    j["scenario"] = c.scenario;
    j["n"] = c.n;
    j["model"] = {{"id", c.model.id}, {"c", c.model.c}, {"lambda", c.model.lambda}};
    if (!c.hbar.empty()) j["hbar"] = c.hbar;  // checks-only runs carry none
    j["seed"] = c.seed;
    json ke = {{"X_drift_max", opt_json(k.expect.X_drift_max)},
               {"X_ref_exponent_min", opt_json(k.expect.X_ref_exponent_min)},
               {"J_drift_exponent_min", opt_json(k.expect.J_drift_exponent_min)},
               {"tracking", k.expect.tracking},
               {"fit_residual_max", opt_json(k.expect.fit_residual_max)}};
    ke["xi_X_exponent"] = k.expect.xi_X_exponent ? json(*k.expect.xi_X_exponent) : json(nullptr);
    j["classical"] = {{"T", k.T},
                      {"cyclotron_periods", opt_json(k.cyclotron_periods)},
                      {"J0", k.J0},
                      {"xi0", k.xi0},
                      {"gauge", k.gauge},
                      {"integrator", detail::integrator_json(k.integrator)},
                      {"reference_integrator", detail::integrator_json(k.reference)},
                      {"write_trajectories", k.write_trajectories},
                      {"expect", ke}};
    j["quantum"] = {{"grid", {{"R", q.grid.R}, {"N", q.grid.N}}},
                    {"mode", q.mode},
                    {"gauge", q.gauge},
                    {"eigenpairs", q.eigenpairs},
                    {"window", q.window},
                    {"emax", q.emax},
                    {"cluster_tol", q.cluster_tol},
                    {"compare", {{"level", q.compare.level}, {"splitting", q.compare.splitting}, {"gap", q.compare.gap}}},
                    {"expect",
                     {{"splitting_rel_tol", opt_json(q.expect.splitting_rel_tol)},
                      {"gap_value", opt_json(q.expect.gap_value)},
                      {"gap_rel_tol", q.expect.gap_rel_tol},
                      {"ratio_min", opt_json(q.expect.ratio_min)},
                      {"splitting_ratio_tol", opt_json(q.expect.splitting_ratio_tol)},
                      {"levels", q.expect.levels},
                      {"level_rel_tol", q.expect.level_rel_tol}}}};
    j["checks"] = {{"gauge_points", x.gauge_points},
                   {"gauge_tol", x.gauge_tol},
                   {"broken_gauge", x.broken_gauge},
                   {"ccr_grids", x.ccr_grids},
                   {"ccr_hbar", x.ccr_hbar},
                   {"ccr_ratio", x.ccr_ratio},
                   {"ccr_ratio_tol", x.ccr_ratio_tol},
                   {"jacobi_points", x.jacobi_points},
                   {"jacobi_tol", x.jacobi_tol},
                   {"torus_area", x.torus_area},
                   {"flux_tol", x.flux_tol},
                   {"gauge_invariance", x.gauge_invariance},
                   {"classical_gauge_hbar", x.classical_gauge_hbar},
                   {"classical_gauge_T", x.classical_gauge_T},
                   {"classical_gauge_tol", x.classical_gauge_tol},
                   {"quantum_gauge_hbar", x.quantum_gauge_hbar},
                   {"quantum_gauge_grid", {{"R", x.quantum_gauge_grid.R}, {"N", x.quantum_gauge_grid.N}}},
                   {"quantum_gauge_eigenpairs", x.quantum_gauge_eigenpairs},
                   {"quantum_gauge_tol", x.quantum_gauge_tol}};
    return j;
}

inline std::string config_hash(const ScenarioConfig& c) { return fnv1a64(canonical_json(c).dump()); }

// ---------------------------------------------------------------------------
// Built-in scenarios

inline std::vector<std::string> builtin_names() {
    return {"freeze-flat", "quartic-scan", "landau-flat", "shifted-harmonic", "default-checks", "broken-gauge"};
}

inline json builtin_scenario(const std::string& name) {
    if (name == "freeze-flat")
        return {{"scenario", name},
                {"model", {{"id", "constant"}, {"c", 1.0}}},
                {"hbar", {0.1, 0.05, 0.01}},
                {"classical", {{"cyclotron_periods", 100}, {"J0", 1.0}, {"xi0", {0.3, -0.2}},
                               {"expect", {{"X_drift_max", 1e-6}}}}}};
    if (name == "quartic-scan")
        return {{"scenario", name},
                {"model", {{"id", "quartic"}, {"c", 1.0}, {"lambda", 0.1}}},
                {"hbar", {0.1, 0.05, 0.02, 0.01}},
                {"classical",
                 {{"T", 5.0},
                  {"J0", 1.0},
                  {"expect",
                   {{"xi_X_exponent", {0.4, 0.6}},
                    {"X_ref_exponent_min", 0.4},
                    {"J_drift_exponent_min", 0.4},
                    {"tracking", true},
                    {"fit_residual_max", 0.1}}}}}};
    if (name == "landau-flat")
        return {{"scenario", name},
                {"model", {{"id", "constant"}, {"c", 1.0}}},
                {"hbar", {0.1, 0.05}},
                {"quantum",
                 {{"grid", {{"R", 2.0}, {"N", 127}}},
                  {"mode", "landau"},
                  {"emax", 2.7},
                  {"expect", {{"levels", {0.5, 1.5, 2.5}}, {"level_rel_tol", 0.01}}}}}};
    if (name == "shifted-harmonic")
        return {{"scenario", name},
                {"model", {{"id", "shifted-harmonic"}, {"c", 1.0}}},
                {"hbar", {0.1, 0.05}},
                {"quantum",
                 {{"grid", {{"R", 6.0}, {"N", 256}}},
                  {"mode", "bands"},
                  {"eigenpairs", 10},
                  {"expect",
                   {{"splitting_rel_tol", 0.25},
                    {"gap_value", 1.0},
                    {"gap_rel_tol", 0.25},
                    {"ratio_min", 14.0},
                    {"splitting_ratio_tol", 0.3}}}}}};
    if (name == "default-checks") return {{"scenario", name}};
    if (name == "broken-gauge") return {{"scenario", name}, {"checks", {{"broken_gauge", true}, {"gauge_invariance", false}}}};
    throw ConfigError("unknown built-in scenario '" + name + "'");
}

inline json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
    }
}

/// Parses a comma-separated ℏ list such as "0.1,0.05".
inline std::vector<double> parse_hbar_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            const double v = std::stod(item, &used);
            if (used != item.size()) throw std::invalid_argument(item);
            out.push_back(v);
        } catch (const std::exception&) {
            throw ConfigError("--hbar: cannot parse '" + item + "' as a number");
        }
    }
    if (out.empty()) throw ConfigError("--hbar: empty list");
    return out;
}

}  // namespace geoq::harness
