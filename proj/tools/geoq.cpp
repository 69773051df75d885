// geoq: scenario runner for the classical reduction, the quantum band
// spectrum and the kinematical checks.

#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "geoq/harness/config.hpp"
#include "geoq/harness/runs.hpp"

namespace gh = geoq::harness;

namespace {

struct Common {
    std::string config;
    std::string scenario;
    std::string out;
    std::string hbar;
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool quiet = false;
    unsigned jobs = 0;
};

void add_common(CLI::App* sub, Common& c, const std::string& default_scenario) {
    c.scenario = default_scenario;
    sub->add_option("--config", c.config, "scenario config (JSON)");
    sub->add_option("--scenario", c.scenario, "built-in scenario, used when --config is absent")
        ->check(CLI::IsMember(gh::builtin_names()));
    sub->add_option("--out", c.out, "output directory (default $GEOQ_OUT/<scenario>)");
    sub->add_option("--hbar", c.hbar, "comma-separated hbar list, overrides the config");
    sub->add_option("--seed", c.seed, "RNG seed")->each([&c](const std::string&) { c.seed_set = true; });
    sub->add_option("--jobs", c.jobs, "worker threads (default: available parallelism)");
    sub->add_flag("--quiet", c.quiet, "suppress progress output");
}

gh::ScenarioConfig load(const Common& c) {
    gh::json j = c.config.empty() ? gh::builtin_scenario(c.scenario) : gh::load_json_file(c.config);
    if (!c.hbar.empty()) j["hbar"] = gh::parse_hbar_list(c.hbar);
    if (c.seed_set) j["seed"] = c.seed;
    return gh::parse_config(j);
}

int print_result(const gh::RunManifest& m, bool quiet) {
    if (!quiet) {
        for (const auto& ch : m.checks)
            std::cout << (ch.pass ? "PASS " : "FAIL ") << ch.name << (ch.detail.empty() ? "" : ": " + ch.detail) << '\n';
        std::cout << m.command << " " << m.scenario << ": " << (m.passed() ? "pass" : "fail") << " (exit "
                  << m.exit_code << "), outputs in " << m.out_dir.string() << '\n';
    }
    return m.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"geoq: guiding-center reduction and magnetic band spectra"};
    app.require_subcommand(1);

    Common classical, quantum, checks;
    auto* c1 = app.add_subcommand("classical-scan", "extended dynamics over an hbar scan, with scaling fits");
    add_common(c1, classical, "quartic-scan");
    auto* c2 = app.add_subcommand("quantum-spectrum", "band spectrum of the magnetic operator");
    add_common(c2, quantum, "shifted-harmonic");
    auto* c3 = app.add_subcommand("checks", "kinematical validations");
    add_common(c3, checks, "default-checks");
    std::string report_dir;
    auto* c4 = app.add_subcommand("report", "summarize manifests of earlier runs");
    c4->add_option("--out", report_dir, "run directory (default $GEOQ_OUT or ./geoq-out)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : gh::kExitConfig;
    }

    try {
        if (c4->parsed()) {
            if (report_dir.empty()) {
                const char* env = std::getenv("GEOQ_OUT");
                report_dir = env && *env ? env : "geoq-out";
            }
            const auto r = gh::build_report(report_dir);
            std::cout << r.text;
            return r.exit_code;
        }
        const Common& opts = c1->parsed() ? classical : c2->parsed() ? quantum : checks;
        const gh::ScenarioConfig cfg = load(opts);
        gh::RunOptions ro;
        ro.out = opts.out;
        ro.jobs = opts.jobs;
        ro.quiet = opts.quiet;
        if (c1->parsed()) return print_result(gh::run_classical_scan(cfg, ro), opts.quiet);
        if (c2->parsed()) return print_result(gh::run_quantum_spectrum(cfg, ro), opts.quiet);
        return print_result(gh::run_checks(cfg, ro), opts.quiet);
    } catch (const gh::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return gh::kExitConfig;
    } catch (const geoq::IntegrationError& e) {
        std::cerr << "integration failure: " << e.what() << '\n';
        return gh::kExitIntegration;
    } catch (const geoq::EigensolverError& e) {
        std::cerr << "eigensolver failure: " << e.what() << '\n';
        return gh::kExitEigensolver;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
