#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "geoq/harness/config.hpp"
#include "geoq/harness/runs.hpp"

using namespace geoq;
using namespace geoq::harness;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("geoq-test-" + std::to_string(::getpid())) / name;
    fs::remove_all(p);
    return p;
}

RunOptions quiet_to(const fs::path& p) {
    RunOptions o;
    o.out = p;
    o.quiet = true;
    o.jobs = 1;
    return o;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::map<std::string, std::string> outputs(const fs::path& dir) {
    std::map<std::string, std::string> m;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().filename() != "manifest.json") m[e.path().filename().string()] = slurp(e.path());
    return m;
}

json with(json j, const std::string& key, json v) {
    j[key] = std::move(v);
    return j;
}

std::string config_error(const json& j) {
    try {
        parse_config(j);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(GEOQ_CLI) + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST(Config, DefaultsAndBuiltins) {
    const auto c = parse_config(json::object());
    EXPECT_EQ(c.n, 1);
    EXPECT_EQ(c.model.id, "quartic");
    EXPECT_EQ(c.classical.xi0.size(), 2u);
    EXPECT_DOUBLE_EQ(c.classical.xi0[1], 0.8 + 4 * 0.1 * 0.8 * 0.8 * 0.8);
    for (const auto& name : builtin_names()) EXPECT_NO_THROW(parse_config(builtin_scenario(name))) << name;
    EXPECT_THROW(builtin_scenario("nope"), ConfigError);
}

TEST(Config, RejectsInvalidInput) {
    const json base = builtin_scenario("quartic-scan");
    EXPECT_NE(config_error(with(base, "hbar", {0.1, -0.05})).find("positive"), std::string::npos);
    EXPECT_NE(config_error(with(base, "hbar", {0.05, 0.1})).find("decreasing"), std::string::npos);
    EXPECT_NE(config_error(with(base, "hbar", json::array())).find("empty"), std::string::npos);
    EXPECT_NE(config_error(with(base, "bogus", 1)).find("bogus"), std::string::npos);
    json nested = base;
    nested["classical"]["integrator"] = {{"stepsize", 0.1}};
    EXPECT_NE(config_error(nested).find("stepsize"), std::string::npos);
    nested = base;
    nested["classical"]["integrator"] = {{"step", "fast"}};
    EXPECT_FALSE(config_error(nested).empty());
    EXPECT_FALSE(config_error(with(base, "model", {{"id", "sextic"}})).empty());
    EXPECT_FALSE(config_error(with(base, "n", 0)).empty());
    json g = base;
    g["classical"]["gauge"] = "coulomb";
    EXPECT_FALSE(config_error(g).empty());
    EXPECT_THROW(parse_hbar_list("0.1,abc"), ConfigError);
    EXPECT_EQ(parse_hbar_list("0.1,0.05"), (std::vector<double>{0.1, 0.05}));
}

TEST(Config, HashIsStableAndSensitive) {
    const auto a = parse_config(builtin_scenario("quartic-scan"));
    const auto b = parse_config(builtin_scenario("quartic-scan"));
    EXPECT_EQ(config_hash(a), config_hash(b));
    EXPECT_EQ(config_hash(a).size(), 16u);
    const auto c = parse_config(with(builtin_scenario("quartic-scan"), "hbar", {0.1, 0.05, 0.01}));
    EXPECT_NE(config_hash(a), config_hash(c));
    // Output location does not enter the hash.
    const auto d = parse_config(with(builtin_scenario("quartic-scan"), "output", "/tmp/elsewhere"));
    EXPECT_EQ(config_hash(a), config_hash(d));
    EXPECT_EQ(fnv1a64(""), "cbf29ce484222325");
}

TEST(Config, CanonicalFormRoundTrips) {
    for (const auto& name : builtin_names()) {
        const auto c = parse_config(builtin_scenario(name));
        const auto again = parse_config(canonical_json(c));
        EXPECT_EQ(config_hash(c), config_hash(again)) << name;
    }
}

TEST(Config, SchemaCoversCanonicalKeys) {
    const json schema = load_json_file(std::string(GEOQ_SOURCE_DIR) + "/schema/scenario.schema.json");
    std::function<void(const json&, const json&, const std::string&)> walk = [&](const json& v, const json& s,
                                                                                 const std::string& at) {
        if (!v.is_object() || !s.contains("properties")) return;
        for (auto it = v.begin(); it != v.end(); ++it) {
            ASSERT_TRUE(s["properties"].contains(it.key())) << at << "." << it.key();
            walk(it.value(), s["properties"][it.key()], at + "." + it.key());
        }
    };
    for (const auto& name : builtin_names()) walk(canonical_json(parse_config(builtin_scenario(name))), schema, name);
}

TEST(Config, SampleConfigsParse) {
    const fs::path dir = fs::path(GEOQ_SOURCE_DIR) / "samples";
    int seen = 0;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().extension() == ".json") {
            EXPECT_NO_THROW(parse_config(load_json_file(e.path().string()))) << e.path();
            ++seen;
        }
    EXPECT_GT(seen, 0);
}

TEST(Runs, QuantumConfigErrors) {
    json j = builtin_scenario("shifted-harmonic");
    j["n"] = 2;
    try {
        run_quantum_spectrum(parse_config(j), quiet_to(scratch("n2")));
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("n = 1"), std::string::npos) << e.what();
    }
    j = builtin_scenario("shifted-harmonic");
    j["quantum"]["grid"] = {{"R", 6.0}, {"N", 64}};
    EXPECT_THROW(run_quantum_spectrum(parse_config(j), quiet_to(scratch("coarse"))), ConfigError);
    EXPECT_THROW(run_classical_scan(parse_config(with(builtin_scenario("quartic-scan"), "hbar", {0.1, 0.01})),
                                    quiet_to(scratch("two"))),
                 ConfigError);
}

TEST(Runs, FreezeFlatOutputs) {
    const fs::path dir = scratch("freeze");
    const auto cfg = parse_config(builtin_scenario("freeze-flat"));
    const auto m = run_classical_scan(cfg, quiet_to(dir));
    EXPECT_EQ(m.exit_code, kExitOk);
    EXPECT_TRUE(m.passed());
    for (const auto& f : {"metrics.csv", "scaling.json", "config.json", "manifest.json", "trajectory_hbar0.05.csv"})
        EXPECT_TRUE(fs::exists(dir / f)) << f;
    const std::string first_line = slurp(dir / "metrics.csv").substr(0, slurp(dir / "metrics.csv").find('\n'));
    EXPECT_EQ(first_line, "# config_hash=" + config_hash(cfg));
    const auto s = nlohmann::ordered_json::parse(slurp(dir / "scaling.json"));
    EXPECT_EQ(s.begin().key(), "config_hash");
    const json man = json::parse(slurp(dir / "manifest.json"));
    EXPECT_EQ(man["status"], "pass");
    EXPECT_EQ(man["artifact_version"], kArtifactVersion);
}

TEST(Runs, RepeatedRunsAreByteIdentical) {
    const auto cfg = parse_config(builtin_scenario("freeze-flat"));
    const fs::path a = scratch("det-a"), b = scratch("det-b");
    run_classical_scan(cfg, quiet_to(a));
    RunOptions threaded = quiet_to(b);
    threaded.jobs = 3;  // thread count may not change the bytes
    run_classical_scan(cfg, threaded);
    const auto oa = outputs(a), ob = outputs(b);
    ASSERT_EQ(oa.size(), ob.size());
    for (const auto& [name, bytes] : oa) EXPECT_EQ(bytes, ob.at(name)) << name;

    const auto chk = parse_config(builtin_scenario("default-checks"));
    const fs::path c = scratch("det-c"), d = scratch("det-d");
    run_checks(chk, quiet_to(c));
    run_checks(chk, quiet_to(d));
    EXPECT_EQ(outputs(c), outputs(d));
}

TEST(Runs, FailingPointDoesNotSinkTheScan) {
    json j = builtin_scenario("quartic-scan");
    j["hbar"] = {0.2, 0.1, 0.001};
    j["classical"]["integrator"] = {{"max_steps", 60000}};
    const fs::path dir = scratch("partial");
    const auto m = run_classical_scan(parse_config(j), quiet_to(dir));
    EXPECT_EQ(m.exit_code, kExitIntegration);
    ASSERT_EQ(m.points.size(), 3u);
    EXPECT_EQ(m.points[0]["status"], "ok");
    EXPECT_EQ(m.points[1]["status"], "ok");
    EXPECT_EQ(m.points[2]["status"], "failed");
    EXPECT_NE(m.points[2]["error"].get<std::string>().find("max steps"), std::string::npos);
    EXPECT_TRUE(fs::exists(dir / "trajectory_hbar0.2.csv"));
    EXPECT_FALSE(fs::exists(dir / "trajectory_hbar0.001.csv"));
    const std::string metrics = slurp(dir / "metrics.csv");
    EXPECT_NE(metrics.find("failed"), std::string::npos);
}

TEST(Runs, ChecksPassAndBrokenGaugeFails) {
    const auto ok = run_checks(parse_config(builtin_scenario("default-checks")), quiet_to(scratch("checks")));
    EXPECT_EQ(ok.exit_code, kExitOk);
    for (const auto& c : ok.checks) EXPECT_TRUE(c.pass) << c.name << ": " << c.detail;
    const auto bad = run_checks(parse_config(builtin_scenario("broken-gauge")), quiet_to(scratch("broken")));
    EXPECT_EQ(bad.exit_code, kExitChecksFailed);
}

TEST(Runs, ReportSummarizesManifests) {
    const fs::path root = scratch("report");
    run_classical_scan(parse_config(builtin_scenario("freeze-flat")), quiet_to(root / "freeze-flat"));
    auto r = build_report(root);
    EXPECT_EQ(r.exit_code, kExitOk);
    EXPECT_EQ(r.manifests.size(), 1u);
    EXPECT_NE(r.text.find("PASS classical-scan freeze-flat"), std::string::npos);
    run_checks(parse_config(builtin_scenario("broken-gauge")), quiet_to(root / "broken-gauge"));
    r = build_report(root);
    EXPECT_EQ(r.exit_code, kExitChecksFailed);
    EXPECT_EQ(build_report(scratch("empty")).exit_code, kExitConfig);
}

TEST(Cli, ExitCodes) {
    const fs::path dir = scratch("cli");
    fs::create_directories(dir);
    const std::string out = " --quiet --out " + dir.string();
    EXPECT_EQ(run_cli("classical-scan --scenario freeze-flat" + out + "/ff"), 0);
    EXPECT_EQ(run_cli("classical-scan --scenario freeze-flat --hbar -0.1,0.05,0.01" + out + "/neg"), 2);
    EXPECT_FALSE(fs::exists(dir / "neg"));
    EXPECT_EQ(run_cli("checks --scenario broken-gauge" + out + "/bg"), 1);
    EXPECT_EQ(run_cli("checks --scenario no-such" + out + "/x"), 2);
    EXPECT_EQ(run_cli("frobnicate"), 2);
    {
        std::ofstream f(dir / "bad.json");
        f << R"({"scenario": "x", "colour": 3})";
    }
    EXPECT_EQ(run_cli("checks --config " + (dir / "bad.json").string() + out + "/bad"), 2);
    EXPECT_EQ(run_cli("report --out " + dir.string()), 1);  // broken-gauge run is in there
    EXPECT_EQ(run_cli("report --out " + (dir / "ff").string()), 0);
}
