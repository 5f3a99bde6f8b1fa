#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "abelu/numerics.hpp"
#include "abelu/runner.hpp"
#include "property_case.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
    fs::path p = fs::temp_directory_path() / "abelu_cli_tests" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Run {
    int code;
    std::string out, err;
};

Run cli(const std::string& args, const fs::path& dir) {
    std::string cmd = std::string("'") + ABELU_CLI_PATH + "' " + args + " > '" + (dir / "stdout").string() + "' 2> '" + (dir / "stderr").string() + "'";
    int st = std::system(cmd.c_str());
    return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, slurp(dir / "stdout"), slurp(dir / "stderr")};
}

fs::path write_config(const fs::path& dir, const std::string& name, const json& j) {
    fs::path p = dir / name;
    std::ofstream(p) << j.dump(1);
    return p;
}

json floor_config() {
    return {{"kind", "construct-floor"},
            {"seed", 1},
            {"gamma", {{"kind", "inverse"}}},
            {"policy", {{"kind", "explicit"}, {"stages", 3}, {"rho", {0.02, 0.05, 0.1, 0.5, 0.8}}}},
            {"enrollment",
             {{"phis", {0, 1}},
              {"arcs", {{{"center", 0.0}, {"halfwidth", 0.05}}}},
              {"pairs", {{0, 0}, {1, 0}}},
              {"schedule", {{0, 0}, {0, 0}, {1, 0}}}}}};
}

json diagnose_config() {
    return {{"kind", "diagnose"},
            {"seed", 42},
            {"lacunary", 6},
            {"operations",
             {{{"op", "gap_witnesses"}, {"expect", {{"hadamard_ratio", {{"min", 2}, {"max", 2}}}}}},
              {{"op", "bloch_norm_estimate"}, {"grid", {{"radial", 64}, {"angular", 128}}}},
              {{"op", "radial_cluster_sample"}, {"random_points", 3}, {"r_grid", {{"from", 0.0}, {"to", 0.99}, {"count", 50}}}}}}};
}

}  // namespace

TEST_CASE("construct writes artifacts and describe summarizes them") {
    auto dir = scratch("construct");
    auto cfg = write_config(dir, "floor.json", floor_config());
    auto r = cli("construct --config '" + cfg.string() + "' --out '" + (dir / "out").string() + "'", dir);
    CHECK(r.code == 0);
    for (const char* f : {"f.json", "report.json", "run.json", "stages.csv"}) CHECK(fs::exists(dir / "out" / f));
    auto d = cli("describe '" + (dir / "out").string() + "'", dir);
    CHECK(d.code == 0);
    CHECK(d.out.find("stages: 3") != std::string::npos);
    CHECK(d.out.find("degree") != std::string::npos);
    CHECK(d.out.find("precision") != std::string::npos);
    CHECK(d.out.find("targets: 2 functions") != std::string::npos);

    // f.json round trip reproduces the coefficients exactly
    json fj = json::parse(slurp(dir / "out" / "f.json"));
    CHECK(abelu::poly_to_json(abelu::poly_from_json(fj)) == fj);
}

TEST_CASE("identical configs give byte-identical reports") {
    auto dir = scratch("determinism");
    auto cfg = write_config(dir, "diag.json", diagnose_config());
    auto a = cli("diagnose --config '" + cfg.string() + "' --out '" + (dir / "a").string() + "'", dir);
    auto b = cli("diagnose --config '" + cfg.string() + "' --out '" + (dir / "b").string() + "'", dir);
    CHECK(a.code == 0);
    CHECK(b.code == 0);
    CHECK(slurp(dir / "a" / "report.json") == slurp(dir / "b" / "report.json"));
    auto d = cli("describe '" + (dir / "a").string() + "'", dir);
    CHECK(d.out.find("reports: gap_witnesses bloch_norm_estimate radial_cluster_sample") != std::string::npos);
}

TEST_CASE("malformed configs are validation errors and write nothing") {
    auto dir = scratch("malformed");
    fs::path bad = dir / "bad.json";
    std::ofstream(bad) << "{ \"kind\": \"construct-floor\", ";
    auto r = cli("construct --config '" + bad.string() + "' --out '" + (dir / "out").string() + "'", dir);
    CHECK(r.code == 2);
    CHECK_FALSE(fs::exists(dir / "out"));

    json j = floor_config();
    j["policy"]["rho"] = {0.5, 0.2, 0.9, 0.95, 0.99};
    auto cfg = write_config(dir, "radii.json", j);
    CHECK(cli("construct --config '" + cfg.string() + "' --out '" + (dir / "out").string() + "'", dir).code == 2);
    CHECK_FALSE(fs::exists(dir / "out"));

    json d = diagnose_config();
    d["operations"][0]["op"] = "no_such_op";
    cfg = write_config(dir, "op.json", d);
    CHECK(cli("diagnose --config '" + cfg.string() + "' --out '" + (dir / "out").string() + "'", dir).code == 2);

    // kind must match the subcommand
    cfg = write_config(dir, "floor.json", floor_config());
    CHECK(cli("diagnose --config '" + cfg.string() + "' --out '" + (dir / "out").string() + "'", dir).code == 2);
    CHECK_FALSE(fs::exists(dir / "out"));

    CHECK(cli("construct --out x", dir).code == 2);
}

TEST_CASE("assertion failures exit 1, runtime failures exit 3") {
    auto dir = scratch("exit_codes");
    json d = diagnose_config();
    d["operations"][0]["expect"] = {{"hadamard_ratio", {{"min", 3}}}};
    auto cfg = write_config(dir, "fail.json", d);
    auto r = cli("diagnose --config '" + cfg.string() + "' --out '" + (dir / "a").string() + "'", dir);
    CHECK(r.code == 1);
    CHECK(r.err.find("FAIL") != std::string::npos);
    CHECK(fs::exists(dir / "a" / "report.json"));

    json e = diagnose_config();
    e["operations"] = {{{"op", "partial_sum_divergence_profile"}, {"grid", 16}, {"checkpoints", {1, 10000}}}};
    cfg = write_config(dir, "runtime.json", e);
    auto s = cli("diagnose --config '" + cfg.string() + "' --out '" + (dir / "b").string() + "'", dir);
    CHECK(s.code == 3);
    json rep = json::parse(slurp(dir / "b" / "report.json"));
    CHECK(rep["status"] == "partial");
}

TEST_CASE("describe errors name the missing path") {
    auto dir = scratch("describe_missing");
    auto r = cli("describe '" + (dir / "nowhere.json").string() + "'", dir);
    CHECK(r.code != 0);
    CHECK(r.err.find((dir / "nowhere.json").string()) != std::string::npos);
}

TEST_CASE("precision override and config echo") {
    auto dir = scratch("precision");
    auto cfg = write_config(dir, "floor.json", floor_config());
    auto r = cli("construct --config '" + cfg.string() + "' --out '" + (dir / "out").string() + "' --precision-bits 320", dir);
    CHECK(r.code == 0);
    json fj = json::parse(slurp(dir / "out" / "f.json"));
    CHECK(fj["precision_bits"].get<long>() >= 320);
    json rep = json::parse(slurp(dir / "out" / "report.json"));
    CHECK(rep["config"]["precision_bits"] == 320);
    CHECK(rep["config"]["seed"] == 1);
    CHECK_FALSE(rep.contains("started"));
    CHECK(json::parse(slurp(dir / "out" / "run.json")).contains("started"));
}

TEST_CASE("capacity and approx subcommands") {
    auto dir = scratch("capacity");
    json c{{"kind", "capacity"}, {"cloud", {{"kind", "segment"}, {"a", {-1, 0}}, {"b", {1, 0}}, {"density", 200}}}};
    auto cfg = write_config(dir, "cap.json", c);
    CHECK(cli("capacity --config '" + cfg.string() + "' --out '" + (dir / "out").string() + "'", dir).code == 0);
    json rep = json::parse(slurp(dir / "out" / "report.json"));
    CHECK(rep["result"]["estimate"]["value"].get<double>() == doctest::Approx(0.5).epsilon(0.05));

    json a{{"kind", "approx"}, {"tol", 1e-3}, {"target", {{"arcs", {{{"center", 0.0}, {"halfwidth", 0.3}}, {{"center", 3.14}, {"halfwidth", 0.3}}}}}}, {"pieces", {0, 1}}};
    cfg = write_config(dir, "approx.json", a);
    CHECK(cli("approx --config '" + cfg.string() + "' --out '" + (dir / "ap").string() + "'", dir).code == 0);
    CHECK(fs::exists(dir / "ap" / "f.json"));
}

TEST_CASE("cli invariants") { run_module_properties("cli"); }
