#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "ooc/scenario_io.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
};

Result ooc_cli(const std::string& args) {
    const std::string cmd = std::string(OOC_CLI) + " " + args + " 2>&1";
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    std::string out;
    char buf[4096];
    while (std::fgets(buf, sizeof buf, p)) out += buf;
    const int status = pclose(p);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

fs::path workdir() {
    const auto dir = fs::temp_directory_path() / "ooc_test_cli";
    fs::create_directories(dir);
    return dir;
}

std::string write_scenario(const std::string& name, const nlohmann::json& doc) {
    const auto path = (workdir() / name).string();
    std::ofstream(path) << doc.dump();
    return path;
}

}  // namespace

TEST_CASE("graph subcommand") {
    const auto r = ooc_cli("graph --scenario example1");
    CHECK(r.code == 0);
    CHECK(r.out.find("strongly connected: yes") != std::string::npos);
    CHECK(r.out.find("rho: [0.181818181818, 0.363636363636") != std::string::npos);
    CHECK(r.out.find("lambda2: 0.1032") != std::string::npos);

    auto doc = ooc::preset_json("example1");
    doc["graph"]["edges"].erase(doc["graph"]["edges"].begin() + 6);  // drop 5->1
    const auto r2 = ooc_cli("graph --scenario " + write_scenario("broken.json", doc));
    CHECK(r2.code == 1);
    CHECK(r2.out.find("strongly connected: no") != std::string::npos);
}

TEST_CASE("usage and schema errors exit with 2") {
    CHECK(ooc_cli("graph --scenario example1 --bogus").code == 2);
    CHECK(ooc_cli("").code == 2);
    CHECK(ooc_cli("frobnicate").code == 2);
    CHECK(ooc_cli("sim --scenario /nonexistent.json").code == 2);
    auto doc = ooc::preset_json("example1");
    doc["graph"]["edges"][0]["weight"] = -2.0;
    const auto r = ooc_cli("sim --scenario " + write_scenario("neg.json", doc));
    CHECK(r.code == 2);
    CHECK(r.out.find("graph.edges[0].weight") != std::string::npos);
    CHECK(ooc_cli("sim --scenario example1 --set nope=1").code == 2);
    CHECK(ooc_cli("preset example9").code == 2);
    CHECK(ooc_cli("--help").code == 0);
}

TEST_CASE("verify exit code follows the checks") {
    auto doc = ooc::preset_json("example1");
    doc["sim"]["horizon"] = 2.0;
    doc["sim"]["tolerances"] = {{"output", 100.0}, {"velocity", 100.0}, {"xi", 1.0}};
    const auto out = (workdir() / "ok").string();
    auto r = ooc_cli("verify --scenario " + write_scenario("loose.json", doc) + " --out " + out);
    CHECK(r.code == 0);
    CHECK(fs::exists(out + "/report.json"));
    CHECK(fs::exists(out + "/trajectory.csv"));
    CHECK(fs::exists(out + "/metrics.json"));

    doc["sim"]["tolerances"]["output"] = 1e-12;
    r = ooc_cli("verify --scenario " + write_scenario("tight.json", doc) + " --out " + out);
    CHECK(r.code == 1);
    CHECK(r.out.find("FAIL  final_output_error") != std::string::npos);
}

TEST_CASE("sim, coordinator, ablate and sweep write their outputs") {
    const auto dir = workdir() / "runs";
    auto r = ooc_cli("sim --scenario example1 --set horizon=1 --out " + (dir / "sim").string());
    CHECK(r.code == 0);
    CHECK(fs::exists(dir / "sim" / "trajectory.csv"));

    r = ooc_cli("coordinator --scenario example1 --set horizon=1 --out " + (dir / "coord").string());
    CHECK(r.code == 0);
    CHECK(fs::exists(dir / "coord" / "coordinator.csv"));
    CHECK(fs::exists(dir / "coord" / "coordinator.json"));

    r = ooc_cli("ablate --scenario example2 --set horizon=20 --out " + (dir / "ablate").string());
    CHECK(r.code == 0);
    CHECK(fs::exists(dir / "ablate" / "ablation.json"));
    CHECK(fs::exists(dir / "ablate" / "without_internal_model" / "trajectory.csv"));

    r = ooc_cli("sweep --scenario example1 --set horizon=1 --field seed --values 1,2 --out " + (dir / "sweep").string());
    CHECK((r.code == 0 || r.code == 1));
    CHECK(fs::exists(dir / "sweep" / "sweep.json"));
    CHECK(r.out.find("seed = 2") != std::string::npos);
}
