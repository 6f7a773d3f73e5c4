#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kTmp = fs::path(BODE_TEST_TMP) / "cli";

int run_cli(const std::string& args) {
    const std::string cmd = std::string(BODE_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

fs::path write_config(const std::string& name, const nlohmann::json& j) {
    fs::create_directories(kTmp);
    const auto path = kTmp / name;
    std::ofstream out(path);
    out << j.dump(2);
    return path;
}

}  // namespace

TEST_CASE("run subcommand succeeds end to end", "[cli]") {
    const auto cfg = write_config("run.json", {{"model", {{"name", "death"}}},
                                               {"algorithm", {{"name", "new"}, {"steps", 2}}},
                                               {"budget", 300},
                                               {"seed", 9}});
    CHECK(run_cli("run --config " + cfg.string() + " --out " + (kTmp / "out_run").string()) == 0);
    CHECK(fs::exists(kTmp / "out_run" / "run_summary.json"));
    CHECK(fs::exists(kTmp / "out_run" / "top_designs.csv"));
    CHECK(fs::exists(kTmp / "out_run" / "checkpoint.json"));
}

TEST_CASE("config problems exit with code 1", "[cli]") {
    CHECK(run_cli("run --config /nonexistent.json --out " + (kTmp / "x").string()) == 1);
    const auto bad = write_config("bad.json", {{"model", {{"name", "death"}}},
                                               {"algorithm", {{"name", "new"}}},
                                               {"budget", 7}});  // not divisible by steps+1
    CHECK(run_cli("run --config " + bad.string() + " --out " + (kTmp / "y").string()) == 1);
    CHECK(run_cli("nonsense-subcommand") == 1);
}

TEST_CASE("corrupted checkpoint state exits with code 2", "[cli]") {
    const auto cfg = write_config("ok.json", {{"model", {{"name", "death"}}},
                                              {"algorithm", {{"name", "new"}, {"steps", 2}}},
                                              {"budget", 300},
                                              {"seed", 9}});
    REQUIRE(run_cli("run --config " + cfg.string() + " --out " + (kTmp / "ck").string()) == 0);
    auto doc = nlohmann::json::parse(std::ifstream(kTmp / "ck" / "checkpoint.json"));
    doc["state"]["records"][0]["mean"] = "corrupted";
    const auto broken = write_config("broken_checkpoint.json", doc);
    CHECK(run_cli("resume --checkpoint " + broken.string() + " --out " +
                  (kTmp / "ck2").string()) == 2);
}

TEST_CASE("resume and top run from the command line", "[cli]") {
    const auto cfg = write_config("resume.json", {{"model", {{"name", "death"}}},
                                                  {"algorithm", {{"name", "new"}, {"steps", 2}}},
                                                  {"budget", 300},
                                                  {"seed", 10}});
    REQUIRE(run_cli("run --config " + cfg.string() + " --out " + (kTmp / "r1").string() +
                    " --max-evals 100") == 0);
    CHECK(run_cli("resume --checkpoint " + (kTmp / "r1" / "checkpoint.json").string() +
                  " --out " + (kTmp / "r2").string()) == 0);
    CHECK(run_cli("top --checkpoint " + (kTmp / "r2" / "checkpoint.json").string() +
                  " --count 3") == 0);
}

TEST_CASE("fig3 runs with its built-in default setup", "[cli]") {
    // thinned grid via config to keep the smoke test quick
    const auto cfg = write_config(
        "fig3.json",
        {{"model", {{"name", "death"}}},
         {"grid", {{"t_min", 0.2}, {"t_max", 10.0}, {"step", 0.2}, {"k", 1}}},
         {"algorithm", {{"name", "new"}}},
         {"budget", 1000}});
    CHECK(run_cli("fig3 --config " + cfg.string() + " --out " + (kTmp / "f3").string()) == 0);
    CHECK(fs::exists(kTmp / "f3" / "fig3.csv"));
}
