#include "prescale/cli.hpp"
#include "prescale/simulator.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace prescale;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = 0;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args) {
    args.insert(args.begin(), "prescale");
    std::vector<const char*> argv;
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    std::ostringstream out;
    std::ostringstream err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("prescale_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write(const fs::path& p, const std::string& text) {
    std::ofstream(p, std::ios::binary) << text;
}

const std::string kSmall = R"({"name":"small","profile":[[0,30],[30000,120]],"simulation":{"warmup_ms":10000}})";

} // namespace

TEST_CASE("overrides") {
    nlohmann::json doc{{"simulation", {{"seed", 1}}}};
    apply_override(doc, "simulation.seed=9");
    apply_override(doc, "scaler.cooldowns.up_after_up_ms=null");
    apply_override(doc, "name=plain text");
    CHECK(doc["simulation"]["seed"] == 9);
    CHECK(doc["scaler"]["cooldowns"]["up_after_up_ms"].is_null());
    CHECK(doc["name"] == "plain text");
    CHECK_THROWS_AS(apply_override(doc, "novalue"), ConfigError);
    CHECK_THROWS_AS(apply_override(doc, "=3"), ConfigError);
    CHECK_THROWS_AS(apply_override(doc, "name.inner=3"), ConfigError);
}

TEST_CASE("scenario loading") {
    const auto dir = scratch("load");
    write(dir / "s.json", kSmall);
    const Scenario s = load_scenario((dir / "s.json").string(), {"simulation.seed=5"});
    CHECK(s.name == "small");
    CHECK(s.sim.seed == 5);
    CHECK(load_scenario("spike").name == "spike");
    CHECK_THROWS_AS(load_scenario("nowhere"), ConfigError);
    write(dir / "bad.json", "{ not json");
    CHECK_THROWS_AS(load_scenario((dir / "bad.json").string()), ConfigError);
}

TEST_CASE("simulate writes its outputs") {
    const auto dir = scratch("sim");
    write(dir / "s.json", kSmall);
    const auto r = cli({"simulate", "--scenario", (dir / "s.json").string(), "--out-dir", (dir / "out").string()});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("small predictive seed=1") == 0);
    for (const char* f : {"trace.csv", "summary.json", "batches.jsonl", "decisions.csv"}) {
        CHECK(fs::exists(dir / "out" / f));
    }
    const auto summary = nlohmann::json::parse(slurp(dir / "out" / "summary.json"));
    CHECK(summary.contains("success_rate"));
    CHECK(slurp(dir / "out" / "trace.csv").rfind("time_ms,", 0) == 0);

    const auto rep = cli({"replay", "--log", (dir / "out" / "batches.jsonl").string()});
    CHECK(rep.code == kExitOk);
    CHECK(rep.out == slurp(dir / "out" / "decisions.csv"));
}

TEST_CASE("the seed changes the run") {
    const auto dir = scratch("seed");
    write(dir / "s.json", kSmall);
    const auto hash_of = [&](const std::string& seed) {
        const auto out = dir / ("out" + seed);
        const auto r = cli({"simulate", "--scenario", (dir / "s.json").string(), "--seed", seed, "--out-dir",
                            out.string()});
        REQUIRE(r.code == kExitOk);
        return std::hash<std::string>{}(slurp(out / "batches.jsonl"));
    };
    CHECK(hash_of("1") == hash_of("1"));
    CHECK(hash_of("1") != hash_of("2"));
}

TEST_CASE("configuration errors exit with 2") {
    const auto dir = scratch("bad");
    write(dir / "typo.json", R"({"profile":[[0,1],[1000,1]],"scaler":{"treshold":0.7}})");
    auto r = cli({"simulate", "--scenario", (dir / "typo.json").string(), "--out-dir", (dir / "o").string()});
    CHECK(r.code == kExitConfig);
    CHECK(r.err.find("scenario.scaler.treshold") != std::string::npos);

    r = cli({"simulate", "--scenario", "ramp", "--scaler", "psychic", "--out-dir", (dir / "o").string()});
    CHECK(r.code == kExitConfig);
    r = cli({"simulate", "--scenario", "ramp", "--override", "simulation.service_jitter=2", "--out-dir",
             (dir / "o").string()});
    CHECK(r.code == kExitConfig);
    r = cli({"simulate"});
    CHECK(r.code == kExitConfig);
    r = cli({"teleport"});
    CHECK(r.code == kExitConfig);
    CHECK(cli({"--help"}).code == kExitOk);

    write(dir / "cfg.json", R"({"threshold":"high"})");
    write(dir / "empty.jsonl", "");
    r = cli({"replay", "--log", (dir / "empty.jsonl").string(), "--config", (dir / "cfg.json").string()});
    CHECK(r.code == kExitConfig);
}

TEST_CASE("a corrupt log exits with 3 and names the line") {
    const auto dir = scratch("corrupt");
    write(dir / "log.jsonl", "{\"type\":\"cycle\",\"time_ms\":1}\n\n{\"type\":\"batch\",\"samples\":7}\n");
    const auto r = cli({"replay", "--log", (dir / "log.jsonl").string()});
    CHECK(r.code == kExitRuntime);
    CHECK(r.err.find("line 3") != std::string::npos);
    CHECK(cli({"replay", "--log", (dir / "missing.jsonl").string()}).code == kExitRuntime);
}

TEST_CASE("replay uses an explicit config over the header") {
    const auto dir = scratch("cfg");
    write(dir / "s.json", kSmall);
    REQUIRE(cli({"simulate", "--scenario", (dir / "s.json").string(), "--out-dir", (dir / "o").string()}).code ==
            kExitOk);
    write(dir / "cfg.json", R"({"threshold":0.05,"min_instances":4,"max_instances":20})");
    const auto r =
        cli({"replay", "--log", (dir / "o" / "batches.jsonl").string(), "--config", (dir / "cfg.json").string()});
    CHECK(r.code == kExitOk);
    CHECK(r.out != slurp(dir / "o" / "decisions.csv"));
}

TEST_CASE("compare on zero traffic gives identical columns") {
    const auto dir = scratch("cmp");
    const auto r = cli({"compare", "--scenario", "zero", "--out-dir", dir.string()});
    REQUIRE(r.code == kExitOk);
    CHECK(r.out.find("predictive") != std::string::npos);
    const auto doc = nlohmann::json::parse(slurp(dir / "compare.json"));
    REQUIRE(doc.contains("predictive"));
    CHECK(doc["predictive"] == doc["reactive-elu"]);
    CHECK(doc["predictive"] == doc["reactive-cpu"]);
    CHECK(doc["predictive"]["final_pods"] == 4);
}
