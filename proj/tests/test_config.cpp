#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "fracheat/config.hpp"
#include "fracheat/errors.hpp"
#include "fracheat/manifest.hpp"

using namespace fracheat;
namespace fs = std::filesystem;

namespace {

std::string bin() {
    const char* b = std::getenv("FRACHEAT_BIN");
    return b ? b : "fracheat";
}

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("fracheat_cfg_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void put(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

int run(const std::string& args, const std::string& env = "") {
    const int s = std::system((env + " " + bin() + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
}

}  // namespace

TEST_CASE("round trip") {
    const std::string text = "# model\nspectrum = riesz:0.5  # gamma\nH=0.6\n\nd = 2\ntarget = ball:0,0:0.5\n"
                             "target = box:0,0:1,1\nn_modes = 32\n";
    const auto a = RunConfig::parse(text);
    const auto b = RunConfig::parse(a.serialize());
    CHECK(a == b);
    CHECK(a.serialize() == b.serialize());
    CHECK(a.hash() == b.hash());
    CHECK(a.hash() == sha256_hex(a.serialize()));
    CHECK(a.targets().size() == 2);
    CHECK(a.model().spec_string() == "riesz:0.5");
    CHECK(a.sim_config().d == 2);
    CHECK(a.sim_config().n_x == 65);
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("line and field diagnostics") {
    auto msg = [](const std::string& text, auto&& f) {
        try {
            f(RunConfig::parse(text, "run.cfg"));
        } catch (const DomainError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    auto none = [](const RunConfig&) {};
    CHECK(msg("H = 0.5\nnonsense\n", none).find("run.cfg:2:") == 0);
    CHECK(msg("H = 0.5\nH = 0.6\n", none).find("duplicate") != std::string::npos);
    CHECK(msg("a b = 1\n", none).find("run.cfg:1:") == 0);
    const auto bad = msg("d = 2\nH = half\n", [](const RunConfig& c) { c.get_double("H", 0); });
    CHECK(bad.find("run.cfg:2: field 'H'") == 0);
    const auto list = msg("I = 0.5,x\n", [](const RunConfig& c) { c.get_list("I", {}); });
    CHECK(list.find("run.cfg:1: field 'I'") == 0);
    CHECK(msg("spectrum = pink\n", [](const RunConfig& c) { c.model(); }).find("run.cfg:1: field 'spectrum'") == 0);
}

TEST_CASE("nonexistent solution exits 2") {
    const auto dir = scratch("spec");
    put(dir / "c.cfg", "spectrum = white\nH = 0.25\n");
    CHECK(run("spectrum --config " + (dir / "c.cfg").string() + " --out " + (dir / "o").string()) == 2);
    const auto out = dir / "stdout.txt";
    std::system((bin() + " spectrum --config " + (dir / "c.cfg").string() + " --out " + (dir / "o").string() + " > " +
                 out.string() + " 2>/dev/null")
                    .c_str());
    CHECK(slurp(out).find("nonexistent: H <= 1/4") != std::string::npos);
    const auto m = nlohmann::json::parse(slurp(dir / "o" / "manifest.json"));
    CHECK(m["exit_code"] == 2);

    put(dir / "ok.cfg", "spectrum = white\nH = 0.4\n");
    CHECK(run("spectrum --config " + (dir / "ok.cfg").string() + " --out " + (dir / "p").string()) == 0);
    CHECK(run("spectrum --config " + (dir / "missing.cfg").string() + " --out " + (dir / "q").string()) == 2);
    put(dir / "bad.cfg", "spectrum = white\nH 0.4\n");
    CHECK(run("spectrum --config " + (dir / "bad.cfg").string() + " --out " + (dir / "q").string()) == 2);
}

TEST_CASE("numerical failure exits 1") {
    const auto dir = scratch("num");
    // dilation slack above the target size
    put(dir / "c.cfg", "d = 2\nn_modes = 16\nreplicas = 10\ntarget = ball:0,0:0.001\n");
    CHECK(run("hit --config " + (dir / "c.cfg").string() + " --out " + (dir / "o").string()) == 1);
}

TEST_CASE("metric output is byte-identical across runs and thread counts") {
    const auto dir = scratch("metric");
    put(dir / "c.cfg", "spectrum = riesz:0.5\nH = 0.5\nmetric_nt = 5\nmetric_nx = 7\n");
    const auto cfg = (dir / "c.cfg").string();
    REQUIRE(run("metric --config " + cfg + " --out " + (dir / "a").string()) == 0);
    REQUIRE(run("metric --config " + cfg + " --threads 3 --out " + (dir / "b").string()) == 0);
    const auto a = slurp(dir / "a" / "metric.csv");
    CHECK(a.rfind("t1,x1,t2,x2,gamma_sq,delta,ratio\n", 0) == 0);
    CHECK(a == slurp(dir / "b" / "metric.csv"));
    const auto m = nlohmann::json::parse(slurp(dir / "b" / "manifest.json"));
    CHECK(m["threads"] == 3);
}

TEST_CASE("manifest lists every output with its checksum") {
    const auto dir = scratch("manifest");
    put(dir / "c.cfg", "d = 1\nn_modes = 8\nn_t = 3\nreplicas = 2\nseed = 4\n");
    REQUIRE(run("simulate --config " + (dir / "c.cfg").string() + " --seed 9 --out " + (dir / "o").string()) == 0);
    const auto m = nlohmann::json::parse(slurp(dir / "o" / "manifest.json"));
    CHECK(m["seed"] == 9);
    CHECK(m["version"] == kVersion);
    CHECK(m["files"].size() == 3);
    for (const auto& f : m["files"]) CHECK(f["sha256"] == sha256_file((dir / "o" / f["path"].get<std::string>()).string()));
    const auto used = RunConfig::load((dir / "o" / "config.txt").string());
    CHECK(used.get_u64("seed", 0) == 9);
    CHECK(m["config_hash"] == used.hash());
    CHECK_FALSE(fs::exists(dir / "o" / "manifest.json.tmp"));
}

TEST_CASE("environment variables yield to flags") {
    const auto dir = scratch("env");
    put(dir / "c.cfg", "d = 1\nn_modes = 8\nn_t = 3\n");
    const auto env = "FRACHEAT_CONFIG=" + (dir / "c.cfg").string() + " FRACHEAT_SEED=5 FRACHEAT_OUT=" + (dir / "e").string();
    REQUIRE(run("simulate", env) == 0);
    CHECK(nlohmann::json::parse(slurp(dir / "e" / "manifest.json"))["seed"] == 5);
    REQUIRE(run("simulate --seed 6 --out " + (dir / "f").string(), env) == 0);
    CHECK(nlohmann::json::parse(slurp(dir / "f" / "manifest.json"))["seed"] == 6);
    CHECK_FALSE(fs::exists(dir / "e" / "field_1.csv"));
    CHECK(slurp(dir / "e" / "field_0.csv") != slurp(dir / "f" / "field_0.csv"));
}

TEST_CASE("verify-all subset writes verdicts") {
    const auto dir = scratch("verify");
    put(dir / "c.cfg", "criteria = 2,7,12\n");
    CHECK(run("verify-all --config " + (dir / "c.cfg").string() + " --out " + (dir / "o").string()) == 0);
    const auto m = nlohmann::json::parse(slurp(dir / "o" / "manifest.json"));
    REQUIRE(m["checks"].size() == 3);
    for (const auto& c : m["checks"]) CHECK(c["pass"] == true);
}
