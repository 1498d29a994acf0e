#include <doctest.h>

#include <cstdlib>

#include "pqbfl/cli.hpp"
#include "support.hpp"

using namespace pqbfl;

namespace {

struct Result {
    int code = 0;
    std::string out;
    std::string err;
};

Result invoke(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

// Small, fast run flags shared by the tests.
std::vector<std::string> quick(const std::filesystem::path& out, std::string rounds = "3", std::string seed = "7") {
    return {"run", "--rounds", rounds, "--seed", seed, "--xmss-height", "3", "--per-class", "40", "--out", out.string()};
}

}  // namespace

TEST_CASE("a missing config file is a config error naming the file") {
    const auto r = invoke({"run", "--config", "/nonexistent/bflsim.toml"});
    CHECK(r.code == cli::kExitConfig);
    CHECK(r.err.find("/nonexistent/bflsim.toml") != std::string::npos);
}

TEST_CASE("unknown flags and config keys are rejected") {
    CHECK(invoke({"run", "--bogus", "1"}).code == cli::kExitConfig);
    CHECK(invoke({}).code == cli::kExitConfig);
    test::TempDir dir("cli-config");
    test::spit(dir / "bad.toml", "rounds = 2\nbogus = 1\n");
    const auto r = invoke({"run", "--config", (dir / "bad.toml").string()});
    CHECK(r.code == cli::kExitConfig);
    CHECK(r.err.find("bogus") != std::string::npos);
    CHECK(invoke({"run", "--ratio", "5:2"}).code == cli::kExitConfig);
    CHECK(invoke({"run", "--lr", "-1"}).code == cli::kExitConfig);
    CHECK(invoke({"run", "--scenario", "best"}).code == cli::kExitConfig);
}

TEST_CASE("runs are reproducible and echo a reloadable config") {
    test::TempDir dir("cli-run");
    const auto a = invoke(quick(dir / "a"));
    REQUIRE(a.code == 0);
    const auto b = invoke(quick(dir / "b"));
    REQUIRE(b.code == 0);
    for (const char* f : {"metrics.csv", "chain.jsonl"}) {
        CHECK(test::slurp(dir / "a" / f) == test::slurp(dir / "b" / f));
    }
    const auto begin = a.out.find("# effective config\n");
    const auto end = a.out.find("# end config\n");
    REQUIRE(begin != std::string::npos);
    REQUIRE(end != std::string::npos);
    const std::string echoed = a.out.substr(begin + 19, end - begin - 19);
    CHECK(echoed.find("seed=7") != std::string::npos);
    test::spit(dir / "echoed.toml", echoed);
    const auto c = invoke({"run", "--config", (dir / "echoed.toml").string(), "--out", (dir / "c").string()});
    REQUIRE(c.code == 0);
    CHECK(test::slurp(dir / "c" / "metrics.csv") == test::slurp(dir / "a" / "metrics.csv"));

    std::istringstream csv(test::slurp(dir / "a" / "metrics.csv"));
    std::string line;
    std::getline(csv, line);
    while (std::getline(csv, line)) CHECK(line.find(",5,2,1,") != std::string::npos);
}

TEST_CASE("flags override the config file") {
    test::TempDir dir("cli-override");
    test::spit(dir / "c.toml", "rounds = 9\nseed = 3\n");
    const auto r = invoke({"show-config", "--config", (dir / "c.toml").string(), "--rounds", "2"});
    CHECK(r.code == 0);
    CHECK(r.out.find("rounds=2\n") != std::string::npos);
    CHECK(r.out.find("seed=3\n") != std::string::npos);
    const auto d = invoke({"show-config"});
    CHECK(d.out.find("rounds=100\n") != std::string::npos);
    CHECK(d.out.find("devices=8\n") != std::string::npos);
}

TEST_CASE("the output directory defaults from the environment") {
    test::TempDir dir("cli-env");
    ::setenv(cli::kOutEnv, (dir / "env-out").c_str(), 1);
    auto args = quick(dir / "unused", "1");
    args.resize(args.size() - 2);
    const auto r = invoke(args);
    ::unsetenv(cli::kOutEnv);
    CHECK(r.code == 0);
    CHECK(std::filesystem::exists(dir / "env-out" / "state.json"));
}

TEST_CASE("verify-chain exit codes") {
    test::TempDir dir("cli-verify");
    REQUIRE(invoke(quick(dir / "run", "4")).code == 0);
    const auto chain = dir / "run" / "chain.jsonl";
    const auto state = dir / "run" / "state.json";
    auto r = invoke({"verify-chain", "--chain", chain.string(), "--state", state.string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("0 failures") != std::string::npos);
    CHECK(invoke({"verify-chain", "--out", (dir / "run").string()}).code == 0);

    const std::string text = test::slurp(chain);
    std::string flipped = text;
    flipped[text.size() / 2] ^= 0x04;
    test::spit(dir / "flipped.jsonl", flipped);
    r = invoke({"verify-chain", "--chain", (dir / "flipped.jsonl").string(), "--state", state.string()});
    CHECK(r.code == cli::kExitVerify);
    CHECK(r.err.find("line ") != std::string::npos);

    std::string prefix = text.substr(0, text.rfind('\n', text.size() - 2) + 1);
    test::spit(dir / "prefix.jsonl", prefix);
    r = invoke({"verify-chain", "--chain", (dir / "prefix.jsonl").string(), "--state", state.string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("0 failures") != std::string::npos);
    CHECK(r.out.find("warning: chain holds 3 of 4") != std::string::npos);

    CHECK(invoke({"verify-chain", "--chain", (dir / "none").string(), "--state", state.string()}).code ==
          cli::kExitRuntime);
}

TEST_CASE("keygen-bench reports key counts and exact hash-call ratios") {
    auto r = invoke({"keygen-bench", "--heights", "2,4"});
    REQUIRE(r.code == 0);
    std::istringstream in(r.out);
    std::string header, row2, row4, extra;
    std::getline(in, header);
    std::getline(in, row2);
    std::getline(in, row4);
    CHECK_FALSE(std::getline(in, extra));
    unsigned h = 0, keys = 0;
    unsigned long long calls = 0;
    double ms = 0;
    char ratio[32] = {};
    REQUIRE(std::sscanf(row2.c_str(), "%u %u %llu %lf %31s", &h, &keys, &calls, &ms, ratio) == 5);
    CHECK(keys == 4);
    CHECK(calls == 4 * 2080ull);
    CHECK(std::string(ratio) == "-");
    REQUIRE(std::sscanf(row4.c_str(), "%u %u %llu %lf %31s", &h, &keys, &calls, &ms, ratio) == 5);
    CHECK(keys == 16);
    CHECK(std::string(ratio) == "4.0000");

    r = invoke({"keygen-bench", "--heights", "3"});
    CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 2);
    CHECK(invoke({"keygen-bench", "--heights", "1"}).code == cli::kExitConfig);
}

TEST_CASE("sig-bench verifies what it signs") {
    const auto r = invoke({"sig-bench", "--height", "2", "--count", "5"});
    CHECK(r.code == 0);
    CHECK(r.out.find("5/5 accepted") != std::string::npos);
    CHECK(r.out.find("2 trees used") != std::string::npos);
}

TEST_CASE("help exits cleanly") {
    const auto r = invoke({"--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("verify-chain") != std::string::npos);
}
