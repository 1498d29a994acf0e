#include <doctest.h>

#include "pqbfl/errors.hpp"
#include "pqbfl/replay.hpp"
#include "pqbfl/sim.hpp"
#include "support.hpp"

using namespace pqbfl;
using codec::Json;

namespace {

// One shared three-round run exported to disk.
struct Exported {
    test::TempDir dir{"replay"};
    std::string chain;
    std::string state;

    Exported() {
        sim::ScenarioConfig c;
        c.rounds = 3;
        c.xmss_height = 3;
        c.data.per_class = 40;
        sim::Simulation s(c);
        const auto ms = s.run();
        sim::write_outputs(s, ms, dir.path(), "");
        chain = test::slurp(dir / "chain.jsonl");
        state = test::slurp(dir / "state.json");
    }
};

const Exported& exported() {
    static const Exported e;
    return e;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) out.push_back(line);
    return out;
}

std::string join(const std::vector<std::string>& lines) {
    std::string out;
    for (const auto& l : lines) out += l + '\n';
    return out;
}

replay::Report check(const std::string& chain, const std::string& state = exported().state) {
    std::istringstream in(chain);
    return replay::verify_chain(in, replay::load_state(Json::parse(state)));
}

// Rewrites line `k` of the exported chain through `edit`.
std::string edited(std::size_t k, auto edit) {
    auto lines = lines_of(exported().chain);
    Json j = Json::parse(lines.at(k));
    edit(j);
    lines[k] = j.dump();
    return join(lines);
}

}  // namespace

TEST_CASE("an untouched export verifies clean") {
    const auto r = check(exported().chain);
    CHECK(r.ok());
    CHECK(r.blocks == 4);
    CHECK(r.transactions > 0);
    CHECK(r.vrf_proofs == 3 * 2);
}

TEST_CASE("a valid prefix verifies clean") {
    auto lines = lines_of(exported().chain);
    lines.pop_back();
    const auto r = check(join(lines));
    CHECK(r.ok());
    CHECK(r.blocks == 3);
    CHECK_FALSE(check("").ok());
}

TEST_CASE("edits inside a block are caught by its hash") {
    auto r = check(edited(2, [](Json& j) {
        auto& idx = j["block"]["txs"][1]["sig"]["key_index"];
        idx = std::uint32_t(idx) ^ 1u;
    }));
    REQUIRE_FALSE(r.ok());
    CHECK(r.failure->line == 3);
    CHECK(r.failure->height == 2u);
    CHECK(r.failure->what == "block hash mismatch");
    CHECK(r.blocks == 2);
    r = check(edited(1, [](Json& j) { j["block"]["txs"].erase(0); }));
    REQUIRE_FALSE(r.ok());
    CHECK(r.failure->what == "block hash mismatch");
}

TEST_CASE("a miner-signed block with a forged transaction is pinned to that transaction") {
    auto miner = test::make_keychain(0, 3);
    auto worker = test::make_keychain(1, 3);
    replay::PublicState st;
    st.registry.enroll(miner);
    st.registry.enroll(worker);
    ledger::ModelUpdate u{1, 0, 2, 100, 900000, hash(to_bytes("model"))};
    ledger::Transaction good = ledger::create_tx(1, worker, u);
    ledger::Transaction forged = ledger::create_tx(1, worker, u);
    forged.payload[20] ^= 1;
    for (auto* tx : {&good, &forged}) {
        ledger::Endorsement e{0, tx->digest(), true, ledger::Reason::kAccepted, 900000, {}};
        e.sig = miner.sign(e.payload());
        tx->endorsements.push_back(e);
    }
    ledger::Block b;
    b.round = 0;
    b.miner_id = 0;
    b.prev_hash = ledger::genesis_block().block_hash;
    b.txs = {good, forged};
    b.block_hash = b.compute_hash();
    b.miner_sig = miner.sign(b.block_hash);
    const std::string text = codec::chain_line(0, ledger::genesis_block(), nullptr).dump() + "\n" +
                             codec::chain_line(1, b, nullptr).dump() + "\n";
    std::istringstream in(text);
    const auto r = replay::verify_chain(in, st);
    REQUIRE_FALSE(r.ok());
    CHECK(r.failure->describe() == "line 2, block 1, tx 1: worker signature invalid");
}

TEST_CASE("consensus evidence is rechecked") {
    auto r = check(edited(1, [](Json& j) {
        auto& c = j["consensus"];
        c["winner"] = std::uint32_t(c["winner"]) == 0 ? 1 : 0;
    }));
    REQUIRE_FALSE(r.ok());
    CHECK(r.failure->what == "recorded winner is not the closest candidate");
    r = check(edited(2, [](Json& j) { j["consensus"]["beacon"]["beta"] = std::string(64, '0'); }));
    REQUIRE_FALSE(r.ok());
    CHECK(r.failure->what == "beacon VRF output does not verify");
}

TEST_CASE("reordered or duplicated lines break linkage") {
    auto lines = lines_of(exported().chain);
    std::swap(lines[1], lines[2]);
    CHECK_FALSE(check(join(lines)).ok());
    lines = lines_of(exported().chain);
    lines.insert(lines.begin() + 2, lines[1]);
    CHECK_FALSE(check(join(lines)).ok());
}

TEST_CASE("state files are checked before use") {
    Json st = Json::parse(exported().state);
    st["quorum"] = 3;
    const auto r = check(exported().chain, st.dump());
    REQUIRE_FALSE(r.ok());
    CHECK(r.failure->what == "endorsement quorum not met");

    st = Json::parse(exported().state);
    st["devices"][0]["registry"]["address"] = std::string(64, 'a');
    CHECK_THROWS_AS(replay::load_state(st), ParameterError);
    st = Json::parse(exported().state);
    st["format"] = "other";
    CHECK_THROWS_AS(replay::load_state(st), ParameterError);
    st = Json::parse(exported().state);
    st["devices"][1]["registry"]["trees"][0]["root"] = std::string(64, '0');
    CHECK_THROWS_AS(replay::load_state(st), ParameterError);
}

TEST_CASE("unreadable files are failures, not crashes") {
    const auto& e = exported();
    CHECK(replay::verify_files(e.dir / "chain.jsonl", e.dir / "state.json").ok());
    CHECK_FALSE(replay::verify_files(e.dir / "missing.jsonl", e.dir / "state.json").ok());
    test::spit(e.dir / "bad-state.json", "{");
    const auto r = replay::verify_files(e.dir / "chain.jsonl", e.dir / "bad-state.json");
    REQUIRE_FALSE(r.ok());
    CHECK(r.failure->line == 0);
}
