#include <doctest.h>

#include "pqbfl/codec.hpp"
#include "pqbfl/errors.hpp"
#include "pqbfl/sim.hpp"

using namespace pqbfl;
using codec::Json;

namespace {

const sim::Simulation& two_rounds() {
    static sim::Simulation s{[] {
        sim::ScenarioConfig c;
        c.rounds = 2;
        c.xmss_height = 3;
        c.data.per_class = 40;
        return c;
    }()};
    static const bool ran = (s.run(), true);
    (void)ran;
    return s;
}

}  // namespace

TEST_CASE("blocks survive a json round trip byte for byte") {
    const auto& s = two_rounds();
    for (const auto& block : s.chain().blocks()) {
        const Json j = codec::to_json(block);
        const ledger::Block back = codec::block_from_json(Json::parse(j.dump()));
        CHECK(back.compute_hash() == block.block_hash);
        CHECK(back.block_hash == block.block_hash);
        CHECK(codec::to_json(back) == j);
        REQUIRE(back.txs.size() == block.txs.size());
        for (std::size_t k = 0; k < back.txs.size(); ++k) {
            CHECK(back.txs[k].digest() == block.txs[k].digest());
            CHECK(back.txs[k].endorsements.size() == block.txs[k].endorsements.size());
        }
    }
    CHECK(codec::to_json(s.chain().blocks().front()).at("miner_sig").is_null());
}

TEST_CASE("consensus evidence and registry records round-trip") {
    const auto& s = two_rounds();
    for (const auto& c : s.consensus()) {
        const ledger::ConsensusRecord back = codec::consensus_from_json(codec::to_json(c));
        CHECK(back.winner == c.winner);
        CHECK(back.beacon.unit_value == c.beacon.unit_value);
        REQUIRE(back.candidates.size() == c.candidates.size());
        CHECK(back.candidates[0].second.wots_sig.sig_chains == c.candidates[0].second.wots_sig.sig_chains);
    }
    for (const auto& [id, rec] : s.registry().records()) {
        const auto back = codec::registry_record_from_json(codec::to_json(rec));
        CHECK(back.signer_id == id);
        CHECK(back.address == rec.address);
        CHECK(back.certifier_pk == rec.certifier_pk);
        CHECK(back.trees.size() == rec.trees.size());
    }
    const auto& pk = s.beacon_keys().front();
    CHECK(codec::vrf_public_key_from_json(codec::to_json(pk)) == pk);
}

TEST_CASE("decoders reject missing fields, wrong types, and non-canonical hex") {
    const auto& s = two_rounds();
    const Json good = codec::to_json(s.chain().blocks().at(1));
    Json j = good;
    j.erase("prev_hash");
    CHECK_THROWS_AS(codec::block_from_json(j), ParameterError);
    j = good;
    j["round"] = "one";
    CHECK_THROWS_AS(codec::block_from_json(j), ParameterError);
    j = good;
    std::string h = j["prev_hash"];
    for (char& ch : h) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    j["prev_hash"] = h;
    if (h != good["prev_hash"]) CHECK_THROWS_AS(codec::block_from_json(j), ParameterError);
    j = good;
    j["prev_hash"] = std::string(good["prev_hash"]).substr(2);
    CHECK_THROWS_AS(codec::block_from_json(j), ParameterError);
    CHECK_THROWS_AS(codec::block_from_json(Json::array()), ParameterError);
}

TEST_CASE("chain lines carry height, block, and consensus") {
    const auto& s = two_rounds();
    const Json g = codec::chain_line(0, s.chain().blocks()[0], nullptr);
    CHECK(g.at("height") == 0);
    CHECK(g.at("consensus").is_null());
    const Json l = codec::chain_line(1, s.chain().blocks()[1], &s.consensus()[0]);
    CHECK(l.at("consensus").at("winner") == s.chain().blocks()[1].miner_id);
    // Stable field order.
    std::vector<std::string> keys;
    for (const auto& [k, v] : l.items()) keys.push_back(k);
    CHECK(keys == std::vector<std::string>{"height", "block", "consensus"});
}
