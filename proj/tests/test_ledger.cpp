#include <doctest.h>

#include "pqbfl/errors.hpp"
#include "pqbfl/ledger.hpp"
#include "support.hpp"

using namespace pqbfl;
using namespace pqbfl::ledger;

namespace {

struct Fixture {
    hybrid::Registry registry;
    std::vector<hybrid::HybridKeychain> keys;
    fl::LabeledDataset data = fl::make_global_dataset(10, 8, 40, 1);
    fl::Model good;

    Fixture() {
        keys.reserve(4);
        for (DeviceId i = 0; i < 4; ++i) keys.push_back(test::make_keychain(i, 4));
        for (auto& k : keys) registry.enroll(k);
        good = fl::Model::zeros(10, 8);
        for (int it = 0; it < 200; ++it) {
            const auto lg = fl::loss_and_gradient(good, data);
            for (std::size_t k = 0; k < good.weights.size(); ++k) good.weights[k] -= 0.5 * lg.gradient[k];
        }
    }

    Transaction tx_from(DeviceId worker, const fl::Model& m, std::uint64_t round = 0) {
        ModelUpdate u{worker, round, 2, 100, to_ppm(0.9), model_digest(m)};
        return create_tx(worker, keys[worker], u);
    }
};

}  // namespace

TEST_CASE("model update payload round-trips") {
    ModelUpdate u{3, 17, 2, 100, 912345, hash(to_bytes("w"))};
    const Bytes b = u.encode();
    CHECK(b.size() == ModelUpdate::kEncodedSize);
    const ModelUpdate d = ModelUpdate::decode(b);
    CHECK(d.worker == 3);
    CHECK(d.round == 17);
    CHECK(d.train_accuracy_ppm == 912345);
    CHECK(d.weights_digest == u.weights_digest);
    CHECK_THROWS_AS(ModelUpdate::decode(Bytes(10)), ParameterError);
    CHECK(to_ppm(0.5) == 500000);
    CHECK(from_ppm(250000) == 0.25);
}

TEST_CASE("transactions verify and account their bytes") {
    Fixture f;
    Transaction tx = f.tx_from(1, f.good);
    CHECK(verify_tx_signature(tx, f.registry));
    CHECK(tx.byte_size() == tx.wire().size());
    CHECK(tx.byte_size() == ModelUpdate::kEncodedSize + hybrid::hybrid_crypto_bytes(4));
    tx.payload[5] ^= 1;
    CHECK_FALSE(verify_tx_signature(tx, f.registry));
    CHECK_THROWS_AS(create_tx(2, f.keys[1], ModelUpdate{2}), ParameterError);
}

TEST_CASE("validator verdicts") {
    Fixture f;
    const Transaction honest = f.tx_from(1, f.good);
    const auto pass = validate_tx(2, f.keys[2], honest, &f.good, f.data, 0.5, f.registry);
    CHECK(pass.endorsement.verdict);
    CHECK(pass.endorsement.reason == Reason::kAccepted);
    CHECK(verify_endorsement(pass.endorsement, honest, f.registry));

    const fl::Model zero = fl::Model::zeros(10, 8);
    const Transaction lazy = f.tx_from(1, zero);
    const auto low = validate_tx(2, f.keys[2], lazy, &zero, f.data, 0.5, f.registry);
    CHECK_FALSE(low.endorsement.verdict);
    CHECK(low.endorsement.reason == Reason::kLowAccuracy);

    Transaction forged = f.tx_from(1, f.good);
    forged.sig.xmss_sig.auth_path[0][0] ^= 0x80;
    const auto sig_fail = validate_tx(2, f.keys[2], forged, &f.good, f.data, 0.5, f.registry);
    CHECK_FALSE(sig_fail.endorsement.verdict);
    CHECK(sig_fail.endorsement.reason == Reason::kSignature);

    const auto missing = validate_tx(2, f.keys[2], honest, &zero, f.data, 0.5, f.registry);
    CHECK(missing.endorsement.reason == Reason::kModelMismatch);

    Endorsement moved = pass.endorsement;
    CHECK_FALSE(verify_endorsement(moved, lazy, f.registry));
    moved.verdict = false;
    CHECK_FALSE(verify_endorsement(moved, honest, f.registry));
}

TEST_CASE("mining re-verifies and drops bad transactions") {
    Fixture f;
    Chain chain;
    const auto empty = mine_block(3, f.keys[3], 0, {}, chain.tip_hash(), f.registry);
    CHECK(empty.block.txs.empty());
    CHECK(empty.block.prev_hash == chain.tip_hash());

    Transaction ok = f.tx_from(0, f.good);
    ok.endorsements.push_back(validate_tx(2, f.keys[2], ok, &f.good, f.data, 0.5, f.registry).endorsement);
    Transaction unendorsed = f.tx_from(1, f.good);
    Transaction tampered = f.tx_from(1, f.good);
    tampered.endorsements.push_back(
        validate_tx(2, f.keys[2], tampered, &f.good, f.data, 0.5, f.registry).endorsement);
    tampered.payload[0] ^= 1;
    const std::vector<Transaction> txs{ok, unendorsed, tampered};
    const auto mined = mine_block(3, f.keys[3], 0, txs, chain.tip_hash(), f.registry);
    REQUIRE(mined.block.txs.size() == 1);
    CHECK(mined.dropped.size() == 2);
    CHECK(mined.dropped[0].index == 1);

    Block changed = mined.block;
    changed.txs[0].payload.back() ^= 1;
    CHECK(changed.compute_hash() != mined.block.block_hash);

    chain.append(mined.block, 3, f.registry);
    CHECK(chain.size() == 2);
}

TEST_CASE("winner selection") {
    const MinerCandidate solo[] = {{4, 0.3}};
    CHECK(select_winner(solo, 0.9) == 4);
    const MinerCandidate three[] = {{0, 0.2}, {1, 0.6}, {2, 0.9}};
    CHECK(select_winner(three, 0.55) == 1);
    const MinerCandidate tie[] = {{5, 0.6}, {2, 0.4}};
    CHECK(select_winner(tie, 0.5) == 2);
    CHECK_THROWS_AS(select_winner({}, 0.5), ConsensusError);
}

TEST_CASE("append accepts only the winner with valid linkage") {
    Fixture f;
    Chain chain;
    const Digest genesis_hash = chain.tip_hash();
    CHECK(chain.tip().prev_hash == Digest{});
    CHECK(chain.tip().txs.empty());

    const auto loser = mine_block(2, f.keys[2], 0, {}, genesis_hash, f.registry);
    const auto winner = mine_block(3, f.keys[3], 0, {}, genesis_hash, f.registry);
    CHECK_THROWS_AS(chain.append(loser.block, 3, f.registry), AppendRejected);
    chain.append(winner.block, 3, f.registry);

    const auto stale = mine_block(3, f.keys[3], 1, {}, genesis_hash, f.registry);
    CHECK_THROWS_AS(chain.append(stale.block, 3, f.registry), AppendRejected);

    auto forged = mine_block(3, f.keys[3], 1, {}, chain.tip_hash(), f.registry);
    forged.block.miner_sig.xmss_sig.wots_sig.sig_chains[0][0] ^= 1;
    CHECK_THROWS_AS(chain.append(forged.block, 3, f.registry), AppendRejected);

    Chain replica;
    replica.append(winner.block, 3, f.registry);
    CHECK(replica == chain);
    CHECK(chain.size() == 2);
}

TEST_CASE("rewards") {
    StakeBook book{{0, 0.0}, {1, 1.0}, {2, 0.5}, {3, 0.0}};
    RoundRewards r;
    r.workers.push_back({0, 2, 100});
    r.validations.emplace_back(2, 3);
    r.winning_miner = 3;
    const StakeBook after = apply_rewards(book, r);
    CHECK(after.at(0) == doctest::Approx(0.2));
    CHECK(after.at(1) == 1.0);
    CHECK(after.at(2) == doctest::Approx(0.53));
    CHECK(after.at(3) == doctest::Approx(0.1));
    StakeBook running = book;
    for (int i = 0; i < 100; ++i) {
        const StakeBook next = apply_rewards(running, r);
        for (const auto& [id, s] : running) CHECK(next.at(id) >= s);
        running = next;
    }
}
