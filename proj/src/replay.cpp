#include "pqbfl/replay.hpp"

#include <fstream>

#include "pqbfl/errors.hpp"

namespace pqbfl::replay {

using codec::Json;

namespace {

const Json& member(const Json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw ParameterError(std::string("state: missing field '") + key + "'");
    return j.at(key);
}

// Signals a verification failure at the current coordinates.
struct Reject {
    std::optional<std::size_t> tx;
    std::string what;
};

[[noreturn]] void reject(std::string what, std::optional<std::size_t> tx = std::nullopt) {
    throw Reject{tx, std::move(what)};
}

bool signature_ok(const hybrid::HybridSignature& sig, ByteView payload, const hybrid::Registry& registry) {
    try {
        return hybrid::hybrid_verify(sig, payload, registry);
    } catch (const LookupError&) {
        return false;
    }
}

const vrf::VrfPublicKey& vrf_key(const PublicState& state, DeviceId id, std::uint64_t round) {
    const auto it = state.vrf_keys.find({id, round});
    if (it == state.vrf_keys.end()) {
        reject("no VRF key for device " + std::to_string(id) + " in round " + std::to_string(round));
    }
    return it->second;
}

void check_consensus(const ledger::Block& block, const ledger::ConsensusRecord& c, const PublicState& state,
                     Report& report) {
    if (c.round != block.round) reject("consensus record is for another round");
    if (c.candidates.empty()) reject("consensus record lists no candidate miners");
    const ByteView alpha(block.prev_hash);
    if (!vrf::vrf_verify(vrf_key(state, ledger::kBeaconId, c.round), alpha, c.beacon)) {
        reject("beacon VRF output does not verify");
    }
    ++report.vrf_proofs;
    std::vector<ledger::MinerCandidate> pool;
    for (const auto& [id, out] : c.candidates) {
        if (!vrf::vrf_verify(vrf_key(state, id, c.round), alpha, out)) {
            reject("VRF output of candidate miner " + std::to_string(id) + " does not verify");
        }
        ++report.vrf_proofs;
        pool.push_back({id, out.unit_value});
    }
    const DeviceId winner = ledger::select_winner(pool, c.beacon.unit_value);
    if (winner != c.winner) reject("recorded winner is not the closest candidate");
    if (winner != block.miner_id) reject("block was not mined by the round winner");
}

void check_block(const ledger::Block& block, const Digest& tip, std::uint64_t height,
                 const PublicState& state, Report& report) {
    if (block.prev_hash != tip) reject("prev_hash does not link to the previous block");
    if (block.round + 1 != height) reject("block round does not match its height");
    if (block.compute_hash() != block.block_hash) reject("block hash mismatch");
    if (block.miner_sig.signer_id != block.miner_id) reject("miner signature names another signer");
    if (!signature_ok(block.miner_sig, block.block_hash, state.registry)) reject("miner signature invalid");
    ++report.signatures;
    for (std::size_t k = 0; k < block.txs.size(); ++k) {
        const ledger::Transaction& tx = block.txs[k];
        if (tx.round != block.round) reject("transaction is from another round", k);
        if (!ledger::verify_tx_signature(tx, state.registry)) reject("worker signature invalid", k);
        ++report.signatures;
        for (const ledger::Endorsement& e : tx.endorsements) {
            if (!ledger::verify_endorsement(e, tx, state.registry)) {
                reject("endorsement by validator " + std::to_string(e.validator_id) + " invalid", k);
            }
            ++report.signatures;
        }
        if (tx.positive_endorsements() < state.quorum) reject("endorsement quorum not met", k);
        ++report.transactions;
    }
}

}  // namespace

PublicState load_state(const Json& j) {
    if (!j.is_object()) throw ParameterError("state: not a JSON object");
    const Json& format = member(j, "format");
    if (!format.is_string() || format.get<std::string>() != "bflsim-state/1") {
        throw ParameterError("state: unsupported format");
    }
    PublicState st;
    const Json& quorum = member(j, "quorum");
    const Json& rounds = member(j, "rounds_completed");
    if (!quorum.is_number_unsigned() || !rounds.is_number_unsigned()) {
        throw ParameterError("state: quorum and rounds_completed must be unsigned integers");
    }
    st.quorum = quorum.get<std::size_t>();
    st.rounds_completed = rounds.get<std::uint64_t>();

    auto add_keys = [&st](DeviceId id, const Json& keys) {
        if (!keys.is_array()) throw ParameterError("state: VRF keys must be an array");
        for (const Json& k : keys) {
            vrf::VrfPublicKey pk = codec::vrf_public_key_from_json(k);
            if (!st.vrf_keys.emplace(std::pair{id, pk.round}, pk).second) {
                throw ParameterError("state: duplicate VRF key for device " + std::to_string(id));
            }
        }
    };

    const Json& devices = member(j, "devices");
    if (!devices.is_array()) throw ParameterError("state: devices must be an array");
    for (const Json& d : devices) {
        const Json& id_field = member(d, "id");
        if (!id_field.is_number_unsigned()) throw ParameterError("state: device id must be an unsigned integer");
        const auto id = id_field.get<DeviceId>();
        const Json& reg = member(d, "registry");
        if (!reg.is_null()) {
            hybrid::RegistryRecord rec = codec::registry_record_from_json(reg);
            if (rec.signer_id != id) throw ParameterError("state: registry record filed under another device");
            if (rec.address != hash(rec.certifier_pk)) {
                throw ParameterError("state: address of device " + std::to_string(id) + " is not hash(certifier_pk)");
            }
            const auto certifier = st.registry.certifier_for(rec);
            for (const auto& t : rec.trees) {
                if (!certifier->verify(rec.certifier_pk, hybrid::certification_message(id, t.tree_no, t.root),
                                       t.d_signature)) {
                    throw ParameterError("state: certified root " + std::to_string(t.tree_no) + " of device " +
                                         std::to_string(id) + " fails its certifier check");
                }
            }
            st.registry.publish(std::move(rec));
        }
        add_keys(id, member(d, "vrf_keys"));
    }
    add_keys(ledger::kBeaconId, member(j, "beacon_vrf_keys"));
    return st;
}

std::string Failure::describe() const {
    std::string s = "line " + std::to_string(line);
    if (height) s += ", block " + std::to_string(*height);
    if (tx) s += ", tx " + std::to_string(*tx);
    return s + ": " + what;
}

Report verify_chain(std::istream& chain, const PublicState& state) {
    Report report;
    Digest tip{};
    std::string line;
    std::size_t line_no = 0;
    std::uint64_t height = 0;
    while (std::getline(chain, line)) {
        ++line_no;
        if (line.empty()) continue;
        Failure where{line_no, std::nullopt, std::nullopt, {}};
        try {
            const Json j = Json::parse(line);
            const Json& h = j.at("height");
            if (!h.is_number_unsigned() || h.get<std::uint64_t>() != height) reject("unexpected height");
            where.height = height;
            const ledger::Block block = codec::block_from_json(j.at("block"));
            const Json& consensus = j.at("consensus");
            if (height == 0) {
                if (!block.is_genesis() || block.compute_hash() != ledger::genesis_block().block_hash ||
                    block.block_hash != ledger::genesis_block().block_hash || !consensus.is_null()) {
                    reject("first line is not the genesis block");
                }
            } else {
                if (block.is_genesis()) reject("genesis block after height 0");
                check_block(block, tip, height, state, report);
                check_consensus(block, codec::consensus_from_json(consensus), state, report);
            }
            tip = block.block_hash;
        } catch (const Reject& r) {
            where.tx = r.tx;
            where.what = r.what;
        } catch (const Json::exception& e) {
            where.what = std::string("malformed record: ") + e.what();
        } catch (const ParameterError& e) {
            where.what = std::string("malformed record: ") + e.what();
        } catch (const ConsensusError& e) {
            where.what = e.what();
        }
        if (!where.what.empty()) {
            report.failure = std::move(where);
            return report;
        }
        ++report.blocks;
        ++height;
    }
    if (report.blocks == 0) report.failure = Failure{line_no, std::nullopt, std::nullopt, "chain file has no blocks"};
    return report;
}

Report verify_files(const std::filesystem::path& chain, const std::filesystem::path& state,
                    std::uint64_t* rounds_completed) {
    Report report;
    PublicState st;
    try {
        std::ifstream in(state, std::ios::binary);
        if (!in) throw ParameterError("cannot read state file " + state.string());
        st = load_state(Json::parse(in));
    } catch (const Json::exception& e) {
        report.failure = Failure{0, std::nullopt, std::nullopt, "state file " + state.string() + ": " + e.what()};
        return report;
    } catch (const ParameterError& e) {
        report.failure = Failure{0, std::nullopt, std::nullopt, e.what()};
        return report;
    }
    if (rounds_completed) *rounds_completed = st.rounds_completed;
    std::ifstream in(chain, std::ios::binary);
    if (!in) {
        report.failure = Failure{0, std::nullopt, std::nullopt, "cannot read chain file " + chain.string()};
        return report;
    }
    return verify_chain(in, st);
}

}  // namespace pqbfl::replay
