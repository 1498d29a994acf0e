#include "pqbfl/codec.hpp"

#include "pqbfl/errors.hpp"

namespace pqbfl::codec {

namespace {

const Json& field(const Json& j, const char* key) {
    if (!j.is_object()) throw ParameterError(std::string("expected an object holding '") + key + "'");
    auto it = j.find(key);
    if (it == j.end()) throw ParameterError(std::string("missing field '") + key + "'");
    return *it;
}

template <typename T>
T integer(const Json& j, const char* key) {
    const Json& v = field(j, key);
    if (!v.is_number_unsigned()) throw ParameterError(std::string("field '") + key + "' must be a non-negative integer");
    const auto raw = v.get<std::uint64_t>();
    if (raw > std::numeric_limits<T>::max()) throw ParameterError(std::string("field '") + key + "' out of range");
    return static_cast<T>(raw);
}

std::string text(const Json& j, const char* key) {
    const Json& v = field(j, key);
    if (!v.is_string()) throw ParameterError(std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
}

bool boolean(const Json& j, const char* key) {
    const Json& v = field(j, key);
    if (!v.is_boolean()) throw ParameterError(std::string("field '") + key + "' must be a boolean");
    return v.get<bool>();
}

Bytes bytes(const Json& j, const char* key) { return from_hex(text(j, key)); }
Digest digest(const Json& j, const char* key) { return digest_from_hex(text(j, key)); }

const Json& array(const Json& j, const char* key) {
    const Json& v = field(j, key);
    if (!v.is_array()) throw ParameterError(std::string("field '") + key + "' must be an array");
    return v;
}

Json digests_to_json(const std::vector<Digest>& ds) {
    Json out = Json::array();
    for (const Digest& d : ds) out.push_back(to_hex(d));
    return out;
}

std::vector<Digest> digests(const Json& j, const char* key) {
    std::vector<Digest> out;
    for (const Json& v : array(j, key)) {
        if (!v.is_string()) throw ParameterError(std::string("entries of '") + key + "' must be hex strings");
        out.push_back(digest_from_hex(v.get<std::string>()));
    }
    return out;
}

}  // namespace

Json to_json(const hybrid::HybridSignature& sig) {
    return Json{{"signer_id", sig.signer_id},
                {"tree_no", sig.tree_no},
                {"key_index", sig.xmss_sig.key_index},
                {"msg_digest", to_hex(sig.xmss_sig.wots_sig.msg_digest)},
                {"sig_chains", digests_to_json(sig.xmss_sig.wots_sig.sig_chains)},
                {"wots_pk", digests_to_json(sig.xmss_sig.wots_pk)},
                {"auth_path", digests_to_json(sig.xmss_sig.auth_path)},
                {"xmss_root", to_hex(sig.xmss_root)}};
}

hybrid::HybridSignature signature_from_json(const Json& j) {
    hybrid::HybridSignature sig;
    sig.signer_id = integer<std::uint32_t>(j, "signer_id");
    sig.tree_no = integer<std::uint32_t>(j, "tree_no");
    sig.xmss_sig.key_index = integer<std::uint32_t>(j, "key_index");
    sig.xmss_sig.wots_sig.msg_digest = digest(j, "msg_digest");
    sig.xmss_sig.wots_sig.sig_chains = digests(j, "sig_chains");
    sig.xmss_sig.wots_pk = digests(j, "wots_pk");
    sig.xmss_sig.auth_path = digests(j, "auth_path");
    sig.xmss_root = digest(j, "xmss_root");
    return sig;
}

Json to_json(const ledger::Endorsement& e) {
    return Json{{"validator_id", e.validator_id},
                {"tx_digest", to_hex(e.tx_digest)},
                {"verdict", e.verdict},
                {"reason", static_cast<unsigned>(e.reason)},
                {"accuracy_ppm", e.accuracy_ppm},
                {"sig", to_json(e.sig)}};
}

ledger::Endorsement endorsement_from_json(const Json& j) {
    ledger::Endorsement e;
    e.validator_id = integer<std::uint32_t>(j, "validator_id");
    e.tx_digest = digest(j, "tx_digest");
    e.verdict = boolean(j, "verdict");
    const auto reason = integer<std::uint8_t>(j, "reason");
    if (reason > static_cast<std::uint8_t>(ledger::Reason::kModelMismatch)) throw ParameterError("unknown reason code");
    e.reason = static_cast<ledger::Reason>(reason);
    e.accuracy_ppm = integer<std::uint32_t>(j, "accuracy_ppm");
    e.sig = signature_from_json(field(j, "sig"));
    return e;
}

Json to_json(const ledger::Transaction& tx) {
    Json ends = Json::array();
    for (const auto& e : tx.endorsements) ends.push_back(to_json(e));
    return Json{{"signer_id", tx.signer_id},
                {"round", tx.round},
                {"payload", to_hex(tx.payload)},
                {"sig", to_json(tx.sig)},
                {"endorsements", std::move(ends)}};
}

ledger::Transaction transaction_from_json(const Json& j) {
    ledger::Transaction tx;
    tx.signer_id = integer<std::uint32_t>(j, "signer_id");
    tx.round = integer<std::uint64_t>(j, "round");
    tx.payload = bytes(j, "payload");
    tx.sig = signature_from_json(field(j, "sig"));
    for (const Json& e : array(j, "endorsements")) tx.endorsements.push_back(endorsement_from_json(e));
    return tx;
}

Json to_json(const ledger::Block& b) {
    Json txs = Json::array();
    for (const auto& tx : b.txs) txs.push_back(to_json(tx));
    return Json{{"round", b.round},
                {"miner_id", b.miner_id},
                {"prev_hash", to_hex(b.prev_hash)},
                {"block_hash", to_hex(b.block_hash)},
                {"txs", std::move(txs)},
                {"miner_sig", b.is_genesis() ? Json(nullptr) : to_json(b.miner_sig)}};
}

ledger::Block block_from_json(const Json& j) {
    ledger::Block b;
    b.round = integer<std::uint64_t>(j, "round");
    b.miner_id = integer<std::uint32_t>(j, "miner_id");
    b.prev_hash = digest(j, "prev_hash");
    b.block_hash = digest(j, "block_hash");
    for (const Json& tx : array(j, "txs")) b.txs.push_back(transaction_from_json(tx));
    const Json& sig = field(j, "miner_sig");
    if (!sig.is_null()) b.miner_sig = signature_from_json(sig);
    return b;
}

Json to_json(const vrf::VrfOutput& out) {
    return Json{{"beta", to_hex(out.beta)},
                {"proof", to_hex(out.proof)},
                {"msg_digest", to_hex(out.wots_sig.msg_digest)},
                {"sig_chains", digests_to_json(out.wots_sig.sig_chains)}};
}

vrf::VrfOutput vrf_output_from_json(const Json& j) {
    vrf::VrfOutput out;
    out.beta = digest(j, "beta");
    out.proof = digest(j, "proof");
    out.wots_sig.msg_digest = digest(j, "msg_digest");
    out.wots_sig.sig_chains = digests(j, "sig_chains");
    out.unit_value = vrf::prob(out.beta);
    return out;
}

Json to_json(const vrf::VrfPublicKey& pk) {
    return Json{{"round", pk.round}, {"public_seed", to_hex(pk.public_seed)}, {"vrf_pk", to_hex(pk.vrf_pk)}};
}

vrf::VrfPublicKey vrf_public_key_from_json(const Json& j) {
    return {integer<std::uint64_t>(j, "round"), bytes(j, "public_seed"), digest(j, "vrf_pk")};
}

Json to_json(const ledger::ConsensusRecord& c) {
    Json cands = Json::array();
    for (const auto& [id, out] : c.candidates) cands.push_back(Json{{"id", id}, {"vrf", to_json(out)}});
    return Json{{"round", c.round}, {"beacon", to_json(c.beacon)}, {"candidates", std::move(cands)}, {"winner", c.winner}};
}

ledger::ConsensusRecord consensus_from_json(const Json& j) {
    ledger::ConsensusRecord c;
    c.round = integer<std::uint64_t>(j, "round");
    c.beacon = vrf_output_from_json(field(j, "beacon"));
    for (const Json& cand : array(j, "candidates")) {
        c.candidates.emplace_back(integer<std::uint32_t>(cand, "id"), vrf_output_from_json(field(cand, "vrf")));
    }
    c.winner = integer<std::uint32_t>(j, "winner");
    return c;
}

Json to_json(const hybrid::RegistryRecord& r) {
    Json trees = Json::array();
    for (const auto& t : r.trees) {
        trees.push_back(Json{{"tree_no", t.tree_no}, {"root", to_hex(t.root)}, {"d_signature", to_hex(t.d_signature)}});
    }
    return Json{{"signer_id", r.signer_id},
                {"certifier", r.certifier},
                {"certifier_pk", to_hex(r.certifier_pk)},
                {"address", to_hex(r.address)},
                {"public_seed", to_hex(r.public_seed)},
                {"height", r.height},
                {"trees", std::move(trees)}};
}

hybrid::RegistryRecord registry_record_from_json(const Json& j) {
    hybrid::RegistryRecord r;
    r.signer_id = integer<std::uint32_t>(j, "signer_id");
    r.certifier = text(j, "certifier");
    r.certifier_pk = bytes(j, "certifier_pk");
    r.address = digest(j, "address");
    r.public_seed = bytes(j, "public_seed");
    r.height = integer<unsigned>(j, "height");
    for (const Json& t : array(j, "trees")) {
        r.trees.push_back({integer<std::uint32_t>(t, "tree_no"), digest(t, "root"), bytes(t, "d_signature")});
    }
    return r;
}

Json chain_line(std::size_t height, const ledger::Block& block, const ledger::ConsensusRecord* consensus) {
    return Json{{"height", height},
                {"block", to_json(block)},
                {"consensus", consensus ? to_json(*consensus) : Json(nullptr)}};
}

}  // namespace pqbfl::codec
