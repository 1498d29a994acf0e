#include "pqbfl/ledger.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "pqbfl/errors.hpp"

namespace pqbfl::ledger {

namespace {

std::uint32_t read_u32(ByteView b, std::size_t& off) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | b[off++];
    return v;
}

std::uint64_t read_u64(ByteView b, std::size_t& off) {
    const std::uint64_t hi = read_u32(b, off);
    return (hi << 32) | read_u32(b, off);
}

}  // namespace

std::uint32_t to_ppm(double fraction) {
    return static_cast<std::uint32_t>(std::llround(std::clamp(fraction, 0.0, 1.0) * 1e6));
}

double from_ppm(std::uint32_t ppm) { return static_cast<double>(ppm) / 1e6; }

Digest model_digest(const fl::Model& model) {
    Hasher h(HashTag::kModel);
    h.update_u64(model.classes).update_u64(model.dim);
    for (double w : model.weights) {
        std::uint64_t bits = 0;
        std::memcpy(&bits, &w, sizeof bits);
        h.update_u64(bits);
    }
    return h.finish();
}

Bytes ModelUpdate::encode() const {
    Bytes out;
    out.reserve(kEncodedSize);
    put_u32(out, worker);
    put_u64(out, round);
    put_u32(out, epochs);
    put_u32(out, samples);
    put_u32(out, train_accuracy_ppm);
    put_bytes(out, weights_digest);
    return out;
}

ModelUpdate ModelUpdate::decode(ByteView bytes) {
    if (bytes.size() != kEncodedSize) throw ParameterError("model update payload has wrong size");
    ModelUpdate u;
    std::size_t off = 0;
    u.worker = read_u32(bytes, off);
    u.round = read_u64(bytes, off);
    u.epochs = read_u32(bytes, off);
    u.samples = read_u32(bytes, off);
    u.train_accuracy_ppm = read_u32(bytes, off);
    std::copy(bytes.begin() + static_cast<std::ptrdiff_t>(off), bytes.end(), u.weights_digest.begin());
    return u;
}

std::string_view reason_name(Reason r) {
    switch (r) {
        case Reason::kAccepted: return "accepted";
        case Reason::kSignature: return "signature";
        case Reason::kLowAccuracy: return "low_accuracy";
        case Reason::kModelMismatch: return "model_mismatch";
    }
    return "?";
}

Bytes Endorsement::payload() const {
    Bytes out = to_bytes("endorse");
    put_bytes(out, tx_digest);
    put_u32(out, validator_id);
    put_u8(out, verdict ? 1 : 0);
    put_u8(out, static_cast<std::uint8_t>(reason));
    put_u32(out, accuracy_ppm);
    return out;
}

Digest Transaction::digest() const {
    Hasher h(HashTag::kTxDigest);
    h.update_u32(signer_id).update_u64(round).update(wire());
    return h.finish();
}

std::size_t Transaction::positive_endorsements() const {
    return static_cast<std::size_t>(
        std::count_if(endorsements.begin(), endorsements.end(), [](const Endorsement& e) { return e.verdict; }));
}

Transaction create_tx(DeviceId worker, hybrid::HybridKeychain& keychain, const ModelUpdate& update) {
    if (keychain.device_id() != worker || update.worker != worker) {
        throw ParameterError("transaction signer does not match the worker");
    }
    Transaction tx;
    tx.signer_id = worker;
    tx.round = update.round;
    tx.payload = update.encode();
    tx.sig = keychain.sign(tx.payload);
    return tx;
}

bool verify_tx_signature(const Transaction& tx, const hybrid::Registry& registry) {
    if (tx.sig.signer_id != tx.signer_id) return false;
    try {
        const ModelUpdate u = ModelUpdate::decode(tx.payload);
        if (u.worker != tx.signer_id || u.round != tx.round) return false;
        return hybrid::hybrid_verify(tx.sig, tx.payload, registry);
    } catch (const LookupError&) {
        return false;
    } catch (const ParameterError&) {
        return false;
    }
}

bool verify_endorsement(const Endorsement& e, const Transaction& tx, const hybrid::Registry& registry) {
    if (e.sig.signer_id != e.validator_id || e.tx_digest != tx.digest()) return false;
    try {
        return hybrid::hybrid_verify(e.sig, e.payload(), registry);
    } catch (const LookupError&) {
        return false;
    }
}

ValidationResult validate_tx(DeviceId validator, hybrid::HybridKeychain& keychain, const Transaction& tx,
                             const fl::Model* model, const fl::LabeledDataset& validation_slice, double threshold,
                             const hybrid::Registry& registry) {
    if (keychain.device_id() != validator) throw ParameterError("validator keychain mismatch");
    ValidationResult result;
    Endorsement& e = result.endorsement;
    e.validator_id = validator;
    e.tx_digest = tx.digest();

    if (!verify_tx_signature(tx, registry)) {
        e.reason = Reason::kSignature;
    } else if (model == nullptr || model_digest(*model) != ModelUpdate::decode(tx.payload).weights_digest) {
        e.reason = Reason::kModelMismatch;
    } else {
        result.accuracy = fl::evaluate(*model, validation_slice);
        e.accuracy_ppm = to_ppm(result.accuracy);
        e.verdict = result.accuracy >= threshold;
        e.reason = e.verdict ? Reason::kAccepted : Reason::kLowAccuracy;
    }
    e.sig = keychain.sign(e.payload());
    return result;
}

// ---------------------------------------------------------------------------

Digest Block::compute_hash() const {
    Hasher h(HashTag::kBlock);
    h.update_u64(round).update_u32(miner_id).update(prev_hash).update_u64(txs.size());
    for (const Transaction& tx : txs) {
        const Bytes w = tx.wire();
        h.update_u32(tx.signer_id).update_u64(tx.round).update_u64(w.size()).update(w);
        h.update_u64(tx.endorsements.size());
        for (const Endorsement& e : tx.endorsements) {
            const Bytes ew = e.wire();
            h.update_u64(ew.size()).update(ew);
        }
    }
    return h.finish();
}

Block genesis_block() {
    Block g;
    g.block_hash = g.compute_hash();
    return g;
}

MineResult mine_block(DeviceId miner, hybrid::HybridKeychain& keychain, std::uint64_t round,
                      std::span<const Transaction> endorsed, const Digest& tip_hash,
                      const hybrid::Registry& registry, std::size_t quorum) {
    if (keychain.device_id() != miner) throw ParameterError("miner keychain mismatch");
    MineResult result;
    Block& b = result.block;
    b.round = round;
    b.miner_id = miner;
    b.prev_hash = tip_hash;
    for (std::size_t i = 0; i < endorsed.size(); ++i) {
        const Transaction& tx = endorsed[i];
        if (tx.round != round) {
            result.dropped.push_back({i, "transaction from another round"});
            continue;
        }
        if (!verify_tx_signature(tx, registry)) {
            result.dropped.push_back({i, "worker signature failed re-verification"});
            continue;
        }
        const bool endorsements_ok = std::all_of(tx.endorsements.begin(), tx.endorsements.end(),
                                                 [&](const Endorsement& e) { return verify_endorsement(e, tx, registry); });
        if (!endorsements_ok) {
            result.dropped.push_back({i, "endorsement failed re-verification"});
            continue;
        }
        if (tx.positive_endorsements() < quorum) {
            result.dropped.push_back({i, "endorsement quorum not met"});
            continue;
        }
        b.txs.push_back(tx);
    }
    b.block_hash = b.compute_hash();
    b.miner_sig = keychain.sign(b.block_hash);
    return result;
}

DeviceId select_winner(std::span<const MinerCandidate> miners, double final_value) {
    if (miners.empty()) throw ConsensusError("no miners to select a winner from");
    const MinerCandidate* best = &miners.front();
    double best_gap = std::abs(best->initial_value - final_value);
    for (const MinerCandidate& m : miners.subspan(1)) {
        const double gap = std::abs(m.initial_value - final_value);
        if (gap < best_gap || (gap == best_gap && m.id < best->id)) {
            best = &m;
            best_gap = gap;
        }
    }
    return best->id;
}

Chain::Chain() { blocks_.push_back(genesis_block()); }

void Chain::append(Block block, DeviceId winner_id, const hybrid::Registry& registry, std::size_t quorum) {
    if (block.miner_id != winner_id) {
        throw AppendRejected("block from miner " + std::to_string(block.miner_id) + " is not the round winner");
    }
    if (block.prev_hash != tip_hash()) throw AppendRejected("prev_hash does not match the chain tip");
    if (block.round != blocks_.size() - 1) throw AppendRejected("block round does not follow the chain height");
    if (block.compute_hash() != block.block_hash) throw AppendRejected("block hash mismatch");
    if (block.miner_sig.signer_id != block.miner_id) throw AppendRejected("miner signature signer mismatch");
    bool sig_ok = false;
    try {
        sig_ok = hybrid::hybrid_verify(block.miner_sig, block.block_hash, registry);
    } catch (const LookupError&) {
        sig_ok = false;
    }
    if (!sig_ok) throw AppendRejected("miner signature invalid");
    for (const Transaction& tx : block.txs) {
        if (tx.positive_endorsements() < quorum) throw AppendRejected("transaction without endorsement quorum");
    }
    blocks_.push_back(std::move(block));
}

bool Chain::operator==(const Chain& other) const {
    if (blocks_.size() != other.blocks_.size()) return false;
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
        if (blocks_[i].block_hash != other.blocks_[i].block_hash) return false;
    }
    return true;
}

StakeBook apply_rewards(const StakeBook& book, const RoundRewards& record, const RewardConstants& constants) {
    StakeBook out = book;
    for (const WorkerWork& w : record.workers) {
        out[w.id] += constants.per_epoch_sample * static_cast<double>(w.epochs) * static_cast<double>(w.samples);
    }
    for (const auto& [id, count] : record.validations) {
        out[id] += constants.per_validation * static_cast<double>(count);
    }
    if (record.winning_miner) out[*record.winning_miner] += constants.per_block;
    return out;
}

}  // namespace pqbfl::ledger
