#pragma once

// Transactions, validator endorsements, blocks, VRF-closeness winner
// selection, the append-only chain, and stake rewards.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pqbfl/fl.hpp"
#include "pqbfl/hybrid.hpp"
#include "pqbfl/vrf.hpp"

namespace pqbfl::ledger {

using hybrid::DeviceId;

inline constexpr DeviceId kNoDevice = 0xffffffffu;
inline constexpr DeviceId kBeaconId = 0xfffffffeu;

// Fraction in [0, 1] stored as parts per million so it encodes exactly.
std::uint32_t to_ppm(double fraction);
double from_ppm(std::uint32_t ppm);

Digest model_digest(const fl::Model& model);

struct ModelUpdate {
    DeviceId worker = 0;
    std::uint64_t round = 0;
    std::uint32_t epochs = 0;
    std::uint32_t samples = 0;
    std::uint32_t train_accuracy_ppm = 0;
    Digest weights_digest{};

    static constexpr std::size_t kEncodedSize = 4 + 8 + 4 + 4 + 4 + kHashBytes;
    Bytes encode() const;
    static ModelUpdate decode(ByteView bytes);
};

enum class Reason : std::uint8_t { kAccepted = 0, kSignature = 1, kLowAccuracy = 2, kModelMismatch = 3 };
std::string_view reason_name(Reason r);

struct Endorsement {
    DeviceId validator_id = 0;
    Digest tx_digest{};
    bool verdict = false;
    Reason reason = Reason::kAccepted;
    std::uint32_t accuracy_ppm = 0;
    hybrid::HybridSignature sig;

    // Bytes the validator signs.
    Bytes payload() const;
    Bytes wire() const { return hybrid::encode_signed(payload(), sig); }
};

struct Transaction {
    DeviceId signer_id = 0;
    std::uint64_t round = 0;
    Bytes payload;
    hybrid::HybridSignature sig;
    std::vector<Endorsement> endorsements;

    // payload plus XMSS signature material; its length is tx_byte_size().
    Bytes wire() const { return hybrid::encode_signed(payload, sig); }
    Digest digest() const;
    std::size_t byte_size() const { return hybrid::tx_byte_size(sig, payload.size()); }
    std::size_t positive_endorsements() const;
};

Transaction create_tx(DeviceId worker, hybrid::HybridKeychain& keychain, const ModelUpdate& update);

struct ValidationResult {
    Endorsement endorsement;
    double accuracy = 0.0;
};

// verdict = signature verifies AND the referenced model scores at least
// `threshold` on the validator's slice. `model` is the off-chain update the
// payload digest refers to (nullptr when unavailable).
ValidationResult validate_tx(DeviceId validator, hybrid::HybridKeychain& keychain, const Transaction& tx,
                             const fl::Model* model, const fl::LabeledDataset& validation_slice, double threshold,
                             const hybrid::Registry& registry);

bool verify_endorsement(const Endorsement& e, const Transaction& tx, const hybrid::Registry& registry);

// Signature of the worker over the payload, and the payload's claimed signer.
bool verify_tx_signature(const Transaction& tx, const hybrid::Registry& registry);

struct Block {
    std::uint64_t round = 0;
    DeviceId miner_id = kNoDevice;
    Digest prev_hash{};
    std::vector<Transaction> txs;
    hybrid::HybridSignature miner_sig;
    Digest block_hash{};

    Digest compute_hash() const;
    bool is_genesis() const { return miner_id == kNoDevice; }
};

Block genesis_block();

struct DroppedTx {
    std::size_t index = 0;
    std::string reason;
};

struct MineResult {
    Block block;
    std::vector<DroppedTx> dropped;
};

// Re-verifies every worker signature and endorsement; drops txs that fail or
// lack `quorum` positive endorsements; hashes and signs the block.
MineResult mine_block(DeviceId miner, hybrid::HybridKeychain& keychain, std::uint64_t round,
                      std::span<const Transaction> endorsed, const Digest& tip_hash,
                      const hybrid::Registry& registry, std::size_t quorum = 1);

struct MinerCandidate {
    DeviceId id = 0;
    double initial_value = 0.0;
};

// argmin |iV - fV|, ties to the lower device id. Throws ConsensusError when empty.
DeviceId select_winner(std::span<const MinerCandidate> miners, double final_value);

class AppendRejected : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class Chain {
public:
    Chain();

    const std::vector<Block>& blocks() const { return blocks_; }
    std::size_t size() const { return blocks_.size(); }
    const Block& tip() const { return blocks_.back(); }
    const Digest& tip_hash() const { return blocks_.back().block_hash; }

    // Accepts only the winner's block with valid linkage, hash, and miner
    // signature. Throws AppendRejected otherwise.
    void append(Block block, DeviceId winner_id, const hybrid::Registry& registry, std::size_t quorum = 1);

    bool operator==(const Chain& other) const;

private:
    std::vector<Block> blocks_;
};

// Evidence that lets a replaying verifier recheck winner selection.
struct ConsensusRecord {
    std::uint64_t round = 0;
    vrf::VrfOutput beacon;
    std::vector<std::pair<DeviceId, vrf::VrfOutput>> candidates;
    DeviceId winner = kNoDevice;
};

using StakeBook = std::map<DeviceId, double>;

struct RewardConstants {
    double per_epoch_sample = 0.001;
    double per_validation = 0.01;
    double per_block = 0.1;
};

struct WorkerWork {
    DeviceId id = 0;
    std::uint32_t epochs = 0;
    std::uint32_t samples = 0;
};

struct RoundRewards {
    std::vector<WorkerWork> workers;
    std::vector<std::pair<DeviceId, std::size_t>> validations;
    std::optional<DeviceId> winning_miner;
};

StakeBook apply_rewards(const StakeBook& book, const RoundRewards& record, const RewardConstants& constants = {});

}  // namespace pqbfl::ledger
