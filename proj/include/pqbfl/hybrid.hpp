#pragma once

// Hybrid signatures: a stateless certifier signs each XMSS root once, XMSS
// signs every payload. Exhausted trees are replaced transparently and the new
// certified root is published to the registry.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "pqbfl/certifier.hpp"
#include "pqbfl/xmss.hpp"

namespace pqbfl::hybrid {

inline constexpr unsigned kMinKeychainHeight = 2;
inline constexpr unsigned kMaxKeychainHeight = 10;

using DeviceId = std::uint32_t;

struct CertifiedTree {
    std::uint32_t tree_no = 0;
    Digest root{};
    Bytes d_signature;
};

// Public data a verifier needs for one signer.
struct RegistryRecord {
    DeviceId signer_id = 0;
    std::string certifier;
    Bytes certifier_pk;
    // hash(certifier_pk): stable across tree rollovers.
    Digest address{};
    Bytes public_seed;
    unsigned height = 0;
    std::vector<CertifiedTree> trees;

    const CertifiedTree& tree(std::uint32_t tree_no) const;
};

struct HybridSignature {
    DeviceId signer_id = 0;
    std::uint32_t tree_no = 0;
    xmss::XmssSignature xmss_sig;
    Digest xmss_root{};
};

// Message the certifier signs for a tree: (signer, tree_no, root).
Bytes certification_message(DeviceId signer, std::uint32_t tree_no, const Digest& root);

// Digest XMSS signs for a payload.
Digest payload_digest(ByteView payload);

class HybridKeychain;

class Registry {
public:
    // Publishes the keychain's current record and subscribes to its rollovers.
    void enroll(HybridKeychain& keychain);
    void publish(RegistryRecord record);
    void publish_tree(DeviceId signer, CertifiedTree tree);

    bool contains(DeviceId signer) const { return records_.count(signer) != 0; }
    // Throws LookupError for an unknown signer.
    const RegistryRecord& find(DeviceId signer) const;
    RegistryRecord& find_mutable(DeviceId signer);
    const std::map<DeviceId, RegistryRecord>& records() const { return records_; }

    // Certifier matching a record; presets are instantiated on demand.
    std::shared_ptr<const StatelessCertifier> certifier_for(const RegistryRecord& record) const;

    // Lets a caller register a non-preset provider under its name.
    void add_certifier(std::shared_ptr<const StatelessCertifier> certifier);

private:
    std::map<DeviceId, RegistryRecord> records_;
    mutable std::map<std::string, std::shared_ptr<const StatelessCertifier>> certifiers_;
};

class HybridKeychain {
public:
    using PublishHook = std::function<void(DeviceId, const CertifiedTree&)>;
    // (signer, tree_no, next_index) written before any signature is released.
    using StateSink = std::function<void(DeviceId, std::uint32_t, std::uint32_t)>;

    DeviceId device_id() const { return device_id_; }
    unsigned height() const { return height_; }
    const hbs::HashParams& params() const { return params_; }
    const StatelessCertifier& certifier() const { return *certifier_; }
    std::shared_ptr<const StatelessCertifier> certifier_ptr() const { return certifier_; }
    const Bytes& certifier_pk() const { return certifier_keys_.pk; }
    const Bytes& public_seed() const { return public_seed_; }

    const std::vector<xmss::XmssTree>& trees() const { return trees_; }
    const std::vector<Bytes>& d_signatures() const { return d_signatures_; }
    std::uint32_t tree_no() const { return static_cast<std::uint32_t>(trees_.size() - 1); }
    const xmss::XmssTree& active_tree() const { return trees_.back(); }
    // Number of XMSS layers; a rollover appends a sibling tree, never a child.
    unsigned layers() const { return 1; }

    RegistryRecord public_record() const;

    // Hashes the payload and XMSS-signs it with the active tree, rolling over
    // to a freshly certified tree when the active one is exhausted.
    HybridSignature sign(ByteView payload);

    void set_publish_hook(PublishHook hook) { publish_ = std::move(hook); }
    void set_state_sink(StateSink sink);

    // Rebuild state from persisted counters; trees up to `tree_no` are rebuilt.
    void restore(std::uint32_t tree_no, std::uint32_t next_index);

private:
    friend HybridKeychain hybrid_keygen(DeviceId, unsigned, ByteView, ByteView,
                                        std::shared_ptr<const StatelessCertifier>, const hbs::HashParams&);
    HybridKeychain() = default;

    void add_tree();
    void install_persist(xmss::XmssTree& tree);

    DeviceId device_id_ = 0;
    unsigned height_ = 0;
    hbs::HashParams params_{};
    Bytes secret_seed_;
    Bytes public_seed_;
    std::shared_ptr<const StatelessCertifier> certifier_;
    CertifierKeypair certifier_keys_;
    std::vector<xmss::XmssTree> trees_;
    std::vector<Bytes> d_signatures_;
    PublishHook publish_;
    StateSink state_sink_;
};

// Generates the device-lifetime certifier keypair, then builds and certifies tree 0.
HybridKeychain hybrid_keygen(DeviceId device_id, unsigned height, ByteView secret_seed, ByteView public_seed,
                             std::shared_ptr<const StatelessCertifier> certifier,
                             const hbs::HashParams& params = {});

// True iff the certifier signature over the recorded root verifies AND the XMSS
// signature over hash(payload) folds to that root. Throws LookupError when the
// signer or tree number is not in the registry.
bool hybrid_verify(const HybridSignature& sig, ByteView payload, const Registry& registry);

enum class SizeMode { kHybrid, kCertifierOnly };

// Bytes a transaction carries for `payload_size` payload bytes:
//   hybrid:         payload + key_index(4) + len*n + len*n + h*n + tree_no(4)
//   certifier-only: payload + certifier signature + certifier public key
std::size_t tx_byte_size(const HybridSignature& sig, std::size_t payload_size, SizeMode mode = SizeMode::kHybrid,
                         const SchemeConstants& constants = scheme_constants("dilithium5"));
// Same accounting from parameters alone.
std::size_t hybrid_crypto_bytes(unsigned height, const hbs::HashParams& params = {});

inline constexpr std::size_t kKeyIndexBytes = 4;
inline constexpr std::size_t kTreeNoBytes = 4;

// payload | key_index | wots sig chains | wots pk chains | auth path | tree_no
Bytes encode_signed(ByteView payload, const HybridSignature& sig);

}  // namespace pqbfl::hybrid
