#include "pqbfl/hybrid.hpp"

#include "pqbfl/errors.hpp"

namespace pqbfl::hybrid {

const CertifiedTree& RegistryRecord::tree(std::uint32_t tree_no) const {
    for (const auto& t : trees) {
        if (t.tree_no == tree_no) return t;
    }
    throw LookupError("signer " + std::to_string(signer_id) + " has no certified tree " + std::to_string(tree_no));
}

Bytes certification_message(DeviceId signer, std::uint32_t tree_no, const Digest& root) {
    Bytes msg = to_bytes("xmss-root");
    put_u32(msg, signer);
    put_u32(msg, tree_no);
    put_bytes(msg, root);
    return msg;
}

Digest payload_digest(ByteView payload) {
    Hasher h(HashTag::kMessage);
    h.update(payload);
    return h.finish();
}

// ---------------------------------------------------------------------------
// Registry

void Registry::enroll(HybridKeychain& keychain) {
    publish(keychain.public_record());
    add_certifier(keychain.certifier_ptr());
    keychain.set_publish_hook([this](DeviceId signer, const CertifiedTree& tree) { publish_tree(signer, tree); });
}

void Registry::publish(RegistryRecord record) {
    const DeviceId id = record.signer_id;
    records_[id] = std::move(record);
}

void Registry::publish_tree(DeviceId signer, CertifiedTree tree) {
    RegistryRecord& rec = find_mutable(signer);
    for (const auto& t : rec.trees) {
        if (t.tree_no == tree.tree_no) throw ParameterError("tree number already published");
    }
    rec.trees.push_back(std::move(tree));
}

const RegistryRecord& Registry::find(DeviceId signer) const {
    auto it = records_.find(signer);
    if (it == records_.end()) throw LookupError("unknown signer " + std::to_string(signer));
    return it->second;
}

RegistryRecord& Registry::find_mutable(DeviceId signer) {
    auto it = records_.find(signer);
    if (it == records_.end()) throw LookupError("unknown signer " + std::to_string(signer));
    return it->second;
}

std::shared_ptr<const StatelessCertifier> Registry::certifier_for(const RegistryRecord& record) const {
    auto it = certifiers_.find(record.certifier);
    if (it != certifiers_.end()) return it->second;
    auto made = make_certifier(record.certifier);
    certifiers_[record.certifier] = made;
    return made;
}

void Registry::add_certifier(std::shared_ptr<const StatelessCertifier> certifier) {
    certifiers_[certifier->name()] = std::move(certifier);
}

// ---------------------------------------------------------------------------
// Keychain

HybridKeychain hybrid_keygen(DeviceId device_id, unsigned height, ByteView secret_seed, ByteView public_seed,
                             std::shared_ptr<const StatelessCertifier> certifier, const hbs::HashParams& params) {
    if (height < kMinKeychainHeight || height > kMaxKeychainHeight) {
        throw ParameterError("keychain height " + std::to_string(height) + " outside [2, 10]");
    }
    if (!certifier) throw KeygenError("no certifier supplied");
    if (secret_seed.empty() || public_seed.empty()) throw ParameterError("keychain seeds must be nonempty");

    HybridKeychain kc;
    kc.device_id_ = device_id;
    kc.height_ = height;
    kc.params_ = params;
    kc.secret_seed_.assign(secret_seed.begin(), secret_seed.end());
    kc.public_seed_.assign(public_seed.begin(), public_seed.end());
    kc.certifier_ = std::move(certifier);
    try {
        kc.certifier_keys_ = kc.certifier_->keygen(secret_seed);
    } catch (const std::exception& e) {
        throw KeygenError(std::string("certifier keygen failed: ") + e.what());
    }
    kc.add_tree();
    return kc;
}

void HybridKeychain::install_persist(xmss::XmssTree& tree) {
    if (!state_sink_) {
        tree.set_persist_hook({});
        return;
    }
    tree.set_persist_hook([sink = state_sink_, id = device_id_](const xmss::XmssTree& t) {
        sink(id, t.tree_no(), t.next_index());
    });
}

void HybridKeychain::set_state_sink(StateSink sink) {
    state_sink_ = std::move(sink);
    for (auto& t : trees_) install_persist(t);
}

void HybridKeychain::add_tree() {
    const auto tree_no = static_cast<std::uint32_t>(trees_.size());
    xmss::XmssTree tree = xmss::XmssTree::build(height_, secret_seed_, public_seed_, tree_no, params_);
    Bytes d_sig = certifier_->sign(certifier_keys_.sk, certification_message(device_id_, tree_no, tree.root()));
    if (!certifier_->verify(certifier_keys_.pk, certification_message(device_id_, tree_no, tree.root()), d_sig)) {
        throw KeygenError("certifier produced an unverifiable tree certificate");
    }
    install_persist(tree);
    trees_.push_back(std::move(tree));
    d_signatures_.push_back(d_sig);
    if (publish_) publish_(device_id_, CertifiedTree{tree_no, trees_.back().root(), std::move(d_sig)});
}

RegistryRecord HybridKeychain::public_record() const {
    RegistryRecord rec;
    rec.signer_id = device_id_;
    rec.certifier = certifier_->name();
    rec.certifier_pk = certifier_keys_.pk;
    rec.address = hash(certifier_keys_.pk);
    rec.public_seed = public_seed_;
    rec.height = height_;
    for (std::size_t i = 0; i < trees_.size(); ++i) {
        rec.trees.push_back(CertifiedTree{static_cast<std::uint32_t>(i), trees_[i].root(), d_signatures_[i]});
    }
    return rec;
}

HybridSignature HybridKeychain::sign(ByteView payload) {
    const Digest digest = payload_digest(payload);
    if (trees_.back().exhausted()) {
        add_tree();
        if (trees_.back().exhausted()) throw TreeExhausted("fresh XMSS tree is already exhausted");
    }
    HybridSignature sig;
    sig.signer_id = device_id_;
    sig.tree_no = tree_no();
    sig.xmss_sig = trees_.back().sign(digest);
    sig.xmss_root = trees_.back().root();
    return sig;
}

void HybridKeychain::restore(std::uint32_t tree_no, std::uint32_t next_index) {
    while (this->tree_no() < tree_no) {
        trees_.back().restore_next_index(static_cast<std::uint32_t>(trees_.back().leaf_count()));
        add_tree();
    }
    if (this->tree_no() != tree_no) throw ParameterError("restore would move to an older tree");
    trees_.back().restore_next_index(next_index);
}

// ---------------------------------------------------------------------------

bool hybrid_verify(const HybridSignature& sig, ByteView payload, const Registry& registry) {
    const RegistryRecord& rec = registry.find(sig.signer_id);
    const CertifiedTree& tree = rec.tree(sig.tree_no);
    if (tree.root != sig.xmss_root) return false;
    if (sig.xmss_sig.auth_path.size() != rec.height) return false;
    const auto certifier = registry.certifier_for(rec);
    const bool certified =
        certifier->verify(rec.certifier_pk, certification_message(rec.signer_id, tree.tree_no, tree.root),
                          tree.d_signature);
    if (!certified) return false;
    return xmss::xmss_verify(payload_digest(payload), sig.xmss_sig, tree.root, rec.public_seed, sig.tree_no);
}

std::size_t hybrid_crypto_bytes(unsigned height, const hbs::HashParams& params) {
    return kKeyIndexBytes + 2 * params.len() * params.n + height * params.n + kTreeNoBytes;
}

std::size_t tx_byte_size(const HybridSignature& sig, std::size_t payload_size, SizeMode mode,
                         const SchemeConstants& constants) {
    if (mode == SizeMode::kCertifierOnly) return payload_size + constants.sig_size + constants.pk_size;
    return payload_size + kKeyIndexBytes + sig.xmss_sig.wots_sig.sig_chains.size() * kHashBytes +
           sig.xmss_sig.wots_pk.size() * kHashBytes + sig.xmss_sig.auth_path.size() * kHashBytes + kTreeNoBytes;
}

Bytes encode_signed(ByteView payload, const HybridSignature& sig) {
    Bytes out(payload.begin(), payload.end());
    put_u32(out, sig.xmss_sig.key_index);
    for (const Digest& d : sig.xmss_sig.wots_sig.sig_chains) put_bytes(out, d);
    for (const Digest& d : sig.xmss_sig.wots_pk) put_bytes(out, d);
    for (const Digest& d : sig.xmss_sig.auth_path) put_bytes(out, d);
    put_u32(out, sig.tree_no);
    return out;
}

}  // namespace pqbfl::hybrid
