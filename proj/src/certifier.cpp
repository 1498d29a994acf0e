#include "pqbfl/certifier.hpp"

#include <array>

#include "pqbfl/errors.hpp"

namespace pqbfl::hybrid {

namespace {

const std::array<SchemeConstants, 4>& presets() {
    static const std::array<SchemeConstants, 4> kPresets = {{
        {"dilithium2", 1312, 2420},
        {"dilithium5", 2592, 4595},
        {"falcon512", 897, 666},
        {"falcon1024", 1793, 1280},
    }};
    return kPresets;
}

}  // namespace

const SchemeConstants& scheme_constants(std::string_view name) {
    for (const auto& p : presets()) {
        if (p.name == name) return p;
    }
    throw ParameterError("unknown certifier preset '" + std::string(name) + "'");
}

std::vector<std::string> scheme_names() {
    std::vector<std::string> names;
    for (const auto& p : presets()) names.push_back(p.name);
    return names;
}

MockCertifier::MockCertifier(SchemeConstants constants) : constants_(std::move(constants)) {
    if (constants_.pk_size == 0 || constants_.sig_size == 0) throw ParameterError("certifier sizes must be positive");
}

Bytes MockCertifier::expand(const Digest& seed, std::size_t size) const {
    Bytes out;
    out.reserve(size + kHashBytes);
    for (std::uint32_t counter = 0; out.size() < size; ++counter) {
        Hasher h(HashTag::kCertifier);
        h.update("expand").update(seed).update_u32(counter);
        const Digest block = h.finish();
        out.insert(out.end(), block.begin(), block.end());
    }
    out.resize(size);
    return out;
}

Bytes MockCertifier::tag_for(ByteView pk, ByteView message) const {
    Hasher h(HashTag::kCertifier);
    h.update("sig").update(constants_.name).update(pk).update(message);
    return expand(h.finish(), constants_.sig_size);
}

CertifierKeypair MockCertifier::keygen(ByteView seed) const {
    if (seed.empty()) throw ParameterError("certifier seed must be nonempty");
    Hasher sk_hasher(HashTag::kCertifier);
    sk_hasher.update("sk").update(constants_.name).update(seed);
    const Digest sk = sk_hasher.finish();

    Hasher pk_hasher(HashTag::kCertifier);
    pk_hasher.update("pk").update(sk);
    CertifierKeypair kp;
    kp.pk = expand(pk_hasher.finish(), constants_.pk_size);
    // sk carries the public key so signing needs no re-derivation.
    kp.sk.assign(sk.begin(), sk.end());
    kp.sk.insert(kp.sk.end(), kp.pk.begin(), kp.pk.end());
    return kp;
}

Bytes MockCertifier::sign(ByteView sk, ByteView message) const {
    if (sk.size() != kHashBytes + constants_.pk_size) throw ParameterError("certifier secret key has wrong size");
    return tag_for(sk.subspan(kHashBytes), message);
}

bool MockCertifier::verify(ByteView pk, ByteView message, ByteView signature) const {
    if (pk.size() != constants_.pk_size || signature.size() != constants_.sig_size) return false;
    const Bytes expected = tag_for(pk, message);
    return std::equal(expected.begin(), expected.end(), signature.begin());
}

std::shared_ptr<const StatelessCertifier> make_certifier(std::string_view preset) {
    return std::make_shared<MockCertifier>(scheme_constants(preset));
}

}  // namespace pqbfl::hybrid
