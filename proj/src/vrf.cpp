#include "pqbfl/vrf.hpp"

#include <cmath>

namespace pqbfl::vrf {

namespace {

hbs::Address vrf_address(std::uint64_t round) {
    return {hbs::Address::kVrfTree, static_cast<std::uint32_t>(round), 0, 0};
}

}  // namespace

VrfKeypair vrf_keygen(ByteView device_seed, std::uint64_t round) {
    Hasher secret(HashTag::kVrfSeed);
    secret.update("secret").update(device_seed).update_u64(round);
    const Digest secret_seed = secret.finish();
    Hasher pub(HashTag::kVrfSeed);
    pub.update("public").update(device_seed).update_u64(round);
    const Digest public_seed = pub.finish();

    VrfKeypair kp;
    kp.round = round;
    kp.wots_kp = hbs::wots_keygen(secret_seed, public_seed, hbs::HashParams{}, vrf_address(round));

    Hasher sk(HashTag::kVrfSecret);
    for (const Digest& chain : kp.wots_kp.sk_chains()) sk.update(chain);
    kp.vrf_sk = sk.finish();
    kp.vrf_pk = hbs::wots_pk_digest(kp.wots_kp.pk(), kp.wots_kp.public_seed(), kp.wots_kp.address());
    return kp;
}

Digest proof_message(std::uint64_t round, ByteView alpha, const Digest& proof) {
    Hasher h(HashTag::kVrfMessage);
    h.update_u64(round).update_u64(alpha.size()).update(alpha).update(proof);
    return h.finish();
}

VrfOutput vrf_prove(VrfKeypair& kp, ByteView alpha) {
    VrfOutput out;
    Hasher proof(HashTag::kVrfProof);
    proof.update(kp.vrf_sk).update(alpha);
    out.proof = proof.finish();
    Hasher beta(HashTag::kVrfBeta);
    beta.update(out.proof);
    out.beta = beta.finish();
    out.wots_sig = hbs::wots_sign(proof_message(kp.round, alpha, out.proof), kp.wots_kp);
    out.unit_value = prob(out.beta);
    return out;
}

bool vrf_verify(const VrfPublicKey& pk, ByteView alpha, const VrfOutput& out) {
    Hasher beta(HashTag::kVrfBeta);
    beta.update(out.proof);
    if (beta.finish() != out.beta) return false;
    if (out.unit_value != prob(out.beta)) return false;

    const hbs::HashParams params{};
    if (out.wots_sig.sig_chains.size() != params.len()) return false;
    const Digest message = proof_message(pk.round, alpha, out.proof);
    if (out.wots_sig.msg_digest != message) return false;
    const hbs::Address addr = vrf_address(pk.round);
    const auto recovered = hbs::wots_pk_from_sig(message, out.wots_sig, pk.public_seed, addr, params);
    return hbs::wots_pk_digest(recovered, pk.public_seed, addr) == pk.vrf_pk;
}

double prob(const Digest& beta) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | beta[i];
    return std::ldexp(static_cast<double>(v >> 11), -53);
}

}  // namespace pqbfl::vrf
