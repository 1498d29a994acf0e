#pragma once

// JSON encodings for the chain export (one block per line) and the state
// file. Byte strings are lowercase hex; no floating-point value that a
// verifier relies on is stored.

#include <map>
#include <utility>

#include <json.hpp>

#include "pqbfl/ledger.hpp"

namespace pqbfl::codec {

using Json = nlohmann::ordered_json;

// Every decoder throws ParameterError on a missing field, a wrong type, or
// malformed hex.

Json to_json(const hybrid::HybridSignature& sig);
hybrid::HybridSignature signature_from_json(const Json& j);

Json to_json(const ledger::Endorsement& e);
ledger::Endorsement endorsement_from_json(const Json& j);

Json to_json(const ledger::Transaction& tx);
ledger::Transaction transaction_from_json(const Json& j);

Json to_json(const ledger::Block& b);
ledger::Block block_from_json(const Json& j);

// unit_value is recomputed from beta on decode.
Json to_json(const vrf::VrfOutput& out);
vrf::VrfOutput vrf_output_from_json(const Json& j);

Json to_json(const vrf::VrfPublicKey& pk);
vrf::VrfPublicKey vrf_public_key_from_json(const Json& j);

Json to_json(const ledger::ConsensusRecord& c);
ledger::ConsensusRecord consensus_from_json(const Json& j);

Json to_json(const hybrid::RegistryRecord& r);
hybrid::RegistryRecord registry_record_from_json(const Json& j);

// One chain-file line: height, block, and the consensus evidence (null for genesis).
Json chain_line(std::size_t height, const ledger::Block& block, const ledger::ConsensusRecord* consensus);

}  // namespace pqbfl::codec
