#pragma once

// Read-only re-verification of an exported chain against the public state
// file: linkage, block hashes, every hybrid signature, endorsement quorums,
// and the recorded VRF winner-selection evidence.

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <utility>

#include "pqbfl/codec.hpp"

namespace pqbfl::replay {

using hybrid::DeviceId;

// Public data a verifier needs; built only from the state file.
struct PublicState {
    hybrid::Registry registry;
    // (device, round) -> that round's VRF key; the beacon is under kBeaconId.
    std::map<std::pair<DeviceId, std::uint64_t>, vrf::VrfPublicKey> vrf_keys;
    std::size_t quorum = 1;
    std::uint64_t rounds_completed = 0;
};

// Throws ParameterError on a malformed state, or when a registry address is
// not the hash of its certifier key or a certified root fails its certifier check.
PublicState load_state(const codec::Json& state);

// Where verification stopped. `line` is 1-based; `height` and `tx` are set
// when the failure is inside a block or one of its transactions.
struct Failure {
    std::size_t line = 0;
    std::optional<std::uint64_t> height;
    std::optional<std::size_t> tx;
    std::string what;

    std::string describe() const;
};

struct Report {
    std::size_t blocks = 0;
    std::size_t transactions = 0;
    std::size_t signatures = 0;
    std::size_t vrf_proofs = 0;
    std::optional<Failure> failure;

    bool ok() const { return !failure; }
};

// Stops at the first failure. A well-formed prefix of a chain verifies clean.
Report verify_chain(std::istream& chain, const PublicState& state);

// Loads both files; an unreadable or malformed state file is reported as a
// failure at line 0.
Report verify_files(const std::filesystem::path& chain, const std::filesystem::path& state,
                    std::uint64_t* rounds_completed = nullptr);

}  // namespace pqbfl::replay
