#pragma once

#include <stdexcept>
#include <string>

namespace pqbfl {

// Bad argument or out-of-range parameter.
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A one-time key (WOTS+ leaf or per-round VRF key) was asked to sign twice.
class OneTimeViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Every leaf of an XMSS tree has been consumed.
class TreeExhausted : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Signer id or tree number not present in the public-key registry.
class LookupError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

// Signer state could not be persisted; the signature was withheld.
class StateWriteError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class KeygenError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class TrainingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConsensusError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace pqbfl
