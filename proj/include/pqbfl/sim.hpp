#pragma once

// Deterministic round orchestrator: role selection, local training,
// validation, mining, VRF winner selection, aggregation, and rewards, with a
// simulated cost model in place of wall-clock time.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pqbfl/fl.hpp"
#include "pqbfl/hybrid.hpp"
#include "pqbfl/ledger.hpp"
#include "pqbfl/roles.hpp"
#include "pqbfl/vrf.hpp"

namespace pqbfl::sim {

using hybrid::DeviceId;

// Labeled child seed of `master`; stable across runs and platforms.
std::uint64_t sub_seed(std::uint64_t master, std::string_view label, std::uint64_t index = 0);

struct CostModel {
    double per_hash = 1e-6;
    double per_byte = 1e-5;
    // Per epoch-sample at cp = 1.
    double per_sample = 1e-5;
    double per_compare = 1e-6;
    // cp below this is clamped when dividing.
    double cp_floor = 0.05;
};

struct TrainingLoad {
    std::uint64_t epoch_samples = 0;
    double cp = 0.0;
};

struct WorkRecord {
    std::uint64_t hash_calls = 0;
    std::uint64_t tx_bytes = 0;
    std::vector<TrainingLoad> training;
};

// per_hash * hash_calls + per_byte * tx_bytes
//   + per_sample * max over workers of epoch_samples / max(cp, cp_floor).
// Workers train in parallel, so the slowest one bounds the round.
double simulated_delay(const WorkRecord& work, const CostModel& cost);

// Beacon VRF work plus one comparison per candidate miner.
double simulated_block_time(std::uint64_t beacon_hash_calls, std::size_t comparisons, const CostModel& cost);

enum class Mode { kBfl, kFlOnly };
std::string_view mode_name(Mode m);
Mode parse_mode(std::string_view name);

struct DatasetConfig {
    std::size_t classes = 10;
    std::size_t dim = 20;
    std::size_t per_class = 200;
    double spread = 1.0;
    // Dirichlet concentration of each device's label proportions.
    double skew = 0.3;
    // Held-out share, split evenly between validator slices and the global test set.
    double holdout = 0.3;
    // Optional CSV (features..., label) replacing the synthetic data.
    std::string csv_path;
};

struct ScenarioConfig {
    roles::Scenario scenario = roles::Scenario::kDominantWorkers;
    Mode mode = Mode::kBfl;
    std::size_t n_devices = 8;
    roles::Ratio ratio;
    // Empty means the scenario preset.
    std::optional<roles::Alphas> alphas;
    unsigned xmss_height = 6;
    std::string certifier = "dilithium5";
    std::size_t rounds = 100;
    std::uint64_t seed = 1;
    int epochs = 2;
    double lr = 0.05;
    std::size_t batch_size = 16;
    double threshold = 0.5;
    std::size_t quorum = 1;
    ledger::RewardConstants rewards;
    CostModel cost;
    DatasetConfig data;

    // Throws ConfigError naming the offending field.
    void validate() const;
    roles::Alphas effective_alphas() const { return alphas ? *alphas : roles::Alphas::preset(scenario); }
};

// Learning factors one worker produced in one round.
struct LearningReport {
    DeviceId device_id = 0;
    std::uint64_t round = 0;
    double ls = 0.0;
    double val_accuracy = 0.0;
    double sh = 0.0;
    double cd = 0.0;
    double wd = 0.0;
    bool cd_degenerate = false;
};

struct DeviceState {
    DeviceId id = 0;
    std::unique_ptr<hybrid::HybridKeychain> keychain;
    Bytes vrf_seed;
    fl::LabeledDataset shard;
    fl::LabeledDataset validation_slice;
    // Label-distribution distance of the shard from the global training set.
    double wd = 0.0;
    double stake = 0.0;
    double cp = 0.0;
    bool online = true;
    std::optional<LearningReport> last_report;
    ledger::Chain replica;
    std::vector<vrf::VrfPublicKey> vrf_keys;
};

struct DeviceMetrics {
    DeviceId id = 0;
    roles::Role role = roles::Role::kWorker;
    roles::SelectionFactors factors;
    double sv = 0.0;
    double stake = 0.0;
};

struct RoundMetrics {
    std::uint64_t round = 0;
    roles::RoleCounts counts;
    std::vector<DeviceMetrics> devices;
    DeviceId winner_id = ledger::kNoDevice;
    double accuracy = 0.0;
    // Mean final local training loss of the round's workers.
    double mean_loss = 0.0;
    std::uint64_t tx_bytes = 0;
    double delay = 0.0;
    double block_time = 0.0;
    std::uint64_t hash_calls = 0;
    std::uint64_t beacon_hash_calls = 0;
    std::size_t comparisons = 0;
    std::size_t txs_created = 0;
    std::size_t txs_in_block = 0;
    // Distinct replica tips minus one after the append.
    std::size_t forks = 0;
    WorkRecord work;
    std::vector<LearningReport> reports;
};

class Simulation {
public:
    // Validates the config, builds the data, and enrolls every device.
    explicit Simulation(ScenarioConfig config);
    Simulation(const Simulation&) = delete;
    Simulation& operator=(const Simulation&) = delete;

    // Runs the next round. A ConsensusError is rethrown naming the round.
    RoundMetrics run_round();
    // Runs every remaining configured round.
    std::vector<RoundMetrics> run();

    const ScenarioConfig& config() const { return config_; }
    std::uint64_t next_round() const { return round_; }
    const std::vector<DeviceState>& devices() const { return devices_; }
    const hybrid::Registry& registry() const { return registry_; }
    // The chain every replica agrees on; device 0's copy.
    const ledger::Chain& chain() const { return devices_.front().replica; }
    const std::vector<ledger::ConsensusRecord>& consensus() const { return consensus_; }
    const std::vector<vrf::VrfPublicKey>& beacon_keys() const { return beacon_keys_; }
    const fl::Model& global_model() const { return global_; }
    const fl::LabeledDataset& test_set() const { return test_set_; }
    const ledger::StakeBook& stakes() const { return stakes_; }
    // Latest persisted (tree_no, next_index) per signer.
    const std::map<DeviceId, std::pair<std::uint32_t, std::uint32_t>>& signer_state() const { return signer_state_; }

private:
    struct Selection;
    Selection select_roles(std::uint64_t round, RoundMetrics& m);
    Bytes round_alpha() const;

    ScenarioConfig config_;
    std::vector<DeviceState> devices_;
    hybrid::Registry registry_;
    fl::Model global_;
    fl::LabeledDataset test_set_;
    std::vector<double> global_hist_;
    ledger::StakeBook stakes_;
    std::vector<ledger::ConsensusRecord> consensus_;
    std::vector<vrf::VrfPublicKey> beacon_keys_;
    Bytes beacon_seed_;
    Digest fl_anchor_{};
    std::map<DeviceId, std::pair<std::uint32_t, std::uint32_t>> signer_state_;
    std::uint64_t round_ = 0;
};

// CSV header and rows: round, w, v, m, winner_id, accuracy, mean_loss,
// tx_bytes, delay, block_time, hash_calls, then sv_<id> and role_<id> per device.
std::string csv_header(std::size_t n_devices);
std::string csv_row(const RoundMetrics& m);

struct OutputPaths {
    std::filesystem::path metrics;
    std::filesystem::path chain;
    std::filesystem::path state;
};
OutputPaths output_paths(const std::filesystem::path& dir);

// Writes metrics.csv, chain.jsonl, and state.json into `dir` (created if
// needed). `effective_config` is stored verbatim in the state file.
OutputPaths write_outputs(const Simulation& sim, const std::vector<RoundMetrics>& metrics,
                          const std::filesystem::path& dir, const std::string& effective_config);

}  // namespace pqbfl::sim
