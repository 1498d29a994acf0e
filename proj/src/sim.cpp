#include "pqbfl/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>

#include "pqbfl/codec.hpp"
#include "pqbfl/errors.hpp"

namespace pqbfl::sim {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

// Key material for the simulation comes from the seeded PRNG so that the
// hash counter only sees protocol work.
Bytes seed_bytes(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Bytes out(kHashBytes);
    for (std::size_t i = 0; i < out.size(); i += 8) {
        const std::uint64_t v = rng();
        for (std::size_t b = 0; b < 8; ++b) out[i + b] = static_cast<std::uint8_t>(v >> (8 * b));
    }
    return out;
}

Bytes digest_bytes(const Digest& d) { return Bytes(d.begin(), d.end()); }

void require(bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

}  // namespace

std::uint64_t sub_seed(std::uint64_t master, std::string_view label, std::uint64_t index) {
    return splitmix64(splitmix64(splitmix64(master) ^ fnv1a(label)) ^ index);
}

double simulated_delay(const WorkRecord& work, const CostModel& cost) {
    double slowest = 0.0;
    for (const TrainingLoad& t : work.training) {
        slowest = std::max(slowest, static_cast<double>(t.epoch_samples) / std::max(t.cp, cost.cp_floor));
    }
    return cost.per_hash * static_cast<double>(work.hash_calls) + cost.per_byte * static_cast<double>(work.tx_bytes) +
           cost.per_sample * slowest;
}

double simulated_block_time(std::uint64_t beacon_hash_calls, std::size_t comparisons, const CostModel& cost) {
    return cost.per_hash * static_cast<double>(beacon_hash_calls) + cost.per_compare * static_cast<double>(comparisons);
}

std::string_view mode_name(Mode m) { return m == Mode::kBfl ? "bfl" : "fl"; }

Mode parse_mode(std::string_view name) {
    if (name == "bfl") return Mode::kBfl;
    if (name == "fl") return Mode::kFlOnly;
    throw ParameterError("unknown mode '" + std::string(name) + "' (expected bfl or fl)");
}

void ScenarioConfig::validate() const {
    require(n_devices >= 3, "devices must be >= 3 (one per role)");
    require(ratio.workers >= 1 && ratio.validators >= 1 && ratio.miners >= 1, "every ratio component must be >= 1");
    require(xmss_height >= hybrid::kMinKeychainHeight && xmss_height <= hybrid::kMaxKeychainHeight,
            "xmss-height must be in [2, 10]");
    const auto names = hybrid::scheme_names();
    require(std::find(names.begin(), names.end(), certifier) != names.end(), "unknown certifier '" + certifier + "'");
    require(epochs >= 1, "epochs must be >= 1");
    require(std::isfinite(lr) && lr >= 0.0, "lr must be finite and >= 0");
    require(batch_size >= 1, "batch-size must be >= 1");
    require(threshold >= 0.0 && threshold <= 1.0, "threshold must be in [0, 1]");
    require(quorum >= 1, "quorum must be >= 1");
    for (double c : {rewards.per_epoch_sample, rewards.per_validation, rewards.per_block}) {
        require(std::isfinite(c) && c >= 0.0, "reward constants must be finite and >= 0");
    }
    for (double c : {cost.per_hash, cost.per_byte, cost.per_sample, cost.per_compare}) {
        require(std::isfinite(c) && c >= 0.0, "cost coefficients must be finite and >= 0");
    }
    require(cost.cp_floor > 0.0 && cost.cp_floor <= 1.0, "cp-floor must be in (0, 1]");
    if (alphas) {
        for (double a : alphas->a) require(std::isfinite(a), "alphas must be finite");
    }
    require(data.classes >= 2, "classes must be >= 2");
    require(data.dim >= 1, "dim must be >= 1");
    require(data.per_class >= 1, "per-class must be >= 1");
    require(data.spread > 0.0, "spread must be > 0");
    require(data.skew > 0.0, "skew must be > 0");
    require(data.holdout > 0.0 && data.holdout < 1.0, "holdout must be in (0, 1)");
}

// ---------------------------------------------------------------------------

struct Simulation::Selection {
    roles::RoleAssignment assignment;
    std::map<DeviceId, vrf::VrfOutput> vrf_out;
};

Simulation::Simulation(ScenarioConfig config) : config_(std::move(config)) {
    config_.validate();
    const std::uint64_t seed = config_.seed;
    const DatasetConfig& dc = config_.data;

    fl::LabeledDataset global;
    if (dc.csv_path.empty()) {
        global = fl::make_global_dataset(dc.classes, dc.dim, dc.per_class, sub_seed(seed, "data"), dc.spread);
    } else {
        try {
            global = fl::load_csv(dc.csv_path);
        } catch (const ParameterError& e) {
            throw ConfigError(e.what());
        }
    }
    auto [train, held] = fl::split_holdout(global, dc.holdout, sub_seed(seed, "holdout"));
    auto [validation_pool, test] = fl::split_holdout(held, 0.5, sub_seed(seed, "test"));
    require(!test.empty() && validation_pool.size() >= config_.n_devices,
            "dataset too small for the validator slices and test set");
    require(train.size() >= config_.n_devices, "dataset too small to give every device a shard");
    test_set_ = std::move(test);
    global_hist_ = train.label_hist();
    global_ = fl::Model::random(train.classes, train.dim, sub_seed(seed, "init"));

    auto shards = fl::shard(train, config_.n_devices, dc.skew, sub_seed(seed, "shard"));
    auto slices = fl::slice_iid(validation_pool, config_.n_devices, sub_seed(seed, "slices"));

    const bool ledger_on = config_.mode == Mode::kBfl;
    const auto certifier = hybrid::make_certifier(config_.certifier);
    devices_.resize(config_.n_devices);
    for (DeviceId id = 0; id < config_.n_devices; ++id) {
        DeviceState& d = devices_[id];
        d.id = id;
        d.shard = std::move(shards[id]);
        d.validation_slice = std::move(slices[id]);
        d.wd = fl::wasserstein(d.shard.label_hist(), global_hist_);
        d.vrf_seed = seed_bytes(sub_seed(seed, "vrf", id));
        stakes_[id] = 0.0;
        if (!ledger_on) continue;
        d.keychain = std::make_unique<hybrid::HybridKeychain>(
            hybrid::hybrid_keygen(id, config_.xmss_height, seed_bytes(sub_seed(seed, "xmss-secret", id)),
                                  seed_bytes(sub_seed(seed, "xmss-public", id)), certifier));
        registry_.enroll(*d.keychain);
        signer_state_[id] = {0, 0};
        d.keychain->set_state_sink([this](DeviceId signer, std::uint32_t tree_no, std::uint32_t next_index) {
            signer_state_[signer] = {tree_no, next_index};
        });
    }
    beacon_seed_ = seed_bytes(sub_seed(seed, "beacon"));
    fl_anchor_ = Hasher(HashTag::kAnchor).update("genesis").update_u64(seed).finish();
}

Bytes Simulation::round_alpha() const {
    return digest_bytes(config_.mode == Mode::kBfl ? chain().tip_hash() : fl_anchor_);
}

Simulation::Selection Simulation::select_roles(std::uint64_t round, RoundMetrics& m) {
    Selection sel;
    std::mt19937_64 cp_rng(sub_seed(config_.seed, "cp", round));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (DeviceState& d : devices_) d.cp = unit(cp_rng);

    const Bytes alpha = round_alpha();
    for (DeviceState& d : devices_) {
        vrf::VrfKeypair kp = vrf::vrf_keygen(d.vrf_seed, round);
        vrf::VrfOutput out = vrf::vrf_prove(kp, alpha);
        const vrf::VrfPublicKey pk = kp.public_key();
        if (!vrf::vrf_verify(pk, alpha, out)) throw ConsensusError("VRF output of device " + std::to_string(d.id) + " failed verification");
        d.vrf_keys.push_back(pk);
        sel.vrf_out.emplace(d.id, std::move(out));
    }

    std::vector<double> raw_stakes;
    for (const DeviceState& d : devices_) raw_stakes.push_back(d.stake);
    const std::vector<double> s = roles::normalize_stakes(raw_stakes);

    // Shape values are centred on the latest accuracy of every device that
    // has reported, so every device is compared against the same baseline.
    double accuracy_sum = 0.0;
    std::size_t reporting = 0;
    for (const DeviceState& d : devices_) {
        if (!d.last_report) continue;
        accuracy_sum += d.last_report->val_accuracy;
        ++reporting;
    }
    const double population_accuracy = reporting ? accuracy_sum / static_cast<double>(reporting) : 0.0;

    const roles::Alphas alphas = config_.effective_alphas();
    std::vector<roles::ScoredDevice> scored;
    for (std::size_t i = 0; i < devices_.size(); ++i) {
        const DeviceState& d = devices_[i];
        roles::SelectionFactors f;
        f.vrf = sel.vrf_out.at(d.id).unit_value;
        f.s = s[i];
        f.cp = d.cp;
        if (round > 0) {
            f.wd = d.wd;
            if (d.last_report) {
                f.sh = d.last_report->val_accuracy - population_accuracy;
                f.cd = d.last_report->cd;
                f.ls = d.last_report->ls;
            }
        }
        DeviceMetrics dm;
        dm.id = d.id;
        dm.factors = f;
        dm.sv = roles::selection_value(f, alphas);
        m.devices.push_back(dm);
        scored.push_back({d.id, dm.sv});
    }
    sel.assignment = roles::assign_roles(scored, config_.scenario, config_.ratio, sub_seed(config_.seed, "shuffle", round));
    m.counts = sel.assignment.counts;
    for (DeviceMetrics& dm : m.devices) dm.role = sel.assignment.roles.at(dm.id);
    return sel;
}

RoundMetrics Simulation::run_round() {
    const std::uint64_t round = round_;
    const std::uint64_t calls_at_start = hash_call_count();
    const bool ledger_on = config_.mode == Mode::kBfl;
    RoundMetrics m;
    m.round = round;
    try {
        // (1) role selection
        Selection sel = select_roles(round, m);
        const auto workers = sel.assignment.with_role(roles::Role::kWorker);
        const auto validators = sel.assignment.with_role(roles::Role::kValidator);
        const auto miners = sel.assignment.with_role(roles::Role::kMiner);

        // (2)-(3) workers train from the current global model
        struct Trained {
            DeviceId id;
            fl::TrainResult result;
            Digest digest;
            std::uint32_t samples;
        };
        std::vector<Trained> trained;
        std::map<Digest, fl::Model> model_store;
        for (DeviceId w : workers) {
            DeviceState& d = devices_[w];
            fl::TrainResult r;
            try {
                r = fl::train_local(global_, d.shard, config_.epochs, config_.lr, config_.batch_size);
            } catch (const TrainingError&) {
                continue;
            }
            const auto samples = static_cast<std::uint32_t>(d.shard.size());
            m.work.training.push_back({static_cast<std::uint64_t>(config_.epochs) * samples, d.cp});
            Digest digest = ledger::model_digest(r.model);
            model_store.emplace(digest, r.model);
            trained.push_back({w, std::move(r), digest, samples});
        }

        // (4) workers sign transactions; validators score and endorse them
        std::vector<ledger::Transaction> txs;
        std::map<DeviceId, std::vector<double>> scores;
        std::map<DeviceId, std::size_t> validations;
        for (const Trained& t : trained) {
            if (ledger_on) {
                const ledger::ModelUpdate update{t.id, round, static_cast<std::uint32_t>(config_.epochs), t.samples,
                                                 ledger::to_ppm(fl::evaluate(t.result.model, devices_[t.id].shard)),
                                                 t.digest};
                ledger::Transaction tx = ledger::create_tx(t.id, *devices_[t.id].keychain, update);
                for (DeviceId v : validators) {
                    DeviceState& vd = devices_[v];
                    const ledger::ValidationResult res =
                        ledger::validate_tx(v, *vd.keychain, tx, &model_store.at(t.digest), vd.validation_slice,
                                            config_.threshold, registry_);
                    scores[t.id].push_back(res.accuracy);
                    ++validations[v];
                    m.tx_bytes += res.endorsement.wire().size();
                    tx.endorsements.push_back(res.endorsement);
                }
                m.tx_bytes += tx.byte_size();
                txs.push_back(std::move(tx));
            } else {
                for (DeviceId v : validators) scores[t.id].push_back(fl::evaluate(t.result.model, devices_[v].validation_slice));
                m.tx_bytes += ledger::ModelUpdate::kEncodedSize;
            }
        }
        m.txs_created = trained.size();

        // Learning reports for the next round's selection.
        if (!trained.empty()) {
            std::vector<double> acc;
            for (const Trained& t : trained) {
                const auto& sc = scores[t.id];
                double mean = 0.0;
                for (double a : sc) mean += a;
                acc.push_back(sc.empty() ? 0.0 : mean / static_cast<double>(sc.size()));
            }
            const std::vector<double> sh = fl::shape_values(acc);
            double loss_sum = 0.0;
            for (std::size_t i = 0; i < trained.size(); ++i) {
                const Trained& t = trained[i];
                const fl::CosineDistance cd = fl::cosine_distance(t.result.model.weights, global_.weights);
                LearningReport rep{t.id, round, t.result.normalized_loss, acc[i], sh[i], cd.value, devices_[t.id].wd,
                                   cd.degenerate};
                devices_[t.id].last_report = rep;
                m.reports.push_back(rep);
                loss_sum += t.result.loss_history.back();
            }
            m.mean_loss = loss_sum / static_cast<double>(trained.size());
        }

        if (ledger_on) {
            // (5) every miner assembles and signs a candidate block
            const Digest tip = chain().tip_hash();
            std::map<DeviceId, ledger::Block> candidates;
            for (DeviceId miner : miners) {
                candidates.emplace(miner, ledger::mine_block(miner, *devices_[miner].keychain, round, txs, tip,
                                                             registry_, config_.quorum)
                                              .block);
            }

            // (6) beacon VRF picks the miner whose initial value is closest
            const Bytes alpha = digest_bytes(tip);
            const std::uint64_t beacon_start = hash_call_count();
            vrf::VrfKeypair beacon_kp = vrf::vrf_keygen(beacon_seed_, round);
            vrf::VrfOutput beacon = vrf::vrf_prove(beacon_kp, alpha);
            if (!vrf::vrf_verify(beacon_kp.public_key(), alpha, beacon)) throw ConsensusError("beacon VRF failed verification");
            m.beacon_hash_calls = hash_call_count() - beacon_start;
            beacon_keys_.push_back(beacon_kp.public_key());

            std::vector<ledger::MinerCandidate> pool;
            ledger::ConsensusRecord record;
            record.round = round;
            record.beacon = beacon;
            for (DeviceId miner : miners) {
                pool.push_back({miner, sel.vrf_out.at(miner).unit_value});
                record.candidates.emplace_back(miner, sel.vrf_out.at(miner));
            }
            m.comparisons = pool.size();
            m.winner_id = ledger::select_winner(pool, beacon.unit_value);
            record.winner = m.winner_id;
            m.block_time = simulated_block_time(m.beacon_hash_calls, m.comparisons, config_.cost);

            // Only the winner's block propagates; every replica appends it.
            const ledger::Block& block = candidates.at(m.winner_id);
            for (DeviceState& d : devices_) {
                try {
                    d.replica.append(block, m.winner_id, registry_, config_.quorum);
                } catch (const ledger::AppendRejected& e) {
                    throw ConsensusError("device " + std::to_string(d.id) + " rejected the winning block: " + e.what());
                }
            }
            std::set<Digest> tips;
            for (const DeviceState& d : devices_) tips.insert(d.replica.tip_hash());
            m.forks = tips.size() - 1;
            consensus_.push_back(std::move(record));
            m.txs_in_block = block.txs.size();

            // Aggregate the models the winning block carries and pay out.
            ledger::RoundRewards rewards;
            std::vector<fl::Model> models;
            std::vector<std::size_t> counts;
            for (const ledger::Transaction& tx : block.txs) {
                const ledger::ModelUpdate u = ledger::ModelUpdate::decode(tx.payload);
                models.push_back(model_store.at(u.weights_digest));
                counts.push_back(u.samples);
                rewards.workers.push_back({u.worker, u.epochs, u.samples});
            }
            if (!models.empty()) global_ = fl::fedavg(models, counts);
            for (const auto& [v, count] : validations) rewards.validations.emplace_back(v, count);
            rewards.winning_miner = m.winner_id;
            stakes_ = ledger::apply_rewards(stakes_, rewards, config_.rewards);
            for (DeviceState& d : devices_) d.stake = stakes_.at(d.id);
        } else {
            std::vector<fl::Model> models;
            std::vector<std::size_t> counts;
            for (const Trained& t : trained) {
                models.push_back(t.result.model);
                counts.push_back(t.samples);
            }
            if (!models.empty()) global_ = fl::fedavg(models, counts);
            m.txs_in_block = trained.size();
            fl_anchor_ = Hasher(HashTag::kAnchor)
                             .update(fl_anchor_)
                             .update_u64(round)
                             .update(ledger::model_digest(global_))
                             .finish();
        }
    } catch (const ConsensusError& e) {
        throw ConsensusError("round " + std::to_string(round) + ": " + e.what());
    }

    m.accuracy = fl::evaluate(global_, test_set_);
    m.hash_calls = hash_call_count() - calls_at_start;
    m.work.hash_calls = m.hash_calls;
    m.work.tx_bytes = m.tx_bytes;
    m.delay = simulated_delay(m.work, config_.cost);
    for (DeviceMetrics& dm : m.devices) dm.stake = stakes_.at(dm.id);
    ++round_;
    return m;
}

std::vector<RoundMetrics> Simulation::run() {
    std::vector<RoundMetrics> out;
    while (round_ < config_.rounds) out.push_back(run_round());
    return out;
}

// ---------------------------------------------------------------------------

std::string csv_header(std::size_t n_devices) {
    std::string h = "round,w,v,m,winner_id,accuracy,mean_loss,tx_bytes,delay,block_time,hash_calls";
    for (std::size_t i = 0; i < n_devices; ++i) h += ",sv_" + std::to_string(i);
    for (std::size_t i = 0; i < n_devices; ++i) h += ",role_" + std::to_string(i);
    return h;
}

std::string csv_row(const RoundMetrics& m) {
    std::string r = std::to_string(m.round) + "," + std::to_string(m.counts.workers) + "," +
                    std::to_string(m.counts.validators) + "," + std::to_string(m.counts.miners) + ",";
    r += m.winner_id == ledger::kNoDevice ? "" : std::to_string(m.winner_id);
    r += "," + format_double(m.accuracy) + "," + format_double(m.mean_loss) + "," + std::to_string(m.tx_bytes) + "," +
         format_double(m.delay) + "," + format_double(m.block_time) + "," + std::to_string(m.hash_calls);
    for (const DeviceMetrics& d : m.devices) r += "," + format_double(d.sv);
    for (const DeviceMetrics& d : m.devices) r += "," + std::string(roles::role_name(d.role));
    return r;
}

OutputPaths output_paths(const std::filesystem::path& dir) {
    return {dir / "metrics.csv", dir / "chain.jsonl", dir / "state.json"};
}

OutputPaths write_outputs(const Simulation& sim, const std::vector<RoundMetrics>& metrics,
                          const std::filesystem::path& dir, const std::string& effective_config) {
    std::filesystem::create_directories(dir);
    const OutputPaths paths = output_paths(dir);
    auto open = [](const std::filesystem::path& p) {
        std::ofstream out(p, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + p.string());
        return out;
    };
    {
        std::ofstream out = open(paths.metrics);
        out << csv_header(sim.config().n_devices) << '\n';
        for (const RoundMetrics& m : metrics) out << csv_row(m) << '\n';
    }
    {
        std::ofstream out = open(paths.chain);
        const auto& blocks = sim.chain().blocks();
        for (std::size_t k = 0; k < blocks.size(); ++k) {
            const ledger::ConsensusRecord* c = k == 0 ? nullptr : &sim.consensus().at(k - 1);
            out << codec::chain_line(k, blocks[k], c).dump() << '\n';
        }
    }
    {
        using codec::Json;
        Json devices = Json::array();
        for (const DeviceState& d : sim.devices()) {
            Json keys = Json::array();
            for (const auto& pk : d.vrf_keys) keys.push_back(codec::to_json(pk));
            Json dev{{"id", d.id}, {"stake", d.stake}, {"cp", d.cp}, {"wd", d.wd}};
            if (sim.registry().contains(d.id)) {
                const auto& st = sim.signer_state().at(d.id);
                dev["registry"] = codec::to_json(sim.registry().find(d.id));
                dev["keychain"] = Json{{"tree_no", st.first}, {"next_index", st.second}};
            } else {
                dev["registry"] = nullptr;
                dev["keychain"] = nullptr;
            }
            dev["vrf_keys"] = std::move(keys);
            devices.push_back(std::move(dev));
        }
        Json beacon = Json::array();
        for (const auto& pk : sim.beacon_keys()) beacon.push_back(codec::to_json(pk));
        const Json state{{"format", "bflsim-state/1"},
                         {"mode", mode_name(sim.config().mode)},
                         {"rounds_completed", sim.next_round()},
                         {"quorum", sim.config().quorum},
                         {"config", effective_config},
                         {"devices", std::move(devices)},
                         {"beacon_vrf_keys", std::move(beacon)}};
        std::ofstream out = open(paths.state);
        out << state.dump(1) << '\n';
    }
    return paths;
}

}  // namespace pqbfl::sim
