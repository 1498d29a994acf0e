#include "pqbfl/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include <CLI11.hpp>

#include "pqbfl/errors.hpp"
#include "pqbfl/replay.hpp"
#include "pqbfl/sim.hpp"

namespace pqbfl::cli {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string format(const char* fmt, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, fmt, args...);
    return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::stringstream in(s);
    std::string part;
    while (std::getline(in, part, sep)) parts.push_back(part);
    if (!s.empty() && s.back() == sep) parts.emplace_back();
    return parts;
}

// Raw option values; defaults come from ScenarioConfig.
struct SimOptions {
    sim::ScenarioConfig base;
    std::string scenario = std::string(roles::scenario_name(base.scenario));
    std::string mode = std::string(sim::mode_name(base.mode));
    std::string ratio = "5:2:1";
    // Empty selects the scenario preset.
    std::string alphas;
    std::string out = "bflsim-out";
};

void add_sim_options(CLI::App& app, SimOptions& o) {
    sim::ScenarioConfig& c = o.base;
    if (const char* env = std::getenv(kOutEnv); env && *env) o.out = env;
    app.add_option("--scenario", o.scenario, "dominant_miners, dominant_workers, random, or no_ratio")
        ->check(CLI::IsMember({"dominant_miners", "dominant_workers", "random", "no_ratio"}));
    app.add_option("--mode", o.mode, "bfl, or fl for plain federated learning without a ledger")
        ->check(CLI::IsMember({"bfl", "fl"}));
    app.add_option("--rounds", c.rounds, "Communication rounds");
    app.add_option("--devices", c.n_devices, "Number of devices");
    app.add_option("--seed", c.seed, "Master seed; fixes the entire run");
    app.add_option("--out", o.out, "Output directory")->envname(kOutEnv);
    app.add_option("--ratio", o.ratio, "Worker:validator:miner ratio");
    app.add_option("--alphas", o.alphas, "Seven comma-separated selection-value weights for vrf,s,cp,sh,cd,wd,ls; empty for the preset");
    app.add_option("--xmss-height", c.xmss_height, "XMSS tree height per keychain tree")
        ->check(CLI::Range(hybrid::kMinKeychainHeight, hybrid::kMaxKeychainHeight));
    app.add_option("--certifier", c.certifier, "Stateless certifier preset")->check(CLI::IsMember(hybrid::scheme_names()));
    app.add_option("--epochs", c.epochs, "Local epochs per worker");
    app.add_option("--lr", c.lr, "Local learning rate");
    app.add_option("--batch-size", c.batch_size, "Local mini-batch size");
    app.add_option("--threshold", c.threshold, "Validator accuracy threshold");
    app.add_option("--quorum", c.quorum, "Positive endorsements a transaction needs");
    app.add_option("--reward-worker", c.rewards.per_epoch_sample, "Stake per epoch-sample trained");
    app.add_option("--reward-validator", c.rewards.per_validation, "Stake per validation");
    app.add_option("--reward-miner", c.rewards.per_block, "Stake per appended block");
    app.add_option("--cost-hash", c.cost.per_hash, "Simulated cost per hash call");
    app.add_option("--cost-byte", c.cost.per_byte, "Simulated cost per transaction byte");
    app.add_option("--cost-sample", c.cost.per_sample, "Simulated cost per epoch-sample at cp = 1");
    app.add_option("--cost-compare", c.cost.per_compare, "Simulated cost per VRF comparison");
    app.add_option("--cp-floor", c.cost.cp_floor, "Smallest compute power used when dividing");
    app.add_option("--classes", c.data.classes, "Synthetic classes");
    app.add_option("--dim", c.data.dim, "Synthetic feature dimension");
    app.add_option("--per-class", c.data.per_class, "Synthetic samples per class");
    app.add_option("--spread", c.data.spread, "Synthetic within-class standard deviation");
    app.add_option("--skew", c.data.skew, "Dirichlet concentration of device label proportions");
    app.add_option("--holdout", c.data.holdout, "Held-out share for validators and the test set");
    app.add_option("--data-csv", c.data.csv_path, "CSV of feature columns then a label column, replacing the synthetic data");
}

std::size_t parse_count(const std::string& s, const char* what) {
    std::size_t used = 0;
    unsigned long v = 0;
    try {
        v = std::stoul(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != s.size()) throw ConfigError(std::string(what) + ": '" + s + "' is not a non-negative integer");
    return v;
}

double parse_real(const std::string& s, const char* what) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != s.size()) throw ConfigError(std::string(what) + ": '" + s + "' is not a number");
    return v;
}

sim::ScenarioConfig resolve(const SimOptions& o) {
    sim::ScenarioConfig c = o.base;
    c.scenario = roles::parse_scenario(o.scenario);
    c.mode = sim::parse_mode(o.mode);
    const auto r = split(o.ratio, ':');
    if (r.size() != 3) throw ConfigError("ratio: expected three ':'-separated counts, got '" + o.ratio + "'");
    c.ratio = {static_cast<unsigned>(parse_count(r[0], "ratio")), static_cast<unsigned>(parse_count(r[1], "ratio")),
               static_cast<unsigned>(parse_count(r[2], "ratio"))};
    if (!o.alphas.empty()) {
        const auto a = split(o.alphas, ',');
        if (a.size() != 7) throw ConfigError("alphas: expected seven comma-separated weights");
        roles::Alphas alphas;
        for (std::size_t k = 0; k < 7; ++k) alphas.a[k] = parse_real(a[k], "alphas");
        c.alphas = alphas;
    }
    c.validate();
    return c;
}

// Top-level keys only; subcommand options are not part of a run's identity.
std::string effective_config(const CLI::App& app) {
    std::stringstream in(app.config_to_str(true, false));
    std::string line, kept;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos || line.substr(0, eq).find('.') != std::string::npos) continue;
        kept += line + '\n';
    }
    return kept;
}

int cmd_run(const CLI::App& app, const SimOptions& o, std::ostream& out, std::ostream& err) {
    sim::ScenarioConfig config;
    try {
        config = resolve(o);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const ParameterError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    }
    const std::string echoed = effective_config(app);
    out << "# effective config\n" << echoed << "# end config\n";
    const auto start = Clock::now();
    try {
        sim::Simulation sim(config);
        std::vector<sim::RoundMetrics> metrics;
        while (sim.next_round() < config.rounds) {
            metrics.push_back(sim.run_round());
            const sim::RoundMetrics& m = metrics.back();
            out << format("round %llu  w/v/m %zu/%zu/%zu  winner %s  accuracy %.4f  delay %.4f  block_time %.6f\n",
                          static_cast<unsigned long long>(m.round), m.counts.workers, m.counts.validators,
                          m.counts.miners,
                          m.winner_id == ledger::kNoDevice ? "-" : std::to_string(m.winner_id).c_str(), m.accuracy,
                          m.delay, m.block_time);
        }
        const sim::OutputPaths paths = sim::write_outputs(sim, metrics, o.out, echoed);
        out << "wrote " << paths.metrics.string() << ", " << paths.chain.string() << ", " << paths.state.string()
            << '\n';
        out << format("wall-clock %.1f ms\n", ms_since(start));
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitOk;
}

int cmd_verify(const std::string& chain, const std::string& state, std::ostream& out, std::ostream& err) {
    for (const auto& p : {chain, state}) {
        if (!std::filesystem::is_regular_file(p)) {
            err << "error: " << p << " is not a readable file\n";
            return kExitRuntime;
        }
    }
    std::uint64_t recorded = 0;
    const replay::Report r = replay::verify_files(chain, state, &recorded);
    if (!r.ok()) {
        err << "verification failed at " << r.failure->describe() << '\n';
        return kExitVerify;
    }
    out << "verified " << r.blocks << " blocks, " << r.transactions << " transactions, " << r.signatures
        << " signatures, " << r.vrf_proofs << " VRF proofs: 0 failures\n";
    if (r.blocks < recorded + 1) {
        out << "warning: chain holds " << r.blocks - 1 << " of " << recorded << " recorded rounds\n";
    }
    return kExitOk;
}

int cmd_keygen_bench(const std::vector<unsigned>& heights, std::ostream& out) {
    const Bytes secret = to_bytes("keygen-bench secret");
    const Bytes pub = to_bytes("keygen-bench public");
    std::map<unsigned, std::uint64_t> calls;
    out << "height  keys  hash_calls  wall_ms  ratio_vs_h-2\n";
    for (unsigned h : heights) {
        const auto start = Clock::now();
        const xmss::XmssTree tree = xmss::XmssTree::build(h, secret, pub, 0);
        const double ms = ms_since(start);
        calls[h] = tree.build_hash_calls();
        std::string ratio = "-";
        if (const auto it = calls.find(h - 2); h >= 4 && it != calls.end()) {
            ratio = format("%.4f", static_cast<double>(calls[h]) / static_cast<double>(it->second));
        }
        out << format("%6u  %4zu  %10llu  %7.1f  ", h, tree.leaf_count(), static_cast<unsigned long long>(calls[h]), ms)
            << ratio << '\n';
    }
    return kExitOk;
}

int cmd_sig_bench(unsigned height, const std::string& certifier, std::size_t count, std::ostream& out) {
    hybrid::HybridKeychain kc = hybrid::hybrid_keygen(0, height, to_bytes("sig-bench secret"),
                                                      to_bytes("sig-bench public"), hybrid::make_certifier(certifier));
    hybrid::Registry registry;
    registry.enroll(kc);
    const Bytes payload(ledger::ModelUpdate::kEncodedSize, 0x5a);
    std::vector<hybrid::HybridSignature> sigs;
    auto start = Clock::now();
    auto calls = hash_call_count();
    for (std::size_t k = 0; k < count; ++k) sigs.push_back(kc.sign(payload));
    const double sign_ms = ms_since(start);
    const auto sign_calls = hash_call_count() - calls;
    start = Clock::now();
    calls = hash_call_count();
    std::size_t accepted = 0;
    for (const auto& s : sigs) accepted += hybrid::hybrid_verify(s, payload, registry) ? 1 : 0;
    const double verify_ms = ms_since(start);
    const auto verify_calls = hash_call_count() - calls;
    const auto n = static_cast<double>(std::max<std::size_t>(count, 1));
    out << format("height %u, certifier %s, %zu signatures over %zu-byte payloads, %u trees used\n", height,
                  certifier.c_str(), count, payload.size(), kc.tree_no() + 1);
    out << format("sign:   %.3f ms  %.1f hash calls per signature\n", sign_ms / n, static_cast<double>(sign_calls) / n);
    out << format("verify: %.3f ms  %.1f hash calls per signature, %zu/%zu accepted\n", verify_ms / n,
                  static_cast<double>(verify_calls) / n, accepted, count);
    out << "tx bytes (payload + crypto material):\n";
    out << format("  hybrid xmss h=%u: %zu\n", height,
                  payload.size() + hybrid::hybrid_crypto_bytes(height));
    for (const auto& name : hybrid::scheme_names()) {
        const auto& sc = hybrid::scheme_constants(name);
        out << format("  %s only: %zu\n", name.c_str(), payload.size() + sc.sig_size + sc.pk_size);
    }
    return accepted == count ? kExitOk : kExitVerify;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Post-quantum blockchain-based federated learning simulator", "bflsim"};
    app.option_defaults()->always_capture_default();
    app.set_config("--config", "", "TOML config file; command-line flags override it");
    app.allow_config_extras(false);
    app.require_subcommand(1);
    SimOptions sim_opts;
    add_sim_options(app, sim_opts);

    auto* run = app.add_subcommand("run", "Run the simulation and write metrics.csv, chain.jsonl, state.json");
    auto* show = app.add_subcommand("show-config", "Print the effective configuration, all defaults included");

    auto* verify = app.add_subcommand("verify-chain", "Re-verify an exported chain against its state file");
    std::string chain_path, state_path;
    verify->add_option("--chain", chain_path, "Chain file; defaults to <out>/chain.jsonl");
    verify->add_option("--state", state_path, "State file; defaults to <out>/state.json");

    auto* keygen = app.add_subcommand("keygen-bench", "Build XMSS trees and count hash calls");
    std::vector<unsigned> heights{2, 4, 6, 8, 10};
    keygen->add_option("--heights", heights, "Comma-separated tree heights")->delimiter(',')->check(CLI::Range(2u, 12u));

    auto* sigb = app.add_subcommand("sig-bench", "Time hybrid signing and verification and compare tx sizes");
    unsigned sig_height = 10;
    std::string sig_certifier = "dilithium5";
    std::size_t sig_count = 16;
    sigb->add_option("--height", sig_height, "XMSS height")
        ->check(CLI::Range(hybrid::kMinKeychainHeight, hybrid::kMaxKeychainHeight));
    sigb->add_option("--certifier", sig_certifier, "Certifier preset")->check(CLI::IsMember(hybrid::scheme_names()));
    sigb->add_option("--count", sig_count, "Signatures to produce");

    for (auto* sub : {run, show, verify, keygen, sigb}) sub->fallthrough();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    }

    if (*run) return cmd_run(app, sim_opts, out, err);
    if (*show) {
        out << effective_config(app);
        return kExitOk;
    }
    if (*verify) {
        const std::filesystem::path dir = sim_opts.out;
        return cmd_verify(chain_path.empty() ? (dir / "chain.jsonl").string() : chain_path,
                          state_path.empty() ? (dir / "state.json").string() : state_path, out, err);
    }
    try {
        if (*keygen) return cmd_keygen_bench(heights, out);
        if (*sigb) return cmd_sig_bench(sig_height, sig_certifier, sig_count, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitConfig;
}

}  // namespace pqbfl::cli
