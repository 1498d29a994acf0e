#pragma once

// Selection value and sort-and-partition role assignment.

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pqbfl::roles {

using DeviceId = std::uint32_t;

enum class Role : std::uint8_t { kWorker, kValidator, kMiner };
std::string_view role_name(Role r);

enum class Scenario : std::uint8_t { kDominantMiners, kDominantWorkers, kRandom, kNoRatio };
std::string_view scenario_name(Scenario s);
// Accepts dominant_miners, dominant_workers, random, no_ratio.
Scenario parse_scenario(std::string_view name);

struct SelectionFactors {
    double vrf = 0.0;
    double s = 0.0;   // stake / round max stake
    double cp = 0.0;
    double sh = 0.0;
    double cd = 0.0;
    double wd = 0.0;
    double ls = 0.0;
};

// Weights for vrf, s, cp, sh, cd, wd, ls in that order.
struct Alphas {
    std::array<double, 7> a{1, 1, 1, 1, 1, 1, 1};

    static Alphas preset(Scenario s);
};

// a1 vrf + a2 s + a3 cp + a4 sh - (a5 cd + a6 wd + a7 ls).
double selection_value(const SelectionFactors& f, const Alphas& a);

// Stake rescaled by the round maximum; all zeros when every stake is zero.
std::vector<double> normalize_stakes(std::span<const double> stakes);

struct Ratio {
    unsigned workers = 5;
    unsigned validators = 2;
    unsigned miners = 1;
};

struct RoleCounts {
    std::size_t workers = 0;
    std::size_t validators = 0;
    std::size_t miners = 0;

    bool operator==(const RoleCounts&) const = default;
};

// Floors of (ratio / sum) * n; leftover to workers first, then validators;
// then at least one validator and one miner, taken from workers.
RoleCounts partition_counts(std::size_t n, const Ratio& ratio);

// Uniform draw of (w, v, m) with every count >= 1 and w + v + m == n.
RoleCounts random_counts(std::size_t n, std::uint64_t seed);

struct ScoredDevice {
    DeviceId id = 0;
    double sv = 0.0;
};

struct RoleAssignment {
    std::map<DeviceId, Role> roles;
    RoleCounts counts;
    // Devices in the order the partition consumed them.
    std::vector<DeviceId> order;

    std::vector<DeviceId> with_role(Role r) const;
};

// Dominant workers: sv descending, so the best devices become workers.
// Dominant miners: sv ascending, so the best devices become miners.
// Random / no_ratio: seeded shuffle (no_ratio also draws the counts).
// Sort ties go to the lower device id.
RoleAssignment assign_roles(std::span<const ScoredDevice> devices, Scenario scenario, const Ratio& ratio,
                            std::uint64_t shuffle_seed);

}  // namespace pqbfl::roles
