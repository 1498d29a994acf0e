#include "pqbfl/roles.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "pqbfl/errors.hpp"

namespace pqbfl::roles {

std::string_view role_name(Role r) {
    switch (r) {
        case Role::kWorker: return "worker";
        case Role::kValidator: return "validator";
        case Role::kMiner: return "miner";
    }
    return "?";
}

std::string_view scenario_name(Scenario s) {
    switch (s) {
        case Scenario::kDominantMiners: return "dominant_miners";
        case Scenario::kDominantWorkers: return "dominant_workers";
        case Scenario::kRandom: return "random";
        case Scenario::kNoRatio: return "no_ratio";
    }
    return "?";
}

Scenario parse_scenario(std::string_view name) {
    for (Scenario s : {Scenario::kDominantMiners, Scenario::kDominantWorkers, Scenario::kRandom, Scenario::kNoRatio}) {
        if (scenario_name(s) == name) return s;
    }
    throw ParameterError("unknown scenario '" + std::string(name) + "'");
}

Alphas Alphas::preset(Scenario s) {
    Alphas a;
    if (s == Scenario::kDominantMiners) a.a = {1, 1, 1, 0, 0, 0, 0};
    return a;
}

double selection_value(const SelectionFactors& f, const Alphas& a) {
    const std::array<double, 7> v{f.vrf, f.s, f.cp, f.sh, f.cd, f.wd, f.ls};
    for (double x : v) {
        if (!std::isfinite(x)) throw ParameterError("non-finite selection factor");
    }
    for (double x : a.a) {
        if (!std::isfinite(x)) throw ParameterError("non-finite alpha");
    }
    return a.a[0] * f.vrf + a.a[1] * f.s + a.a[2] * f.cp + a.a[3] * f.sh -
           (a.a[4] * f.cd + a.a[5] * f.wd + a.a[6] * f.ls);
}

std::vector<double> normalize_stakes(std::span<const double> stakes) {
    double max_stake = 0.0;
    for (double s : stakes) max_stake = std::max(max_stake, s);
    std::vector<double> out(stakes.size(), 0.0);
    if (max_stake <= 0.0) return out;
    for (std::size_t i = 0; i < stakes.size(); ++i) out[i] = stakes[i] / max_stake;
    return out;
}

RoleCounts partition_counts(std::size_t n, const Ratio& ratio) {
    if (n < 3) throw ParameterError("need at least 3 online devices, got " + std::to_string(n));
    if (ratio.workers == 0 || ratio.validators == 0 || ratio.miners == 0) {
        throw ParameterError("every partition ratio component must be >= 1");
    }
    const unsigned sum = ratio.workers + ratio.validators + ratio.miners;
    // Integer floors of ratio * n / sum avoid floating-point rounding at exact quotas.
    RoleCounts c{ratio.workers * n / sum, ratio.validators * n / sum, ratio.miners * n / sum};
    std::size_t leftover = n - (c.workers + c.validators + c.miners);
    if (leftover > 0) {
        ++c.workers;
        --leftover;
    }
    if (leftover > 0) {
        ++c.validators;
        --leftover;
    }
    c.miners += leftover;
    if (c.miners == 0) {
        ++c.miners;
        --c.workers;
    }
    if (c.validators == 0) {
        ++c.validators;
        --c.workers;
    }
    return c;
}

RoleCounts random_counts(std::size_t n, std::uint64_t seed) {
    if (n < 3) throw ParameterError("need at least 3 online devices, got " + std::to_string(n));
    // Stars and bars: choose 2 distinct cut points in 1..n-1.
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> first(1, n - 1);
    std::size_t a = first(rng);
    std::uniform_int_distribution<std::size_t> second(1, n - 2);
    std::size_t b = second(rng);
    if (b >= a) ++b;
    if (a > b) std::swap(a, b);
    return {a, b - a, n - b};
}

std::vector<DeviceId> RoleAssignment::with_role(Role r) const {
    std::vector<DeviceId> out;
    for (const auto& [id, role] : roles) {
        if (role == r) out.push_back(id);
    }
    return out;
}

RoleAssignment assign_roles(std::span<const ScoredDevice> devices, Scenario scenario, const Ratio& ratio,
                            std::uint64_t shuffle_seed) {
    std::vector<ScoredDevice> sorted(devices.begin(), devices.end());
    std::sort(sorted.begin(), sorted.end(), [](const ScoredDevice& x, const ScoredDevice& y) { return x.id < y.id; });

    RoleAssignment out;
    switch (scenario) {
        case Scenario::kDominantWorkers:
            std::stable_sort(sorted.begin(), sorted.end(),
                             [](const ScoredDevice& x, const ScoredDevice& y) { return x.sv > y.sv; });
            out.counts = partition_counts(sorted.size(), ratio);
            break;
        case Scenario::kDominantMiners:
            std::stable_sort(sorted.begin(), sorted.end(),
                             [](const ScoredDevice& x, const ScoredDevice& y) { return x.sv < y.sv; });
            out.counts = partition_counts(sorted.size(), ratio);
            break;
        case Scenario::kRandom: {
            std::mt19937_64 rng(shuffle_seed);
            std::shuffle(sorted.begin(), sorted.end(), rng);
            out.counts = partition_counts(sorted.size(), ratio);
            break;
        }
        case Scenario::kNoRatio: {
            std::mt19937_64 rng(shuffle_seed);
            std::shuffle(sorted.begin(), sorted.end(), rng);
            out.counts = random_counts(sorted.size(), rng());
            break;
        }
    }
    for (std::size_t index = 0; index < sorted.size(); ++index) {
        Role r = Role::kMiner;
        if (index < out.counts.workers) {
            r = Role::kWorker;
        } else if (index < out.counts.workers + out.counts.validators) {
            r = Role::kValidator;
        }
        out.roles[sorted[index].id] = r;
        out.order.push_back(sorted[index].id);
    }
    return out;
}

}  // namespace pqbfl::roles
