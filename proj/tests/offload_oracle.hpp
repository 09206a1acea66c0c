#pragma once

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <rsu/offloading.hpp>

namespace rsu::test {

// Delay of a single-period assignment computed from scratch.
inline auto period_delay(GridScenario const& s, Assignment a, LinkBudgetParams const& p, QueueParams const& q) -> double
{
    a.recount();
    return total_assignment_delay(s, a, p, q, direct_transmission(s, p));
}

/// Minimum total delay over every joint assignment of the present vehicles of
/// period 0 to {cellular, RSU 0..R-1}: (R + 1)^V candidates.
inline auto brute_force_optimum(GridScenario const& s, Deployment const& d, LinkBudgetParams const& p, QueueParams const& q) -> double
{
    Assignment a = detail::empty_assignment(s, d);
    int const r = static_cast<int>(a.rsu_cells.size());
    std::vector<int> present;
    for (int v = 0; v < s.num_vehicles(); ++v) {
        if (a.targets[0][static_cast<std::size_t>(v)] != kNotPresent) {
            present.push_back(v);
        }
    }
    std::vector<int> digit(present.size(), -1);
    double best = std::numeric_limits<double>::infinity();
    while (true) {
        for (std::size_t i = 0; i < present.size(); ++i) {
            a.targets[0][static_cast<std::size_t>(present[i])] = digit[i];
        }
        best = std::min(best, period_delay(s, a, p, q));
        std::size_t k = 0;
        while (k < digit.size() && ++digit[k] == r) {
            digit[k] = -1;
            ++k;
        }
        if (k == digit.size()) {
            break;
        }
    }
    return best;
}

/// True when no single vehicle can lower the period-0 total by moving to another
/// usable target (cellular or an in-coverage RSU).
inline auto one_deviation_stable(GridScenario const& s, Assignment const& a, LinkBudgetParams const& p, QueueParams const& q, double tol = 1e-9) -> bool
{
    double const base = period_delay(s, a, p, q);
    auto const trans = direct_transmission(s, p);
    for (int v = 0; v < s.num_vehicles(); ++v) {
        int const cur = a.targets[0][static_cast<std::size_t>(v)];
        if (cur == kNotPresent) {
            continue;
        }
        CellIndex const pos = s.traces()[static_cast<std::size_t>(v)].positions[0];
        for (int alt = -1; alt < static_cast<int>(a.rsu_cells.size()); ++alt) {
            if (alt == cur || (alt >= 0 && !trans(pos, a.rsu_cells[static_cast<std::size_t>(alt)]))) {
                continue;
            }
            Assignment moved = a;
            moved.targets[0][static_cast<std::size_t>(v)] = alt;
            if (period_delay(s, moved, p, q) < base - tol) {
                return false;
            }
        }
    }
    return true;
}

struct OffloadInstance {
    GridScenario scenario;
    Deployment deployment;
    QueueParams queue;
};

// Small single-period map with up to 3 RSUs and 6 vehicles; a low service rate makes congestion matter.
inline auto random_offload_instance(std::uint64_t seed) -> OffloadInstance
{
    std::mt19937_64 rng(seed);
    ScenarioData d;
    d.width_cells = 8;
    d.height_cells = 8;
    d.cell_size_m = 20.0;
    d.num_periods = 1;
    d.coverage_radius_m = std::uniform_real_distribution<double>(40.0, 120.0)(rng);
    std::uniform_int_distribution<int> cell(0, 63);
    int const obstacles = std::uniform_int_distribution<int>(0, 6)(rng);
    for (int i = 0; i < obstacles; ++i) {
        d.obstacles.push_back(cell(rng));
    }
    int const vehicles = std::uniform_int_distribution<int>(1, 6)(rng);
    for (int v = 0; v < vehicles; ++v) {
        d.traces.push_back({"v" + std::to_string(v), {cell(rng)}});
    }
    GridScenario s(std::move(d));
    Deployment dep(64);
    int const rsus = std::uniform_int_distribution<int>(1, 3)(rng);
    while (dep.count() < rsus) {
        dep.set(cell(rng), true);
    }
    QueueParams q;
    q.service_rate = std::uniform_real_distribution<double>(1.5, 8.0)(rng);
    if (std::bernoulli_distribution(0.3)(rng)) {
        q.saturation = SaturationPolicy::cellular();
    }
    return {std::move(s), std::move(dep), q};
}

} // namespace rsu::test
