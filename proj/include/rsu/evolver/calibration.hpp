#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <tuple>
#include <vector>

#include "../deployment.hpp"
#include "../scenario.hpp"

namespace rsu {

// Traffic volume within coverage for every cell.
inline auto coverage_volumes(GridScenario const& s) -> std::vector<std::int64_t>
{
    std::vector<std::int64_t> out(static_cast<std::size_t>(s.num_cells()));
    for (CellIndex c = 0; c < s.num_cells(); ++c) {
        out[static_cast<std::size_t>(c)] = s.traffic_volume(c, s.coverage_radius_m());
    }
    return out;
}

/// Offspring distance calibration. RSU pairs closer than d_min are resolved
/// closest first (ties by lower cell indices); each keeps the RSU with the
/// higher coverage traffic volume and clears the other, clearing the higher
/// cell index on equal volume. Pairs that lost a member are skipped, so the
/// result has every pairwise distance >= d_min and is a subset of the input.
inline auto calibrate(Deployment const& genome, GridScenario const& s, double d_min_m, std::span<std::int64_t const> volumes) -> Deployment
{
    auto const cells = genome.cells();
    struct Pair {
        double dist;
        CellIndex a;
        CellIndex b;
    };
    std::vector<Pair> pairs;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        for (std::size_t j = i + 1; j < cells.size(); ++j) {
            double const d = s.distance_m(cells[i], cells[j]);
            if (d < d_min_m) {
                pairs.push_back({d, cells[i], cells[j]});
            }
        }
    }
    if (pairs.empty()) {
        return genome;
    }
    std::sort(pairs.begin(), pairs.end(), [](Pair const& x, Pair const& y) { return std::tie(x.dist, x.a, x.b) < std::tie(y.dist, y.a, y.b); });
    Deployment out = genome;
    for (auto const& p : pairs) {
        if (!out.test(p.a) || !out.test(p.b)) {
            continue;
        }
        auto const va = volumes[static_cast<std::size_t>(p.a)];
        auto const vb = volumes[static_cast<std::size_t>(p.b)];
        // a < b, so on equal volume b (the higher index) goes.
        out.set(va >= vb ? p.b : p.a, false);
    }
    return out;
}

inline auto calibrate(Deployment const& genome, GridScenario const& s, double d_min_m) -> Deployment
{
    std::vector<std::int64_t> volumes(static_cast<std::size_t>(s.num_cells()), 0);
    for (auto c : genome.cells()) {
        volumes[static_cast<std::size_t>(c)] = s.traffic_volume(c, s.coverage_radius_m());
    }
    return calibrate(genome, s, d_min_m, volumes);
}

} // namespace rsu
