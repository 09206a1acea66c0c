#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "../metrics.hpp"
#include "../random.hpp"

namespace rsu {

/// Das-Dennis simplex-lattice points on the unit simplex in 3-D:
/// all (i, j, k) / divisions with i + j + k = divisions.
inline auto reference_points(int divisions) -> std::vector<ObjPoint>
{
    std::vector<ObjPoint> out;
    double const h = divisions;
    for (int i = 0; i <= divisions; ++i) {
        for (int j = 0; j <= divisions - i; ++j) {
            int const k = divisions - i - j;
            out.push_back({i / h, j / h, k / h});
        }
    }
    return out;
}

// Distance from p to the line through the origin along w.
inline auto perpendicular_distance(ObjPoint const& p, ObjPoint const& w) noexcept -> double
{
    double const ww = w[0] * w[0] + w[1] * w[1] + w[2] * w[2];
    double const t = ww > 0.0 ? (p[0] * w[0] + p[1] * w[1] + p[2] * w[2]) / ww : 0.0;
    double sq = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
        double const d = p[k] - t * w[k];
        sq += d * d;
    }
    return std::sqrt(sq);
}

struct Nsga3Selection {
    std::vector<std::size_t> selected; // indices into the pool
    std::vector<int> niche;            // reference point per pool member (-1 if not associated)
    std::vector<double> niche_distance;
};

/// NSGA-III environmental selection. Whole fronts are taken while they fit; the
/// overflowing front is thinned by reference-point niching in the space
/// normalized by the pool's ideal and nadir points.
inline auto nsga3_select(std::span<ObjPoint const> pool, std::vector<std::vector<std::size_t>> const& fronts, std::span<ObjPoint const> refs,
    std::size_t target, Rng& rng) -> Nsga3Selection
{
    Nsga3Selection out;
    out.niche.assign(pool.size(), -1);
    out.niche_distance.assign(pool.size(), std::numeric_limits<double>::infinity());
    if (pool.size() <= target) {
        for (std::size_t i = 0; i < pool.size(); ++i) {
            out.selected.push_back(i);
        }
        return out;
    }

    std::size_t last = 0;
    for (; last < fronts.size(); ++last) {
        if (out.selected.size() + fronts[last].size() > target) {
            break;
        }
        out.selected.insert(out.selected.end(), fronts[last].begin(), fronts[last].end());
    }
    if (out.selected.size() == target || last == fronts.size()) {
        return out;
    }

    auto const b = bounds_of(pool);
    auto associate = [&](std::size_t idx) {
        auto const p = normalize(pool[idx], b);
        for (std::size_t r = 0; r < refs.size(); ++r) {
            double const d = perpendicular_distance(p, refs[r]);
            if (d < out.niche_distance[idx]) {
                out.niche_distance[idx] = d;
                out.niche[idx] = static_cast<int>(r);
            }
        }
    };
    std::vector<int> niche_count(refs.size(), 0);
    for (auto idx : out.selected) {
        associate(idx);
        ++niche_count[static_cast<std::size_t>(out.niche[idx])];
    }
    std::vector<std::size_t> candidates = fronts[last];
    for (auto idx : candidates) {
        associate(idx);
    }

    std::vector<bool> excluded(refs.size(), false);
    std::vector<bool> taken(pool.size(), false);
    std::vector<std::size_t> min_refs;
    std::vector<std::size_t> members;
    while (out.selected.size() < target) {
        int min_count = std::numeric_limits<int>::max();
        min_refs.clear();
        for (std::size_t r = 0; r < refs.size(); ++r) {
            if (excluded[r]) {
                continue;
            }
            if (niche_count[r] < min_count) {
                min_count = niche_count[r];
                min_refs.clear();
            }
            if (niche_count[r] == min_count) {
                min_refs.push_back(r);
            }
        }
        auto const r = min_refs[std::uniform_int_distribution<std::size_t>(0, min_refs.size() - 1)(rng)];
        members.clear();
        for (auto idx : candidates) {
            if (!taken[idx] && out.niche[idx] == static_cast<int>(r)) {
                members.push_back(idx);
            }
        }
        if (members.empty()) {
            excluded[r] = true;
            continue;
        }
        std::size_t pick = members.front();
        if (niche_count[r] == 0) {
            for (auto idx : members) {
                if (out.niche_distance[idx] < out.niche_distance[pick]) {
                    pick = idx;
                }
            }
        } else {
            pick = members[std::uniform_int_distribution<std::size_t>(0, members.size() - 1)(rng)];
        }
        taken[pick] = true;
        out.selected.push_back(pick);
        ++niche_count[r];
    }
    return out;
}

} // namespace rsu
