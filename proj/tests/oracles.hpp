#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <rsu/evolver/constraint.hpp>
#include <rsu/metrics.hpp>

namespace rsu::test {

// Monte-Carlo hypervolume: fraction of uniform samples in [0, ref] dominated by some point.
inline auto monte_carlo_hypervolume(std::vector<ObjPoint> const& front, ObjPoint const& ref, int samples, std::uint64_t seed) -> double
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(0.0, ref[0]);
    std::uniform_real_distribution<double> uy(0.0, ref[1]);
    std::uniform_real_distribution<double> uz(0.0, ref[2]);
    long hits = 0;
    for (int i = 0; i < samples; ++i) {
        ObjPoint const s{ux(rng), uy(rng), uz(rng)};
        for (auto const& p : front) {
            if (p[0] <= s[0] && p[1] <= s[1] && p[2] <= s[2]) {
                ++hits;
                break;
            }
        }
    }
    return static_cast<double>(hits) / samples * ref[0] * ref[1] * ref[2];
}

/// Front index per member by repeated peeling: front k holds the members that
/// no remaining member beats under the epsilon-level comparison.
inline auto brute_force_ranks(std::vector<ObjPoint> const& vals, std::vector<double> const& phis, double eps) -> std::vector<int>
{
    std::size_t const n = vals.size();
    std::vector<int> rank(n, -1);
    std::size_t assigned = 0;
    for (int k = 0; assigned < n; ++k) {
        std::vector<std::size_t> layer;
        for (std::size_t i = 0; i < n; ++i) {
            if (rank[i] >= 0) {
                continue;
            }
            bool beaten = false;
            for (std::size_t j = 0; j < n && !beaten; ++j) {
                if (j != i && rank[j] < 0) {
                    auto const c = epsilon_compare(vals[j], phis[j], vals[i], phis[i], eps);
                    beaten = c == Preference::ABetter;
                }
            }
            if (!beaten) {
                layer.push_back(i);
            }
        }
        for (auto i : layer) {
            rank[i] = k;
        }
        assigned += layer.size();
    }
    return rank;
}

// Random pool with mixed feasibility and deliberate objective ties.
inline void random_pool(std::mt19937_64& rng, std::vector<ObjPoint>& vals, std::vector<double>& phis)
{
    int const n = std::uniform_int_distribution<int>(20, 60)(rng);
    std::uniform_int_distribution<int> coarse(0, 6);
    std::uniform_real_distribution<double> phi(0.0, 10.0);
    vals.clear();
    phis.clear();
    for (int i = 0; i < n; ++i) {
        vals.push_back({static_cast<double>(coarse(rng)), static_cast<double>(coarse(rng)), static_cast<double>(coarse(rng))});
        double const p = std::bernoulli_distribution(0.4)(rng) ? 0.0 : std::round(phi(rng) * 2.0) / 2.0;
        phis.push_back(p);
    }
}

} // namespace rsu::test
