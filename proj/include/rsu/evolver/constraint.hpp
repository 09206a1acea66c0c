#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "../metrics.hpp"
#include "../objectives.hpp"
#include "config.hpp"

namespace rsu {

enum class Preference { ABetter, BBetter, Incomparable };

inline auto pareto_preference(ObjPoint const& a, ObjPoint const& b) noexcept -> Preference
{
    if (dominates(a, b)) {
        return Preference::ABetter;
    }
    if (dominates(b, a)) {
        return Preference::BBetter;
    }
    return Preference::Incomparable;
}

/// Epsilon-level comparison. A feasible solution beats an infeasible one; two
/// feasible ones compare by dominance. Between infeasible solutions dominance
/// decides when both violations are within eps or the violations are equal,
/// otherwise the smaller violation wins.
inline auto epsilon_compare(ObjPoint const& a, double phi_a, ObjPoint const& b, double phi_b, double eps) noexcept -> Preference
{
    bool const feas_a = phi_a == 0.0;
    bool const feas_b = phi_b == 0.0;
    if (feas_a && feas_b) {
        return pareto_preference(a, b);
    }
    if (feas_a != feas_b) {
        return feas_a ? Preference::ABetter : Preference::BBetter;
    }
    if ((phi_a <= eps && phi_b <= eps) || phi_a == phi_b) {
        return pareto_preference(a, b);
    }
    return phi_a < phi_b ? Preference::ABetter : Preference::BBetter;
}

struct EpsilonState {
    double epsilon{0.0};
    double phi_max{0.0}; // largest violation seen so far
    double rho{0.0};     // feasible ratio of the current generation
};

// Sum of the theta smallest violations.
inline auto initial_epsilon(std::span<double const> phis, int theta) -> double
{
    std::vector<double> sorted(phis.begin(), phis.end());
    std::sort(sorted.begin(), sorted.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < sorted.size() && static_cast<int>(i) < theta; ++i) {
        sum += sorted[i];
    }
    return sum;
}

/// Epsilon schedule:
///   g == 0            -> sum of the theta smallest initial violations
///   rho < alpha, g<G  -> (1 - tau) * previous epsilon
///   rho >= alpha, g<G -> (1 + tau) * phi_max
///   g >= G            -> 0
inline auto epsilon_update(EpsilonState const& state, int g, EvolverConfig const& cfg, std::span<double const> initial_phis = {}) -> double
{
    if (g >= cfg.generations) {
        return 0.0;
    }
    if (g == 0) {
        return initial_epsilon(initial_phis, cfg.theta);
    }
    if (state.rho < cfg.alpha) {
        return (1.0 - cfg.tau) * state.epsilon;
    }
    return (1.0 + cfg.tau) * state.phi_max;
}

/// Fast non-dominated sorting (Deb et al.) under epsilon-level precedence.
/// Returns fronts of indices into the input, best first.
inline auto nondominated_sort(std::span<ObjPoint const> values, std::span<double const> phis, double eps) -> std::vector<std::vector<std::size_t>>
{
    std::size_t const n = values.size();
    std::vector<std::vector<std::size_t>> beats(n);
    std::vector<int> beaten_by(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            switch (epsilon_compare(values[i], phis[i], values[j], phis[j], eps)) {
            case Preference::ABetter:
                beats[i].push_back(j);
                ++beaten_by[j];
                break;
            case Preference::BBetter:
                beats[j].push_back(i);
                ++beaten_by[i];
                break;
            case Preference::Incomparable:
                break;
            }
        }
    }
    std::vector<std::vector<std::size_t>> fronts;
    std::vector<std::size_t> current;
    for (std::size_t i = 0; i < n; ++i) {
        if (beaten_by[i] == 0) {
            current.push_back(i);
        }
    }
    while (!current.empty()) {
        std::vector<std::size_t> next;
        for (auto i : current) {
            for (auto j : beats[i]) {
                if (--beaten_by[j] == 0) {
                    next.push_back(j);
                }
            }
        }
        std::sort(next.begin(), next.end());
        fronts.push_back(std::move(current));
        current = std::move(next);
    }
    return fronts;
}

} // namespace rsu
