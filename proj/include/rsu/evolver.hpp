#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <tuple>
#include <utility>
#include <vector>

#include "deployment.hpp"
#include "evolver/calibration.hpp"
#include "evolver/config.hpp"
#include "evolver/constraint.hpp"
#include "evolver/nsga3.hpp"
#include "metrics.hpp"
#include "objectives.hpp"
#include "parallel.hpp"
#include "random.hpp"
#include "scenario.hpp"

namespace rsu {

struct Individual {
    Deployment genome;
    ObjectiveVector objectives;
    ViolationReport violation;
    int rank{0};
    int niche{-1};

    [[nodiscard]] auto values() const noexcept -> ObjPoint { return objectives.values(); }
    [[nodiscard]] auto phi() const noexcept -> double { return violation.phi; }
    [[nodiscard]] auto feasible() const noexcept -> bool { return is_feasible(violation); }
};

inline auto epsilon_compare(Individual const& a, Individual const& b, double eps) noexcept -> Preference
{
    return epsilon_compare(a.values(), a.phi(), b.values(), b.phi(), eps);
}

inline auto nondominated_sort(std::span<Individual const> members, double eps) -> std::vector<std::vector<std::size_t>>
{
    std::vector<ObjPoint> vals;
    std::vector<double> phis;
    vals.reserve(members.size());
    phis.reserve(members.size());
    for (auto const& m : members) {
        vals.push_back(m.values());
        phis.push_back(m.phi());
    }
    return nondominated_sort(vals, phis, eps);
}

// What the adaptive-rate rule compares between consecutive generations.
struct ImprovementRecord {
    std::vector<ObjPoint> feasible_front;
    double min_phi{std::numeric_limits<double>::infinity()};
};

inline auto improvement_record(std::span<Individual const> members) -> ImprovementRecord
{
    ImprovementRecord rec;
    std::vector<ObjPoint> feasible;
    for (auto const& m : members) {
        rec.min_phi = std::min(rec.min_phi, m.phi());
        if (m.feasible()) {
            feasible.push_back(m.values());
        }
    }
    for (auto i : nondominated_indices(feasible)) {
        rec.feasible_front.push_back(feasible[i]);
    }
    return rec;
}

/// True when the feasible non-dominated set gained hypervolume (both fronts
/// normalized by their joint extremes, reference 1.1), or, with no feasible
/// member now, when the minimum violation dropped.
inline auto improvement_test(ImprovementRecord const& prev, ImprovementRecord const& cur) -> bool
{
    if (cur.feasible_front.empty()) {
        return prev.feasible_front.empty() && cur.min_phi < prev.min_phi;
    }
    if (prev.feasible_front.empty()) {
        return true;
    }
    std::vector<ObjPoint> both = prev.feasible_front;
    both.insert(both.end(), cur.feasible_front.begin(), cur.feasible_front.end());
    auto const b = bounds_of(both);
    double const hv_prev = hypervolume(normalize(prev.feasible_front, b));
    double const hv_cur = hypervolume(normalize(cur.feasible_front, b));
    return hv_cur > hv_prev * (1.0 + 1e-12);
}

struct Rates {
    double crossover;
    double mutation;
};

// Improvement shifts toward exploitation (more crossover, less mutation), stagnation the other way.
inline auto adapt_rates(Rates r, bool improved, EvolverConfig const& cfg) -> Rates
{
    if (improved) {
        r.crossover += cfg.delta_c;
        r.mutation -= cfg.delta_m;
    } else {
        r.crossover -= cfg.delta_c;
        r.mutation += cfg.delta_m;
    }
    r.crossover = std::clamp(r.crossover, cfg.crossover_min, cfg.crossover_max);
    r.mutation = std::clamp(r.mutation, cfg.mutation_min, cfg.mutation_max);
    return r;
}

struct SubPopulation {
    std::vector<Individual> members;
    double crossover_rate{0.5};
    double mutation_rate{0.05};
    EpsilonState eps;
    ImprovementRecord prev_best;

    [[nodiscard]] auto rates() const noexcept -> Rates { return {crossover_rate, mutation_rate}; }
};

inline auto improvement_test(SubPopulation const& sub) -> bool
{
    return improvement_test(sub.prev_best, improvement_record(sub.members));
}

/// Uniform crossover with probability crossover_rate, then per child, with
/// probability mutation_rate, one event toggling n_mut distinct random genes.
/// Toggles never set a bit on an obstacle cell.
inline auto variation(Deployment const& p1, Deployment const& p2, Rates rates, int n_mut, GridScenario const& s, Rng& rng)
    -> std::pair<Deployment, Deployment>
{
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Deployment c1 = p1;
    Deployment c2 = p2;
    if (unit(rng) < rates.crossover) {
        std::bernoulli_distribution coin(0.5);
        for (CellIndex k = 0; k < p1.size(); ++k) {
            if (coin(rng)) {
                c1.set(k, p2.test(k));
                c2.set(k, p1.test(k));
            }
        }
    }
    auto mutate = [&](Deployment& child) {
        if (!(unit(rng) < rates.mutation)) {
            return;
        }
        int const k = child.size();
        int const n = std::min(n_mut, k);
        std::uniform_int_distribution<CellIndex> gene(0, k - 1);
        std::vector<CellIndex> chosen;
        while (static_cast<int>(chosen.size()) < n) {
            CellIndex const g = gene(rng);
            if (std::find(chosen.begin(), chosen.end(), g) == chosen.end()) {
                chosen.push_back(g);
            }
        }
        for (auto g : chosen) {
            if (child.test(g) || !s.is_obstacle(g)) {
                child.flip(g);
            }
        }
    };
    mutate(c1);
    mutate(c2);
    return {std::move(c1), std::move(c2)};
}

// Total order used by migration: rank, then violation, then crowding distance
// within the rank (boundary members first), then f1.
inline auto migration_order(SubPopulation const& sub) -> std::vector<std::size_t>
{
    auto const fronts = nondominated_sort(sub.members, sub.eps.epsilon);
    std::vector<int> rank(sub.members.size(), 0);
    for (std::size_t f = 0; f < fronts.size(); ++f) {
        for (auto i : fronts[f]) {
            rank[i] = static_cast<int>(f);
        }
    }
    std::vector<double> crowd(sub.members.size(), 0.0);
    for (auto const& front : fronts) {
        for (std::size_t k = 0; k < 3; ++k) {
            std::vector<std::size_t> idx = front;
            std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
                return std::make_pair(sub.members[a].values()[k], a) < std::make_pair(sub.members[b].values()[k], b);
            });
            double const lo = sub.members[idx.front()].values()[k];
            double const hi = sub.members[idx.back()].values()[k];
            crowd[idx.front()] = crowd[idx.back()] = std::numeric_limits<double>::infinity();
            if (hi <= lo) {
                continue;
            }
            for (std::size_t r = 1; r + 1 < idx.size(); ++r) {
                crowd[idx[r]] += (sub.members[idx[r + 1]].values()[k] - sub.members[idx[r - 1]].values()[k]) / (hi - lo);
            }
        }
    }
    std::vector<std::size_t> order(sub.members.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        auto const& ma = sub.members[a];
        auto const& mb = sub.members[b];
        return std::make_tuple(rank[a], ma.phi(), -crowd[a], ma.objectives.f1_total_delay_s)
            < std::make_tuple(rank[b], mb.phi(), -crowd[b], mb.objectives.f1_total_delay_s);
    });
    return order;
}

struct MigrationReport {
    std::vector<int> emigrants;  // copies sent, per island
    std::vector<int> immigrants; // members replaced, per island
};

/// Island migration: every island copies out its best N_EM members; each island
/// then overwrites its worst (m - 1) * N_EM members with the other islands'
/// emigrants. Sources keep their emigrants.
inline auto migrate(std::vector<SubPopulation>& islands, EvolverConfig const& cfg) -> MigrationReport
{
    std::size_t const m = islands.size();
    MigrationReport report{std::vector<int>(m, 0), std::vector<int>(m, 0)};
    if (m < 2) {
        return report;
    }
    auto const n_em = static_cast<std::size_t>(cfg.emigrants_per_island());
    for (auto const& isl : islands) {
        if ((m - 1) * n_em > isl.members.size()) {
            throw ConfigError("migration: (islands - 1) * emigrants exceeds the island size");
        }
    }
    std::vector<std::vector<Individual>> emigrants(m);
    std::vector<std::vector<std::size_t>> orders(m);
    for (std::size_t i = 0; i < m; ++i) {
        orders[i] = migration_order(islands[i]);
        for (std::size_t k = 0; k < n_em; ++k) {
            emigrants[i].push_back(islands[i].members[orders[i][k]]);
        }
        report.emigrants[i] = static_cast<int>(n_em);
    }
    for (std::size_t i = 0; i < m; ++i) {
        auto& members = islands[i].members;
        std::size_t slot = members.size();
        for (std::size_t j = 0; j < m; ++j) {
            if (j == i) {
                continue;
            }
            for (auto const& e : emigrants[j]) {
                members[orders[i][--slot]] = e;
                ++report.immigrants[i];
            }
        }
    }
    return report;
}

struct GenerationStats {
    int generation{0};
    int island{0};
    double epsilon{0.0};
    double rho{0.0};
    double crossover_rate{0.0};
    double mutation_rate{0.0};
    int feasible_count{0};
    double best_f1{std::numeric_limits<double>::quiet_NaN()};
    double best_f2{std::numeric_limits<double>::quiet_NaN()};
    double best_f3{std::numeric_limits<double>::quiet_NaN()};
    double hypervolume{0.0};
    int island_size{0};
    int emigrants{0};
    int immigrants{0};
};

struct ParetoResult {
    std::vector<Individual> pareto;         // non-dominated members of the final pooled population
    std::vector<Individual> feasible_front; // non-dominated feasible members
    std::vector<Individual> final_population;
    std::vector<GenerationStats> telemetry;
};

namespace detail {

    enum StreamTag : std::uint64_t { kInit = 0x11, kVariation = 0x22, kSelection = 0x33, kOffload = 0x44 };

    inline auto offload_seed(std::uint64_t master, Deployment const& d) -> std::uint64_t
    {
        return derive_seed({master, kOffload, d.fingerprint()});
    }

    // Fixed objective scale for telemetry hypervolume: all-cellular delays and the free cell count.
    inline auto telemetry_scale(GridScenario const& s, double cellular_s) -> ObjPoint
    {
        double presences = 0.0;
        for (auto const& t : s.traces()) {
            for (auto p : t.positions) {
                presences += p != kAbsent ? 1.0 : 0.0;
            }
        }
        return {std::max(presences * cellular_s, 1e-12), std::max(s.num_periods() * cellular_s, 1e-12), std::max(1.0, static_cast<double>(s.free_cell_count()))};
    }

    inline auto island_stats(SubPopulation const& sub, int g, int island, ObjPoint const& scale) -> GenerationStats
    {
        GenerationStats st;
        st.generation = g;
        st.island = island;
        st.epsilon = sub.eps.epsilon;
        st.rho = sub.eps.rho;
        st.crossover_rate = sub.crossover_rate;
        st.mutation_rate = sub.mutation_rate;
        st.island_size = static_cast<int>(sub.members.size());
        std::vector<ObjPoint> feasible;
        for (auto const& m : sub.members) {
            if (!m.feasible()) {
                continue;
            }
            ++st.feasible_count;
            auto const v = m.values();
            feasible.push_back({std::min(v[0] / scale[0], 1.1), std::min(v[1] / scale[1], 1.1), std::min(v[2] / scale[2], 1.1)});
            if (std::isnan(st.best_f1) || v[0] < st.best_f1) {
                st.best_f1 = v[0];
            }
            if (std::isnan(st.best_f2) || v[1] < st.best_f2) {
                st.best_f2 = v[1];
            }
            if (std::isnan(st.best_f3) || v[2] < st.best_f3) {
                st.best_f3 = v[2];
            }
        }
        st.hypervolume = hypervolume(feasible);
        return st;
    }

    inline auto feasible_ratio(std::span<Individual const> members) -> double
    {
        if (members.empty()) {
            return 0.0;
        }
        auto const n = std::count_if(members.begin(), members.end(), [](Individual const& m) { return m.feasible(); });
        return static_cast<double>(n) / static_cast<double>(members.size());
    }

    inline auto tournament(SubPopulation const& sub, Rng& rng) -> Individual const&
    {
        std::uniform_int_distribution<std::size_t> pick(0, sub.members.size() - 1);
        auto const& a = sub.members[pick(rng)];
        auto const& b = sub.members[pick(rng)];
        switch (epsilon_compare(a, b, sub.eps.epsilon)) {
        case Preference::ABetter:
            return a;
        case Preference::BBetter:
            return b;
        case Preference::Incomparable:
            break;
        }
        return std::bernoulli_distribution(0.5)(rng) ? a : b;
    }

    // Non-dominated subset (plain Pareto on objectives) with repeated genomes removed, in a canonical order.
    inline auto unique_nondominated(std::vector<Individual const*> const& pool) -> std::vector<Individual>
    {
        std::vector<ObjPoint> vals;
        for (auto const* p : pool) {
            vals.push_back(p->values());
        }
        std::vector<Individual> out;
        for (auto i : nondominated_indices(vals)) {
            out.push_back(*pool[i]);
        }
        std::sort(out.begin(), out.end(), [](Individual const& a, Individual const& b) {
            return std::tie(a.objectives.f1_total_delay_s, a.objectives.f2_max_sensitive_delay_s, a.objectives.f3_rsu_count, a.violation.phi, a.genome)
                < std::tie(b.objectives.f1_total_delay_s, b.objectives.f2_max_sensitive_delay_s, b.objectives.f3_rsu_count, b.violation.phi, b.genome);
        });
        out.erase(std::unique(out.begin(), out.end(), [](Individual const& a, Individual const& b) { return a.genome == b.genome; }), out.end());
        return out;
    }

} // namespace detail

/// Random islands: each bit is set with probability init_density / K, never on
/// an obstacle cell. Members are evaluated and each island's epsilon starts at
/// the schedule's initial value over its own members.
inline auto initialize(EvolverConfig const& cfg, Evaluator const& eval, int workers = 1) -> std::vector<SubPopulation>
{
    cfg.validate();
    auto const& s = eval.scenario();
    if (s.free_cell_count() == 0) {
        throw ConfigError("initialize: obstacles cover every cell");
    }
    int const k = s.num_cells();
    double const p_bit = std::min(1.0, cfg.init_density / k);
    auto const m = static_cast<std::size_t>(cfg.islands);
    auto const size = static_cast<std::size_t>(cfg.island_size());

    std::vector<SubPopulation> islands(m);
    for (std::size_t i = 0; i < m; ++i) {
        auto& isl = islands[i];
        isl.crossover_rate = cfg.crossover_init;
        isl.mutation_rate = cfg.mutation_init;
        isl.members.resize(size);
        for (std::size_t slot = 0; slot < size; ++slot) {
            auto rng = make_stream({cfg.master_seed, 0, i, slot, detail::kInit});
            std::bernoulli_distribution bit(p_bit);
            Deployment d(k);
            for (CellIndex c = 0; c < k; ++c) {
                if (bit(rng) && !s.is_obstacle(c)) {
                    d.set(c, true);
                }
            }
            isl.members[slot].genome = std::move(d);
        }
    }
    parallel_for(m * size, workers, [&](std::size_t n) {
        auto& ind = islands[n / size].members[n % size];
        auto const e = eval.evaluate(ind.genome, detail::offload_seed(cfg.master_seed, ind.genome));
        ind.objectives = e.objectives;
        ind.violation = e.violation;
    });
    for (auto& isl : islands) {
        std::vector<double> phis;
        for (auto const& mbr : isl.members) {
            phis.push_back(mbr.phi());
            isl.eps.phi_max = std::max(isl.eps.phi_max, mbr.phi());
        }
        isl.eps.rho = detail::feasible_ratio(isl.members);
        isl.eps.epsilon = cfg.epsilon_schedule ? epsilon_update(isl.eps, 0, cfg, phis) : 0.0;
        isl.prev_best = improvement_record(isl.members);
    }
    return islands;
}

/// Island-model NSGA-III main loop. Each generation, per island: tournament
/// selection and variation, calibration of offspring when enabled, evaluation,
/// epsilon-ranked NSGA-III survival, rate adaptation and the epsilon update;
/// then migration. Every random draw comes from a stream keyed by
/// (master_seed, generation, island, slot), so the result does not depend on
/// the worker count.
inline auto run(EvolverConfig const& cfg, Evaluator const& eval, int workers = 1) -> ParetoResult
{
    cfg.validate();
    auto const& s = eval.scenario();
    auto islands = initialize(cfg, eval, workers);
    auto const m = islands.size();
    auto const size = static_cast<std::size_t>(cfg.island_size());
    auto const refs = reference_points(cfg.reference_point_divisions);
    auto const volumes = cfg.calibrate ? coverage_volumes(s) : std::vector<std::int64_t>{};
    auto const scale = detail::telemetry_scale(s, eval.link_params().cellular_delay_s);

    ParetoResult result;
    for (std::size_t i = 0; i < m; ++i) {
        result.telemetry.push_back(detail::island_stats(islands[i], 0, static_cast<int>(i), scale));
    }

    std::size_t const pairs = (size + 1) / 2;
    std::vector<std::vector<Individual>> offspring(m);
    for (int g = 1; g <= cfg.generations; ++g) {
        auto const gen = static_cast<std::uint64_t>(g);
        for (std::size_t i = 0; i < m; ++i) {
            offspring[i].assign(size, Individual{});
        }
        parallel_for(m * pairs, workers, [&](std::size_t n) {
            std::size_t const i = n / pairs;
            std::size_t const p = n % pairs;
            auto const& isl = islands[i];
            auto rng = make_stream({cfg.master_seed, gen, i, p, detail::kVariation});
            auto const& a = detail::tournament(isl, rng);
            auto const& b = detail::tournament(isl, rng);
            auto [c1, c2] = variation(a.genome, b.genome, isl.rates(), cfg.n_mut, s, rng);
            if (cfg.calibrate) {
                c1 = calibrate(c1, s, cfg.d_min_m, volumes);
                c2 = calibrate(c2, s, cfg.d_min_m, volumes);
            }
            offspring[i][2 * p].genome = std::move(c1);
            if (2 * p + 1 < size) {
                offspring[i][2 * p + 1].genome = std::move(c2);
            }
        });
        parallel_for(m * size, workers, [&](std::size_t n) {
            auto& ind = offspring[n / size][n % size];
            auto const e = eval.evaluate(ind.genome, detail::offload_seed(cfg.master_seed, ind.genome));
            ind.objectives = e.objectives;
            ind.violation = e.violation;
        });
        parallel_for(m, workers, [&](std::size_t i) {
            auto& isl = islands[i];
            std::vector<Individual> pool = std::move(isl.members);
            pool.insert(pool.end(), std::make_move_iterator(offspring[i].begin()), std::make_move_iterator(offspring[i].end()));
            auto const fronts = nondominated_sort(pool, isl.eps.epsilon);
            std::vector<ObjPoint> vals;
            for (auto const& ind : pool) {
                vals.push_back(ind.values());
            }
            auto rng = make_stream({cfg.master_seed, gen, i, 0, detail::kSelection});
            auto const sel = nsga3_select(vals, fronts, refs, size, rng);
            std::vector<int> rank(pool.size(), 0);
            for (std::size_t f = 0; f < fronts.size(); ++f) {
                for (auto idx : fronts[f]) {
                    rank[idx] = static_cast<int>(f);
                }
            }
            isl.members.clear();
            for (auto idx : sel.selected) {
                pool[idx].rank = rank[idx];
                pool[idx].niche = sel.niche[idx];
                isl.members.push_back(pool[idx]);
            }

            auto const rec = improvement_record(isl.members);
            if (cfg.adaptive_rates) {
                auto const r = adapt_rates(isl.rates(), improvement_test(isl.prev_best, rec), cfg);
                isl.crossover_rate = r.crossover;
                isl.mutation_rate = r.mutation;
            }
            isl.prev_best = rec;

            for (auto const& ind : pool) {
                isl.eps.phi_max = std::max(isl.eps.phi_max, ind.phi());
            }
            isl.eps.rho = detail::feasible_ratio(isl.members);
            isl.eps.epsilon = cfg.epsilon_schedule ? epsilon_update(isl.eps, g, cfg) : 0.0;
        });
        auto const report = migrate(islands, cfg);
        for (std::size_t i = 0; i < m; ++i) {
            auto st = detail::island_stats(islands[i], g, static_cast<int>(i), scale);
            st.emigrants = report.emigrants[i];
            st.immigrants = report.immigrants[i];
            result.telemetry.push_back(st);
        }
    }

    std::vector<Individual const*> all;
    std::vector<Individual const*> feasible;
    for (auto const& isl : islands) {
        for (auto const& ind : isl.members) {
            result.final_population.push_back(ind);
        }
    }
    for (auto const& ind : result.final_population) {
        all.push_back(&ind);
        if (ind.feasible()) {
            feasible.push_back(&ind);
        }
    }
    result.pareto = detail::unique_nondominated(all);
    result.feasible_front = detail::unique_nondominated(feasible);
    return result;
}

} // namespace rsu
