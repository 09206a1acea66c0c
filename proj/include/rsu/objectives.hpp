#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "deployment.hpp"
#include "offloading.hpp"
#include "radio.hpp"
#include "scenario.hpp"

namespace rsu {

struct ObjectiveVector {
    double f1_total_delay_s{0.0};
    double f2_max_sensitive_delay_s{0.0};
    int f3_rsu_count{0};

    [[nodiscard]] auto values() const noexcept -> std::array<double, 3>
    {
        return {f1_total_delay_s, f2_max_sensitive_delay_s, static_cast<double>(f3_rsu_count)};
    }

    auto operator==(ObjectiveVector const&) const -> bool = default;
};

struct ViolationReport {
    double obstacle_violation_m{0.0};
    double spacing_violation_m{0.0};
    double phi{0.0};

    auto operator==(ViolationReport const&) const -> bool = default;
};

// Equal-weight sum of the two violation families, in meters.
constexpr auto overall_violation(double obstacle_m, double spacing_m) noexcept -> double
{
    return obstacle_m + spacing_m;
}

constexpr auto is_feasible(ViolationReport const& r) noexcept -> bool
{
    return r.phi == 0.0;
}

/// For each RSU placed on an obstacle cell: distance from its cell center to the
/// nearest point of the obstacle region's boundary, i.e. the nearest free cell.
inline auto obstacle_violation(GridScenario const& s, Deployment const& d) -> double
{
    std::vector<CellIndex> free_cells;
    double total = 0.0;
    bool free_listed = false;
    double const cs = s.cell_size_m();
    for (auto cell : d.cells()) {
        if (!s.is_obstacle(cell)) {
            continue;
        }
        if (!free_listed) {
            for (CellIndex i = 0; i < s.num_cells(); ++i) {
                if (!s.is_obstacle(i)) {
                    free_cells.push_back(i);
                }
            }
            free_listed = true;
        }
        auto const p = s.cell_center(cell);
        double best = std::numeric_limits<double>::infinity();
        for (auto f : free_cells) {
            double const x0 = s.col_of(f) * cs;
            double const y0 = s.row_of(f) * cs;
            double const dx = std::max({x0 - p.x_m, 0.0, p.x_m - (x0 + cs)});
            double const dy = std::max({y0 - p.y_m, 0.0, p.y_m - (y0 + cs)});
            best = std::min(best, std::hypot(dx, dy));
        }
        if (free_cells.empty()) {
            // Fully blocked map: fall back to the map border.
            best = std::min({p.x_m, p.y_m, s.width_m() - p.x_m, s.height_m() - p.y_m});
        }
        total += best;
    }
    return total;
}

// Sum of (d_min - distance) over RSU pairs closer than d_min.
inline auto spacing_violation(GridScenario const& s, Deployment const& d, double d_min_m) -> double
{
    auto const cells = d.cells();
    double total = 0.0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        for (std::size_t j = i + 1; j < cells.size(); ++j) {
            double const dist = s.distance_m(cells[i], cells[j]);
            if (dist < d_min_m) {
                total += d_min_m - dist;
            }
        }
    }
    return total;
}

inline auto violation_report(GridScenario const& s, Deployment const& d, double d_min_m) -> ViolationReport
{
    ViolationReport r;
    r.obstacle_violation_m = obstacle_violation(s, d);
    r.spacing_violation_m = spacing_violation(s, d, d_min_m);
    r.phi = overall_violation(r.obstacle_violation_m, r.spacing_violation_m);
    return r;
}

// Vehicles that are inside some sensitive area in at least one period.
inline auto sensitive_vehicles(GridScenario const& s) -> std::vector<bool>
{
    std::vector<bool> out(static_cast<std::size_t>(s.num_vehicles()), false);
    for (int v = 0; v < s.num_vehicles(); ++v) {
        for (auto p : s.traces()[static_cast<std::size_t>(v)].positions) {
            if (p == kAbsent) {
                continue;
            }
            for (auto const& area : s.sensitive_areas()) {
                if (s.in_area(p, area)) {
                    out[static_cast<std::size_t>(v)] = true;
                }
            }
        }
    }
    return out;
}

inline auto objectives_from_assignment(GridScenario const& s, Deployment const& d, Assignment const& a, LinkBudgetParams const& params,
    QueueParams const& q, TransmissionFn const& trans, std::vector<bool> const& sensitive) -> ObjectiveVector
{
    auto const per_vehicle = per_vehicle_delays(s, a, params, q, trans);
    ObjectiveVector o;
    for (std::size_t v = 0; v < per_vehicle.size(); ++v) {
        o.f1_total_delay_s += per_vehicle[v];
        if (sensitive[v]) {
            o.f2_max_sensitive_delay_s = std::max(o.f2_max_sensitive_delay_s, per_vehicle[v]);
        }
    }
    o.f3_rsu_count = d.count();
    return o;
}

/// f1 total delay, f2 worst cumulative delay among latency-sensitive vehicles
/// (0 when there are none), f3 RSU count, after running the configured
/// offloading strategy.
inline auto eval_objectives(GridScenario const& s, Deployment const& d, LinkBudgetParams const& params, QueueParams const& q, OffloadConfig const& cfg)
    -> ObjectiveVector
{
    auto const trans = direct_transmission(s, params);
    auto const a = assign(s, d, params, q, cfg, trans);
    return objectives_from_assignment(s, d, a, params, q, trans, sensitive_vehicles(s));
}

struct Evaluation {
    ObjectiveVector objectives;
    ViolationReport violation;
};

/// Fitness evaluation bound to one scenario and parameter set. Caches the link
/// table and the sensitive-vehicle set; immutable and shareable across threads.
class Evaluator {
public:
    Evaluator(GridScenario const& s, LinkBudgetParams params, QueueParams q, OffloadConfig cfg, double d_min_m)
        : scenario_(&s)
        , params_(params)
        , queue_(q)
        , offload_(cfg)
        , d_min_(d_min_m)
        , links_(s, params_)
        , sensitive_(sensitive_vehicles(s))
        , trans_(links_.as_function())
    {
        params_.validate();
        queue_.validate();
        offload_.validate();
    }

    Evaluator(Evaluator const&) = delete;
    auto operator=(Evaluator const&) -> Evaluator& = delete;

    // offload_seed drives the strategy's random choices (IBRSG start, Random draws).
    [[nodiscard]] auto evaluate(Deployment const& d, std::uint64_t offload_seed) const -> Evaluation
    {
        OffloadConfig cfg = offload_;
        cfg.seed = offload_seed;
        auto const a = assign(*scenario_, d, params_, queue_, cfg, trans_);
        return {objectives_from_assignment(*scenario_, d, a, params_, queue_, trans_, sensitive_), violation_report(*scenario_, d, d_min_)};
    }

    [[nodiscard]] auto scenario() const noexcept -> GridScenario const& { return *scenario_; }
    [[nodiscard]] auto link_params() const noexcept -> LinkBudgetParams const& { return params_; }
    [[nodiscard]] auto queue_params() const noexcept -> QueueParams const& { return queue_; }
    [[nodiscard]] auto offload_config() const noexcept -> OffloadConfig const& { return offload_; }
    [[nodiscard]] auto d_min_m() const noexcept -> double { return d_min_; }
    [[nodiscard]] auto transmission() const noexcept -> TransmissionFn const& { return trans_; }

private:
    GridScenario const* scenario_;
    LinkBudgetParams params_;
    QueueParams queue_;
    OffloadConfig offload_;
    double d_min_;
    LinkTable links_;
    std::vector<bool> sensitive_;
    TransmissionFn trans_;
};

} // namespace rsu
