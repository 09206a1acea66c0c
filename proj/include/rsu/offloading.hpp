#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "deployment.hpp"
#include "error.hpp"
#include "radio.hpp"
#include "scenario.hpp"

namespace rsu {

inline constexpr int kCellular = -1;
inline constexpr int kNotPresent = -2;

enum class OffloadStrategy { Ibrsg, Nearest, Strongest, Random };

inline auto to_string(OffloadStrategy s) -> std::string_view
{
    switch (s) {
    case OffloadStrategy::Ibrsg:
        return "ibrsg";
    case OffloadStrategy::Nearest:
        return "nearest";
    case OffloadStrategy::Strongest:
        return "strongest";
    case OffloadStrategy::Random:
        return "random";
    }
    return "?";
}

inline auto parse_offload_strategy(std::string_view name) -> OffloadStrategy
{
    if (name == "ibrsg") {
        return OffloadStrategy::Ibrsg;
    }
    if (name == "nearest" || name == "mindis") {
        return OffloadStrategy::Nearest;
    }
    if (name == "strongest" || name == "minpl") {
        return OffloadStrategy::Strongest;
    }
    if (name == "random") {
        return OffloadStrategy::Random;
    }
    throw ConfigError("unknown offloading strategy '" + std::string(name) + "'");
}

struct OffloadConfig {
    int error_threshold{0}; // sweeps stop once at most this many vehicles changed target
    int max_sweeps{20};
    OffloadStrategy strategy{OffloadStrategy::Ibrsg};
    std::uint64_t seed{0}; // initial IBRSG strategy, or the Random strategy's draws

    void validate() const
    {
        if (error_threshold < 0 || max_sweeps < 1) {
            throw ValidationError("offload: error_threshold >= 0 and max_sweeps >= 1 required");
        }
    }
};

/// Per-period, per-vehicle link targets. A target is an ordinal into
/// rsu_cells, kCellular, or kNotPresent for absent vehicles.
struct Assignment {
    std::vector<CellIndex> rsu_cells;
    std::vector<std::vector<int>> targets;  // [period][vehicle]
    std::vector<std::vector<int>> arrivals; // [period][rsu ordinal]
    std::vector<int> sweeps;                // IBRSG sweeps per period; empty for other strategies

    [[nodiscard]] auto target_cell(int period, int vehicle) const -> std::optional<CellIndex>
    {
        int const t = targets.at(static_cast<std::size_t>(period)).at(static_cast<std::size_t>(vehicle));
        if (t < 0) {
            return std::nullopt;
        }
        return rsu_cells[static_cast<std::size_t>(t)];
    }

    [[nodiscard]] auto total_sweeps() const -> int
    {
        int n = 0;
        for (auto s : sweeps) {
            n += s;
        }
        return n;
    }

    void recount()
    {
        arrivals.assign(targets.size(), std::vector<int>(rsu_cells.size(), 0));
        for (std::size_t t = 0; t < targets.size(); ++t) {
            for (auto tgt : targets[t]) {
                if (tgt >= 0) {
                    ++arrivals[t][static_cast<std::size_t>(tgt)];
                }
            }
        }
    }
};

// Transmission delay between a vehicle cell and an RSU cell, nullopt when the
// link cannot be used (out of coverage or zero rate).
using TransmissionFn = std::function<std::optional<double>(CellIndex vehicle_cell, CellIndex rsu_cell)>;

inline auto direct_transmission(GridScenario const& s, LinkBudgetParams const& params) -> TransmissionFn
{
    return [&s, &params](CellIndex v, CellIndex r) -> std::optional<double> {
        if (s.distance_m(v, r) > s.coverage_radius_m()) {
            return std::nullopt;
        }
        return link_transmission_delay(s, params, v, r);
    };
}

/// Precomputed transmission delays from every vehicle-occupied cell to every cell
/// within coverage. Values equal link_transmission_delay exactly.
class LinkTable {
public:
    LinkTable(GridScenario const& s, LinkBudgetParams const& params)
        : num_cells_(s.num_cells())
    {
        row_of_.assign(static_cast<std::size_t>(num_cells_), -1);
        for (auto const& tr : s.traces()) {
            for (auto p : tr.positions) {
                if (p != kAbsent && row_of_[static_cast<std::size_t>(p)] < 0) {
                    row_of_[static_cast<std::size_t>(p)] = rows_++;
                }
            }
        }
        table_.assign(static_cast<std::size_t>(rows_) * static_cast<std::size_t>(num_cells_), kUnusable);
        auto const reach = static_cast<int>(std::floor(s.coverage_radius_m() / s.cell_size_m()));
        for (CellIndex v = 0; v < num_cells_; ++v) {
            int const row = row_of_[static_cast<std::size_t>(v)];
            if (row < 0) {
                continue;
            }
            int const vr = s.row_of(v);
            int const vc = s.col_of(v);
            for (int r = std::max(0, vr - reach); r <= std::min(s.height_cells() - 1, vr + reach); ++r) {
                for (int c = std::max(0, vc - reach); c <= std::min(s.width_cells() - 1, vc + reach); ++c) {
                    CellIndex const cell = r * s.width_cells() + c;
                    if (s.distance_m(v, cell) > s.coverage_radius_m()) {
                        continue;
                    }
                    auto const d = link_transmission_delay(s, params, v, cell);
                    table_[index(row, cell)] = d ? *d : kUnusable;
                }
            }
        }
    }

    [[nodiscard]] auto transmission(CellIndex vehicle_cell, CellIndex rsu_cell) const -> std::optional<double>
    {
        int const row = row_of_.at(static_cast<std::size_t>(vehicle_cell));
        if (row < 0) {
            throw std::out_of_range("LinkTable: cell " + std::to_string(vehicle_cell) + " is never occupied by a vehicle");
        }
        double const d = table_[index(row, rsu_cell)];
        if (std::isnan(d)) {
            return std::nullopt;
        }
        return d;
    }

    [[nodiscard]] auto as_function() const -> TransmissionFn
    {
        return [this](CellIndex v, CellIndex r) { return transmission(v, r); };
    }

private:
    static constexpr double kUnusable = std::numeric_limits<double>::quiet_NaN();

    [[nodiscard]] auto index(int row, CellIndex cell) const -> std::size_t
    {
        return static_cast<std::size_t>(row) * static_cast<std::size_t>(num_cells_) + static_cast<std::size_t>(cell);
    }

    int num_cells_;
    int rows_{0};
    std::vector<int> row_of_;
    std::vector<double> table_;
};

namespace detail {

    inline auto empty_assignment(GridScenario const& s, Deployment const& deployment) -> Assignment
    {
        Assignment a;
        a.rsu_cells = deployment.cells();
        a.targets.assign(static_cast<std::size_t>(s.num_periods()), std::vector<int>(static_cast<std::size_t>(s.num_vehicles()), kNotPresent));
        for (int t = 0; t < s.num_periods(); ++t) {
            for (int v = 0; v < s.num_vehicles(); ++v) {
                if (s.traces()[static_cast<std::size_t>(v)].positions[static_cast<std::size_t>(t)] != kAbsent) {
                    a.targets[static_cast<std::size_t>(t)][static_cast<std::size_t>(v)] = kCellular;
                }
            }
        }
        return a;
    }

    // Per-vehicle delay on an RSU holding n vehicles; nullopt means cellular fallback.
    inline auto per_vehicle_queue(QueueParams const& q, int n) -> std::optional<double>
    {
        return queuing_delay(q, static_cast<double>(n));
    }

    // Aggregate delay of the n vehicles attached to one RSU whose transmission delays sum to trans_sum.
    inline auto rsu_cost(QueueParams const& q, double cellular_s, int n, double trans_sum) -> double
    {
        if (n == 0) {
            return 0.0;
        }
        auto const qd = per_vehicle_queue(q, n);
        if (!qd) {
            return n * cellular_s;
        }
        return trans_sum + n * *qd;
    }

    template <typename Pick>
    auto assign_each(GridScenario const& s, Deployment const& deployment, Pick&& pick) -> Assignment
    {
        Assignment a = empty_assignment(s, deployment);
        std::vector<int> in_range;
        for (int t = 0; t < s.num_periods(); ++t) {
            for (int v = 0; v < s.num_vehicles(); ++v) {
                CellIndex const pos = s.traces()[static_cast<std::size_t>(v)].positions[static_cast<std::size_t>(t)];
                if (pos == kAbsent) {
                    continue;
                }
                in_range.clear();
                for (std::size_t j = 0; j < a.rsu_cells.size(); ++j) {
                    if (s.distance_m(pos, a.rsu_cells[j]) <= s.coverage_radius_m()) {
                        in_range.push_back(static_cast<int>(j));
                    }
                }
                if (!in_range.empty()) {
                    a.targets[static_cast<std::size_t>(t)][static_cast<std::size_t>(v)] = pick(pos, std::span<int const>(in_range), a.rsu_cells);
                }
            }
        }
        a.recount();
        return a;
    }

} // namespace detail

/// Sum over vehicles and periods of each vehicle's delay: link delay for RSU
/// targets with arrivals taken from the assignment, the cellular constant
/// otherwise, zero for absent vehicles.
inline auto total_assignment_delay(GridScenario const& s, Assignment const& a, LinkBudgetParams const& params, QueueParams const& q,
    TransmissionFn const& trans) -> double
{
    double total = 0.0;
    for (int t = 0; t < s.num_periods(); ++t) {
        for (int v = 0; v < s.num_vehicles(); ++v) {
            int const tgt = a.targets[static_cast<std::size_t>(t)][static_cast<std::size_t>(v)];
            if (tgt == kNotPresent) {
                continue;
            }
            if (tgt == kCellular) {
                total += params.cellular_delay_s;
                continue;
            }
            CellIndex const pos = s.traces()[static_cast<std::size_t>(v)].positions[static_cast<std::size_t>(t)];
            auto const tr = trans(pos, a.rsu_cells[static_cast<std::size_t>(tgt)]);
            auto const qd = detail::per_vehicle_queue(q, a.arrivals[static_cast<std::size_t>(t)][static_cast<std::size_t>(tgt)]);
            total += (tr && qd) ? *tr + *qd : params.cellular_delay_s;
        }
    }
    return total;
}

inline auto total_assignment_delay(GridScenario const& s, Deployment const& /*deployment*/, Assignment const& a, LinkBudgetParams const& params,
    QueueParams const& q) -> double
{
    return total_assignment_delay(s, a, params, q, direct_transmission(s, params));
}

// Per-vehicle delay summed over periods; same per-step rule as total_assignment_delay.
inline auto per_vehicle_delays(GridScenario const& s, Assignment const& a, LinkBudgetParams const& params, QueueParams const& q,
    TransmissionFn const& trans) -> std::vector<double>
{
    std::vector<double> out(static_cast<std::size_t>(s.num_vehicles()), 0.0);
    for (int t = 0; t < s.num_periods(); ++t) {
        for (int v = 0; v < s.num_vehicles(); ++v) {
            int const tgt = a.targets[static_cast<std::size_t>(t)][static_cast<std::size_t>(v)];
            double d = 0.0;
            if (tgt == kCellular) {
                d = params.cellular_delay_s;
            } else if (tgt >= 0) {
                CellIndex const pos = s.traces()[static_cast<std::size_t>(v)].positions[static_cast<std::size_t>(t)];
                auto const tr = trans(pos, a.rsu_cells[static_cast<std::size_t>(tgt)]);
                auto const qd = detail::per_vehicle_queue(q, a.arrivals[static_cast<std::size_t>(t)][static_cast<std::size_t>(tgt)]);
                d = (tr && qd) ? *tr + *qd : params.cellular_delay_s;
            }
            out[static_cast<std::size_t>(v)] += d;
        }
    }
    return out;
}

// Period total after every single-vehicle best-response step, for inspecting descent.
struct IbrsgTrace {
    std::vector<std::vector<double>> period_totals; // [period][step]; entry 0 is the initial strategy
};

/// Iterative best-response sequential game.
///
/// Per period: every present vehicle starts on a uniformly drawn in-range RSU
/// (cellular when none is in range). Vehicles then update in index order, each
/// taking the target that minimizes the period's total delay given everyone
/// else's current choice; cellular is always a candidate. A vehicle only moves
/// on a strict improvement, so the total never increases. Sweeps repeat until at
/// most error_threshold vehicles changed target or max_sweeps is reached.
inline auto assign_ibrsg(GridScenario const& s, Deployment const& deployment, LinkBudgetParams const& params, QueueParams const& q,
    OffloadConfig const& cfg, TransmissionFn const& trans, IbrsgTrace* trace = nullptr) -> Assignment
{
    constexpr double kImprovementTol = 1e-12;
    Assignment a = detail::empty_assignment(s, deployment);
    std::size_t const num_rsu = a.rsu_cells.size();
    a.sweeps.assign(static_cast<std::size_t>(s.num_periods()), 0);
    if (trace != nullptr) {
        trace->period_totals.assign(static_cast<std::size_t>(s.num_periods()), {});
    }
    double const cell_s = params.cellular_delay_s;

    struct Candidate {
        int rsu;
        double trans;
    };
    for (int t = 0; t < s.num_periods(); ++t) {
        auto& targets = a.targets[static_cast<std::size_t>(t)];
        std::vector<int> present;
        std::vector<std::vector<Candidate>> cand;
        for (int v = 0; v < s.num_vehicles(); ++v) {
            CellIndex const pos = s.traces()[static_cast<std::size_t>(v)].positions[static_cast<std::size_t>(t)];
            if (pos == kAbsent) {
                continue;
            }
            present.push_back(v);
            auto& list = cand.emplace_back();
            for (std::size_t j = 0; j < num_rsu; ++j) {
                if (auto const d = trans(pos, a.rsu_cells[j])) {
                    list.push_back({static_cast<int>(j), *d});
                }
            }
        }

        Rng rng{derive_seed({cfg.seed, static_cast<std::uint64_t>(t), 0x1b25ULL})};
        std::vector<int> count(num_rsu, 0);
        std::vector<double> trans_sum(num_rsu, 0.0);
        std::vector<double> my_trans(present.size(), 0.0);
        int cellular_count = 0;
        for (std::size_t i = 0; i < present.size(); ++i) {
            auto const& list = cand[i];
            int choice = kCellular;
            if (!list.empty()) {
                auto const pick = std::uniform_int_distribution<std::size_t>(0, list.size() - 1)(rng);
                choice = list[pick].rsu;
                my_trans[i] = list[pick].trans;
                ++count[static_cast<std::size_t>(choice)];
                trans_sum[static_cast<std::size_t>(choice)] += my_trans[i];
            } else {
                ++cellular_count;
            }
            targets[static_cast<std::size_t>(present[i])] = choice;
        }

        auto period_total = [&] {
            double total = cellular_count * cell_s;
            for (std::size_t j = 0; j < num_rsu; ++j) {
                total += detail::rsu_cost(q, cell_s, count[j], trans_sum[j]);
            }
            return total;
        };

        if (trace != nullptr) {
            trace->period_totals[static_cast<std::size_t>(t)].push_back(period_total());
        }
        int sweeps = 0;
        while (sweeps < cfg.max_sweeps) {
            ++sweeps;
            int changed = 0;
            for (std::size_t i = 0; i < present.size(); ++i) {
                int& cur = targets[static_cast<std::size_t>(present[i])];
                // Cost change of leaving the current target.
                double leave = -cell_s;
                if (cur >= 0) {
                    auto const j = static_cast<std::size_t>(cur);
                    leave = detail::rsu_cost(q, cell_s, count[j] - 1, trans_sum[j] - my_trans[i]) - detail::rsu_cost(q, cell_s, count[j], trans_sum[j]);
                }
                double best_delta = 0.0;
                int best = cur;
                double best_trans = my_trans[i];
                for (auto const& c : cand[i]) {
                    if (c.rsu == cur) {
                        continue;
                    }
                    auto const j = static_cast<std::size_t>(c.rsu);
                    double const join = detail::rsu_cost(q, cell_s, count[j] + 1, trans_sum[j] + c.trans) - detail::rsu_cost(q, cell_s, count[j], trans_sum[j]);
                    double const delta = leave + join;
                    if (delta < best_delta - kImprovementTol) {
                        best_delta = delta;
                        best = c.rsu;
                        best_trans = c.trans;
                    }
                }
                if (cur != kCellular) {
                    double const delta = leave + cell_s;
                    if (delta < best_delta - kImprovementTol) {
                        best_delta = delta;
                        best = kCellular;
                        best_trans = 0.0;
                    }
                }
                if (best != cur) {
                    if (cur >= 0) {
                        --count[static_cast<std::size_t>(cur)];
                        trans_sum[static_cast<std::size_t>(cur)] -= my_trans[i];
                    } else {
                        --cellular_count;
                    }
                    if (best >= 0) {
                        ++count[static_cast<std::size_t>(best)];
                        trans_sum[static_cast<std::size_t>(best)] += best_trans;
                    } else {
                        ++cellular_count;
                    }
                    cur = best;
                    my_trans[i] = best_trans;
                    ++changed;
                }
                if (trace != nullptr) {
                    trace->period_totals[static_cast<std::size_t>(t)].push_back(period_total());
                }
            }
            if (changed <= cfg.error_threshold) {
                break;
            }
        }
        a.sweeps[static_cast<std::size_t>(t)] = sweeps;
    }
    a.recount();
    return a;
}

inline auto assign_ibrsg(GridScenario const& s, Deployment const& deployment, LinkBudgetParams const& params, QueueParams const& q,
    OffloadConfig const& cfg) -> Assignment
{
    return assign_ibrsg(s, deployment, params, q, cfg, direct_transmission(s, params));
}

// Nearest in-range RSU; ties go to the lowest cell index.
inline auto assign_nearest(GridScenario const& s, Deployment const& deployment, LinkBudgetParams const& /*params*/, QueueParams const& /*q*/)
    -> Assignment
{
    return detail::assign_each(s, deployment, [&s](CellIndex pos, std::span<int const> in_range, std::vector<CellIndex> const& cells) {
        int best = in_range.front();
        double best_d = s.distance_m(pos, cells[static_cast<std::size_t>(best)]);
        for (auto j : in_range.subspan(1)) {
            double const d = s.distance_m(pos, cells[static_cast<std::size_t>(j)]);
            if (d < best_d) {
                best_d = d;
                best = j;
            }
        }
        return best;
    });
}

// In-range RSU with the smallest free-space plus shadowing loss; ties go to the lowest cell index.
inline auto assign_strongest(GridScenario const& s, Deployment const& deployment, LinkBudgetParams const& params, QueueParams const& /*q*/)
    -> Assignment
{
    return detail::assign_each(s, deployment, [&s, &params](CellIndex pos, std::span<int const> in_range, std::vector<CellIndex> const& cells) {
        int best = in_range.front();
        double best_loss = path_loss_db(s, params, pos, cells[static_cast<std::size_t>(best)]);
        for (auto j : in_range.subspan(1)) {
            double const loss = path_loss_db(s, params, pos, cells[static_cast<std::size_t>(j)]);
            if (loss < best_loss) {
                best_loss = loss;
                best = j;
            }
        }
        return best;
    });
}

inline auto assign_random(GridScenario const& s, Deployment const& deployment, std::uint64_t seed) -> Assignment
{
    Rng rng{derive_seed({seed, 0x7a4d0ULL})};
    return detail::assign_each(s, deployment, [&rng](CellIndex, std::span<int const> in_range, std::vector<CellIndex> const&) {
        return in_range[std::uniform_int_distribution<std::size_t>(0, in_range.size() - 1)(rng)];
    });
}

inline auto assign(GridScenario const& s, Deployment const& deployment, LinkBudgetParams const& params, QueueParams const& q, OffloadConfig const& cfg,
    TransmissionFn const& trans) -> Assignment
{
    switch (cfg.strategy) {
    case OffloadStrategy::Ibrsg:
        return assign_ibrsg(s, deployment, params, q, cfg, trans);
    case OffloadStrategy::Nearest:
        return assign_nearest(s, deployment, params, q);
    case OffloadStrategy::Strongest:
        return assign_strongest(s, deployment, params, q);
    case OffloadStrategy::Random:
        return assign_random(s, deployment, cfg.seed);
    }
    throw std::logic_error("unhandled offloading strategy");
}

// Population standard deviation of the per-RSU loads of one period.
inline auto load_balance(std::span<int const> loads) -> double
{
    if (loads.empty()) {
        throw std::invalid_argument("load_balance: at least one RSU required");
    }
    double mean = 0.0;
    for (auto l : loads) {
        mean += l;
    }
    mean /= static_cast<double>(loads.size());
    double ss = 0.0;
    for (auto l : loads) {
        ss += (l - mean) * (l - mean);
    }
    return std::sqrt(ss / static_cast<double>(loads.size()));
}

// Per-period load balance averaged over periods.
inline auto load_balance(Assignment const& a, int num_rsus) -> double
{
    if (num_rsus < 1) {
        throw std::invalid_argument("load_balance: num_rsus must be at least 1");
    }
    if (a.arrivals.empty()) {
        return 0.0;
    }
    double sum = 0.0;
    std::vector<int> loads(static_cast<std::size_t>(num_rsus), 0);
    for (auto const& per : a.arrivals) {
        std::fill(loads.begin(), loads.end(), 0);
        std::copy_n(per.begin(), std::min(per.size(), loads.size()), loads.begin());
        sum += load_balance(loads);
    }
    return sum / static_cast<double>(a.arrivals.size());
}

} // namespace rsu
