#include <cmath>
#include <limits>
#include <queue>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include <rsu/objectives.hpp>

#include "fixtures.hpp"

using namespace rsu;
using rsu::test::add_vehicle;
using rsu::test::blank_data;
using rsu::test::cell;

namespace {

auto segment_distance(double px, double py, double ax, double ay, double bx, double by) -> double
{
    double const vx = bx - ax;
    double const vy = by - ay;
    double const t = std::clamp(((px - ax) * vx + (py - ay) * vy) / (vx * vx + vy * vy), 0.0, 1.0);
    return std::hypot(px - (ax + t * vx), py - (ay + t * vy));
}

/// Distance from an obstacle cell's center to the boundary of its obstacle
/// region: breadth-first search over 8-connected obstacle cells, then the
/// closest cell edge shared with a free cell.
auto boundary_distance_oracle(GridScenario const& s, CellIndex start) -> double
{
    int const w = s.width_cells();
    int const h = s.height_cells();
    double const cs = s.cell_size_m();
    auto const p = s.cell_center(start);
    std::vector<bool> seen(static_cast<std::size_t>(s.num_cells()), false);
    std::queue<CellIndex> open;
    open.push(start);
    seen[static_cast<std::size_t>(start)] = true;
    double best = std::numeric_limits<double>::infinity();
    while (!open.empty()) {
        CellIndex const c = open.front();
        open.pop();
        int const r = s.row_of(c);
        int const col = s.col_of(c);
        struct Edge {
            int dr, dc;
            double ax, ay, bx, by;
        };
        double const x0 = col * cs;
        double const y0 = r * cs;
        Edge const edges[4] = {
            {-1, 0, x0, y0, x0 + cs, y0},
            {1, 0, x0, y0 + cs, x0 + cs, y0 + cs},
            {0, -1, x0, y0, x0, y0 + cs},
            {0, 1, x0 + cs, y0, x0 + cs, y0 + cs},
        };
        for (auto const& e : edges) {
            int const nr = r + e.dr;
            int const nc = col + e.dc;
            if (nr >= 0 && nr < h && nc >= 0 && nc < w && !s.is_obstacle(nr * w + nc)) {
                best = std::min(best, segment_distance(p.x_m, p.y_m, e.ax, e.ay, e.bx, e.by));
            }
        }
        for (int dr = -1; dr <= 1; ++dr) {
            for (int dc = -1; dc <= 1; ++dc) {
                int const nr = r + dr;
                int const nc = col + dc;
                if (nr < 0 || nr >= h || nc < 0 || nc >= w) {
                    continue;
                }
                CellIndex const n = nr * w + nc;
                if (s.is_obstacle(n) && !seen[static_cast<std::size_t>(n)]) {
                    seen[static_cast<std::size_t>(n)] = true;
                    open.push(n);
                }
            }
        }
    }
    return best;
}

} // namespace

TEST(Objectives, EmptyDeploymentIsAllCellular)
{
    auto d = blank_data(4, 4, 3);
    for (int v = 0; v < 5; ++v) {
        add_vehicle(d, {v, v + 1, v + 2});
    }
    GridScenario const s(d);
    auto const o = eval_objectives(s, Deployment(16), {}, {}, {});
    EXPECT_DOUBLE_EQ(o.f1_total_delay_s, 30.0);
    EXPECT_EQ(o.f3_rsu_count, 0);
}

TEST(Objectives, RsuCountIsPopcount)
{
    GridScenario const s(blank_data(8, 8));
    auto const o = eval_objectives(s, Deployment::from_cells(64, std::vector<CellIndex>{0, 7, 40}), {}, {}, {});
    EXPECT_EQ(o.f3_rsu_count, 3);
}

TEST(Objectives, SensitiveVehicleAllCellular)
{
    auto d = blank_data(5, 5, 4);
    d.sensitive_areas.push_back({50.0, 50.0, 20.0}); // center of cell 12
    add_vehicle(d, {12, 12, 12, 12});
    add_vehicle(d, {0, 1, 2, 3});
    GridScenario const s(d);
    auto const sens = sensitive_vehicles(s);
    EXPECT_TRUE(sens[0]);
    EXPECT_FALSE(sens[1]);
    auto const o = eval_objectives(s, Deployment(25), {}, {}, {});
    EXPECT_DOUBLE_EQ(o.f2_max_sensitive_delay_s, 4 * 2.0);
    EXPECT_DOUBLE_EQ(o.f1_total_delay_s, 16.0);
}

TEST(Objectives, NoSensitiveVehiclesMeansZeroF2)
{
    auto d = blank_data(5, 5, 2);
    add_vehicle(d, {0, 1});
    GridScenario const s(d);
    EXPECT_EQ(eval_objectives(s, Deployment(25), {}, {}, {}).f2_max_sensitive_delay_s, 0.0);
}

TEST(Objectives, DeployingRsusLowersTotalDelay)
{
    SynthSpec spec;
    auto const s = synth_scenario(6, spec);
    auto const empty = eval_objectives(s, Deployment(s.num_cells()), {}, {}, {});
    Deployment some(s.num_cells());
    for (CellIndex c = 0; c < s.num_cells(); c += 37) {
        if (!s.is_obstacle(c)) {
            some.set(c, true);
        }
    }
    auto const with = eval_objectives(s, some, {}, {}, {});
    EXPECT_LT(with.f1_total_delay_s, empty.f1_total_delay_s);
    EXPECT_LE(with.f2_max_sensitive_delay_s, empty.f2_max_sensitive_delay_s);
}

TEST(Objectives, ObstacleViolationExamples)
{
    {
        auto d = blank_data(7, 7);
        for (int r = 2; r <= 4; ++r) {
            for (int c = 2; c <= 4; ++c) {
                d.obstacles.push_back(cell(7, r, c));
            }
        }
        GridScenario const s(d);
        EXPECT_DOUBLE_EQ(obstacle_violation(s, Deployment::from_cells(49, std::vector<CellIndex>{cell(7, 3, 3)})), 30.0);
        EXPECT_DOUBLE_EQ(obstacle_violation(s, Deployment::from_cells(49, std::vector<CellIndex>{0, 48})), 0.0);
    }
    {
        auto d = blank_data(5, 5);
        d.obstacles = {12};
        GridScenario const s(d);
        EXPECT_DOUBLE_EQ(obstacle_violation(s, Deployment::from_cells(25, std::vector<CellIndex>{12})), 10.0);
    }
}

TEST(Objectives, ObstacleViolationMatchesBoundaryOracle)
{
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 30; ++trial) {
        auto d = blank_data(12, 12);
        std::uniform_int_distribution<int> pos(0, 9);
        std::uniform_int_distribution<int> side(1, 5);
        for (int b = 0; b < 4; ++b) {
            int const r0 = pos(rng);
            int const c0 = pos(rng);
            int const bh = side(rng);
            int const bw = side(rng);
            for (int r = r0; r < std::min(12, r0 + bh); ++r) {
                for (int c = c0; c < std::min(12, c0 + bw); ++c) {
                    d.obstacles.push_back(cell(12, r, c));
                }
            }
        }
        GridScenario const s(d);
        for (auto c : s.obstacle_cells()) {
            if (s.free_cell_count() == 0) {
                break;
            }
            double const got = obstacle_violation(s, Deployment::from_cells(144, std::vector<CellIndex>{c}));
            ASSERT_NEAR(got, boundary_distance_oracle(s, c), 1e-9) << "trial " << trial << " cell " << c;
        }
    }
}

TEST(Objectives, SpacingViolationExamples)
{
    GridScenario const s(blank_data(10, 10));
    EXPECT_EQ(spacing_violation(s, Deployment::from_cells(100, std::vector<CellIndex>{55}), 30.0), 0.0);
    EXPECT_DOUBLE_EQ(spacing_violation(s, Deployment::from_cells(100, std::vector<CellIndex>{0, 1}), 30.0), 10.0);
    // A row of three: pairs at 20, 20 and 40 m.
    EXPECT_DOUBLE_EQ(spacing_violation(s, Deployment::from_cells(100, std::vector<CellIndex>{0, 1, 2}), 30.0), 20.0);
    EXPECT_DOUBLE_EQ(spacing_violation(s, Deployment::from_cells(100, std::vector<CellIndex>{0, 1, 2}), 45.0), 25.0 + 25.0 + 5.0);
}

TEST(Objectives, SpacingViolationSumsPairDeficits)
{
    // Three mutually 20 m-apart RSUs: each of the three pairs is 10 m short of 30 m.
    auto const deficit = [](double dist) { return std::max(0.0, 30.0 - dist); };
    EXPECT_DOUBLE_EQ(3 * deficit(20.0), 30.0);
    GridScenario const s(blank_data(10, 10));
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        Deployment dep(100);
        for (int k = 0; k < 6; ++k) {
            dep.set(std::uniform_int_distribution<int>(0, 99)(rng), true);
        }
        auto const cells = dep.cells();
        double expected = 0.0;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            for (std::size_t j = i + 1; j < cells.size(); ++j) {
                expected += deficit(s.distance_m(cells[i], cells[j]));
            }
        }
        ASSERT_NEAR(spacing_violation(s, dep, 30.0), expected, 1e-9);
    }
}

TEST(Objectives, OverallViolationAndFeasibility)
{
    EXPECT_EQ(overall_violation(0.0, 0.0), 0.0);
    EXPECT_EQ(overall_violation(30.0, 10.0), 40.0);
    EXPECT_TRUE(is_feasible(ViolationReport{0.0, 0.0, 0.0}));
    EXPECT_FALSE(is_feasible(ViolationReport{0.0, 0.0, 1e-9}));
}

TEST(Objectives, EvaluatorMatchesDirectEvaluation)
{
    SynthSpec spec;
    auto const s = synth_scenario(8, spec);
    LinkBudgetParams p;
    p.shadow_seed = 2;
    QueueParams const q;
    OffloadConfig cfg;
    Evaluator const ev(s, p, q, cfg, 30.0);
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 10; ++trial) {
        Deployment dep(s.num_cells());
        for (int k = 0; k < 12; ++k) {
            dep.set(std::uniform_int_distribution<int>(0, s.num_cells() - 1)(rng), true);
        }
        auto const e = ev.evaluate(dep, 77);
        cfg.seed = 77;
        EXPECT_EQ(e.objectives, eval_objectives(s, dep, p, q, cfg));
        EXPECT_EQ(e.violation, violation_report(s, dep, 30.0));
    }
}
