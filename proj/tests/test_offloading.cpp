#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include <rsu/offloading.hpp>

#include "fixtures.hpp"
#include "offload_oracle.hpp"

using namespace rsu;
using rsu::test::add_vehicle;
using rsu::test::blank_data;
using rsu::test::cell;

TEST(Offloading, EmptyDeploymentIsAllCellular)
{
    auto d = blank_data(4, 4, 2);
    add_vehicle(d, {0, 5});
    add_vehicle(d, {3, kAbsent});
    GridScenario const s(d);
    Deployment const none(16);
    for (auto strategy : {OffloadStrategy::Ibrsg, OffloadStrategy::Nearest, OffloadStrategy::Strongest, OffloadStrategy::Random}) {
        OffloadConfig cfg;
        cfg.strategy = strategy;
        auto const a = assign(s, none, {}, {}, cfg, direct_transmission(s, LinkBudgetParams{}));
        EXPECT_EQ(a.targets[0][0], kCellular);
        EXPECT_EQ(a.targets[1][0], kCellular);
        EXPECT_EQ(a.targets[0][1], kCellular);
        EXPECT_EQ(a.targets[1][1], kNotPresent);
    }
}

TEST(Offloading, SingleReachableRsuIsTaken)
{
    auto d = blank_data(4, 4);
    add_vehicle(d, {0});
    GridScenario const s(d);
    auto const dep = Deployment::from_cells(16, std::vector<CellIndex>{5});
    auto const a = assign_ibrsg(s, dep, {}, {}, {});
    EXPECT_EQ(a.target_cell(0, 0), 5);
    EXPECT_EQ(a.arrivals[0][0], 1);
}

TEST(Offloading, IbrsgMatchesBruteForceOrIsStable)
{
    LinkBudgetParams const p;
    int optimal = 0;
    for (std::uint64_t seed = 1; seed <= 60; ++seed) {
        auto const inst = test::random_offload_instance(seed);
        OffloadConfig cfg;
        cfg.seed = seed;
        auto const a = assign_ibrsg(inst.scenario, inst.deployment, p, inst.queue, cfg);
        double const got = test::period_delay(inst.scenario, a, p, inst.queue);
        double const best = test::brute_force_optimum(inst.scenario, inst.deployment, p, inst.queue);
        ASSERT_GE(got, best - 1e-9);
        bool const is_opt = std::abs(got - best) <= 1e-9;
        optimal += is_opt ? 1 : 0;
        ASSERT_TRUE(is_opt || test::one_deviation_stable(inst.scenario, a, p, inst.queue)) << "seed " << seed;
    }
    EXPECT_GT(optimal, 0);
}

TEST(Offloading, BestResponseStepsNeverIncreaseTheTotal)
{
    LinkBudgetParams const p;
    for (std::uint64_t seed = 100; seed < 140; ++seed) {
        auto const inst = test::random_offload_instance(seed);
        OffloadConfig cfg;
        cfg.seed = seed;
        IbrsgTrace trace;
        auto const a = assign_ibrsg(inst.scenario, inst.deployment, p, inst.queue, cfg, direct_transmission(inst.scenario, p), &trace);
        auto const& steps = trace.period_totals[0];
        ASSERT_FALSE(steps.empty());
        for (std::size_t i = 1; i < steps.size(); ++i) {
            ASSERT_LE(steps[i], steps[i - 1] + 1e-12);
        }
        EXPECT_NEAR(steps.back(), test::period_delay(inst.scenario, a, p, inst.queue), 1e-9);
    }
}

TEST(Offloading, IbrsgIsDeterministicPerSeed)
{
    SynthSpec spec;
    auto const s = synth_scenario(5, spec);
    auto const dep = Deployment::from_cells(s.num_cells(), std::vector<CellIndex>{21, 88, 150, 233, 301, 377});
    OffloadConfig cfg;
    cfg.seed = 9;
    auto const a = assign_ibrsg(s, dep, {}, {}, cfg);
    auto const b = assign_ibrsg(s, dep, {}, {}, cfg);
    EXPECT_EQ(a.targets, b.targets);
    EXPECT_EQ(a.sweeps, b.sweeps);
}

TEST(Offloading, SweepCapIsHonoured)
{
    SynthSpec spec;
    spec.vehicles = 80;
    auto const s = synth_scenario(2, spec);
    auto const dep = Deployment::from_cells(s.num_cells(), std::vector<CellIndex>{21, 88, 150, 233, 301, 377});
    OffloadConfig cfg;
    cfg.max_sweeps = 1;
    auto const a = assign_ibrsg(s, dep, {}, {}, cfg);
    for (auto sw : a.sweeps) {
        EXPECT_EQ(sw, 1);
    }
}

TEST(Offloading, NearestPicksClosest)
{
    auto d = blank_data(10, 1);
    add_vehicle(d, {0});
    GridScenario const s(d);
    // RSUs 40 m and 60 m away (cell centers).
    auto const a = assign_nearest(s, Deployment::from_cells(10, std::vector<CellIndex>{2, 3}), {}, {});
    EXPECT_EQ(a.target_cell(0, 0), 2);
}

TEST(Offloading, NearestTieGoesToLowerCell)
{
    auto d = blank_data(6, 6);
    add_vehicle(d, {13}); // row 2, col 1: cells 7 and 12 are both 20 m away
    GridScenario const s(d);
    ASSERT_DOUBLE_EQ(s.distance_m(13, 7), s.distance_m(13, 12));
    auto const a = assign_nearest(s, Deployment::from_cells(36, std::vector<CellIndex>{12, 7}), {}, {});
    EXPECT_EQ(a.target_cell(0, 0), 7);
}

TEST(Offloading, NoRsuInCoverageMeansCellular)
{
    auto d = blank_data(30, 1);
    d.coverage_radius_m = 50.0;
    add_vehicle(d, {0});
    GridScenario const s(d);
    auto const dep = Deployment::from_cells(30, std::vector<CellIndex>{10});
    EXPECT_EQ(assign_nearest(s, dep, {}, {}).targets[0][0], kCellular);
    EXPECT_EQ(assign_strongest(s, dep, {}, {}).targets[0][0], kCellular);
    EXPECT_EQ(assign_random(s, dep, 1).targets[0][0], kCellular);
    EXPECT_EQ(assign_ibrsg(s, dep, {}, {}, {}).targets[0][0], kCellular);
}

TEST(Offloading, StrongestEqualsNearestWithoutObstacles)
{
    SynthSpec spec;
    spec.obstacle_blocks = 0;
    auto const s = synth_scenario(12, spec);
    auto const dep = Deployment::from_cells(s.num_cells(), std::vector<CellIndex>{0, 45, 77, 190, 260, 399});
    EXPECT_EQ(assign_strongest(s, dep, {}, {}).targets, assign_nearest(s, dep, {}, {}).targets);
}

TEST(Offloading, StrongestAvoidsShadowedRsu)
{
    auto d = blank_data(9, 3);
    d.obstacles = {cell(9, 0, 2)};
    add_vehicle(d, {cell(9, 0, 0)});
    GridScenario const s(d);
    CellIndex const blocked = cell(9, 0, 3);
    CellIndex const clear = cell(9, 2, 3);
    LinkBudgetParams p;
    for (std::uint64_t seed = 0;; ++seed) {
        if (shadow_sample(seed, cell(9, 0, 0), blocked) > 0.9) {
            p.shadow_seed = seed;
            break;
        }
    }
    ASSERT_TRUE(obstacle_between(s, cell(9, 0, 0), blocked));
    ASSERT_FALSE(obstacle_between(s, cell(9, 0, 0), clear));
    double const extra = free_space_path_loss(s.distance_m(cell(9, 0, 0), clear), p.carrier_hz)
        - free_space_path_loss(s.distance_m(cell(9, 0, 0), blocked), p.carrier_hz);
    ASSERT_LT(extra, 36.0);
    auto const dep = Deployment::from_cells(27, std::vector<CellIndex>{blocked, clear});
    EXPECT_EQ(assign_nearest(s, dep, p, {}).target_cell(0, 0), blocked);
    EXPECT_EQ(assign_strongest(s, dep, p, {}).target_cell(0, 0), clear);
}

TEST(Offloading, RandomIsUniformAndSeeded)
{
    auto d = blank_data(5, 1);
    add_vehicle(d, {2});
    GridScenario const s(d);
    auto const one = Deployment::from_cells(5, std::vector<CellIndex>{4});
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        EXPECT_EQ(assign_random(s, one, seed).target_cell(0, 0), 4);
    }
    auto const two = Deployment::from_cells(5, std::vector<CellIndex>{0, 4});
    EXPECT_EQ(assign_random(s, two, 3).targets, assign_random(s, two, 3).targets);
    int first = 0;
    for (std::uint64_t seed = 0; seed < 10000; ++seed) {
        first += assign_random(s, two, seed).target_cell(0, 0) == 0 ? 1 : 0;
    }
    EXPECT_NEAR(first, 5000, 300);
}

TEST(Offloading, LoadBalance)
{
    std::vector<int> even{3, 3, 3};
    std::vector<int> skew{2, 0};
    std::vector<int> perm_a{5, 1, 0, 2};
    std::vector<int> perm_b{0, 2, 5, 1};
    EXPECT_EQ(load_balance(even), 0.0);
    EXPECT_EQ(load_balance(skew), 1.0);
    EXPECT_DOUBLE_EQ(load_balance(perm_a), load_balance(perm_b));
    EXPECT_THROW(load_balance(std::vector<int>{}), std::invalid_argument);
    Assignment a;
    a.arrivals = {{2, 0}, {1, 1}};
    EXPECT_DOUBLE_EQ(load_balance(a, 2), 0.5);
    EXPECT_THROW(load_balance(a, 0), std::invalid_argument);
}

TEST(Offloading, TotalDelayOfCellularAssignments)
{
    auto d = blank_data(4, 4, 2);
    add_vehicle(d, {0, 1});
    add_vehicle(d, {2, 3});
    add_vehicle(d, {4, 5});
    GridScenario const s(d);
    Deployment const none(16);
    auto const a = assign_nearest(s, none, {}, {});
    EXPECT_DOUBLE_EQ(total_assignment_delay(s, none, a, {}, {}), 12.0);

    GridScenario const empty(blank_data(4, 4, 2));
    EXPECT_EQ(total_assignment_delay(empty, none, assign_nearest(empty, none, {}, {}), {}, {}), 0.0);

    add_vehicle(d, {kAbsent, 6});
    GridScenario const s4(d);
    EXPECT_DOUBLE_EQ(total_assignment_delay(s4, none, assign_nearest(s4, none, {}, {}), {}, {}), 14.0);
}

TEST(Offloading, LinkTableMatchesDirectComputation)
{
    SynthSpec spec;
    spec.vehicles = 20;
    auto const s = synth_scenario(21, spec);
    LinkBudgetParams p;
    p.shadow_seed = 4;
    LinkTable const table(s, p);
    auto const direct = direct_transmission(s, p);
    for (auto const& t : s.traces()) {
        for (auto pos : t.positions) {
            for (CellIndex c = 0; c < s.num_cells(); c += 5) {
                ASSERT_EQ(table.transmission(pos, c), direct(pos, c));
            }
        }
    }
}

TEST(Offloading, StrategyNames)
{
    EXPECT_EQ(parse_offload_strategy("mindis"), OffloadStrategy::Nearest);
    EXPECT_EQ(parse_offload_strategy("minpl"), OffloadStrategy::Strongest);
    EXPECT_EQ(to_string(parse_offload_strategy("ibrsg")), "ibrsg");
    EXPECT_THROW(parse_offload_strategy("ga"), ConfigError);
}
