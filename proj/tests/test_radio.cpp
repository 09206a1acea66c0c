#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include <rsu/radio.hpp>

#include "fixtures.hpp"

using namespace rsu;
using rsu::test::blank_data;
using rsu::test::cell;

namespace {

// Independent link budget in linear units (watts), used as the rate oracle.
auto rate_oracle(LinkBudgetParams const& p, double loss_db) -> double
{
    double const tx_w = std::pow(10.0, p.tx_power_dbm / 10.0) / 1000.0;
    double const rx_w = tx_w / std::pow(10.0, loss_db / 10.0);
    double const noise_w = std::pow(10.0, p.noise_dbm_per_hz / 10.0) / 1000.0 * p.bandwidth_hz;
    return p.bandwidth_hz * std::log(1.0 + rx_w / noise_w) / std::log(2.0);
}

} // namespace

TEST(Radio, FreeSpacePathLoss)
{
    EXPECT_NEAR(free_space_path_loss(1.0, 5.9e9), 47.867, 0.01);
    EXPECT_NEAR(free_space_path_loss(100.0, 5.9e9), 87.867, 0.01);
    EXPECT_NEAR(free_space_path_loss(1000.0, 5.9e9) - free_space_path_loss(100.0, 5.9e9), 20.0, 1e-9);
    EXPECT_THROW(free_space_path_loss(0.0, 5.9e9), std::domain_error);
}

TEST(Radio, ShadowingLoss)
{
    EXPECT_EQ(shadowing_loss(4.0, 0.0), 0.0);
    EXPECT_EQ(shadowing_loss(4.0, 1.0), 40.0);
    EXPECT_EQ(shadowing_loss(4.0, -0.5), -20.0);
}

TEST(Radio, TransmissionRate)
{
    LinkBudgetParams const p;
    double const r = transmission_rate(p, 87.867);
    EXPECT_NEAR(r, 1.30e8, 0.02 * 1.30e8);
    EXPECT_NEAR(r, rate_oracle(p, 87.867), 1e-6 * r);
    EXPECT_LT(transmission_rate(p, 1000.0), 1.0);
    EXPECT_GT(transmission_rate(p, 80.0), transmission_rate(p, 90.0));
}

TEST(Radio, TransmissionDelay)
{
    EXPECT_DOUBLE_EQ(*transmission_delay(1e6, 1e6), 1.0);
    EXPECT_NEAR(*transmission_delay(1e6, 1.30e8), 7.7e-3, 0.02 * 7.7e-3);
    EXPECT_DOUBLE_EQ(*transmission_delay(2e6, 3e7), 2.0 * *transmission_delay(1e6, 3e7));
    EXPECT_FALSE(transmission_delay(1e6, 0.0).has_value());
}

TEST(Radio, QueuingDelay)
{
    QueueParams q;
    q.service_rate = 20.0;
    EXPECT_EQ(*queuing_delay(q, 10.0), 0.1);
    EXPECT_EQ(*queuing_delay(q, 0.0), 0.05);
    q.saturation = SaturationPolicy::penalty(2.0);
    EXPECT_EQ(*queuing_delay(q, 20.0), 2.0);
    EXPECT_EQ(*queuing_delay(q, 35.0), 2.0);
    q.saturation = SaturationPolicy::cellular();
    EXPECT_FALSE(queuing_delay(q, 20.0).has_value());
}

TEST(Radio, SameCellLinkComposesClampedLossAndEmptyQueue)
{
    GridScenario const s(blank_data(5, 5));
    LinkBudgetParams const p;
    QueueParams const q;
    double const expected = p.packet_bits / rate_oracle(p, free_space_path_loss(1.0, p.carrier_hz)) + 0.05;
    auto const d = link_delay(s, p, q, 12, 12, 0);
    ASSERT_TRUE(d.has_value());
    EXPECT_NEAR(*d, expected, 1e-12);
}

TEST(Radio, OutOfCoverageIsUnusable)
{
    auto data = blank_data(30, 1);
    data.coverage_radius_m = 100.0;
    GridScenario const s(data);
    EXPECT_TRUE(link_delay(s, {}, {}, 0, 5, 0).has_value());  // exactly 100 m
    EXPECT_FALSE(link_delay(s, {}, {}, 0, 6, 0).has_value()); // 120 m
}

TEST(Radio, ShadowingOnlyBehindObstacles)
{
    auto data = blank_data(5, 5);
    data.obstacles = {cell(5, 2, 2)};
    GridScenario const s(data);
    LinkBudgetParams p;
    p.shadow_seed = 11;

    CellIndex const left = cell(5, 2, 0);
    CellIndex const right = cell(5, 2, 4);
    EXPECT_TRUE(obstacle_between(s, left, right));
    double const z = shadow_sample(p.shadow_seed, left, right);
    EXPECT_NEAR(path_loss_db(s, p, left, right), free_space_path_loss(80.0, p.carrier_hz) + 40.0 * z, 1e-9);

    CellIndex const top = cell(5, 0, 0);
    CellIndex const top_right = cell(5, 0, 4);
    EXPECT_FALSE(obstacle_between(s, top, top_right));
    EXPECT_DOUBLE_EQ(path_loss_db(s, p, top, top_right), free_space_path_loss(80.0, p.carrier_hz));

    // Endpoints on the obstacle itself do not shadow.
    EXPECT_FALSE(obstacle_between(s, cell(5, 2, 2), cell(5, 2, 3)));
}

TEST(Radio, CornerTouchIsNotABlock)
{
    auto data = blank_data(3, 3);
    data.obstacles = {cell(3, 0, 1), cell(3, 1, 0)};
    GridScenario const s(data);
    // The 0,0 -> 1,1 diagonal passes exactly through the shared corner.
    EXPECT_FALSE(obstacle_between(s, cell(3, 0, 0), cell(3, 1, 1)));
    data.obstacles = {cell(3, 1, 1)};
    GridScenario const blocked(data);
    EXPECT_TRUE(obstacle_between(blocked, cell(3, 0, 0), cell(3, 2, 2)));
}

TEST(Radio, ObstacleBetweenMatchesSampling)
{
    auto data = blank_data(9, 9);
    data.obstacles = {cell(9, 4, 4), cell(9, 4, 5), cell(9, 2, 6), cell(9, 6, 1)};
    GridScenario const s(data);
    for (CellIndex a = 0; a < s.num_cells(); ++a) {
        for (CellIndex b = 0; b < s.num_cells(); b += 3) {
            // Dense sampling of the open segment, skipping points within 1e-6 of a grid line.
            bool hit = false;
            double const ax = s.col_of(a) + 0.5;
            double const ay = s.row_of(a) + 0.5;
            double const bx = s.col_of(b) + 0.5;
            double const by = s.row_of(b) + 0.5;
            for (int k = 1; k < 4000 && a != b; ++k) {
                double const t = k / 4000.0;
                double const x = ax + t * (bx - ax);
                double const y = ay + t * (by - ay);
                if (std::abs(x - std::round(x)) < 1e-6 || std::abs(y - std::round(y)) < 1e-6) {
                    continue;
                }
                CellIndex const c = static_cast<int>(y) * 9 + static_cast<int>(x);
                if (c != a && c != b && s.is_obstacle(c)) {
                    hit = true;
                }
            }
            ASSERT_EQ(obstacle_between(s, a, b), hit) << a << " -> " << b;
        }
    }
}

TEST(Radio, ShadowSampleIsKeyedAndStandardNormal)
{
    EXPECT_EQ(shadow_sample(3, 10, 20), shadow_sample(3, 10, 20));
    EXPECT_NE(shadow_sample(3, 10, 20), shadow_sample(4, 10, 20));
    std::vector<double> z;
    for (int i = 0; i < 20000; ++i) {
        z.push_back(shadow_sample(7, i, i + 1));
    }
    double const mean = std::accumulate(z.begin(), z.end(), 0.0) / z.size();
    double var = 0.0;
    for (auto v : z) {
        var += (v - mean) * (v - mean);
    }
    var /= z.size() - 1;
    EXPECT_NEAR(mean, 0.0, 0.03);
    EXPECT_NEAR(var, 1.0, 0.04);
}

TEST(Radio, LinkDelayIsDeterministic)
{
    auto data = blank_data(6, 6);
    data.obstacles = {14, 15};
    GridScenario const s(data);
    LinkBudgetParams p;
    p.shadow_seed = 5;
    EXPECT_EQ(link_delay(s, p, {}, 0, 35, 4), link_delay(s, p, {}, 0, 35, 4));
}

TEST(Radio, ParamValidation)
{
    LinkBudgetParams p;
    p.bandwidth_hz = 0.0;
    EXPECT_THROW(p.validate(), ValidationError);
    QueueParams q;
    q.service_rate = -1.0;
    EXPECT_THROW(q.validate(), ValidationError);
}
