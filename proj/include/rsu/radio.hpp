#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "random.hpp"
#include "scenario.hpp"

namespace rsu {

// Link budget defaults follow the urban V2I setup: 1 Mb packets, 10 MHz, 23 dBm,
// -174 dBm/Hz, 5.9 GHz carrier, 4 dB shadowing, 2 s cellular fallback.
struct LinkBudgetParams {
    double packet_bits{1e6};
    double bandwidth_hz{1e7};
    double tx_power_dbm{23.0};
    double noise_dbm_per_hz{-174.0};
    double carrier_hz{5.9e9};
    double shadow_sigma_db{4.0};
    double cellular_delay_s{2.0};
    std::uint64_t shadow_seed{0};

    void validate() const
    {
        if (!(packet_bits > 0.0) || !(bandwidth_hz > 0.0) || !(carrier_hz > 0.0) || !(cellular_delay_s > 0.0) || shadow_sigma_db < 0.0) {
            throw ValidationError("radio parameters must be positive");
        }
    }
};

struct SaturationPolicy {
    enum class Kind { Penalty, Cellular };
    Kind kind{Kind::Penalty};
    double penalty_s{2.0};

    static auto penalty(double seconds) -> SaturationPolicy { return {Kind::Penalty, seconds}; }
    static auto cellular() -> SaturationPolicy { return {Kind::Cellular, 0.0}; }
};

struct QueueParams {
    double service_rate{20.0}; // packets per period
    SaturationPolicy saturation{};

    void validate() const
    {
        if (!(service_rate > 0.0)) {
            throw ValidationError("queue service_rate must be positive");
        }
        if (saturation.kind == SaturationPolicy::Kind::Penalty && !(saturation.penalty_s > 0.0)) {
            throw ValidationError("saturation penalty must be positive");
        }
    }
};

inline constexpr double kMinLinkDistanceM = 1.0;

inline auto free_space_path_loss(double dis_m, double carrier_hz) -> double
{
    if (!(dis_m > 0.0) || !(carrier_hz > 0.0)) {
        throw std::domain_error("free_space_path_loss: distance and frequency must be positive");
    }
    return 20.0 * std::log10(dis_m) + 20.0 * std::log10(carrier_hz) - 147.55;
}

// Log-normal shadowing, 10 * sigma * z.
constexpr auto shadowing_loss(double sigma_db, double z) noexcept -> double
{
    return 10.0 * sigma_db * z;
}

/// Shannon rate over a dB link budget: SNR = P_t - loss - (N_0 + 10 log10 B).
inline auto transmission_rate(LinkBudgetParams const& params, double loss_db) -> double
{
    double const received_dbm = params.tx_power_dbm - loss_db;
    double const noise_dbm = params.noise_dbm_per_hz + 10.0 * std::log10(params.bandwidth_hz);
    double const snr = std::pow(10.0, (received_dbm - noise_dbm) / 10.0);
    return params.bandwidth_hz * std::log2(1.0 + snr);
}

// nullopt for a link with zero rate; the caller treats it as unreachable.
inline auto transmission_delay(double packet_bits, double rate_bps) -> std::optional<double>
{
    if (!(rate_bps > 0.0)) {
        return std::nullopt;
    }
    return packet_bits / rate_bps;
}

/// M/M/1 sojourn 1/(mu - lambda). A saturated queue (lambda >= mu) yields the
/// policy penalty, or nullopt when the policy routes the vehicle to cellular.
inline auto queuing_delay(QueueParams const& q, double arrivals) -> std::optional<double>
{
    if (arrivals < q.service_rate) {
        return 1.0 / (q.service_rate - arrivals);
    }
    if (q.saturation.kind == SaturationPolicy::Kind::Penalty) {
        return q.saturation.penalty_s;
    }
    return std::nullopt;
}

/// True when some obstacle cell other than the two endpoint cells intersects the
/// open segment between the cell centers. Segments passing exactly through a grid
/// corner do not touch the diagonal cells.
inline auto obstacle_between(GridScenario const& s, CellIndex a, CellIndex b) -> bool
{
    if (a == b) {
        return false;
    }
    double const ax = s.col_of(a) + 0.5;
    double const ay = s.row_of(a) + 0.5;
    double const dx = (s.col_of(b) + 0.5) - ax;
    double const dy = (s.row_of(b) + 0.5) - ay;

    std::vector<double> ts{0.0, 1.0};
    auto add_crossings = [&ts](double start, double delta) {
        if (delta == 0.0) {
            return;
        }
        double const end = start + delta;
        double lo = std::min(start, end);
        double hi = std::max(start, end);
        for (double g = std::ceil(lo); g <= hi; g += 1.0) {
            double const t = (g - start) / delta;
            if (t > 0.0 && t < 1.0) {
                ts.push_back(t);
            }
        }
    };
    add_crossings(ax, dx);
    add_crossings(ay, dy);
    std::sort(ts.begin(), ts.end());

    for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
        if (ts[i + 1] - ts[i] <= 1e-12) {
            continue;
        }
        double const tm = 0.5 * (ts[i] + ts[i + 1]);
        int const col = static_cast<int>(std::floor(ax + tm * dx));
        int const row = static_cast<int>(std::floor(ay + tm * dy));
        CellIndex const c = row * s.width_cells() + col;
        if (c != a && c != b && s.is_obstacle(c)) {
            return true;
        }
    }
    return false;
}

// Fixed standard-normal draw for one (vehicle cell, RSU cell) pair.
inline auto shadow_sample(std::uint64_t shadow_seed, CellIndex vehicle_cell, CellIndex rsu_cell) noexcept -> double
{
    return keyed_standard_normal(derive_seed({shadow_seed, static_cast<std::uint64_t>(vehicle_cell), static_cast<std::uint64_t>(rsu_cell)}));
}

/// Total path loss: free-space over the 1 m-clamped distance, plus shadowing
/// when an obstacle lies between the two cells.
inline auto path_loss_db(GridScenario const& s, LinkBudgetParams const& params, CellIndex vehicle_cell, CellIndex rsu_cell) -> double
{
    double const d = std::max(s.distance_m(vehicle_cell, rsu_cell), kMinLinkDistanceM);
    double loss = free_space_path_loss(d, params.carrier_hz);
    if (obstacle_between(s, vehicle_cell, rsu_cell)) {
        loss += shadowing_loss(params.shadow_sigma_db, shadow_sample(params.shadow_seed, vehicle_cell, rsu_cell));
    }
    return loss;
}

inline auto link_transmission_delay(GridScenario const& s, LinkBudgetParams const& params, CellIndex vehicle_cell, CellIndex rsu_cell)
    -> std::optional<double>
{
    return transmission_delay(params.packet_bits, transmission_rate(params, path_loss_db(s, params, vehicle_cell, rsu_cell)));
}

/// Transmission plus queuing delay of one vehicle served by one RSU.
///
/// Returns nullopt when the vehicle must fall back to cellular: the RSU is out
/// of coverage, the link rate is zero, or the queue saturates under the
/// Cellular policy.
inline auto link_delay(GridScenario const& s, LinkBudgetParams const& params, QueueParams const& q, CellIndex vehicle_cell, CellIndex rsu_cell,
    int arrivals_at_rsu) -> std::optional<double>
{
    if (s.distance_m(vehicle_cell, rsu_cell) > s.coverage_radius_m()) {
        return std::nullopt;
    }
    auto const trans = link_transmission_delay(s, params, vehicle_cell, rsu_cell);
    if (!trans) {
        return std::nullopt;
    }
    auto const queue = queuing_delay(q, static_cast<double>(arrivals_at_rsu));
    if (!queue) {
        return std::nullopt;
    }
    return *trans + *queue;
}

} // namespace rsu
