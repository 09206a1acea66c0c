#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "../error.hpp"

namespace rsu {

struct EvolverConfig {
    int population{360};
    int islands{3};
    int generations{50};

    double crossover_init{0.5};
    double crossover_min{0.2};
    double crossover_max{1.0};
    double mutation_init{0.05};
    double mutation_min{0.0};
    double mutation_max{0.1};
    double delta_c{0.1};
    double delta_m{0.01};

    // epsilon schedule
    int theta{18};
    double alpha{0.95};
    double tau{0.1};

    double emigrant_fraction{0.10};
    double d_min_m{30.0};

    bool calibrate{true};        // offspring calibration (the "-c" variant)
    bool adaptive_rates{true};   // off: rates stay at their initial values
    bool epsilon_schedule{true}; // off: epsilon stays 0 (plain feasibility-first ranking)

    double init_density{30.0}; // expected RSUs per initial genome
    int n_mut{3};
    int reference_point_divisions{14};
    std::uint64_t master_seed{1};

    [[nodiscard]] auto island_size() const -> int { return population / islands; }

    [[nodiscard]] auto emigrants_per_island() const -> int
    {
        return static_cast<int>(std::lround(emigrant_fraction * island_size()));
    }

    [[nodiscard]] auto variant_name() const -> std::string
    {
        if (islands == 1 && !adaptive_rates && !epsilon_schedule && !calibrate) {
            return "NSGA-III";
        }
        return calibrate ? "AM-NSGA-III-c" : "AM-NSGA-III";
    }

    void validate() const
    {
        auto fail = [](std::string const& msg) { throw ConfigError("evolver: " + msg); };
        if (islands < 1) {
            fail("islands must be >= 1");
        }
        if (population < islands || population % islands != 0) {
            fail("population must be a positive multiple of islands");
        }
        if (island_size() < 2) {
            fail("islands need at least 2 members");
        }
        if (generations < 0) {
            fail("generations must be >= 0");
        }
        if (!(crossover_min <= crossover_init && crossover_init <= crossover_max) || crossover_min < 0.0 || crossover_max > 1.0) {
            fail("crossover rates must satisfy 0 <= min <= init <= max <= 1");
        }
        if (!(mutation_min <= mutation_init && mutation_init <= mutation_max) || mutation_min < 0.0 || mutation_max > 1.0) {
            fail("mutation rates must satisfy 0 <= min <= init <= max <= 1");
        }
        if (delta_c < 0.0 || delta_m < 0.0) {
            fail("rate deltas must be non-negative");
        }
        if (theta < 0 || theta > population) {
            fail("theta must lie in [0, population]");
        }
        if (alpha < 0.0 || alpha > 1.0 || tau < 0.0 || tau > 1.0) {
            fail("alpha and tau must lie in [0, 1]");
        }
        if (emigrant_fraction < 0.0 || emigrant_fraction > 1.0) {
            fail("emigrant_fraction must lie in [0, 1]");
        }
        if (islands > 1 && (islands - 1) * emigrants_per_island() > island_size()) {
            fail("(islands - 1) * emigrants exceeds the island size");
        }
        if (!(d_min_m > 0.0)) {
            fail("d_min_m must be positive");
        }
        if (init_density < 0.0) {
            fail("init_density must be non-negative");
        }
        if (n_mut < 1) {
            fail("n_mut must be >= 1");
        }
        if (reference_point_divisions < 1) {
            fail("reference_point_divisions must be >= 1");
        }
    }
};

} // namespace rsu
