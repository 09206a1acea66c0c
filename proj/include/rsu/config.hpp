#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "evolver/config.hpp"
#include "offloading.hpp"
#include "radio.hpp"

namespace rsu {

struct CompareConfig {
    std::filesystem::path deployment_path; // JSON array of cell indices
    std::vector<OffloadStrategy> strategies{OffloadStrategy::Ibrsg, OffloadStrategy::Nearest, OffloadStrategy::Strongest, OffloadStrategy::Random};
};

struct RunConfig {
    std::filesystem::path scenario_path;
    EvolverConfig evolver;
    LinkBudgetParams radio;
    QueueParams queue;
    OffloadConfig offload;
    CompareConfig compare;
    std::filesystem::path output_dir{"out"};
    std::vector<std::uint64_t> seeds{1};
};

inline auto config_to_json(RunConfig const& c) -> nlohmann::json
{
    using nlohmann::json;
    auto const& e = c.evolver;
    json j;
    j["scenario"] = c.scenario_path.string();
    j["output_dir"] = c.output_dir.string();
    j["seeds"] = c.seeds;
    j["evolver"] = {
        {"population", e.population},
        {"islands", e.islands},
        {"generations", e.generations},
        {"crossover_init", e.crossover_init},
        {"crossover_min", e.crossover_min},
        {"crossover_max", e.crossover_max},
        {"mutation_init", e.mutation_init},
        {"mutation_min", e.mutation_min},
        {"mutation_max", e.mutation_max},
        {"delta_c", e.delta_c},
        {"delta_m", e.delta_m},
        {"theta", e.theta},
        {"alpha", e.alpha},
        {"tau", e.tau},
        {"emigrant_fraction", e.emigrant_fraction},
        {"d_min_m", e.d_min_m},
        {"calibrate", e.calibrate},
        {"adaptive_rates", e.adaptive_rates},
        {"epsilon_schedule", e.epsilon_schedule},
        {"init_density", e.init_density},
        {"n_mut", e.n_mut},
        {"reference_point_divisions", e.reference_point_divisions},
    };
    auto const& r = c.radio;
    j["radio"] = {
        {"packet_bits", r.packet_bits},
        {"bandwidth_hz", r.bandwidth_hz},
        {"tx_power_dbm", r.tx_power_dbm},
        {"noise_dbm_per_hz", r.noise_dbm_per_hz},
        {"carrier_hz", r.carrier_hz},
        {"shadow_sigma_db", r.shadow_sigma_db},
        {"cellular_delay_s", r.cellular_delay_s},
        {"shadow_seed", r.shadow_seed},
    };
    j["queue"] = {
        {"service_rate", c.queue.service_rate},
        {"saturation", c.queue.saturation.kind == SaturationPolicy::Kind::Penalty ? "penalty" : "cellular"},
        {"penalty_s", c.queue.saturation.penalty_s},
    };
    j["offload"] = {
        {"strategy", std::string(to_string(c.offload.strategy))},
        {"error_threshold", c.offload.error_threshold},
        {"max_sweeps", c.offload.max_sweeps},
        {"seed", c.offload.seed},
    };
    json strategies = json::array();
    for (auto st : c.compare.strategies) {
        strategies.push_back(std::string(to_string(st)));
    }
    j["compare"] = {{"deployment", c.compare.deployment_path.string()}, {"strategies", strategies}};
    return j;
}

namespace detail {

    // Rejects keys that do not exist in the reference document (typo guard).
    inline void check_known_keys(nlohmann::json const& given, nlohmann::json const& known, std::string const& prefix)
    {
        if (!given.is_object()) {
            return;
        }
        for (auto it = given.begin(); it != given.end(); ++it) {
            if (!known.contains(it.key())) {
                throw ConfigError("unknown configuration key '" + prefix + it.key() + "'");
            }
            if (known[it.key()].is_object()) {
                check_known_keys(it.value(), known[it.key()], prefix + it.key() + ".");
            }
        }
    }

} // namespace detail

/// Applies a dotted-path override "section.key=value". The value is read as
/// JSON when it parses, otherwise as a string.
inline void apply_override(nlohmann::json& j, std::string_view assignment)
{
    auto const eq = assignment.find('=');
    if (eq == std::string_view::npos || eq == 0) {
        throw ConfigError("override '" + std::string(assignment) + "' is not of the form key=value");
    }
    std::string const path(assignment.substr(0, eq));
    std::string const raw(assignment.substr(eq + 1));
    nlohmann::json value = nlohmann::json::parse(raw, nullptr, false);
    if (value.is_discarded()) {
        value = raw;
    }
    nlohmann::json* node = &j;
    std::size_t start = 0;
    while (true) {
        auto const dot = path.find('.', start);
        std::string const key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (!node->is_object() || !node->contains(key)) {
            throw ConfigError("override names unknown key '" + path + "'");
        }
        node = &(*node)[key];
        if (dot == std::string::npos) {
            break;
        }
        start = dot + 1;
    }
    *node = std::move(value);
}

/// Resolves defaults, the given document and overrides into a RunConfig.
/// Relative paths are resolved against base_dir.
inline auto config_from_json(nlohmann::json const& given, std::vector<std::string> const& overrides = {}, std::filesystem::path const& base_dir = {})
    -> RunConfig
{
    auto j = config_to_json(RunConfig{});
    detail::check_known_keys(given, j, "");
    j.merge_patch(given);
    for (auto const& o : overrides) {
        apply_override(j, o);
    }
    RunConfig c;
    try {
        auto resolve = [&base_dir](std::string const& p) -> std::filesystem::path {
            if (p.empty()) {
                return {};
            }
            std::filesystem::path path(p);
            return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
        };
        c.scenario_path = resolve(j.at("scenario").get<std::string>());
        c.output_dir = j.at("output_dir").get<std::string>();
        c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();

        auto const& e = j.at("evolver");
        auto& ev = c.evolver;
        ev.population = e.at("population").get<int>();
        ev.islands = e.at("islands").get<int>();
        ev.generations = e.at("generations").get<int>();
        ev.crossover_init = e.at("crossover_init").get<double>();
        ev.crossover_min = e.at("crossover_min").get<double>();
        ev.crossover_max = e.at("crossover_max").get<double>();
        ev.mutation_init = e.at("mutation_init").get<double>();
        ev.mutation_min = e.at("mutation_min").get<double>();
        ev.mutation_max = e.at("mutation_max").get<double>();
        ev.delta_c = e.at("delta_c").get<double>();
        ev.delta_m = e.at("delta_m").get<double>();
        ev.theta = e.at("theta").get<int>();
        ev.alpha = e.at("alpha").get<double>();
        ev.tau = e.at("tau").get<double>();
        ev.emigrant_fraction = e.at("emigrant_fraction").get<double>();
        ev.d_min_m = e.at("d_min_m").get<double>();
        ev.calibrate = e.at("calibrate").get<bool>();
        ev.adaptive_rates = e.at("adaptive_rates").get<bool>();
        ev.epsilon_schedule = e.at("epsilon_schedule").get<bool>();
        ev.init_density = e.at("init_density").get<double>();
        ev.n_mut = e.at("n_mut").get<int>();
        ev.reference_point_divisions = e.at("reference_point_divisions").get<int>();

        auto const& r = j.at("radio");
        c.radio.packet_bits = r.at("packet_bits").get<double>();
        c.radio.bandwidth_hz = r.at("bandwidth_hz").get<double>();
        c.radio.tx_power_dbm = r.at("tx_power_dbm").get<double>();
        c.radio.noise_dbm_per_hz = r.at("noise_dbm_per_hz").get<double>();
        c.radio.carrier_hz = r.at("carrier_hz").get<double>();
        c.radio.shadow_sigma_db = r.at("shadow_sigma_db").get<double>();
        c.radio.cellular_delay_s = r.at("cellular_delay_s").get<double>();
        c.radio.shadow_seed = r.at("shadow_seed").get<std::uint64_t>();

        auto const& q = j.at("queue");
        c.queue.service_rate = q.at("service_rate").get<double>();
        auto const sat = q.at("saturation").get<std::string>();
        if (sat == "penalty") {
            c.queue.saturation = SaturationPolicy::penalty(q.at("penalty_s").get<double>());
        } else if (sat == "cellular") {
            c.queue.saturation = SaturationPolicy::cellular();
            c.queue.saturation.penalty_s = q.at("penalty_s").get<double>();
        } else {
            throw ConfigError("queue.saturation must be 'penalty' or 'cellular'");
        }

        auto const& o = j.at("offload");
        c.offload.strategy = parse_offload_strategy(o.at("strategy").get<std::string>());
        c.offload.error_threshold = o.at("error_threshold").get<int>();
        c.offload.max_sweeps = o.at("max_sweeps").get<int>();
        c.offload.seed = o.at("seed").get<std::uint64_t>();

        auto const& cmp = j.at("compare");
        c.compare.deployment_path = resolve(cmp.at("deployment").get<std::string>());
        c.compare.strategies.clear();
        for (auto const& st : cmp.at("strategies")) {
            c.compare.strategies.push_back(parse_offload_strategy(st.get<std::string>()));
        }
    } catch (nlohmann::json::exception const& ex) {
        throw ConfigError(std::string("configuration: ") + ex.what());
    }
    if (c.seeds.empty()) {
        throw ConfigError("configuration: seeds must not be empty");
    }
    try {
        c.radio.validate();
        c.queue.validate();
        c.offload.validate();
    } catch (ValidationError const& ex) {
        throw ConfigError(ex.what());
    }
    c.evolver.validate();
    return c;
}

inline auto load_config(std::filesystem::path const& path, std::vector<std::string> const& overrides = {}) -> RunConfig
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open configuration file " + path.string());
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (nlohmann::json::exception const& ex) {
        throw ConfigError("configuration " + path.string() + ": " + ex.what());
    }
    if (j.is_object() && j.contains("config") && j.contains("variant")) {
        j = nlohmann::json(j["config"]); // a run manifest
    }
    return config_from_json(j, overrides, path.parent_path());
}

/// Manifest of an optimize run. Its "config" member is a complete
/// configuration with absolute paths, so the manifest is itself loadable.
inline auto run_manifest(RunConfig const& c, std::vector<std::string> const& artifacts) -> nlohmann::json
{
    RunConfig abs = c;
    abs.scenario_path = std::filesystem::absolute(c.scenario_path).lexically_normal();
    abs.output_dir = std::filesystem::absolute(c.output_dir).lexically_normal();
    if (!c.compare.deployment_path.empty()) {
        abs.compare.deployment_path = std::filesystem::absolute(c.compare.deployment_path).lexically_normal();
    }
    return {{"variant", c.evolver.variant_name()}, {"config", config_to_json(abs)}, {"artifacts", artifacts}};
}

} // namespace rsu
