// rsu_deploy: batch front-end for RSU deployment optimization.
//
//   rsu_deploy [global flags] optimize
//   rsu_deploy [global flags] compare-offloading [--deployment PATH]
//   rsu_deploy [global flags] report-metrics FRONT.csv...
//   rsu_deploy [global flags] synth-scenario [--width N ...]
//
// Exit status: 0 success, 1 runtime failure, 2 invalid configuration or input.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include <rsu/config.hpp>
#include <rsu/evolver.hpp>
#include <rsu/io.hpp>
#include <rsu/metrics.hpp>
#include <rsu/objectives.hpp>
#include <rsu/offloading.hpp>
#include <rsu/scenario.hpp>

namespace fs = std::filesystem;

namespace {

struct GlobalFlags {
    std::string config;
    std::vector<std::string> overrides;
    std::string output;
    std::vector<std::uint64_t> seeds;
    int workers{0};
};

// Files written by the current command; removed again unless commit() is reached.
class Artifacts {
public:
    explicit Artifacts(fs::path dir)
        : dir_(std::move(dir))
    {
    }
    Artifacts(Artifacts const&) = delete;
    auto operator=(Artifacts const&) -> Artifacts& = delete;

    ~Artifacts()
    {
        if (committed_) {
            return;
        }
        std::error_code ec;
        for (auto const& p : written_) {
            fs::remove(p, ec);
        }
        if (created_dir_ && fs::is_empty(dir_, ec)) {
            fs::remove(dir_, ec);
        }
    }

    void prepare()
    {
        if (!fs::exists(dir_)) {
            fs::create_directories(dir_);
            created_dir_ = true;
        }
    }

    template <typename Fn>
    void write(std::string const& name, Fn&& emit)
    {
        auto const path = dir_ / name;
        written_.push_back(path);
        std::ofstream out(path, std::ios::binary);
        if (!out) {
            throw std::runtime_error("cannot write " + path.string());
        }
        emit(out);
        out.flush();
        if (!out) {
            throw std::runtime_error("write failed for " + path.string());
        }
        names_.push_back(name);
    }

    void commit() { committed_ = true; }
    [[nodiscard]] auto names() const -> std::vector<std::string> const& { return names_; }

private:
    fs::path dir_;
    std::vector<fs::path> written_;
    std::vector<std::string> names_;
    bool created_dir_{false};
    bool committed_{false};
};

auto resolve_config(GlobalFlags const& g) -> rsu::RunConfig
{
    auto c = g.config.empty() ? rsu::config_from_json(nlohmann::json::object(), g.overrides) : rsu::load_config(g.config, g.overrides);
    if (!g.output.empty()) {
        c.output_dir = g.output;
    }
    if (!g.seeds.empty()) {
        c.seeds = g.seeds;
    }
    return c;
}

auto worker_count(GlobalFlags const& g) -> int
{
    if (g.workers > 0) {
        return g.workers;
    }
    return std::max(1U, std::thread::hardware_concurrency());
}

auto require_scenario(rsu::RunConfig const& c) -> rsu::GridScenario
{
    if (c.scenario_path.empty()) {
        throw rsu::ConfigError("no scenario given (set 'scenario' in the config or --set scenario=PATH)");
    }
    if (!fs::is_regular_file(c.scenario_path)) {
        throw rsu::ConfigError("scenario file not found: " + c.scenario_path.string());
    }
    return rsu::load_scenario(c.scenario_path);
}

auto seconds_since(std::chrono::steady_clock::time_point t0) -> double
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

auto cmd_optimize(GlobalFlags const& g) -> int
{
    auto cfg = resolve_config(g);
    auto const scenario = require_scenario(cfg);
    rsu::Evaluator const eval(scenario, cfg.radio, cfg.queue, cfg.offload, cfg.evolver.d_min_m);
    int const workers = worker_count(g);
    auto const variant = cfg.evolver.variant_name();

    Artifacts out(cfg.output_dir);
    out.prepare();
    for (auto seed : cfg.seeds) {
        auto ec = cfg.evolver;
        ec.master_seed = seed;
        auto const t0 = std::chrono::steady_clock::now();
        auto const result = rsu::run(ec, eval, workers);
        std::size_t feasible = 0;
        for (auto const& ind : result.pareto) {
            feasible += ind.feasible() ? 1 : 0;
        }
        fmt::print(stderr, "{} seed {}: {} non-dominated, {} feasible ({:.1f} s)\n", variant, seed, result.pareto.size(), feasible, seconds_since(t0));
        out.write(fmt::format("front_{}.csv", seed), [&](std::ostream& os) { rsu::write_front_csv(os, result.pareto, variant, seed); });
        out.write(fmt::format("telemetry_{}.csv", seed), [&](std::ostream& os) { rsu::write_telemetry_csv(os, result.telemetry); });
        out.write(fmt::format("deployments_{}.json", seed), [&](std::ostream& os) { os << rsu::deployments_json(result.pareto).dump(1) << '\n'; });
    }
    auto const manifest = rsu::run_manifest(cfg, out.names());
    out.write("run_manifest.json", [&](std::ostream& os) { os << manifest.dump(2) << '\n'; });
    out.commit();
    return 0;
}

auto cmd_compare(GlobalFlags const& g, std::string const& deployment_flag) -> int
{
    auto cfg = resolve_config(g);
    if (!deployment_flag.empty()) {
        cfg.compare.deployment_path = deployment_flag;
    }
    if (cfg.compare.deployment_path.empty()) {
        throw rsu::ConfigError("no deployment given (--deployment PATH or compare.deployment)");
    }
    if (cfg.compare.strategies.empty()) {
        throw rsu::ConfigError("compare.strategies is empty");
    }
    if (!g.seeds.empty()) {
        cfg.offload.seed = g.seeds.front();
    }
    auto const scenario = require_scenario(cfg);
    auto const deployment = rsu::read_deployment(cfg.compare.deployment_path, scenario.num_cells());
    rsu::LinkTable const links(scenario, cfg.radio);
    auto const trans = links.as_function();
    int const rsus = deployment.count();

    constexpr int kRepetitions = 5; // wall time is the fastest of these
    std::vector<std::string> rows;
    for (auto st : cfg.compare.strategies) {
        auto oc = cfg.offload;
        oc.strategy = st;
        double best_time = std::numeric_limits<double>::infinity();
        rsu::Assignment a;
        for (int r = 0; r < kRepetitions; ++r) {
            auto const t0 = std::chrono::steady_clock::now();
            a = rsu::assign(scenario, deployment, cfg.radio, cfg.queue, oc, trans);
            best_time = std::min(best_time, seconds_since(t0));
        }
        double const delay = rsu::total_assignment_delay(scenario, a, cfg.radio, cfg.queue, trans);
        double const balance = rsus > 0 ? rsu::load_balance(a, rsus) : 0.0;
        rows.push_back(fmt::format("{},{},{},{},{}\n", rsu::to_string(st), rsu::format_number(delay), rsu::format_number(balance),
            rsu::format_number(best_time), a.total_sweeps()));
    }

    Artifacts out(cfg.output_dir);
    out.prepare();
    out.write("offload_compare.csv", [&](std::ostream& os) {
        os << "strategy,total_delay_s,load_balance,wall_time_s,sweeps\n";
        for (auto const& r : rows) {
            os << r;
        }
    });
    out.commit();
    return 0;
}

auto cmd_report(GlobalFlags const& g, std::vector<std::string> const& front_paths) -> int
{
    auto const cfg = resolve_config(g);
    std::vector<rsu::Front> fronts;
    for (auto const& p : front_paths) {
        fronts.push_back(rsu::read_front_csv(p));
    }
    auto const rows = rsu::metrics_report(fronts);
    auto const merged = rsu::merge_pareto(fronts);

    Artifacts out(cfg.output_dir);
    out.prepare();
    out.write("metrics.csv", [&](std::ostream& os) { rsu::write_metrics_csv(os, rows); });
    out.write("merged_front.csv", [&](std::ostream& os) { rsu::write_points_csv(os, merged); });
    out.commit();
    return 0;
}

auto cmd_synth(GlobalFlags const& g, rsu::SynthSpec const& spec, std::string const& name) -> int
{
    auto const cfg = resolve_config(g);
    if (name.empty() || fs::path(name).has_parent_path() || name == "." || name == "..") {
        throw rsu::ConfigError("--name must be a plain file name");
    }
    auto const scenario = rsu::synth_scenario(cfg.seeds.front(), spec);
    Artifacts out(cfg.output_dir);
    out.prepare();
    out.write(name, [&](std::ostream& os) { os << rsu::scenario_to_json(scenario).dump(1) << '\n'; });
    out.commit();
    fmt::print(stderr, "wrote {}: {}x{} cells, {} vehicles, {} periods\n", (fs::path(cfg.output_dir) / name).string(), scenario.width_cells(),
        scenario.height_cells(), scenario.num_vehicles(), scenario.num_periods());
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"RSU deployment optimization"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalFlags g;
    app.add_option("--config", g.config, "Run configuration (JSON); a run_manifest.json also works");
    app.add_option("--set", g.overrides, "Override a configuration value, e.g. evolver.generations=50")->take_all();
    app.add_option("--output", g.output, "Output directory (default: output_dir from the configuration)");
    app.add_option("--seed", g.seeds, "Master seed; repeat for several runs")->take_all();
    app.add_option("--workers", g.workers, "Worker threads (default: hardware concurrency)")->check(CLI::NonNegativeNumber);

    auto* optimize = app.add_subcommand("optimize", "Run the evolutionary optimizer for every seed");

    auto* compare = app.add_subcommand("compare-offloading", "Compare offloading strategies on a fixed deployment");
    std::string deployment;
    compare->add_option("--deployment", deployment, "JSON array of RSU cell indices");

    auto* report = app.add_subcommand("report-metrics", "Quality indicators for one or more front CSV files");
    std::vector<std::string> fronts;
    report->add_option("fronts", fronts, "Front CSV files")->required();

    auto* synth = app.add_subcommand("synth-scenario", "Write a synthetic scenario");
    rsu::SynthSpec spec;
    std::string name = "scenario.json";
    synth->add_option("--width", spec.width_cells, "Map width in cells");
    synth->add_option("--height", spec.height_cells, "Map height in cells");
    synth->add_option("--cell-size", spec.cell_size_m, "Cell side length in meters");
    synth->add_option("--blocks", spec.obstacle_blocks, "Number of obstacle blocks");
    synth->add_option("--vehicles", spec.vehicles, "Number of vehicles");
    synth->add_option("--periods", spec.periods, "Number of periods");
    synth->add_option("--sensitive", spec.sensitive_areas, "Number of latency-sensitive areas");
    synth->add_option("--coverage", spec.coverage_radius_m, "RSU coverage radius in meters");
    synth->add_option("--name", name, "Output file name inside the output directory");

    try {
        app.parse(argc, argv);
    } catch (CLI::ParseError const& e) {
        int const code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*optimize) {
            return cmd_optimize(g);
        }
        if (*compare) {
            return cmd_compare(g, deployment);
        }
        if (*report) {
            return cmd_report(g, fronts);
        }
        return cmd_synth(g, spec, name);
    } catch (rsu::ConfigError const& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (rsu::ValidationError const& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (rsu::ParseError const& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (std::exception const& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
