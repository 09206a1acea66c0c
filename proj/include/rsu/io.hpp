#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "error.hpp"
#include "evolver.hpp"
#include "metrics.hpp"

namespace rsu {

// Shortest representation that round-trips; "nan" / "inf" for non-finite values.
inline auto format_number(double v) -> std::string
{
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    return fmt::format("{}", v);
}

inline void write_front_csv(std::ostream& out, std::vector<Individual> const& front, std::string const& algorithm, std::uint64_t seed)
{
    out << "f1_s,f2_s,f3,viol_obstacle_m,viol_spacing_m,phi,algorithm,seed\n";
    for (auto const& ind : front) {
        out << format_number(ind.objectives.f1_total_delay_s) << ',' << format_number(ind.objectives.f2_max_sensitive_delay_s) << ','
            << ind.objectives.f3_rsu_count << ',' << format_number(ind.violation.obstacle_violation_m) << ','
            << format_number(ind.violation.spacing_violation_m) << ',' << format_number(ind.violation.phi) << ',' << algorithm << ',' << seed << '\n';
    }
}

inline void write_telemetry_csv(std::ostream& out, std::vector<GenerationStats> const& rows)
{
    out << "generation,island,epsilon,rho,crossover_rate,mutation_rate,feasible_count,best_f1,best_f2,best_f3,hypervolume\n";
    for (auto const& r : rows) {
        out << r.generation << ',' << r.island << ',' << format_number(r.epsilon) << ',' << format_number(r.rho) << ','
            << format_number(r.crossover_rate) << ',' << format_number(r.mutation_rate) << ',' << r.feasible_count << ','
            << format_number(r.best_f1) << ',' << format_number(r.best_f2) << ',' << format_number(r.best_f3) << ','
            << format_number(r.hypervolume) << '\n';
    }
}

inline auto deployments_json(std::vector<Individual> const& front) -> nlohmann::json
{
    auto out = nlohmann::json::array();
    for (auto const& ind : front) {
        out.push_back({
            {"cells", ind.genome.cells()},
            {"f1_s", ind.objectives.f1_total_delay_s},
            {"f2_s", ind.objectives.f2_max_sensitive_delay_s},
            {"f3", ind.objectives.f3_rsu_count},
            {"phi", ind.violation.phi},
        });
    }
    return out;
}

namespace detail {

    inline auto split_csv_line(std::string const& line) -> std::vector<std::string>
    {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ss(line);
        while (std::getline(ss, cell, ',')) {
            if (!cell.empty() && cell.back() == '\r') {
                cell.pop_back();
            }
            cells.push_back(cell);
        }
        if (!line.empty() && line.back() == ',') {
            cells.emplace_back();
        }
        return cells;
    }

    inline auto parse_double(std::string const& s, std::string const& where) -> double
    {
        try {
            std::size_t used = 0;
            double const v = std::stod(s, &used);
            if (used != s.size()) {
                throw std::invalid_argument(s);
            }
            return v;
        } catch (std::exception const&) {
            throw ParseError(where + ": not a number '" + s + "'");
        }
    }

} // namespace detail

/// Reads a front CSV by header name. Required columns: f1_s, f2_s, f3, phi,
/// algorithm, seed; others are ignored.
inline auto read_front_csv(std::filesystem::path const& path) -> Front
{
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open front file " + path.string());
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError(path.string() + ": missing header");
    }
    auto const header = detail::split_csv_line(line);
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) {
        col[header[i]] = i;
    }
    for (auto const* name : {"f1_s", "f2_s", "f3", "phi", "algorithm", "seed"}) {
        if (!col.contains(name)) {
            throw ParseError(path.string() + ": missing column '" + name + "'");
        }
    }
    Front f;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") {
            continue;
        }
        auto const cells = detail::split_csv_line(line);
        if (cells.size() != header.size()) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected " + std::to_string(header.size()) + " fields");
        }
        std::string const where = path.string() + ":" + std::to_string(line_no);
        FrontPoint p;
        p.values = {detail::parse_double(cells[col["f1_s"]], where), detail::parse_double(cells[col["f2_s"]], where),
            detail::parse_double(cells[col["f3"]], where)};
        p.phi = detail::parse_double(cells[col["phi"]], where);
        p.algorithm = cells[col["algorithm"]];
        p.seed = static_cast<std::uint64_t>(detail::parse_double(cells[col["seed"]], where));
        for (auto v : p.values) {
            if (!std::isfinite(v)) {
                throw ParseError(where + ": non-finite objective");
            }
        }
        f.points.push_back(std::move(p));
    }
    return f;
}

inline void write_metrics_csv(std::ostream& out, std::vector<MetricsRow> const& rows)
{
    out << "algorithm,nps,nfs,igd,hv,s_metric\n";
    for (auto const& r : rows) {
        out << r.algorithm << ',' << r.nps << ',' << r.nfs << ',' << format_number(r.igd) << ',' << format_number(r.hv) << ','
            << format_number(r.s_metric) << '\n';
    }
}

inline void write_points_csv(std::ostream& out, Front const& f)
{
    out << "f1_s,f2_s,f3,phi,algorithm,seed\n";
    for (auto const& p : f.points) {
        out << format_number(p.values[0]) << ',' << format_number(p.values[1]) << ',' << format_number(p.values[2]) << ',' << format_number(p.phi)
            << ',' << p.algorithm << ',' << p.seed << '\n';
    }
}

/// Reads a deployment file: a JSON array of cell indices, or an object with a
/// "cells" array (one entry of a deployments_<seed>.json list).
inline auto read_deployment(std::filesystem::path const& path, int num_cells) -> Deployment
{
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open deployment file " + path.string());
    }
    auto const j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) {
        throw ParseError(path.string() + ": not valid JSON");
    }
    auto const& cells = j.is_object() && j.contains("cells") ? j["cells"] : j;
    if (!cells.is_array()) {
        throw ParseError(path.string() + ": expected an array of cell indices");
    }
    Deployment d(num_cells);
    for (auto const& c : cells) {
        if (!c.is_number_integer()) {
            throw ParseError(path.string() + ": cell indices must be integers");
        }
        auto const idx = c.get<std::int64_t>();
        if (idx < 0 || idx >= num_cells) {
            throw ValidationError(path.string() + ": cell " + std::to_string(idx) + " is outside the map");
        }
        d.set(static_cast<CellIndex>(idx), true);
    }
    return d;
}

} // namespace rsu
