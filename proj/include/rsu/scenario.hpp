#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "random.hpp"

namespace rsu {

using CellIndex = std::int32_t;

inline constexpr CellIndex kAbsent = -1;

struct Point {
    double x_m{0.0};
    double y_m{0.0};
};

struct SensitiveArea {
    double x_m{0.0};
    double y_m{0.0};
    double radius_m{20.0};

    auto operator==(SensitiveArea const&) const -> bool = default;
};

// One vehicle's cell per period; kAbsent marks periods the vehicle is not on the map.
struct VehicleTrace {
    std::string id;
    std::vector<CellIndex> positions;

    auto operator==(VehicleTrace const&) const -> bool = default;
};

struct ScenarioData {
    int width_cells{0};
    int height_cells{0};
    double cell_size_m{20.0};
    std::vector<CellIndex> obstacles; // cell indices
    int num_periods{1};
    double period_length_s{30.0};
    double coverage_radius_m{300.0};
    std::vector<SensitiveArea> sensitive_areas;
    std::vector<VehicleTrace> traces;
};

/// Rasterized urban map. Row-major cells: idx = row * width + col.
///
/// Immutable after construction; the constructor validates every invariant and
/// throws ValidationError on the first violation found.
class GridScenario {
public:
    explicit GridScenario(ScenarioData data)
        : width_(data.width_cells)
        , height_(data.height_cells)
        , cell_size_(data.cell_size_m)
        , num_periods_(data.num_periods)
        , period_length_(data.period_length_s)
        , coverage_radius_(data.coverage_radius_m)
        , areas_(std::move(data.sensitive_areas))
        , traces_(std::move(data.traces))
    {
        if (width_ <= 0 || height_ <= 0) {
            throw ValidationError("grid dimensions must be positive");
        }
        if (!(cell_size_ > 0.0) || !std::isfinite(cell_size_)) {
            throw ValidationError("cell_size_m must be positive");
        }
        if (!(coverage_radius_ > 0.0) || !std::isfinite(coverage_radius_)) {
            throw ValidationError("coverage_radius_m must be positive");
        }
        if (num_periods_ < 1) {
            throw ValidationError("num_periods must be at least 1");
        }
        if (!(period_length_ > 0.0)) {
            throw ValidationError("period length must be positive");
        }
        auto const k = num_cells();
        obstacle_.assign(static_cast<std::size_t>(k), 0);
        for (auto c : data.obstacles) {
            if (c < 0 || c >= k) {
                throw ValidationError("obstacle cell index " + std::to_string(c) + " out of range [0, " + std::to_string(k) + ")");
            }
            obstacle_[static_cast<std::size_t>(c)] = 1;
        }
        for (auto const& a : areas_) {
            if (!(a.radius_m > 0.0)) {
                throw ValidationError("sensitive area radius must be positive");
            }
            if (a.x_m < 0.0 || a.y_m < 0.0 || a.x_m > width_m() || a.y_m > height_m()) {
                throw ValidationError("sensitive area center outside the map");
            }
        }
        presence_.assign(static_cast<std::size_t>(k), 0);
        for (auto const& t : traces_) {
            if (static_cast<int>(t.positions.size()) != num_periods_) {
                throw ValidationError("trace '" + t.id + "' has " + std::to_string(t.positions.size()) + " positions, expected " + std::to_string(num_periods_));
            }
            for (auto p : t.positions) {
                if (p == kAbsent) {
                    continue;
                }
                if (p < 0 || p >= k) {
                    throw ValidationError("trace '" + t.id + "' position " + std::to_string(p) + " out of range");
                }
                ++presence_[static_cast<std::size_t>(p)];
            }
        }
    }

    [[nodiscard]] auto width_cells() const noexcept -> int { return width_; }
    [[nodiscard]] auto height_cells() const noexcept -> int { return height_; }
    [[nodiscard]] auto num_cells() const noexcept -> int { return width_ * height_; }
    [[nodiscard]] auto cell_size_m() const noexcept -> double { return cell_size_; }
    [[nodiscard]] auto width_m() const noexcept -> double { return width_ * cell_size_; }
    [[nodiscard]] auto height_m() const noexcept -> double { return height_ * cell_size_; }
    [[nodiscard]] auto num_periods() const noexcept -> int { return num_periods_; }
    [[nodiscard]] auto period_length_s() const noexcept -> double { return period_length_; }
    [[nodiscard]] auto coverage_radius_m() const noexcept -> double { return coverage_radius_; }
    [[nodiscard]] auto sensitive_areas() const noexcept -> std::vector<SensitiveArea> const& { return areas_; }
    [[nodiscard]] auto traces() const noexcept -> std::vector<VehicleTrace> const& { return traces_; }
    [[nodiscard]] auto num_vehicles() const noexcept -> int { return static_cast<int>(traces_.size()); }

    [[nodiscard]] auto is_obstacle(CellIndex idx) const -> bool
    {
        check_index(idx);
        return obstacle_[static_cast<std::size_t>(idx)] != 0;
    }

    [[nodiscard]] auto obstacle_cells() const -> std::vector<CellIndex>
    {
        std::vector<CellIndex> out;
        for (CellIndex i = 0; i < num_cells(); ++i) {
            if (obstacle_[static_cast<std::size_t>(i)] != 0) {
                out.push_back(i);
            }
        }
        return out;
    }

    [[nodiscard]] auto free_cell_count() const -> int
    {
        return num_cells() - static_cast<int>(std::count(obstacle_.begin(), obstacle_.end(), std::uint8_t{1}));
    }

    [[nodiscard]] auto row_of(CellIndex idx) const noexcept -> int { return idx / width_; }
    [[nodiscard]] auto col_of(CellIndex idx) const noexcept -> int { return idx % width_; }

    [[nodiscard]] auto cell_center(CellIndex idx) const -> Point
    {
        check_index(idx);
        return {(col_of(idx) + 0.5) * cell_size_, (row_of(idx) + 0.5) * cell_size_};
    }

    [[nodiscard]] auto distance_m(CellIndex a, CellIndex b) const -> double
    {
        check_index(a);
        check_index(b);
        double const dx = static_cast<double>(col_of(a) - col_of(b)) * cell_size_;
        double const dy = static_cast<double>(row_of(a) - row_of(b)) * cell_size_;
        return std::hypot(dx, dy);
    }

    // Vehicle-period presences within radius_m of the cell center, over all periods.
    [[nodiscard]] auto traffic_volume(CellIndex idx, double radius_m) const -> std::int64_t
    {
        check_index(idx);
        auto const reach = static_cast<int>(std::floor(radius_m / cell_size_));
        int const r0 = row_of(idx);
        int const c0 = col_of(idx);
        std::int64_t total = 0;
        for (int r = std::max(0, r0 - reach); r <= std::min(height_ - 1, r0 + reach); ++r) {
            for (int c = std::max(0, c0 - reach); c <= std::min(width_ - 1, c0 + reach); ++c) {
                double const d = std::hypot((r - r0) * cell_size_, (c - c0) * cell_size_);
                if (d <= radius_m) {
                    total += presence_[static_cast<std::size_t>(r * width_ + c)];
                }
            }
        }
        return total;
    }

    [[nodiscard]] auto in_area(CellIndex idx, SensitiveArea const& area) const -> bool
    {
        auto const p = cell_center(idx);
        return std::hypot(p.x_m - area.x_m, p.y_m - area.y_m) <= area.radius_m;
    }

    [[nodiscard]] auto data() const -> ScenarioData
    {
        return {width_, height_, cell_size_, obstacle_cells(), num_periods_, period_length_, coverage_radius_, areas_, traces_};
    }

    auto operator==(GridScenario const& o) const -> bool
    {
        return width_ == o.width_ && height_ == o.height_ && cell_size_ == o.cell_size_ && num_periods_ == o.num_periods_
            && period_length_ == o.period_length_ && coverage_radius_ == o.coverage_radius_ && obstacle_ == o.obstacle_
            && areas_ == o.areas_ && traces_ == o.traces_;
    }

private:
    void check_index(CellIndex idx) const
    {
        if (idx < 0 || idx >= num_cells()) {
            throw std::out_of_range("cell index " + std::to_string(idx) + " out of range [0, " + std::to_string(num_cells()) + ")");
        }
    }

    int width_;
    int height_;
    double cell_size_;
    int num_periods_;
    double period_length_;
    double coverage_radius_;
    std::vector<std::uint8_t> obstacle_;
    std::vector<SensitiveArea> areas_;
    std::vector<VehicleTrace> traces_;
    std::vector<std::int64_t> presence_;
};

// ---------------------------------------------------------------------------
// Scenario file (JSON)

inline auto scenario_to_json(GridScenario const& s) -> nlohmann::json
{
    using nlohmann::json;
    json j;
    j["grid"] = {{"width", s.width_cells()}, {"height", s.height_cells()}, {"cell_size_m", s.cell_size_m()}};
    j["obstacles"] = s.obstacle_cells();
    j["periods"] = {{"count", s.num_periods()}, {"length_s", s.period_length_s()}};
    j["coverage_radius_m"] = s.coverage_radius_m();
    j["sensitive_areas"] = json::array();
    for (auto const& a : s.sensitive_areas()) {
        j["sensitive_areas"].push_back({{"x_m", a.x_m}, {"y_m", a.y_m}, {"radius_m", a.radius_m}});
    }
    j["traces"] = json::array();
    for (auto const& t : s.traces()) {
        json pos = json::array();
        for (auto p : t.positions) {
            pos.push_back(p == kAbsent ? json(nullptr) : json(p));
        }
        j["traces"].push_back({{"id", t.id}, {"positions", std::move(pos)}});
    }
    return j;
}

inline auto scenario_from_json(nlohmann::json const& j) -> GridScenario
{
    ScenarioData d;
    try {
        auto const& grid = j.at("grid");
        d.width_cells = grid.at("width").get<int>();
        d.height_cells = grid.at("height").get<int>();
        d.cell_size_m = grid.at("cell_size_m").get<double>();
        d.obstacles = j.value("obstacles", std::vector<CellIndex>{});
        if (j.contains("periods")) {
            d.num_periods = j["periods"].at("count").get<int>();
            d.period_length_s = j["periods"].value("length_s", 30.0);
        }
        d.coverage_radius_m = j.value("coverage_radius_m", 300.0);
        for (auto const& a : j.value("sensitive_areas", nlohmann::json::array())) {
            d.sensitive_areas.push_back({a.at("x_m").get<double>(), a.at("y_m").get<double>(), a.value("radius_m", 20.0)});
        }
        for (auto const& t : j.value("traces", nlohmann::json::array())) {
            VehicleTrace vt;
            auto const& id = t.at("id");
            vt.id = id.is_string() ? id.get<std::string>() : id.dump();
            for (auto const& p : t.at("positions")) {
                vt.positions.push_back(p.is_null() ? kAbsent : p.get<CellIndex>());
            }
            d.traces.push_back(std::move(vt));
        }
    } catch (nlohmann::json::exception const& e) {
        throw ParseError(std::string("scenario: ") + e.what());
    }
    return GridScenario(std::move(d));
}

inline auto load_scenario(std::filesystem::path const& path) -> GridScenario
{
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open scenario file " + path.string());
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (nlohmann::json::exception const& e) {
        throw ParseError("scenario " + path.string() + ": " + e.what());
    }
    return scenario_from_json(j);
}

inline void save_scenario(GridScenario const& s, std::filesystem::path const& path)
{
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write scenario file " + path.string());
    }
    out << scenario_to_json(s).dump(1) << '\n';
}

// ---------------------------------------------------------------------------
// Synthetic scenarios

struct SynthSpec {
    int width_cells{20};
    int height_cells{20};
    double cell_size_m{20.0};
    int obstacle_blocks{4};
    int block_min_cells{2}; // block side length range
    int block_max_cells{4};
    int vehicles{50};
    int periods{4};
    double period_length_s{30.0};
    int steps_per_period{3};
    double road_bias{0.8}; // probability of keeping the current heading
    double absence_probability{0.0};
    int sensitive_areas{2};
    double sensitive_radius_m{20.0};
    double coverage_radius_m{300.0};
};

/// Random-walk traffic over the free cells of a block-obstacle map.
///
/// Vehicles keep their heading with probability road_bias, otherwise turn to a
/// random free neighbor, which yields corridor-like traffic between blocks.
/// Sensitive areas are centered on cells that some vehicle visits.
inline auto synth_scenario(std::uint64_t seed, SynthSpec const& spec) -> GridScenario
{
    if (spec.width_cells <= 0 || spec.height_cells <= 0 || spec.periods < 1 || spec.vehicles < 0) {
        throw ValidationError("synthetic spec: non-positive dimensions");
    }
    if (spec.block_min_cells < 1 || spec.block_max_cells < spec.block_min_cells) {
        throw ValidationError("synthetic spec: invalid block size range");
    }
    Rng rng{derive_seed({seed, 0x5ce7a410ULL})};
    int const w = spec.width_cells;
    int const h = spec.height_cells;
    int const k = w * h;
    std::vector<std::uint8_t> blocked(static_cast<std::size_t>(k), 0);
    std::uniform_int_distribution<int> side(spec.block_min_cells, spec.block_max_cells);
    for (int b = 0; b < spec.obstacle_blocks; ++b) {
        int const bw = std::min(side(rng), w);
        int const bh = std::min(side(rng), h);
        int const r0 = std::uniform_int_distribution<int>(0, h - bh)(rng);
        int const c0 = std::uniform_int_distribution<int>(0, w - bw)(rng);
        for (int r = r0; r < r0 + bh; ++r) {
            for (int c = c0; c < c0 + bw; ++c) {
                blocked[static_cast<std::size_t>(r * w + c)] = 1;
            }
        }
    }
    std::vector<CellIndex> free_cells;
    for (CellIndex i = 0; i < k; ++i) {
        if (blocked[static_cast<std::size_t>(i)] == 0) {
            free_cells.push_back(i);
        }
    }
    if (free_cells.empty()) {
        throw ValidationError("synthetic spec: obstacles cover every cell");
    }

    ScenarioData d;
    d.width_cells = w;
    d.height_cells = h;
    d.cell_size_m = spec.cell_size_m;
    d.num_periods = spec.periods;
    d.period_length_s = spec.period_length_s;
    d.coverage_radius_m = spec.coverage_radius_m;
    for (CellIndex i = 0; i < k; ++i) {
        if (blocked[static_cast<std::size_t>(i)] != 0) {
            d.obstacles.push_back(i);
        }
    }

    constexpr int kDr[4] = {-1, 0, 1, 0};
    constexpr int kDc[4] = {0, 1, 0, -1};
    auto passable = [&](int r, int c) { return r >= 0 && r < h && c >= 0 && c < w && blocked[static_cast<std::size_t>(r * w + c)] == 0; };
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> pick_free(0, free_cells.size() - 1);

    for (int v = 0; v < spec.vehicles; ++v) {
        VehicleTrace t;
        t.id = "v" + std::to_string(v);
        CellIndex cur = free_cells[pick_free(rng)];
        int heading = std::uniform_int_distribution<int>(0, 3)(rng);
        for (int p = 0; p < spec.periods; ++p) {
            if (p > 0) {
                for (int s = 0; s < spec.steps_per_period; ++s) {
                    int const r = cur / w;
                    int const c = cur % w;
                    bool const keep = unit(rng) < spec.road_bias && passable(r + kDr[heading], c + kDc[heading]);
                    if (!keep) {
                        int options[4];
                        int n = 0;
                        for (int dir = 0; dir < 4; ++dir) {
                            if (passable(r + kDr[dir], c + kDc[dir])) {
                                options[n++] = dir;
                            }
                        }
                        if (n == 0) {
                            break;
                        }
                        heading = options[std::uniform_int_distribution<int>(0, n - 1)(rng)];
                    }
                    cur = (r + kDr[heading]) * w + (c + kDc[heading]);
                }
            }
            bool const absent = spec.absence_probability > 0.0 && unit(rng) < spec.absence_probability;
            t.positions.push_back(absent ? kAbsent : cur);
        }
        d.traces.push_back(std::move(t));
    }

    // Area centers sit on visited cells so that some vehicles are latency-sensitive.
    std::vector<CellIndex> visited;
    for (auto const& t : d.traces) {
        for (auto p : t.positions) {
            if (p != kAbsent) {
                visited.push_back(p);
            }
        }
    }
    if (visited.empty()) {
        visited = free_cells;
    }
    std::uniform_int_distribution<std::size_t> pick_visited(0, visited.size() - 1);
    for (int a = 0; a < spec.sensitive_areas; ++a) {
        CellIndex const c = visited[pick_visited(rng)];
        d.sensitive_areas.push_back({((c % w) + 0.5) * spec.cell_size_m, ((c / w) + 0.5) * spec.cell_size_m, spec.sensitive_radius_m});
    }
    return GridScenario(std::move(d));
}

} // namespace rsu
