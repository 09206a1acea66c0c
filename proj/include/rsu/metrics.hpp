#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace rsu {

// Minimization objectives (f1, f2, f3).
using ObjPoint = std::array<double, 3>;

// Pareto dominance: no worse everywhere, strictly better somewhere.
constexpr auto dominates(ObjPoint const& a, ObjPoint const& b) noexcept -> bool
{
    bool strictly = false;
    for (std::size_t k = 0; k < 3; ++k) {
        if (a[k] > b[k]) {
            return false;
        }
        if (a[k] < b[k]) {
            strictly = true;
        }
    }
    return strictly;
}

inline auto nondominated_indices(std::span<ObjPoint const> pts) -> std::vector<std::size_t>
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < pts.size() && !dominated; ++j) {
            dominated = j != i && dominates(pts[j], pts[i]);
        }
        if (!dominated) {
            out.push_back(i);
        }
    }
    return out;
}

struct FrontPoint {
    ObjPoint values{};
    double phi{0.0};
    std::string algorithm;
    std::uint64_t seed{0};

    [[nodiscard]] auto feasible() const noexcept -> bool { return phi == 0.0; }
    auto operator==(FrontPoint const&) const -> bool = default;
};

struct Front {
    std::vector<FrontPoint> points;

    [[nodiscard]] auto values() const -> std::vector<ObjPoint>
    {
        std::vector<ObjPoint> out;
        out.reserve(points.size());
        for (auto const& p : points) {
            out.push_back(p.values);
        }
        return out;
    }
};

struct NpsNfs {
    std::size_t nps{0};
    std::size_t nfs{0};
};

// Size of the non-dominated subset and how many of those are feasible.
inline auto count_nps_nfs(Front const& f) -> NpsNfs
{
    auto const vals = f.values();
    NpsNfs r;
    for (auto i : nondominated_indices(vals)) {
        ++r.nps;
        r.nfs += f.points[i].feasible() ? 1 : 0;
    }
    return r;
}

struct Bounds {
    ObjPoint lo{};
    ObjPoint hi{};
};

inline auto bounds_of(std::span<ObjPoint const> pts) -> Bounds
{
    if (pts.empty()) {
        throw std::invalid_argument("bounds_of: empty point set");
    }
    Bounds b{pts[0], pts[0]};
    for (auto const& p : pts) {
        for (std::size_t k = 0; k < 3; ++k) {
            b.lo[k] = std::min(b.lo[k], p[k]);
            b.hi[k] = std::max(b.hi[k], p[k]);
        }
    }
    return b;
}

// Maps lo -> 0 and hi -> 1 per objective; a degenerate range only translates.
inline auto normalize(ObjPoint const& p, Bounds const& b) noexcept -> ObjPoint
{
    ObjPoint out{};
    for (std::size_t k = 0; k < 3; ++k) {
        double const range = b.hi[k] - b.lo[k];
        out[k] = (p[k] - b.lo[k]) / (range > 0.0 ? range : 1.0);
    }
    return out;
}

inline auto normalize(std::span<ObjPoint const> pts, Bounds const& b) -> std::vector<ObjPoint>
{
    std::vector<ObjPoint> out;
    out.reserve(pts.size());
    for (auto const& p : pts) {
        out.push_back(normalize(p, b));
    }
    return out;
}

inline auto euclidean(ObjPoint const& a, ObjPoint const& b) noexcept -> double
{
    return std::sqrt((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]) + (a[2] - b[2]) * (a[2] - b[2]));
}

/// Inverted generational distance. Both sets are normalized by the reference
/// front's extremes; the result is the mean, over reference points, of the
/// distance to the nearest front point. An empty front scores +inf.
inline auto igd(std::span<ObjPoint const> front, std::span<ObjPoint const> reference) -> double
{
    if (reference.empty()) {
        throw std::invalid_argument("igd: reference front is empty");
    }
    if (front.empty()) {
        return std::numeric_limits<double>::infinity();
    }
    auto const b = bounds_of(reference);
    auto const f = normalize(front, b);
    double sum = 0.0;
    for (auto const& r : reference) {
        auto const rn = normalize(r, b);
        double best = std::numeric_limits<double>::infinity();
        for (auto const& p : f) {
            best = std::min(best, euclidean(rn, p));
        }
        sum += best;
    }
    return sum / static_cast<double>(reference.size());
}

namespace detail {

    // Area dominated by 2-D points w.r.t. (rx, ry); points must lie inside the reference box.
    inline auto hypervolume_2d(std::vector<std::array<double, 2>> pts, double rx, double ry) -> double
    {
        std::sort(pts.begin(), pts.end());
        double area = 0.0;
        double y_cur = ry;
        for (auto const& p : pts) {
            if (p[1] < y_cur) {
                area += (rx - p[0]) * (y_cur - p[1]);
                y_cur = p[1];
            }
        }
        return area;
    }

} // namespace detail

/// Exact 3-D hypervolume (minimization) by slicing along the third objective.
/// Coordinates beyond the reference point are clipped to it with a warning.
inline auto hypervolume(std::span<ObjPoint const> front, ObjPoint const& ref = {1.1, 1.1, 1.1}) -> double
{
    std::vector<ObjPoint> pts(front.begin(), front.end());
    bool clipped = false;
    for (auto& p : pts) {
        for (std::size_t k = 0; k < 3; ++k) {
            if (p[k] > ref[k]) {
                p[k] = ref[k];
                clipped = true;
            }
        }
    }
    if (clipped) {
        std::clog << "warning: hypervolume: point(s) beyond the reference point were clipped\n";
    }
    std::sort(pts.begin(), pts.end(), [](ObjPoint const& a, ObjPoint const& b) { return a[2] < b[2]; });
    double volume = 0.0;
    std::vector<std::array<double, 2>> slice;
    for (std::size_t i = 0; i < pts.size();) {
        double const z = pts[i][2];
        while (i < pts.size() && pts[i][2] == z) {
            slice.push_back({pts[i][0], pts[i][1]});
            ++i;
        }
        double const z_next = i < pts.size() ? pts[i][2] : ref[2];
        if (z_next > z) {
            volume += detail::hypervolume_2d(slice, ref[0], ref[1]) * (z_next - z);
        }
    }
    return volume;
}

/// Spacing: sample standard deviation of each point's Euclidean distance to its
/// nearest neighbor. Works on the coordinates given; normalize first if needed.
inline auto spacing(std::span<ObjPoint const> front) -> double
{
    if (front.size() < 2) {
        throw std::invalid_argument("spacing: at least two points required");
    }
    std::vector<double> nn(front.size(), std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < front.size(); ++i) {
        for (std::size_t j = 0; j < front.size(); ++j) {
            if (i != j) {
                nn[i] = std::min(nn[i], euclidean(front[i], front[j]));
            }
        }
    }
    double const mean = std::accumulate(nn.begin(), nn.end(), 0.0) / static_cast<double>(nn.size());
    double ss = 0.0;
    for (auto d : nn) {
        ss += (d - mean) * (d - mean);
    }
    return std::sqrt(ss / static_cast<double>(nn.size() - 1));
}

/// Union of the feasible points of all fronts, reduced to its non-dominated
/// subset. Points keep their source label; exact (point, label) repeats collapse.
inline auto merge_pareto(std::span<Front const> fronts) -> Front
{
    std::vector<FrontPoint> pool;
    for (auto const& f : fronts) {
        for (auto const& p : f.points) {
            if (p.feasible()) {
                pool.push_back(p);
            }
        }
    }
    std::vector<ObjPoint> vals;
    vals.reserve(pool.size());
    for (auto const& p : pool) {
        vals.push_back(p.values);
    }
    Front out;
    for (auto i : nondominated_indices(vals)) {
        auto const& p = pool[i];
        bool dup = std::any_of(out.points.begin(), out.points.end(),
            [&p](FrontPoint const& q) { return q.values == p.values && q.algorithm == p.algorithm && q.phi == p.phi; });
        if (!dup) {
            out.points.push_back(p);
        }
    }
    std::sort(out.points.begin(), out.points.end(), [](FrontPoint const& a, FrontPoint const& b) {
        return std::tie(a.values, a.algorithm, a.seed) < std::tie(b.values, b.algorithm, b.seed);
    });
    return out;
}

struct MetricsRow {
    std::string algorithm;
    std::size_t nps{0};
    std::size_t nfs{0};
    double igd{0.0};
    double hv{0.0};
    double s_metric{0.0};
};

/// One row per algorithm label, pooling that label's points over all fronts and
/// seeds. The reference front is merge_pareto of everything. IGD, HV and spacing
/// use the feasible non-dominated points, normalized by the reference extremes;
/// spacing is NaN below two points and IGD is NaN when nothing is feasible.
inline auto metrics_report(std::span<Front const> fronts) -> std::vector<MetricsRow>
{
    std::map<std::string, Front> by_algorithm;
    for (auto const& f : fronts) {
        for (auto const& p : f.points) {
            by_algorithm[p.algorithm].points.push_back(p);
        }
    }
    auto const reference = merge_pareto(fronts).values();
    std::vector<MetricsRow> rows;
    for (auto const& [name, front] : by_algorithm) {
        MetricsRow row{name};
        auto const vals = front.values();
        std::vector<ObjPoint> feasible;
        for (auto i : nondominated_indices(vals)) {
            ++row.nps;
            if (front.points[i].feasible()) {
                feasible.push_back(vals[i]);
            }
        }
        row.nfs = feasible.size();
        // Any feasible point here is also in the pooled union, so reference is non-empty.
        constexpr double nan = std::numeric_limits<double>::quiet_NaN();
        row.igd = nan;
        row.s_metric = nan;
        if (!feasible.empty()) {
            auto const norm = normalize(feasible, bounds_of(reference));
            row.igd = igd(feasible, reference);
            row.hv = hypervolume(norm);
            if (norm.size() >= 2) {
                row.s_metric = spacing(norm);
            }
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace rsu
