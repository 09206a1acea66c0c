#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <rsu/scenario.hpp>

namespace rsu::test {

// Empty w x h map with 20 m cells, one period unless stated otherwise.
inline auto blank_data(int w, int h, int periods = 1) -> ScenarioData
{
    ScenarioData d;
    d.width_cells = w;
    d.height_cells = h;
    d.cell_size_m = 20.0;
    d.num_periods = periods;
    return d;
}

inline void add_vehicle(ScenarioData& d, std::vector<CellIndex> positions)
{
    d.traces.push_back({"v" + std::to_string(d.traces.size()), std::move(positions)});
}

inline auto cell(int w, int row, int col) -> CellIndex { return row * w + col; }

} // namespace rsu::test
