#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "random.hpp"
#include "scenario.hpp"

namespace rsu {

/// Binary genome over the K grid cells; bit k set means an RSU occupies cell k.
class Deployment {
public:
    Deployment() = default;
    explicit Deployment(int num_cells)
        : bits_(static_cast<std::size_t>(num_cells), 0)
    {
    }

    static auto from_cells(int num_cells, std::span<CellIndex const> cells) -> Deployment
    {
        Deployment d(num_cells);
        for (auto c : cells) {
            d.set(c, true);
        }
        return d;
    }

    [[nodiscard]] auto size() const noexcept -> int { return static_cast<int>(bits_.size()); }

    [[nodiscard]] auto test(CellIndex idx) const -> bool { return bits_.at(checked(idx)) != 0; }

    void set(CellIndex idx, bool on) { bits_.at(checked(idx)) = on ? 1 : 0; }

    void flip(CellIndex idx) { bits_.at(checked(idx)) ^= 1U; }

    [[nodiscard]] auto count() const noexcept -> int
    {
        int n = 0;
        for (auto b : bits_) {
            n += b;
        }
        return n;
    }

    // Deployed cells in ascending order.
    [[nodiscard]] auto cells() const -> std::vector<CellIndex>
    {
        std::vector<CellIndex> out;
        for (std::size_t i = 0; i < bits_.size(); ++i) {
            if (bits_[i] != 0) {
                out.push_back(static_cast<CellIndex>(i));
            }
        }
        return out;
    }

    [[nodiscard]] auto bits() const noexcept -> std::vector<std::uint8_t> const& { return bits_; }

    [[nodiscard]] auto hamming(Deployment const& other) const -> int
    {
        if (other.size() != size()) {
            throw std::invalid_argument("hamming: genome lengths differ");
        }
        int n = 0;
        for (std::size_t i = 0; i < bits_.size(); ++i) {
            n += bits_[i] != other.bits_[i] ? 1 : 0;
        }
        return n;
    }

    // Content hash; stable across runs and platforms.
    [[nodiscard]] auto fingerprint() const noexcept -> std::uint64_t
    {
        std::uint64_t h = mix64(bits_.size());
        for (std::size_t i = 0; i < bits_.size(); ++i) {
            if (bits_[i] != 0) {
                h = mix64(h ^ i);
            }
        }
        return h;
    }

    auto operator==(Deployment const&) const -> bool = default;
    auto operator<=>(Deployment const&) const = default;

private:
    [[nodiscard]] auto checked(CellIndex idx) const -> std::size_t
    {
        if (idx < 0 || idx >= size()) {
            throw std::out_of_range("deployment cell index " + std::to_string(idx) + " out of range");
        }
        return static_cast<std::size_t>(idx);
    }

    std::vector<std::uint8_t> bits_;
};

} // namespace rsu
