#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace bode {

// A design is a sorted multiset of grid indices, one per observation time.
using DesignLocation = std::vector<std::int32_t>;

// Regular grid of candidate observation times t_min, t_min+step, ..., t_max,
// searched for designs of k timepoints (repeats allowed).
struct TimeGrid {
    double t_min = 0.0;
    double t_max = 1.0;
    double step = 1.0;
    int k = 1;

    // Number of grid points; both endpoints are included.
    int points() const {
        return static_cast<int>(std::floor((t_max - t_min) / step + 1e-9)) + 1;
    }

    double time_at(std::int32_t index) const { return t_min + index * step; }

    void validate() const {
        if (!(step > 0.0)) throw std::domain_error("grid: step must be > 0");
        if (!(t_min < t_max)) throw std::domain_error("grid: t_min must be < t_max");
        if (points() < 2) throw std::domain_error("grid: fewer than 2 points");
        if (k < 1) throw std::domain_error("grid: k must be >= 1");
    }

    bool operator==(const TimeGrid&) const = default;
};

// Sort indices so permutation-equivalent designs collapse to one location.
inline DesignLocation canonicalize(DesignLocation indices, int grid_points) {
    for (auto i : indices) {
        if (i < 0 || i >= grid_points)
            throw std::domain_error("design index " + std::to_string(i) +
                                    " outside [0, " + std::to_string(grid_points - 1) + "]");
    }
    std::sort(indices.begin(), indices.end());
    return indices;
}

inline std::vector<double> location_to_design(const TimeGrid& grid, const DesignLocation& loc) {
    std::vector<double> times(loc.size());
    for (std::size_t i = 0; i < loc.size(); ++i) times[i] = grid.time_at(loc[i]);
    return times;
}

struct LocationHash {
    std::size_t operator()(const DesignLocation& loc) const {
        std::uint64_t h = 1469598103934665603ULL;
        for (auto i : loc) {
            h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(i));
            h *= 1099511628211ULL;
        }
        return static_cast<std::size_t>(h);
    }
};

}  // namespace bode
