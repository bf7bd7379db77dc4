#pragma once

#include <span>
#include <stdexcept>
#include <vector>

namespace mot {

// Product grid over the path space: one strictly increasing coordinate axis
// per time step. Cells are enumerated row-major with the first coordinate
// slowest, matching the layout of coupling tensors and payoff tables.
struct ProductGrid {
    std::vector<std::vector<double>> axes;

    int times() const { return static_cast<int>(axes.size()); }

    long cells() const {
        long n = 1;
        for (const auto& a : axes) n *= static_cast<long>(a.size());
        return n;
    }

    // Number of histories (x_1,...,x_{t+1}), i.e. the product of the first
    // t+1 axis sizes (t is a 0-based axis index).
    long prefixes(int t) const {
        long n = 1;
        for (int s = 0; s <= t; ++s) n *= static_cast<long>(axes[s].size());
        return n;
    }

    // Product of axis sizes strictly after t.
    long suffix_stride(int t) const {
        long n = 1;
        for (int s = t + 1; s < times(); ++s) n *= static_cast<long>(axes[s].size());
        return n;
    }

    void decode(long cell, std::span<int> out) const {
        for (int t = times() - 1; t >= 0; --t) {
            long n = static_cast<long>(axes[t].size());
            out[t] = static_cast<int>(cell % n);
            cell /= n;
        }
    }

    std::vector<double> path(long cell) const {
        std::vector<int> idx(times());
        decode(cell, idx);
        std::vector<double> x(times());
        for (int t = 0; t < times(); ++t) x[t] = axes[t][idx[t]];
        return x;
    }

    // Smallest positive gap between consecutive points on any axis. Axes with
    // a single point contribute nothing; a grid with no gaps at all returns 0.
    double min_spacing() const {
        double gap = 0.0;
        bool found = false;
        for (const auto& a : axes) {
            for (size_t j = 1; j < a.size(); ++j) {
                double d = a[j] - a[j - 1];
                if (d > 0 && (!found || d < gap)) {
                    gap = d;
                    found = true;
                }
            }
        }
        return found ? gap : 0.0;
    }

    bool operator==(const ProductGrid&) const = default;
};

// Dense tensors over the product grid are kept below this many cells.
inline constexpr long kMaxGridCells = 1000000;

inline void check_grid_size(const ProductGrid& grid) {
    if (grid.cells() > kMaxGridCells)
        throw std::invalid_argument("product grid exceeds the dense tensor ceiling of 1e6 cells");
}

}  // namespace mot
