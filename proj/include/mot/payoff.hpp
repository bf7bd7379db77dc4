#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mot/grid.hpp"

namespace mot {

enum class PayoffKind {
    indicator_offdiagonal,  // 1 when x_1 != x_2
    basket_call,            // (sum_t x_t - strike)^+
    lookback,               // max_t x_t - x_T
    forward_start,          // (x_T - x_1 - strike)^+
    table,                  // explicit dense values over a product grid
};

std::string to_string(PayoffKind k);
PayoffKind payoff_kind_from_string(const std::string& s);

/// A path payoff, either a builtin family or an explicit table bound to a
/// grid. An optional truncation level n zeroes the payoff on paths with any
/// coordinate above n. Immutable after construction.
struct PayoffSpec {
    PayoffKind kind = PayoffKind::basket_call;
    double strike = 0.0;                 // basket_call, forward_start
    std::vector<double> table;           // kind == table, row-major, x_1 slowest
    ProductGrid table_grid;              // kind == table
    std::optional<double> truncation;

    static PayoffSpec indicator_offdiagonal();
    static PayoffSpec basket_call(double strike);
    static PayoffSpec lookback();
    static PayoffSpec forward_start(double strike);
    static PayoffSpec from_table(ProductGrid grid, std::vector<double> values);

    /// Pointwise evaluation. Builtin families accept any nonnegative path;
    /// table payoffs require every coordinate to sit exactly on their grid.
    /// The off-diagonal indicator compares raw coordinates here; grid-bound
    /// evaluation (payoff_table) compares grid indices instead.
    double evaluate(std::span<const double> path) const;
};

/// Dense payoff values over `grid`, row-major with x_1 slowest. For the
/// off-diagonal indicator on a shared first/second axis the diagonal is
/// decided by index equality, so coinciding grid coordinates never produce
/// spurious diagonal hits.
std::vector<double> payoff_table(const PayoffSpec& phi, const ProductGrid& grid, int threads = 1);

/// Minimal constant K with |phi(x)| <= K (1 + sum_t x_t) over the grid,
/// together with the path attaining it.
struct GrowthBound {
    double K = 0.0;
    std::vector<double> argmax_path;
};

GrowthBound growth_constant(const PayoffSpec& phi, const ProductGrid& grid, int threads = 1);

/// Returns phi restricted to { max_t x_t <= n }, zero elsewhere. Truncations
/// compose: the effective level is the minimum of the existing and new one.
PayoffSpec truncate(const PayoffSpec& phi, double n);

}  // namespace mot
