#include "mot/payoff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mot {

std::string to_string(PayoffKind k) {
    switch (k) {
        case PayoffKind::indicator_offdiagonal: return "indicator_offdiagonal";
        case PayoffKind::basket_call: return "basket_call";
        case PayoffKind::lookback: return "lookback";
        case PayoffKind::forward_start: return "forward_start";
        case PayoffKind::table: return "table";
    }
    return "unknown";
}

PayoffKind payoff_kind_from_string(const std::string& s) {
    if (s == "indicator_offdiagonal") return PayoffKind::indicator_offdiagonal;
    if (s == "basket_call") return PayoffKind::basket_call;
    if (s == "lookback") return PayoffKind::lookback;
    if (s == "forward_start") return PayoffKind::forward_start;
    if (s == "table") return PayoffKind::table;
    throw std::invalid_argument("unknown payoff kind '" + s + "'");
}

PayoffSpec PayoffSpec::indicator_offdiagonal() {
    PayoffSpec p;
    p.kind = PayoffKind::indicator_offdiagonal;
    return p;
}

PayoffSpec PayoffSpec::basket_call(double strike) {
    PayoffSpec p;
    p.kind = PayoffKind::basket_call;
    p.strike = strike;
    return p;
}

PayoffSpec PayoffSpec::lookback() {
    PayoffSpec p;
    p.kind = PayoffKind::lookback;
    return p;
}

PayoffSpec PayoffSpec::forward_start(double strike) {
    PayoffSpec p;
    p.kind = PayoffKind::forward_start;
    p.strike = strike;
    return p;
}

PayoffSpec PayoffSpec::from_table(ProductGrid grid, std::vector<double> values) {
    check_grid_size(grid);
    if (static_cast<long>(values.size()) != grid.cells())
        throw std::invalid_argument("table payoff: value count does not match grid");
    for (double v : values)
        if (!std::isfinite(v)) throw std::invalid_argument("table payoff: non-finite value");
    PayoffSpec p;
    p.kind = PayoffKind::table;
    p.table = std::move(values);
    p.table_grid = std::move(grid);
    return p;
}

namespace {

double eval_builtin(const PayoffSpec& phi, std::span<const double> x) {
    switch (phi.kind) {
        case PayoffKind::indicator_offdiagonal:
            return x[0] != x[1] ? 1.0 : 0.0;
        case PayoffKind::basket_call: {
            double s = 0.0;
            for (double v : x) s += v;
            return std::max(s - phi.strike, 0.0);
        }
        case PayoffKind::lookback: {
            double mx = x[0];
            for (double v : x) mx = std::max(mx, v);
            return mx - x.back();
        }
        case PayoffKind::forward_start:
            return std::max(x.back() - x.front() - phi.strike, 0.0);
        default:
            throw std::logic_error("eval_builtin: not a builtin payoff");
    }
}

long exact_index(const std::vector<double>& axis, double v, const char* what) {
    auto it = std::lower_bound(axis.begin(), axis.end(), v);
    if (it == axis.end() || *it != v)
        throw std::invalid_argument(std::string(what) + ": path coordinate off the payoff grid");
    return it - axis.begin();
}

bool truncated_away(const PayoffSpec& phi, std::span<const double> x) {
    if (!phi.truncation) return false;
    for (double v : x)
        if (v > *phi.truncation) return true;
    return false;
}

}  // namespace

double PayoffSpec::evaluate(std::span<const double> path) const {
    if (static_cast<int>(path.size()) < 2)
        throw std::invalid_argument("evaluate: path needs at least two coordinates");
    if (kind != PayoffKind::table)
        return truncated_away(*this, path) ? 0.0 : eval_builtin(*this, path);
    if (static_cast<int>(path.size()) != table_grid.times())
        throw std::invalid_argument("evaluate: path length does not match table grid");
    long cell = 0;
    for (int t = 0; t < table_grid.times(); ++t) {
        cell = cell * static_cast<long>(table_grid.axes[t].size()) +
               exact_index(table_grid.axes[t], path[t], "evaluate");
    }
    return truncated_away(*this, path) ? 0.0 : table[cell];
}

std::vector<double> payoff_table(const PayoffSpec& phi, const ProductGrid& grid, int threads) {
    check_grid_size(grid);
    const long cells = grid.cells();
    const int T = grid.times();
    if (T < 2) throw std::invalid_argument("payoff_table: need at least two periods");
    std::vector<double> out(cells);

    if (phi.kind == PayoffKind::table && !(phi.table_grid == grid))
        throw std::invalid_argument("payoff_table: table payoff bound to a different grid");

    // Index-based diagonal test when the first two axes are the same grid.
    const bool index_diag = phi.kind == PayoffKind::indicator_offdiagonal &&
                            grid.axes[0] == grid.axes[1];
    const long n1 = static_cast<long>(grid.axes[1].size());
    const long tail = grid.suffix_stride(1);

#pragma omp parallel for schedule(static) num_threads(threads > 1 ? threads : 1) if (threads > 1)
    for (long cell = 0; cell < cells; ++cell) {
        std::vector<int> idx(T);
        grid.decode(cell, idx);
        std::vector<double> x(T);
        for (int t = 0; t < T; ++t) x[t] = grid.axes[t][idx[t]];
        double v;
        if (phi.kind == PayoffKind::table) {
            v = truncated_away(phi, x) ? 0.0 : phi.table[cell];
        } else if (index_diag) {
            long j0 = cell / (n1 * tail);
            long j1 = (cell / tail) % n1;
            v = truncated_away(phi, x) ? 0.0 : (j0 != j1 ? 1.0 : 0.0);
        } else {
            v = truncated_away(phi, x) ? 0.0 : eval_builtin(phi, x);
        }
        out[cell] = v;
    }
    return out;
}

GrowthBound growth_constant(const PayoffSpec& phi, const ProductGrid& grid, int threads) {
    std::vector<double> table = payoff_table(phi, grid, threads);
    const long cells = grid.cells();
    const int T = grid.times();
    double best = -1.0;
    long best_cell = 0;
    // Deterministic argmax: negate ratios and reuse the min scan.
    std::vector<double> neg(cells);
#pragma omp parallel for schedule(static) num_threads(threads > 1 ? threads : 1) if (threads > 1)
    for (long cell = 0; cell < cells; ++cell) {
        std::vector<double> x = grid.path(cell);
        double denom = 1.0;
        for (int t = 0; t < T; ++t) denom += x[t];
        neg[cell] = -std::abs(table[cell]) / denom;
    }
    for (long cell = 0; cell < cells; ++cell) {
        if (-neg[cell] > best) {
            best = -neg[cell];
            best_cell = cell;
        }
    }
    GrowthBound gb;
    gb.K = best;
    gb.argmax_path = grid.path(best_cell);
    return gb;
}

PayoffSpec truncate(const PayoffSpec& phi, double n) {
    if (!(n > 0.0)) throw std::invalid_argument("truncate: level must be positive");
    PayoffSpec out = phi;
    out.truncation = phi.truncation ? std::min(*phi.truncation, n) : n;
    return out;
}

}  // namespace mot
