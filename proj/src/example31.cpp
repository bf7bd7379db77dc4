#include "mot/example31.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "mot/kernels.hpp"

namespace mot::example31 {

namespace {

void require_M(int M) {
    if (M < 1) throw std::invalid_argument("block measure: M must be at least 1");
}

}  // namespace

double a1_closed_form(int M) {
    require_M(M);
    return 0.25 / static_cast<double>(M);
}

double a1_numeric(int M) {
    require_M(M);
    // Block [a, b] has conditional mean at its midpoint c; the first marginal
    // is Lebesgue, so each block contributes the exact piecewise-linear
    // integral ((c - a)^2 + (b - c)^2) / 2.
    double total = 0.0;
    for (int i = 0; i < M; ++i) {
        double a = static_cast<double>(i) / M;
        double b = static_cast<double>(i + 1) / M;
        double c = (2.0 * i + 1.0) / (2.0 * M);
        total += ((c - a) * (c - a) + (b - c) * (b - c)) / 2.0;
    }
    return total;
}

double payoff_expectation_offdiag(int M) {
    require_M(M);
    return 1.0;
}

std::pair<double, double> sample_block(int M, SplitMix64& rng) {
    require_M(M);
    int block = static_cast<int>(rng.next() % static_cast<uint64_t>(M));
    double lo = static_cast<double>(block) / M;
    double w = 1.0 / M;
    return {lo + w * rng.uniform(), lo + w * rng.uniform()};
}

OptimizerCheck verify_unit_cash_superhedge(long samples, uint64_t seed,
                                           std::span<const int> grid_ns) {
    OptimizerCheck check;
    check.samples = samples;
    check.cost = 1.0;  // integral of u_1 = 1 against a probability measure
    double min_slack = 1.0;

    SplitMix64 rng(seed);
    for (long i = 0; i < samples; ++i) {
        double x1 = rng.uniform();
        double x2 = rng.uniform();
        double phi = x1 != x2 ? 1.0 : 0.0;
        double slack = 1.0 - phi;  // wealth is identically 1
        min_slack = std::min(min_slack, slack);
    }

    static const int default_ns[] = {10, 20, 50};
    std::span<const int> ns = grid_ns.empty() ? std::span<const int>(default_ns) : grid_ns;
    for (int n : ns) {
        auto mus = uniform_midpoint_marginals(n);
        ProductGrid grid = grid_from(mus);
        pricing::SemiStaticStrategy strat;
        strat.u = {std::vector<double>(n, 1.0), std::vector<double>(n, 0.0)};
        strat.delta = {std::vector<double>(n, 0.0)};
        auto rep = pricing::verify_superhedge(strat, PayoffSpec::indicator_offdiagonal(), grid);
        min_slack = std::min(min_slack, rep.min_slack);
        double cost = pricing::static_cost(strat, mus);
        if (std::abs(cost - 1.0) > 1e-12)
            throw std::logic_error("unit cash hedge cost drifted from 1");
    }

    check.min_slack = min_slack;
    check.pass = min_slack >= 0.0;
    return check;
}

std::vector<DiscreteMarginal> uniform_midpoint_marginals(int n) {
    if (n < 1) throw std::invalid_argument("uniform_midpoint_marginals: n must be at least 1");
    std::vector<double> support(n), weights(n, 1.0 / n);
    for (int j = 0; j < n; ++j) support[j] = (2.0 * j + 1.0) / (2.0 * n);
    DiscreteMarginal mu(support, weights);
    return {mu, mu};
}

GridCoupling discretize_block(int M, int n) {
    require_M(M);
    if (n < 1 || n % M != 0)
        throw std::invalid_argument("discretize_block: M=" + std::to_string(M) +
                                    " does not divide n=" + std::to_string(n));
    auto mus = uniform_midpoint_marginals(n);
    ProductGrid grid = grid_from(mus);
    const int k = n / M;  // grid points per block
    const double cell_mass = static_cast<double>(M) / (static_cast<double>(n) * n);
    std::vector<double> mass(static_cast<size_t>(n) * n, 0.0);
    for (int b = 0; b < M; ++b)
        for (int i = b * k; i < (b + 1) * k; ++i)
            for (int j = b * k; j < (b + 1) * k; ++j)
                mass[static_cast<size_t>(i) * n + j] = cell_mass;
    return GridCoupling(std::move(grid), std::move(mass), 1e-12);
}

std::vector<pricing::SequenceElement> continuum_sequence(std::span<const int> Ms) {
    std::vector<pricing::SequenceElement> seq;
    seq.reserve(Ms.size());
    for (int M : Ms) seq.push_back({a1_closed_form(M), payoff_expectation_offdiag(M)});
    return seq;
}

std::vector<GapRow> gap_experiment(int n, const std::vector<double>& Ns,
                                   const pricing::Options& opts) {
    if (n < 2) throw std::invalid_argument("gap_experiment: n must be at least 2");
    if (Ns.empty()) throw std::invalid_argument("gap_experiment: empty bound list");
    for (size_t i = 0; i < Ns.size(); ++i) {
        if (!(Ns[i] > 0))
            throw std::invalid_argument("gap_experiment: bounds must be positive");
        if (i > 0 && !(Ns[i] > Ns[i - 1]))
            throw std::invalid_argument("gap_experiment: bounds must be strictly increasing");
    }

    auto mus = uniform_midpoint_marginals(n);
    PayoffSpec phi = PayoffSpec::indicator_offdiagonal();
    ProductGrid grid = grid_from(mus);
    std::vector<double> table = payoff_table(phi, grid, opts.threads);

    auto p = pricing::primal_price(mus, phi, opts);
    auto d = pricing::dual_price(mus, phi, opts);
    if (p.status != lp::Status::optimal || d.status != lp::Status::optimal)
        throw std::runtime_error("gap_experiment: base solves did not reach optimality");

    // Lower-bound certificates: every block coupling that fits the grid is a
    // feasible point of the penalized problem; its objective is evaluated
    // through the coupling module, never assumed equal to the continuum value.
    std::vector<int> divisors;
    for (int M = 1; M <= n; ++M)
        if (n % M == 0) divisors.push_back(M);
    std::vector<double> block_gain, block_payoff;
    for (int M : divisors) {
        GridCoupling q = discretize_block(M, n);
        block_gain.push_back(best_gain(q, 1.0, opts.threads));
        block_payoff.push_back(
            kernels::dot(table.data(), q.mass().data(), grid.cells(), opts.threads));
    }

    double n_star = pricing::stabilization_threshold(mus, phi);
    std::vector<GapRow> rows;
    double prev_dn = std::numeric_limits<double>::infinity();
    for (double N : Ns) {
        auto dn = pricing::constrained_dual_price(mus, phi, N, opts);
        auto pn = pricing::penalized_primal_price(mus, phi, N, opts);
        if (dn.status != lp::Status::optimal || pn.status != lp::Status::optimal)
            throw std::runtime_error("gap_experiment: constrained solve failed");
        double lower = -std::numeric_limits<double>::infinity();
        for (size_t i = 0; i < divisors.size(); ++i)
            lower = std::max(lower, block_payoff[i] - N * block_gain[i]);

        if (std::abs(dn.value - pn.value) > 1e-6)
            throw std::runtime_error("gap_experiment: constrained duality gap at N=" +
                                     std::to_string(N));
        if (pn.value < lower - 1e-8)
            throw std::runtime_error("gap_experiment: certificate exceeds the solved value");
        if (dn.value > prev_dn + 1e-9)
            throw std::runtime_error("gap_experiment: DN increased in N");
        prev_dn = dn.value;

        rows.push_back({n, N, p.value, d.value, dn.value, pn.value, lower});
    }
    if (Ns.back() >= n_star && std::abs(rows.back().DN - d.value) > 1e-6)
        throw std::runtime_error("gap_experiment: DN did not collapse to D beyond the threshold");
    return rows;
}

}  // namespace mot::example31
