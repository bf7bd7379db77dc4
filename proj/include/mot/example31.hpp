#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "mot/coupling.hpp"
#include "mot/pricing.hpp"
#include "mot/rng.hpp"

namespace mot::example31 {

// Two-period study on [0,1]^2 with both marginals uniform: the diagonal block
// couplings Q_M (density M on the M squares along the diagonal) have both
// marginals uniform, unit off-diagonal payoff expectation, and unit trading
// gain 1/(4M), so they approach the martingale class while their payoff
// expectations stay at 1. On finite grids the corresponding block couplings
// certify lower bounds for the penalized value.

/// Unit trading gain of Q_M in closed form: 1/(4M).
double a1_closed_form(int M);

/// The same quantity by exact per-block integration of |E[S_2|S_1=x] - x|
/// (piecewise-linear antiderivatives, no generic quadrature). Agrees with the
/// closed form to 1e-12.
double a1_numeric(int M);

/// E_{Q_M}[1_{x_1 != x_2}] = 1: the diagonal is a null set of the block
/// density. Returned as the exact constant.
double payoff_expectation_offdiag(int M);

/// One draw (x_1, x_2) from Q_M: uniform block, then uniform inside it.
std::pair<double, double> sample_block(int M, SplitMix64& rng);

/// Checks the static unit-cash hedge (u_1, u_2, delta_1) = (1, 0, 0) against
/// the off-diagonal indicator: pointwise wealth 1 >= payoff on sampled pairs
/// of [0,1]^2 and on midpoint grids, with static cost exactly 1.
struct OptimizerCheck {
    double min_slack = 0.0;
    double cost = 0.0;
    long samples = 0;
    bool pass = false;
};
OptimizerCheck verify_unit_cash_superhedge(long samples = 1000000,
                                           uint64_t seed = 0x7a11ba5eULL,
                                           std::span<const int> grid_ns = {});

/// T = 2 instance with both marginals uniform on the n midpoints (2j-1)/(2n).
std::vector<DiscreteMarginal> uniform_midpoint_marginals(int n);

/// Q_M discretized on the n-point midpoint grid (M must divide n): uniform
/// mass on within-block index pairs. Marginals are exactly uniform.
GridCoupling discretize_block(int M, int n);

/// Sequence elements (gain, payoff expectation) for the continuum Q_M family.
std::vector<pricing::SequenceElement> continuum_sequence(std::span<const int> Ms);

/// Grid refinement experiment on the off-diagonal indicator instance: P and D
/// (both 0 on every finite grid), the constrained pair per bound N, and a
/// block-coupling lower-bound certificate max over M | n of
/// E[phi] - N * best_gain, evaluated through the coupling module.
struct GapRow {
    int n = 0;
    double N = 0.0;
    double P = 0.0;
    double D = 0.0;
    double DN = 0.0;
    double PN = 0.0;
    double lower_bound = 0.0;
};
std::vector<GapRow> gap_experiment(int n, const std::vector<double>& Ns,
                                   const pricing::Options& opts = {});

}  // namespace mot::example31
