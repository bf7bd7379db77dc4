#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mot/coupling.hpp"
#include "mot/lp.hpp"
#include "mot/marginal.hpp"
#include "mot/payoff.hpp"

namespace mot::pricing {

enum class Functional { P, D, DN, PN };
std::string to_string(Functional f);

struct Options {
    double tol = 1e-9;    // membership / feasibility tolerances
    long max_iters = 0;   // simplex iteration cap, 0 = automatic
    int threads = 1;      // kernel threads inside a single solve
    int sweep_threads = 1;  // parallel dispatch across bound values
    long direct_dual_threshold = 2048;  // path count above which the
                                        // superhedge LP is solved by
                                        // constraint generation
};

/// Static option legs u_t on the axis grids plus dynamic positions delta_t on
/// the history grids (row-major over axes [0..t]). `bound` records the
/// position constraint; infinity means unconstrained.
struct SemiStaticStrategy {
    std::vector<std::vector<double>> u;
    std::vector<std::vector<double>> delta;
    double bound = lp::kInf;
};

/// Total cost of the static legs under the marginals.
double static_cost(const SemiStaticStrategy& s, std::span<const DiscreteMarginal> mus);

struct SlackReport {
    double min_slack = 0.0;
    std::vector<double> argmin_path;
    bool pass = false;
};

/// Minimum over all grid paths of wealth minus payoff; PASS at -1e-8.
SlackReport verify_superhedge(const SemiStaticStrategy& s, const PayoffSpec& phi,
                              const ProductGrid& grid, int threads = 1);

struct Residuals {
    double lp_primal = 0.0;
    double lp_dual = 0.0;
    double lp_complementarity = 0.0;
    double lp_duality_gap = 0.0;
    std::optional<double> marginal_deviation;   // coupling certificates
    std::optional<double> martingale_gain;      // best_gain(Q, 1)
    std::optional<double> penalized_recheck;    // |objective - (E[phi] - N A1)|
    std::optional<double> superhedge_min_slack; // strategy certificates
    std::optional<double> static_cost_recheck;  // |objective - mu(u)|
};

struct Diagnostics {
    long iterations = 0;
    int lp_rows = 0;
    long lp_cols = 0;
    int rounds = 0;       // constraint-generation rounds (0 = direct solve)
    bool boxed = false;   // a working-box coordinate was active at the end
    double wall_ms = 0.0;
};

struct PriceReport {
    Functional functional = Functional::P;
    lp::Status status = lp::Status::iteration_limit;
    double value = 0.0;
    std::optional<double> bound;
    std::optional<GridCoupling> coupling;
    std::optional<SemiStaticStrategy> strategy;
    Residuals residuals;
    Diagnostics diag;
};

/// sup E_Q[phi] over martingale couplings with the prescribed marginals.
/// Infeasible exactly when the marginals admit no martingale coupling.
PriceReport primal_price(std::span<const DiscreteMarginal> mus, const PayoffSpec& phi,
                         const Options& opts = {});

/// Cheapest pointwise superhedge with unconstrained dynamic positions.
/// Unbounded below exactly when no martingale coupling exists.
PriceReport dual_price(std::span<const DiscreteMarginal> mus, const PayoffSpec& phi,
                       const Options& opts = {});

/// Same superhedge LP with |delta| <= N. Always feasible and bounded.
PriceReport constrained_dual_price(std::span<const DiscreteMarginal> mus, const PayoffSpec& phi,
                                   double N, const Options& opts = {});

/// sup over couplings with the prescribed marginals of E_Q[phi] minus the
/// trading-gain penalty at bound N, as one LP with auxiliary drift-mass
/// variables. The optimizer's objective is recomputed independently through
/// the coupling module and must agree within 1e-8.
PriceReport penalized_primal_price(std::span<const DiscreteMarginal> mus, const PayoffSpec& phi,
                                   double N, const Options& opts = {});

/// Feasibility of the martingale-coupling polytope, decided by LP phase 1.
bool martingale_polytope_feasible(std::span<const DiscreteMarginal> mus,
                                  const Options& opts = {});

/// Certified bound above which the constrained superhedge price has
/// stabilized at the unconstrained one: payoff range over smallest grid gap.
double stabilization_threshold(std::span<const DiscreteMarginal> mus, const PayoffSpec& phi);

struct SweepRow {
    double N = 0.0;
    double DN = 0.0;
    double PN = 0.0;
    double gap = 0.0;  // DN - PN
};

struct SweepResult {
    std::vector<SweepRow> rows;
    double D = 0.0;
    double P = 0.0;
    double n_star = 0.0;
};

/// Paired constrained solves over strictly increasing bounds. Checks, and
/// throws std::runtime_error on violation: DN nonincreasing, DN >= D - 1e-7,
/// |DN - PN| <= 1e-6, and |DN - D| <= 1e-6 once N passes the stabilization
/// threshold.
SweepResult sweep_bounds(std::span<const DiscreteMarginal> mus, const PayoffSpec& phi,
                         const std::vector<double>& Ns, const Options& opts = {});

/// One element of a measure sequence: its unit trading gain and its payoff
/// expectation.
struct SequenceElement {
    double gain = 0.0;
    double payoff = 0.0;
};

struct SequenceReport {
    std::vector<double> gains;
    std::vector<double> payoffs;
    double limsup_estimate = 0.0;  // running maximum of tail suprema
    bool gains_converged = false;  // last gain at or below gain_tol
};

/// Evaluates a candidate sequence: no claim of attaining the supremum over
/// all sequences, only of scoring the one supplied.
SequenceReport tildeP_estimate(std::span<const SequenceElement> seq, double gain_tol = 1e-3);

/// Same, for grid couplings sharing one instance's marginals (checked at
/// pi_tol; mismatch throws).
SequenceReport tildeP_estimate(const PayoffSpec& phi, std::span<const GridCoupling> seq,
                               double gain_tol = 1e-3, double pi_tol = 1e-9, int threads = 1);

}  // namespace mot::pricing
