#include "mot/pricing.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <stdexcept>
#include <thread>

#include "mot/kernels.hpp"
#include "mot/rng.hpp"

namespace mot::pricing {

std::string to_string(Functional f) {
    switch (f) {
        case Functional::P: return "P";
        case Functional::D: return "D";
        case Functional::DN: return "DN";
        case Functional::PN: return "PN";
    }
    return "unknown";
}

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// Column layout of the superhedge LP: static legs per time, then dynamic
// positions per history grid (row-major over axes [0..t]).
struct DualLayout {
    int T = 0;
    long n_struct = 0;
    std::vector<long> u_off;    // T entries
    std::vector<long> d_off;    // T-1 entries
    std::vector<long> nsize;    // axis sizes
    std::vector<long> sstride;  // suffix strides per axis
    std::vector<long> hsize;    // history counts per t < T-1

    explicit DualLayout(const ProductGrid& g) {
        T = g.times();
        long off = 0;
        for (int t = 0; t < T; ++t) {
            u_off.push_back(off);
            nsize.push_back(static_cast<long>(g.axes[t].size()));
            sstride.push_back(g.suffix_stride(t));
            off += nsize.back();
        }
        for (int t = 0; t + 1 < T; ++t) {
            d_off.push_back(off);
            hsize.push_back(g.prefixes(t));
            off += hsize.back();
        }
        n_struct = off;
    }
};

// Wealth minus payoff on every grid path.
std::vector<double> slack_sweep(const SemiStaticStrategy& s, const std::vector<double>& table,
                                const ProductGrid& grid, const DualLayout& lay, int threads) {
    const long cells = grid.cells();
    const int T = lay.T;
    std::vector<double> slack(cells);
#pragma omp parallel for schedule(static) num_threads(threads > 1 ? threads : 1) if (threads > 1)
    for (long cell = 0; cell < cells; ++cell) {
        double wealth = 0.0;
        double x_prev = 0.0;
        long pref_prev = 0;
        for (int t = 0; t < T; ++t) {
            long pref = cell / lay.sstride[t];
            long j = pref % lay.nsize[t];
            double x = grid.axes[t][j];
            wealth += s.u[t][j];
            if (t > 0) wealth += s.delta[t - 1][pref_prev] * (x - x_prev);
            pref_prev = pref;
            x_prev = x;
        }
        slack[cell] = wealth - table[cell];
    }
    return slack;
}

enum class CouplingLpMode { martingale, penalized, feasibility };

// LP over coupling tensors q >= 0 with marginal equality rows; martingale
// mode adds the per-history drift equalities, penalized mode adds drift-mass
// variables w_{t,h} >= |conditional drift mass| with cost -N.
lp::LinearProgram build_coupling_lp(std::span<const DiscreteMarginal> mus,
                                    const std::vector<double>& table, const ProductGrid& grid,
                                    CouplingLpMode mode, double N) {
    const int T = grid.times();
    const long cells = grid.cells();
    DualLayout lay(grid);

    long nmarg = 0;
    for (int t = 0; t < T; ++t) nmarg += lay.nsize[t];
    long nhist = 0;
    std::vector<long> hist_off(T - 1, 0);
    for (int t = 0; t + 1 < T; ++t) {
        hist_off[t] = nhist;
        nhist += lay.hsize[t];
    }

    long rows = nmarg;
    long cols = cells;
    if (mode == CouplingLpMode::martingale || mode == CouplingLpMode::feasibility)
        rows += nhist;
    else if (mode == CouplingLpMode::penalized) {
        rows += 2 * nhist;
        cols += nhist;
    }

    auto lp = lp::LinearProgram::make(lp::Sense::maximize, static_cast<int>(rows),
                                      static_cast<int>(cols));

    // Objective and variable bounds.
    if (mode != CouplingLpMode::feasibility)
        for (long cell = 0; cell < cells; ++cell) lp.c[cell] = table[cell];
    if (mode == CouplingLpMode::penalized)
        for (long h = 0; h < nhist; ++h) lp.c[cells + h] = -N;
    // q and w both live in [0, inf), the defaults from make().

    // Marginal equality rows.
    std::vector<long> mrow_off(T, 0);
    {
        long off = 0;
        for (int t = 0; t < T; ++t) {
            mrow_off[t] = off;
            off += lay.nsize[t];
            for (long j = 0; j < lay.nsize[t]; ++j)
                lp.b[mrow_off[t] + j] = mus[t].weights()[j];
        }
    }
    for (long r = 0; r < nmarg; ++r) lp.kind[r] = lp::RowKind::eq;

    for (long cell = 0; cell < cells; ++cell) {
        double x_prev = 0.0;
        long pref_prev = 0;
        for (int t = 0; t < T; ++t) {
            long pref = cell / lay.sstride[t];
            long j = pref % lay.nsize[t];
            double x = grid.axes[t][j];
            lp.at(static_cast<int>(mrow_off[t] + j), static_cast<int>(cell)) = 1.0;
            if (t > 0) {
                double coef = x - x_prev;
                if (mode == CouplingLpMode::penalized) {
                    long pair = nmarg + 2 * (hist_off[t - 1] + pref_prev);
                    lp.at(static_cast<int>(pair), static_cast<int>(cell)) = coef;
                    lp.at(static_cast<int>(pair + 1), static_cast<int>(cell)) = -coef;
                } else {
                    long r = nmarg + hist_off[t - 1] + pref_prev;
                    lp.at(static_cast<int>(r), static_cast<int>(cell)) = coef;
                }
            }
            pref_prev = pref;
            x_prev = x;
        }
    }

    if (mode == CouplingLpMode::penalized) {
        for (int t = 0; t + 1 < T; ++t) {
            for (long p = 0; p < lay.hsize[t]; ++p) {
                long pair = nmarg + 2 * (hist_off[t] + p);
                long wcol = cells + hist_off[t] + p;
                lp.at(static_cast<int>(pair), static_cast<int>(wcol)) = -1.0;
                lp.at(static_cast<int>(pair + 1), static_cast<int>(wcol)) = -1.0;
                lp.kind[pair] = lp::RowKind::le;
                lp.kind[pair + 1] = lp::RowKind::le;
            }
        }
    } else {
        for (long r = nmarg; r < rows; ++r) lp.kind[r] = lp::RowKind::eq;
    }
    return lp;
}

// Superhedge LP restricted to a set of path rows.
struct DualBoxes {
    double u_box = lp::kInf;      // artificial working box on static legs
    double delta_box = lp::kInf;  // artificial box when N is infinite
    bool gauge_pin = false;       // pin u_t(0) = 0 for t >= 1
};

lp::LinearProgram build_dual_lp(std::span<const DiscreteMarginal> mus,
                                const std::vector<double>& table, const ProductGrid& grid,
                                const DualLayout& lay, std::span<const long> rows_cells, double N,
                                const DualBoxes& boxes) {
    const int T = lay.T;
    auto lp = lp::LinearProgram::make(lp::Sense::minimize,
                                      static_cast<int>(rows_cells.size()),
                                      static_cast<int>(lay.n_struct));
    for (int t = 0; t < T; ++t)
        for (long j = 0; j < lay.nsize[t]; ++j)
            lp.c[lay.u_off[t] + j] = mus[t].weights()[j];

    for (long col = 0; col < lay.n_struct; ++col) {
        lp.lo[col] = -lp::kInf;
        lp.hi[col] = lp::kInf;
    }
    if (std::isfinite(boxes.u_box)) {
        for (int t = 0; t < T; ++t)
            for (long j = 0; j < lay.nsize[t]; ++j) {
                lp.lo[lay.u_off[t] + j] = -boxes.u_box;
                lp.hi[lay.u_off[t] + j] = boxes.u_box;
            }
    }
    double dbound = std::isfinite(N) ? N : boxes.delta_box;
    if (std::isfinite(dbound)) {
        for (int t = 0; t + 1 < T; ++t)
            for (long p = 0; p < lay.hsize[t]; ++p) {
                lp.lo[lay.d_off[t] + p] = -dbound;
                lp.hi[lay.d_off[t] + p] = dbound;
            }
    }
    if (boxes.gauge_pin) {
        for (int t = 1; t < T; ++t) {
            lp.lo[lay.u_off[t]] = 0.0;
            lp.hi[lay.u_off[t]] = 0.0;
        }
    }

    for (size_t r = 0; r < rows_cells.size(); ++r) {
        long cell = rows_cells[r];
        lp.kind[r] = lp::RowKind::ge;
        lp.b[r] = table[cell];
        double x_prev = 0.0;
        long pref_prev = 0;
        for (int t = 0; t < T; ++t) {
            long pref = cell / lay.sstride[t];
            long j = pref % lay.nsize[t];
            double x = grid.axes[t][j];
            lp.at(static_cast<int>(r), static_cast<int>(lay.u_off[t] + j)) += 1.0;
            if (t > 0)
                lp.at(static_cast<int>(r), static_cast<int>(lay.d_off[t - 1] + pref_prev)) +=
                    x - x_prev;
            pref_prev = pref;
            x_prev = x;
        }
    }
    return lp;
}

SemiStaticStrategy decode_strategy(const lp::Solution& sol, const DualLayout& lay, double N) {
    SemiStaticStrategy s;
    s.bound = N;
    s.u.resize(lay.T);
    for (int t = 0; t < lay.T; ++t) {
        s.u[t].resize(lay.nsize[t]);
        for (long j = 0; j < lay.nsize[t]; ++j) s.u[t][j] = sol.x[lay.u_off[t] + j];
    }
    s.delta.resize(lay.T - 1);
    for (int t = 0; t + 1 < lay.T; ++t) {
        s.delta[t].resize(lay.hsize[t]);
        for (long p = 0; p < lay.hsize[t]; ++p) s.delta[t][p] = sol.x[lay.d_off[t] + p];
    }
    return s;
}

void attach_lp_residuals(Residuals& res, const lp::LinearProgram& lp, const lp::Solution& sol) {
    auto cert = lp::check_certificate(lp, sol);
    res.lp_primal = cert.primal_residual;
    res.lp_dual = cert.dual_residual;
    res.lp_complementarity = cert.complementarity;
    res.lp_duality_gap = cert.duality_gap;
}

lp::Options lp_options(const Options& opts) {
    lp::Options o;
    o.feas_tol = std::min(opts.tol, 1e-9);
    o.max_iters = opts.max_iters;
    o.threads = opts.threads;
    return o;
}

void validate_instance(std::span<const DiscreteMarginal> mus) {
    if (mus.size() < 2) throw std::invalid_argument("pricing: need at least two marginals");
}

PriceReport coupling_price(std::span<const DiscreteMarginal> mus, const PayoffSpec& phi,
                           const Options& opts, Functional f, double N) {
    validate_instance(mus);
    auto t0 = Clock::now();
    ProductGrid grid = grid_from(mus);
    check_grid_size(grid);
    std::vector<double> table = payoff_table(phi, grid, opts.threads);
    CouplingLpMode mode =
        f == Functional::P ? CouplingLpMode::martingale : CouplingLpMode::penalized;
    auto lp = build_coupling_lp(mus, table, grid, mode, N);
    auto sol = lp::solve(lp, lp_options(opts));

    PriceReport rep;
    rep.functional = f;
    rep.status = sol.status;
    rep.diag.iterations = sol.iterations;
    rep.diag.lp_rows = lp.rows;
    rep.diag.lp_cols = lp.cols;
    if (f == Functional::PN) rep.bound = N;
    if (sol.status == lp::Status::unbounded)
        throw std::logic_error("coupling LP unbounded on a finite grid");
    if (sol.status != lp::Status::optimal) {
        rep.value = std::numeric_limits<double>::quiet_NaN();
        rep.diag.wall_ms = elapsed_ms(t0);
        return rep;
    }

    rep.value = sol.objective;
    attach_lp_residuals(rep.residuals, lp, sol);
    std::vector<double> mass(sol.x.begin(), sol.x.begin() + grid.cells());
    GridCoupling q = GridCoupling::from_lp_mass(grid, std::move(mass));
    rep.residuals.marginal_deviation = in_Pi(q, mus, opts.tol, opts.threads).worst_deviation;
    double a1 = best_gain(q, 1.0, opts.threads);
    rep.residuals.martingale_gain = a1;
    if (f == Functional::PN) {
        double ephi = kernels::dot(table.data(), q.mass().data(), grid.cells(), opts.threads);
        double recheck = std::abs(sol.objective - (ephi - N * a1));
        rep.residuals.penalized_recheck = recheck;
        if (recheck > 1e-8)
            throw std::logic_error("penalized objective recheck failed: " +
                                   std::to_string(recheck));
    }
    rep.coupling = std::move(q);
    rep.diag.wall_ms = elapsed_ms(t0);
    return rep;
}

// Paths seeding the constraint-generation relaxation: a diagonal sweep, the
// grid corners, a near-diagonal band for two periods, and a deterministic
// pseudo-random fill.
std::vector<long> seed_paths(const ProductGrid& grid, const DualLayout& lay) {
    std::set<long> seen;
    const int T = lay.T;
    const long cells = grid.cells();
    long nmax = 0;
    for (long n : lay.nsize) nmax = std::max(nmax, n);
    for (long i = 0; i < nmax; ++i) {
        long cell = 0;
        for (int t = 0; t < T; ++t) {
            long j = nmax > 1 ? i * (lay.nsize[t] - 1) / (nmax - 1) : 0;
            cell = cell * lay.nsize[t] + j;
        }
        seen.insert(cell);
    }
    for (long mask = 0; mask < (1L << T); ++mask) {
        long cell = 0;
        for (int t = 0; t < T; ++t)
            cell = cell * lay.nsize[t] + ((mask >> t) & 1 ? lay.nsize[t] - 1 : 0);
        seen.insert(cell);
    }
    if (T == 2) {
        for (long i = 0; i < lay.nsize[0]; ++i)
            for (long d = -2; d <= 2; ++d) {
                long j = i * (lay.nsize[1] - 1) / std::max(1L, lay.nsize[0] - 1) + d;
                if (j >= 0 && j < lay.nsize[1]) seen.insert(i * lay.nsize[1] + j);
            }
    }
    SplitMix64 rng(0x5eed5eedULL);
    long want = std::min(cells, std::max(2 * lay.n_struct, 128L));
    while (static_cast<long>(seen.size()) < want)
        seen.insert(static_cast<long>(rng.next() % static_cast<uint64_t>(cells)));
    return {seen.begin(), seen.end()};
}

struct RowGenState {
    std::vector<long> active;
    std::map<long, int> added_round;
    std::map<long, int> last_tight;
};

PriceReport solve_dual(std::span<const DiscreteMarginal> mus, const PayoffSpec& phi,
                       const Options& opts, double N) {
    validate_instance(mus);
    auto t0 = Clock::now();
    ProductGrid grid = grid_from(mus);
    check_grid_size(grid);
    std::vector<double> table = payoff_table(phi, grid, opts.threads);
    DualLayout lay(grid);
    const long cells = grid.cells();

    PriceReport rep;
    rep.functional = std::isfinite(N) ? Functional::DN : Functional::D;
    if (std::isfinite(N)) {
        if (!(N > 0)) throw std::invalid_argument("constrained_dual_price: N must be positive");
        rep.bound = N;
    }

    double tmax = 0.0, tmin = 0.0;
    for (double v : table) {
        tmax = std::max(tmax, v);
        tmin = std::min(tmin, v);
    }
    const double scale = 1.0 + std::max(std::abs(tmax), std::abs(tmin));

    auto finish_optimal = [&](const lp::LinearProgram& lp, const lp::Solution& sol, int rounds,
                              bool boxed) {
        rep.status = lp::Status::optimal;
        rep.value = sol.objective;
        rep.diag.iterations += sol.iterations;
        rep.diag.lp_rows = lp.rows;
        rep.diag.lp_cols = lp.cols;
        rep.diag.rounds = rounds;
        rep.diag.boxed = boxed;
        attach_lp_residuals(rep.residuals, lp, sol);
        SemiStaticStrategy strat = decode_strategy(sol, lay, N);
        auto slack = slack_sweep(strat, table, grid, lay, opts.threads);
        auto mn = kernels::min_with_index(slack.data(), cells, opts.threads);
        rep.residuals.superhedge_min_slack = mn.value;
        rep.residuals.static_cost_recheck = std::abs(sol.objective - static_cost(strat, mus));
        rep.strategy = std::move(strat);
        rep.diag.wall_ms = elapsed_ms(t0);
    };

    if (cells <= opts.direct_dual_threshold) {
        std::vector<long> all(cells);
        for (long i = 0; i < cells; ++i) all[i] = i;
        auto lp = build_dual_lp(mus, table, grid, lay, all, N, {});
        auto sol = lp::solve(lp, lp_options(opts));
        if (sol.status == lp::Status::infeasible)
            throw std::logic_error("superhedge LP infeasible; static legs can always lift");
        if (sol.status != lp::Status::optimal) {
            rep.status = sol.status;
            rep.value = sol.status == lp::Status::unbounded
                            ? -std::numeric_limits<double>::infinity()
                            : std::numeric_limits<double>::quiet_NaN();
            rep.diag.iterations = sol.iterations;
            rep.diag.wall_ms = elapsed_ms(t0);
            return rep;
        }
        finish_optimal(lp, sol, 0, false);
        return rep;
    }

    // Constraint generation with a working box. The relaxations stay small;
    // exactness comes from the final full separation sweep.
    DualBoxes boxes;
    boxes.gauge_pin = true;
    boxes.u_box = 1024.0 * scale;
    double n_star = stabilization_threshold(mus, phi);
    boxes.delta_box = std::isfinite(N) ? lp::kInf : std::max(1024.0, 32.0 * n_star);

    RowGenState st;
    st.active = seed_paths(grid, lay);
    for (long c : st.active) st.added_round[c] = 0;

    const double vtol = 1e-9 * scale;
    const long add_cap = std::clamp(lay.n_struct, 64L, 512L);
    int enlargements = 0;
    double prev_box_value = std::numeric_limits<double>::quiet_NaN();
    const int max_rounds = 400;

    for (int round = 1; round <= max_rounds; ++round) {
        auto lp = build_dual_lp(mus, table, grid, lay, st.active, N, boxes);
        auto sol = lp::solve(lp, lp_options(opts));
        if (sol.status != lp::Status::optimal) {
            rep.status = sol.status;
            rep.value = std::numeric_limits<double>::quiet_NaN();
            rep.diag.iterations += sol.iterations;
            rep.diag.rounds = round;
            rep.diag.wall_ms = elapsed_ms(t0);
            return rep;
        }
        rep.diag.iterations += sol.iterations;

        SemiStaticStrategy strat = decode_strategy(sol, lay, N);
        std::vector<double> slack = slack_sweep(strat, table, grid, lay, opts.threads);

        // Collect the most violated paths.
        std::vector<std::pair<double, long>> viol;
        for (long cell = 0; cell < cells; ++cell)
            if (slack[cell] < -vtol) viol.push_back({slack[cell], cell});
        if (!viol.empty()) {
            long take = std::min<long>(add_cap, static_cast<long>(viol.size()));
            std::partial_sort(viol.begin(), viol.begin() + take, viol.end());
            for (long i = 0; i < take; ++i) {
                long cell = viol[i].second;
                if (!st.added_round.count(cell)) {
                    st.active.push_back(cell);
                    st.added_round[cell] = round;
                }
            }
            // Retire rows that have stayed slack, while the set is large and
            // the run is young enough that cycling cannot bite.
            if (round < 100 && static_cast<long>(st.active.size()) > 3 * lay.n_struct) {
                std::vector<long> keep;
                for (long cell : st.active) {
                    bool tight = slack[cell] <= 1e-6 * scale;
                    if (tight) st.last_tight[cell] = round;
                    int lt = st.last_tight.count(cell) ? st.last_tight[cell] : 0;
                    if (tight || round - st.added_round[cell] < 2 || round - lt < 2)
                        keep.push_back(cell);
                    else
                        st.added_round.erase(cell);
                }
                st.active = std::move(keep);
            }
            std::sort(st.active.begin(), st.active.end());
            continue;
        }

        // Converged for the current boxes; decide whether a box is binding.
        bool touched = false;
        for (int t = 0; t < lay.T && !touched; ++t)
            for (long j = 0; j < lay.nsize[t]; ++j)
                if (std::abs(strat.u[t][j]) >= 0.999 * boxes.u_box) {
                    touched = true;
                    break;
                }
        if (!std::isfinite(N) && std::isfinite(boxes.delta_box))
            for (int t = 0; t + 1 < lay.T && !touched; ++t)
                for (long p = 0; p < lay.hsize[t]; ++p)
                    if (std::abs(strat.delta[t][p]) >= 0.999 * boxes.delta_box) {
                        touched = true;
                        break;
                    }

        if (!touched) {
            finish_optimal(lp, sol, round, false);
            return rep;
        }
        if (enlargements > 0 && std::abs(sol.objective - prev_box_value) <= 1e-7 * scale) {
            // Value is stable under box growth: bounded optimum whose vertex
            // rides a cost-neutral ray.
            finish_optimal(lp, sol, round, true);
            return rep;
        }
        if (enlargements >= 3) {
            rep.status = lp::Status::unbounded;
            rep.value = -std::numeric_limits<double>::infinity();
            rep.diag.rounds = round;
            rep.diag.wall_ms = elapsed_ms(t0);
            return rep;
        }
        prev_box_value = sol.objective;
        boxes.u_box *= 64.0;
        if (!std::isfinite(N)) boxes.delta_box *= 64.0;
        ++enlargements;
    }

    rep.status = lp::Status::iteration_limit;
    rep.value = std::numeric_limits<double>::quiet_NaN();
    rep.diag.rounds = max_rounds;
    rep.diag.wall_ms = elapsed_ms(t0);
    return rep;
}

}  // namespace

double static_cost(const SemiStaticStrategy& s, std::span<const DiscreteMarginal> mus) {
    if (s.u.size() != mus.size()) throw std::invalid_argument("static_cost: time count mismatch");
    double cost = 0.0;
    for (size_t t = 0; t < mus.size(); ++t) {
        if (s.u[t].size() != mus[t].weights().size())
            throw std::invalid_argument("static_cost: leg size mismatch");
        for (size_t j = 0; j < s.u[t].size(); ++j) cost += mus[t].weights()[j] * s.u[t][j];
    }
    return cost;
}

SlackReport verify_superhedge(const SemiStaticStrategy& s, const PayoffSpec& phi,
                              const ProductGrid& grid, int threads) {
    DualLayout lay(grid);
    if (static_cast<int>(s.u.size()) != lay.T ||
        static_cast<int>(s.delta.size()) != lay.T - 1)
        throw std::invalid_argument("verify_superhedge: strategy shape mismatch");
    for (int t = 0; t < lay.T; ++t)
        if (static_cast<long>(s.u[t].size()) != lay.nsize[t])
            throw std::invalid_argument("verify_superhedge: static leg size mismatch");
    for (int t = 0; t + 1 < lay.T; ++t)
        if (static_cast<long>(s.delta[t].size()) != lay.hsize[t])
            throw std::invalid_argument("verify_superhedge: dynamic leg size mismatch");
    std::vector<double> table = payoff_table(phi, grid, threads);
    auto slack = slack_sweep(s, table, grid, lay, threads);
    auto mn = kernels::min_with_index(slack.data(), grid.cells(), threads);
    SlackReport rep;
    rep.min_slack = mn.value;
    rep.argmin_path = grid.path(mn.index);
    rep.pass = mn.value >= -1e-8;
    return rep;
}

PriceReport primal_price(std::span<const DiscreteMarginal> mus, const PayoffSpec& phi,
                         const Options& opts) {
    return coupling_price(mus, phi, opts, Functional::P, 0.0);
}

PriceReport penalized_primal_price(std::span<const DiscreteMarginal> mus, const PayoffSpec& phi,
                                   double N, const Options& opts) {
    if (!(N > 0)) throw std::invalid_argument("penalized_primal_price: N must be positive");
    return coupling_price(mus, phi, opts, Functional::PN, N);
}

PriceReport dual_price(std::span<const DiscreteMarginal> mus, const PayoffSpec& phi,
                       const Options& opts) {
    return solve_dual(mus, phi, opts, lp::kInf);
}

PriceReport constrained_dual_price(std::span<const DiscreteMarginal> mus, const PayoffSpec& phi,
                                   double N, const Options& opts) {
    PriceReport rep = solve_dual(mus, phi, opts, N);
    if (rep.status != lp::Status::optimal && rep.status != lp::Status::iteration_limit)
        throw std::logic_error("constrained superhedge LP must be feasible and bounded");
    return rep;
}

bool martingale_polytope_feasible(std::span<const DiscreteMarginal> mus, const Options& opts) {
    validate_instance(mus);
    ProductGrid grid = grid_from(mus);
    check_grid_size(grid);
    std::vector<double> zero(grid.cells(), 0.0);
    auto lp = build_coupling_lp(mus, zero, grid, CouplingLpMode::feasibility, 0.0);
    auto sol = lp::solve(lp, lp_options(opts));
    if (sol.status == lp::Status::optimal) return true;
    if (sol.status == lp::Status::infeasible) return false;
    throw std::runtime_error("martingale feasibility LP did not converge");
}

double stabilization_threshold(std::span<const DiscreteMarginal> mus, const PayoffSpec& phi) {
    validate_instance(mus);
    ProductGrid grid = grid_from(mus);
    std::vector<double> table = payoff_table(phi, grid);
    double tmax = table[0], tmin = table[0];
    for (double v : table) {
        tmax = std::max(tmax, v);
        tmin = std::min(tmin, v);
    }
    double gap = grid.min_spacing();
    if (gap <= 0.0 || tmax - tmin <= 0.0) return 0.0;
    return (tmax - tmin) / gap;
}

SweepResult sweep_bounds(std::span<const DiscreteMarginal> mus, const PayoffSpec& phi,
                         const std::vector<double>& Ns, const Options& opts) {
    if (Ns.empty()) throw std::invalid_argument("sweep_bounds: empty bound list");
    for (size_t i = 0; i < Ns.size(); ++i) {
        if (!(Ns[i] > 0)) throw std::invalid_argument("sweep_bounds: bounds must be positive");
        if (i > 0 && !(Ns[i] > Ns[i - 1]))
            throw std::invalid_argument("sweep_bounds: bounds must be strictly increasing");
    }

    SweepResult res;
    res.n_star = stabilization_threshold(mus, phi);

    PriceReport p = primal_price(mus, phi, opts);
    PriceReport d = dual_price(mus, phi, opts);
    if (p.status == lp::Status::infeasible || d.status == lp::Status::unbounded)
        throw std::runtime_error(
            "sweep_bounds: no martingale coupling (convex order fails); D is unbounded");
    if (p.status != lp::Status::optimal || d.status != lp::Status::optimal)
        throw std::runtime_error("sweep_bounds: base solves did not reach optimality");
    res.P = p.value;
    res.D = d.value;

    res.rows.resize(Ns.size());
    int workers = std::max(1, opts.sweep_threads);
    Options solo = opts;
    if (workers > 1) solo.threads = 1;
    solo.sweep_threads = 1;

    std::exception_ptr error;
    std::mutex err_mx;
    auto job = [&](size_t i) {
        try {
            PriceReport dn = constrained_dual_price(mus, phi, Ns[i], solo);
            PriceReport pn = penalized_primal_price(mus, phi, Ns[i], solo);
            if (dn.status != lp::Status::optimal || pn.status != lp::Status::optimal)
                throw std::runtime_error("sweep_bounds: constrained solve failed at N=" +
                                         std::to_string(Ns[i]));
            res.rows[i] = {Ns[i], dn.value, pn.value, dn.value - pn.value};
        } catch (...) {
            std::lock_guard<std::mutex> lk(err_mx);
            if (!error) error = std::current_exception();
        }
    };
    if (workers <= 1) {
        for (size_t i = 0; i < Ns.size(); ++i) job(i);
    } else {
        std::atomic<size_t> next{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (size_t i = next.fetch_add(1); i < Ns.size(); i = next.fetch_add(1)) job(i);
            });
        for (auto& th : pool) th.join();
    }
    if (error) std::rethrow_exception(error);

    for (size_t i = 0; i < res.rows.size(); ++i) {
        const auto& r = res.rows[i];
        if (std::abs(r.gap) > 1e-6)
            throw std::runtime_error("sweep_bounds: constrained duality gap " +
                                     std::to_string(r.gap) + " at N=" + std::to_string(r.N));
        if (r.DN < res.D - 1e-7)
            throw std::runtime_error("sweep_bounds: DN fell below D at N=" + std::to_string(r.N));
        if (i > 0 && r.DN > res.rows[i - 1].DN + 1e-9)
            throw std::runtime_error("sweep_bounds: DN not nonincreasing at N=" +
                                     std::to_string(r.N));
    }
    if (Ns.back() >= res.n_star && std::abs(res.rows.back().DN - res.D) > 1e-6)
        throw std::runtime_error("sweep_bounds: DN did not stabilize at D beyond the threshold");
    return res;
}

SequenceReport tildeP_estimate(std::span<const SequenceElement> seq, double gain_tol) {
    if (seq.empty()) throw std::invalid_argument("tildeP_estimate: empty sequence");
    SequenceReport rep;
    for (const auto& e : seq) {
        rep.gains.push_back(e.gain);
        rep.payoffs.push_back(e.payoff);
    }
    rep.limsup_estimate = *std::max_element(rep.payoffs.begin(), rep.payoffs.end());
    rep.gains_converged = rep.gains.back() <= gain_tol;
    return rep;
}

SequenceReport tildeP_estimate(const PayoffSpec& phi, std::span<const GridCoupling> seq,
                               double gain_tol, double pi_tol, int threads) {
    if (seq.empty()) throw std::invalid_argument("tildeP_estimate: empty sequence");
    const ProductGrid& grid = seq.front().grid();
    std::vector<double> table = payoff_table(phi, grid, threads);
    std::vector<DiscreteMarginal> ref;
    for (int t = 0; t < grid.times(); ++t) ref.push_back(seq.front().marginal_of(t, threads));

    std::vector<SequenceElement> elems;
    for (const auto& q : seq) {
        if (!(q.grid() == grid))
            throw std::invalid_argument("tildeP_estimate: couplings on different grids");
        PiCheck pc = in_Pi(q, ref, pi_tol, threads);
        if (!pc.in_pi)
            throw std::invalid_argument("tildeP_estimate: sequence does not share marginals");
        elems.push_back({best_gain(q, 1.0, threads),
                         kernels::dot(table.data(), q.mass().data(), grid.cells(), threads)});
    }
    return tildeP_estimate(elems, gain_tol);
}

}  // namespace mot::pricing
