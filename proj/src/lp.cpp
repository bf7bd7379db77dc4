#include "mot/lp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <stdexcept>

#include "mot/format.hpp"
#include "mot/kernels.hpp"

namespace mot::lp {

std::string to_string(Status s) {
    switch (s) {
        case Status::optimal: return "optimal";
        case Status::infeasible: return "infeasible";
        case Status::unbounded: return "unbounded";
        case Status::iteration_limit: return "iteration_limit";
    }
    return "unknown";
}

LinearProgram LinearProgram::make(Sense sense, int rows, int cols) {
    LinearProgram lp;
    lp.sense = sense;
    lp.rows = rows;
    lp.cols = cols;
    lp.c.assign(cols, 0.0);
    lp.a.assign(static_cast<size_t>(rows) * cols, 0.0);
    lp.b.assign(rows, 0.0);
    lp.kind.assign(rows, RowKind::eq);
    lp.lo.assign(cols, 0.0);
    lp.hi.assign(cols, kInf);
    return lp;
}

void LinearProgram::validate() const {
    if (rows < 0 || cols <= 0) throw std::invalid_argument("lp: empty variable set");
    if (static_cast<int>(c.size()) != cols || static_cast<int>(b.size()) != rows ||
        static_cast<int>(kind.size()) != rows || static_cast<int>(lo.size()) != cols ||
        static_cast<int>(hi.size()) != cols ||
        a.size() != static_cast<size_t>(rows) * static_cast<size_t>(cols))
        throw std::invalid_argument("lp: dimension mismatch");
    for (double v : c)
        if (!std::isfinite(v)) throw std::invalid_argument("lp: non-finite objective entry");
    for (double v : a)
        if (!std::isfinite(v)) throw std::invalid_argument("lp: non-finite matrix entry");
    for (double v : b)
        if (!std::isfinite(v)) throw std::invalid_argument("lp: non-finite rhs entry");
    for (int j = 0; j < cols; ++j) {
        if (std::isnan(lo[j]) || std::isnan(hi[j])) throw std::invalid_argument("lp: NaN bound");
        if (lo[j] > hi[j]) throw std::invalid_argument("lp: lower bound above upper bound");
    }
}

namespace {

enum class VarKind : uint8_t { shifted, mirrored, split, fixed };

struct VarMap {
    VarKind kind = VarKind::shifted;
    int col = -1;      // primary internal column
    int col_neg = -1;  // negative part of a split variable
    double offset = 0.0;
    double range = kInf;  // finite for ranged variables (bound row emitted)
};

// Equality-form tableau with nonnegative internal variables. Layout per row:
// [structural | slack | artificial | rhs], width = n + 1. The artificial
// identity block is kept through phase 2 (at zero cost, barred from entering)
// so the duals can be read off its reduced costs.
struct Standardized {
    int m = 0;
    int n = 0;
    int art_begin = 0;
    long width = 0;
    std::vector<double> tab;
    std::vector<double> cost;       // phase-2 costs, length n
    std::vector<int> basis;         // m
    std::vector<uint8_t> eligible;  // n
    std::vector<double> row_sign;   // original rows, +-1 after rhs normalization
    std::vector<VarMap> vars;
    std::vector<double> rscale, cscale;
    bool maximize = false;

    double& at(int r, long col) { return tab[static_cast<size_t>(r) * width + col]; }
    double at(int r, long col) const { return tab[static_cast<size_t>(r) * width + col]; }
    double& rhs(int r) { return tab[static_cast<size_t>(r) * width + n]; }
    double rhs(int r) const { return tab[static_cast<size_t>(r) * width + n]; }
};

Standardized standardize(const LinearProgram& in) {
    Standardized st;
    st.maximize = in.sense == Sense::maximize;

    const int m0 = in.rows, n0 = in.cols;
    std::vector<double> a(in.a), b(in.b), c(in.c), lo(in.lo), hi(in.hi);
    if (st.maximize)
        for (double& v : c) v = -v;

    // Row then column max-norm equilibration.
    st.rscale.assign(m0, 1.0);
    st.cscale.assign(n0, 1.0);
    for (int i = 0; i < m0; ++i) {
        double mx = 0.0;
        for (int j = 0; j < n0; ++j)
            mx = std::max(mx, std::abs(a[static_cast<size_t>(i) * n0 + j]));
        if (mx > 0.0) st.rscale[i] = 1.0 / mx;
        for (int j = 0; j < n0; ++j) a[static_cast<size_t>(i) * n0 + j] *= st.rscale[i];
        b[i] *= st.rscale[i];
    }
    for (int j = 0; j < n0; ++j) {
        double mx = 0.0;
        for (int i = 0; i < m0; ++i)
            mx = std::max(mx, std::abs(a[static_cast<size_t>(i) * n0 + j]));
        if (mx > 0.0) st.cscale[j] = 1.0 / mx;
        for (int i = 0; i < m0; ++i) a[static_cast<size_t>(i) * n0 + j] *= st.cscale[j];
        c[j] *= st.cscale[j];
        if (std::isfinite(lo[j])) lo[j] /= st.cscale[j];
        if (std::isfinite(hi[j])) hi[j] /= st.cscale[j];
    }

    st.vars.resize(n0);
    int ncols = 0;
    int nranged = 0;
    for (int j = 0; j < n0; ++j) {
        VarMap& v = st.vars[j];
        bool lof = std::isfinite(lo[j]), hif = std::isfinite(hi[j]);
        if (lof && hif && hi[j] - lo[j] <= 0.0) {
            v.kind = VarKind::fixed;
            v.offset = lo[j];
        } else if (lof) {
            v.kind = VarKind::shifted;
            v.offset = lo[j];
            v.col = ncols++;
            if (hif) {
                v.range = hi[j] - lo[j];
                ++nranged;
            }
        } else if (hif) {
            v.kind = VarKind::mirrored;
            v.offset = hi[j];
            v.col = ncols++;
        } else {
            v.kind = VarKind::split;
            v.col = ncols++;
            v.col_neg = ncols++;
        }
    }

    st.m = m0 + nranged;
    int nslack = nranged;
    for (int i = 0; i < m0; ++i)
        if (in.kind[i] != RowKind::eq) ++nslack;
    st.art_begin = ncols + nslack;
    st.n = st.art_begin + st.m;
    st.width = st.n + 1;

    st.tab.assign(static_cast<size_t>(st.m) * st.width, 0.0);
    st.cost.assign(st.n, 0.0);
    st.row_sign.assign(m0, 1.0);

    for (int i = 0; i < m0; ++i) {
        double bi = b[i];
        for (int j = 0; j < n0; ++j) {
            double aij = a[static_cast<size_t>(i) * n0 + j];
            if (aij == 0.0) continue;
            const VarMap& v = st.vars[j];
            switch (v.kind) {
                case VarKind::fixed: bi -= aij * v.offset; break;
                case VarKind::shifted:
                    st.at(i, v.col) += aij;
                    bi -= aij * v.offset;
                    break;
                case VarKind::mirrored:
                    st.at(i, v.col) -= aij;
                    bi -= aij * v.offset;
                    break;
                case VarKind::split:
                    st.at(i, v.col) += aij;
                    st.at(i, v.col_neg) -= aij;
                    break;
            }
        }
        st.rhs(i) = bi;
    }
    for (int j = 0; j < n0; ++j) {
        const VarMap& v = st.vars[j];
        if (v.kind == VarKind::shifted)
            st.cost[v.col] = c[j];
        else if (v.kind == VarKind::mirrored)
            st.cost[v.col] = -c[j];
        else if (v.kind == VarKind::split) {
            st.cost[v.col] = c[j];
            st.cost[v.col_neg] = -c[j];
        }
    }

    int next_row = m0;
    for (int j = 0; j < n0; ++j) {
        const VarMap& v = st.vars[j];
        if (v.kind == VarKind::shifted && std::isfinite(v.range)) {
            st.at(next_row, v.col) = 1.0;
            st.rhs(next_row) = v.range;
            ++next_row;
        }
    }

    int next_col = ncols;
    for (int i = 0; i < m0; ++i) {
        if (in.kind[i] == RowKind::le)
            st.at(i, next_col++) = 1.0;
        else if (in.kind[i] == RowKind::ge)
            st.at(i, next_col++) = -1.0;
    }
    for (int i = m0; i < st.m; ++i) st.at(i, next_col++) = 1.0;

    for (int i = 0; i < st.m; ++i) {
        if (st.rhs(i) < 0.0) {
            for (int j = 0; j <= st.n; ++j) st.at(i, j) = -st.at(i, j);
            if (i < m0) st.row_sign[i] = -1.0;
        }
        st.at(i, st.art_begin + i) = 1.0;
    }

    st.basis.resize(st.m);
    for (int i = 0; i < st.m; ++i) st.basis[i] = st.art_begin + i;
    st.eligible.assign(st.n, 1);
    for (int j = st.art_begin; j < st.n; ++j) st.eligible[j] = 0;
    return st;
}

struct SimplexState {
    Standardized st;
    std::vector<double> costrow;  // reduced costs of the active phase, length n
    long iterations = 0;
    long degen_streak = 0;
    bool bland = false;
    Options opts;
};

void recompute_costrow(SimplexState& s, const std::vector<double>& phase_cost) {
    const Standardized& st = s.st;
    s.costrow = phase_cost;
    for (int i = 0; i < st.m; ++i) {
        double cb = phase_cost[st.basis[i]];
        if (cb == 0.0) continue;
        const double* row = st.tab.data() + static_cast<size_t>(i) * st.width;
        for (int j = 0; j < st.n; ++j) s.costrow[j] -= cb * row[j];
    }
}

void pivot(SimplexState& s, int leave, long enter) {
    Standardized& st = s.st;
    double* prow = st.tab.data() + static_cast<size_t>(leave) * st.width;
    double pv = prow[enter];
    for (long j = 0; j <= st.n; ++j) prow[j] /= pv;
    prow[enter] = 1.0;
    kernels::eliminate_column(st.tab.data(), st.m, st.width, leave, enter, s.opts.threads);
    double zf = s.costrow[enter];
    if (zf != 0.0) {
        for (int j = 0; j < st.n; ++j) s.costrow[j] -= zf * prow[j];
        s.costrow[enter] = 0.0;
    }
    for (int i = 0; i < st.m; ++i) {
        double& r = st.rhs(i);
        if (r < 0.0 && r > -1e-11) r = 0.0;
    }
    st.basis[leave] = static_cast<int>(enter);
}

Status run_phase(SimplexState& s, const std::vector<double>& phase_cost, long max_iters) {
    Standardized& st = s.st;
    const double ptol = s.opts.pivot_tol;
    long since_refresh = 0;

    while (true) {
        long enter;
        if (s.bland)
            enter = kernels::first_below(s.costrow.data(), st.n, ptol, st.eligible.data());
        else
            enter = kernels::argmin_below(s.costrow.data(), st.n, ptol, st.eligible.data(),
                                          s.opts.threads);
        if (enter < 0) return Status::optimal;

        double best_ratio = kInf;
        for (int i = 0; i < st.m; ++i) {
            double aie = st.at(i, enter);
            if (aie > ptol) {
                double r = std::max(st.rhs(i), 0.0) / aie;
                if (r < best_ratio) best_ratio = r;
            }
        }
        if (!std::isfinite(best_ratio)) return Status::unbounded;

        double tie = best_ratio + 1e-10 * (1.0 + best_ratio);
        int leave = -1;
        double leave_pivot = 0.0;
        for (int i = 0; i < st.m; ++i) {
            double aie = st.at(i, enter);
            if (aie <= ptol) continue;
            double r = std::max(st.rhs(i), 0.0) / aie;
            if (r > tie) continue;
            if (leave < 0) {
                leave = i;
                leave_pivot = aie;
                continue;
            }
            if (s.bland) {
                if (st.basis[i] < st.basis[leave]) {
                    leave = i;
                    leave_pivot = aie;
                }
            } else {
                bool art_i = st.basis[i] >= st.art_begin;
                bool art_l = st.basis[leave] >= st.art_begin;
                if (art_i != art_l) {
                    if (art_i) {
                        leave = i;
                        leave_pivot = aie;
                    }
                } else if (aie > leave_pivot) {
                    leave = i;
                    leave_pivot = aie;
                }
            }
        }

        if (best_ratio <= 1e-11)
            ++s.degen_streak;
        else
            s.degen_streak = 0;
        if (!s.bland && s.degen_streak > 5L * st.m) s.bland = true;

        pivot(s, leave, enter);

        ++s.iterations;
        ++since_refresh;
        if (s.iterations >= max_iters) return Status::iteration_limit;
        if (since_refresh >= 512) {
            recompute_costrow(s, phase_cost);
            since_refresh = 0;
        }
    }
}

// After phase 1, pivots artificials out of the basis where a usable entry
// exists. Rows without one are linearly dependent; their artificial stays
// basic at value zero and never moves again.
void drive_out_artificials(SimplexState& s) {
    Standardized& st = s.st;
    for (int i = 0; i < st.m; ++i) {
        if (st.basis[i] < st.art_begin) continue;
        long best = -1;
        double best_mag = s.opts.pivot_tol;
        const double* row = st.tab.data() + static_cast<size_t>(i) * st.width;
        for (int j = 0; j < st.art_begin; ++j) {
            double mag = std::abs(row[j]);
            if (mag > best_mag) {
                best_mag = mag;
                best = j;
            }
        }
        if (best >= 0) {
            pivot(s, i, best);
            ++s.iterations;
        }
    }
}

}  // namespace

Solution solve(const LinearProgram& lp, const Options& opts) {
    lp.validate();

    SimplexState s;
    s.opts = opts;
    s.st = standardize(lp);
    Standardized& st = s.st;

    long max_iters = opts.max_iters > 0 ? opts.max_iters : 50L * (st.m + st.n);

    Solution out;
    out.x.assign(lp.cols, 0.0);
    out.y.assign(lp.rows, 0.0);

    // Phase 1: minimize the artificial mass.
    std::vector<double> c1(st.n, 0.0);
    for (int j = st.art_begin; j < st.n; ++j) c1[j] = 1.0;
    recompute_costrow(s, c1);
    Status ph1 = run_phase(s, c1, max_iters);
    out.iterations = s.iterations;
    out.used_bland = s.bland;
    if (ph1 == Status::iteration_limit) {
        out.status = Status::iteration_limit;
        return out;
    }
    double infeas = 0.0, bnorm = 0.0;
    for (int i = 0; i < st.m; ++i) {
        bnorm += std::abs(st.rhs(i));
        if (st.basis[i] >= st.art_begin) infeas += std::max(st.rhs(i), 0.0);
    }
    if (infeas > opts.feas_tol * (1.0 + bnorm)) {
        out.status = Status::infeasible;
        out.objective = infeas;
        return out;
    }
    drive_out_artificials(s);

    // Phase 2: original costs, artificials pinned at zero.
    recompute_costrow(s, st.cost);
    Status ph2 = run_phase(s, st.cost, max_iters);
    out.iterations = s.iterations;
    out.used_bland = s.bland;
    if (ph2 != Status::optimal) {
        out.status = ph2;
        return out;
    }

    // Primal point in original coordinates.
    std::vector<double> internal(st.n, 0.0);
    for (int i = 0; i < st.m; ++i) internal[st.basis[i]] = std::max(st.rhs(i), 0.0);
    for (int j = 0; j < lp.cols; ++j) {
        const VarMap& v = st.vars[j];
        double xs = 0.0;
        switch (v.kind) {
            case VarKind::fixed: xs = v.offset; break;
            case VarKind::shifted: xs = v.offset + internal[v.col]; break;
            case VarKind::mirrored: xs = v.offset - internal[v.col]; break;
            case VarKind::split: xs = internal[v.col] - internal[v.col_neg]; break;
        }
        out.x[j] = xs * st.cscale[j];
    }

    // Duals from the artificial reduced costs, unscaled and sign-mapped.
    for (int i = 0; i < lp.rows; ++i) {
        double yi = -s.costrow[st.art_begin + i] * st.row_sign[i] * st.rscale[i];
        out.y[i] = st.maximize ? -yi : yi;
    }

    double obj = 0.0;
    for (int j = 0; j < lp.cols; ++j) obj += lp.c[j] * out.x[j];
    out.objective = obj;
    out.status = Status::optimal;
    return out;
}

CertificateReport check_certificate(const LinearProgram& lp, const Solution& sol) {
    lp.validate();
    if (sol.x.size() != static_cast<size_t>(lp.cols) ||
        sol.y.size() != static_cast<size_t>(lp.rows))
        throw std::invalid_argument("check_certificate: solution size mismatch");

    CertificateReport rep;
    const bool maximize = lp.sense == Sense::maximize;

    // Primal feasibility, scaled per row / bound magnitude.
    for (int i = 0; i < lp.rows; ++i) {
        double ax = 0.0, rowmax = 0.0;
        for (int j = 0; j < lp.cols; ++j) {
            double aij = lp.at(i, j);
            ax += aij * sol.x[j];
            rowmax = std::max(rowmax, std::abs(aij));
        }
        double scale = std::max({1.0, rowmax, std::abs(lp.b[i])});
        double viol = 0.0;
        switch (lp.kind[i]) {
            case RowKind::eq: viol = std::abs(ax - lp.b[i]); break;
            case RowKind::le: viol = std::max(0.0, ax - lp.b[i]); break;
            case RowKind::ge: viol = std::max(0.0, lp.b[i] - ax); break;
        }
        rep.primal_residual = std::max(rep.primal_residual, viol / scale);

        // Row dual sign and complementary slackness.
        double y = sol.y[i];
        double sign_viol = 0.0;
        if (lp.kind[i] == RowKind::ge) sign_viol = maximize ? std::max(0.0, y) : std::max(0.0, -y);
        if (lp.kind[i] == RowKind::le) sign_viol = maximize ? std::max(0.0, -y) : std::max(0.0, y);
        rep.dual_residual = std::max(rep.dual_residual, sign_viol / std::max(1.0, std::abs(y)));
        if (lp.kind[i] != RowKind::eq) {
            double slack = std::abs(ax - lp.b[i]);
            rep.complementarity = std::max(rep.complementarity, std::abs(y) * slack / scale);
        }
    }

    // Bounds.
    for (int j = 0; j < lp.cols; ++j) {
        if (std::isfinite(lp.lo[j])) {
            double v = std::max(0.0, lp.lo[j] - sol.x[j]) / std::max(1.0, std::abs(lp.lo[j]));
            rep.primal_residual = std::max(rep.primal_residual, v);
        }
        if (std::isfinite(lp.hi[j])) {
            double v = std::max(0.0, sol.x[j] - lp.hi[j]) / std::max(1.0, std::abs(lp.hi[j]));
            rep.primal_residual = std::max(rep.primal_residual, v);
        }
    }

    // Reduced costs, dual feasibility at the bounds, complementarity, and the
    // bound terms of the dual objective.
    double dual_obj = 0.0;
    for (int i = 0; i < lp.rows; ++i) dual_obj += lp.b[i] * sol.y[i];
    for (int j = 0; j < lp.cols; ++j) {
        double z = lp.c[j], colmax = 0.0;
        for (int i = 0; i < lp.rows; ++i) {
            double aij = lp.at(i, j);
            z -= aij * sol.y[i];
            colmax = std::max(colmax, std::abs(aij));
        }
        double scale = std::max({1.0, colmax, std::abs(lp.c[j])});
        // Sense-adjusted: in a minimize problem z_j >= 0 may only lean on a
        // finite lower bound and z_j <= 0 on a finite upper bound.
        double zl = maximize ? -z : z;  // lower-bound multiplier in min convention
        if (zl > 0.0) {
            if (std::isfinite(lp.lo[j])) {
                dual_obj += lp.lo[j] * z;
                rep.complementarity = std::max(
                    rep.complementarity, std::abs(z) * std::abs(sol.x[j] - lp.lo[j]) / scale);
            } else {
                rep.dual_residual = std::max(rep.dual_residual, zl / scale);
            }
        } else if (zl < 0.0) {
            if (std::isfinite(lp.hi[j])) {
                dual_obj += lp.hi[j] * z;
                rep.complementarity = std::max(
                    rep.complementarity, std::abs(z) * std::abs(lp.hi[j] - sol.x[j]) / scale);
            } else {
                rep.dual_residual = std::max(rep.dual_residual, -zl / scale);
            }
        }
    }

    double pobj = 0.0;
    for (int j = 0; j < lp.cols; ++j) pobj += lp.c[j] * sol.x[j];
    rep.primal_objective = pobj;
    rep.dual_objective = dual_obj;
    rep.duality_gap = std::abs(pobj - dual_obj) / std::max({1.0, std::abs(pobj), std::abs(dual_obj)});
    return rep;
}

void dump(const LinearProgram& lp, std::ostream& os) {
    os << "sense " << (lp.sense == Sense::minimize ? "min" : "max") << "\n";
    os << "rows " << lp.rows << " cols " << lp.cols << "\n";
    os << "c";
    for (double v : lp.c) os << ' ' << format_double(v);
    os << "\n";
    for (int i = 0; i < lp.rows; ++i) {
        os << "row ";
        switch (lp.kind[i]) {
            case RowKind::le: os << "le"; break;
            case RowKind::eq: os << "eq"; break;
            case RowKind::ge: os << "ge"; break;
        }
        os << ' ' << format_double(lp.b[i]) << " :";
        for (int j = 0; j < lp.cols; ++j) os << ' ' << format_double(lp.at(i, j));
        os << "\n";
    }
    for (int j = 0; j < lp.cols; ++j)
        os << "bound " << format_double(lp.lo[j]) << ' ' << format_double(lp.hi[j]) << "\n";
    os << "end\n";
}

}  // namespace mot::lp
