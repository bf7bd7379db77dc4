#pragma once

#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace mot::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { minimize, maximize };
enum class RowKind { eq, le, ge };
enum class Status { optimal, infeasible, unbounded, iteration_limit };

std::string to_string(Status s);

/// Dense linear program
///   optimize c'x  subject to  a_i'x {<=,=,>=} b_i,  lo <= x <= hi,
/// with per-variable bounds allowed to be infinite.
struct LinearProgram {
    Sense sense = Sense::minimize;
    int rows = 0;
    int cols = 0;
    std::vector<double> c;     // cols
    std::vector<double> a;     // rows x cols, row-major
    std::vector<double> b;     // rows
    std::vector<RowKind> kind; // rows
    std::vector<double> lo;    // cols, may be -inf
    std::vector<double> hi;    // cols, may be +inf

    static LinearProgram make(Sense sense, int rows, int cols);
    double& at(int r, int c_) { return a[static_cast<size_t>(r) * cols + c_]; }
    double at(int r, int c_) const { return a[static_cast<size_t>(r) * cols + c_]; }

    /// Throws std::invalid_argument on dimension mismatch, non-finite data in
    /// c/a/b, or lo > hi.
    void validate() const;
};

struct Options {
    double feas_tol = 1e-9;
    double pivot_tol = 1e-10;
    long max_iters = 0;  // 0 picks 50 * (internal rows + cols)
    int threads = 1;
};

/// Solver output. For status == optimal the certified residuals (recomputable
/// via check_certificate) stay within 1e-8 for primal/dual feasibility and
/// complementary slackness and 1e-7 for the duality gap.
///
/// Dual sign convention, minimize: y_i >= 0 on ge rows, y_i <= 0 on le rows,
/// free on eq rows; reduced costs z = c - A'y satisfy z_j >= 0 when x_j sits
/// at its lower bound and z_j <= 0 at its upper bound. For maximize all signs
/// flip. The dual objective is b'y plus the active-bound terms.
struct Solution {
    Status status = Status::iteration_limit;
    std::vector<double> x;
    double objective = 0.0;
    std::vector<double> y;
    long iterations = 0;
    bool used_bland = false;
};

/// Two-phase dense simplex. Free variables are split, variables with a finite
/// lower (upper) bound are shifted (mirrored) to nonnegative form, ranged
/// bounds add an explicit bound row, and row/column max-norm equilibration is
/// applied up front with certificates unscaled on the way out. Dantzig pricing
/// switches to Bland's rule permanently after 5 * rows consecutive degenerate
/// pivots, which guarantees termination.
Solution solve(const LinearProgram& lp, const Options& opts = {});

/// Residuals recomputed from the original data and (x, y) alone. Everything
/// is scaled by row/column magnitudes so tolerances are dimensionless.
struct CertificateReport {
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double complementarity = 0.0;
    double duality_gap = 0.0;
    double primal_objective = 0.0;
    double dual_objective = 0.0;

    bool within(double feas = 1e-8, double gap = 1e-7) const {
        return primal_residual <= feas && dual_residual <= feas && complementarity <= feas &&
               duality_gap <= gap;
    }
};

CertificateReport check_certificate(const LinearProgram& lp, const Solution& sol);

/// Writes the LP in a line-oriented text form for external cross-checking.
/// Grammar (one item per line, shortest round-trip decimals, inf/-inf for
/// free bounds):
///   sense min|max
///   rows <m> cols <n>
///   c <v_1> ... <v_n>
///   row {le|eq|ge} <b_i> : <a_i1> ... <a_in>      (m lines)
///   bound <lo_j> <hi_j>                           (n lines)
///   end
void dump(const LinearProgram& lp, std::ostream& out);

}  // namespace mot::lp
