#pragma once

#include <span>
#include <vector>

#include "mot/grid.hpp"
#include "mot/marginal.hpp"

namespace mot {

/// A joint probability tensor on the product grid, dense row-major with the
/// first coordinate slowest. Entries are nonnegative and total mass is 1
/// within 1e-10. Immutable after construction.
class GridCoupling {
  public:
    GridCoupling(ProductGrid grid, std::vector<double> mass, double mass_tol = 1e-10);

    /// Builds a coupling from raw LP output: entries in [-clamp_tol, 0) are
    /// clamped to zero and the tensor is renormalized to total mass one.
    static GridCoupling from_lp_mass(ProductGrid grid, std::vector<double> raw,
                                     double clamp_tol = 1e-7);

    int times() const { return grid_.times(); }
    const ProductGrid& grid() const { return grid_; }
    const std::vector<double>& mass() const { return mass_; }

    /// Marginal at axis t (0-based), by summing out every other axis.
    DiscreteMarginal marginal_of(int t, int threads = 1) const;

  private:
    ProductGrid grid_;
    std::vector<double> mass_;
};

struct PiCheck {
    bool in_pi = false;
    double worst_deviation = 0.0;
    int axis = -1;
    int index = -1;
};

/// Entrywise comparison of every marginal_of(q, t) against mus[t]. The axis
/// grids must match the marginals' supports exactly.
PiCheck in_Pi(const GridCoupling& q, std::span<const DiscreteMarginal> mus, double tol = 1e-9,
              int threads = 1);

/// Conditional one-step drifts E[S_{t+1} | history] - x_t for every positive
/// mass history, with the history mass alongside. Zero-mass histories carry
/// no entry.
struct DriftProfile {
    struct Entry {
        long prefix = 0;   // row-major history index over axes [0..t]
        double mass = 0.0;
        double drift = 0.0;
    };
    std::vector<std::vector<Entry>> per_time;  // index t in [0, T-2]
};

DriftProfile drift_profile(const GridCoupling& q, int threads = 1);

/// Best expected trading gain under q with position bound N:
///   N * sum_t sum_h | E_q[ (x_{t+1} - x_t) ; history h ] |.
/// The supremum over bounded strategies separates across times and histories
/// because each position is an arbitrary function of its own history, and the
/// optimizer is the sign of the conditional drift; positive homogeneity in N
/// is exact by construction.
double best_gain(const GridCoupling& q, double N, int threads = 1);

/// best_gain(q, 1) <= tol, the tolerance-scale martingale test.
bool is_martingale(const GridCoupling& q, double tol = 1e-9, int threads = 1);

/// Pseudometric |best_gain(q1, 1) - best_gain(q2, 1)| between couplings on
/// the same grid.
double rho(const GridCoupling& q1, const GridCoupling& q2, int threads = 1);

}  // namespace mot
