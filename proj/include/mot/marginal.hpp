#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mot/grid.hpp"

namespace mot {

/// A probability measure on a finite set of nonnegative support points.
///
/// Invariants enforced at construction: support points are >= 0 and strictly
/// increasing, weights are nonnegative and sum to 1 within 1e-12. Zero-weight
/// support points are allowed and retained, so user-specified grids survive
/// into the dual LP's static-leg variables. Instances are immutable and safe
/// to share across threads.
class DiscreteMarginal {
  public:
    DiscreteMarginal(std::vector<double> support, std::vector<double> weights);

    const std::vector<double>& support() const { return support_; }
    const std::vector<double>& weights() const { return weights_; }
    int size() const { return static_cast<int>(support_.size()); }

    /// First moment, an exact finite sum.
    double mean() const;

    /// Undiscounted call value sum_j w_j * max(s_j - strike, 0). Nonincreasing
    /// and convex in the strike; call_price(0) equals mean(). Negative strikes
    /// are rejected.
    double call_price(double strike) const;

  private:
    std::vector<double> support_;
    std::vector<double> weights_;
};

/// Outcome of the pairwise convex-order test across a list of marginals.
/// `ordered` is decided by comparing call functions at every strike in the
/// union of the two adjacent supports; call functions are piecewise linear
/// with kinks only at support points, so this finite check is exact.
/// `worst` always holds the largest observed C_t(K) - C_{t+1}(K); a positive
/// value above tolerance is a violation witness.
struct ConvexOrderReport {
    bool same_mean = false;
    bool ordered = false;
    std::optional<double> common_mean;
    struct Violation {
        int t = -1;           // 0-based index of the earlier marginal
        double strike = 0.0;  // where the worst gap occurs
        double delta = 0.0;   // C_t(K) - C_{t+1}(K)
    };
    Violation worst;
    double tol = 0.0;
};

/// Tests whether mus[0], mus[1], ... share a common mean and increase in the
/// convex order. Requires at least two marginals.
ConvexOrderReport check_convex_order(std::span<const DiscreteMarginal> mus, double tol = 1e-9);

enum class MarginalFormat { csv, json };

struct LoadReport {
    std::vector<std::string> warnings;
};

/// Reads one or more marginals from disk.
///
/// CSV: two columns `support,weight`, optional header, '.' decimal separator;
/// the file holds a single marginal. JSON: either a full instance object (its
/// "marginals" array is taken), an array of {"support": [...], "weights":
/// [...]} objects, or a single such object.
///
/// Support must be ascending; duplicate points are merged (weights summed)
/// with a warning. Weights are renormalized only when the deviation of their
/// sum from 1 is at most 1e-9, otherwise the file is rejected.
std::vector<DiscreteMarginal> load_marginals(const std::string& path, MarginalFormat format,
                                             LoadReport* report = nullptr);

/// Per-axis grid assembled from the marginals' supports.
ProductGrid grid_from(std::span<const DiscreteMarginal> mus);

}  // namespace mot
