#include "mot/coupling.hpp"

#include <cmath>
#include <stdexcept>

#include "mot/kernels.hpp"

namespace mot {

GridCoupling::GridCoupling(ProductGrid grid, std::vector<double> mass, double mass_tol)
    : grid_(std::move(grid)), mass_(std::move(mass)) {
    if (grid_.times() < 2) throw std::invalid_argument("coupling: need at least two periods");
    check_grid_size(grid_);
    for (const auto& axis : grid_.axes) {
        if (axis.empty()) throw std::invalid_argument("coupling: empty axis");
        for (size_t j = 0; j < axis.size(); ++j) {
            if (axis[j] < 0.0) throw std::invalid_argument("coupling: negative grid point");
            if (j > 0 && axis[j] <= axis[j - 1])
                throw std::invalid_argument("coupling: axis not strictly increasing");
        }
    }
    if (static_cast<long>(mass_.size()) != grid_.cells())
        throw std::invalid_argument("coupling: tensor size does not match grid");
    double total = 0.0;
    for (double v : mass_) {
        if (!(v >= 0.0)) throw std::invalid_argument("coupling: negative mass entry");
        total += v;
    }
    if (std::abs(total - 1.0) > mass_tol)
        throw std::invalid_argument("coupling: total mass deviates from 1");
}

GridCoupling GridCoupling::from_lp_mass(ProductGrid grid, std::vector<double> raw,
                                        double clamp_tol) {
    double total = 0.0;
    for (double& v : raw) {
        if (v < 0.0) {
            if (v < -clamp_tol) throw std::invalid_argument("coupling: negative LP mass entry");
            v = 0.0;
        }
        total += v;
    }
    if (total <= 0.0) throw std::invalid_argument("coupling: zero total LP mass");
    for (double& v : raw) v /= total;
    return GridCoupling(std::move(grid), std::move(raw));
}

DiscreteMarginal GridCoupling::marginal_of(int t, int threads) const {
    const int T = grid_.times();
    if (t < 0 || t >= T) throw std::invalid_argument("marginal_of: axis out of range");
    const long n_t = static_cast<long>(grid_.axes[t].size());
    const long inner = grid_.suffix_stride(t);       // cells per fixed (prefix, j_t)
    const long outer = grid_.cells() / (n_t * inner);
    const double* m = mass_.data();

    std::vector<double> w(n_t, 0.0);
#pragma omp parallel for schedule(static) num_threads(threads > 1 ? threads : 1) if (threads > 1)
    for (long j = 0; j < n_t; ++j) {
        double acc = 0.0;
        for (long o = 0; o < outer; ++o) {
            const double* base = m + (o * n_t + j) * inner;
            for (long i = 0; i < inner; ++i) acc += base[i];
        }
        w[j] = acc;
    }
    return DiscreteMarginal(grid_.axes[t], std::move(w));
}

PiCheck in_Pi(const GridCoupling& q, std::span<const DiscreteMarginal> mus, double tol,
              int threads) {
    if (static_cast<int>(mus.size()) != q.times())
        throw std::invalid_argument("in_Pi: marginal count does not match coupling");
    for (int t = 0; t < q.times(); ++t)
        if (mus[t].support() != q.grid().axes[t])
            throw std::invalid_argument("in_Pi: grid mismatch on axis " + std::to_string(t));

    PiCheck res;
    res.in_pi = true;
    for (int t = 0; t < q.times(); ++t) {
        DiscreteMarginal actual = q.marginal_of(t, threads);
        for (int j = 0; j < actual.size(); ++j) {
            double dev = std::abs(actual.weights()[j] - mus[t].weights()[j]);
            if (dev > res.worst_deviation) {
                res.worst_deviation = dev;
                res.axis = t;
                res.index = j;
            }
        }
    }
    res.in_pi = res.worst_deviation <= tol;
    return res;
}

namespace {

// Per-history mass and drift numerator at time t: for prefix p over axes
// [0..t], mass(p) = sum of the block and m1(p) = sum of x_{t+1} * mass over
// the block. The drift numerator is m1 - x_t(p) * mass, so zero-mass
// histories contribute exactly zero without any division.
struct PrefixStats {
    std::vector<double> mass;
    std::vector<double> numer;
};

PrefixStats prefix_stats(const GridCoupling& q, int t, int threads) {
    const ProductGrid& g = q.grid();
    const long np = g.prefixes(t);
    const long block = g.suffix_stride(t);
    const long n_next = static_cast<long>(g.axes[t + 1].size());
    const long inner = g.suffix_stride(t + 1);
    const long n_t = static_cast<long>(g.axes[t].size());
    const double* m = q.mass().data();
    const double* xnext = g.axes[t + 1].data();
    const double* xt = g.axes[t].data();

    PrefixStats st;
    st.mass.assign(np, 0.0);
    st.numer.assign(np, 0.0);
#pragma omp parallel for schedule(static) num_threads(threads > 1 ? threads : 1) if (threads > 1)
    for (long p = 0; p < np; ++p) {
        const double* base = m + p * block;
        double mass = 0.0, m1 = 0.0;
        for (long j = 0; j < n_next; ++j) {
            double mj = 0.0;
            const double* cell = base + j * inner;
            for (long i = 0; i < inner; ++i) mj += cell[i];
            mass += mj;
            m1 += xnext[j] * mj;
        }
        st.mass[p] = mass;
        st.numer[p] = m1 - xt[p % n_t] * mass;
    }
    return st;
}

}  // namespace

DriftProfile drift_profile(const GridCoupling& q, int threads) {
    DriftProfile prof;
    prof.per_time.resize(q.times() - 1);
    for (int t = 0; t + 1 < q.times(); ++t) {
        PrefixStats st = prefix_stats(q, t, threads);
        auto& entries = prof.per_time[t];
        for (long p = 0; p < static_cast<long>(st.mass.size()); ++p) {
            if (st.mass[p] > 0.0)
                entries.push_back({p, st.mass[p], st.numer[p] / st.mass[p]});
        }
    }
    return prof;
}

double best_gain(const GridCoupling& q, double N, int threads) {
    if (N < 0.0) throw std::invalid_argument("best_gain: negative bound");
    double a1 = 0.0;
    for (int t = 0; t + 1 < q.times(); ++t) {
        PrefixStats st = prefix_stats(q, t, threads);
        const double* numer = st.numer.data();
        a1 += kernels::blocked_sum(static_cast<long>(st.numer.size()), threads,
                                   [numer](long p) { return std::abs(numer[p]); });
    }
    return N * a1;
}

bool is_martingale(const GridCoupling& q, double tol, int threads) {
    return best_gain(q, 1.0, threads) <= tol;
}

double rho(const GridCoupling& q1, const GridCoupling& q2, int threads) {
    if (!(q1.grid() == q2.grid())) throw std::invalid_argument("rho: couplings on different grids");
    return std::abs(best_gain(q1, 1.0, threads) - best_gain(q2, 1.0, threads));
}

}  // namespace mot
