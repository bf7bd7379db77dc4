#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace mot::kernels {

// Data-parallel inner loops shared by the LP core and the tensor sweeps.
// Every kernel is deterministic: results are bit-identical for any thread
// count. Reductions use fixed-size blocks folded in index order; elementwise
// row operations are independent per row. `threads <= 1` runs the plain loop.
//
// mot::kernels::serial holds straightforward reference implementations kept
// for testing and benchmarking.

inline constexpr long kSumBlock = 4096;

// Sum of f(i) for i in [0, n), accumulated per fixed block and folded in
// block order.
template <class F>
double blocked_sum(long n, int threads, F&& f) {
    if (n <= 0) return 0.0;
    long nblocks = (n + kSumBlock - 1) / kSumBlock;
    if (threads <= 1 || nblocks == 1) {
        double total = 0.0;
        for (long blk = 0; blk < nblocks; ++blk) {
            long lo = blk * kSumBlock, hi = std::min(n, lo + kSumBlock);
            double part = 0.0;
            for (long i = lo; i < hi; ++i) part += f(i);
            total += part;
        }
        return total;
    }
    std::vector<double> parts(nblocks);
#pragma omp parallel for schedule(static) num_threads(threads)
    for (long blk = 0; blk < nblocks; ++blk) {
        long lo = blk * kSumBlock, hi = std::min(n, lo + kSumBlock);
        double part = 0.0;
        for (long i = lo; i < hi; ++i) part += f(i);
        parts[blk] = part;
    }
    double total = 0.0;
    for (double p : parts) total += p;
    return total;
}

double sum(const double* v, long n, int threads);
double dot(const double* a, const double* b, long n, int threads);

// In tab (m rows x width, row-major), subtracts multiples of the (already
// normalized) pivot row from every other row so that column `col` becomes a
// unit column. Entries with |factor| <= skip_tol are left untouched.
void eliminate_column(double* tab, long m, long width, long pivot_row, long col, int threads);

// Index of the most negative v[j] below -threshold among eligible columns,
// smallest index on ties; -1 when none qualifies.
long argmin_below(const double* v, long n, double threshold, const uint8_t* eligible,
                  int threads);

// Smallest eligible index with v[j] < -threshold; -1 when none.
long first_below(const double* v, long n, double threshold, const uint8_t* eligible);

// Minimum of v[i] over [0, n) with the attaining index (smallest on ties).
struct MinResult {
    double value;
    long index;
};
MinResult min_with_index(const double* v, long n, int threads);

namespace serial {
double sum(const double* v, long n);
double dot(const double* a, const double* b, long n);
void eliminate_column(double* tab, long m, long width, long pivot_row, long col);
long argmin_below(const double* v, long n, double threshold, const uint8_t* eligible);
MinResult min_with_index(const double* v, long n);
}  // namespace serial

}  // namespace mot::kernels
