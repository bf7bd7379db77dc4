#include "mot/kernels.hpp"

#include <cmath>
#include <limits>

namespace mot::kernels {

double sum(const double* v, long n, int threads) {
    return blocked_sum(n, threads, [&](long i) { return v[i]; });
}

double dot(const double* a, const double* b, long n, int threads) {
    return blocked_sum(n, threads, [&](long i) { return a[i] * b[i]; });
}

void eliminate_column(double* tab, long m, long width, long pivot_row, long col, int threads) {
    const double* prow = tab + pivot_row * width;
    if (threads <= 1) {
        serial::eliminate_column(tab, m, width, pivot_row, col);
        return;
    }
#pragma omp parallel for schedule(static) num_threads(threads)
    for (long r = 0; r < m; ++r) {
        if (r == pivot_row) continue;
        double* row = tab + r * width;
        double f = row[col];
        if (f == 0.0) continue;
        for (long j = 0; j < width; ++j) row[j] -= f * prow[j];
        row[col] = 0.0;
    }
}

long argmin_below(const double* v, long n, double threshold, const uint8_t* eligible,
                  int threads) {
    if (threads <= 1) return serial::argmin_below(v, n, threshold, eligible);
    long best_idx = -1;
    double best_val = -threshold;
#pragma omp parallel num_threads(threads)
    {
        long loc_idx = -1;
        double loc_val = -threshold;
#pragma omp for schedule(static) nowait
        for (long j = 0; j < n; ++j) {
            if (eligible && !eligible[j]) continue;
            double z = v[j];
            if (z < loc_val || (z == loc_val && loc_idx != -1 && j < loc_idx)) {
                loc_val = z;
                loc_idx = j;
            }
        }
#pragma omp critical
        {
            if (loc_idx != -1 &&
                (best_idx == -1 || loc_val < best_val ||
                 (loc_val == best_val && loc_idx < best_idx))) {
                best_val = loc_val;
                best_idx = loc_idx;
            }
        }
    }
    return best_idx;
}

long first_below(const double* v, long n, double threshold, const uint8_t* eligible) {
    for (long j = 0; j < n; ++j) {
        if (eligible && !eligible[j]) continue;
        if (v[j] < -threshold) return j;
    }
    return -1;
}

MinResult min_with_index(const double* v, long n, int threads) {
    if (threads <= 1) return serial::min_with_index(v, n);
    MinResult best{std::numeric_limits<double>::infinity(), -1};
#pragma omp parallel num_threads(threads)
    {
        MinResult loc{std::numeric_limits<double>::infinity(), -1};
#pragma omp for schedule(static) nowait
        for (long i = 0; i < n; ++i) {
            if (v[i] < loc.value || (v[i] == loc.value && i < loc.index)) {
                loc.value = v[i];
                loc.index = i;
            }
        }
#pragma omp critical
        {
            if (loc.index != -1 && (best.index == -1 || loc.value < best.value ||
                                    (loc.value == best.value && loc.index < best.index))) {
                best = loc;
            }
        }
    }
    return best;
}

namespace serial {

double sum(const double* v, long n) {
    double s = 0.0;
    for (long i = 0; i < n; ++i) s += v[i];
    return s;
}

double dot(const double* a, const double* b, long n) {
    double s = 0.0;
    for (long i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

void eliminate_column(double* tab, long m, long width, long pivot_row, long col) {
    const double* prow = tab + pivot_row * width;
    for (long r = 0; r < m; ++r) {
        if (r == pivot_row) continue;
        double* row = tab + r * width;
        double f = row[col];
        if (f == 0.0) continue;
        for (long j = 0; j < width; ++j) row[j] -= f * prow[j];
        row[col] = 0.0;
    }
}

long argmin_below(const double* v, long n, double threshold, const uint8_t* eligible) {
    long best_idx = -1;
    double best_val = -threshold;
    for (long j = 0; j < n; ++j) {
        if (eligible && !eligible[j]) continue;
        if (v[j] < best_val) {
            best_val = v[j];
            best_idx = j;
        }
    }
    return best_idx;
}

MinResult min_with_index(const double* v, long n) {
    MinResult best{std::numeric_limits<double>::infinity(), -1};
    for (long i = 0; i < n; ++i) {
        if (v[i] < best.value) {
            best.value = v[i];
            best.index = i;
        }
    }
    return best;
}

}  // namespace serial

}  // namespace mot::kernels
