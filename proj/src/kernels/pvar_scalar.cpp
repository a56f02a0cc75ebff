// Scalar reference kernels. The SIMD variants must match these bit for bit;
// keep the arithmetic order here authoritative.

#include <cmath>
#include <limits>
#include <vector>

#include "roughwalk/kernels/kernels.hpp"

namespace roughwalk::kernels {

namespace {

inline double weight_from_sq(double sq, double p) {
    if (p == 2.0) return sq;
    if (p == 1.0) return std::sqrt(sq);
    return std::pow(sq, 0.5 * p);
}

double pvar_l1_scalar(const double* const* coords, int d, int64_t n, double p) {
    if (n < 2) return 0.0;
    std::vector<double> v(static_cast<size_t>(n), 0.0);
    for (int64_t j = 1; j < n; ++j) {
        double best = -std::numeric_limits<double>::infinity();
        for (int64_t i = 0; i < j; ++i) {
            double sq = 0.0;
            for (int c = 0; c < d; ++c) {
                const double dx = coords[c][j] - coords[c][i];
                sq += dx * dx;
            }
            const double cand = v[static_cast<size_t>(i)] + weight_from_sq(sq, p);
            if (cand > best) best = cand;
        }
        v[static_cast<size_t>(j)] = best;
    }
    return v[static_cast<size_t>(n - 1)];
}

double pvar_l2_scalar(const double* const* prefix, const double* const* coords, int d, int64_t n,
                      double q) {
    if (n < 2) return 0.0;
    const int dd = d * d;
    std::vector<double> v(static_cast<size_t>(n), 0.0);
    for (int64_t j = 1; j < n; ++j) {
        double best = -std::numeric_limits<double>::infinity();
        for (int64_t i = 0; i < j; ++i) {
            double sq = 0.0;
            for (int e = 0; e < dd; ++e) {
                const int a = e / d;
                const int b = e % d;
                const double inc = coords[b][j] - coords[b][i];
                const double qe = prefix[e][j] - prefix[e][i] - coords[a][i] * inc;
                sq += qe * qe;
            }
            const double cand = v[static_cast<size_t>(i)] + weight_from_sq(sq, q);
            if (cand > best) best = cand;
        }
        v[static_cast<size_t>(j)] = best;
    }
    return v[static_cast<size_t>(n - 1)];
}

void lift_accum_d2_scalar(const double* values, int64_t nsteps, double* acc4, double* prefix_out) {
    if (prefix_out) {
        prefix_out[0] = acc4[0];
        prefix_out[1] = acc4[1];
        prefix_out[2] = acc4[2];
        prefix_out[3] = acc4[3];
    }
    const double x00 = values[0];
    const double x01 = values[1];
    for (int64_t k = 1; k <= nsteps; ++k) {
        const double* xk = values + 2 * k;
        const double s0 = xk[0] - xk[-2];
        const double s1 = xk[1] - xk[-1];
        const double a0 = (xk[-2] - x00) + 0.5 * s0;
        const double a1 = (xk[-1] - x01) + 0.5 * s1;
        acc4[0] += a0 * s0;
        acc4[1] += a0 * s1;
        acc4[2] += a1 * s0;
        acc4[3] += a1 * s1;
        if (prefix_out) {
            double* row = prefix_out + 4 * k;
            row[0] = acc4[0];
            row[1] = acc4[1];
            row[2] = acc4[2];
            row[3] = acc4[3];
        }
    }
}

}  // namespace

const KernelTable& scalar_kernels() {
    static const KernelTable table{pvar_l1_scalar, pvar_l2_scalar, lift_accum_d2_scalar, "scalar"};
    return table;
}

}  // namespace roughwalk::kernels
