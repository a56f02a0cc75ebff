// AVX2 kernel variants. This translation unit is compiled with -mavx2 on
// x86-64; callers must consult avx2_supported() before using the table.
//
// Bit-identity with the scalar kernels: per-lane arithmetic mirrors the
// scalar expression order exactly, pow() falls back to per-lane libm calls,
// and the width-4 reduction is a max, which is exact in IEEE arithmetic.

#include "roughwalk/kernels/kernels.hpp"

#if defined(__x86_64__) && defined(__AVX2__)

#include <immintrin.h>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace roughwalk::kernels {

namespace {

inline double weight_from_sq(double sq, double p) {
    if (p == 2.0) return sq;
    if (p == 1.0) return std::sqrt(sq);
    return std::pow(sq, 0.5 * p);
}

inline double hmax(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    __m128d m = _mm_max_pd(lo, hi);
    m = _mm_max_sd(m, _mm_unpackhi_pd(m, m));
    return _mm_cvtsd_f64(m);
}

// Turns a vector of squared norms into DP weights, matching weight_from_sq
// lane by lane.
inline __m256d weight_vec(__m256d sq, double p) {
    if (p == 2.0) return sq;
    if (p == 1.0) return _mm256_sqrt_pd(sq);
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, sq);
    lanes[0] = std::pow(lanes[0], 0.5 * p);
    lanes[1] = std::pow(lanes[1], 0.5 * p);
    lanes[2] = std::pow(lanes[2], 0.5 * p);
    lanes[3] = std::pow(lanes[3], 0.5 * p);
    return _mm256_load_pd(lanes);
}

double pvar_l1_avx2(const double* const* coords, int d, int64_t n, double p) {
    if (n < 2) return 0.0;
    std::vector<double> v(static_cast<size_t>(n), 0.0);
    for (int64_t j = 1; j < n; ++j) {
        __m256d vbest = _mm256_set1_pd(-std::numeric_limits<double>::infinity());
        const int64_t nblk = j & ~int64_t{3};
        for (int64_t i = 0; i < nblk; i += 4) {
            __m256d sq = _mm256_setzero_pd();
            for (int c = 0; c < d; ++c) {
                const __m256d xj = _mm256_set1_pd(coords[c][j]);
                const __m256d dx = _mm256_sub_pd(xj, _mm256_loadu_pd(coords[c] + i));
                sq = _mm256_add_pd(sq, _mm256_mul_pd(dx, dx));
            }
            const __m256d cand = _mm256_add_pd(_mm256_loadu_pd(v.data() + i), weight_vec(sq, p));
            vbest = _mm256_max_pd(vbest, cand);
        }
        double best = hmax(vbest);
        for (int64_t i = nblk; i < j; ++i) {
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

double pvar_l2_avx2(const double* const* prefix, const double* const* coords, int d, int64_t n,
                    double q) {
    if (n < 2) return 0.0;
    const int dd = d * d;
    std::vector<double> v(static_cast<size_t>(n), 0.0);
    for (int64_t j = 1; j < n; ++j) {
        __m256d vbest = _mm256_set1_pd(-std::numeric_limits<double>::infinity());
        const int64_t nblk = j & ~int64_t{3};
        for (int64_t i = 0; i < nblk; i += 4) {
            __m256d sq = _mm256_setzero_pd();
            for (int e = 0; e < dd; ++e) {
                const int a = e / d;
                const int b = e % d;
                const __m256d pj = _mm256_set1_pd(prefix[e][j]);
                const __m256d pi = _mm256_loadu_pd(prefix[e] + i);
                const __m256d xbj = _mm256_set1_pd(coords[b][j]);
                const __m256d xbi = _mm256_loadu_pd(coords[b] + i);
                const __m256d xai = _mm256_loadu_pd(coords[a] + i);
                const __m256d inc = _mm256_sub_pd(xbj, xbi);
                const __m256d qe =
                    _mm256_sub_pd(_mm256_sub_pd(pj, pi), _mm256_mul_pd(xai, inc));
                sq = _mm256_add_pd(sq, _mm256_mul_pd(qe, qe));
            }
            const __m256d cand = _mm256_add_pd(_mm256_loadu_pd(v.data() + i), weight_vec(sq, q));
            vbest = _mm256_max_pd(vbest, cand);
        }
        double best = hmax(vbest);
        for (int64_t i = nblk; i < j; ++i) {
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

void lift_accum_d2_avx2(const double* values, int64_t nsteps, double* acc4, double* prefix_out) {
    __m256d acc = _mm256_loadu_pd(acc4);
    if (prefix_out) _mm256_storeu_pd(prefix_out, acc);
    const __m128d x0 = _mm_loadu_pd(values);
    const __m128d half = _mm_set1_pd(0.5);
    for (int64_t k = 1; k <= nsteps; ++k) {
        const __m128d xk = _mm_loadu_pd(values + 2 * k);
        const __m128d xkm1 = _mm_loadu_pd(values + 2 * k - 2);
        const __m128d s = _mm_sub_pd(xk, xkm1);
        const __m128d a = _mm_add_pd(_mm_sub_pd(xkm1, x0), _mm_mul_pd(half, s));
        // lanes [a0,a0,a1,a1] and [s0,s1,s0,s1] give the row-major outer product
        const __m256d av = _mm256_insertf128_pd(_mm256_castpd128_pd256(_mm_unpacklo_pd(a, a)),
                                                _mm_unpackhi_pd(a, a), 1);
        const __m256d sv = _mm256_insertf128_pd(_mm256_castpd128_pd256(s), s, 1);
        acc = _mm256_add_pd(acc, _mm256_mul_pd(av, sv));
        if (prefix_out) _mm256_storeu_pd(prefix_out + 4 * k, acc);
    }
    _mm256_storeu_pd(acc4, acc);
}

}  // namespace

const KernelTable& avx2_kernels() {
    static const KernelTable table{pvar_l1_avx2, pvar_l2_avx2, lift_accum_d2_avx2, "avx2"};
    return table;
}

}  // namespace roughwalk::kernels

#else  // non-x86 or AVX2 not enabled for this TU

#include <stdexcept>

namespace roughwalk::kernels {

const KernelTable& avx2_kernels() {
    throw std::runtime_error("avx2 kernels not available in this build");
}

}  // namespace roughwalk::kernels

#endif
