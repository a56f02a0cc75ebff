#pragma once

// Hot arithmetic loops, provided as scalar reference kernels plus AVX2
// variants selected at runtime. Both variants are required to produce
// bit-identical results: squared distances are accumulated coordinate by
// coordinate in one fixed order, pow() is evaluated per element with the
// same arguments in both paths, and the only vector-width reductions are
// max operations, which are exact. The build sets -ffp-contract=off so the
// compiler cannot break this contract with FMA contraction.

#include <cstdint>

namespace roughwalk::kernels {

enum class Isa { scalar, avx2 };

// Level-1 p-variation dynamic program over n sample points in SoA layout:
// coords[c][i] is coordinate c of sample i, c < d.
//   V(0) = 0,  V(j) = max_{i<j} V(i) + w(i,j),
//   w(i,j) = (sum_c (coords[c][j]-coords[c][i])^2)^(p/2).
// Returns V(n-1); the caller applies the final ^(1/p).
using PvarL1Fn = double (*)(const double* const* coords, int d, int64_t n, double p);

// Level-2 (q = p/2} analogue over a lift's grid values.
// prefix[e][i] holds entry e (= a*d + b, row-major) of level2(0, i);
// coords[c][i] holds level1 sample i relative to sample 0.
// Interval increments come from the Chen recovery
//   Q_e(i,j) = prefix[e][j] - prefix[e][i] - coords[a][i]*(coords[b][j]-coords[b][i]),
// and w(i,j) = (sum_e Q_e(i,j)^2)^(q/2)  (Frobenius norm to the q).
using PvarL2Fn = double (*)(const double* const* prefix, const double* const* coords, int d, int64_t n,
                            double q);

// Second-order prefix accumulation for d == 2 over values stored AoS
// (values[2k], values[2k+1] = X_k). Per step k = 1..nsteps:
//   a_c = (X_{k-1,c} - X_{0,c}) + 0.5*s_c,   s = X_k - X_{k-1}
//   acc_{cb} += a_c * s_b
// acc4 is the running row-major 2x2 accumulator (caller initialises);
// if prefix_out is non-null it receives 4*(nsteps+1) doubles, row k holding
// the accumulator state after step k (row 0 is zeroed).
using LiftAccumD2Fn = void (*)(const double* values, int64_t nsteps, double* acc4, double* prefix_out);

struct KernelTable {
    PvarL1Fn pvar_l1;
    PvarL2Fn pvar_l2;
    LiftAccumD2Fn lift_accum_d2;
    const char* isa_name;
};

const KernelTable& scalar_kernels();
const KernelTable& avx2_kernels();  // valid only if avx2_supported()

bool avx2_supported();

// Active table: AVX2 when the CPU has it, unless overridden by
// set_active_isa() or the ROUGHWALK_SIMD environment variable
// ("scalar" or "avx2").
const KernelTable& active_kernels();
void set_active_isa(Isa isa);
Isa active_isa();

}  // namespace roughwalk::kernels
