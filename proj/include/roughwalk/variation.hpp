#pragma once

// p-variation norms over sample grids.
//
// For the piecewise-linear lifts produced by ScaledRoughPath, partitions
// through the sample points attain the supremum over all partitions when
// the level-1 exponent is >= 1 (and the level-2 exponent >= 1), so the
// dynamic program over grid indices computes the exact norm. Lower
// exponents are accepted only behind an explicit diagnostics flag, since
// the supremum may then live off the grid.
//
// Matrix norm on level 2 is Frobenius throughout.

#include <cstdint>
#include <span>

#include "roughwalk/linalg.hpp"
#include "roughwalk/path_lift.hpp"

namespace roughwalk {

enum class PvarMode { dp_exact, blocked_sandwich };

struct PvarBounds {
    double lower = 0.0;
    double upper = 0.0;
    PvarMode mode = PvarMode::dp_exact;
    double value() const { return lower; }  // reported statistic; exact when mode == dp_exact
};

// Exact p-variation of the sample sequence: (max over grid partitions of
// sum |X_j - X_i|^p)^(1/p). O(n^2) dynamic program.
double pvar_level1(std::span<const Vec> samples, double p, bool allow_low_exponent = false);

// Exhaustive enumeration over all 2^(n-2) grid partitions; n <= 12.
double pvar_bruteforce(std::span<const Vec> samples, double p);

// (p/2)-variation of the lift's second level over its grid.
double pvar_level2(const ScaledRoughPath& srp, double p_half, bool allow_low_exponent = false);

// Enumeration oracle for the level-2 DP; grid count <= 10. Interval values
// come from the defining sum, independent of the prefix-cache route.
double pvar_level2_bruteforce(const ScaledRoughPath& srp, double p_half);

// |X^{(n)}_0| + pvar_level1(grid samples, p) + pvar_level2(lift, p/2); p > 2.
double rough_norm(const ScaledRoughPath& srp, double p);

// rough_norm with a blocked lower/upper-bound sandwich above exact_limit
// grid points (see pvar_sandwich_* in the implementation for the bounds
// used); exact DP below the limit.
PvarBounds rough_norm_bounded(const ScaledRoughPath& srp, double p, int64_t exact_limit = 20000,
                              int64_t block_size = 2048);

// Distance from the norms of the increment-wise differences of two lifts on
// a common grid (same dimension, scale and grid count).
double rough_distance(const ScaledRoughPath& a, const ScaledRoughPath& b, double p);

}  // namespace roughwalk
