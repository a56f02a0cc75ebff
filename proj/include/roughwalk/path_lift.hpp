#pragma once

// Discrete rough-path algebra at level 2.
//
// The second-order summands follow the convention
//   istr(M, N) = sum_{M < k <= N} ( X_{M,k-1} ⊗ X_{k-1,k} + 1/2 X_{k-1,k} ⊗ X_{k-1,k} ),
// i.e. the iterated Riemann-Stieltjes integral of the piecewise-linear
// interpolation. Its symmetric part is 1/2 X_{M,N}^{⊗2} and Chen's relation
// holds exactly on grid indices.

#include <cstdint>
#include <vector>

#include "roughwalk/linalg.hpp"
#include "roughwalk/path.hpp"

namespace roughwalk {

struct RegenTrajectory;

struct RoughIncrement {
    double s = 0.0;
    double t = 0.0;
    Vec level1;
    Mat level2;
};

// Level-2 lift over integer indices [M, N] by the defining sum. O((N-M) d^2).
Mat level2_stratonovich(const Path& path, int64_t M, int64_t N);

// Antisym(level2_stratonovich): the signed-area matrix over [M, N].
Mat antisym_area(const Path& path, int64_t M, int64_t N);

// Chen composition of adjacent increments: requires a.t == b.s.
RoughIncrement chen_combine(const RoughIncrement& a, const RoughIncrement& b);

// Rescaled piecewise-linear lift of a discrete path: level 1 is the linear
// interpolation of X_{floor(nt)}/sqrt(n); level 2 is the exact iterated
// integral of that interpolation (so Chen's relation holds for all real
// s < r < t, and grid evaluations equal istr/n).
class ScaledRoughPath {
public:
    ScaledRoughPath(Path base, int64_t n);

    int dim() const { return base_.dim; }
    int64_t scale() const { return n_; }
    const Path& base() const { return base_; }
    int64_t grid_count() const { return base_.length() + 1; }
    double horizon() const { return static_cast<double>(base_.length()) / static_cast<double>(n_); }

    // X^{(n)}_t
    Vec level1_at(double t) const;

    // rough increment over [s, t]
    RoughIncrement eval(double s, double t) const;

    // unscaled level-2 lift over integer indices, O(1) from the prefix cache
    Mat istr(int64_t M, int64_t N) const;

    // prefix cache row k = istr(0, k), d*d row-major doubles
    const double* prefix_row(int64_t k) const {
        return prefix2_.data() + static_cast<size_t>(k) * dim() * dim();
    }

private:
    Path base_;
    int64_t n_;
    std::vector<double> prefix2_;  // (N+1) rows of d*d

    double clamp_time(double t) const;
    Vec level1_unscaled(double u) const;  // interpolated X at continuous index u
};

// Chen residual of the scaled lift at s < r < t; zero up to rounding for
// every lift this module produces.
Mat chen_defect(const ScaledRoughPath& srp, double s, double r, double t);
Mat chen_defect(const Path& path, int64_t n, double s, double r, double t);

// Residual of the block decomposition
//   istr(tau_l, tau_k)(X) = istr(l, k)(Z) + sum_{l < u <= k} antisym_area(tau_{u-1}, tau_u)
// where Z is the skeleton walk; zero up to rounding for every regenerative
// trajectory.
Mat decomposition_defect(const RegenTrajectory& traj, int64_t l, int64_t k);

}  // namespace roughwalk
