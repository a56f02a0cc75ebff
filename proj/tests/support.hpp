#pragma once

// shared helpers for the unit suites

#include <vector>

#include "roughwalk/path.hpp"
#include "roughwalk/path_lift.hpp"
#include "roughwalk/rng.hpp"

namespace testsupport {

using roughwalk::Mat;
using roughwalk::Path;
using roughwalk::Rng;
using roughwalk::Vec;

// nearest-neighbour lattice walk, steps +-e_i
inline Path lattice_path(Rng& rng, int d, int64_t steps) {
    Path p(d, steps);
    Vec x(d);
    for (int64_t k = 1; k <= steps; ++k) {
        const int axis = static_cast<int>(rng.next_below(static_cast<uint64_t>(d)));
        const double sign = rng.next_double() < 0.5 ? 1.0 : -1.0;
        x[axis] += sign;
        p.set(k, x);
    }
    return p;
}

// real-valued steps uniform in [-1, 1]^d
inline Path real_path(Rng& rng, int d, int64_t steps) {
    Path p(d, steps);
    Vec x(d);
    for (int64_t k = 1; k <= steps; ++k) {
        for (int c = 0; c < d; ++c) x[c] += 2.0 * rng.next_double() - 1.0;
        p.set(k, x);
    }
    return p;
}

// independently written defining sum for the level-2 lift (test oracle)
inline Mat istr_oracle(const Path& path, int64_t m, int64_t n) {
    Mat acc(path.dim);
    for (int64_t k = m + 1; k <= n; ++k) {
        const Vec left = path.increment(m, k - 1);
        const Vec step = path.increment(k - 1, k);
        acc += roughwalk::outer(left, step) + 0.5 * roughwalk::outer(step, step);
    }
    return acc;
}

inline Path path_from_steps(int d, const std::vector<Vec>& steps) {
    Path p(d, static_cast<int64_t>(steps.size()));
    Vec x(d);
    for (size_t k = 0; k < steps.size(); ++k) {
        x += steps[k];
        p.set(static_cast<int64_t>(k) + 1, x);
    }
    return p;
}

// unit square loop: e1, e2, -e1, -e2 (counterclockwise)
inline Path square_loop_ccw() {
    const Vec e1 = Vec::unit(2, 0);
    const Vec e2 = Vec::unit(2, 1);
    return path_from_steps(2, {e1, e2, -e1, -e2});
}

inline Path square_loop_cw() {
    const Vec e1 = Vec::unit(2, 0);
    const Vec e2 = Vec::unit(2, 1);
    return path_from_steps(2, {e2, e1, -e2, -e1});
}

}  // namespace testsupport
