#pragma once

// Discrete d-dimensional trajectories X_0..X_N, stored flat row-major.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "roughwalk/linalg.hpp"

namespace roughwalk {

struct Path {
    int dim = 0;
    std::vector<double> values;  // (N+1) * dim, row-major

    Path() = default;
    Path(int d, int64_t steps) : dim(Vec::check_dim(d)), values(static_cast<size_t>(steps + 1) * d, 0.0) {
        if (d < 1) throw std::invalid_argument("Path: dim must be >= 1");
        if (steps < 0) throw std::invalid_argument("Path: negative length");
    }

    // number of steps N (values run 0..N)
    int64_t length() const { return static_cast<int64_t>(values.size()) / dim - 1; }

    const double* at(int64_t k) const { return values.data() + static_cast<size_t>(k) * dim; }
    double* at(int64_t k) { return values.data() + static_cast<size_t>(k) * dim; }

    Vec value(int64_t k) const {
        check_index(k);
        Vec v(dim);
        const double* p = at(k);
        for (int i = 0; i < dim; ++i) v[i] = p[i];
        return v;
    }

    void set(int64_t k, const Vec& v) {
        check_index(k);
        double* p = at(k);
        for (int i = 0; i < dim; ++i) p[i] = v[i];
    }

    // X_k - X_l
    Vec increment(int64_t l, int64_t k) const {
        check_index(l);
        check_index(k);
        Vec v(dim);
        const double* a = at(l);
        const double* b = at(k);
        for (int i = 0; i < dim; ++i) v[i] = b[i] - a[i];
        return v;
    }

    void check_index(int64_t k) const {
        if (k < 0 || k > length()) throw std::out_of_range("Path: index out of range");
    }

    void validate() const {
        if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("Path: dim out of range");
        if (values.size() % dim != 0 || values.empty()) throw std::invalid_argument("Path: bad value count");
        for (double v : values)
            if (!std::isfinite(v)) throw std::invalid_argument("Path: non-finite entry");
    }
};

}  // namespace roughwalk
