#include "roughwalk/path_lift.hpp"

#include <cmath>
#include <stdexcept>

#include "roughwalk/kernels/kernels.hpp"
#include "roughwalk/regen.hpp"

namespace roughwalk {

namespace {

void check_interval(const Path& path, int64_t M, int64_t N) {
    if (M < 0 || N < M || N > path.length())
        throw std::out_of_range("level2 lift: index interval out of range");
}

}  // namespace

Mat level2_stratonovich(const Path& path, int64_t M, int64_t N) {
    check_interval(path, M, N);
    const int d = path.dim;
    Mat acc(d);
    const double* x0 = path.at(M);
    for (int64_t k = M + 1; k <= N; ++k) {
        const double* prev = path.at(k - 1);
        const double* cur = path.at(k);
        for (int a = 0; a < d; ++a) {
            const double sa = cur[a] - prev[a];
            const double base = (prev[a] - x0[a]) + 0.5 * sa;
            for (int b = 0; b < d; ++b) acc(a, b) += base * (cur[b] - prev[b]);
        }
    }
    return acc;
}

Mat antisym_area(const Path& path, int64_t M, int64_t N) {
    return antisym_part(level2_stratonovich(path, M, N));
}

RoughIncrement chen_combine(const RoughIncrement& a, const RoughIncrement& b) {
    const double tol = 1e-12 * std::max(1.0, std::abs(a.t));
    if (std::abs(a.t - b.s) > tol)
        throw std::invalid_argument("chen_combine: junction mismatch");
    if (a.level1.dim() != b.level1.dim())
        throw std::invalid_argument("chen_combine: dimension mismatch");
    RoughIncrement out;
    out.s = a.s;
    out.t = b.t;
    out.level1 = a.level1 + b.level1;
    out.level2 = a.level2 + b.level2 + outer(a.level1, b.level1);
    return out;
}

ScaledRoughPath::ScaledRoughPath(Path base, int64_t n) : base_(std::move(base)), n_(n) {
    if (n_ < 1) throw std::invalid_argument("ScaledRoughPath: scale must be positive");
    base_.validate();
    const int d = base_.dim;
    const int64_t steps = base_.length();
    prefix2_.assign(static_cast<size_t>(steps + 1) * d * d, 0.0);
    if (d == 2) {
        double acc[4] = {0.0, 0.0, 0.0, 0.0};
        kernels::active_kernels().lift_accum_d2(base_.values.data(), steps, acc, prefix2_.data());
        return;
    }
    const double* x0 = base_.at(0);
    std::vector<double> acc(static_cast<size_t>(d) * d, 0.0);
    for (int64_t k = 1; k <= steps; ++k) {
        const double* prev = base_.at(k - 1);
        const double* cur = base_.at(k);
        for (int a = 0; a < d; ++a) {
            const double sa = cur[a] - prev[a];
            const double bse = (prev[a] - x0[a]) + 0.5 * sa;
            for (int b = 0; b < d; ++b) acc[static_cast<size_t>(a) * d + b] += bse * (cur[b] - prev[b]);
        }
        double* row = prefix2_.data() + static_cast<size_t>(k) * d * d;
        for (int e = 0; e < d * d; ++e) row[e] = acc[static_cast<size_t>(e)];
    }
}

Mat ScaledRoughPath::istr(int64_t M, int64_t N) const {
    check_interval(base_, M, N);
    const int d = dim();
    Mat out(d);
    const double* rn = prefix_row(N);
    const double* rm = prefix_row(M);
    const Vec xm = base_.increment(0, M);
    const Vec inc = base_.increment(M, N);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
            out(a, b) = rn[a * d + b] - rm[a * d + b] - xm[a] * inc[b];
    return out;
}

double ScaledRoughPath::clamp_time(double t) const {
    const double u = static_cast<double>(n_) * t;
    const double N = static_cast<double>(base_.length());
    if (t < 0.0 || u > N * (1.0 + 1e-12) + 1e-12)
        throw std::out_of_range("ScaledRoughPath: time beyond horizon");
    return std::min(u, N);
}

Vec ScaledRoughPath::level1_unscaled(double u) const {
    const int64_t k = static_cast<int64_t>(std::floor(u));
    if (k >= base_.length()) return base_.value(base_.length());
    const double frac = u - static_cast<double>(k);
    Vec v = base_.value(k);
    if (frac > 0.0) {
        const Vec step = base_.increment(k, k + 1);
        v += frac * step;
    }
    return v;
}

Vec ScaledRoughPath::level1_at(double t) const {
    const double u = clamp_time(t);
    return (1.0 / std::sqrt(static_cast<double>(n_))) * level1_unscaled(u);
}

RoughIncrement ScaledRoughPath::eval(double s, double t) const {
    if (s > t) throw std::invalid_argument("ScaledRoughPath::eval: s > t");
    const double us = clamp_time(s);
    const double ut = clamp_time(t);
    const int d = dim();
    const double root_n = std::sqrt(static_cast<double>(n_));

    RoughIncrement out;
    out.s = s;
    out.t = t;

    const int64_t k = static_cast<int64_t>(std::floor(us));
    const int64_t l = static_cast<int64_t>(std::floor(ut));
    const double fs = us - static_cast<double>(k);
    const double ft = ut - static_cast<double>(l);

    const Vec ws = level1_unscaled(us);
    const Vec wt = level1_unscaled(ut);
    out.level1 = (1.0 / root_n) * (wt - ws);

    Mat j(d);
    if (k == l || (l == k + 1 && ft == 0.0)) {
        // single linear segment
        const Vec v = wt - ws;
        j = 0.5 * outer(v, v);
    } else {
        const Vec step_k = base_.increment(k, k + 1);
        const Vec v1 = (1.0 - fs) * step_k;
        const Mat mid = istr(k + 1, l);
        const Vec xm = base_.increment(k + 1, l);
        Vec v3(d);
        if (ft > 0.0) v3 = ft * base_.increment(l, l + 1);
        j = 0.5 * outer(v1, v1) + mid + 0.5 * outer(v3, v3) + outer(xm, v3) + outer(v1, xm + v3);
    }
    out.level2 = (1.0 / static_cast<double>(n_)) * j;
    return out;
}

Mat chen_defect(const ScaledRoughPath& srp, double s, double r, double t) {
    if (!(s < r && r < t)) throw std::invalid_argument("chen_defect: need s < r < t");
    const RoughIncrement full = srp.eval(s, t);
    const RoughIncrement left = srp.eval(s, r);
    const RoughIncrement right = srp.eval(r, t);
    return full.level2 - left.level2 - right.level2 - outer(left.level1, right.level1);
}

Mat chen_defect(const Path& path, int64_t n, double s, double r, double t) {
    return chen_defect(ScaledRoughPath(path, n), s, r, t);
}

Mat decomposition_defect(const RegenTrajectory& traj, int64_t l, int64_t k) {
    const int64_t blocks = traj.complete_blocks();
    if (l < 0 || k <= l || k > blocks)
        throw std::out_of_range("decomposition_defect: block indices out of range");
    const Path& x = traj.path;
    const Path z = skeleton_walk(traj);
    Mat rhs = level2_stratonovich(z, l, k);
    for (int64_t u = l + 1; u <= k; ++u)
        rhs += antisym_area(x, traj.tau[static_cast<size_t>(u - 1)], traj.tau[static_cast<size_t>(u)]);
    const Mat lhs = level2_stratonovich(x, traj.tau[static_cast<size_t>(l)], traj.tau[static_cast<size_t>(k)]);
    return lhs - rhs;
}

}  // namespace roughwalk
