#include "roughwalk/variation.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "roughwalk/kernels/kernels.hpp"

namespace roughwalk {

namespace {

// max over grid partitions of sum of weights, with arbitrary weight(i, j)
template <class WeightFn>
double dp_max_partition(int64_t n, WeightFn&& weight) {
    std::vector<double> v(static_cast<size_t>(n), 0.0);
    for (int64_t j = 1; j < n; ++j) {
        double best = -std::numeric_limits<double>::infinity();
        for (int64_t i = 0; i < j; ++i) {
            const double cand = v[static_cast<size_t>(i)] + weight(i, j);
            if (cand > best) best = cand;
        }
        v[static_cast<size_t>(j)] = best;
    }
    return v[static_cast<size_t>(n - 1)];
}

struct SoaBuffers {
    std::vector<double> storage;
    std::array<const double*, kMaxDim * kMaxDim> ptr{};
};

// level-1 coordinates of the samples, one array per coordinate
SoaBuffers soa_from_samples(std::span<const Vec> samples) {
    const int d = samples.front().dim();
    const int64_t n = static_cast<int64_t>(samples.size());
    SoaBuffers out;
    out.storage.resize(static_cast<size_t>(d) * n);
    for (int c = 0; c < d; ++c) {
        double* dst = out.storage.data() + static_cast<size_t>(c) * n;
        for (int64_t k = 0; k < n; ++k) dst[k] = samples[static_cast<size_t>(k)][c];
        out.ptr[static_cast<size_t>(c)] = dst;
    }
    return out;
}

// scaled grid samples of a lift, based at sample 0: (X_k - X_0)/sqrt(n)
SoaBuffers soa_level1(const ScaledRoughPath& srp) {
    const int d = srp.dim();
    const int64_t n = srp.grid_count();
    const double inv_root = 1.0 / std::sqrt(static_cast<double>(srp.scale()));
    const Path& base = srp.base();
    const double* x0 = base.at(0);
    SoaBuffers out;
    out.storage.resize(static_cast<size_t>(d) * n);
    for (int c = 0; c < d; ++c) {
        double* dst = out.storage.data() + static_cast<size_t>(c) * n;
        for (int64_t k = 0; k < n; ++k) dst[k] = (base.at(k)[c] - x0[c]) * inv_root;
        out.ptr[static_cast<size_t>(c)] = dst;
    }
    return out;
}

// scaled level-2 prefix entries of a lift: istr(0, k)/n per matrix entry
SoaBuffers soa_level2(const ScaledRoughPath& srp) {
    const int dd = srp.dim() * srp.dim();
    const int64_t n = srp.grid_count();
    const double inv_n = 1.0 / static_cast<double>(srp.scale());
    SoaBuffers out;
    out.storage.resize(static_cast<size_t>(dd) * n);
    for (int e = 0; e < dd; ++e) {
        double* dst = out.storage.data() + static_cast<size_t>(e) * n;
        for (int64_t k = 0; k < n; ++k) dst[k] = srp.prefix_row(k)[e] * inv_n;
        out.ptr[static_cast<size_t>(e)] = dst;
    }
    return out;
}

void check_exponent_l1(double p, bool allow_low) {
    if (!(p > 0.0)) throw std::invalid_argument("p-variation: exponent must be positive");
    if (p < 1.0 && !allow_low)
        throw std::invalid_argument(
            "p-variation: p < 1 needs partitions off the sample grid; pass the diagnostics flag to force");
}

void check_exponent_l2(double q, bool allow_low) {
    if (!(q > 0.0)) throw std::invalid_argument("p-variation: exponent must be positive");
    if (q <= 1.0 && !allow_low)
        throw std::invalid_argument(
            "level-2 variation: exponent must exceed 1; pass the diagnostics flag to force");
}

}  // namespace

double pvar_level1(std::span<const Vec> samples, double p, bool allow_low_exponent) {
    if (samples.size() < 2) throw std::invalid_argument("pvar_level1: need at least 2 samples");
    check_exponent_l1(p, allow_low_exponent);
    const SoaBuffers soa = soa_from_samples(samples);
    const double sum = kernels::active_kernels().pvar_l1(soa.ptr.data(), samples.front().dim(),
                                                         static_cast<int64_t>(samples.size()), p);
    return std::pow(sum, 1.0 / p);
}

double pvar_bruteforce(std::span<const Vec> samples, double p) {
    const int64_t n = static_cast<int64_t>(samples.size());
    if (n < 2) throw std::invalid_argument("pvar_bruteforce: need at least 2 samples");
    if (n > 12) throw std::invalid_argument("pvar_bruteforce: too many samples (max 12)");
    if (!(p > 0.0)) throw std::invalid_argument("pvar_bruteforce: exponent must be positive");

    const int interior = static_cast<int>(n - 2);
    double best = 0.0;
    for (uint32_t mask = 0; mask < (1u << interior); ++mask) {
        double sum = 0.0;
        int64_t prev = 0;
        for (int b = 0; b <= interior; ++b) {
            const int64_t next = (b == interior) ? n - 1 : (mask & (1u << b)) ? b + 1 : -1;
            if (next < 0) continue;
            sum += std::pow((samples[static_cast<size_t>(next)] - samples[static_cast<size_t>(prev)]).norm(), p);
            prev = next;
        }
        if (sum > best) best = sum;
    }
    return std::pow(best, 1.0 / p);
}

double pvar_level2(const ScaledRoughPath& srp, double p_half, bool allow_low_exponent) {
    check_exponent_l2(p_half, allow_low_exponent);
    if (srp.grid_count() < 2) throw std::invalid_argument("pvar_level2: need at least 2 grid points");
    const SoaBuffers pre = soa_level2(srp);
    const SoaBuffers coords = soa_level1(srp);
    const double sum = kernels::active_kernels().pvar_l2(pre.ptr.data(), coords.ptr.data(), srp.dim(),
                                                         srp.grid_count(), p_half);
    return std::pow(sum, 1.0 / p_half);
}

double pvar_level2_bruteforce(const ScaledRoughPath& srp, double p_half) {
    const int64_t n = srp.grid_count();
    if (n < 2) throw std::invalid_argument("pvar_level2_bruteforce: need at least 2 grid points");
    if (n > 10) throw std::invalid_argument("pvar_level2_bruteforce: too many grid points (max 10)");
    if (!(p_half > 0.0)) throw std::invalid_argument("pvar_level2_bruteforce: exponent must be positive");

    const double inv_n = 1.0 / static_cast<double>(srp.scale());
    auto weight = [&](int64_t i, int64_t j) {
        const Mat m = inv_n * level2_stratonovich(srp.base(), i, j);
        return std::pow(m.frobenius(), p_half);
    };

    const int interior = static_cast<int>(n - 2);
    double best = 0.0;
    for (uint32_t mask = 0; mask < (1u << interior); ++mask) {
        double sum = 0.0;
        int64_t prev = 0;
        for (int b = 0; b <= interior; ++b) {
            const int64_t next = (b == interior) ? n - 1 : (mask & (1u << b)) ? b + 1 : -1;
            if (next < 0) continue;
            sum += weight(prev, next);
            prev = next;
        }
        if (sum > best) best = sum;
    }
    return std::pow(best, 1.0 / p_half);
}

double rough_norm(const ScaledRoughPath& srp, double p) {
    if (!(p > 2.0)) throw std::invalid_argument("rough_norm: p must exceed 2");
    const double x0 = srp.level1_at(0.0).norm();

    const SoaBuffers coords = soa_level1(srp);
    const SoaBuffers pre = soa_level2(srp);
    const auto& kt = kernels::active_kernels();
    const double l1 = std::pow(kt.pvar_l1(coords.ptr.data(), srp.dim(), srp.grid_count(), p), 1.0 / p);
    const double q = 0.5 * p;
    const double l2 = std::pow(kt.pvar_l2(pre.ptr.data(), coords.ptr.data(), srp.dim(), srp.grid_count(), q),
                               1.0 / q);
    return x0 + l1 + l2;
}

namespace {

// Blocked sandwich for n beyond the exact-DP budget. Cut points every
// block_size samples split the grid into blocks b with skeleton = the cut
// points themselves. With S1(range) the level-1 DP sum at exponent p and
// S2 the level-2 DP sum at exponent q = p/2:
//
//   lower^p = max( S1(skeleton), sum_b S1(b) )          (subset partitions)
//
//   upper^p = 3^(p-1) ( sum_b S1(b) + S1(skeleton) )
//
// since any increment splits into head + skeleton-increment + tail, heads
// and tails are disjoint within blocks and the middles form a skeleton
// partition. On level 2, Chen's relation splits an increment into the three
// range pieces plus two cross tensors, so with L(range) the level-1 DP sum
// at exponent 2q = p:
//
//   upper^q = 5^(q-1) ( 2 sum_b S2(b) + S2(skel)
//                       + (1 + 2^(2q-2)) sum_b L(b) + (1/2 + 2^(2q-2)) L(skel) )
//
// using |x ⊗ y| = |x||y|, AM-GM on the cross products and |a+b|^r <=
// 2^(r-1)(|a|^r + |b|^r). Both bounds are rigorous; the upper constants are
// not tight.
struct SandwichInput {
    const double* const* prefix;  // may be null (level-1 only)
    const double* const* coords;
    int d;
    int64_t n;
};

std::vector<int64_t> cut_points(int64_t n, int64_t block_size) {
    std::vector<int64_t> cuts{0};
    for (int64_t c = block_size; c < n - 1; c += block_size) cuts.push_back(c);
    cuts.push_back(n - 1);
    return cuts;
}

SoaBuffers gather(const double* const* src, int arrays, std::span<const int64_t> idx) {
    SoaBuffers out;
    out.storage.resize(static_cast<size_t>(arrays) * idx.size());
    for (int a = 0; a < arrays; ++a) {
        double* dst = out.storage.data() + static_cast<size_t>(a) * idx.size();
        for (size_t k = 0; k < idx.size(); ++k) dst[k] = src[a][idx[k]];
        out.ptr[static_cast<size_t>(a)] = dst;
    }
    return out;
}

PvarBounds sandwich_level1(const SandwichInput& in, double p, int64_t block_size) {
    const auto& kt = kernels::active_kernels();
    const std::vector<int64_t> cuts = cut_points(in.n, block_size);

    double block_sum = 0.0;
    std::array<const double*, kMaxDim * kMaxDim> sub{};
    for (size_t b = 0; b + 1 < cuts.size(); ++b) {
        for (int c = 0; c < in.d; ++c) sub[static_cast<size_t>(c)] = in.coords[c] + cuts[b];
        block_sum += kt.pvar_l1(sub.data(), in.d, cuts[b + 1] - cuts[b] + 1, p);
    }
    const SoaBuffers skel = gather(in.coords, in.d, cuts);
    const double skel_sum = kt.pvar_l1(skel.ptr.data(), in.d, static_cast<int64_t>(cuts.size()), p);

    PvarBounds out;
    out.mode = PvarMode::blocked_sandwich;
    out.lower = std::pow(std::max(block_sum, skel_sum), 1.0 / p);
    out.upper = std::pow(std::pow(3.0, p - 1.0) * (block_sum + skel_sum), 1.0 / p);
    return out;
}

PvarBounds sandwich_level2(const SandwichInput& in, double q, int64_t block_size) {
    const auto& kt = kernels::active_kernels();
    const std::vector<int64_t> cuts = cut_points(in.n, block_size);
    const int dd = in.d * in.d;

    double s2_blocks = 0.0;
    double l1_blocks = 0.0;
    std::array<const double*, kMaxDim * kMaxDim> subp{};
    std::array<const double*, kMaxDim> subc{};
    for (size_t b = 0; b + 1 < cuts.size(); ++b) {
        const int64_t len = cuts[b + 1] - cuts[b] + 1;
        for (int e = 0; e < dd; ++e) subp[static_cast<size_t>(e)] = in.prefix[e] + cuts[b];
        for (int c = 0; c < in.d; ++c) subc[static_cast<size_t>(c)] = in.coords[c] + cuts[b];
        s2_blocks += kt.pvar_l2(subp.data(), subc.data(), in.d, len, q);
        l1_blocks += kt.pvar_l1(subc.data(), in.d, len, 2.0 * q);
    }
    const SoaBuffers skelp = gather(in.prefix, dd, cuts);
    const SoaBuffers skelc = gather(in.coords, in.d, cuts);
    const int64_t ns = static_cast<int64_t>(cuts.size());
    const double s2_skel = kt.pvar_l2(skelp.ptr.data(), skelc.ptr.data(), in.d, ns, q);
    const double l1_skel = kt.pvar_l1(skelc.ptr.data(), in.d, ns, 2.0 * q);

    PvarBounds out;
    out.mode = PvarMode::blocked_sandwich;
    out.lower = std::pow(std::max(s2_blocks, s2_skel), 1.0 / q);
    const double cross = std::pow(2.0, 2.0 * q - 2.0);
    const double ub_q = std::pow(5.0, q - 1.0) *
                        (2.0 * s2_blocks + s2_skel + (1.0 + cross) * l1_blocks + (0.5 + cross) * l1_skel);
    out.upper = std::pow(ub_q, 1.0 / q);
    return out;
}

}  // namespace

PvarBounds rough_norm_bounded(const ScaledRoughPath& srp, double p, int64_t exact_limit,
                              int64_t block_size) {
    if (!(p > 2.0)) throw std::invalid_argument("rough_norm_bounded: p must exceed 2");
    if (srp.grid_count() <= exact_limit) {
        const double v = rough_norm(srp, p);
        return PvarBounds{v, v, PvarMode::dp_exact};
    }
    const double x0 = srp.level1_at(0.0).norm();
    const SoaBuffers coords = soa_level1(srp);
    const SoaBuffers pre = soa_level2(srp);
    const SandwichInput in{pre.ptr.data(), coords.ptr.data(), srp.dim(), srp.grid_count()};
    const PvarBounds l1 = sandwich_level1(in, p, block_size);
    const PvarBounds l2 = sandwich_level2(in, 0.5 * p, block_size);
    return PvarBounds{x0 + l1.lower + l2.lower, x0 + l1.upper + l2.upper, PvarMode::blocked_sandwich};
}

double rough_distance(const ScaledRoughPath& a, const ScaledRoughPath& b, double p) {
    if (a.dim() != b.dim()) throw std::invalid_argument("rough_distance: dimension mismatch");
    if (a.scale() != b.scale() || a.grid_count() != b.grid_count())
        throw std::invalid_argument("rough_distance: grid mismatch");
    if (!(p > 2.0)) throw std::invalid_argument("rough_distance: p must exceed 2");

    const int d = a.dim();
    const int64_t n = a.grid_count();
    const double q = 0.5 * p;

    const Vec x0_diff = a.level1_at(0.0) - b.level1_at(0.0);

    const SoaBuffers ca = soa_level1(a);
    const SoaBuffers cb = soa_level1(b);
    SoaBuffers diff;
    diff.storage.resize(static_cast<size_t>(d) * n);
    for (int c = 0; c < d; ++c) {
        double* dst = diff.storage.data() + static_cast<size_t>(c) * n;
        for (int64_t k = 0; k < n; ++k) dst[k] = ca.ptr[static_cast<size_t>(c)][k] - cb.ptr[static_cast<size_t>(c)][k];
        diff.ptr[static_cast<size_t>(c)] = dst;
    }
    const double l1 = std::pow(kernels::active_kernels().pvar_l1(diff.ptr.data(), d, n, p), 1.0 / p);

    const SoaBuffers pa = soa_level2(a);
    const SoaBuffers pb = soa_level2(b);
    auto entry = [&](const SoaBuffers& pre, const SoaBuffers& coords, int e, int64_t i, int64_t j) {
        const int ea = e / d;
        const int eb = e % d;
        const double inc = coords.ptr[static_cast<size_t>(eb)][j] - coords.ptr[static_cast<size_t>(eb)][i];
        return pre.ptr[static_cast<size_t>(e)][j] - pre.ptr[static_cast<size_t>(e)][i] -
               coords.ptr[static_cast<size_t>(ea)][i] * inc;
    };
    auto weight = [&](int64_t i, int64_t j) {
        double sq = 0.0;
        for (int e = 0; e < d * d; ++e) {
            const double qe = entry(pa, ca, e, i, j) - entry(pb, cb, e, i, j);
            sq += qe * qe;
        }
        return std::pow(sq, 0.5 * q);
    };
    const double l2 = std::pow(dp_max_partition(n, weight), 1.0 / q);

    return x0_diff.norm() + l1 + l2;
}

}  // namespace roughwalk
