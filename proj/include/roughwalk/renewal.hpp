#pragma once

// Discrete renewal theory on finite-support interarrival laws: the renewal
// sequence u, the convolution equation a_n = sum b_{n-m} u_m, its limit
// sum(b)/mu, and the size-biased block-moment limit
//   E[|Xi|^{⊗r} T^l at the block covering n] -> E[|Xi|^{⊗r} T^{l+1}] / E[T]
// with a recursion route and a Monte Carlo route against the closed form.

#include <cstdint>
#include <span>
#include <vector>

#include "roughwalk/linalg.hpp"
#include "roughwalk/rng.hpp"

namespace roughwalk {

struct RenewalModel {
    std::vector<double> pmf;  // pmf[j] = P(T = j); pmf[0] must be 0
    int lattice = 1;          // gcd of the support
    double mean = 0.0;        // sum j pmf[j]

    static RenewalModel from_pmf(std::span<const double> pmf);
    int64_t max_support() const { return static_cast<int64_t>(pmf.size()) - 1; }
};

// u_0..u_N with u_0 = 1, u_m = sum_{j>=1} p_j u_{m-j}; u_m is the chance a
// renewal falls exactly on m. Values are checked into [0, 1 + eps].
std::vector<double> renewal_sequence(const RenewalModel& model, int64_t N);

// a_0..a_N with a_n = sum_{m<=n} b_{n-m} u_m; b entries beyond b.size() are
// zero, negative entries are rejected.
std::vector<double> solve_renewal(const RenewalModel& model, std::span<const double> b, int64_t N);

struct KeyRenewalResult {
    double limit = 0.0;     // sum(b)/mu (lattice mode: d * lattice-restricted sum / mu)
    double tail_gap = 0.0;  // max |a_n - limit| over the last quarter of indices
};

// d > 1 requires lattice_mode; the limit is then taken along n ≡ 0 (mod d).
KeyRenewalResult key_renewal_limit(const RenewalModel& model, std::span<const double> b, int64_t N,
                                   bool lattice_mode = false);

// Exact joint law of (Xi, T) for one generic block.
struct BlockLawAtom {
    double prob = 0.0;
    int64_t length = 0;  // T
    Vec xi;              // coordinatewise sups, entries >= 0
};

struct BlockLaw {
    std::vector<BlockLawAtom> atoms;

    int dim() const { return atoms.empty() ? 0 : atoms.front().xi.dim(); }
    void validate() const;
    RenewalModel interarrival() const;  // marginal law of T
};

// Tensor of order r in {0, 1, 2}: scalar, vector or matrix payload.
struct TensorValue {
    int order = 0;
    double scalar = 0.0;
    Vec vec;
    Mat mat;

    double entry(int i, int j) const;  // (i,j) ignored as the order permits
};

// Closed form E[|Xi|^{⊗r} T^{l+1}] / E[T].
TensorValue size_biased_moment_limit(const BlockLaw& law, int r, int64_t ell);

// Forcing sequence b_n = E[|Xi|^{⊗r} T^l 1{T > n}] for one tensor entry.
std::vector<double> size_biased_forcing(const BlockLaw& law, int r, int64_t ell, int i, int j);

// Monte Carlo estimate of E[|Xi_{kappa(n)}|^{⊗r} T_{kappa(n)}^l] over
// simulated renewal trajectories, with per-entry standard errors. A distinct
// delay law may replace block 0; the limit is unaffected (the delay washes
// out), only finite-n values move.
struct McMoment {
    TensorValue estimate;
    TensorValue se;
    int64_t trajectories = 0;
};

McMoment mc_size_biased_moment(const BlockLaw& law, int r, int64_t ell, int64_t n,
                               int64_t trajectories, uint64_t seed, int workers,
                               const BlockLaw* delay = nullptr);

}  // namespace roughwalk
