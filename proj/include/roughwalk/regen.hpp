#pragma once

// Generators for processes with delayed regenerative increments and the
// per-block statistics (T, Y, A, Xi) the limit estimators consume.
//
// Regeneration times are produced by construction (block boundaries or
// returns to an anchor state), never detected statistically. Markov-chain
// functionals are centered analytically through first-passage linear
// solves, so block increments have mean zero to solver precision.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "roughwalk/linalg.hpp"
#include "roughwalk/path.hpp"
#include "roughwalk/rng.hpp"

namespace roughwalk {

struct RegenTrajectory {
    Path path;
    std::vector<int64_t> tau;  // tau[0] = 0 < tau[1] < ... <= path.length()

    int64_t complete_blocks() const { return static_cast<int64_t>(tau.size()) - 1; }
    void validate() const;
};

struct BlockStats {
    int64_t length = 0;  // T_k
    Vec increment;       // Y_k
    Mat area;            // A_k, antisymmetric
    Vec sup_abs;         // Xi_k, coordinatewise sup of |increments from tau_k|
};

// Finite-support law on R^d.
struct FiniteLaw {
    std::vector<double> prob;
    std::vector<Vec> atom;

    int dim() const { return atom.empty() ? 0 : atom.front().dim(); }
    Vec mean() const;
    Mat second_moment() const;  // E[xi ⊗ xi]
    void validate() const;
    void require_centered(double tol = 1e-12) const;
};

struct MarkovChainSpec {
    std::vector<std::vector<double>> transition;  // row-stochastic
    std::vector<Vec> f;                           // state -> R^d
    int anchor = 0;

    int state_count() const { return static_cast<int>(transition.size()); }
    int dim() const { return f.empty() ? 0 : f.front().dim(); }
    void validate() const;  // stochastic rows, irreducibility, anchor range
};

// Analytic centering data for returns to the anchor.
struct FirstPassage {
    double expected_return_time = 0.0;  // E[T_x^+]
    Vec expected_cycle_reward;          // E[sum of f over one return cycle]
    Vec centering;                      // reward / time
};

FirstPassage solve_first_passage(const MarkovChainSpec& spec);
std::vector<double> stationary_distribution(const MarkovChainSpec& spec);

// Random walk with i.i.d. centered steps; tau_k = k. The optional delay law
// replaces the first step only and need not be centered.
RegenTrajectory gen_delayed_rw(const FiniteLaw& step_law, const std::optional<FiniteLaw>& delay_law,
                               int64_t n, uint64_t seed);

// Additive functional of a finite irreducible chain started at the anchor,
// centered analytically; regenerations at returns to the anchor.
RegenTrajectory gen_markov_additive(const MarkovChainSpec& spec, int64_t n, uint64_t seed);

// Unit square loops in R^2, counterclockwise with probability p_ccw
// (T = 4, Y = 0); with extra_step a uniform +-e_i step is appended
// (T = 5, Y uniform on the four unit steps).
RegenTrajectory gen_rotor(double p_ccw, bool extra_step, int64_t n, uint64_t seed);

// Lattice walk whose step law depends on (first coordinate mod L);
// regenerations at returns of the residue to 0, centered via the embedded
// residue chain.
RegenTrajectory gen_periodic_env_rw(const std::vector<FiniteLaw>& profile, int64_t n, uint64_t seed);

// X_k = k e_1. Non-centered; negative control for the tightness probe.
RegenTrajectory gen_linear_drift(int dim, int64_t n);

std::vector<BlockStats> block_stats(const RegenTrajectory& traj);

// Blocks 1.. (the delay block k = 0 dropped); estimators take this view.
inline std::span<const BlockStats> generic_blocks(std::span<const BlockStats> blocks) {
    return blocks.empty() ? blocks : blocks.subspan(1);
}

// Index k with tau_k <= u < tau_{k+1}; requires u < tau_K.
int64_t kappa(const RegenTrajectory& traj, double u);

// Z_k = sum_{l<k} Y_l (the process sampled at regeneration times, based at 0).
Path skeleton_walk(const RegenTrajectory& traj);

struct AssumptionRow {
    int exponent = 0;     // moment exponent on Xi^i: 0 or 2
    int coordinate = -1;  // -1 for the exponent-0 row
    bool delay_block = false;
    double estimate = 0.0;
    double se = 0.0;  // NaN for single-sample (delay) rows
    bool zero_flag = false;
};

struct AssumptionReport {
    std::vector<AssumptionRow> rows;
    int64_t generic_count = 0;
    bool any_zero = false;  // some coordinate is degenerate
};

AssumptionReport assumption_report(std::span<const BlockStats> blocks);

// Tagged generator choice as it appears in experiment configs.
struct GeneratorConfig {
    enum class Kind { delayed_rw, markov_additive, rotor, periodic_env, linear_drift };

    Kind kind = Kind::rotor;
    FiniteLaw step_law;
    std::optional<FiniteLaw> delay_law;
    MarkovChainSpec chain;
    double p_ccw = 1.0;
    bool extra_step = false;
    std::vector<FiniteLaw> profile;
    int drift_dim = 1;

    int dim() const;
    void validate() const;
    RegenTrajectory generate(int64_t n, uint64_t seed) const;
    std::string kind_name() const;
};

}  // namespace roughwalk
