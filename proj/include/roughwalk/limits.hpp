#pragma once

// Estimators for the limit objects of the invariance principle (Brownian
// covariance, area-anomaly matrix, renewal rate) and seeded Monte Carlo
// checks of the scaling limits.
//
// Distributional convergence is not directly testable; reports check moment
// and mean functionals against targets with CLT-based standard-error bands
// (pass = |z| <= 3), plus a stochastic-boundedness probe for the rough-norm
// tightness. Ratio estimators use the delta method: blocks are i.i.d., so
// no dependence correction enters. All trial aggregation is sequential in
// trial index over pre-computed per-trial results, making every report a
// pure function of (config, master seed) for any worker count.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "roughwalk/linalg.hpp"
#include "roughwalk/regen.hpp"
#include "roughwalk/variation.hpp"

namespace roughwalk {

struct MetricRow {
    std::string name;
    double estimate = 0.0;
    double se = 0.0;
    double target = 0.0;
    double z = 0.0;
    bool has_target = false;
    bool pass = true;
};

struct McReport {
    std::string title;
    std::vector<MetricRow> rows;
    bool all_pass = true;

    void add(MetricRow row) {
        all_pass = all_pass && row.pass;
        rows.push_back(std::move(row));
    }
};

// Per-entry ratio estimate mean(numerator)/mean(T) over generic blocks,
// with delta-method standard errors.
struct MatrixEstimate {
    Mat value;
    Mat se;
    int64_t blocks = 0;
};

struct ScalarEstimate {
    double value = 0.0;
    double se = 0.0;
};

// E[Y ⊗ Y]/E[T]; symmetric by construction, PSD up to noise.
MatrixEstimate estimate_covariance(std::span<const BlockStats> generic);

// E[A]/E[T]; antisymmetric exactly.
MatrixEstimate estimate_gamma(std::span<const BlockStats> generic);

// 1/E[T] with delta-method SE.
ScalarEstimate estimate_beta(std::span<const BlockStats> generic);

struct LimitEstimates {
    MatrixEstimate sigma;
    MatrixEstimate gamma;
    ScalarEstimate beta;
    int64_t block_count = 0;
};

LimitEstimates estimate_limits(std::span<const BlockStats> generic);

// Partial-sum curve (1/n) sum_{u <= kappa(nt)} A_u on the given time grid;
// approaches Gamma * t. Grid times beyond the horizon are rejected.
std::vector<Mat> anomaly_lln_curve(const RegenTrajectory& traj, std::span<const double> tgrid, int64_t n);

// kappa(nt)/(nt) on the grid (0 at t = 0); approaches 1/E[T].
std::vector<double> renewal_lln_curve(const RegenTrajectory& traj, std::span<const double> tgrid,
                                      int64_t n);

// One trial's rescaled lift endpoint: x = X^{(n)}_1, second = level2(0, 1).
struct LiftEndpoint {
    Vec x;
    Mat second;
};

std::vector<LiftEndpoint> mc_lift_endpoints(const GeneratorConfig& gen, int64_t n, int64_t trials,
                                            uint64_t master_seed, int workers);

// First-level check: mean ~ 0, empirical covariance vs target, fourth-moment
// Gaussianity ratios on a direction panel (skipping directions the target
// leaves degenerate).
McReport mc_marginal_test(const GeneratorConfig& gen, int64_t n, int64_t trials, uint64_t master_seed,
                          int workers, const Mat& sigma_target);

// Second-level check: mean antisymmetric part of the endpoint lift vs the
// area-anomaly target (the Brownian area is centered), plus its spread.
McReport mc_area_test(const GeneratorConfig& gen, int64_t n, int64_t trials, uint64_t master_seed,
                      int workers, const Mat& gamma_target);

struct TightnessRow {
    int64_t n = 0;
    double median = 0.0;
    double q95 = 0.0;
    double upper_median = 0.0;  // equals median in exact mode
    PvarMode mode = PvarMode::dp_exact;
};

struct TightnessReport {
    std::vector<TightnessRow> rows;
    double median_ratio = 0.0;  // max median / min median over the n list
    double spread_tol = 0.25;
    bool bounded = false;  // median_ratio - 1 < spread_tol
};

// Median / 95%-quantile of the rough norm across trials per n; stochastic
// boundedness proxy: no systematic growth of the median in n.
TightnessReport pvar_tightness_probe(const GeneratorConfig& gen, std::span<const int64_t> ns, double p,
                                     int64_t trials, uint64_t master_seed, int workers,
                                     double spread_tol = 0.25);

// Random-walk bundle: marginal + area (target 0) + the Ito/Stratonovich
// diagonal correction (mean diagonal of the endpoint lift vs E[Y ⊗ Y]/2)
// + a small tightness probe.
McReport donsker_check(const FiniteLaw& step_law, int64_t n, int64_t trials, uint64_t master_seed,
                       int workers);

}  // namespace roughwalk
