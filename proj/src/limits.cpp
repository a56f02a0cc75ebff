#include "roughwalk/limits.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "roughwalk/kernels/kernels.hpp"
#include "roughwalk/parallel.hpp"
#include "roughwalk/path_lift.hpp"

namespace roughwalk {

namespace {

constexpr double kZBand = 3.0;

MetricRow make_z_row(std::string name, double estimate, double se, double target) {
    MetricRow row;
    row.name = std::move(name);
    row.estimate = estimate;
    row.se = se;
    row.target = target;
    row.has_target = true;
    if (se > 0.0) {
        row.z = (estimate - target) / se;
        row.pass = std::abs(row.z) <= kZBand;
    } else {
        // deterministic statistic: demand exact agreement at double precision
        row.z = (estimate == target) ? 0.0 : std::numeric_limits<double>::infinity();
        row.pass = estimate == target;
    }
    return row;
}

MetricRow make_info_row(std::string name, double estimate) {
    MetricRow row;
    row.name = std::move(name);
    row.estimate = estimate;
    row.se = std::numeric_limits<double>::quiet_NaN();
    row.target = std::numeric_limits<double>::quiet_NaN();
    row.z = std::numeric_limits<double>::quiet_NaN();
    return row;
}

void check_generic_blocks(std::span<const BlockStats> generic) {
    if (generic.size() < 2)
        throw std::invalid_argument("limit estimators: need at least 2 generic blocks");
}

// ratio estimator per entry: mean(num)/mean(T), delta-method SE from the
// residuals num_k - R * T_k
template <class NumFn>
void ratio_estimate(std::span<const BlockStats> blocks, NumFn&& num, double& value, double& se) {
    const double count = static_cast<double>(blocks.size());
    KahanSum num_sum;
    KahanSum t_sum;
    for (const BlockStats& b : blocks) {
        num_sum.add(num(b));
        t_sum.add(static_cast<double>(b.length));
    }
    const double mean_t = t_sum.value() / count;
    const double r = (num_sum.value() / count) / mean_t;
    KahanSum resid_sq;
    for (const BlockStats& b : blocks) {
        const double e = num(b) - r * static_cast<double>(b.length);
        resid_sq.add(e * e);
    }
    const double var = resid_sq.value() / (count - 1.0);
    value = r;
    se = std::sqrt(var / count) / mean_t;
}

// largest block index k with tau_k <= u, clamped to the complete blocks
int64_t block_index_at(const RegenTrajectory& traj, double u) {
    const auto it = std::upper_bound(traj.tau.begin(), traj.tau.end(), u,
                                     [](double lhs, int64_t rhs) { return lhs < static_cast<double>(rhs); });
    return static_cast<int64_t>(it - traj.tau.begin()) - 1;
}

}  // namespace

MatrixEstimate estimate_covariance(std::span<const BlockStats> generic) {
    check_generic_blocks(generic);
    const int d = generic.front().increment.dim();
    MatrixEstimate out;
    out.value = Mat(d);
    out.se = Mat(d);
    out.blocks = static_cast<int64_t>(generic.size());
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            double v = 0.0, s = 0.0;
            ratio_estimate(generic, [i, j](const BlockStats& b) { return b.increment[i] * b.increment[j]; },
                           v, s);
            out.value(i, j) = v;
            out.se(i, j) = s;
        }
    }
    return out;
}

MatrixEstimate estimate_gamma(std::span<const BlockStats> generic) {
    check_generic_blocks(generic);
    const int d = generic.front().increment.dim();
    MatrixEstimate out;
    out.value = Mat(d);
    out.se = Mat(d);
    out.blocks = static_cast<int64_t>(generic.size());
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            double v = 0.0, s = 0.0;
            ratio_estimate(generic, [i, j](const BlockStats& b) { return b.area(i, j); }, v, s);
            out.value(i, j) = v;
            out.se(i, j) = s;
        }
    }
    return out;
}

ScalarEstimate estimate_beta(std::span<const BlockStats> generic) {
    check_generic_blocks(generic);
    const double count = static_cast<double>(generic.size());
    KahanSum t_sum;
    for (const BlockStats& b : generic) t_sum.add(static_cast<double>(b.length));
    const double mean_t = t_sum.value() / count;
    KahanSum ss;
    for (const BlockStats& b : generic) {
        const double dv = static_cast<double>(b.length) - mean_t;
        ss.add(dv * dv);
    }
    const double se_t = std::sqrt(ss.value() / (count - 1.0) / count);
    ScalarEstimate out;
    out.value = 1.0 / mean_t;
    out.se = se_t / (mean_t * mean_t);  // delta method for t -> 1/t
    return out;
}

LimitEstimates estimate_limits(std::span<const BlockStats> generic) {
    LimitEstimates out;
    out.sigma = estimate_covariance(generic);
    out.gamma = estimate_gamma(generic);
    out.beta = estimate_beta(generic);
    out.block_count = static_cast<int64_t>(generic.size());
    return out;
}

std::vector<Mat> anomaly_lln_curve(const RegenTrajectory& traj, std::span<const double> tgrid, int64_t n) {
    traj.validate();
    const int d = traj.path.dim;
    const int64_t blocks = traj.complete_blocks();

    // prefix sums of block areas
    std::vector<Mat> prefix(static_cast<size_t>(blocks) + 1, Mat(d));
    for (int64_t u = 1; u <= blocks; ++u)
        prefix[static_cast<size_t>(u)] =
            prefix[static_cast<size_t>(u - 1)] +
            antisym_area(traj.path, traj.tau[static_cast<size_t>(u - 1)], traj.tau[static_cast<size_t>(u)]);

    std::vector<Mat> out;
    out.reserve(tgrid.size());
    const double inv_n = 1.0 / static_cast<double>(n);
    for (double t : tgrid) {
        const double u = static_cast<double>(n) * t;
        if (t < 0.0 || u > static_cast<double>(traj.path.length()) + 1e-9)
            throw std::out_of_range("anomaly_lln_curve: grid beyond horizon");
        const int64_t k = std::min(block_index_at(traj, u), blocks);
        out.push_back(inv_n * prefix[static_cast<size_t>(k)]);
    }
    return out;
}

std::vector<double> renewal_lln_curve(const RegenTrajectory& traj, std::span<const double> tgrid,
                                      int64_t n) {
    traj.validate();
    std::vector<double> out;
    out.reserve(tgrid.size());
    for (double t : tgrid) {
        const double u = static_cast<double>(n) * t;
        if (t < 0.0 || u > static_cast<double>(traj.path.length()) + 1e-9)
            throw std::out_of_range("renewal_lln_curve: grid beyond horizon");
        if (u == 0.0) {
            out.push_back(0.0);
            continue;
        }
        const int64_t k = std::min(block_index_at(traj, u), traj.complete_blocks());
        out.push_back(static_cast<double>(k) / u);
    }
    return out;
}

std::vector<LiftEndpoint> mc_lift_endpoints(const GeneratorConfig& gen, int64_t n, int64_t trials,
                                            uint64_t master_seed, int workers) {
    gen.validate();
    if (n < 1 || trials < 1) throw std::invalid_argument("mc_lift_endpoints: need n >= 1 and trials >= 1");
    const int d = gen.dim();
    const double inv_n = 1.0 / static_cast<double>(n);
    const double inv_root = std::sqrt(inv_n);

    return run_trials<LiftEndpoint>(trials, workers, [&](int64_t trial) {
        const RegenTrajectory traj =
            gen.generate(n, derive_seed(master_seed, seed_stream::trajectory, static_cast<uint64_t>(trial)));
        LiftEndpoint out;
        out.x = inv_root * traj.path.increment(0, n);
        Mat acc(d);
        if (d == 2) {
            double a4[4] = {0.0, 0.0, 0.0, 0.0};
            kernels::active_kernels().lift_accum_d2(traj.path.values.data(), n, a4, nullptr);
            acc(0, 0) = a4[0];
            acc(0, 1) = a4[1];
            acc(1, 0) = a4[2];
            acc(1, 1) = a4[3];
        } else {
            acc = level2_stratonovich(traj.path, 0, n);
        }
        out.second = inv_n * acc;
        return out;
    });
}

namespace {

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
    double sd = 0.0;
};

template <class Fn>
MeanSe reduce_stat(std::span<const LiftEndpoint> pts, Fn&& f) {
    const double count = static_cast<double>(pts.size());
    KahanSum sum;
    for (const LiftEndpoint& p : pts) sum.add(f(p));
    MeanSe out;
    out.mean = sum.value() / count;
    KahanSum ss;
    for (const LiftEndpoint& p : pts) {
        const double dv = f(p) - out.mean;
        ss.add(dv * dv);
    }
    out.sd = count > 1 ? std::sqrt(ss.value() / (count - 1.0)) : 0.0;
    out.se = out.sd / std::sqrt(count);
    return out;
}

void marginal_rows(McReport& report, std::span<const LiftEndpoint> pts, const Mat& sigma_target) {
    const int d = pts.front().x.dim();
    const double count = static_cast<double>(pts.size());

    std::vector<double> means(static_cast<size_t>(d));
    for (int i = 0; i < d; ++i) {
        const MeanSe m = reduce_stat(pts, [i](const LiftEndpoint& p) { return p.x[i]; });
        means[static_cast<size_t>(i)] = m.mean;
        // degenerate coordinates have no CLT scale to test the mean against
        if (sigma_target(i, i) > 1e-12)
            report.add(make_z_row("mean_" + std::to_string(i + 1), m.mean, m.se, 0.0));
    }

    for (int i = 0; i < d; ++i) {
        for (int j = i; j < d; ++j) {
            const double mi = means[static_cast<size_t>(i)];
            const double mj = means[static_cast<size_t>(j)];
            KahanSum prod;
            for (const LiftEndpoint& p : pts) prod.add((p.x[i] - mi) * (p.x[j] - mj));
            const double cov = prod.value() / (count - 1.0);
            KahanSum ss;
            for (const LiftEndpoint& p : pts) {
                const double dv = (p.x[i] - mi) * (p.x[j] - mj) - cov;
                ss.add(dv * dv);
            }
            const double se = std::sqrt(ss.value() / (count - 1.0) / count);
            report.add(make_z_row("cov_" + std::to_string(i + 1) + std::to_string(j + 1), cov, se,
                                  sigma_target(i, j)));
        }
    }

    // fourth-moment Gaussianity panel: E[(v.x)^4] / (3 E[(v.x)^2]^2) ~ 1,
    // restricted to directions the target covariance does not annihilate
    std::vector<std::pair<std::string, Vec>> directions;
    for (int i = 0; i < d; ++i) directions.emplace_back("e" + std::to_string(i + 1), Vec::unit(d, i));
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) {
            Vec v = Vec::unit(d, i) + Vec::unit(d, j);
            v *= 1.0 / std::sqrt(2.0);
            directions.emplace_back("e" + std::to_string(i + 1) + "+e" + std::to_string(j + 1), v);
        }
    bool degenerate = false;
    for (const auto& [label, v] : directions) {
        double target_var = 0.0;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) target_var += v[i] * sigma_target(i, j) * v[j];
        if (target_var <= 1e-12) {
            degenerate = true;
            continue;
        }
        const MeanSe m2 = reduce_stat(pts, [&](const LiftEndpoint& p) {
            const double s = p.x.dot(v);
            return s * s;
        });
        const MeanSe m4 = reduce_stat(pts, [&](const LiftEndpoint& p) {
            const double s = p.x.dot(v);
            return (s * s) * (s * s);
        });
        MetricRow row;
        row.name = "gauss4_" + label;
        row.estimate = m4.mean / (3.0 * m2.mean * m2.mean);
        row.se = std::numeric_limits<double>::quiet_NaN();
        row.target = 1.0;
        row.has_target = true;
        row.z = std::numeric_limits<double>::quiet_NaN();
        row.pass = row.estimate >= 0.9 && row.estimate <= 1.1;
        report.add(row);
    }
    if (degenerate) report.add(make_info_row("degenerate_directions_skipped", 1.0));
}

}  // namespace

McReport mc_marginal_test(const GeneratorConfig& gen, int64_t n, int64_t trials, uint64_t master_seed,
                          int workers, const Mat& sigma_target) {
    const std::vector<LiftEndpoint> pts = mc_lift_endpoints(gen, n, trials, master_seed, workers);
    McReport report;
    report.title = "mc_marginal";
    marginal_rows(report, pts, sigma_target);
    return report;
}

McReport mc_area_test(const GeneratorConfig& gen, int64_t n, int64_t trials, uint64_t master_seed,
                      int workers, const Mat& gamma_target) {
    const std::vector<LiftEndpoint> pts = mc_lift_endpoints(gen, n, trials, master_seed, workers);
    McReport report;
    report.title = "mc_area";
    const int d = gen.dim();
    for (int i = 0; i < d; ++i) {
        for (int j = i + 1; j < d; ++j) {
            const MeanSe m = reduce_stat(pts, [i, j](const LiftEndpoint& p) {
                return 0.5 * (p.second(i, j) - p.second(j, i));
            });
            const std::string suffix = std::to_string(i + 1) + std::to_string(j + 1);
            report.add(make_z_row("area_mean_" + suffix, m.mean, m.se, gamma_target(i, j)));
            report.add(make_info_row("area_sd_" + suffix, m.sd));
        }
    }
    return report;
}

TightnessReport pvar_tightness_probe(const GeneratorConfig& gen, std::span<const int64_t> ns, double p,
                                     int64_t trials, uint64_t master_seed, int workers,
                                     double spread_tol) {
    gen.validate();
    if (!(p > 2.0)) throw std::invalid_argument("pvar_tightness_probe: p must exceed 2");
    if (ns.empty() || trials < 1)
        throw std::invalid_argument("pvar_tightness_probe: need sizes and trials");
    for (size_t i = 1; i < ns.size(); ++i)
        if (ns[i] <= ns[i - 1]) throw std::invalid_argument("pvar_tightness_probe: sizes must increase");

    TightnessReport report;
    report.spread_tol = spread_tol;
    auto rank = [](std::vector<double> v, double q) {
        std::sort(v.begin(), v.end());
        const size_t idx = static_cast<size_t>(
            std::min<double>(static_cast<double>(v.size()) - 1.0,
                             std::ceil(q * static_cast<double>(v.size())) - 1.0));
        return v[std::max<size_t>(idx, 0)];
    };

    for (size_t ni = 0; ni < ns.size(); ++ni) {
        const int64_t n = ns[ni];
        struct TrialOut {
            double value = 0.0;
            double upper = 0.0;
            PvarMode mode = PvarMode::dp_exact;
        };
        const std::vector<TrialOut> outs = run_trials<TrialOut>(trials, workers, [&](int64_t trial) {
            // seed indexed by (size, trial) so adding sizes never reshuffles draws
            const uint64_t s = derive_seed(master_seed, seed_stream::probe,
                                           (static_cast<uint64_t>(ni) << 32) | static_cast<uint64_t>(trial));
            const RegenTrajectory traj = gen.generate(n, s);
            const ScaledRoughPath lift(traj.path, n);
            const PvarBounds b = rough_norm_bounded(lift, p);
            return TrialOut{b.value(), b.upper, b.mode};
        });
        std::vector<double> values;
        std::vector<double> uppers;
        values.reserve(outs.size());
        uppers.reserve(outs.size());
        PvarMode mode = PvarMode::dp_exact;
        for (const TrialOut& o : outs) {
            values.push_back(o.value);
            uppers.push_back(o.upper);
            if (o.mode == PvarMode::blocked_sandwich) mode = PvarMode::blocked_sandwich;
        }
        TightnessRow row;
        row.n = n;
        row.median = rank(values, 0.5);
        row.q95 = rank(values, 0.95);
        row.upper_median = rank(uppers, 0.5);
        row.mode = mode;
        report.rows.push_back(row);
    }

    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (const TightnessRow& r : report.rows) {
        lo = std::min(lo, r.median);
        hi = std::max(hi, r.median);
    }
    if (hi == 0.0)
        report.median_ratio = 1.0;  // identically zero norms: trivially bounded
    else
        report.median_ratio = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    report.bounded = report.median_ratio - 1.0 < spread_tol;
    return report;
}

McReport donsker_check(const FiniteLaw& step_law, int64_t n, int64_t trials, uint64_t master_seed,
                       int workers) {
    step_law.validate();
    step_law.require_centered();
    GeneratorConfig gen;
    gen.kind = GeneratorConfig::Kind::delayed_rw;
    gen.step_law = step_law;

    const int d = step_law.dim();
    const Mat sigma_target = step_law.second_moment();  // blocks of length 1
    const Mat gamma_target(d);

    const std::vector<LiftEndpoint> pts = mc_lift_endpoints(gen, n, trials, master_seed, workers);

    McReport report;
    report.title = "donsker";
    marginal_rows(report, pts, sigma_target);
    for (int i = 0; i < d; ++i) {
        for (int j = i + 1; j < d; ++j) {
            const MeanSe m = reduce_stat(pts, [i, j](const LiftEndpoint& p) {
                return 0.5 * (p.second(i, j) - p.second(j, i));
            });
            report.add(make_z_row("area_mean_" + std::to_string(i + 1) + std::to_string(j + 1), m.mean,
                                  m.se, gamma_target(i, j)));
        }
    }
    // Stratonovich-vs-Ito diagonal: mean level-2 diagonal -> E[Y ⊗ Y]_ii / 2
    for (int i = 0; i < d; ++i) {
        const MeanSe m = reduce_stat(pts, [i](const LiftEndpoint& p) { return p.second(i, i); });
        report.add(make_z_row("strat_diag_" + std::to_string(i + 1), m.mean, m.se,
                              0.5 * sigma_target(i, i)));
    }
    // small tightness probe rides along
    const int64_t probe_ns[] = {64, 128, 256};
    const TightnessReport probe =
        pvar_tightness_probe(gen, probe_ns, 2.5, std::min<int64_t>(trials, 200), master_seed, workers);
    MetricRow trow;
    trow.name = "tightness_median_ratio";
    trow.estimate = probe.median_ratio;
    trow.se = std::numeric_limits<double>::quiet_NaN();
    trow.target = 1.0;
    trow.has_target = true;
    trow.z = std::numeric_limits<double>::quiet_NaN();
    trow.pass = probe.bounded;
    report.add(trow);
    return report;
}

}  // namespace roughwalk
