#include "roughwalk/regen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "roughwalk/path_lift.hpp"

namespace roughwalk {

void RegenTrajectory::validate() const {
    path.validate();
    if (tau.empty() || tau.front() != 0)
        throw std::invalid_argument("RegenTrajectory: tau must start at 0");
    for (size_t i = 1; i < tau.size(); ++i)
        if (tau[i] <= tau[i - 1]) throw std::invalid_argument("RegenTrajectory: tau not increasing");
    if (tau.back() > path.length())
        throw std::invalid_argument("RegenTrajectory: tau beyond horizon");
}

Vec FiniteLaw::mean() const {
    Vec m(dim());
    for (size_t i = 0; i < prob.size(); ++i) m += prob[i] * atom[i];
    return m;
}

Mat FiniteLaw::second_moment() const {
    Mat m(dim());
    for (size_t i = 0; i < prob.size(); ++i) m += prob[i] * outer(atom[i], atom[i]);
    return m;
}

void FiniteLaw::validate() const {
    if (prob.empty() || prob.size() != atom.size())
        throw std::invalid_argument("FiniteLaw: probabilities and atoms must pair up");
    double sum = 0.0;
    for (double p : prob) {
        if (p < 0.0) throw std::invalid_argument("FiniteLaw: negative probability");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("FiniteLaw: probabilities must sum to 1");
    const int d = dim();
    if (d < 1) throw std::invalid_argument("FiniteLaw: empty support");
    for (const Vec& a : atom)
        if (a.dim() != d) throw std::invalid_argument("FiniteLaw: mixed atom dimensions");
}

void FiniteLaw::require_centered(double tol) const {
    if (mean().max_abs() > tol)
        throw std::invalid_argument("FiniteLaw: step law must have mean zero");
}

void MarkovChainSpec::validate() const {
    const int s = state_count();
    if (s < 1) throw std::invalid_argument("MarkovChainSpec: empty chain");
    if (static_cast<int>(f.size()) != s)
        throw std::invalid_argument("MarkovChainSpec: f must cover every state");
    if (anchor < 0 || anchor >= s) throw std::invalid_argument("MarkovChainSpec: anchor out of range");
    const int d = dim();
    for (const Vec& v : f)
        if (v.dim() != d) throw std::invalid_argument("MarkovChainSpec: mixed f dimensions");
    for (const auto& row : transition) {
        if (static_cast<int>(row.size()) != s)
            throw std::invalid_argument("MarkovChainSpec: transition matrix must be square");
        double sum = 0.0;
        for (double p : row) {
            if (p < 0.0) throw std::invalid_argument("MarkovChainSpec: negative transition probability");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw std::invalid_argument("MarkovChainSpec: rows must sum to 1");
    }
    // irreducibility = strong connectivity of the positive-probability graph
    auto reachable = [&](bool forward) {
        std::vector<char> seen(static_cast<size_t>(s), 0);
        std::vector<int> stack{anchor};
        seen[static_cast<size_t>(anchor)] = 1;
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            for (int w = 0; w < s; ++w) {
                const double p = forward ? transition[static_cast<size_t>(v)][static_cast<size_t>(w)]
                                         : transition[static_cast<size_t>(w)][static_cast<size_t>(v)];
                if (p > 0.0 && !seen[static_cast<size_t>(w)]) {
                    seen[static_cast<size_t>(w)] = 1;
                    stack.push_back(w);
                }
            }
        }
        return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
    };
    if (!reachable(true) || !reachable(false))
        throw std::invalid_argument("MarkovChainSpec: chain is not irreducible");
}

FirstPassage solve_first_passage(const MarkovChainSpec& spec) {
    spec.validate();
    const int s = spec.state_count();
    const int d = spec.dim();
    const int m = s - 1;
    const int a = spec.anchor;

    // map non-anchor states to 0..m-1
    std::vector<int> states;
    states.reserve(static_cast<size_t>(m));
    for (int i = 0; i < s; ++i)
        if (i != a) states.push_back(i);

    FirstPassage out;
    out.expected_cycle_reward = Vec(d);
    out.centering = Vec(d);

    if (m == 0) {
        out.expected_return_time = 1.0;
        out.expected_cycle_reward = spec.f[static_cast<size_t>(a)];
        out.centering = out.expected_cycle_reward;
        return out;
    }

    // (I - Q) [h | g_1..g_d] = [1 | f_1..f_d] over non-anchor states, where
    // h(y) = expected hitting time of the anchor and g(y) the expected f-sum
    // accumulated before hitting it.
    std::vector<double> lhs(static_cast<size_t>(m) * m, 0.0);
    std::vector<double> rhs(static_cast<size_t>(m) * (1 + d), 0.0);
    for (int r = 0; r < m; ++r) {
        for (int c = 0; c < m; ++c) {
            const double q = spec.transition[static_cast<size_t>(states[static_cast<size_t>(r)])]
                                            [static_cast<size_t>(states[static_cast<size_t>(c)])];
            lhs[static_cast<size_t>(r) * m + c] = (r == c ? 1.0 : 0.0) - q;
        }
        rhs[static_cast<size_t>(r) * (1 + d)] = 1.0;
        const Vec& fr = spec.f[static_cast<size_t>(states[static_cast<size_t>(r)])];
        for (int c = 0; c < d; ++c) rhs[static_cast<size_t>(r) * (1 + d) + 1 + c] = fr[c];
    }
    const std::vector<double> sol = solve_linear(std::move(lhs), std::move(rhs), m, 1 + d);

    double t = 1.0;
    Vec reward = spec.f[static_cast<size_t>(a)];
    for (int r = 0; r < m; ++r) {
        const double p = spec.transition[static_cast<size_t>(a)][static_cast<size_t>(states[static_cast<size_t>(r)])];
        if (p == 0.0) continue;
        t += p * sol[static_cast<size_t>(r) * (1 + d)];
        for (int c = 0; c < d; ++c) reward[c] += p * sol[static_cast<size_t>(r) * (1 + d) + 1 + c];
    }
    out.expected_return_time = t;
    out.expected_cycle_reward = reward;
    out.centering = (1.0 / t) * reward;
    return out;
}

std::vector<double> stationary_distribution(const MarkovChainSpec& spec) {
    spec.validate();
    const int s = spec.state_count();
    // (P^T - I) pi = 0 with the last equation replaced by sum(pi) = 1
    std::vector<double> lhs(static_cast<size_t>(s) * s, 0.0);
    std::vector<double> rhs(static_cast<size_t>(s), 0.0);
    for (int r = 0; r < s; ++r)
        for (int c = 0; c < s; ++c)
            lhs[static_cast<size_t>(r) * s + c] =
                spec.transition[static_cast<size_t>(c)][static_cast<size_t>(r)] - (r == c ? 1.0 : 0.0);
    for (int c = 0; c < s; ++c) lhs[static_cast<size_t>(s - 1) * s + c] = 1.0;
    rhs[static_cast<size_t>(s - 1)] = 1.0;
    return solve_linear(std::move(lhs), std::move(rhs), s);
}

namespace {

class LawSampler {
public:
    explicit LawSampler(const FiniteLaw& law) : law_(law), sampler_(law.prob) {}
    const Vec& draw(Rng& rng) const { return law_.atom[static_cast<size_t>(sampler_.sample(rng))]; }

private:
    const FiniteLaw& law_;
    DiscreteSampler sampler_;
};

}  // namespace

RegenTrajectory gen_delayed_rw(const FiniteLaw& step_law, const std::optional<FiniteLaw>& delay_law,
                               int64_t n, uint64_t seed) {
    step_law.validate();
    step_law.require_centered();
    if (delay_law) {
        delay_law->validate();
        if (delay_law->dim() != step_law.dim())
            throw std::invalid_argument("gen_delayed_rw: delay law dimension mismatch");
    }
    if (n < 1) throw std::invalid_argument("gen_delayed_rw: horizon must be positive");

    const int d = step_law.dim();
    Rng rng(seed);
    LawSampler steps(step_law);
    std::optional<LawSampler> delay;
    if (delay_law) delay.emplace(*delay_law);

    RegenTrajectory traj;
    traj.path = Path(d, n);
    traj.tau.resize(static_cast<size_t>(n) + 1);
    Vec x(d);
    for (int64_t k = 1; k <= n; ++k) {
        const Vec& s = (k == 1 && delay) ? delay->draw(rng) : steps.draw(rng);
        x += s;
        traj.path.set(k, x);
        traj.tau[static_cast<size_t>(k)] = k;
    }
    return traj;
}

RegenTrajectory gen_markov_additive(const MarkovChainSpec& spec, int64_t n, uint64_t seed) {
    if (n < 1) throw std::invalid_argument("gen_markov_additive: horizon must be positive");
    const FirstPassage fp = solve_first_passage(spec);  // validates
    const int d = spec.dim();
    const int s = spec.state_count();

    std::vector<DiscreteSampler> rows;
    rows.reserve(static_cast<size_t>(s));
    for (const auto& row : spec.transition) rows.emplace_back(row);

    Rng rng(seed);
    RegenTrajectory traj;
    traj.path = Path(d, n);
    traj.tau.push_back(0);
    Vec x(d);
    int state = spec.anchor;
    for (int64_t k = 1; k <= n; ++k) {
        state = rows[static_cast<size_t>(state)].sample(rng);
        x += spec.f[static_cast<size_t>(state)] - fp.centering;
        traj.path.set(k, x);
        if (state == spec.anchor) traj.tau.push_back(k);
    }
    return traj;
}

RegenTrajectory gen_rotor(double p_ccw, bool extra_step, int64_t n, uint64_t seed) {
    if (p_ccw < 0.0 || p_ccw > 1.0) throw std::invalid_argument("gen_rotor: p_ccw must be in [0,1]");
    if (n < 1) throw std::invalid_argument("gen_rotor: horizon must be positive");

    const Vec e1 = Vec::unit(2, 0);
    const Vec e2 = Vec::unit(2, 1);
    const Vec ccw[4] = {e1, e2, -e1, -e2};
    const Vec cw[4] = {e2, e1, -e2, -e1};
    const Vec units[4] = {e1, -e1, e2, -e2};

    Rng rng(seed);
    RegenTrajectory traj;
    traj.path = Path(2, n);
    traj.tau.push_back(0);
    Vec x(2);
    int64_t pos = 0;
    while (pos < n) {
        const bool counter = rng.next_double() < p_ccw;
        const Vec* loop = counter ? ccw : cw;
        Vec extra(2);
        if (extra_step) extra = units[rng.next_below(4)];
        const int64_t block_len = extra_step ? 5 : 4;
        for (int64_t m = 0; m < block_len && pos < n; ++m) {
            x += (m < 4) ? loop[m] : extra;
            ++pos;
            traj.path.set(pos, x);
        }
        if (pos - traj.tau.back() == block_len) traj.tau.push_back(pos);
    }
    return traj;
}

RegenTrajectory gen_periodic_env_rw(const std::vector<FiniteLaw>& profile, int64_t n, uint64_t seed) {
    if (profile.empty()) throw std::invalid_argument("gen_periodic_env_rw: empty profile");
    if (n < 1) throw std::invalid_argument("gen_periodic_env_rw: horizon must be positive");
    const int L = static_cast<int>(profile.size());
    const int d = profile.front().dim();
    for (const FiniteLaw& law : profile) {
        law.validate();
        if (law.dim() != d) throw std::invalid_argument("gen_periodic_env_rw: mixed law dimensions");
        for (const Vec& a : law.atom)
            if (std::abs(a[0] - std::round(a[0])) > 1e-9)
                throw std::invalid_argument("gen_periodic_env_rw: first coordinate must be integer-valued");
    }

    auto shift = [L](int r, double step0) {
        const int jump = static_cast<int>(std::llround(step0)) % L;
        return ((r + jump) % L + L) % L;
    };

    // embedded residue chain: drives both the irreducibility check and the
    // analytic centering (f(r) = mean step from residue r)
    MarkovChainSpec residue;
    residue.transition.assign(static_cast<size_t>(L), std::vector<double>(static_cast<size_t>(L), 0.0));
    residue.f.reserve(static_cast<size_t>(L));
    for (int r = 0; r < L; ++r) {
        const FiniteLaw& law = profile[static_cast<size_t>(r)];
        for (size_t i = 0; i < law.prob.size(); ++i)
            residue.transition[static_cast<size_t>(r)][static_cast<size_t>(shift(r, law.atom[i][0]))] +=
                law.prob[i];
        residue.f.push_back(law.mean());
    }
    residue.anchor = 0;
    const FirstPassage fp = solve_first_passage(residue);  // validates irreducibility

    Rng rng(seed);
    std::vector<LawSampler> samplers;
    samplers.reserve(static_cast<size_t>(L));
    for (const FiniteLaw& law : profile) samplers.emplace_back(law);

    RegenTrajectory traj;
    traj.path = Path(d, n);
    traj.tau.push_back(0);
    Vec x(d);
    int r = 0;
    for (int64_t k = 1; k <= n; ++k) {
        const Vec& s = samplers[static_cast<size_t>(r)].draw(rng);
        r = shift(r, s[0]);
        x += s - fp.centering;
        traj.path.set(k, x);
        if (r == 0) traj.tau.push_back(k);
    }
    return traj;
}

RegenTrajectory gen_linear_drift(int dim, int64_t n) {
    if (n < 1) throw std::invalid_argument("gen_linear_drift: horizon must be positive");
    RegenTrajectory traj;
    traj.path = Path(dim, n);
    traj.tau.resize(static_cast<size_t>(n) + 1);
    Vec x(dim);
    const Vec e1 = Vec::unit(dim, 0);
    for (int64_t k = 1; k <= n; ++k) {
        x += e1;
        traj.path.set(k, x);
        traj.tau[static_cast<size_t>(k)] = k;
    }
    return traj;
}

std::vector<BlockStats> block_stats(const RegenTrajectory& traj) {
    traj.validate();
    const int64_t blocks = traj.complete_blocks();
    if (blocks < 1) throw std::invalid_argument("block_stats: no complete block within the horizon");
    const int d = traj.path.dim;

    std::vector<BlockStats> out;
    out.reserve(static_cast<size_t>(blocks));
    for (int64_t k = 0; k < blocks; ++k) {
        const int64_t lo = traj.tau[static_cast<size_t>(k)];
        const int64_t hi = traj.tau[static_cast<size_t>(k + 1)];
        BlockStats b;
        b.length = hi - lo;
        b.increment = traj.path.increment(lo, hi);
        b.area = antisym_area(traj.path, lo, hi);
        b.sup_abs = Vec(d);
        for (int64_t m = lo; m <= hi; ++m) {
            const Vec inc = traj.path.increment(lo, m);
            for (int i = 0; i < d; ++i) b.sup_abs[i] = std::max(b.sup_abs[i], std::abs(inc[i]));
        }
        out.push_back(std::move(b));
    }
    return out;
}

int64_t kappa(const RegenTrajectory& traj, double u) {
    if (u < 0.0 || traj.tau.empty() || u >= static_cast<double>(traj.tau.back()))
        throw std::out_of_range("kappa: time beyond the last regeneration");
    // largest k with tau_k <= u
    const auto it = std::upper_bound(traj.tau.begin(), traj.tau.end(), u,
                                     [](double lhs, int64_t rhs) { return lhs < static_cast<double>(rhs); });
    return static_cast<int64_t>(it - traj.tau.begin()) - 1;
}

Path skeleton_walk(const RegenTrajectory& traj) {
    const int64_t blocks = traj.complete_blocks();
    Path z(traj.path.dim, blocks);
    Vec acc(traj.path.dim);
    for (int64_t k = 0; k < blocks; ++k) {
        acc += traj.path.increment(traj.tau[static_cast<size_t>(k)], traj.tau[static_cast<size_t>(k + 1)]);
        z.set(k + 1, acc);
    }
    return z;
}

AssumptionReport assumption_report(std::span<const BlockStats> blocks) {
    if (blocks.size() < 2) throw std::invalid_argument("assumption_report: need at least 2 blocks");
    const int d = blocks.front().increment.dim();
    const auto generic = blocks.subspan(1);

    AssumptionReport report;
    report.generic_count = static_cast<int64_t>(generic.size());

    auto mean_se = [](auto&& stat, std::span<const BlockStats> bs, double& mean, double& se) {
        double sum = 0.0;
        for (const BlockStats& b : bs) sum += stat(b);
        mean = sum / static_cast<double>(bs.size());
        if (bs.size() < 2) {
            se = std::numeric_limits<double>::quiet_NaN();
            return;
        }
        double ss = 0.0;
        for (const BlockStats& b : bs) {
            const double dv = stat(b) - mean;
            ss += dv * dv;
        }
        se = std::sqrt(ss / static_cast<double>(bs.size() - 1) / static_cast<double>(bs.size()));
    };

    auto add_row = [&](int exponent, int coord, bool is_delay, std::span<const BlockStats> bs) {
        AssumptionRow row;
        row.exponent = exponent;
        row.coordinate = coord;
        row.delay_block = is_delay;
        auto stat = [exponent, coord](const BlockStats& b) {
            if (exponent == 0) return static_cast<double>(b.length);
            const double xi = b.sup_abs[coord];
            return xi * xi * static_cast<double>(b.length);
        };
        mean_se(stat, bs, row.estimate, row.se);
        row.zero_flag = row.estimate == 0.0;
        if (!is_delay && row.zero_flag && exponent == 2) report.any_zero = true;
        report.rows.push_back(row);
    };

    add_row(0, -1, true, blocks.subspan(0, 1));
    add_row(0, -1, false, generic);
    for (int i = 0; i < d; ++i) {
        add_row(2, i, true, blocks.subspan(0, 1));
        add_row(2, i, false, generic);
    }
    return report;
}

int GeneratorConfig::dim() const {
    switch (kind) {
        case Kind::delayed_rw: return step_law.dim();
        case Kind::markov_additive: return chain.dim();
        case Kind::rotor: return 2;
        case Kind::periodic_env: return profile.empty() ? 0 : profile.front().dim();
        case Kind::linear_drift: return drift_dim;
    }
    return 0;
}

void GeneratorConfig::validate() const {
    switch (kind) {
        case Kind::delayed_rw:
            step_law.validate();
            step_law.require_centered();
            if (delay_law) delay_law->validate();
            break;
        case Kind::markov_additive: chain.validate(); break;
        case Kind::rotor:
            if (p_ccw < 0.0 || p_ccw > 1.0) throw std::invalid_argument("rotor: p_ccw must be in [0,1]");
            break;
        case Kind::periodic_env:
            if (profile.empty()) throw std::invalid_argument("periodic_env: empty profile");
            for (const FiniteLaw& law : profile) law.validate();
            break;
        case Kind::linear_drift:
            if (drift_dim < 1 || drift_dim > kMaxDim)
                throw std::invalid_argument("linear_drift: bad dimension");
            break;
    }
}

RegenTrajectory GeneratorConfig::generate(int64_t n, uint64_t seed) const {
    switch (kind) {
        case Kind::delayed_rw: return gen_delayed_rw(step_law, delay_law, n, seed);
        case Kind::markov_additive: return gen_markov_additive(chain, n, seed);
        case Kind::rotor: return gen_rotor(p_ccw, extra_step, n, seed);
        case Kind::periodic_env: return gen_periodic_env_rw(profile, n, seed);
        case Kind::linear_drift: return gen_linear_drift(drift_dim, n);
    }
    throw std::logic_error("GeneratorConfig: unknown kind");
}

std::string GeneratorConfig::kind_name() const {
    switch (kind) {
        case Kind::delayed_rw: return "delayed_rw";
        case Kind::markov_additive: return "markov_additive";
        case Kind::rotor: return "rotor";
        case Kind::periodic_env: return "periodic_env";
        case Kind::linear_drift: return "linear_drift";
    }
    return "unknown";
}

}  // namespace roughwalk
