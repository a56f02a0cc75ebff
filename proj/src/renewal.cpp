#include "roughwalk/renewal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>

#include "roughwalk/parallel.hpp"

namespace roughwalk {

RenewalModel RenewalModel::from_pmf(std::span<const double> pmf) {
    if (pmf.size() < 2) throw std::invalid_argument("RenewalModel: support must reach at least 1");
    if (pmf[0] != 0.0) throw std::invalid_argument("RenewalModel: mass at 0 must be zero");
    RenewalModel model;
    model.pmf.assign(pmf.begin(), pmf.end());
    double sum = 0.0;
    double mean = 0.0;
    int64_t gcd = 0;
    for (size_t j = 1; j < model.pmf.size(); ++j) {
        const double p = model.pmf[j];
        if (p < 0.0) throw std::invalid_argument("RenewalModel: negative mass");
        if (p > 0.0) gcd = std::gcd(gcd, static_cast<int64_t>(j));
        sum += p;
        mean += p * static_cast<double>(j);
    }
    if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("RenewalModel: mass must sum to 1");
    if (gcd == 0) throw std::invalid_argument("RenewalModel: empty support");
    model.lattice = static_cast<int>(gcd);
    model.mean = mean;
    return model;
}

std::vector<double> renewal_sequence(const RenewalModel& model, int64_t N) {
    if (N < 0) throw std::invalid_argument("renewal_sequence: negative horizon");
    std::vector<double> u(static_cast<size_t>(N) + 1, 0.0);
    u[0] = 1.0;
    const int64_t sup = model.max_support();
    for (int64_t m = 1; m <= N; ++m) {
        double acc = 0.0;
        const int64_t jmax = std::min(m, sup);
        for (int64_t j = 1; j <= jmax; ++j)
            acc += model.pmf[static_cast<size_t>(j)] * u[static_cast<size_t>(m - j)];
        if (acc < -1e-15 || acc > 1.0 + 1e-12)
            throw std::runtime_error("renewal_sequence: value escaped [0, 1]");
        u[static_cast<size_t>(m)] = acc;
    }
    return u;
}

std::vector<double> solve_renewal(const RenewalModel& model, std::span<const double> b, int64_t N) {
    if (N < 0) throw std::invalid_argument("solve_renewal: negative horizon");
    for (double v : b)
        if (v < 0.0) throw std::invalid_argument("solve_renewal: forcing must be non-negative");
    const std::vector<double> u = renewal_sequence(model, N);
    std::vector<double> a(static_cast<size_t>(N) + 1, 0.0);
    const int64_t blen = static_cast<int64_t>(b.size());
    for (int64_t n = 0; n <= N; ++n) {
        double acc = 0.0;
        // a_n = sum_m b_{n-m} u_m; only n-m < blen contributes
        const int64_t mlo = std::max<int64_t>(0, n - blen + 1);
        for (int64_t m = mlo; m <= n; ++m) acc += b[static_cast<size_t>(n - m)] * u[static_cast<size_t>(m)];
        a[static_cast<size_t>(n)] = acc;
    }
    return a;
}

KeyRenewalResult key_renewal_limit(const RenewalModel& model, std::span<const double> b, int64_t N,
                                   bool lattice_mode) {
    if (model.lattice > 1 && !lattice_mode)
        throw std::invalid_argument(
            "key_renewal_limit: interarrival law is d-arithmetic with d > 1; lattice mode required");
    const int64_t d = model.lattice;

    double bsum = 0.0;
    if (lattice_mode && d > 1) {
        for (size_t m = 0; m < b.size(); m += static_cast<size_t>(d)) bsum += b[m];
        bsum *= static_cast<double>(d);
    } else {
        for (double v : b) bsum += v;
    }

    KeyRenewalResult out;
    out.limit = bsum / model.mean;

    const std::vector<double> a = solve_renewal(model, b, N);
    const int64_t lo = std::max<int64_t>(0, N - N / 4);
    double gap = 0.0;
    for (int64_t n = lo; n <= N; ++n) {
        if (d > 1 && n % d != 0) continue;  // limit only holds along the lattice
        gap = std::max(gap, std::abs(a[static_cast<size_t>(n)] - out.limit));
    }
    out.tail_gap = gap;
    return out;
}

void BlockLaw::validate() const {
    if (atoms.empty()) throw std::invalid_argument("BlockLaw: empty");
    double sum = 0.0;
    const int d = dim();
    for (const BlockLawAtom& a : atoms) {
        if (a.prob < 0.0) throw std::invalid_argument("BlockLaw: negative probability");
        if (a.length < 1) throw std::invalid_argument("BlockLaw: block length must be >= 1");
        if (a.xi.dim() != d) throw std::invalid_argument("BlockLaw: mixed dimensions");
        for (int i = 0; i < d; ++i)
            if (a.xi[i] < 0.0) throw std::invalid_argument("BlockLaw: sups must be non-negative");
        sum += a.prob;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("BlockLaw: probabilities must sum to 1");
}

RenewalModel BlockLaw::interarrival() const {
    validate();
    int64_t max_t = 0;
    for (const BlockLawAtom& a : atoms) max_t = std::max(max_t, a.length);
    std::vector<double> pmf(static_cast<size_t>(max_t) + 1, 0.0);
    for (const BlockLawAtom& a : atoms) pmf[static_cast<size_t>(a.length)] += a.prob;
    return RenewalModel::from_pmf(pmf);
}

double TensorValue::entry(int i, int j) const {
    switch (order) {
        case 0: return scalar;
        case 1: return vec[i];
        case 2: return mat(i, j);
        default: throw std::logic_error("TensorValue: bad order");
    }
}

namespace {

// |Xi|^{⊗r} entry (i,j) for one atom
double xi_tensor_entry(const BlockLawAtom& a, int r, int i, int j) {
    switch (r) {
        case 0: return 1.0;
        case 1: return std::abs(a.xi[i]);
        case 2: return std::abs(a.xi[i]) * std::abs(a.xi[j]);
        default: throw std::invalid_argument("size-biased moments: tensor order must be 0, 1 or 2");
    }
}

TensorValue make_tensor(int r, int d) {
    TensorValue t;
    t.order = r;
    if (r >= 1) t.vec = Vec(d);
    if (r == 2) t.mat = Mat(d);
    return t;
}

void tensor_set(TensorValue& t, int i, int j, double v) {
    if (t.order == 0)
        t.scalar = v;
    else if (t.order == 1)
        t.vec[i] = v;
    else
        t.mat(i, j) = v;
}

template <class Fn>
void for_each_entry(int r, int d, Fn&& fn) {
    if (r == 0) {
        fn(0, 0);
    } else if (r == 1) {
        for (int i = 0; i < d; ++i) fn(i, 0);
    } else {
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) fn(i, j);
    }
}

}  // namespace

TensorValue size_biased_moment_limit(const BlockLaw& law, int r, int64_t ell) {
    law.validate();
    if (r < 0 || r > 2) throw std::invalid_argument("size_biased_moment_limit: order must be 0, 1 or 2");
    if (ell < 0) throw std::invalid_argument("size_biased_moment_limit: negative moment");
    const int d = law.dim();
    double mean_t = 0.0;
    for (const BlockLawAtom& a : law.atoms) mean_t += a.prob * static_cast<double>(a.length);

    TensorValue out = make_tensor(r, d);
    for_each_entry(r, d, [&](int i, int j) {
        double num = 0.0;
        for (const BlockLawAtom& a : law.atoms)
            num += a.prob * xi_tensor_entry(a, r, i, j) *
                   std::pow(static_cast<double>(a.length), static_cast<double>(ell + 1));
        tensor_set(out, i, j, num / mean_t);
    });
    return out;
}

std::vector<double> size_biased_forcing(const BlockLaw& law, int r, int64_t ell, int i, int j) {
    law.validate();
    if (r < 0 || r > 2) throw std::invalid_argument("size_biased_forcing: order must be 0, 1 or 2");
    int64_t max_t = 0;
    for (const BlockLawAtom& a : law.atoms) max_t = std::max(max_t, a.length);
    // b_n = E[|Xi|^{⊗r} T^l 1{T > n}] vanishes once n >= max support
    std::vector<double> b(static_cast<size_t>(max_t), 0.0);
    for (int64_t n = 0; n < max_t; ++n) {
        double acc = 0.0;
        for (const BlockLawAtom& a : law.atoms) {
            if (a.length <= n) continue;
            acc += a.prob * xi_tensor_entry(a, r, i, j) *
                   std::pow(static_cast<double>(a.length), static_cast<double>(ell));
        }
        b[static_cast<size_t>(n)] = acc;
    }
    return b;
}

McMoment mc_size_biased_moment(const BlockLaw& law, int r, int64_t ell, int64_t n,
                               int64_t trajectories, uint64_t seed, int workers,
                               const BlockLaw* delay) {
    law.validate();
    if (delay) delay->validate();
    if (n < 0) throw std::invalid_argument("mc_size_biased_moment: negative time");
    if (trajectories < 1) throw std::invalid_argument("mc_size_biased_moment: need trajectories");
    const int d = law.dim();

    std::vector<double> probs;
    probs.reserve(law.atoms.size());
    for (const BlockLawAtom& a : law.atoms) probs.push_back(a.prob);
    const DiscreteSampler sampler(probs);
    std::vector<double> delay_probs;
    if (delay)
        for (const BlockLawAtom& a : delay->atoms) delay_probs.push_back(a.prob);
    const std::optional<DiscreteSampler> delay_sampler =
        delay ? std::optional<DiscreteSampler>(delay_probs) : std::nullopt;

    struct Draw {
        double entries[kMaxDim * kMaxDim];
    };
    const int entry_count = (r == 0) ? 1 : (r == 1 ? d : d * d);

    // per trajectory: walk block lengths until the block covering n, then
    // record its |Xi|^{⊗r} T^l
    std::vector<Draw> draws = run_trials<Draw>(trajectories, workers, [&](int64_t t) {
        Rng rng(derive_seed(seed, seed_stream::renewal, static_cast<uint64_t>(t)));
        int64_t pos = 0;
        const BlockLawAtom* covering = nullptr;
        bool first = true;
        for (;;) {
            const BlockLawAtom& a =
                (first && delay) ? delay->atoms[static_cast<size_t>(delay_sampler->sample(rng))]
                                 : law.atoms[static_cast<size_t>(sampler.sample(rng))];
            first = false;
            if (pos + a.length > n) {
                covering = &a;
                break;
            }
            pos += a.length;
        }
        Draw out{};
        const double tl = std::pow(static_cast<double>(covering->length), static_cast<double>(ell));
        int e = 0;
        for_each_entry(r, d, [&](int i, int j) { out.entries[e++] = xi_tensor_entry(*covering, r, i, j) * tl; });
        return out;
    });

    McMoment result;
    result.trajectories = trajectories;
    result.estimate = make_tensor(r, d);
    result.se = make_tensor(r, d);
    for (int e = 0; e < entry_count; ++e) {
        KahanSum sum;
        for (const Draw& dr : draws) sum.add(dr.entries[e]);
        const double mean = sum.value() / static_cast<double>(trajectories);
        KahanSum ss;
        for (const Draw& dr : draws) {
            const double dv = dr.entries[e] - mean;
            ss.add(dv * dv);
        }
        const double var = trajectories > 1 ? ss.value() / static_cast<double>(trajectories - 1) : 0.0;
        const double se = std::sqrt(var / static_cast<double>(trajectories));
        int idx = 0;
        for_each_entry(r, d, [&](int i, int j) {
            if (idx == e) {
                tensor_set(result.estimate, i, j, mean);
                tensor_set(result.se, i, j, se);
            }
            ++idx;
        });
    }
    return result;
}

}  // namespace roughwalk
