#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "roughwalk/limits.hpp"
#include "roughwalk/path_lift.hpp"
#include "roughwalk/regen.hpp"
#include "support.hpp"

using namespace roughwalk;

namespace {

FiniteLaw simple_walk_2d() {
    FiniteLaw law;
    law.prob = {0.25, 0.25, 0.25, 0.25};
    law.atom = {Vec{1, 0}, Vec{-1, 0}, Vec{0, 1}, Vec{0, -1}};
    return law;
}

void check_block_invariants(const RegenTrajectory& traj) {
    const auto blocks = block_stats(traj);
    const int d = traj.path.dim;
    for (const BlockStats& b : blocks) {
        CHECK(b.length >= 1);
        for (int i = 0; i < d; ++i) CHECK(std::abs(b.increment[i]) <= b.sup_abs[i] + 1e-12);
        CHECK((b.area + b.area.transpose()).max_abs() == 0.0);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                CHECK(std::abs(b.area(i, j)) <=
                      4.0 * b.sup_abs[i] * b.sup_abs[j] * static_cast<double>(b.length) + 1e-12);
    }
}

}  // namespace

TEST_CASE("delayed random walk blocks") {
    const FiniteLaw law = simple_walk_2d();
    const RegenTrajectory traj = gen_delayed_rw(law, std::nullopt, 200, 42);
    CHECK(traj.complete_blocks() == 200);
    const auto blocks = block_stats(traj);
    for (const BlockStats& b : blocks) {
        CHECK(b.length == 1);
        CHECK(b.area.max_abs() == 0.0);
        for (int i = 0; i < 2; ++i) CHECK(b.sup_abs[i] == std::abs(b.increment[i]));
    }
    check_block_invariants(traj);

    // distinct delay law affects block 0 only
    FiniteLaw delay;
    delay.prob = {1.0};
    delay.atom = {Vec{3, 0}};
    const RegenTrajectory delayed = gen_delayed_rw(law, delay, 50, 7);
    const auto dblocks = block_stats(delayed);
    CHECK(dblocks[0].increment == Vec{3, 0});

    // same seed, same trajectory; different seed differs
    const RegenTrajectory again = gen_delayed_rw(law, std::nullopt, 200, 42);
    CHECK(traj.path.values == again.path.values);
    const RegenTrajectory other = gen_delayed_rw(law, std::nullopt, 200, 43);
    CHECK(traj.path.values != other.path.values);

    // the theorem needs centered steps
    FiniteLaw biased;
    biased.prob = {0.6, 0.4};
    biased.atom = {Vec{1.0}, Vec{-1.0}};
    CHECK_THROWS_AS(gen_delayed_rw(biased, std::nullopt, 10, 1), std::invalid_argument);
}

TEST_CASE("markov additive functional: constant f collapses to zero") {
    MarkovChainSpec spec;
    spec.transition = {{0.3, 0.7}, {0.6, 0.4}};
    const Vec v{2.0, -1.0};
    spec.f = {v, v};
    spec.anchor = 0;
    const RegenTrajectory traj = gen_markov_additive(spec, 100, 5);
    for (int64_t k = 0; k <= traj.path.length(); ++k) CHECK(traj.path.value(k).max_abs() <= 1e-12);
    for (const BlockStats& b : block_stats(traj)) CHECK(b.increment.max_abs() <= 1e-12);
}

TEST_CASE("markov additive functional: deterministic 3-cycle gives triangle blocks") {
    MarkovChainSpec spec;
    spec.transition = {{0, 1, 0}, {0, 0, 1}, {1, 0, 0}};  // x -> a -> b -> x
    const Vec e1 = Vec::unit(2, 0);
    const Vec e2 = Vec::unit(2, 1);
    spec.f = {-e1 - e2, e1, e2};  // f(x), f(a), f(b); cycle reward is 0
    spec.anchor = 0;
    const FirstPassage fp = solve_first_passage(spec);
    CHECK(fp.expected_return_time == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(fp.centering.max_abs() <= 1e-14);

    const RegenTrajectory traj = gen_markov_additive(spec, 30, 11);
    CHECK(traj.complete_blocks() == 10);
    const auto blocks = block_stats(traj);

    // oracle: the triangle loop (0,0) -> (1,0) -> (1,1) -> (0,0)
    const testsupport::Path triangle = testsupport::path_from_steps(2, {e1, e2, -e1 - e2});
    const Mat expected_area = antisym_part(testsupport::istr_oracle(triangle, 0, 3));
    CHECK(expected_area(0, 1) == doctest::Approx(0.5).epsilon(1e-14));
    for (const BlockStats& b : blocks) {
        CHECK(b.length == 3);
        CHECK(b.increment.max_abs() <= 1e-12);
        CHECK((b.area - expected_area).max_abs() <= 1e-12);
    }
    check_block_invariants(traj);
}

TEST_CASE("first passage matches Kac's formula") {
    MarkovChainSpec spec;
    spec.transition = {{0.1, 0.5, 0.4, 0.0},
                       {0.3, 0.0, 0.2, 0.5},
                       {0.25, 0.25, 0.25, 0.25},
                       {0.0, 0.6, 0.1, 0.3}};
    spec.f = {Vec{1.0}, Vec{0.0}, Vec{-1.0}, Vec{2.0}};
    for (int anchor = 0; anchor < 4; ++anchor) {
        spec.anchor = anchor;
        const FirstPassage fp = solve_first_passage(spec);
        const std::vector<double> pi = stationary_distribution(spec);
        CHECK(fp.expected_return_time ==
              doctest::Approx(1.0 / pi[static_cast<size_t>(anchor)]).epsilon(1e-10));
    }

    MarkovChainSpec reducible;
    reducible.transition = {{1.0, 0.0}, {0.5, 0.5}};
    reducible.f = {Vec{0.0}, Vec{0.0}};
    reducible.anchor = 0;
    CHECK_THROWS_AS(gen_markov_additive(reducible, 10, 1), std::invalid_argument);
}

TEST_CASE("rotor blocks") {
    const RegenTrajectory traj = gen_rotor(1.0, false, 41, 3);
    CHECK(traj.complete_blocks() == 10);  // 41 = 10 blocks + partial
    CHECK(traj.tau.back() == 40);
    const auto blocks = block_stats(traj);
    Mat ccw(2);
    ccw(0, 1) = 1.0;
    ccw(1, 0) = -1.0;
    for (const BlockStats& b : blocks) {
        CHECK(b.length == 4);
        CHECK(b.increment.max_abs() == 0.0);
        CHECK((b.area - ccw).max_abs() == 0.0);
        CHECK(b.sup_abs == Vec{1, 1});
    }
    check_block_invariants(traj);

    // p_ccw = 1/2: mean area within noise of zero
    const RegenTrajectory mixed = gen_rotor(0.5, false, 40000, 9);
    const auto mixed_blocks = block_stats(mixed);
    double mean = 0.0;
    for (const BlockStats& b : mixed_blocks) mean += b.area(0, 1);
    mean /= static_cast<double>(mixed_blocks.size());
    const double se = 1.0 / std::sqrt(static_cast<double>(mixed_blocks.size()));
    CHECK(std::abs(mean) <= 3.0 * se);

    // extra step: T = 5, mean Y ⊗ Y near I/2, E[T] = 5 exactly
    const RegenTrajectory extra = gen_rotor(0.6, true, 50000, 17);
    const auto eblocks = block_stats(extra);
    Mat yy(2);
    for (const BlockStats& b : eblocks) {
        CHECK(b.length == 5);
        yy += outer(b.increment, b.increment);
    }
    yy *= 1.0 / static_cast<double>(eblocks.size());
    const double se_y = 0.5 / std::sqrt(static_cast<double>(eblocks.size()));
    CHECK(std::abs(yy(0, 0) - 0.5) <= 4.0 * se_y);
    CHECK(std::abs(yy(1, 1) - 0.5) <= 4.0 * se_y);
    CHECK(std::abs(yy(0, 1)) <= 4.0 * se_y);
    check_block_invariants(extra);

    CHECK_THROWS_AS(gen_rotor(1.5, false, 10, 1), std::invalid_argument);
}

TEST_CASE("periodic environment walk") {
    // period 1 with a centered law: reduces to the plain walk, tau_k = k
    FiniteLaw centered;
    centered.prob = {0.5, 0.5};
    centered.atom = {Vec{1.0}, Vec{-1.0}};
    const RegenTrajectory flat = gen_periodic_env_rw({centered}, 50, 21);
    CHECK(flat.complete_blocks() == 50);
    for (size_t k = 0; k < flat.tau.size(); ++k) CHECK(flat.tau[k] == static_cast<int64_t>(k));

    // period 2 with mirrored biases: analytic drift zero, blocks centered
    const double bias = 0.2;
    FiniteLaw up;
    up.prob = {0.5 + bias, 0.5 - bias};
    up.atom = {Vec{1.0}, Vec{-1.0}};
    FiniteLaw down;
    down.prob = {0.5 - bias, 0.5 + bias};
    down.atom = {Vec{1.0}, Vec{-1.0}};
    const RegenTrajectory mirrored = gen_periodic_env_rw({up, down}, 60000, 22);
    const auto mblocks = block_stats(mirrored);
    double mean_y = 0.0;
    for (const BlockStats& b : mblocks) mean_y += b.increment[0];
    mean_y /= static_cast<double>(mblocks.size());
    double ss = 0.0;
    for (const BlockStats& b : mblocks) ss += (b.increment[0] - mean_y) * (b.increment[0] - mean_y);
    const double se = std::sqrt(ss / static_cast<double>(mblocks.size() - 1) /
                                static_cast<double>(mblocks.size()));
    CHECK(std::abs(mean_y) <= 3.0 * se);
    check_block_invariants(mirrored);

    // L = 3 asymmetric profile: centered blocks within Monte Carlo noise
    FiniteLaw a;
    a.prob = {0.7, 0.3};
    a.atom = {Vec{1.0}, Vec{-1.0}};
    FiniteLaw b;
    b.prob = {0.4, 0.6};
    b.atom = {Vec{1.0}, Vec{-1.0}};
    FiniteLaw c;
    c.prob = {0.5, 0.25, 0.25};
    c.atom = {Vec{1.0}, Vec{-1.0}, Vec{-2.0}};
    const RegenTrajectory asym = gen_periodic_env_rw({a, b, c}, 80000, 23);
    const auto ablocks = block_stats(asym);
    double mean_a = 0.0;
    for (const BlockStats& blk : ablocks) mean_a += blk.increment[0];
    mean_a /= static_cast<double>(ablocks.size());
    double ss_a = 0.0;
    for (const BlockStats& blk : ablocks) ss_a += (blk.increment[0] - mean_a) * (blk.increment[0] - mean_a);
    const double se_a = std::sqrt(ss_a / static_cast<double>(ablocks.size() - 1) /
                                  static_cast<double>(ablocks.size()));
    CHECK(std::abs(mean_a) <= 3.0 * se_a);

    // non-integer first coordinate is rejected
    FiniteLaw frac;
    frac.prob = {0.5, 0.5};
    frac.atom = {Vec{0.5}, Vec{-0.5}};
    CHECK_THROWS_AS(gen_periodic_env_rw({frac, frac}, 10, 1), std::invalid_argument);
}

TEST_CASE("kappa and skeleton walk") {
    const RegenTrajectory rotor = gen_rotor(1.0, false, 43, 5);
    for (int64_t k = 0; k < rotor.complete_blocks(); ++k) {
        CHECK(kappa(rotor, static_cast<double>(rotor.tau[static_cast<size_t>(k)])) == k);
        CHECK(kappa(rotor, static_cast<double>(rotor.tau[static_cast<size_t>(k)]) + 0.5) == k);
    }
    for (int64_t m = 0; m < 10; ++m)
        for (int64_t r = 0; r < 4; ++r) CHECK(kappa(rotor, static_cast<double>(4 * m + r)) == m);
    CHECK_THROWS_AS(kappa(rotor, 40.0), std::out_of_range);
    CHECK_THROWS_AS(kappa(rotor, -1.0), std::out_of_range);

    // rotor skeleton is identically zero
    const Path z = skeleton_walk(rotor);
    for (int64_t k = 0; k <= z.length(); ++k) CHECK(z.value(k).max_abs() == 0.0);

    // random-walk skeleton reproduces the path, Z_K = X_{tau_K}
    const RegenTrajectory walk = gen_delayed_rw(simple_walk_2d(), std::nullopt, 64, 31);
    const Path zw = skeleton_walk(walk);
    for (int64_t k = 0; k <= walk.complete_blocks(); ++k)
        CHECK((zw.value(k) - walk.path.value(walk.tau[static_cast<size_t>(k)])).max_abs() == 0.0);

    // skeleton increments reproduce Y
    const auto blocks = block_stats(walk);
    for (int64_t k = 0; k < walk.complete_blocks(); ++k)
        CHECK(zw.increment(k, k + 1) == blocks[static_cast<size_t>(k)].increment);
}

TEST_CASE("assumption report") {
    const RegenTrajectory rotor = gen_rotor(1.0, false, 400, 6);
    const auto rblocks = block_stats(rotor);
    const AssumptionReport rep = assumption_report(rblocks);
    CHECK_FALSE(rep.any_zero);
    for (const AssumptionRow& row : rep.rows) {
        if (row.exponent == 0 && !row.delay_block) CHECK(row.estimate == 4.0);
        if (row.exponent == 2 && !row.delay_block) CHECK(row.estimate == 4.0);  // Xi = (1,1), T = 4
    }

    // simple walk: E[(Xi^i)^2 T] = 1/2 per coordinate
    const RegenTrajectory walk = gen_delayed_rw(simple_walk_2d(), std::nullopt, 40000, 8);
    const auto wrep = assumption_report(block_stats(walk));
    for (const AssumptionRow& row : wrep.rows) {
        if (row.exponent == 2 && !row.delay_block)
            CHECK(std::abs(row.estimate - 0.5) <= 4.0 * row.se);
    }

    // degenerate functional: zero flags on every coordinate
    MarkovChainSpec spec;
    spec.transition = {{0.5, 0.5}, {0.5, 0.5}};
    spec.f = {Vec{0.0, 0.0}, Vec{0.0, 0.0}};
    spec.anchor = 0;
    const auto zrep = assumption_report(block_stats(gen_markov_additive(spec, 200, 4)));
    CHECK(zrep.any_zero);
}

TEST_CASE("generic blocks are exchangeable between halves") {
    const RegenTrajectory traj = gen_rotor(0.7, true, 60000, 77);
    const auto blocks = block_stats(traj);
    const auto generic = generic_blocks(blocks);
    const size_t half = generic.size() / 2;
    auto mean_stat = [&](size_t lo, size_t hi, auto&& f) {
        double m = 0.0;
        for (size_t k = lo; k < hi; ++k) m += f(generic[k]);
        return m / static_cast<double>(hi - lo);
    };
    auto area = [](const BlockStats& b) { return b.area(0, 1); };
    const double m1 = mean_stat(0, half, area);
    const double m2 = mean_stat(half, generic.size(), area);
    // area entries are bounded by 1, so 4/sqrt(half) is a generous band
    CHECK(std::abs(m1 - m2) <= 4.0 / std::sqrt(static_cast<double>(half)));
}

TEST_CASE("generator config dispatch") {
    GeneratorConfig gen;
    gen.kind = GeneratorConfig::Kind::rotor;
    gen.p_ccw = 1.0;
    CHECK(gen.dim() == 2);
    const RegenTrajectory traj = gen.generate(20, 1);
    CHECK(traj.complete_blocks() == 5);
    CHECK(gen.kind_name() == "rotor");

    GeneratorConfig drift;
    drift.kind = GeneratorConfig::Kind::linear_drift;
    drift.drift_dim = 2;
    const RegenTrajectory dt = drift.generate(10, 99);
    CHECK(dt.path.value(10)[0] == 10.0);
    CHECK(dt.path.value(10)[1] == 0.0);
}
