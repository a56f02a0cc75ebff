#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <set>

#include "roughwalk/linalg.hpp"
#include "roughwalk/parallel.hpp"
#include "roughwalk/rng.hpp"

using namespace roughwalk;

TEST_CASE("vec and mat basics") {
    Vec a{1.0, 2.0};
    Vec b{3.0, -1.0};
    CHECK((a + b)[0] == 4.0);
    CHECK((a - b)[1] == 3.0);
    CHECK(a.dot(b) == 1.0);
    CHECK(Vec::unit(3, 2)[2] == 1.0);

    const Mat m = outer(a, b);
    CHECK(m(0, 0) == 3.0);
    CHECK(m(1, 0) == 6.0);
    CHECK(m(0, 1) == -1.0);

    const Mat s = sym_part(m);
    const Mat t = antisym_part(m);
    CHECK((s + t) == m);
    CHECK(t(0, 1) == -t(1, 0));
    CHECK(Mat::identity(2).frobenius() == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("solve_linear matches hand inverse and pivots") {
    // [[2, 1], [1, 3]] x = [5, 10] -> x = [1, 3]
    auto x = solve_linear({2, 1, 1, 3}, {5, 10}, 2);
    CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(x[1] == doctest::Approx(3.0).epsilon(1e-14));

    // needs a row swap: zero pivot up front
    auto y = solve_linear({0, 1, 1, 0}, {2, 3}, 2);
    CHECK(y[0] == doctest::Approx(3.0));
    CHECK(y[1] == doctest::Approx(2.0));

    // multiple right-hand sides
    auto z = solve_linear({1, 0, 0, 2}, {1, 2, 3, 4}, 2, 2);
    CHECK(z[0] == doctest::Approx(1.0));
    CHECK(z[3] == doctest::Approx(2.0));

    CHECK_THROWS_AS(solve_linear({1, 1, 1, 1}, {1, 1}, 2), std::runtime_error);
}

TEST_CASE("sym_eigenvalues on known matrices") {
    Mat m(2);
    m(0, 0) = 2.0;
    m(0, 1) = 1.0;
    m(1, 0) = 1.0;
    m(1, 1) = 2.0;
    const auto ev = sym_eigenvalues(m);
    CHECK(ev[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ev[1] == doctest::Approx(3.0).epsilon(1e-12));

    Mat d3(3);
    d3(0, 0) = -1.0;
    d3(1, 1) = 4.0;
    d3(2, 2) = 0.5;
    const auto ev3 = sym_eigenvalues(d3);
    CHECK(ev3[0] == doctest::Approx(-1.0));
    CHECK(ev3[2] == doctest::Approx(4.0));
}

TEST_CASE("rng determinism and basic stats") {
    Rng a(42);
    Rng b(42);
    for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());

    Rng c(7);
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) sum += c.next_double();
    CHECK(std::abs(sum / n - 0.5) < 0.01);

    Rng d(9);
    for (int i = 0; i < 1000; ++i) CHECK(d.next_below(7) < 7);
}

TEST_CASE("derive_seed separates streams and indices") {
    std::set<uint64_t> seen;
    for (uint64_t s = 0; s < 8; ++s)
        for (uint64_t i = 0; i < 64; ++i) seen.insert(derive_seed(123, s, i));
    CHECK(seen.size() == 8 * 64);
    CHECK(derive_seed(1, 2, 3) != derive_seed(2, 2, 3));
}

TEST_CASE("discrete sampler hits frequencies") {
    const std::vector<double> probs{0.5, 0.25, 0.25};
    DiscreteSampler sampler(probs);
    Rng rng(11);
    std::array<int, 3> counts{};
    const int n = 60000;
    for (int i = 0; i < n; ++i) counts[static_cast<size_t>(sampler.sample(rng))]++;
    for (size_t k = 0; k < 3; ++k) {
        const double se = std::sqrt(probs[k] * (1 - probs[k]) / n);
        CHECK(std::abs(counts[k] / static_cast<double>(n) - probs[k]) < 4 * se);
    }
    CHECK_THROWS_AS(DiscreteSampler(std::vector<double>{0.5, 0.4}), std::invalid_argument);
}

TEST_CASE("kahan sum compensates") {
    KahanSum s;
    s.add(1e16);
    for (int i = 0; i < 10; ++i) s.add(1.0);
    s.add(-1e16);
    CHECK(s.value() == 10.0);
}

TEST_CASE("run_trials is worker-count independent and rethrows") {
    auto fn = [](int64_t t) { return static_cast<double>(t) * 1.5; };
    const auto r1 = run_trials<double>(101, 1, fn);
    const auto r4 = run_trials<double>(101, 4, fn);
    CHECK(r1 == r4);

    CHECK_THROWS_AS(run_trials<int>(10, 3,
                                    [](int64_t t) -> int {
                                        if (t == 7) throw std::runtime_error("boom");
                                        return 0;
                                    }),
                    std::runtime_error);
}
