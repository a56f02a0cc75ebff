#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "roughwalk/path_lift.hpp"
#include "roughwalk/regen.hpp"
#include "roughwalk/rng.hpp"
#include "support.hpp"

using namespace roughwalk;
using namespace testsupport;

namespace {

void check_close(const Mat& a, const Mat& b, double tol) { CHECK((a - b).max_abs() <= tol); }

}  // namespace

TEST_CASE("level2 lift of the unit square loop") {
    const Path loop = square_loop_ccw();
    const Mat lift = level2_stratonovich(loop, 0, 4);

    Mat expected(2);
    expected(0, 1) = 1.0;
    expected(1, 0) = -1.0;
    check_close(lift, expected, 1e-15);
    check_close(lift, istr_oracle(loop, 0, 4), 0.0);

    // orientation reversal negates the area
    const Mat cw = antisym_area(square_loop_cw(), 0, 4);
    check_close(cw, -1.0 * expected, 1e-15);

    // symmetric part vanishes on a closed loop
    CHECK(sym_part(lift).max_abs() <= 1e-15);
}

TEST_CASE("level2 lift basics") {
    const Vec s{0.75, -2.0};
    const Path one = path_from_steps(2, {s});
    check_close(level2_stratonovich(one, 0, 1), 0.5 * outer(s, s), 1e-15);
    CHECK(antisym_area(one, 0, 1).max_abs() == 0.0);
    CHECK(level2_stratonovich(one, 1, 1).max_abs() == 0.0);
    CHECK_THROWS_AS(level2_stratonovich(one, 0, 2), std::out_of_range);
    CHECK_THROWS_AS(level2_stratonovich(one, -1, 1), std::out_of_range);
}

TEST_CASE("chen_combine") {
    const Vec e1 = Vec::unit(2, 0);
    const Vec e2 = Vec::unit(2, 1);

    RoughIncrement a;
    a.s = 0.0;
    a.t = 1.0;
    a.level1 = e1;
    a.level2 = 0.5 * outer(e1, e1);
    RoughIncrement b;
    b.s = 1.0;
    b.t = 2.0;
    b.level1 = e2;
    b.level2 = 0.5 * outer(e2, e2);

    const RoughIncrement ab = chen_combine(a, b);
    const Mat expected = 0.5 * outer(e1, e1) + 0.5 * outer(e2, e2) + outer(e1, e2);
    check_close(ab.level2, expected, 1e-15);
    CHECK(ab.level1 == (e1 + e2));

    // neutral element widens the interval only
    RoughIncrement zero;
    zero.s = -1.0;
    zero.t = 0.0;
    zero.level1 = Vec(2);
    zero.level2 = Mat(2);
    const RoughIncrement widened = chen_combine(zero, a);
    check_close(widened.level2, a.level2, 0.0);
    CHECK(widened.s == -1.0);
    CHECK(widened.t == 1.0);

    // split the square loop at r = 2 and recombine
    const Path loop = square_loop_ccw();
    RoughIncrement left{0.0, 2.0, loop.increment(0, 2), level2_stratonovich(loop, 0, 2)};
    RoughIncrement right{2.0, 4.0, loop.increment(2, 4), level2_stratonovich(loop, 2, 4)};
    check_close(chen_combine(left, right).level2, level2_stratonovich(loop, 0, 4), 1e-15);

    b.s = 1.5;
    CHECK_THROWS_AS(chen_combine(a, b), std::invalid_argument);
}

TEST_CASE("prefix-cache interval queries match the defining sum") {
    Rng rng(5);
    for (int d = 1; d <= 3; ++d) {
        const Path p = real_path(rng, d, 40);
        const ScaledRoughPath lift(p, 8);
        for (int rep = 0; rep < 30; ++rep) {
            int64_t m = static_cast<int64_t>(rng.next_below(41));
            int64_t n = static_cast<int64_t>(rng.next_below(41));
            if (m > n) std::swap(m, n);
            check_close(lift.istr(m, n), istr_oracle(p, m, n), 1e-12);
        }
    }
}

TEST_CASE("eval on grid points equals istr over n") {
    Rng rng(6);
    const Path p = lattice_path(rng, 2, 16);
    const ScaledRoughPath lift(p, 16);

    const RoughIncrement whole = lift.eval(0.0, 1.0);
    check_close(whole.level2, (1.0 / 16.0) * istr_oracle(p, 0, 16), 1e-14);

    const RoughIncrement part = lift.eval(3.0 / 16.0, 11.0 / 16.0);
    check_close(part.level2, (1.0 / 16.0) * istr_oracle(p, 3, 11), 1e-14);
    CHECK((part.level1 - (1.0 / 4.0) * p.increment(3, 11)).max_abs() <= 1e-15);

    const RoughIncrement empty = lift.eval(0.5, 0.5);
    CHECK(empty.level1.max_abs() == 0.0);
    CHECK(empty.level2.max_abs() == 0.0);

    CHECK_THROWS_AS(lift.eval(0.0, 1.5), std::out_of_range);
}

TEST_CASE("eval between grid points is the iterated integral of the interpolation") {
    // two steps a then b at scale 1; for t = 1 + f the exact value is
    // 1/2 a⊗a + f a⊗b + 1/2 f^2 b⊗b
    const Vec a{1.0, 0.5};
    const Vec b{-0.25, 2.0};
    const Path p = path_from_steps(2, {a, b});
    const ScaledRoughPath lift(p, 1);
    const double f = 0.375;
    const Mat expected = 0.5 * outer(a, a) + f * outer(a, b) + 0.5 * f * f * outer(b, b);
    check_close(lift.eval(0.0, 1.0 + f).level2, expected, 1e-15);

    // and the symmetric-part identity holds off-grid as well
    const RoughIncrement inc = lift.eval(0.25, 1.6);
    check_close(sym_part(inc.level2), 0.5 * outer(inc.level1, inc.level1), 1e-15);
}

TEST_CASE("chen defect vanishes for the scaled lift") {
    Rng rng(7);
    const Path p = real_path(rng, 2, 64);
    const ScaledRoughPath lift(p, 16);

    check_close(chen_defect(lift, 0.1, 0.5, 0.9), Mat(2), 1e-12);
    check_close(chen_defect(lift, 0.1, 8.0 / 16.0, 0.9), Mat(2), 1e-12);  // r on the grid

    for (int rep = 0; rep < 200; ++rep) {
        const double horizon = lift.horizon();
        double s = rng.next_double() * horizon;
        double r = rng.next_double() * horizon;
        double t = rng.next_double() * horizon;
        if (s > r) std::swap(s, r);
        if (r > t) std::swap(r, t);
        if (s > r) std::swap(s, r);
        if (s == r || r == t) continue;
        CHECK(chen_defect(lift, s, r, t).max_abs() <= 1e-12);
    }
    CHECK_THROWS_AS(chen_defect(lift, 0.5, 0.5, 0.9), std::invalid_argument);
}

TEST_CASE("symmetric part identity and scaling") {
    Rng rng(8);
    for (int rep = 0; rep < 50; ++rep) {
        const int d = 1 + static_cast<int>(rng.next_below(3));
        const Path p = real_path(rng, d, 24);
        const Mat lift = level2_stratonovich(p, 0, 24);
        const Vec inc = p.increment(0, 24);
        CHECK((sym_part(lift) - 0.5 * outer(inc, inc)).max_abs() <= 1e-12);

        // cX scales level 1 by c and level 2 by c^2
        const double c = 2.5;
        Path scaled = p;
        for (double& v : scaled.values) v *= c;
        check_close(level2_stratonovich(scaled, 0, 24), c * c * lift, 1e-10);
    }
}

TEST_CASE("antisym additivity across a split point") {
    Rng rng(9);
    const Path p = real_path(rng, 3, 30);
    for (int64_t k : {0L, 7L, 15L, 30L}) {
        const Mat whole = antisym_area(p, 0, 30);
        const Mat combined = antisym_area(p, 0, k) + antisym_area(p, k, 30) +
                             antisym_part(outer(p.increment(0, k), p.increment(k, 30)));
        check_close(whole, combined, 1e-12);
    }
}

TEST_CASE("time reversal of a loop negates the area") {
    Rng rng(10);
    // build a loop: random walk out, then retrace the same steps back in reverse
    const Path out = lattice_path(rng, 2, 10);
    Path loop(2, 20);
    for (int64_t k = 0; k <= 10; ++k) loop.set(k, out.value(k));
    for (int64_t k = 1; k <= 10; ++k) loop.set(10 + k, out.value(10 - k));
    CHECK(loop.increment(0, 20).max_abs() == 0.0);

    Path reversed(2, 20);
    for (int64_t k = 0; k <= 20; ++k) reversed.set(k, loop.value(20 - k));
    check_close(antisym_area(reversed, 0, 20), -1.0 * antisym_area(loop, 0, 20), 1e-12);
}

TEST_CASE("decomposition defect vanishes on regenerative trajectories") {
    // single block: lift over one block = 1/2 Y⊗Y + A
    const RegenTrajectory rotor = gen_rotor(1.0, false, 20, 1);
    check_close(decomposition_defect(rotor, 0, 1), Mat(2), 1e-12);
    check_close(decomposition_defect(rotor, 0, 5), Mat(2), 1e-12);
    check_close(decomposition_defect(rotor, 2, 4), Mat(2), 1e-12);

    // random-walk blocks of length 1: the area sum vanishes
    FiniteLaw law;
    law.prob = {0.25, 0.25, 0.25, 0.25};
    law.atom = {Vec{1, 0}, Vec{-1, 0}, Vec{0, 1}, Vec{0, -1}};
    const RegenTrajectory walk = gen_delayed_rw(law, std::nullopt, 30, 2);
    check_close(decomposition_defect(walk, 0, 30), Mat(2), 1e-12);
    for (int64_t u = 1; u <= 30; ++u)
        CHECK(antisym_area(walk.path, u - 1, u).max_abs() == 0.0);

    CHECK_THROWS_AS(decomposition_defect(rotor, 3, 3), std::out_of_range);
    CHECK_THROWS_AS(decomposition_defect(rotor, 0, 99), std::out_of_range);
}

namespace {

// exact integer-mode oracle: on lattice paths every level-2 entry is a
// half-integer, so accumulate 2*istr in int64 without any rounding
Mat istr_exact_lattice(const Path& path, int64_t m, int64_t n) {
    const int d = path.dim;
    std::array<int64_t, kMaxDim * kMaxDim> doubled{};
    for (int64_t k = m + 1; k <= n; ++k) {
        for (int a = 0; a < d; ++a) {
            const int64_t left = llround(path.at(k - 1)[a] - path.at(m)[a]);
            const int64_t sa = llround(path.at(k)[a] - path.at(k - 1)[a]);
            for (int b = 0; b < d; ++b) {
                const int64_t sb = llround(path.at(k)[b] - path.at(k - 1)[b]);
                doubled[static_cast<size_t>(a * d + b)] += 2 * left * sb + sa * sb;
            }
        }
    }
    Mat out(d);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
            out(a, b) = 0.5 * static_cast<double>(doubled[static_cast<size_t>(a * d + b)]);
    return out;
}

}  // namespace

TEST_CASE("double arithmetic is exact on lattice paths") {
    Rng rng(12);
    for (int rep = 0; rep < 40; ++rep) {
        const int d = 1 + static_cast<int>(rng.next_below(3));
        const Path p = lattice_path(rng, d, 48);
        int64_t m = static_cast<int64_t>(rng.next_below(49));
        int64_t n = static_cast<int64_t>(rng.next_below(49));
        if (m > n) std::swap(m, n);
        CHECK(level2_stratonovich(p, m, n) == istr_exact_lattice(p, m, n));
    }
}
