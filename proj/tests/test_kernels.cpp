#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cstring>
#include <vector>

#include "roughwalk/kernels/kernels.hpp"
#include "roughwalk/path_lift.hpp"
#include "roughwalk/rng.hpp"
#include "support.hpp"

using namespace roughwalk;
namespace rk = roughwalk::kernels;

namespace {

struct SoaCase {
    std::vector<std::vector<double>> coords;
    std::vector<std::vector<double>> prefix;
    std::array<const double*, kMaxDim * kMaxDim> cptr{};
    std::array<const double*, kMaxDim * kMaxDim> pptr{};
    int d = 0;
    int64_t n = 0;
};

SoaCase random_case(Rng& rng, int d, int64_t n) {
    SoaCase sc;
    sc.d = d;
    sc.n = n;
    const testsupport::Path path = testsupport::real_path(rng, d, n - 1);
    const ScaledRoughPath lift(path, n);
    sc.coords.resize(static_cast<size_t>(d));
    for (int c = 0; c < d; ++c) {
        sc.coords[static_cast<size_t>(c)].resize(static_cast<size_t>(n));
        for (int64_t k = 0; k < n; ++k)
            sc.coords[static_cast<size_t>(c)][static_cast<size_t>(k)] = path.at(k)[c] - path.at(0)[c];
        sc.cptr[static_cast<size_t>(c)] = sc.coords[static_cast<size_t>(c)].data();
    }
    sc.prefix.resize(static_cast<size_t>(d) * d);
    for (int e = 0; e < d * d; ++e) {
        sc.prefix[static_cast<size_t>(e)].resize(static_cast<size_t>(n));
        for (int64_t k = 0; k < n; ++k)
            sc.prefix[static_cast<size_t>(e)][static_cast<size_t>(k)] = lift.prefix_row(k)[e];
        sc.pptr[static_cast<size_t>(e)] = sc.prefix[static_cast<size_t>(e)].data();
    }
    return sc;
}

}  // namespace

TEST_CASE("scalar kernel pvar dp on frozen examples") {
    const auto& kt = rk::scalar_kernels();
    // samples 0, 1, 0 in 1d at p = 2: best partition takes both steps
    const std::vector<double> xs{0.0, 1.0, 0.0};
    const double* coords[1] = {xs.data()};
    CHECK(kt.pvar_l1(coords, 1, 3, 2.0) == 2.0);
    // monotone samples at p = 1: total variation 3
    const std::vector<double> mono{0.0, 1.0, 2.0, 3.0};
    const double* mc[1] = {mono.data()};
    CHECK(kt.pvar_l1(mc, 1, 4, 1.0) == 3.0);
}

TEST_CASE("avx2 kernels match scalar bit for bit") {
    if (!rk::avx2_supported()) return;  // nothing to compare on this host
    const auto& sc = rk::scalar_kernels();
    const auto& av = rk::avx2_kernels();

    Rng rng(2024);
    const double exponents[] = {1.0, 2.0, 2.5, 1.25, 3.7};
    for (int d = 1; d <= 3; ++d) {
        for (int64_t n : {2, 3, 5, 17, 64, 201}) {
            SoaCase cse = random_case(rng, d, n);
            for (double p : exponents) {
                const double a = sc.pvar_l1(cse.cptr.data(), d, n, p);
                const double b = av.pvar_l1(cse.cptr.data(), d, n, p);
                CHECK(std::memcmp(&a, &b, sizeof(double)) == 0);
                const double a2 = sc.pvar_l2(cse.pptr.data(), cse.cptr.data(), d, n, p);
                const double b2 = av.pvar_l2(cse.pptr.data(), cse.cptr.data(), d, n, p);
                CHECK(std::memcmp(&a2, &b2, sizeof(double)) == 0);
            }
        }
    }
}

TEST_CASE("lift accumulation kernels agree bitwise and match the defining sum") {
    Rng rng(99);
    const testsupport::Path path = testsupport::real_path(rng, 2, 157);
    const int64_t n = path.length();

    double acc_s[4] = {0, 0, 0, 0};
    std::vector<double> pre_s(static_cast<size_t>(4 * (n + 1)));
    rk::scalar_kernels().lift_accum_d2(path.values.data(), n, acc_s, pre_s.data());

    // prefix rows replay the defining sum exactly (same operation order)
    const Mat direct = level2_stratonovich(path, 0, n);
    CHECK(acc_s[0] == direct(0, 0));
    CHECK(acc_s[1] == direct(0, 1));
    CHECK(acc_s[2] == direct(1, 0));
    CHECK(acc_s[3] == direct(1, 1));
    const Mat half = level2_stratonovich(path, 0, n / 2);
    CHECK(pre_s[static_cast<size_t>(4 * (n / 2)) + 1] == half(0, 1));

    if (!rk::avx2_supported()) return;
    double acc_a[4] = {0, 0, 0, 0};
    std::vector<double> pre_a(static_cast<size_t>(4 * (n + 1)));
    rk::avx2_kernels().lift_accum_d2(path.values.data(), n, acc_a, pre_a.data());
    CHECK(std::memcmp(acc_s, acc_a, sizeof(acc_s)) == 0);
    CHECK(std::memcmp(pre_s.data(), pre_a.data(), pre_s.size() * sizeof(double)) == 0);
}

TEST_CASE("isa override switches the active table") {
    const rk::Isa before = rk::active_isa();
    rk::set_active_isa(rk::Isa::scalar);
    CHECK(std::string(rk::active_kernels().isa_name) == "scalar");
    if (rk::avx2_supported()) {
        rk::set_active_isa(rk::Isa::avx2);
        CHECK(std::string(rk::active_kernels().isa_name) == "avx2");
    }
    rk::set_active_isa(before);
}
