#include "doctest.h"

#include "odegadget/bump.hpp"
#include "oracles.hpp"

using namespace odegadget;

namespace {

const BumpFunction& bump() { return BumpFunction::instance(); }

Dyadic dy(long m, std::int64_t e) { return Dyadic(mpz_class(m), e); }

}  // namespace

TEST_CASE("endpoint values")
{
    CHECK(bump().f(Dyadic(0), 40) == Dyadic(0));
    CHECK(bump().f(Dyadic(1), 40) == Dyadic(1));
    CHECK(bump().eval(1, Dyadic(0), 40) == Dyadic(0));
    CHECK(bump().eval(2, Dyadic(1), 40) == Dyadic(0));
    const Dyadic half = bump().f(dy(1, -1), 10);
    CHECK((half - dy(1, -1)).abs() <= Dyadic::pow2(-10));
    // at t = 1/2 everything is exact: F = 1/2, u = v = 2, so Df = 2
    CHECK(bump().enclose(1, dy(1, -1), 64).lo() == Dyadic(2));
    CHECK(bump().enclose(1, dy(1, -1), 64).hi() == Dyadic(2));
}

TEST_CASE("symmetry and monotonicity")
{
    for (unsigned i = 1; i < 256; ++i) {
        const Dyadic t = dy(static_cast<long>(i), -8);
        const std::int64_t n = 40;
        const Dyadic s = bump().f(t, n) + bump().f(Dyadic(1) - t, n) - Dyadic(1);
        CHECK(s.abs() <= Dyadic::pow2(1 - n));
    }
    for (unsigned i = 0; i < 1024; ++i) {
        const Dyadic t1 = dy(static_cast<long>(i % 248), -8);
        const Dyadic t2 = t1 + dy(static_cast<long>(1 + i % 8), -8);
        // strict at resolution: the enclosures are disjoint and ordered
        const auto a = bump().enclose_f(t1, 128);
        const auto b = bump().enclose_f(t2, 128);
        CHECK(a.hi() < b.lo());
    }
}

TEST_CASE("derivatives agree with central differences")
{
    const Dyadic h = Dyadic::pow2(-12);
    const std::int64_t n = 60;
    for (unsigned m = 1; m <= 4; ++m) {
        // |D^2 (D^{m-1} f)'''| <= 2^{s(m+2)}: error h^2/6 2^{s(m+2)} plus evaluation slack
        const Dyadic envelope = (h * h * Dyadic::pow2(bump().s(m + 2))).scaled(-2) + Dyadic::pow2(-n + 13);
        for (unsigned i = 1; i < 32; ++i) {
            const Dyadic t = dy(static_cast<long>(2 * i + 1), -6);
            if (t + h > Dyadic(1)) continue;
            const Dyadic fd = (bump().eval(m - 1, t + h, n) - bump().eval(m - 1, t - h, n)) * Dyadic::pow2(11);
            INFO("m=" << m << " t=" << t);
            CHECK((fd - bump().eval(m, t, n)).abs() <= envelope);
        }
    }
}

TEST_CASE("shipped bounds")
{
    CHECK(bump().s(0) == 0);
    CHECK(bump().s(1) >= 0);
    for (unsigned m = 1; m <= 8; ++m) CHECK(bump().s(m) >= bump().s(m - 1));
    CHECK(bump().s(9) >= bump().s(8));
    CHECK(bump().s(20) == 420);
}

TEST_CASE("certification reproduces the table and dominates sampling")
{
    for (unsigned m = 0; m <= 3; ++m) {
        const auto cert = bump().certify_bound(m);
        CHECK(cert.s == BumpFunction::kShippedBounds[m]);
        CHECK(cert.upper <= Dyadic::pow2(cert.s));
        Dyadic sampled;
        for (unsigned i = 0; i <= 4096; ++i) {
            sampled = max(sampled, bump().eval(m, dy(static_cast<long>(i), -12), 40).abs());
        }
        CHECK(sampled <= cert.upper + Dyadic::pow2(-40));
    }
    CHECK(bump().certify_bound(1).s == 1);
}

TEST_CASE("polynomial structure")
{
    // every term of D^m f carries a factor F
    for (unsigned m = 1; m <= 6; ++m) {
        for (const auto& [e, c] : bump().polynomial(m).terms()) CHECK(std::get<0>(e) >= 1);
    }
    CHECK(bump().polynomial(1).size() == 4);
    CHECK_THROWS_AS(bump().eval(9, dy(1, -2), 10), std::out_of_range);
}
