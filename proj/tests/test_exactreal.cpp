#include "doctest.h"

#include <random>

#include "odegadget/interval.hpp"
#include "odegadget/polynomial.hpp"
#include "odegadget/real_name.hpp"
#include "oracles.hpp"

using namespace odegadget;
using testing_oracles::random_dyadic;
using testing_oracles::to_q;

TEST_CASE("dyadic basics")
{
    CHECK(Dyadic::pow2(-1) + Dyadic::pow2(-1) == Dyadic(1));
    CHECK(Dyadic(3L) * Dyadic::pow2(-2) * Dyadic::pow2(1) == Dyadic(mpz_class(3), -1));
    CHECK(Dyadic(mpz_class(3), -2).round_to(1) == Dyadic(1));
    CHECK(Dyadic(mpz_class(-3), -2).round_to(1) == Dyadic(mpz_class(-1), -1));
    CHECK(Dyadic(mpz_class(12), 0).mantissa() == 3);
    CHECK(Dyadic(mpz_class(12), 0).exponent() == 2);
    CHECK(Dyadic().str() == "0p0");
    CHECK(Dyadic(mpz_class(3), -2).str() == "3p-2");
    CHECK(Dyadic::parse("3p-2") == Dyadic(mpz_class(3), -2));
    CHECK(Dyadic::parse("-5p3") == Dyadic(-40L));
    CHECK_THROWS(Dyadic::parse("3q2"));
}

TEST_CASE("dyadic ring matches rationals")
{
    std::mt19937_64 rng(7);
    for (int i = 0; i < 2000; ++i) {
        const Dyadic a = random_dyadic(rng);
        const Dyadic b = random_dyadic(rng);
        CHECK(to_q(a + b) == to_q(a) + to_q(b));
        CHECK(to_q(a - b) == to_q(a) - to_q(b));
        CHECK(to_q(a * b) == to_q(a) * to_q(b));
        CHECK(((a < b) == (to_q(a) < to_q(b))));
        const int n = static_cast<int>(rng() % 30);
        const Dyadic r = a.round_to(n);
        CHECK(r.round_to(n) == r);
        CHECK(r.is_multiple_of_pow2(n));
        mpq_class err = to_q(r) - to_q(a);
        mpq_class half(1, 2);
        mpq_div_2exp(half.get_mpq_t(), half.get_mpq_t(), static_cast<unsigned long>(n));
        CHECK(abs(err) <= half);
        CHECK(to_q(a.floor_to(n)) <= to_q(a));
        CHECK(to_q(a.ceil_to(n)) >= to_q(a));
    }
}

TEST_CASE("interval enclosure soundness")
{
    std::mt19937_64 rng(11);
    for (int i = 0; i < 10000; ++i) {
        Dyadic a = random_dyadic(rng);
        Dyadic b = random_dyadic(rng);
        if (b.is_zero()) b = Dyadic(1);
        const auto bits = static_cast<std::int64_t>(8 + rng() % 40);
        const mpq_class qa = to_q(a);
        const mpq_class qb = to_q(b);
        const DyadicInterval p = DyadicInterval::mul(a, b, bits);
        CHECK(to_q(p.lo()) <= qa * qb);
        CHECK(qa * qb <= to_q(p.hi()));
        const DyadicInterval q = DyadicInterval::div(a, b, bits);
        CHECK(to_q(q.lo()) <= qa / qb);
        CHECK(qa / qb <= to_q(q.hi()));
        const DyadicInterval c = DyadicInterval::pow(a, 3, bits);
        CHECK(to_q(c.lo()) <= qa * qa * qa);
        CHECK(qa * qa * qa <= to_q(c.hi()));
    }
}

TEST_CASE("exp enclosure")
{
    const DyadicInterval one = exp_enclosure(DyadicInterval(Dyadic(0)), 30);
    CHECK(one.lo() == Dyadic(1));
    CHECK(one.hi() == Dyadic(1));

    // e to 50 digits, tabulated
    const mpz_class digits("271828182845904523536028747135266249775724709369995");
    mpz_class ten50;
    mpz_ui_pow_ui(ten50.get_mpz_t(), 10, 50);
    const mpq_class e_lo(digits, ten50);
    const mpq_class e_hi(digits + 1, ten50);
    for (std::int64_t n : {10, 40, 160}) {
        const DyadicInterval e = exp_enclosure(DyadicInterval(Dyadic(1)), n);
        if (n <= 160) {
            CHECK(to_q(e.lo()) <= e_hi);
            CHECK(to_q(e.hi()) >= e_lo);
        }
        CHECK(e.width().log2_ceil_bound() <= -n);
    }

    // e^-100 < 2^-100
    const DyadicInterval small = exp_enclosure(DyadicInterval(Dyadic(-100)), 200);
    CHECK(small.lo().sign() >= 0);
    CHECK(small.hi() <= Dyadic::pow2(-100));

    // e^a e^b = e^(a+b) on enclosures
    std::mt19937_64 rng(3);
    for (int i = 0; i < 50; ++i) {
        const Dyadic a = random_dyadic(rng, 20, 24);
        const Dyadic b = random_dyadic(rng, 20, 24);
        const auto ea = exp_point(a, 120);
        const auto eb = exp_point(b, 120);
        const auto eab = exp_point(a + b, 120);
        const auto prod = ea * eb;
        CHECK(prod.lo() <= eab.hi());
        CHECK(eab.lo() <= prod.hi());
    }
}

TEST_CASE("precision driver reports the cap")
{
    auto bad = [](std::int64_t) { return DyadicInterval(Dyadic(0), Dyadic(1)); };
    CHECK_THROWS_AS(approximate(bad, 10), PrecisionError);
}

TEST_CASE("names")
{
    auto third = name_of([](std::int64_t bits) { return divide(Dyadic(1), Dyadic(3), bits); });
    const Dyadic q2 = third(2);
    CHECK((q2 == Dyadic::pow2(-2) || q2 == Dyadic::pow2(-1)));
    for (std::int64_t n = 0; n < 40; ++n) {
        const Dyadic a = third(n);
        CHECK(a.is_multiple_of_pow2(n));
        const mpq_class x(1, 3);
        mpq_class scaled = x;
        mpq_mul_2exp(scaled.get_mpq_t(), scaled.get_mpq_t(), static_cast<unsigned long>(n));
        const mpz_class fl = scaled.get_num() / scaled.get_den();
        const mpz_class an = a.floor_scaled(n);
        CHECK((an == fl || an == fl + 1));
        for (std::int64_t m = 0; m < 40; m += 7) {
            CHECK((third(n) - third(m)).abs() <= Dyadic::pow2(-n) + Dyadic::pow2(-m));
        }
    }
    auto zero = name_of([](std::int64_t) { return DyadicInterval(Dyadic(0)); });
    CHECK(zero(17) == Dyadic(0));
    CHECK(RealName::exact(Dyadic(mpz_class(5), -3))(2) == Dyadic(mpz_class(1), -1));
}

TEST_CASE("modulus check")
{
    NamedFunction constant = [](const Dyadic&) { return RealName::exact(Dyadic(mpz_class(1), -1)); };
    CHECK(check_modulus(constant, Polynomial{0}).pass);
    NamedFunction identity = [](const Dyadic& x) { return RealName::exact(x); };
    CHECK(check_modulus(identity, Polynomial{0, 1}).pass);
    NamedFunction steep = [](const Dyadic& x) { return RealName::exact(x.scaled(10)); };
    const auto v = check_modulus(steep, Polynomial{0, 1});
    CHECK_FALSE(v.pass);
    CHECK(v.witness.has_value());
}

TEST_CASE("polynomials")
{
    const Polynomial p{1, 2, 3};
    CHECK(p.eval(2) == 17);
    CHECK((p + Polynomial{0, 1}).eval(2) == 19);
    CHECK((p * Polynomial{0, 1}).eval(2) == 34);
    CHECK(p.compose(Polynomial{1, 1}).eval(1) == 17);
    CHECK(p.str() == "3x^2 + 2x + 1");
    CHECK_THROWS(Polynomial(std::vector<mpz_class>{mpz_class(-1)}));
}
