#pragma once

// Helpers shared by the unit tests. Everything here is deliberately coded
// independently of the library's own evaluation paths.

#include <cstdint>
#include <random>

#include <gmpxx.h>

#include "odegadget/dyadic.hpp"

namespace testing_oracles {

inline mpq_class to_q(const odegadget::Dyadic& d)
{
    mpq_class q(d.mantissa());
    if (d.exponent() >= 0) {
        mpq_mul_2exp(q.get_mpq_t(), q.get_mpq_t(), static_cast<unsigned long>(d.exponent()));
    } else {
        mpq_div_2exp(q.get_mpq_t(), q.get_mpq_t(), static_cast<unsigned long>(-d.exponent()));
    }
    return q;
}

inline odegadget::Dyadic random_dyadic(std::mt19937_64& rng, int mant_bits = 40, int exp_span = 20)
{
    std::uniform_int_distribution<long> mant(-(1L << mant_bits), 1L << mant_bits);
    std::uniform_int_distribution<int> ex(-exp_span, exp_span / 2);
    return odegadget::Dyadic(mpz_class(mant(rng)), ex(rng));
}

}  // namespace testing_oracles
