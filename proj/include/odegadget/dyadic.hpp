#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

#include <gmpxx.h>

namespace odegadget {

/// Exact binary rational mantissa * 2^exponent.
///
/// Values are kept canonical: the mantissa is odd, or zero with exponent 0.
/// All ring operations are exact; rounding only happens through the
/// explicit round_to / floor_to / ceil_to / round_bits_* helpers.
class Dyadic {
public:
    Dyadic() = default;
    Dyadic(long value);  // NOLINT(google-explicit-constructor)
    explicit Dyadic(const mpz_class& integer);
    Dyadic(mpz_class mantissa, std::int64_t exponent);

    static Dyadic pow2(std::int64_t exponent);

    const mpz_class& mantissa() const { return mantissa_; }
    std::int64_t exponent() const { return exponent_; }

    bool is_zero() const { return sgn(mantissa_) == 0; }
    int sign() const { return sgn(mantissa_); }
    bool is_integer() const { return exponent_ >= 0; }

    /// floor(log2 |x|); undefined for zero.
    std::int64_t log2_floor() const;
    /// Smallest e with |x| <= 2^e; returns INT64_MIN/2 for zero.
    std::int64_t log2_ceil_bound() const;

    Dyadic operator-() const;
    friend Dyadic operator+(const Dyadic& a, const Dyadic& b);
    friend Dyadic operator-(const Dyadic& a, const Dyadic& b);
    friend Dyadic operator*(const Dyadic& a, const Dyadic& b);
    Dyadic& operator+=(const Dyadic& other);
    Dyadic& operator-=(const Dyadic& other);
    Dyadic& operator*=(const Dyadic& other);

    /// x * 2^shift, exact.
    Dyadic scaled(std::int64_t shift) const;
    Dyadic abs() const;

    friend bool operator==(const Dyadic& a, const Dyadic& b);
    friend std::strong_ordering operator<=>(const Dyadic& a, const Dyadic& b);

    /// floor(x * 2^n) as an integer.
    mpz_class floor_scaled(std::int64_t n) const;
    mpz_class ceil_scaled(std::int64_t n) const;
    /// True when x * 2^n is an integer.
    bool is_multiple_of_pow2(std::int64_t n) const;

    /// Nearest multiple of 2^-n, ties toward +infinity.
    Dyadic round_to(std::int64_t n) const;
    Dyadic floor_to(std::int64_t n) const;
    Dyadic ceil_to(std::int64_t n) const;

    /// Round to at most `bits` significant mantissa bits, toward -inf / +inf.
    Dyadic round_bits_down(std::int64_t bits) const;
    Dyadic round_bits_up(std::int64_t bits) const;

    /// Integer part toward -infinity.
    mpz_class floor() const { return floor_scaled(0); }

    /// Lossy conversion for plotting columns only.
    double to_double() const;

    /// `<sign><mantissa-decimal>p<exponent>`, e.g. `3p-2` for 3/4 and `0p0` for zero.
    std::string str() const;
    static Dyadic parse(std::string_view text);

private:
    void canonicalize();

    mpz_class mantissa_{0};
    std::int64_t exponent_{0};
};

std::ostream& operator<<(std::ostream& os, const Dyadic& d);

Dyadic min(const Dyadic& a, const Dyadic& b);
Dyadic max(const Dyadic& a, const Dyadic& b);

}  // namespace odegadget
