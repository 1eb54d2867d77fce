#include "odegadget/dyadic.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace odegadget {

namespace {

std::uint64_t bit_length(const mpz_class& m)
{
    return sgn(m) == 0 ? 0 : mpz_sizeinbase(m.get_mpz_t(), 2);
}

mpz_class shl(const mpz_class& m, std::uint64_t shift)
{
    mpz_class r;
    mpz_mul_2exp(r.get_mpz_t(), m.get_mpz_t(), shift);
    return r;
}

}  // namespace

Dyadic::Dyadic(long value) : mantissa_(value) { canonicalize(); }

Dyadic::Dyadic(const mpz_class& integer) : mantissa_(integer) { canonicalize(); }

Dyadic::Dyadic(mpz_class mantissa, std::int64_t exponent)
    : mantissa_(std::move(mantissa)), exponent_(exponent)
{
    canonicalize();
}

Dyadic Dyadic::pow2(std::int64_t exponent) { return Dyadic(mpz_class(1), exponent); }

void Dyadic::canonicalize()
{
    if (sgn(mantissa_) == 0) {
        exponent_ = 0;
        return;
    }
    const auto tz = mpz_scan1(mantissa_.get_mpz_t(), 0);
    if (tz > 0) {
        mpz_tdiv_q_2exp(mantissa_.get_mpz_t(), mantissa_.get_mpz_t(), tz);
        exponent_ += static_cast<std::int64_t>(tz);
    }
}

std::int64_t Dyadic::log2_floor() const
{
    if (is_zero()) throw std::domain_error("log2 of zero");
    return static_cast<std::int64_t>(bit_length(mantissa_)) - 1 + exponent_;
}

std::int64_t Dyadic::log2_ceil_bound() const
{
    if (is_zero()) return std::numeric_limits<std::int64_t>::min() / 2;
    // mantissa is odd, so it is a power of two only when it is +-1
    if (mantissa_ == 1 || mantissa_ == -1) return exponent_;
    return static_cast<std::int64_t>(bit_length(mantissa_)) + exponent_;
}

Dyadic Dyadic::operator-() const
{
    Dyadic r = *this;
    r.mantissa_ = -r.mantissa_;
    return r;
}

Dyadic operator+(const Dyadic& a, const Dyadic& b)
{
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    const std::int64_t e = std::min(a.exponent_, b.exponent_);
    mpz_class m = shl(a.mantissa_, static_cast<std::uint64_t>(a.exponent_ - e));
    if (b.exponent_ == e) {
        m += b.mantissa_;
    } else {
        m += shl(b.mantissa_, static_cast<std::uint64_t>(b.exponent_ - e));
    }
    return Dyadic(std::move(m), e);
}

Dyadic operator-(const Dyadic& a, const Dyadic& b) { return a + (-b); }

Dyadic operator*(const Dyadic& a, const Dyadic& b)
{
    if (a.is_zero() || b.is_zero()) return Dyadic();
    Dyadic r;
    r.mantissa_ = a.mantissa_ * b.mantissa_;
    r.exponent_ = a.exponent_ + b.exponent_;
    return r;  // product of odd mantissas is odd
}

Dyadic& Dyadic::operator+=(const Dyadic& other) { return *this = *this + other; }
Dyadic& Dyadic::operator-=(const Dyadic& other) { return *this = *this - other; }
Dyadic& Dyadic::operator*=(const Dyadic& other) { return *this = *this * other; }

Dyadic Dyadic::scaled(std::int64_t shift) const
{
    if (is_zero()) return *this;
    Dyadic r = *this;
    r.exponent_ += shift;
    return r;
}

Dyadic Dyadic::abs() const { return sign() < 0 ? -*this : *this; }

bool operator==(const Dyadic& a, const Dyadic& b)
{
    return a.exponent_ == b.exponent_ && a.mantissa_ == b.mantissa_;
}

std::strong_ordering operator<=>(const Dyadic& a, const Dyadic& b)
{
    const int sa = a.sign();
    const int sb = b.sign();
    if (sa != sb) return sa <=> sb;
    if (sa == 0) return std::strong_ordering::equal;
    const auto la = a.log2_floor();
    const auto lb = b.log2_floor();
    if (la != lb) return sa > 0 ? (la <=> lb) : (lb <=> la);
    const Dyadic d = a - b;
    return d.sign() <=> 0;
}

mpz_class Dyadic::floor_scaled(std::int64_t n) const
{
    mpz_class r;
    const std::int64_t e = exponent_ + n;
    if (e >= 0) {
        mpz_mul_2exp(r.get_mpz_t(), mantissa_.get_mpz_t(), static_cast<std::uint64_t>(e));
    } else {
        mpz_fdiv_q_2exp(r.get_mpz_t(), mantissa_.get_mpz_t(), static_cast<std::uint64_t>(-e));
    }
    return r;
}

mpz_class Dyadic::ceil_scaled(std::int64_t n) const
{
    mpz_class r;
    const std::int64_t e = exponent_ + n;
    if (e >= 0) {
        mpz_mul_2exp(r.get_mpz_t(), mantissa_.get_mpz_t(), static_cast<std::uint64_t>(e));
    } else {
        mpz_cdiv_q_2exp(r.get_mpz_t(), mantissa_.get_mpz_t(), static_cast<std::uint64_t>(-e));
    }
    return r;
}

bool Dyadic::is_multiple_of_pow2(std::int64_t n) const
{
    return is_zero() || exponent_ + n >= 0;
}

Dyadic Dyadic::round_to(std::int64_t n) const
{
    mpz_class twice = floor_scaled(n + 1) + 1;
    mpz_class r;
    mpz_fdiv_q_2exp(r.get_mpz_t(), twice.get_mpz_t(), 1);
    return Dyadic(std::move(r), -n);
}

Dyadic Dyadic::floor_to(std::int64_t n) const { return Dyadic(floor_scaled(n), -n); }

Dyadic Dyadic::ceil_to(std::int64_t n) const { return Dyadic(ceil_scaled(n), -n); }

Dyadic Dyadic::round_bits_down(std::int64_t bits) const
{
    const auto bl = static_cast<std::int64_t>(bit_length(mantissa_));
    if (bits < 1) bits = 1;
    if (bl <= bits) return *this;
    const std::int64_t shift = bl - bits;
    mpz_class m;
    mpz_fdiv_q_2exp(m.get_mpz_t(), mantissa_.get_mpz_t(), static_cast<std::uint64_t>(shift));
    return Dyadic(std::move(m), exponent_ + shift);
}

Dyadic Dyadic::round_bits_up(std::int64_t bits) const
{
    const auto bl = static_cast<std::int64_t>(bit_length(mantissa_));
    if (bits < 1) bits = 1;
    if (bl <= bits) return *this;
    const std::int64_t shift = bl - bits;
    mpz_class m;
    mpz_cdiv_q_2exp(m.get_mpz_t(), mantissa_.get_mpz_t(), static_cast<std::uint64_t>(shift));
    return Dyadic(std::move(m), exponent_ + shift);
}

double Dyadic::to_double() const
{
    if (is_zero()) return 0.0;
    long e = 0;
    const double d = mpz_get_d_2exp(&e, mantissa_.get_mpz_t());
    const std::int64_t total = static_cast<std::int64_t>(e) + exponent_;
    if (total > 4000) return std::copysign(HUGE_VAL, d);
    if (total < -4000) return std::copysign(0.0, d);
    return std::ldexp(d, static_cast<int>(total));
}

std::string Dyadic::str() const
{
    return mantissa_.get_str(10) + "p" + std::to_string(exponent_);
}

Dyadic Dyadic::parse(std::string_view text)
{
    const auto p = text.find('p');
    if (p == std::string_view::npos || p == 0 || p + 1 == text.size()) {
        throw std::invalid_argument("malformed dyadic literal: " + std::string(text));
    }
    std::string_view mant = text.substr(0, p);
    if (mant.front() == '+') mant.remove_prefix(1);
    mpz_class m;
    if (mant.empty() || m.set_str(std::string(mant), 10) != 0) {
        throw std::invalid_argument("malformed dyadic mantissa: " + std::string(text));
    }
    const std::string_view exp_text = text.substr(p + 1);
    std::int64_t e = 0;
    const auto* first = exp_text.data();
    const auto* last = exp_text.data() + exp_text.size();
    const auto res = std::from_chars(first, last, e);
    if (res.ec != std::errc() || res.ptr != last) {
        throw std::invalid_argument("malformed dyadic exponent: " + std::string(text));
    }
    return Dyadic(std::move(m), e);
}

std::ostream& operator<<(std::ostream& os, const Dyadic& d) { return os << d.str(); }

Dyadic min(const Dyadic& a, const Dyadic& b) { return b < a ? b : a; }
Dyadic max(const Dyadic& a, const Dyadic& b) { return a < b ? b : a; }

}  // namespace odegadget
