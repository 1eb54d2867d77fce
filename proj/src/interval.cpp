#include "odegadget/interval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace odegadget {

namespace {

std::uint64_t bit_length(const mpz_class& m)
{
    return sgn(m) == 0 ? 0 : mpz_sizeinbase(m.get_mpz_t(), 2);
}

// floor and ceil of a / b with `bits` significant bits.
std::pair<Dyadic, Dyadic> quotient_bounds(const Dyadic& a, const Dyadic& b, std::int64_t bits)
{
    if (b.is_zero()) throw std::domain_error("division by zero");
    if (a.is_zero()) return {Dyadic(), Dyadic()};
    const auto la = static_cast<std::int64_t>(bit_length(a.mantissa()));
    const auto lb = static_cast<std::int64_t>(bit_length(b.mantissa()));
    const std::int64_t shift = std::max<std::int64_t>(0, bits + lb - la + 2);
    mpz_class num;
    mpz_mul_2exp(num.get_mpz_t(), a.mantissa().get_mpz_t(), static_cast<std::uint64_t>(shift));
    mpz_class qf;
    mpz_class qc;
    mpz_fdiv_q(qf.get_mpz_t(), num.get_mpz_t(), b.mantissa().get_mpz_t());
    mpz_cdiv_q(qc.get_mpz_t(), num.get_mpz_t(), b.mantissa().get_mpz_t());
    const std::int64_t e = a.exponent() - b.exponent() - shift;
    return {Dyadic(std::move(qf), e), Dyadic(std::move(qc), e)};
}

Dyadic pow_rounded(const Dyadic& base, unsigned k, std::int64_t bits, bool up)
{
    Dyadic result(1);
    Dyadic b = base;
    unsigned e = k;
    auto rnd = [&](const Dyadic& x) {
        if (bits <= 0) return x;
        return up ? x.round_bits_up(bits) : x.round_bits_down(bits);
    };
    while (e > 0) {
        if (e & 1U) result = rnd(result * b);
        e >>= 1U;
        if (e > 0) b = rnd(b * b);
    }
    return result;
}

}  // namespace

DyadicInterval::DyadicInterval(Dyadic point) : lo_(point), hi_(std::move(point)) {}

DyadicInterval::DyadicInterval(Dyadic lo, Dyadic hi) : lo_(std::move(lo)), hi_(std::move(hi))
{
    if (hi_ < lo_) throw std::invalid_argument("interval with lo > hi");
}

Dyadic DyadicInterval::magnitude() const { return max(lo_.abs(), hi_.abs()); }

DyadicInterval DyadicInterval::mul(const DyadicInterval& a, const DyadicInterval& b,
                                   std::int64_t bits)
{
    Dyadic lo;
    Dyadic hi;
    if (a.lo_.sign() >= 0 && b.lo_.sign() >= 0) {
        lo = a.lo_ * b.lo_;
        hi = a.hi_ * b.hi_;
    } else if (a.is_point() && b.is_point()) {
        lo = a.lo_ * b.lo_;
        hi = lo;
    } else {
        const Dyadic p1 = a.lo_ * b.lo_;
        const Dyadic p2 = a.lo_ * b.hi_;
        const Dyadic p3 = a.hi_ * b.lo_;
        const Dyadic p4 = a.hi_ * b.hi_;
        lo = min(min(p1, p2), min(p3, p4));
        hi = max(max(p1, p2), max(p3, p4));
    }
    DyadicInterval r(std::move(lo), std::move(hi));
    return bits > 0 ? r.round_out(bits) : r;
}

DyadicInterval DyadicInterval::recip(const DyadicInterval& x, std::int64_t bits)
{
    if (x.contains_zero()) throw std::domain_error("reciprocal of an interval containing zero");
    auto lo = quotient_bounds(Dyadic(1), x.hi_, bits).first;
    auto hi = quotient_bounds(Dyadic(1), x.lo_, bits).second;
    return {std::move(lo), std::move(hi)};
}

DyadicInterval DyadicInterval::div(const DyadicInterval& a, const DyadicInterval& b,
                                   std::int64_t bits)
{
    if (b.contains_zero()) throw std::domain_error("division by an interval containing zero");
    const auto q1 = quotient_bounds(a.lo_, b.lo_, bits);
    const auto q2 = quotient_bounds(a.lo_, b.hi_, bits);
    const auto q3 = quotient_bounds(a.hi_, b.lo_, bits);
    const auto q4 = quotient_bounds(a.hi_, b.hi_, bits);
    return {min(min(q1.first, q2.first), min(q3.first, q4.first)),
            max(max(q1.second, q2.second), max(q3.second, q4.second))};
}

DyadicInterval DyadicInterval::pow(const DyadicInterval& x, unsigned k, std::int64_t bits)
{
    if (k == 0) return DyadicInterval(Dyadic(1));
    if (x.lo_.sign() >= 0) {
        return {pow_rounded(x.lo_, k, bits, false), pow_rounded(x.hi_, k, bits, true)};
    }
    if (x.hi_.sign() <= 0) {
        const DyadicInterval m = pow(-x, k, bits);
        return (k % 2 == 0) ? m : -m;
    }
    const Dyadic up_hi = pow_rounded(x.hi_, k, bits, true);
    const Dyadic up_lo = pow_rounded(-x.lo_, k, bits, true);
    if (k % 2 == 0) return {Dyadic(), max(up_hi, up_lo)};
    return {-up_lo, up_hi};
}

DyadicInterval DyadicInterval::round_out(std::int64_t bits) const
{
    return {lo_.round_bits_down(bits), hi_.round_bits_up(bits)};
}

DyadicInterval DyadicInterval::abs() const
{
    if (lo_.sign() >= 0) return *this;
    if (hi_.sign() <= 0) return -*this;
    return {Dyadic(), max(-lo_, hi_)};
}

DyadicInterval DyadicInterval::hull(const DyadicInterval& a, const DyadicInterval& b)
{
    return {min(a.lo_, b.lo_), max(a.hi_, b.hi_)};
}

std::string DyadicInterval::str() const { return "[" + lo_.str() + ", " + hi_.str() + "]"; }

DyadicInterval divide(const Dyadic& a, const Dyadic& b, std::int64_t bits)
{
    auto [lo, hi] = quotient_bounds(a, b, bits);
    return {std::move(lo), std::move(hi)};
}

DyadicInterval exp_point(const Dyadic& x, std::int64_t bits)
{
    if (x.is_zero()) return DyadicInterval(Dyadic(1));
    constexpr std::int64_t kHugeExponent = std::int64_t{1} << 40;
    if (x.sign() < 0 && x.log2_floor() >= 40) {
        // e^x <= 2^x for x < 0
        return {Dyadic(), Dyadic::pow2(-kHugeExponent)};
    }
    if (x.sign() > 0 && x.log2_floor() >= 40) {
        throw std::overflow_error("exp argument too large: " + x.str());
    }
    if (bits < 8) bits = 8;

    // argument reduction: r = x / 2^k with |r| < 2^-depth; about sqrt(bits / 2)
    // balances the series length against the k squarings
    const auto depth = std::max<std::int64_t>(8, static_cast<std::int64_t>(std::sqrt(static_cast<double>(bits) / 2)));
    const std::int64_t k = std::max<std::int64_t>(0, x.log2_floor() + 1 + depth);
    const Dyadic r = x.scaled(-k);
    const std::int64_t wp = bits + k + 20;

    DyadicInterval sum(Dyadic(1));
    DyadicInterval term(Dyadic(1));
    const std::int64_t log2_r = r.log2_ceil_bound();
    for (unsigned j = 1;; ++j) {
        term = DyadicInterval::div(DyadicInterval::mul(term, DyadicInterval(r), wp),
                                   DyadicInterval(Dyadic(static_cast<long>(j))), wp);
        sum = sum + term;
        // Lagrange remainder after term j: |R| <= e^|r| |r|^(j+1)/(j+1)! <= 2 |term_j| |r|
        const std::int64_t rem_log2 = term.magnitude().log2_ceil_bound() + log2_r + 1;
        if (rem_log2 <= -(wp + 2)) {
            const Dyadic rem = Dyadic::pow2(rem_log2);
            sum = DyadicInterval(sum.lo() - rem, sum.hi() + rem);
            break;
        }
    }
    sum = sum.round_out(wp);
    for (std::int64_t i = 0; i < k; ++i) {
        sum = DyadicInterval::mul(sum, sum, wp);
    }
    return sum;
}

DyadicInterval exp_enclosure(const DyadicInterval& x, std::int64_t n)
{
    auto bits_for = [n](const Dyadic& v) -> std::int64_t {
        const double d = v.to_double();
        std::int64_t scale = 0;
        if (d > 0) {
            scale = static_cast<std::int64_t>(std::ceil(1.5 * d));
        } else if (d < 0) {
            scale = static_cast<std::int64_t>(std::floor(1.4 * std::max(d, -1e15)));
        }
        return std::max<std::int64_t>(16, n + scale + 8);
    };
    const Dyadic lo = exp_point(x.lo(), bits_for(x.lo())).lo();
    if (x.is_point()) {
        return exp_point(x.lo(), bits_for(x.lo()));
    }
    const Dyadic hi = exp_point(x.hi(), bits_for(x.hi())).hi();
    return {lo, hi};
}

DyadicInterval refine(const std::function<DyadicInterval(std::int64_t)>& enclose, std::int64_t n,
                      const PrecisionSchedule& schedule)
{
    std::int64_t bits = schedule.initial_bits;
    std::int64_t achieved = std::numeric_limits<std::int64_t>::max();
    while (bits <= schedule.max_bits) {
        DyadicInterval e = enclose(bits);
        const Dyadic w = e.width();
        if (w.is_zero()) return e;
        achieved = w.log2_ceil_bound();
        if (achieved <= -n) return e;
        bits *= 2;
    }
    throw PrecisionError("working precision cap of " + std::to_string(schedule.max_bits) +
                             " bits reached with enclosure width 2^" + std::to_string(achieved) +
                             ", requested 2^-" + std::to_string(n),
                         achieved);
}

Dyadic approximate(const std::function<DyadicInterval(std::int64_t)>& enclose, std::int64_t n,
                   const PrecisionSchedule& schedule)
{
    return refine(enclose, n, schedule).midpoint();
}

}  // namespace odegadget
