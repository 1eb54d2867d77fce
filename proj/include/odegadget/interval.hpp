#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

#include "odegadget/dyadic.hpp"

namespace odegadget {

/// Raised when the precision driver cannot reach a requested accuracy
/// within the working-precision cap.
class PrecisionError : public std::runtime_error {
public:
    PrecisionError(const std::string& what, std::int64_t achieved_log2_width)
        : std::runtime_error(what), achieved_log2_width_(achieved_log2_width)
    {
    }
    std::int64_t achieved_log2_width() const { return achieved_log2_width_; }

private:
    std::int64_t achieved_log2_width_;
};

/// Closed interval [lo, hi] with dyadic endpoints.
///
/// Addition and subtraction are exact. Products are exact unless a
/// significant-bit budget is passed, in which case the endpoints are rounded
/// outward. Reciprocals and quotients always take a budget.
class DyadicInterval {
public:
    DyadicInterval() = default;
    DyadicInterval(Dyadic point);  // NOLINT(google-explicit-constructor)
    DyadicInterval(Dyadic lo, Dyadic hi);

    const Dyadic& lo() const { return lo_; }
    const Dyadic& hi() const { return hi_; }

    bool is_point() const { return lo_ == hi_; }
    bool contains(const Dyadic& x) const { return lo_ <= x && x <= hi_; }
    bool contains(const DyadicInterval& other) const
    {
        return lo_ <= other.lo_ && other.hi_ <= hi_;
    }
    bool contains_zero() const { return lo_.sign() <= 0 && hi_.sign() >= 0; }
    bool is_positive() const { return lo_.sign() > 0; }

    Dyadic width() const { return hi_ - lo_; }
    Dyadic midpoint() const { return (lo_ + hi_).scaled(-1); }
    /// max(|lo|, |hi|)
    Dyadic magnitude() const;

    DyadicInterval operator-() const { return {-hi_, -lo_}; }
    friend DyadicInterval operator+(const DyadicInterval& a, const DyadicInterval& b)
    {
        return {a.lo_ + b.lo_, a.hi_ + b.hi_};
    }
    friend DyadicInterval operator-(const DyadicInterval& a, const DyadicInterval& b)
    {
        return {a.lo_ - b.hi_, a.hi_ - b.lo_};
    }
    friend DyadicInterval operator*(const DyadicInterval& a, const DyadicInterval& b)
    {
        return mul(a, b, 0);
    }

    /// Product; bits > 0 rounds the endpoints outward to that many significant bits.
    static DyadicInterval mul(const DyadicInterval& a, const DyadicInterval& b,
                              std::int64_t bits);
    /// Enclosure of 1/x; x must not contain zero.
    static DyadicInterval recip(const DyadicInterval& x, std::int64_t bits);
    static DyadicInterval div(const DyadicInterval& a, const DyadicInterval& b,
                              std::int64_t bits);
    /// Enclosure of x^k for k >= 0 (tight for even k straddling zero).
    static DyadicInterval pow(const DyadicInterval& x, unsigned k, std::int64_t bits);

    DyadicInterval scaled(std::int64_t shift) const { return {lo_.scaled(shift), hi_.scaled(shift)}; }
    DyadicInterval round_out(std::int64_t bits) const;
    DyadicInterval abs() const;

    static DyadicInterval hull(const DyadicInterval& a, const DyadicInterval& b);

    std::string str() const;

private:
    Dyadic lo_;
    Dyadic hi_;
};

/// Outward-rounded quotient a / b of dyadics at the given significant-bit budget.
DyadicInterval divide(const Dyadic& a, const Dyadic& b, std::int64_t bits);

/// Enclosure of e^x for a point x with relative error about 2^-bits.
DyadicInterval exp_point(const Dyadic& x, std::int64_t bits);

/// Encloses {e^t : t in x}. The enclosure exceeds the exact image
/// [e^lo, e^hi] by at most 2^-n on each side.
DyadicInterval exp_enclosure(const DyadicInterval& x, std::int64_t n);

/// Working-precision schedule shared by all evaluators.
struct PrecisionSchedule {
    std::int64_t initial_bits = 64;
    std::int64_t max_bits = 1 << 16;
};

/// Evaluates `enclose(bits)` with doubling working precision until the
/// enclosure width is at most 2^-n, then returns its midpoint (so the
/// result is within 2^-(n+1) of every enclosed value).
///
/// Throws PrecisionError once the cap is exceeded.
Dyadic approximate(const std::function<DyadicInterval(std::int64_t)>& enclose, std::int64_t n,
                   const PrecisionSchedule& schedule = {});

/// Same driver, returning the final enclosure.
DyadicInterval refine(const std::function<DyadicInterval(std::int64_t)>& enclose, std::int64_t n,
                      const PrecisionSchedule& schedule = {});

}  // namespace odegadget
