#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include <gmpxx.h>

#include "odegadget/dyadic.hpp"
#include "odegadget/interval.hpp"

namespace odegadget {

/// Integer polynomial in F = f(t), u = 1/t and v = 1/(1-t).
class BumpPolynomial {
public:
    using Exponents = std::tuple<unsigned, unsigned, unsigned>;  // (a, b, c) of F^a u^b v^c

    BumpPolynomial() = default;
    static BumpPolynomial identity_f();

    /// d/dt using dF = (F - F^2)(u^2 + v^2), du = -u^2, dv = v^2.
    BumpPolynomial derivative() const;

    DyadicInterval eval(const DyadicInterval& F, const DyadicInterval& u, const DyadicInterval& v,
                        std::int64_t bits) const;

    const std::map<Exponents, mpz_class>& terms() const { return terms_; }
    std::size_t size() const { return terms_.size(); }
    unsigned max_u_degree() const;

private:
    void add(const Exponents& e, const mpz_class& c);
    std::map<Exponents, mpz_class> terms_;
};

class CertificationError : public std::runtime_error {
public:
    CertificationError(const std::string& what, Dyadic best_bound)
        : std::runtime_error(what), best_bound_(std::move(best_bound))
    {
    }
    const Dyadic& best_bound() const { return best_bound_; }

private:
    Dyadic best_bound_;
};

struct BoundCertificate {
    unsigned order = 0;
    std::int64_t s = 0;       // |D^m f| <= 2^s on [0,1]
    Dyadic upper;             // certified max over the accepted cells
    std::uint64_t cells = 0;  // cells evaluated
    unsigned depth = 0;       // deepest subdivision used
};

/// The smoothed step f(t) = A(t) / (A(t) + A(1-t)), A(t) = e^{-1/t}, A(0) = 0.
///
/// Equivalently f = 1 / (1 + e^{1/t - 1/(1-t)}). Every derivative D^m f with
/// m >= 1 is a polynomial in (f, 1/t, 1/(1-t)) whose terms all carry a factor f,
/// and D^m f(t) = (-1)^{m+1} D^m f(1-t).
class BumpFunction {
public:
    static constexpr unsigned kDefaultMaxOrder = 8;
    /// Certified exponents s(0..8), reproduced by certify_bound.
    static constexpr std::array<std::int64_t, 9> kShippedBounds{0, 1, 4, 7, 12, 17, 23, 29, 36};

    explicit BumpFunction(unsigned max_order = kDefaultMaxOrder);

    /// Shared instance with the default order cap.
    static const BumpFunction& instance();

    unsigned max_order() const { return max_order_; }
    const BumpPolynomial& polynomial(unsigned m) const { return polys_.at(m); }

    /// Enclosure of D^m f(t) for a point t in [0,1] at working precision `bits`.
    DyadicInterval enclose(unsigned m, const Dyadic& t, std::int64_t bits) const;
    /// Enclosure of {D^m f(t) : t in cell} for a cell inside (0,1).
    DyadicInterval enclose_cell(unsigned m, const DyadicInterval& cell, std::int64_t bits) const;
    /// Enclosure of f(t) itself.
    DyadicInterval enclose_f(const Dyadic& t, std::int64_t bits) const;

    /// |result - D^m f(t)| <= 2^-n.
    Dyadic eval(unsigned m, const Dyadic& t, std::int64_t n) const;
    Dyadic f(const Dyadic& t, std::int64_t n) const { return eval(0, t, n); }

    /// Exponent s(m) with |D^m f| <= 2^{s(m)}: the shipped certified table for
    /// m <= 8 and the uncertified extension max(s(8), m^2 + m) above it.
    std::int64_t s(std::uint64_t m) const;
    static std::int64_t s_extension(std::uint64_t m);

    /// Branch-and-bound certification on [0, 1/2] (symmetry covers the rest).
    /// Tries the smallest exponent suggested by sampling, then one more.
    BoundCertificate certify_bound(unsigned m, unsigned max_depth = 12) const;

    /// Upper bound of |D^m f| over [a, b] within [0, 1/2], or nullopt when the
    /// cell touches 0 and is too wide for the tail bound.
    std::optional<Dyadic> cell_bound(unsigned m, const Dyadic& a, const Dyadic& b) const;

private:
    DyadicInterval enclose_F(const Dyadic& t, std::int64_t bits) const;
    unsigned max_order_;
    std::vector<BumpPolynomial> polys_;  // D^0 f .. D^{max_order+2} f
};

}  // namespace odegadget
