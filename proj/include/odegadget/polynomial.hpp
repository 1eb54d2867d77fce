#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include <gmpxx.h>

namespace odegadget {

/// Univariate polynomial with non-negative integer coefficients, hence
/// non-decreasing on the naturals. coeffs[i] multiplies x^i.
class Polynomial {
public:
    Polynomial() = default;
    Polynomial(std::initializer_list<std::uint64_t> coeffs);
    explicit Polynomial(std::vector<mpz_class> coeffs);

    static Polynomial constant(std::uint64_t c) { return Polynomial{c}; }
    /// x + c
    static Polynomial identity_plus(std::uint64_t c) { return Polynomial{c, 1}; }

    const std::vector<mpz_class>& coefficients() const { return coeffs_; }
    std::size_t degree() const { return coeffs_.empty() ? 0 : coeffs_.size() - 1; }

    mpz_class operator()(const mpz_class& x) const;
    std::int64_t eval(std::int64_t x) const;

    friend Polynomial operator+(const Polynomial& a, const Polynomial& b);
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
    /// (this o inner)(x) = this(inner(x))
    Polynomial compose(const Polynomial& inner) const;

    friend bool operator==(const Polynomial& a, const Polynomial& b) = default;

    std::string str() const;

private:
    void trim();
    std::vector<mpz_class> coeffs_;
};

}  // namespace odegadget
