#include "odegadget/polynomial.hpp"

#include <limits>
#include <stdexcept>

namespace odegadget {

Polynomial::Polynomial(std::initializer_list<std::uint64_t> coeffs)
{
    for (auto c : coeffs) coeffs_.emplace_back(static_cast<unsigned long>(c));
    trim();
}

Polynomial::Polynomial(std::vector<mpz_class> coeffs) : coeffs_(std::move(coeffs))
{
    for (const auto& c : coeffs_) {
        if (sgn(c) < 0) throw std::invalid_argument("polynomial coefficients must be non-negative");
    }
    trim();
}

void Polynomial::trim()
{
    while (!coeffs_.empty() && sgn(coeffs_.back()) == 0) coeffs_.pop_back();
}

mpz_class Polynomial::operator()(const mpz_class& x) const
{
    mpz_class acc = 0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
    return acc;
}

std::int64_t Polynomial::eval(std::int64_t x) const
{
    const mpz_class v = (*this)(mpz_class(static_cast<long>(x)));
    if (!v.fits_slong_p()) throw std::overflow_error("polynomial value exceeds 64 bits");
    return v.get_si();
}

Polynomial operator+(const Polynomial& a, const Polynomial& b)
{
    std::vector<mpz_class> c(std::max(a.coeffs_.size(), b.coeffs_.size()), mpz_class(0));
    for (std::size_t i = 0; i < a.coeffs_.size(); ++i) c[i] += a.coeffs_[i];
    for (std::size_t i = 0; i < b.coeffs_.size(); ++i) c[i] += b.coeffs_[i];
    return Polynomial(std::move(c));
}

Polynomial operator*(const Polynomial& a, const Polynomial& b)
{
    if (a.coeffs_.empty() || b.coeffs_.empty()) return Polynomial();
    std::vector<mpz_class> c(a.coeffs_.size() + b.coeffs_.size() - 1, mpz_class(0));
    for (std::size_t i = 0; i < a.coeffs_.size(); ++i) {
        for (std::size_t j = 0; j < b.coeffs_.size(); ++j) c[i + j] += a.coeffs_[i] * b.coeffs_[j];
    }
    return Polynomial(std::move(c));
}

Polynomial Polynomial::compose(const Polynomial& inner) const
{
    Polynomial acc;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
        acc = acc * inner + Polynomial(std::vector<mpz_class>{*it});
    }
    return acc;
}

std::string Polynomial::str() const
{
    if (coeffs_.empty()) return "0";
    std::string out;
    for (std::size_t i = coeffs_.size(); i-- > 0;) {
        if (sgn(coeffs_[i]) == 0) continue;
        if (!out.empty()) out += " + ";
        const bool unit = coeffs_[i] == 1;
        if (i == 0 || !unit) out += coeffs_[i].get_str();
        if (i >= 1) out += (i == 1 ? "x" : "x^" + std::to_string(i));
    }
    return out;
}

}  // namespace odegadget
