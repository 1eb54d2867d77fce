#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "odegadget/bump.hpp"
#include "odegadget/diffeq.hpp"
#include "odegadget/dyadic.hpp"
#include "odegadget/formula.hpp"
#include "odegadget/interval.hpp"
#include "odegadget/polynomial.hpp"

namespace odegadget {

class ParameterError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ParamMode { Faithful, Toy };

const char* to_string(ParamMode mode);
std::optional<ParamMode> parse_mode(const std::string& name);

/// gamma(x) = mu(x, x) + x lambda(x) for the glued system, lambda(x) = 2x + 2.
///
/// mu is taken with q(x) <= x + 2 and s(m) <= m^2 + m, both of which hold for
/// every instance and for the shipped bump table, which gives 4(x+1)^2.
Polynomial glue_gamma();
/// Same construction with lambda(x) = x + 1: (x+1)(3x+4).
Polynomial final_value_gamma();

struct GadgetParams {
    unsigned k = 1;
    ParamMode mode = ParamMode::Faithful;
    std::size_t p = 0;          // height of the normalized gadget
    std::int64_t q = 0;         // width is 2^q
    std::uint64_t r = 0;        // cell size exponent, r(|u|) = |u|
    std::uint64_t u_length = 0; // |u|
    std::vector<std::int64_t> s;  // bump bound exponents s(0..8)

    Polynomial gamma;
    Polynomial sigma;
    Polynomial rho;
    std::int64_t gamma_value = 0;
    std::int64_t sigma_value = 0;
    std::int64_t rho_value = 0;

    std::int64_t bits_B = 0;     // B = 2^bits_B
    std::vector<std::int64_t> d; // d_u(0..p)

    /// mu(i, |u|) = (i+1) q + s(i+1).
    std::int64_t mu(std::uint64_t i) const;
    Dyadic B() const { return Dyadic::pow2(bits_B); }
    /// log2 of B^{d_u(i)}.
    std::int64_t scale(std::size_t i) const { return bits_B * d.at(i); }
};

/// Parameters for a normalized gadget. Toy mode replaces gamma by 0.
/// k = 1 uses d_u(i) = i and sigma = p; k >= 2 uses (k+1)^i and (k+1)^p.
GadgetParams make_params(const NormalizedGadget& ng, std::uint64_t u_length, unsigned k,
                         const Polynomial& gamma, ParamMode mode = ParamMode::Faithful);

/// t = (T + theta) 2^-q and y = (Y + eta) B^{-d_u(j_u(T))}.
struct Decomposition {
    std::uint64_t T = 0;
    Dyadic theta;
    std::size_t row = 0;  // j_u(T)
    mpz_class Y;
    Dyadic eta;
};

/// The pair (g_u, h_u) built over a normalized gadget.
///
/// Evaluators take an absolute precision n. enclose_* return an interval of
/// width at most 2^-n; the plain forms return its midpoint.
class Gadget {
public:
    Gadget(const CountingInstance& inst, unsigned k, const Polynomial& gamma,
           ParamMode mode = ParamMode::Faithful, BitLayout layout = BitLayout::PinLowBit);
    /// Wraps an arbitrary normalized equation, e.g. a deliberately faulted one.
    Gadget(NormalizedGadget ng, GadgetParams params);

    const GadgetParams& params() const { return params_; }
    const NormalizedGadget& normalized() const { return ng_; }
    /// Solution of the normalized equation; solved once and shared by copies.
    const SolutionGrid& grid() const;

    /// Copy whose g side uses different parameters (fault injection).
    Gadget with_g_params(GadgetParams g_params) const;
    const GadgetParams& g_params() const { return g_params_; }

    /// t in [0,1]; y is only split when given.
    Decomposition decompose(const Dyadic& t, const Dyadic& y) const;
    std::uint64_t column(const Dyadic& t) const;

    /// G_u(row, T, Y mod 2^r); 0 past the last column.
    int step(std::size_t row, std::uint64_t T, const mpz_class& Y) const;

    /// sum_i H_u(i, T) / B^{d_u(i)}, exactly.
    Dyadic grid_value(std::uint64_t T) const;
    /// h_u(1) as stored by the grid.
    Dyadic final_value() const { return grid_value(ng_.equation.width); }

    DyadicInterval enclose_g_tilde(const mpz_class& Y, const Dyadic& t, std::int64_t n) const;
    DyadicInterval enclose_g(const Dyadic& t, const Dyadic& y, std::int64_t n) const;
    DyadicInterval enclose_h(const Dyadic& t, std::int64_t n) const;
    /// D_1^i D_2^j g_u(t, y); i <= 7, j <= k.
    DyadicInterval enclose_deriv(unsigned i, unsigned j, const Dyadic& t, const Dyadic& y,
                                 std::int64_t n) const;

    Dyadic g_tilde(const mpz_class& Y, const Dyadic& t, std::int64_t n) const
    {
        return enclose_g_tilde(Y, t, n).midpoint();
    }
    Dyadic g(const Dyadic& t, const Dyadic& y, std::int64_t n) const { return enclose_g(t, y, n).midpoint(); }
    Dyadic h(const Dyadic& t, std::int64_t n) const { return enclose_h(t, n).midpoint(); }
    Dyadic deriv(unsigned i, unsigned j, const Dyadic& t, const Dyadic& y, std::int64_t n) const
    {
        return enclose_deriv(i, j, t, y, n).midpoint();
    }

private:
    struct Memo;
    NormalizedGadget ng_;
    GadgetParams params_;
    GadgetParams g_params_;
    std::shared_ptr<Memo> memo_;
};

/// Enclosure of D^m f(x) with absolute width at most 2^-n (exact at 0 and 1).
DyadicInterval bump_enclosure(unsigned m, const Dyadic& x, std::int64_t n);

}  // namespace odegadget
