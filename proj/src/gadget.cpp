#include "odegadget/gadget.hpp"

#include <algorithm>
#include <limits>
#include <mutex>

namespace odegadget {

const char* to_string(ParamMode mode)
{
    return mode == ParamMode::Faithful ? "faithful" : "toy";
}

std::optional<ParamMode> parse_mode(const std::string& name)
{
    if (name == "faithful") return ParamMode::Faithful;
    if (name == "toy") return ParamMode::Toy;
    return std::nullopt;
}

Polynomial glue_gamma()
{
    return Polynomial{4, 8, 4};
}

Polynomial final_value_gamma()
{
    return Polynomial{4, 7, 3};
}

std::int64_t GadgetParams::mu(std::uint64_t i) const
{
    const std::uint64_t m = i + 1;
    const std::int64_t sm = m < s.size() ? s[m] : BumpFunction::s_extension(m);
    return static_cast<std::int64_t>(m) * q + sm;
}

namespace {

constexpr std::int64_t kExponentLimit = std::int64_t{1} << 40;

std::int64_t checked_mul(std::int64_t a, std::int64_t b)
{
    if (a != 0 && b > kExponentLimit / a) throw ParameterError("gadget exponent exceeds 2^40 bits");
    return a * b;
}

}  // namespace

GadgetParams make_params(const NormalizedGadget& ng, std::uint64_t u_length, unsigned k,
                         const Polynomial& gamma, ParamMode mode)
{
    const auto& bump = BumpFunction::instance();
    if (k < 1 || k > bump.max_order()) {
        throw ParameterError("smoothness order k must lie in [1, " + std::to_string(bump.max_order()) + "]");
    }
    GadgetParams prm;
    prm.k = k;
    prm.mode = mode;
    prm.p = ng.p;
    prm.q = ng.q;
    prm.r = ng.equation.cell_bits;
    prm.u_length = u_length;
    prm.s.assign(BumpFunction::kShippedBounds.begin(), BumpFunction::kShippedBounds.end());

    prm.gamma = mode == ParamMode::Toy ? Polynomial{} : gamma;
    prm.gamma_value = prm.gamma.eval(static_cast<std::int64_t>(u_length));

    const std::int64_t base = k == 1 ? 1 : k + 1;
    prm.d.resize(prm.p + 1);
    std::int64_t power = 1;
    for (std::size_t i = 0; i <= prm.p; ++i) {
        prm.d[i] = k == 1 ? static_cast<std::int64_t>(i) : power;
        if (i < prm.p) power = checked_mul(power, base);
    }
    prm.sigma_value = prm.d[prm.p];
    prm.sigma = Polynomial::constant(static_cast<std::uint64_t>(prm.sigma_value));

    const std::int64_t tail = prm.s[k] + k + 3;
    prm.bits_B = prm.gamma_value + static_cast<std::int64_t>(prm.r) + tail;
    prm.rho = prm.sigma * (prm.gamma + Polynomial{static_cast<std::uint64_t>(tail), 1});
    prm.rho_value = checked_mul(prm.sigma_value, prm.bits_B);
    checked_mul(prm.d[prm.p], prm.bits_B);
    return prm;
}

DyadicInterval bump_enclosure(unsigned m, const Dyadic& x, std::int64_t n)
{
    if (x.is_zero()) return DyadicInterval(Dyadic(0));
    if (x == Dyadic(1)) return DyadicInterval(Dyadic(m == 0 ? 1 : 0));
    const auto& bump = BumpFunction::instance();
    return refine([&](std::int64_t bits) { return bump.enclose(m, x, bits); }, n);
}

struct Gadget::Memo {
    std::once_flag once;
    std::optional<SolutionGrid> grid;
};

Gadget::Gadget(const CountingInstance& inst, unsigned k, const Polynomial& gamma, ParamMode mode,
               BitLayout layout)
    : ng_(normalize(build_gadget(inst, layout))), memo_(std::make_shared<Memo>())
{
    params_ = make_params(ng_, encode(inst).length(), k, gamma, mode);
    g_params_ = params_;
}

Gadget::Gadget(NormalizedGadget ng, GadgetParams params)
    : ng_(std::move(ng)), params_(std::move(params)), g_params_(params_), memo_(std::make_shared<Memo>())
{
}

const SolutionGrid& Gadget::grid() const
{
    std::call_once(memo_->once, [this] { memo_->grid = solve(ng_.equation); });
    return *memo_->grid;
}

Gadget Gadget::with_g_params(GadgetParams g_params) const
{
    Gadget copy = *this;
    copy.g_params_ = std::move(g_params);
    return copy;
}

std::uint64_t Gadget::column(const Dyadic& t) const
{
    if (t.sign() < 0 || t > Dyadic(1)) throw std::domain_error("t outside [0,1]: " + t.str());
    return t.floor_scaled(ng_.q).get_ui();
}

Decomposition Gadget::decompose(const Dyadic& t, const Dyadic& y) const
{
    Decomposition dec;
    dec.T = column(t);
    dec.theta = t.scaled(ng_.q) - Dyadic(mpz_class(static_cast<unsigned long>(dec.T)));
    dec.row = ng_.active_row(dec.T);
    const Dyadic z = y.scaled(g_params_.scale(dec.row));
    dec.Y = (z + Dyadic::pow2(-2)).floor();
    dec.eta = z - Dyadic(dec.Y);
    return dec;
}

int Gadget::step(std::size_t row, std::uint64_t T, const mpz_class& Y) const
{
    if (T >= ng_.equation.width || row >= ng_.p) return 0;
    mpz_class reduced;
    mpz_fdiv_r_2exp(reduced.get_mpz_t(), Y.get_mpz_t(), ng_.equation.cell_bits);
    return ng_.equation.step(row, T, reduced);
}

Dyadic Gadget::grid_value(std::uint64_t T) const
{
    const auto& H = grid();
    Dyadic acc;
    for (std::size_t i = 0; i <= ng_.p; ++i) {
        const std::int64_t v = H.at(i, T);
        if (v != 0) acc += Dyadic(mpz_class(static_cast<long>(v)), -params_.scale(i));
    }
    return acc;
}

DyadicInterval Gadget::enclose_h(const Dyadic& t, std::int64_t n) const
{
    const std::uint64_t T = column(t);
    const Dyadic S = grid_value(T);
    if (T == ng_.equation.width) return DyadicInterval(S);
    const Dyadic theta = t.scaled(ng_.q) - Dyadic(mpz_class(static_cast<unsigned long>(T)));
    const std::size_t row = ng_.active_row(T);
    const int G = step(row, T, mpz_class(static_cast<long>(grid().at(row, T))));
    if (G == 0 || theta.is_zero()) return DyadicInterval(S);
    const std::int64_t shift = params_.scale(row + 1);
    const DyadicInterval F = bump_enclosure(0, theta, std::max<std::int64_t>(1, n - shift));
    return DyadicInterval(S) + (F * DyadicInterval(Dyadic(G))).scaled(-shift);
}

DyadicInterval Gadget::enclose_g_tilde(const mpz_class& Y, const Dyadic& t, std::int64_t n) const
{
    const std::uint64_t T = column(t);
    if (T == ng_.equation.width) return DyadicInterval(Dyadic(0));
    const Dyadic theta = t.scaled(ng_.q) - Dyadic(mpz_class(static_cast<unsigned long>(T)));
    const std::size_t row = ng_.active_row(T);
    const int G = step(row, T, Y);
    if (G == 0 || theta.is_zero()) return DyadicInterval(Dyadic(0));
    const std::int64_t E = static_cast<std::int64_t>(ng_.q) - g_params_.scale(row + 1);
    const DyadicInterval Df = bump_enclosure(1, theta, std::max<std::int64_t>(1, n + E));
    return (Df * DyadicInterval(Dyadic(G))).scaled(E);
}

DyadicInterval Gadget::enclose_g(const Dyadic& t, const Dyadic& y, std::int64_t n) const
{
    return enclose_deriv(0, 0, t, y, n);
}

DyadicInterval Gadget::enclose_deriv(unsigned i, unsigned j, const Dyadic& t, const Dyadic& y,
                                     std::int64_t n) const
{
    const auto& bump = BumpFunction::instance();
    if (i + 1 > bump.max_order()) throw std::out_of_range("t-derivative order above the cap");
    if (j > g_params_.k) throw std::out_of_range("y-derivative order above k");
    const DyadicInterval zero(Dyadic(0));

    const Decomposition dec = decompose(t, y);
    if (dec.T == ng_.equation.width || dec.theta.is_zero()) return zero;
    const int GY = step(dec.row, dec.T, dec.Y);
    const int GY1 = step(dec.row, dec.T, dec.Y + 1);
    const bool blended = dec.eta > Dyadic::pow2(-2);
    const Dyadic w = dec.eta.scaled(1) - Dyadic::pow2(-1);  // (4 eta - 1) / 2
    const std::int64_t si = g_params_.s.at(i + 1);
    std::int64_t E = static_cast<std::int64_t>(i + 1) * ng_.q - g_params_.scale(dec.row + 1);

    if (j == 0) {
        const std::int64_t m = std::max<std::int64_t>(1, n + E);
        if (!blended || GY == GY1) {
            if (GY == 0) return zero;
            const DyadicInterval X = bump_enclosure(i + 1, dec.theta, m);
            return (X * DyadicInterval(Dyadic(GY))).scaled(E);
        }
        const DyadicInterval X = bump_enclosure(i + 1, dec.theta, m + 2);
        const DyadicInterval Fw = bump_enclosure(0, w, m + si + 3);
        const DyadicInterval c = DyadicInterval(Dyadic(GY)) + Fw * DyadicInterval(Dyadic(GY1 - GY));
        return (X * c).scaled(E);
    }

    if (!blended || GY == GY1) return zero;
    E += static_cast<std::int64_t>(j) * (1 + g_params_.scale(dec.row));
    const std::int64_t m = std::max<std::int64_t>(1, n + E);
    const DyadicInterval X = bump_enclosure(i + 1, dec.theta, m + g_params_.s.at(j) + 3);
    const DyadicInterval Dw = bump_enclosure(j, w, m + si + 3);
    return (Dw * X * DyadicInterval(Dyadic(GY1 - GY))).scaled(E);
}

}  // namespace odegadget
