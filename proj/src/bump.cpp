#include "odegadget/bump.hpp"

#include <algorithm>

namespace odegadget {

BumpPolynomial BumpPolynomial::identity_f()
{
    BumpPolynomial p;
    p.add({1, 0, 0}, 1);
    return p;
}

void BumpPolynomial::add(const Exponents& e, const mpz_class& c)
{
    if (sgn(c) == 0) return;
    auto [it, inserted] = terms_.emplace(e, c);
    if (!inserted) {
        it->second += c;
        if (sgn(it->second) == 0) terms_.erase(it);
    }
}

BumpPolynomial BumpPolynomial::derivative() const
{
    BumpPolynomial d;
    for (const auto& [e, c] : terms_) {
        const auto [a, b, k] = e;
        if (a > 0) {
            // a F^{a-1} (F - F^2)(u^2 + v^2) u^b v^k
            const mpz_class ca = c * a;
            d.add({a, b + 2, k}, ca);
            d.add({a, b, k + 2}, ca);
            d.add({a + 1, b + 2, k}, -ca);
            d.add({a + 1, b, k + 2}, -ca);
        }
        if (b > 0) d.add({a, b + 1, k}, -c * b);
        if (k > 0) d.add({a, b, k + 1}, c * k);
    }
    return d;
}

unsigned BumpPolynomial::max_u_degree() const
{
    unsigned m = 0;
    for (const auto& [e, c] : terms_) m = std::max(m, std::get<1>(e));
    return m;
}

DyadicInterval BumpPolynomial::eval(const DyadicInterval& F, const DyadicInterval& u,
                                    const DyadicInterval& v, std::int64_t bits) const
{
    unsigned da = 0, db = 0, dc = 0;
    for (const auto& [e, c] : terms_) {
        da = std::max(da, std::get<0>(e));
        db = std::max(db, std::get<1>(e));
        dc = std::max(dc, std::get<2>(e));
    }
    auto powers = [bits](const DyadicInterval& x, unsigned deg) {
        std::vector<DyadicInterval> p{DyadicInterval(Dyadic(1))};
        for (unsigned i = 1; i <= deg; ++i) p.push_back(DyadicInterval::mul(p.back(), x, bits));
        return p;
    };
    const auto pf = powers(F, da);
    const auto pu = powers(u, db);
    const auto pv = powers(v, dc);
    DyadicInterval acc(Dyadic(0));
    for (const auto& [e, c] : terms_) {
        const auto [a, b, k] = e;
        DyadicInterval term = DyadicInterval::mul(DyadicInterval::mul(pf[a], pu[b], bits), pv[k], bits);
        term = DyadicInterval::mul(term, DyadicInterval(Dyadic(c)), bits);
        acc = (acc + term).round_out(bits + 8);
    }
    return acc;
}

namespace {

const Dyadic kHalf = Dyadic::pow2(-1);

}  // namespace

BumpFunction::BumpFunction(unsigned max_order) : max_order_(max_order)
{
    polys_.push_back(BumpPolynomial::identity_f());
    for (unsigned m = 1; m <= max_order + 2; ++m) polys_.push_back(polys_.back().derivative());
}

const BumpFunction& BumpFunction::instance()
{
    static const BumpFunction shared;
    return shared;
}

DyadicInterval BumpFunction::enclose_F(const Dyadic& t, std::int64_t bits) const
{
    if (t.sign() < 0 || t > Dyadic(1)) throw std::domain_error("bump argument outside [0,1]");
    if (t.is_zero()) return DyadicInterval(Dyadic(0));
    if (t == Dyadic(1)) return DyadicInterval(Dyadic(1));
    if (t > kHalf) {
        const DyadicInterval g = enclose_F(Dyadic(1) - t, bits);
        return DyadicInterval(Dyadic(1)) - g;
    }
    // F = E / (1 + E), E = exp(-(1/t - 1/(1-t))) <= 1
    const DyadicInterval u = divide(Dyadic(1), t, bits);
    const DyadicInterval v = divide(Dyadic(1), Dyadic(1) - t, bits);
    const DyadicInterval x = u - v;
    // E <= 2^-x: when x dwarfs the working precision, F is only bounded
    // (an exact E would carry an exponent of about -1.44 x bits)
    if (x.lo() >= Dyadic(64 * (bits + 2))) return {Dyadic(0), Dyadic::pow2(-bits - 2)};
    const Dyadic e_lo = exp_point(-x.hi(), bits).lo();
    const Dyadic e_hi = exp_point(-x.lo(), bits).hi();
    const Dyadic lo = e_lo.is_zero() ? Dyadic(0) : divide(e_lo, Dyadic(1) + e_lo, bits).lo();
    const Dyadic hi = divide(e_hi, Dyadic(1) + e_hi, bits).hi();
    return {max(lo, Dyadic(0)), min(hi, Dyadic(1))};
}

DyadicInterval BumpFunction::enclose_f(const Dyadic& t, std::int64_t bits) const
{
    return enclose_F(t, bits);
}

DyadicInterval BumpFunction::enclose(unsigned m, const Dyadic& t, std::int64_t bits) const
{
    if (m > max_order_ + 2) throw std::out_of_range("derivative order above the configured cap");
    if (m == 0) return enclose_F(t, bits);
    if (t.sign() < 0 || t > Dyadic(1)) throw std::domain_error("bump argument outside [0,1]");
    if (t.is_zero() || t == Dyadic(1)) return DyadicInterval(Dyadic(0));
    if (t > kHalf) {
        const DyadicInterval mirrored = enclose(m, Dyadic(1) - t, bits);
        return (m % 2 == 1) ? mirrored : -mirrored;
    }
    const DyadicInterval F = enclose_F(t, bits);
    const DyadicInterval u = divide(Dyadic(1), t, bits);
    const DyadicInterval v = divide(Dyadic(1), Dyadic(1) - t, bits);
    return polys_[m].eval(F, u, v, bits);
}

DyadicInterval BumpFunction::enclose_cell(unsigned m, const DyadicInterval& cell, std::int64_t bits) const
{
    if (cell.lo().sign() <= 0 || cell.hi() >= Dyadic(1)) {
        throw std::domain_error("cell must lie inside (0,1)");
    }
    // f is increasing, so F over the cell is spanned by its endpoint values
    const DyadicInterval F(enclose_F(cell.lo(), bits).lo(), enclose_F(cell.hi(), bits).hi());
    if (m == 0) return F;
    const DyadicInterval u(divide(Dyadic(1), cell.hi(), bits).lo(), divide(Dyadic(1), cell.lo(), bits).hi());
    const DyadicInterval v(divide(Dyadic(1), Dyadic(1) - cell.lo(), bits).lo(),
                           divide(Dyadic(1), Dyadic(1) - cell.hi(), bits).hi());
    return polys_.at(m).eval(F, u, v, bits);
}

Dyadic BumpFunction::eval(unsigned m, const Dyadic& t, std::int64_t n) const
{
    if (m > max_order_) throw std::out_of_range("derivative order above the configured cap");
    if (t.is_zero()) return Dyadic(0);
    if (t == Dyadic(1)) return Dyadic(m == 0 ? 1 : 0);
    return approximate([&](std::int64_t bits) { return enclose(m, t, bits); }, n);
}

std::int64_t BumpFunction::s_extension(std::uint64_t m)
{
    const auto mm = static_cast<std::int64_t>(m);
    return std::max<std::int64_t>(kShippedBounds.back(), mm * mm + mm);
}

std::int64_t BumpFunction::s(std::uint64_t m) const
{
    if (m < kShippedBounds.size()) return kShippedBounds[m];
    return s_extension(m);
}

std::optional<Dyadic> BumpFunction::cell_bound(unsigned m, const Dyadic& a, const Dyadic& b) const
{
    constexpr std::int64_t bits = 96;
    if (a.is_zero()) {
        // |term| <= |c| F u^b v^k with F <= e^v e^-u, and u^b e^-u decreasing for u >= b
        const Dyadic U0 = divide(Dyadic(1), b, bits).lo();
        if (U0 < Dyadic(static_cast<long>(polys_.at(m).max_u_degree()))) return std::nullopt;
        const Dyadic V = divide(Dyadic(1), Dyadic(1) - b, bits).hi();
        const Dyadic ev = exp_point(V, bits).hi();
        const Dyadic eu = exp_point(-U0, bits).hi();
        Dyadic total;
        for (const auto& [e, c] : polys_.at(m).terms()) {
            const auto [pa, pb, pk] = e;
            const DyadicInterval mag = DyadicInterval::mul(
                DyadicInterval::pow(U0, pb, bits), DyadicInterval::pow(V, pk, bits), bits);
            total += (Dyadic(mpz_class(abs(c))) * ev * eu * mag.hi()).round_bits_up(bits);
        }
        return total;
    }
    // second-order centered form; the cell ending at 1/2 is widened symmetrically
    Dyadic c;
    Dyadic h;
    if (b == kHalf) {
        c = kHalf;
        h = kHalf - a;
    } else {
        c = (a + b).scaled(-1);
        h = (b - a).scaled(-1);
    }
    const DyadicInterval p0 = enclose(m, c, bits);
    const DyadicInterval p1 = enclose(m + 1, c, bits);
    const DyadicInterval p2 = enclose_cell(m + 2, DyadicInterval(c - h, c + h), bits);
    const DyadicInterval lin = p1 * DyadicInterval(-h, h);
    const DyadicInterval quad = (p2 * DyadicInterval(Dyadic(0), h * h)).scaled(-1);
    return (p0 + lin + quad).magnitude();
}

BoundCertificate BumpFunction::certify_bound(unsigned m, unsigned max_depth) const
{
    BoundCertificate cert;
    cert.order = m;
    if (m == 0) {
        cert.s = 0;
        cert.upper = Dyadic(1);
        return cert;
    }
    if (m > max_order_) throw std::out_of_range("derivative order above the configured cap");

    Dyadic sampled;
    for (unsigned i = 0; i < 1024; ++i) {
        const Dyadic t(mpz_class(2 * i + 1), -12);  // midpoints of [0, 1/2] cells
        sampled = max(sampled, eval(m, t, 32).abs());
    }
    const std::int64_t s0 = sampled.is_zero() ? 0 : sampled.log2_ceil_bound();

    Dyadic best_failed;
    for (std::int64_t s = s0; s <= s0 + 1; ++s) {
        const Dyadic limit = Dyadic::pow2(s);
        struct Cell {
            Dyadic a, b;
            unsigned depth;
        };
        std::vector<Cell> work{{Dyadic(0), kHalf, 0}};
        Dyadic upper;
        std::uint64_t cells = 0;
        unsigned deepest = 0;
        bool ok = true;
        while (!work.empty() && ok) {
            const Cell cell = work.back();
            work.pop_back();
            ++cells;
            deepest = std::max(deepest, cell.depth);
            const auto bound = cell_bound(m, cell.a, cell.b);
            if (bound && *bound <= limit) {
                upper = max(upper, *bound);
                continue;
            }
            if (cell.depth >= max_depth) {
                ok = false;
                if (bound) best_failed = max(best_failed, *bound);
                break;
            }
            const Dyadic mid = (cell.a + cell.b).scaled(-1);
            work.push_back({mid, cell.b, cell.depth + 1});
            work.push_back({cell.a, mid, cell.depth + 1});
        }
        if (ok) {
            cert.s = s;
            cert.upper = upper;
            cert.cells = cells;
            cert.depth = deepest;
            return cert;
        }
    }
    throw CertificationError("could not certify |D^" + std::to_string(m) + " f| <= 2^" +
                                 std::to_string(s0 + 1) + " at depth " + std::to_string(max_depth),
                             best_failed);
}

}  // namespace odegadget
