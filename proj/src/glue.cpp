#include "odegadget/glue.hpp"

#include <algorithm>

namespace odegadget {

Polynomial glue_lambda()
{
    return Polynomial{2, 2};
}

GlueLayout glue_layout(const InstanceEncoding& enc)
{
    GlueLayout g;
    g.length = enc.length();
    g.value = enc.value();
    g.lambda = glue_lambda().eval(static_cast<std::int64_t>(g.length));
    const std::int64_t len = static_cast<std::int64_t>(g.length);
    const Dyadic base = Dyadic(1) - Dyadic::pow2(-len);
    g.c = base + Dyadic(2 * g.value + 1, -g.lambda);
    g.lo = g.c - Dyadic::pow2(-g.lambda);
    g.hi = g.c + Dyadic::pow2(-g.lambda);
    return g;
}

void GluedSystem::add(const CountingInstance& inst, unsigned k)
{
    add(inst, std::make_shared<const Gadget>(inst, k, glue_gamma()));
}

void GluedSystem::add(const CountingInstance& inst, std::shared_ptr<const Gadget> gadget)
{
    Entry e{inst, glue_layout(encode(inst)), std::move(gadget)};
    for (const auto& other : entries_) {
        if (other.layout.length == e.layout.length && other.layout.value == e.layout.value) {
            throw std::invalid_argument("duplicate instance encoding in glued corpus");
        }
    }
    const auto pos = std::upper_bound(entries_.begin(), entries_.end(), e.layout.lo,
                                      [](const Dyadic& x, const Entry& y) { return x < y.layout.lo; });
    entries_.insert(pos, std::move(e));
}

std::optional<std::size_t> GluedSystem::locate(const Dyadic& t) const
{
    auto it = std::upper_bound(entries_.begin(), entries_.end(), t,
                               [](const Dyadic& x, const Entry& y) { return x < y.layout.lo; });
    if (it == entries_.begin()) return std::nullopt;
    --it;
    if (t > it->layout.hi) return std::nullopt;
    return static_cast<std::size_t>(it - entries_.begin());
}

namespace {

// Local time on the forward copy [l-, c] or the reversed copy [c, l+].
struct Local {
    Dyadic tau;
    bool reversed;
};

Local to_local(const GlueLayout& g, const Dyadic& t)
{
    if (t <= g.c) return {(t - g.lo).scaled(g.lambda), false};
    return {(g.hi - t).scaled(g.lambda), true};
}

const DyadicInterval kZero{Dyadic(0)};

}  // namespace

DyadicInterval GluedSystem::enclose_h(const Dyadic& t, std::int64_t n) const
{
    if (t.sign() < 0 || t > Dyadic(1)) throw std::domain_error("t outside [0,1]: " + t.str());
    const auto idx = locate(t);
    if (!idx) return kZero;
    const Entry& e = entries_[*idx];
    const Local loc = to_local(e.layout, t);
    return e.gadget->enclose_h(loc.tau, n - e.layout.lambda).scaled(-e.layout.lambda);
}

DyadicInterval GluedSystem::enclose_g(const Dyadic& t, const Dyadic& y, std::int64_t n) const
{
    return enclose_deriv(0, 0, t, y, n);
}

DyadicInterval GluedSystem::enclose_deriv(unsigned i, unsigned j, const Dyadic& t, const Dyadic& y,
                                          std::int64_t n) const
{
    if (t.sign() < 0 || t > Dyadic(1)) throw std::domain_error("t outside [0,1]: " + t.str());
    if (y.abs() > Dyadic(1)) throw std::domain_error("y outside [-1,1]: " + y.str());
    const auto idx = locate(t);
    if (!idx) return kZero;
    const Entry& e = entries_[*idx];
    const Gadget& gu = *e.gadget;
    if (j > gu.g_params().k) throw std::out_of_range("y-derivative order above k");
    const Local loc = to_local(e.layout, t);
    const std::int64_t lam = e.layout.lambda;
    const std::int64_t outer = lam * static_cast<std::int64_t>(i + j);
    // the reversed copy is -g_u(l+ - t ...), and each t-derivative flips the sign again
    const bool negate = loc.reversed && (i % 2 == 0);
    const std::int64_t m = n + outer;

    const Dyadic Y = y.scaled(lam);
    DyadicInterval inner;
    if (Y.abs() <= Dyadic(1)) {
        inner = gu.enclose_deriv(i, j, loc.tau, Y, m);
    } else {
        // Taylor extension of degree k at the nearer edge of the strip
        const Dyadic edge(Y.sign() > 0 ? 1 : -1);
        const Dyadic dist = Y - edge;
        const unsigned k = gu.g_params().k;
        const std::int64_t terms = static_cast<std::int64_t>(k - j + 1);
        const std::int64_t spare = 64 - __builtin_clzll(static_cast<unsigned long long>(terms)) + 1;
        inner = kZero;
        Dyadic power(1);
        unsigned long fact = 1;
        for (unsigned l = j; l <= k; ++l) {
            if (l > j) {
                power = power * dist;
                fact *= (l - j);
            }
            const std::int64_t pbits = power.is_zero() ? 0 : power.abs().log2_ceil_bound();
            const std::int64_t M = m + pbits + spare + 1;
            DyadicInterval term = gu.enclose_deriv(i, l, loc.tau, edge, M) * DyadicInterval(power);
            if (fact > 1) {
                const Dyadic mag = term.magnitude();
                const std::int64_t bits = mag.is_zero() ? 8 : std::max<std::int64_t>(8, mag.log2_ceil_bound() + m + spare + 2);
                term = DyadicInterval::div(term, DyadicInterval(Dyadic(static_cast<long>(fact))), bits);
            }
            inner = inner + term;
        }
    }
    const DyadicInterval scaled = inner.scaled(outer);
    return negate ? -scaled : scaled;
}

NamedFunction GluedSystem::h_oracle() const
{
    auto self = std::make_shared<const GluedSystem>(*this);
    return [self](const Dyadic& x) {
        return name_from_enclosures([self, x](std::int64_t n) { return self->enclose_h(x, n); });
    };
}

bool reduce(const CountingInstance& u, unsigned k, const NamedFunction& h_oracle, ReductionTrace* trace,
            const Polynomial& gamma)
{
    const InstanceEncoding enc = encode(u);
    const GlueLayout layout = glue_layout(enc);
    const NormalizedGadget ng = normalize(build_gadget(u));
    const GadgetParams prm = make_params(ng, enc.length(), k, gamma);
    const std::int64_t m = prm.rho_value + layout.lambda + 2;

    const Dyadic a = h_oracle(layout.c).query(m);
    if (!a.is_multiple_of_pow2(m)) {
        throw ContractViolation("oracle answer " + a.str() + " is not a multiple of 2^-" + std::to_string(m), m, a);
    }
    const Dyadic threshold = Dyadic::pow2(-(prm.rho_value + layout.lambda + 1));
    const bool accepted = a >= threshold;
    if (trace) *trace = ReductionTrace{layout.c, m, a, threshold, accepted};
    return accepted;
}

}  // namespace odegadget
