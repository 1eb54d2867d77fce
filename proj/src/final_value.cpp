#include "odegadget/final_value.hpp"

#include <mutex>
#include <stdexcept>

namespace odegadget {

TallyReduction trivial_tally_reduction(TallyLanguage tally)
{
    return [tally = std::move(tally)](std::uint64_t n) {
        return parse_instance(tally(n) ? "blocks 1\nblock 1 vars x threshold 1\nformula x\n"
                                       : "blocks 1\nblock 1 vars x threshold 1\nformula x & !x\n");
    };
}

struct FinalValueParams::Cache {
    std::mutex mu;
    std::vector<std::int64_t> rho;  // rho(|F(0^i)|) for i < size
};

FinalValueParams::FinalValueParams(TallyReduction F, unsigned k, unsigned horizon)
    : F_(std::move(F)), k_(k), horizon_(horizon), cache_(std::make_shared<Cache>())
{
}

std::int64_t FinalValueParams::rho(std::uint64_t n) const
{
    std::lock_guard lock(cache_->mu);
    auto& rho = cache_->rho;
    while (rho.size() <= n) {
        const CountingInstance inst = F_(rho.size());
        const NormalizedGadget ng = normalize(build_gadget(inst));
        rho.push_back(make_params(ng, encode(inst).length(), k_, final_value_gamma()).rho_value);
    }
    return rho[n];
}

std::int64_t FinalValueParams::rho_bar(std::uint64_t n) const
{
    std::int64_t acc = 0;
    for (std::uint64_t i = 0; i < n; ++i) acc += rho(i);
    return acc;
}

std::int64_t FinalValueParams::exponent(std::uint64_t n) const
{
    const auto nn = static_cast<std::int64_t>(n);
    return 2 * nn + final_value_gamma().eval(nn) + rho_bar(n + 1);
}

namespace {

struct SeriesState {
    std::mutex mu;
    std::vector<Dyadic> terms;
};

}  // namespace

RealName final_value_name(const TallyLanguage& tally, const FinalValueParams& params)
{
    auto state = std::make_shared<SeriesState>();
    auto term = [tally, params, state](std::uint64_t n) {
        std::lock_guard lock(state->mu);
        while (state->terms.size() <= n) {
            const std::uint64_t i = state->terms.size();
            const CountingInstance inst = params.reduction()(i);
            const Gadget gadget(inst, params.k(), final_value_gamma());
            const DyadicInterval end = gadget.enclose_h(Dyadic(1), 1);
            if (!end.is_point()) throw std::logic_error("h_u(1) is not exact");
            const bool L = !end.lo().is_zero();
            if (L != tally(i)) throw std::logic_error("tally reduction disagrees at 0^" + std::to_string(i));
            const auto ii = static_cast<std::int64_t>(i);
            const std::int64_t shift = 2 * ii + final_value_gamma().eval(ii) + params.rho_bar(i);
            state->terms.push_back(end.lo().scaled(-shift));
        }
        return state->terms[n];
    };
    return name_from_enclosures([params, term](std::int64_t m) {
        // every omitted term has exponent >= m + 1, and the exponents grow by
        // at least 2, so the tail lies in [0, 2^-m]
        Dyadic partial;
        std::uint64_t n = 0;
        while (params.exponent(n) <= m) partial += term(n++);
        return DyadicInterval(partial, partial + Dyadic::pow2(-m));
    });
}

bool decode_tally(const RealName& name, std::uint64_t n, const FinalValueParams& params)
{
    if (n >= params.horizon()) {
        throw std::out_of_range("tally index " + std::to_string(n) + " beyond horizon " +
                                std::to_string(params.horizon()));
    }
    const std::int64_t E = params.exponent(n);
    const Dyadic a = name(E + 2);
    const mpz_class bit = a.round_to(E).floor_scaled(E);
    return mpz_odd_p(bit.get_mpz_t()) != 0;
}

}  // namespace odegadget
