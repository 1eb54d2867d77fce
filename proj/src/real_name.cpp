#include "odegadget/real_name.hpp"

#include <algorithm>

namespace odegadget {

RealName RealName::exact(Dyadic x)
{
    return RealName([x = std::move(x)](std::int64_t n) { return x.floor_to(n); });
}

RealName name_of(Enclosure enclose, PrecisionSchedule schedule)
{
    return RealName([enclose = std::move(enclose), schedule](std::int64_t n) {
        // width < 2^-n: ask for 2^-(n+1), which the driver treats as <=
        const DyadicInterval e = refine(enclose, n + 1, schedule);
        // floor(hi 2^n) lies in {floor(x 2^n), ceil(x 2^n)} for every x in e
        return Dyadic(e.hi().floor_scaled(n), -n);
    });
}

RealName name_from_enclosures(Enclosure enclose)
{
    return RealName([enclose = std::move(enclose)](std::int64_t n) {
        const DyadicInterval e = enclose(n + 1);
        if (e.width() > Dyadic::pow2(-(n + 1))) {
            throw PrecisionError("enclosure wider than 2^-" + std::to_string(n + 1),
                                 e.width().log2_ceil_bound());
        }
        return Dyadic(e.hi().floor_scaled(n), -n);
    });
}

Dyadic van_der_corput(std::uint64_t index, unsigned bits)
{
    mpz_class m = 0;
    for (unsigned b = 0; b < bits; ++b) {
        m *= 2;
        if ((index >> b) & 1U) m += 1;
    }
    return Dyadic(m, -static_cast<std::int64_t>(bits));
}

ModulusVerdict check_modulus(const NamedFunction& f, const Polynomial& modulus,
                             const ModulusTrials& trials)
{
    ModulusVerdict verdict;
    std::uint64_t index = trials.seed;
    for (const std::int64_t n : trials.precisions) {
        const std::int64_t p = modulus.eval(n);
        const Dyadic gap = Dyadic::pow2(-p);
        const Dyadic slack = Dyadic::pow2(-n) + Dyadic::pow2(-(n + 1));
        for (unsigned k = 0; k < trials.pairs_per_precision; ++k) {
            Dyadic x = van_der_corput(++index, 24);
            // alternate the side so both endpoints of [0,1] get exercised
            Dyadic y = (k % 2 == 0) ? x + gap : x - gap;
            if (y > Dyadic(1)) y = Dyadic(1);
            if (y.sign() < 0) y = Dyadic(0);
            const Dyadic fx = f(x).query(n + 2);
            const Dyadic fy = f(y).query(n + 2);
            ++verdict.pairs_checked;
            if ((fx - fy).abs() > slack) {
                verdict.pass = false;
                verdict.witness = ModulusWitness{x, y, fx, fy, n};
                return verdict;
            }
        }
    }
    return verdict;
}

}  // namespace odegadget
