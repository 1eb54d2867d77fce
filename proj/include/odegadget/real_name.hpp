#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "odegadget/dyadic.hpp"
#include "odegadget/interval.hpp"
#include "odegadget/polynomial.hpp"

namespace odegadget {

/// A precision-indexed oracle for a real x: query(n) returns a_n with
/// a_n * 2^n in {floor(x 2^n), ceil(x 2^n)}, so |a_n - x| <= 2^-n.
class RealName {
public:
    using Query = std::function<Dyadic(std::int64_t)>;

    RealName() = default;
    explicit RealName(Query query) : query_(std::move(query)) {}

    Dyadic query(std::int64_t n) const { return query_(n); }
    Dyadic operator()(std::int64_t n) const { return query_(n); }

    /// Name of an exactly known dyadic (returns floor(x 2^n) / 2^n).
    static RealName exact(Dyadic x);

private:
    Query query_;
};

using Enclosure = std::function<DyadicInterval(std::int64_t)>;

/// Builds a name from an enclosure evaluator. Each query refines the
/// enclosure until its width is below 2^-n and outputs floor(hi 2^n) / 2^n.
RealName name_of(Enclosure enclose, PrecisionSchedule schedule = {});

/// Builds a name from an evaluator whose argument is the requested absolute
/// precision: enclose(m) must return an enclosure of width at most 2^-m.
/// Throws PrecisionError when an enclosure is wider than promised.
RealName name_from_enclosures(Enclosure enclose);

/// A real function on [0,1] given as a name-producing map over dyadic points.
using NamedFunction = std::function<RealName(const Dyadic&)>;

struct ModulusTrials {
    std::vector<std::int64_t> precisions{2, 4, 8, 16, 32};
    unsigned pairs_per_precision = 16;
    std::uint64_t seed = 0;
};

struct ModulusWitness {
    Dyadic x;
    Dyadic y;
    Dyadic fx;
    Dyadic fy;
    std::int64_t n = 0;
};

struct ModulusVerdict {
    bool pass = true;
    unsigned pairs_checked = 0;
    std::optional<ModulusWitness> witness;
};

/// Samples pairs |x - y| <= 2^-p(n) in [0,1] and checks
/// |f(x) - f(y)| <= 2^-n + 2 * 2^-(n+2), querying f at precision n + 2.
ModulusVerdict check_modulus(const NamedFunction& f, const Polynomial& modulus,
                             const ModulusTrials& trials = {});

/// Bit-reversal (van der Corput) point in [0,1) with `bits` binary digits.
Dyadic van_der_corput(std::uint64_t index, unsigned bits = 32);

}  // namespace odegadget
