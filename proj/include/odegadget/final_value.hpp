#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "odegadget/gadget.hpp"
#include "odegadget/real_name.hpp"

namespace odegadget {

/// Membership of 0^n.
using TallyLanguage = std::function<bool(std::uint64_t n)>;
/// Reduction 0^n -> counting instance with the same answer.
using TallyReduction = std::function<CountingInstance(std::uint64_t n)>;

/// 0^n -> "x, threshold 1" when 0^n is in the language, "x & !x" otherwise.
TallyReduction trivial_tally_reduction(TallyLanguage tally);

/// Exponents of the single-number encoding
///   h(1) = sum_n T(0^n) / 2^{2n + gamma(n) + rho_bar(n+1)},
/// with lambda(x) = x + 1, gamma = final_value_gamma() and
/// rho_bar(n) = sum_{i<n} rho(|F(0^i)|).
class FinalValueParams {
public:
    static constexpr unsigned kDefaultHorizon = 8;

    FinalValueParams(TallyReduction F, unsigned k, unsigned horizon = kDefaultHorizon);

    unsigned k() const { return k_; }
    unsigned horizon() const { return horizon_; }
    const TallyReduction& reduction() const { return F_; }

    /// rho(|F(0^n)|) under the gadget parameters (k, gamma).
    std::int64_t rho(std::uint64_t n) const;
    /// rho_bar(n).
    std::int64_t rho_bar(std::uint64_t n) const;
    /// E_n = 2n + gamma(n) + rho_bar(n+1); strictly increasing.
    std::int64_t exponent(std::uint64_t n) const;

private:
    struct Cache;
    TallyReduction F_;
    unsigned k_;
    unsigned horizon_;
    std::shared_ptr<Cache> cache_;
};

/// Name of h(1). Each term is h_{F(0^n)}(1) / 2^{2n + gamma(n) + rho_bar(n)},
/// evaluated through the gadget; tally is used to check F on the way.
RealName final_value_name(const TallyLanguage& tally, const FinalValueParams& params);

/// Reads T(0^n) back from a name: rounds the query at E_n + 2 to a multiple
/// of 2^-E_n and returns its last bit. Throws std::out_of_range past the horizon.
bool decode_tally(const RealName& name, std::uint64_t n, const FinalValueParams& params);

}  // namespace odegadget
