#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "odegadget/gadget.hpp"
#include "odegadget/real_name.hpp"

namespace odegadget {

/// Placement of one instance inside [0,1): lambda(x) = 2x + 2,
/// c_u = 1 - 2^-|u| + (2 u_bar + 1) / Lambda_u and l_u = c_u -/+ 1 / Lambda_u.
struct GlueLayout {
    std::uint64_t length = 0;  // |u|
    mpz_class value;           // u_bar
    std::int64_t lambda = 0;   // log2 Lambda_u
    Dyadic c;
    Dyadic lo;
    Dyadic hi;
};

Polynomial glue_lambda();
GlueLayout glue_layout(const InstanceEncoding& enc);

/// The glued pair (g, h) over a finite corpus. Points of [0,1] outside every
/// instance interval carry g = 0 and h = 0.
class GluedSystem {
public:
    struct Entry {
        CountingInstance instance;
        GlueLayout layout;
        std::shared_ptr<const Gadget> gadget;
    };

    GluedSystem() = default;

    /// Adds an instance with gadget parameters (k, glue_gamma()). Rejects a
    /// second instance with the same encoding.
    void add(const CountingInstance& inst, unsigned k);
    /// Adds an instance with a prebuilt gadget.
    void add(const CountingInstance& inst, std::shared_ptr<const Gadget> gadget);

    const std::vector<Entry>& entries() const { return entries_; }
    /// Index of the entry whose interval contains t, if any.
    std::optional<std::size_t> locate(const Dyadic& t) const;

    DyadicInterval enclose_h(const Dyadic& t, std::int64_t n) const;
    DyadicInterval enclose_g(const Dyadic& t, const Dyadic& y, std::int64_t n) const;
    /// D_1^i D_2^j g(t, y) for y in [-1, 1].
    DyadicInterval enclose_deriv(unsigned i, unsigned j, const Dyadic& t, const Dyadic& y, std::int64_t n) const;

    Dyadic h(const Dyadic& t, std::int64_t n) const { return enclose_h(t, n).midpoint(); }
    Dyadic g(const Dyadic& t, const Dyadic& y, std::int64_t n) const { return enclose_g(t, y, n).midpoint(); }
    Dyadic deriv(unsigned i, unsigned j, const Dyadic& t, const Dyadic& y, std::int64_t n) const
    {
        return enclose_deriv(i, j, t, y, n).midpoint();
    }

    /// x -> name of h(x).
    NamedFunction h_oracle() const;

private:
    std::vector<Entry> entries_;  // sorted by layout.lo
};

class ContractViolation : public std::runtime_error {
public:
    ContractViolation(const std::string& what, std::int64_t precision, Dyadic answer)
        : std::runtime_error(what), precision_(precision), answer_(std::move(answer))
    {
    }
    std::int64_t precision() const { return precision_; }
    const Dyadic& answer() const { return answer_; }

private:
    std::int64_t precision_;
    Dyadic answer_;
};

struct ReductionTrace {
    Dyadic point;          // c_u
    std::int64_t precision = 0;
    Dyadic answer;         // oracle output at that precision
    Dyadic threshold;      // 2^{-rho - lambda - 1}
    bool accepted = false;
};

/// Decides u from a name of the glued h: queries h(c_u) at precision
/// rho + lambda + 2 and compares with 2^{-rho-lambda-1}.
bool reduce(const CountingInstance& u, unsigned k, const NamedFunction& h_oracle,
            ReductionTrace* trace = nullptr, const Polynomial& gamma = glue_gamma());

}  // namespace odegadget
