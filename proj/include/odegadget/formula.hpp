#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <gmpxx.h>

namespace odegadget {

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& message, std::size_t line, std::size_t column);
    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

/// Raised when brute-force enumeration would exceed a configured cap.
class CapacityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct PropNode;
using PropFormula = std::shared_ptr<const PropNode>;

struct PropNode {
    enum class Kind { Var, Not, And, Or };
    Kind kind;
    std::string name;  // Var only
    PropFormula left;  // Not uses left only
    PropFormula right;
};

PropFormula make_var(std::string name);
PropFormula make_not(PropFormula child);
PropFormula make_and(PropFormula left, PropFormula right);
PropFormula make_or(PropFormula left, PropFormula right);

bool structurally_equal(const PropFormula& a, const PropFormula& b);

/// Canonical infix text with minimal parentheses (binary operators are
/// left-associative, so a right operand of equal precedence is wrapped).
std::string to_string(const PropFormula& f);

using Assignment = std::map<std::string, bool>;

/// Standard Boolean semantics; throws std::out_of_range on a missing variable.
bool eval_formula(const PropFormula& f, const Assignment& a);

/// Number of completions of `fixed` over `block` satisfying f.
std::uint64_t count_models(const PropFormula& f, const std::vector<std::string>& block,
                           const Assignment& fixed, unsigned enumeration_cap = 24);

/// C^{m_1} X_1 ... C^{m_n} X_n phi, with an optional padding exponent equal to n.
struct CountingInstance {
    PropFormula formula;
    std::vector<std::vector<std::string>> blocks;
    std::vector<std::uint64_t> thresholds;

    std::size_t n() const { return blocks.size(); }
    std::size_t block_size(std::size_t i) const { return blocks.at(i - 1).size(); }  // l_i, 1-based
    std::uint64_t threshold(std::size_t i) const { return thresholds.at(i - 1); }    // m_i, 1-based
    /// s_i = sum_{j <= i} (l_j + 1); s_0 = 0.
    std::uint64_t s(std::size_t i) const;
    std::size_t variable_count() const;

    /// Throws std::invalid_argument when an invariant is broken.
    void validate() const;
};

CountingInstance parse_instance(std::string_view text);
CountingInstance load_instance(const std::string& path);
std::string serialize(const CountingInstance& inst);

/// Formula compiled against the instance's variable order (block 1 first,
/// each block in listed order). Bit v of a mask is the value of variable v.
class CompiledFormula {
public:
    explicit CompiledFormula(const CountingInstance& inst);
    bool operator()(std::uint64_t mask) const;
    std::size_t variable_count() const { return vars_; }

private:
    enum class Op : std::uint8_t { Push, Not, And, Or };
    struct Instr {
        Op op;
        std::uint8_t var;
    };
    std::vector<Instr> program_;
    std::size_t vars_ = 0;
};

/// phi_i(outer) = C^{m_i}(sum over X_i of phi_{i-1}); phi_0 is the formula.
/// `outer` must assign every variable of blocks i+1..n.
bool eval_phi_i(const CountingInstance& inst, std::size_t i, const Assignment& outer,
                unsigned enumeration_cap = 24);

/// L(u) = phi_n().
bool truth_value(const CountingInstance& inst, unsigned enumeration_cap = 24);

/// The padded input u = 0^{2^n} w, with w a compact binary encoding of the
/// instance: a leading 1, n and each l_i in unary, Elias-gamma of m_i + 1,
/// then the formula in prefix form. Variable names are not encoded, so
/// instances equal up to renaming share an encoding.
struct InstanceEncoding {
    std::string bits;  // w as '0'/'1' characters, most significant first
    std::uint64_t padding = 0;  // 2^n

    /// |u| = 2^n + |w|
    std::uint64_t length() const { return padding + bits.size(); }
    /// u-bar: integer value of u read in binary (the zero pad adds nothing)
    mpz_class value() const;
};

InstanceEncoding encode(const CountingInstance& inst);

}  // namespace odegadget
