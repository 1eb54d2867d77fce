#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "odegadget/formula.hpp"

namespace odegadget {

/// G(i, T, Y) in {-1, 0, 1}.
using StepFunction = std::function<int(std::size_t i, std::uint64_t T, const mpz_class& Y)>;

/// A difference equation of height P, width Q and cell size R = 2^cell_bits.
struct DifferenceEquation {
    std::size_t height = 0;      // P
    std::uint64_t width = 0;     // Q
    std::uint64_t cell_bits = 0; // log2 R
    StepFunction step;
};

/// Raised when some H(i, T) would leave [0, R).
class CellOverflow : public std::runtime_error {
public:
    CellOverflow(std::size_t i, std::uint64_t T, std::int64_t value);
    std::size_t row() const { return row_; }
    std::uint64_t column() const { return column_; }

private:
    std::size_t row_;
    std::uint64_t column_;
};

/// H: (P+1) x (Q+1), stored column-major.
class SolutionGrid {
public:
    SolutionGrid(std::size_t height, std::uint64_t width);

    std::size_t height() const { return height_; }
    std::uint64_t width() const { return width_; }
    std::int64_t at(std::size_t i, std::uint64_t T) const { return cells_[T * (height_ + 1) + i]; }
    std::int64_t& at(std::size_t i, std::uint64_t T) { return cells_[T * (height_ + 1) + i]; }
    std::int64_t row_max(std::size_t i) const;

private:
    std::size_t height_;
    std::uint64_t width_;
    std::vector<std::int64_t> cells_;
};

/// H(i,0) = H(0,T) = 0 and H(i+1,T+1) - H(i+1,T) = G(i,T,H(i,T)).
SolutionGrid solve(const DifferenceEquation& eq);

/// H(P, Q).
std::int64_t recognize(const DifferenceEquation& eq);

/// T_{[i,j]} = T_{j-1} ... T_i as text, most significant first.
std::string bit_range(std::uint64_t T, unsigned i, unsigned j);

/// How the gadget's column index T is sliced into formula arguments and
/// control bits. Literal reads the indices as written, leaving bit 0 free;
/// PinLowBit additionally forces every column with T_0 = 1 to be inactive;
/// ShiftWindow moves every position down by one so bit 0 belongs to block 1.
/// In all variants the top row's sign bit s_{n+1} is taken as s_n + 1.
enum class BitLayout { Literal, PinLowBit, ShiftWindow };

const char* to_string(BitLayout layout);
std::optional<BitLayout> parse_layout(const std::string& name);

struct GadgetCaps {
    unsigned width_bits = 20;  // Q <= 2^20 + 1
    unsigned enumeration_cap = 24;
};

/// The logarithmic-height family member for an instance: height n+1, width
/// 2^{s_n}+1 and cell size 2^{|u|}. The step is evaluated lazily.
DifferenceEquation build_gadget(const CountingInstance& inst, BitLayout layout = BitLayout::PinLowBit,
                                const GadgetCaps& caps = {});

struct LayoutTrial {
    BitLayout layout;
    bool oracle_ok = true;
    bool cell_bound_ok = true;
    std::string first_failure;
};

struct Calibration {
    std::optional<BitLayout> chosen;
    std::vector<LayoutTrial> trials;
};

/// max_T H(i,T) <= 2^{l_i} for rows 1..n and <= 1 for the top row.
/// Returns the first violating row, if any.
std::optional<std::size_t> cell_bound_violation(const CountingInstance& inst, const SolutionGrid& grid);

/// Tries each layout in declaration order and keeps the first one under which
/// every instance is recognized correctly and satisfies the cell bound.
Calibration calibrate_layout(const std::vector<CountingInstance>& corpus);

/// Serialized form of a difference equation: each original macro-column is
/// spread over P columns (higher rows first), followed by a sign-reversed
/// replay that clears every row below the top, padded to 2^q columns.
struct NormalizedGadget {
    DifferenceEquation equation;
    std::size_t p = 0;  // top row index of H (= height)
    unsigned q = 0;     // width 2^q
    std::uint64_t original_width = 0;
    /// j_u(T): the only row whose step may be nonzero in column T.
    std::size_t active_row(std::uint64_t T) const;
};

NormalizedGadget normalize(const DifferenceEquation& eq);

/// `i,T,H` rows, column-major.
void dump_grid(const SolutionGrid& grid, std::ostream& out);
/// Sparse `i,T,Y,G` rows for Y in [0, y_limit).
void dump_table(const DifferenceEquation& eq, std::uint64_t y_limit, std::ostream& out);

}  // namespace odegadget
