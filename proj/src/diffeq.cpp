#include "odegadget/diffeq.hpp"

#include <algorithm>
#include <ostream>

namespace odegadget {

CellOverflow::CellOverflow(std::size_t i, std::uint64_t T, std::int64_t value)
    : std::runtime_error("cell overflow at H(" + std::to_string(i) + ", " + std::to_string(T) +
                         ") = " + std::to_string(value)),
      row_(i),
      column_(T)
{
}

SolutionGrid::SolutionGrid(std::size_t height, std::uint64_t width)
    : height_(height), width_(width), cells_((height + 1) * (width + 1), 0)
{
}

std::int64_t SolutionGrid::row_max(std::size_t i) const
{
    std::int64_t m = 0;
    for (std::uint64_t T = 0; T <= width_; ++T) m = std::max(m, at(i, T));
    return m;
}

SolutionGrid solve(const DifferenceEquation& eq)
{
    SolutionGrid grid(eq.height, eq.width);
    const bool huge_cells = eq.cell_bits >= 63;
    const std::int64_t limit = huge_cells ? 0 : (std::int64_t{1} << eq.cell_bits);
    mpz_class y;
    for (std::uint64_t T = 0; T < eq.width; ++T) {
        for (std::size_t i = 0; i < eq.height; ++i) {
            y = static_cast<long>(grid.at(i, T));
            const int g = eq.step(i, T, y);
            if (g < -1 || g > 1) {
                throw std::domain_error("step value " + std::to_string(g) + " outside {-1,0,1} at (" +
                                        std::to_string(i) + ", " + std::to_string(T) + ")");
            }
            const std::int64_t v = grid.at(i + 1, T) + g;
            if (v < 0 || (!huge_cells && v >= limit)) throw CellOverflow(i + 1, T + 1, v);
            grid.at(i + 1, T + 1) = v;
        }
    }
    return grid;
}

std::int64_t recognize(const DifferenceEquation& eq)
{
    return solve(eq).at(eq.height, eq.width);
}

std::string bit_range(std::uint64_t T, unsigned i, unsigned j)
{
    std::string out;
    for (unsigned b = j; b-- > i;) out += (b < 64 && ((T >> b) & 1U)) ? '1' : '0';
    return out;
}

const char* to_string(BitLayout layout)
{
    switch (layout) {
    case BitLayout::Literal: return "literal";
    case BitLayout::PinLowBit: return "pin-low-bit";
    case BitLayout::ShiftWindow: return "shift-window";
    }
    return "?";
}

std::optional<BitLayout> parse_layout(const std::string& name)
{
    for (auto l : {BitLayout::Literal, BitLayout::PinLowBit, BitLayout::ShiftWindow}) {
        if (name == to_string(l)) return l;
    }
    return std::nullopt;
}

namespace {

// Precomputed bit positions for one instance under one layout.
struct GadgetStep {
    std::shared_ptr<const CompiledFormula> formula;
    bool pin_low = false;
    unsigned row0_sign = 0;
    std::vector<unsigned> var_bit;  // global variable index -> bit of T
    struct Row {
        std::uint64_t window_mask;
        std::uint64_t window_value;
        unsigned sign_bit;
        mpz_class threshold;
    };
    std::vector<Row> rows;  // rows[i-1] for i = 1..n

    static bool bit(std::uint64_t T, unsigned b) { return b < 64 && ((T >> b) & 1U); }

    int operator()(std::size_t i, std::uint64_t T, const mpz_class& Y) const
    {
        if (pin_low && (T & 1U)) return 0;
        if (i == 0) {
            std::uint64_t mask = 0;
            for (std::size_t v = 0; v < var_bit.size(); ++v) {
                if (bit(T, var_bit[v])) mask |= std::uint64_t{1} << v;
            }
            if (!(*formula)(mask)) return 0;
            return bit(T, row0_sign) ? -1 : 1;
        }
        if (i > rows.size()) return 0;
        const Row& r = rows[i - 1];
        if ((T & r.window_mask) != r.window_value) return 0;
        if (Y < r.threshold) return 0;
        return bit(T, r.sign_bit) ? -1 : 1;
    }
};

}  // namespace

DifferenceEquation build_gadget(const CountingInstance& inst, BitLayout layout, const GadgetCaps& caps)
{
    inst.validate();
    const std::size_t n = inst.n();
    const std::uint64_t sn = inst.s(n);
    if (sn > caps.width_bits) {
        throw CapacityError("gadget width 2^" + std::to_string(sn) + "+1 exceeds the cap of 2^" +
                            std::to_string(caps.width_bits) + " columns");
    }
    for (std::size_t i = 1; i <= n; ++i) {
        if (inst.block_size(i) > caps.enumeration_cap) {
            throw CapacityError("block " + std::to_string(i) + " exceeds the enumeration cap");
        }
    }
    const unsigned shift = layout == BitLayout::ShiftWindow ? 1 : 0;
    // nominal bit position -> physical bit position
    auto pos = [shift](std::uint64_t b) { return static_cast<unsigned>(b - shift); };

    auto step = std::make_shared<GadgetStep>();
    step->formula = std::make_shared<const CompiledFormula>(inst);
    step->pin_low = layout == BitLayout::PinLowBit;
    step->row0_sign = pos(inst.s(1));
    for (std::size_t i = 1; i <= n; ++i) {
        // block i occupies T_{[s_{i-1}+1, s_i]}; its first variable is the most significant
        const std::uint64_t top = inst.s(i) - 1;
        for (std::size_t j = 0; j < inst.block_size(i); ++j) step->var_bit.push_back(pos(top - j));
    }
    for (std::size_t i = 1; i <= n; ++i) {
        // active iff T_{[1, s_i + 1]} = 1 0...0
        GadgetStep::Row r;
        const unsigned lo = pos(1);
        const unsigned hi = pos(inst.s(i));
        r.window_mask = 0;
        for (unsigned b = lo; b <= hi; ++b) r.window_mask |= std::uint64_t{1} << b;
        r.window_value = std::uint64_t{1} << hi;
        r.sign_bit = pos(i < n ? inst.s(i + 1) : inst.s(n) + 1);
        r.threshold = mpz_class(static_cast<unsigned long>(inst.threshold(i)));
        step->rows.push_back(std::move(r));
    }

    DifferenceEquation eq;
    eq.height = n + 1;
    eq.width = (std::uint64_t{1} << sn) + 1;
    eq.cell_bits = encode(inst).length();
    eq.step = [step](std::size_t i, std::uint64_t T, const mpz_class& Y) { return (*step)(i, T, Y); };
    return eq;
}

std::optional<std::size_t> cell_bound_violation(const CountingInstance& inst, const SolutionGrid& grid)
{
    for (std::size_t i = 1; i <= grid.height(); ++i) {
        const std::int64_t bound =
            i <= inst.n() ? (std::int64_t{1} << inst.block_size(i)) : std::int64_t{1};
        if (grid.row_max(i) > bound) return i;
    }
    return std::nullopt;
}

Calibration calibrate_layout(const std::vector<CountingInstance>& corpus)
{
    Calibration cal;
    for (auto layout : {BitLayout::Literal, BitLayout::PinLowBit, BitLayout::ShiftWindow}) {
        LayoutTrial trial{layout, true, true, {}};
        for (std::size_t k = 0; k < corpus.size(); ++k) {
            const auto& inst = corpus[k];
            const auto eq = build_gadget(inst, layout);
            std::optional<SolutionGrid> grid;
            try {
                grid = solve(eq);
            } catch (const CellOverflow& e) {
                trial.cell_bound_ok = false;
                if (trial.first_failure.empty()) {
                    trial.first_failure = "instance " + std::to_string(k) + ": " + e.what();
                }
                continue;
            }
            const bool expected = truth_value(inst);
            if (grid->at(eq.height, eq.width) != (expected ? 1 : 0)) {
                trial.oracle_ok = false;
                if (trial.first_failure.empty()) {
                    trial.first_failure = "instance " + std::to_string(k) + ": recognized " +
                                          std::to_string(grid->at(eq.height, eq.width)) +
                                          ", expected " + (expected ? "1" : "0");
                }
            }
            if (auto row = cell_bound_violation(inst, *grid)) {
                trial.cell_bound_ok = false;
                if (trial.first_failure.empty()) {
                    trial.first_failure = "instance " + std::to_string(k) + ": row " +
                                          std::to_string(*row) + " exceeds its cell bound";
                }
            }
        }
        cal.trials.push_back(trial);
        if (!cal.chosen && trial.oracle_ok && trial.cell_bound_ok) cal.chosen = layout;
    }
    return cal;
}

std::size_t NormalizedGadget::active_row(std::uint64_t T) const
{
    const std::uint64_t P = p;
    const std::uint64_t forward = original_width * P;
    if (T < forward) return static_cast<std::size_t>(P - 1 - T % P);
    const std::uint64_t back = original_width * (P - 1);
    if (P > 1 && T < forward + back) return static_cast<std::size_t>((T - forward) % (P - 1));
    return static_cast<std::size_t>(P - 1);
}

NormalizedGadget normalize(const DifferenceEquation& eq)
{
    NormalizedGadget out;
    const std::uint64_t P = eq.height;
    const std::uint64_t Q = eq.width;
    if (P == 0) throw std::invalid_argument("cannot normalize an equation of height 0");
    const std::uint64_t used = Q * P + Q * (P - 1);
    unsigned q = 0;
    while ((std::uint64_t{1} << q) < used) ++q;

    out.p = eq.height;
    out.q = q;
    out.original_width = Q;
    out.equation.height = eq.height;
    out.equation.width = std::uint64_t{1} << q;
    out.equation.cell_bits = eq.cell_bits;
    const StepFunction inner = eq.step;
    const std::uint64_t forward = Q * P;
    out.equation.step = [inner, P, Q, forward](std::size_t i, std::uint64_t T, const mpz_class& Y) {
        if (T < forward) {
            // macro-column T / P, higher rows first so each reads the old value below it
            const std::uint64_t row = P - 1 - T % P;
            return i == row ? inner(i, T / P, Y) : 0;
        }
        if (P < 2) return 0;
        const std::uint64_t m = (T - forward) / (P - 1);
        if (m >= Q) return 0;
        // replay macro-columns backwards, lower rows first, negated; the top row is kept
        const std::uint64_t row = (T - forward) % (P - 1);
        return i == row ? -inner(i, Q - 1 - m, Y) : 0;
    };
    return out;
}

void dump_grid(const SolutionGrid& grid, std::ostream& out)
{
    out << "i,T,H\n";
    for (std::uint64_t T = 0; T <= grid.width(); ++T) {
        for (std::size_t i = 0; i <= grid.height(); ++i) out << i << ',' << T << ',' << grid.at(i, T) << '\n';
    }
}

void dump_table(const DifferenceEquation& eq, std::uint64_t y_limit, std::ostream& out)
{
    out << "i,T,Y,G\n";
    mpz_class y;
    for (std::uint64_t T = 0; T < eq.width; ++T) {
        for (std::size_t i = 0; i < eq.height; ++i) {
            for (std::uint64_t Y = 0; Y < y_limit; ++Y) {
                y = static_cast<unsigned long>(Y);
                const int g = eq.step(i, T, y);
                if (g != 0) out << i << ',' << T << ',' << Y << ',' << g << '\n';
            }
        }
    }
}

}  // namespace odegadget
