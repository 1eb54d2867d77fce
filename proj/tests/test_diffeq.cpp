#include "doctest.h"

#include <functional>
#include <random>
#include <sstream>

#include "formula_oracle.hpp"
#include "odegadget/diffeq.hpp"

using namespace odegadget;

namespace {

DifferenceEquation make_eq(std::size_t P, std::uint64_t Q, std::uint64_t bits, StepFunction g)
{
    DifferenceEquation eq;
    eq.height = P;
    eq.width = Q;
    eq.cell_bits = bits;
    eq.step = std::move(g);
    return eq;
}

// H(i, T) = sum_{V < T} G(i-1, V, H(i-1, V)), evaluated by plain recursion.
std::int64_t summation_oracle(const DifferenceEquation& eq, std::size_t i, std::uint64_t T)
{
    if (i == 0 || T == 0) return 0;
    std::int64_t acc = 0;
    for (std::uint64_t V = 0; V < T; ++V) {
        acc += eq.step(i - 1, V, mpz_class(static_cast<long>(summation_oracle(eq, i - 1, V))));
    }
    return acc;
}

CountingInstance inst_of(const char* text) { return parse_instance(text); }

const char* kA = "blocks 1\nblock 1 vars a threshold 1\nformula a\n";
const char* kContra = "blocks 1\nblock 1 vars a threshold 1\nformula a & !a\n";

}  // namespace

TEST_CASE("solve small equations")
{
    const auto zero = make_eq(3, 5, 4, [](std::size_t, std::uint64_t, const mpz_class&) { return 0; });
    const auto gz = solve(zero);
    for (std::size_t i = 0; i <= 3; ++i) {
        for (std::uint64_t T = 0; T <= 5; ++T) CHECK(gz.at(i, T) == 0);
    }
    CHECK(recognize(zero) == 0);

    const auto ramp = make_eq(1, 3, 2, [](std::size_t, std::uint64_t, const mpz_class&) { return 1; });
    CHECK(solve(ramp).at(1, 3) == 3);
    CHECK(summation_oracle(ramp, 1, 3) == 3);

    const auto two = make_eq(2, 2, 1, [](std::size_t i, std::uint64_t T, const mpz_class& Y) {
        if (i == 0) return T == 0 ? 1 : 0;
        return static_cast<int>(Y.get_si());
    });
    CHECK(recognize(two) == 1);
    CHECK(summation_oracle(two, 2, 2) == 1);

    const auto over = make_eq(1, 5, 2, [](std::size_t, std::uint64_t, const mpz_class&) { return 1; });
    try {
        solve(over);
        FAIL("expected overflow");
    } catch (const CellOverflow& e) {
        CHECK(e.row() == 1);
        CHECK(e.column() == 4);
    }
}

TEST_CASE("bit ranges")
{
    CHECK(bit_range(6, 1, 3) == "11");
    CHECK(bit_range(6, 0, 1) == "0");
    CHECK(bit_range(6, 2, 2).empty());
    CHECK(bit_range(5, 0, 4) == "0101");
}

TEST_CASE("gadget rows follow the definition")
{
    const auto inst = inst_of(kA);
    const auto eq = build_gadget(inst);
    CHECK(eq.height == 2);
    CHECK(eq.width == 5);  // s_1 = 2
    CHECK(eq.cell_bits == encode(inst).length());
    CHECK(eq.step(0, 0, 0) == 0);
    // a is read from bit 1, the sign from bit s_1 = 2
    CHECK(eq.step(0, 2, 0) == 1);
    CHECK(eq.step(0, 6, 0) == -1);
    CHECK(eq.step(0, 3, 0) == 0);  // low bit pinned
    for (std::uint64_t T = 0; T < 5; ++T) {
        if (T != 4) CHECK(eq.step(1, T, 7) == 0);
    }
    CHECK(eq.step(1, 4, 1) == 1);
    CHECK(eq.step(1, 4, 0) == 0);
    CHECK(recognize(eq) == 1);
    CHECK(recognize(build_gadget(inst_of(kContra))) == 0);
}

TEST_CASE("solve agrees with the summation form")
{
    std::mt19937_64 rng(17);
    for (int k = 0; k < 10; ++k) {
        const auto inst = testing_oracles::random_instance(rng, 2, 3);
        const auto eq = build_gadget(inst);
        const auto grid = solve(eq);
        for (std::size_t i = 0; i <= eq.height; ++i) {
            for (std::uint64_t T = 0; T <= eq.width; T += 3) CHECK(grid.at(i, T) == summation_oracle(eq, i, T));
        }
    }
}

TEST_CASE("layout calibration")
{
    std::mt19937_64 rng(99);
    std::vector<CountingInstance> corpus{inst_of(kA), inst_of(kContra)};
    for (int k = 0; k < 60; ++k) corpus.push_back(testing_oracles::random_instance(rng, 3, 8));
    const auto cal = calibrate_layout(corpus);
    REQUIRE(cal.chosen.has_value());
    CHECK(*cal.chosen == BitLayout::PinLowBit);
    REQUIRE(cal.trials.size() == 3);
    CHECK_FALSE(cal.trials[0].cell_bound_ok);
    // the shifted window is an equally valid reading
    CHECK(cal.trials[2].oracle_ok);
    CHECK(cal.trials[2].cell_bound_ok);
}

TEST_CASE("recognition matches the truth table")
{
    std::mt19937_64 rng(4242);
    for (int k = 0; k < 150; ++k) {
        const auto inst = testing_oracles::random_instance(rng, 3, 10);
        INFO(serialize(inst));
        const auto eq = build_gadget(inst);
        const auto grid = solve(eq);
        CHECK(grid.at(eq.height, eq.width) == (testing_oracles::truth_table_value(inst) ? 1 : 0));
        CHECK_FALSE(cell_bound_violation(inst, grid).has_value());
    }
}

TEST_CASE("flipping the sign bit negates the lower row's contribution")
{
    std::mt19937_64 rng(8);
    for (int k = 0; k < 30; ++k) {
        const auto inst = testing_oracles::random_instance(rng, 3, 8);
        const auto eq = build_gadget(inst);
        const auto grid = solve(eq);
        for (std::size_t i = 1; i <= inst.n(); ++i) {
            const unsigned sbit = static_cast<unsigned>(inst.s(i));
            for (std::uint64_t V = 0; V < eq.width; ++V) {
                const std::uint64_t W = V ^ (std::uint64_t{1} << sbit);
                if (W >= eq.width) continue;
                const int a = eq.step(i - 1, V, mpz_class(static_cast<long>(grid.at(i - 1, V))));
                const int b = eq.step(i - 1, W, mpz_class(static_cast<long>(grid.at(i - 1, W))));
                if (a != 0) CHECK(a == -b);
            }
        }
    }
}

TEST_CASE("normalization")
{
    const auto zero = make_eq(2, 3, 4, [](std::size_t, std::uint64_t, const mpz_class&) { return 0; });
    const auto nz = normalize(zero);
    CHECK(recognize(nz.equation) == 0);

    std::mt19937_64 rng(31);
    std::vector<CountingInstance> corpus{inst_of(kA), inst_of(kContra)};
    for (int k = 0; k < 40; ++k) corpus.push_back(testing_oracles::random_instance(rng, 3, 8));
    for (const auto& inst : corpus) {
        const auto eq = build_gadget(inst);
        const auto ng = normalize(eq);
        CHECK(ng.equation.width == (std::uint64_t{1} << ng.q));
        CHECK(ng.equation.width >= eq.width * (2 * eq.height - 1));
        const auto g = solve(eq);
        const auto h = solve(ng.equation);
        for (std::uint64_t T = 0; T <= eq.width; ++T) {
            for (std::size_t i = 0; i <= eq.height; ++i) CHECK(h.at(i, T * eq.height) == g.at(i, T));
        }
        const std::uint64_t W = ng.equation.width;
        CHECK(h.at(ng.p, W) == (truth_value(inst) ? 1 : 0));
        for (std::size_t i = 0; i < ng.p; ++i) CHECK(h.at(i, W) == 0);
        // single active row per column, checked against the stored row values
        for (std::uint64_t T = 0; T < W; ++T) {
            for (std::size_t i = 0; i < ng.p; ++i) {
                const int v = ng.equation.step(i, T, mpz_class(static_cast<long>(h.at(i, T))));
                if (v != 0) CHECK(i == ng.active_row(T));
            }
        }
    }
}

TEST_CASE("csv dumps")
{
    const auto eq = build_gadget(inst_of(kA));
    std::ostringstream grid;
    dump_grid(solve(eq), grid);
    CHECK(grid.str().rfind("i,T,H\n0,0,0\n1,0,0\n2,0,0\n0,1,0\n", 0) == 0);
    std::ostringstream table;
    dump_table(eq, 2, table);
    CHECK(table.str().find("1,4,1,1\n") != std::string::npos);
}

TEST_CASE("width cap")
{
    const auto wide = parse_instance("blocks 1\nblock 1 vars a b c d e threshold 1\nformula a\n");
    GadgetCaps caps;
    caps.width_bits = 4;
    CHECK_THROWS_AS(build_gadget(wide, BitLayout::PinLowBit, caps), CapacityError);
}
