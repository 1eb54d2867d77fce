#include "doctest.h"

#include <random>
#include <set>

#include "formula_oracle.hpp"
#include "odegadget/formula.hpp"

using namespace odegadget;

namespace {

const char* kMinimal = "blocks 1\nblock 1 vars a threshold 1\nformula a\n";

CountingInstance two_block_xor()
{
    return parse_instance("blocks 2\nblock 1 vars a threshold 1\nblock 2 vars b threshold 2\n"
                          "formula (a & !b) | (!a & b)\n");
}

}  // namespace

TEST_CASE("parse minimal instance")
{
    const auto inst = parse_instance(kMinimal);
    CHECK(inst.n() == 1);
    CHECK(inst.block_size(1) == 1);
    CHECK(inst.threshold(1) == 1);
    CHECK(to_string(inst.formula) == "a");
    CHECK(serialize(inst) == kMinimal);
}

TEST_CASE("grammar and precedence")
{
    const auto inst = parse_instance("blocks 2\nblock 1 vars a b threshold 1\nblock 2 vars c threshold 1\n"
                                     "formula (a & b) | !c\n");
    CHECK(structurally_equal(inst.formula, make_or(make_and(make_var("a"), make_var("b")),
                                                   make_not(make_var("c")))));
    const auto p = parse_instance("blocks 1\nblock 1 vars a b c threshold 0\nformula !a | b & c | a\n");
    CHECK(structurally_equal(
        p.formula, make_or(make_or(make_not(make_var("a")), make_and(make_var("b"), make_var("c"))),
                           make_var("a"))));
    CHECK(to_string(p.formula) == "!a | b & c | a");
    const auto r = make_and(make_var("a"), make_and(make_var("b"), make_var("c")));
    CHECK(to_string(r) == "a & (b & c)");
    CHECK(to_string(make_not(make_or(make_var("a"), make_var("b")))) == "!(a | b)");
}

TEST_CASE("parse errors")
{
    auto err_at = [](const char* text) -> std::pair<std::size_t, std::size_t> {
        try {
            parse_instance(text);
        } catch (const ParseError& e) {
            return {e.line(), e.column()};
        }
        return {0, 0};
    };
    const auto unclosed = err_at("blocks 1\nblock 1 vars a threshold 1\nformula (a &\n");
    CHECK(unclosed.first == 3);
    const auto unbalanced = err_at("blocks 1\nblock 1 vars a threshold 1\nformula (a & a\n");
    CHECK(unbalanced.first == 3);
    CHECK(unbalanced.second == 9);
    CHECK_THROWS_AS(parse_instance("blocks 1\nblock 1 vars a a threshold 1\nformula a\n"), ParseError);
    CHECK_THROWS_AS(parse_instance("blocks 1\nblock 1 vars a threshold 1\nformula b\n"), ParseError);
    CHECK_THROWS_AS(parse_instance("blocks 1\nblock 1 vars a threshold -1\nformula a\n"), ParseError);
    CHECK_THROWS_AS(parse_instance("blocks 1\nblock 1 vars a threshold x\nformula a\n"), ParseError);
    CHECK_THROWS_AS(parse_instance("blocks 2\nblock 1 vars a threshold 1\nformula a\n"), ParseError);
    CHECK_THROWS_AS(parse_instance("blocks 1\nblock 2 vars a threshold 1\nformula a\n"), ParseError);
    CHECK_THROWS_AS(parse_instance("formula a\n"), ParseError);
}

TEST_CASE("comments and blank lines are ignored")
{
    const auto inst = parse_instance("# comment\n\nblocks 1\n  block 1 vars a threshold 1\n\nformula a\n");
    CHECK(serialize(inst) == kMinimal);
}

TEST_CASE("evaluation")
{
    const auto f = make_or(make_and(make_var("a"), make_var("b")), make_not(make_var("c")));
    CHECK(eval_formula(make_var("a"), {{"a", true}}));
    CHECK(eval_formula(f, {{"a", false}, {"b", false}, {"c", false}}));
    CHECK_FALSE(eval_formula(f, {{"a", false}, {"b", true}, {"c", true}}));
    CHECK_THROWS_AS(eval_formula(f, {{"a", false}}), std::out_of_range);
}

TEST_CASE("model counting")
{
    CHECK(count_models(make_var("a"), {"a"}, {}) == 1);
    CHECK(count_models(make_or(make_var("a"), make_var("b")), {"a", "b"}, {}) == 3);
    CHECK(count_models(make_and(make_var("a"), make_not(make_var("a"))), {"a"}, {}) == 0);
    std::vector<std::string> big(25, "v");
    CHECK_THROWS_AS(count_models(make_var("v"), big, {}), CapacityError);

    // weakening psi to psi | psi' never lowers the count
    std::mt19937_64 rng(5);
    const std::vector<std::string> vars{"a", "b", "c", "d"};
    for (int i = 0; i < 200; ++i) {
        const auto psi = testing_oracles::random_formula(rng, vars, 3);
        const auto extra = testing_oracles::random_formula(rng, vars, 3);
        CHECK(count_models(make_or(psi, extra), vars, {}) >= count_models(psi, vars, {}));
    }
}

TEST_CASE("phi_i levels")
{
    CHECK(eval_phi_i(parse_instance(kMinimal), 1, {}));
    CHECK(eval_phi_i(two_block_xor(), 2, {}));
    const auto unreachable = parse_instance("blocks 1\nblock 1 vars a b threshold 5\nformula a | !a\n");
    CHECK_FALSE(truth_value(unreachable));

    // level 0 is the formula itself
    const auto inst = two_block_xor();
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            const Assignment asg{{"a", a != 0}, {"b", b != 0}};
            CHECK(eval_phi_i(inst, 0, asg) == eval_formula(inst.formula, asg));
        }
    }
    CHECK_THROWS_AS(eval_phi_i(inst, 1, {}), std::out_of_range);
}

TEST_CASE("oracle equivalence on random instances")
{
    std::mt19937_64 rng(2024);
    for (int i = 0; i < 400; ++i) {
        const auto inst = testing_oracles::random_instance(rng, 3, 12);
        INFO(serialize(inst));
        CHECK(truth_value(inst) == testing_oracles::truth_table_value(inst));
        const auto back = parse_instance(serialize(inst));
        CHECK(serialize(back) == serialize(inst));
        CHECK(structurally_equal(back.formula, inst.formula));
    }
}

TEST_CASE("binary encoding")
{
    const auto inst = parse_instance(kMinimal);
    const auto enc = encode(inst);
    // 1 | n=1: 10 | l_1=1: 10 | gamma(2): 010 | Var index (width 0): 00
    CHECK(enc.bits == "1101001000");
    CHECK(enc.padding == 2);
    CHECK(enc.length() == 12);
    CHECK(enc.value() == 0b1101001000);

    std::mt19937_64 rng(9);
    std::set<std::string> canon;
    std::set<std::string> codes;
    for (int i = 0; i < 300; ++i) {
        const auto r = testing_oracles::random_instance(rng, 3, 10);
        // names are regular in the generator, so the text is canonical up to renaming
        if (canon.insert(serialize(r)).second) CHECK(codes.insert(encode(r).bits).second);
    }
}
