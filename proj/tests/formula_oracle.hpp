#pragma once

// Independent truth-table evaluator and a random instance generator.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "odegadget/formula.hpp"

namespace testing_oracles {

// Materializes phi over all variables (block 1 in the low bits) and folds the
// thresholds bottom-up, one block at a time.
inline bool truth_table_value(const odegadget::CountingInstance& inst)
{
    std::vector<std::string> order;
    for (const auto& b : inst.blocks) order.insert(order.end(), b.begin(), b.end());
    const std::size_t v = order.size();
    std::vector<std::uint8_t> table(std::size_t{1} << v);
    odegadget::Assignment a;
    for (std::size_t mask = 0; mask < table.size(); ++mask) {
        for (std::size_t j = 0; j < v; ++j) a[order[j]] = ((mask >> j) & 1U) != 0;
        table[mask] = odegadget::eval_formula(inst.formula, a) ? 1 : 0;
    }
    for (std::size_t i = 0; i < inst.blocks.size(); ++i) {
        const std::size_t group = std::size_t{1} << inst.blocks[i].size();
        std::vector<std::uint8_t> next(table.size() / group);
        for (std::size_t g = 0; g < next.size(); ++g) {
            std::uint64_t sum = 0;
            for (std::size_t k = 0; k < group; ++k) sum += table[g * group + k];
            next[g] = sum >= inst.thresholds[i] ? 1 : 0;
        }
        table = std::move(next);
    }
    return table.at(0) != 0;
}

inline odegadget::PropFormula random_formula(std::mt19937_64& rng,
                                             const std::vector<std::string>& vars, int depth)
{
    using namespace odegadget;
    const auto pick = rng() % 10;
    if (depth <= 0 || pick < 3) return make_var(vars[rng() % vars.size()]);
    if (pick < 5) return make_not(random_formula(rng, vars, depth - 1));
    if (pick < 8) return make_and(random_formula(rng, vars, depth - 1), random_formula(rng, vars, depth - 1));
    return make_or(random_formula(rng, vars, depth - 1), random_formula(rng, vars, depth - 1));
}

inline odegadget::CountingInstance random_instance(std::mt19937_64& rng, std::size_t max_blocks,
                                                   std::size_t max_vars)
{
    odegadget::CountingInstance inst;
    const std::size_t n = 1 + rng() % max_blocks;
    std::vector<std::string> all;
    std::size_t budget = max_vars;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t room = budget - (n - i - 1);
        const std::size_t l = 1 + rng() % std::min<std::size_t>(room, 4);
        budget -= l;
        std::vector<std::string> block;
        for (std::size_t j = 0; j < l; ++j) {
            block.push_back("x" + std::to_string(i + 1) + "_" + std::to_string(j));
            all.push_back(block.back());
        }
        const std::uint64_t full = std::uint64_t{1} << l;
        inst.thresholds.push_back(rng() % (full + 2));
        inst.blocks.push_back(std::move(block));
    }
    inst.formula = random_formula(rng, all, 4);
    return inst;
}

}  // namespace testing_oracles
