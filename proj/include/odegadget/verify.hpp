#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "odegadget/gadget.hpp"
#include "odegadget/glue.hpp"

namespace odegadget {

struct CorpusEntry {
    std::string file;  // relative to the corpus directory
    CountingInstance instance;
    unsigned k = 1;
    Polynomial gamma = glue_gamma();
};

struct Corpus {
    std::uint64_t seed = 0;
    std::vector<CorpusEntry> entries;
};

/// Reads DIR/corpus.json:
///   {"seed": 7, "instances": [{"file": "a.cqbf", "k": 3, "gamma": [4, 8, 4]}, ...]}
/// gamma lists coefficients from x^0 upward and defaults to glue_gamma().
Corpus load_corpus(const std::string& dir);

/// Single-point faults, one per acceptance criterion.
enum class Fault {
    None,
    OracleOutput,    // top row answers 1 - C(Y)
    CellBound,       // first negative row-0 step turned positive
    GridCell,        // one row-0 step corrupted on the gadget side only
    FinalB,          // log2 B raised by one
    ResidualB,       // log2 B raised by one on the g side only
    BoundsB,         // g side built with a small B
    ReduceOracle,    // oracle answers off the 2^-n grid
    FinalValueName,  // final-value name perturbed by 2^-E_3
    BumpTable,       // s(3) lowered by 3
};

const char* to_string(Fault f);
std::optional<Fault> parse_fault(const std::string& name);
const std::vector<Fault>& all_faults();

enum class Status { Pass, Fail, Error };
const char* to_string(Status s);

struct Verdict {
    std::string check;
    std::string instance;
    Status status = Status::Pass;
    std::string detail;
    nlohmann::json witness;  // null unless failed
    nlohmann::json stats;    // counts only, so reports stay byte-identical
};

struct VerdictReport {
    std::vector<Verdict> verdicts;  // sorted by (check, instance)

    bool all_pass() const;
    std::size_t count(Status s) const;
    /// One JSON object per line with keys check, instance, status, detail,
    /// witness and stats.
    void write_jsonl(std::ostream& out) const;
};

struct SuiteOptions {
    std::vector<std::string> checks;  // empty means all
    Fault fault = Fault::None;
    unsigned threads = 0;             // 0: hardware concurrency
    unsigned residual_points = 256;
    unsigned bound_points = 24;
    unsigned rk_cells = 8;
    unsigned rk_steps = 16;
};

/// oracle, cellbound, grid, final, boundary, bounds, residual, integrate,
/// seam, decay, reduce, modulus, finalvalue, bump.
const std::vector<std::string>& all_checks();

VerdictReport run_suite(const Corpus& corpus, const SuiteOptions& options);

class ContainmentError : public std::runtime_error {
public:
    ContainmentError(Dyadic t, Dyadic y)
        : std::runtime_error("trajectory left [-1,1] at t = " + t.str()), t_(std::move(t)), y_(std::move(y))
    {
    }
    const Dyadic& t() const { return t_; }
    const Dyadic& y() const { return y_; }

private:
    Dyadic t_;
    Dyadic y_;
};

using RightHandSide = std::function<Dyadic(const Dyadic& t, const Dyadic& y, std::int64_t n)>;

struct Trajectory {
    std::vector<Dyadic> t;
    std::vector<Dyadic> y;
};

/// Classical RK4; every stage value is rounded to a multiple of 2^-n and g is
/// queried at precision n + 4.
Trajectory integrate_rk4(const RightHandSide& g, const Dyadic& t0, const Dyadic& h0, const Dyadic& step,
                         std::uint64_t steps, std::int64_t n);

/// Endpoint errors of RK4 at 8, 16, 32 steps on y' = y (y(0) = 1/4) and
/// y' = -2ty (y(0) = 1/2) over [0,1], and the ratios err(N) / err(2N).
struct OrderStudy {
    std::vector<double> errors_exp;
    std::vector<double> errors_gauss;
    std::vector<double> ratios;
};
OrderStudy rk4_order_study();

}  // namespace odegadget
