#include "odegadget/verify.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <thread>

#include "odegadget/final_value.hpp"

namespace odegadget {

using json = nlohmann::json;

Corpus load_corpus(const std::string& dir)
{
    namespace fs = std::filesystem;
    const fs::path root(dir);
    std::ifstream in(root / "corpus.json");
    if (!in) throw std::runtime_error("cannot open " + (root / "corpus.json").string());
    const json doc = json::parse(in);
    Corpus corpus;
    corpus.seed = doc.value("seed", std::uint64_t{0});
    for (const auto& item : doc.at("instances")) {
        CorpusEntry e;
        e.file = item.at("file").get<std::string>();
        e.instance = load_instance((root / e.file).string());
        e.k = item.value("k", 1U);
        if (item.contains("gamma")) {
            std::vector<mpz_class> coeffs;
            for (const auto& c : item.at("gamma")) coeffs.emplace_back(c.get<unsigned long>());
            e.gamma = Polynomial(std::move(coeffs));
        }
        corpus.entries.push_back(std::move(e));
    }
    return corpus;
}

namespace {

struct FaultName {
    Fault fault;
    const char* name;
};

constexpr FaultName kFaultNames[] = {
    {Fault::None, "none"},
    {Fault::OracleOutput, "oracle-output"},
    {Fault::CellBound, "cell-bound"},
    {Fault::GridCell, "grid-cell"},
    {Fault::FinalB, "final-b"},
    {Fault::ResidualB, "residual-b"},
    {Fault::BoundsB, "bounds-b"},
    {Fault::ReduceOracle, "reduce-oracle"},
    {Fault::FinalValueName, "final-value-name"},
    {Fault::BumpTable, "bump-table"},
};

}  // namespace

const char* to_string(Fault f)
{
    for (const auto& fn : kFaultNames) {
        if (fn.fault == f) return fn.name;
    }
    return "?";
}

std::optional<Fault> parse_fault(const std::string& name)
{
    for (const auto& fn : kFaultNames) {
        if (name == fn.name) return fn.fault;
    }
    return std::nullopt;
}

const std::vector<Fault>& all_faults()
{
    static const std::vector<Fault> faults = [] {
        std::vector<Fault> v;
        for (const auto& fn : kFaultNames) {
            if (fn.fault != Fault::None) v.push_back(fn.fault);
        }
        return v;
    }();
    return faults;
}

const char* to_string(Status s)
{
    switch (s) {
    case Status::Pass: return "pass";
    case Status::Fail: return "fail";
    case Status::Error: return "error";
    }
    return "?";
}

bool VerdictReport::all_pass() const
{
    return count(Status::Pass) == verdicts.size();
}

std::size_t VerdictReport::count(Status s) const
{
    return static_cast<std::size_t>(
        std::count_if(verdicts.begin(), verdicts.end(), [s](const Verdict& v) { return v.status == s; }));
}

void VerdictReport::write_jsonl(std::ostream& out) const
{
    for (const auto& v : verdicts) {
        json line;
        line["check"] = v.check;
        line["instance"] = v.instance;
        line["status"] = to_string(v.status);
        line["detail"] = v.detail;
        line["witness"] = v.witness;
        line["stats"] = v.stats;
        out << line.dump() << '\n';
    }
}

const std::vector<std::string>& all_checks()
{
    static const std::vector<std::string> checks{"oracle",    "cellbound", "grid",   "final", "boundary",
                                                 "bounds",    "residual",  "integrate", "seam", "decay",
                                                 "reduce",    "modulus",   "finalvalue", "bump"};
    return checks;
}

Trajectory integrate_rk4(const RightHandSide& g, const Dyadic& t0, const Dyadic& h0, const Dyadic& step,
                         std::uint64_t steps, std::int64_t n)
{
    Trajectory tr;
    Dyadic t = t0;
    Dyadic y = h0;
    tr.t.push_back(t);
    tr.y.push_back(y);
    const Dyadic half = step.scaled(-1);
    const Dyadic one(1);
    auto inside = [&](const Dyadic& tt, const Dyadic& yy) {
        if (yy.abs() > one) throw ContainmentError(tt, yy);
        return yy;
    };
    for (std::uint64_t s = 0; s < steps; ++s) {
        const Dyadic k1 = g(t, inside(t, y), n + 4);
        const Dyadic y2 = (y + half * k1).round_to(n);
        const Dyadic k2 = g(t + half, inside(t + half, y2), n + 4);
        const Dyadic y3 = (y + half * k2).round_to(n);
        const Dyadic k3 = g(t + half, inside(t + half, y3), n + 4);
        const Dyadic y4 = (y + step * k3).round_to(n);
        const Dyadic k4 = g(t + step, inside(t + step, y4), n + 4);
        const Dyadic incr = k1 + (k2 + k3).scaled(1) + k4;
        // step/6: floor of a third on the 2^-(n+4) grid, then halve
        mpz_class third = (step * incr).floor_scaled(n + 4);
        mpz_fdiv_q_ui(third.get_mpz_t(), third.get_mpz_t(), 3);
        const Dyadic incr3(third, -(n + 4));
        y = (y + incr3.scaled(-1)).round_to(n);
        t = t + step;
        tr.t.push_back(t);
        tr.y.push_back(inside(t, y));
    }
    return tr;
}

OrderStudy rk4_order_study()
{
    constexpr std::int64_t n = 160;
    OrderStudy study;
    const Dyadic quarter = Dyadic::pow2(-2);
    const Dyadic half = Dyadic::pow2(-1);
    // exact endpoints: e/4 and e^-1/2
    const Dyadic exact_exp = approximate([](std::int64_t b) { return exp_point(Dyadic(1), b); }, n + 8) * quarter;
    const Dyadic exact_gauss = approximate([](std::int64_t b) { return exp_point(Dyadic(-1), b); }, n + 8) * half;
    const RightHandSide growth = [](const Dyadic&, const Dyadic& y, std::int64_t) { return y; };
    const RightHandSide gauss = [](const Dyadic& t, const Dyadic& y, std::int64_t) {
        return -(t * y).scaled(1);
    };
    for (std::uint64_t steps : {8, 16, 32}) {
        const Dyadic step(mpz_class(1), -static_cast<std::int64_t>(std::countr_zero(steps)));
        const auto a = integrate_rk4(growth, Dyadic(0), quarter, step, steps, n);
        const auto b = integrate_rk4(gauss, Dyadic(0), half, step, steps, n);
        study.errors_exp.push_back((a.y.back() - exact_exp).abs().to_double());
        study.errors_gauss.push_back((b.y.back() - exact_gauss).abs().to_double());
    }
    for (std::size_t i = 0; i + 1 < study.errors_exp.size(); ++i) {
        study.ratios.push_back(study.errors_exp[i] / study.errors_exp[i + 1]);
        study.ratios.push_back(study.errors_gauss[i] / study.errors_gauss[i + 1]);
    }
    return study;
}

namespace {

// Short text for witnesses; huge mantissas are summarized.
json brief(const Dyadic& x)
{
    if (x.is_zero() || mpz_sizeinbase(x.mantissa().get_mpz_t(), 2) <= 192) return x.str();
    json j;
    j["sign"] = x.sign();
    j["log2_floor"] = x.abs().log2_floor();
    j["mantissa_bits"] = mpz_sizeinbase(x.mantissa().get_mpz_t(), 2);
    return j;
}

Dyadic column_point(std::uint64_t T, std::int64_t q)
{
    return Dyadic(mpz_class(static_cast<unsigned long>(T)), -q);
}

// Parameters recomputed from their definitions, independently of make_params.
struct Expected {
    std::int64_t q = 0;
    std::int64_t gamma = 0;
    std::int64_t bits_B = 0;
    std::vector<std::int64_t> d;
    std::int64_t rho = 0;
    std::vector<std::int64_t> s;

    std::int64_t scale(std::size_t i) const { return bits_B * d[i]; }
    std::int64_t mu(unsigned i) const { return static_cast<std::int64_t>(i + 1) * q + s.at(i + 1); }
};

Expected expected_params(const CorpusEntry& e, const NormalizedGadget& ng, std::uint64_t len)
{
    Expected x;
    x.q = ng.q;
    x.s.assign(BumpFunction::kShippedBounds.begin(), BumpFunction::kShippedBounds.end());
    const auto L = static_cast<std::int64_t>(len);
    x.gamma = e.gamma.eval(L);
    x.bits_B = x.gamma + L + x.s[e.k] + e.k + 3;
    for (std::size_t i = 0; i <= ng.p; ++i) {
        std::int64_t v = static_cast<std::int64_t>(i);
        if (e.k >= 2) {
            v = 1;
            for (std::size_t a = 0; a < i; ++a) v *= e.k + 1;
        }
        x.d.push_back(v);
    }
    x.rho = x.d.back() * x.bits_B;
    return x;
}

struct Subject {
    const CorpusEntry* entry = nullptr;
    std::string name;
    InstanceEncoding enc;
    bool truth = false;
    NormalizedGadget clean;            // oracle side
    std::shared_ptr<const SolutionGrid> clean_grid;
    Expected expect;
    DifferenceEquation raw;            // under test, discrete layer
    std::shared_ptr<const Gadget> gadget;  // under test, continuous layer
    std::vector<std::uint64_t> busy;   // columns with a nonzero step along the clean solution
};

// Row-0 step at column `target` replaced by `value`.
DifferenceEquation with_row0_step(const DifferenceEquation& eq, std::uint64_t target, int value)
{
    DifferenceEquation out = eq;
    const StepFunction inner = eq.step;
    out.step = [inner, target, value](std::size_t i, std::uint64_t T, const mpz_class& Y) {
        if (i == 0 && T == target) return value;
        return inner(i, T, Y);
    };
    return out;
}

// Turns the first negative row-0 step into +1 (row-0 steps ignore Y).
DifferenceEquation flip_first_negative(const DifferenceEquation& eq)
{
    for (std::uint64_t T = 0; T < eq.width; ++T) {
        if (eq.step(0, T, 0) < 0) return with_row0_step(eq, T, 1);
    }
    return eq;
}

// One corrupted row-0 cell that still solves: a negative step turned to +1
// where that stays in range, else a positive step zeroed.
DifferenceEquation corrupt_one_cell(const DifferenceEquation& eq)
{
    for (const bool negatives : {true, false}) {
        for (std::uint64_t T = 0; T < eq.width; ++T) {
            const int G = eq.step(0, T, 0);
            if (G == 0 || (G < 0) != negatives) continue;
            DifferenceEquation out = with_row0_step(eq, T, negatives ? 1 : 0);
            try {
                solve(out);
                return out;
            } catch (const CellOverflow&) {
            }
        }
    }
    return eq;
}

DifferenceEquation complement_output(const DifferenceEquation& eq)
{
    DifferenceEquation out = eq;
    const StepFunction inner = eq.step;
    const std::size_t top = eq.height - 1;
    mpz_class full;
    mpz_ui_pow_ui(full.get_mpz_t(), 2, eq.cell_bits);
    full -= 1;
    out.step = [inner, top, full](std::size_t i, std::uint64_t T, const mpz_class& Y) {
        if (i != top) return inner(i, T, Y);
        return inner(i, T, full) - inner(i, T, Y);
    };
    return out;
}

Subject make_subject(const CorpusEntry& e, Fault fault)
{
    Subject s;
    s.entry = &e;
    s.name = e.file;
    s.enc = encode(e.instance);
    s.truth = truth_value(e.instance);
    const DifferenceEquation base = build_gadget(e.instance);
    s.clean = normalize(base);
    s.clean_grid = std::make_shared<const SolutionGrid>(solve(s.clean.equation));
    s.expect = expected_params(e, s.clean, s.enc.length());
    for (std::uint64_t T = 0; T < s.clean.equation.width; ++T) {
        const auto row = s.clean.active_row(T);
        if (s.clean.equation.step(row, T, mpz_class(static_cast<long>(s.clean_grid->at(row, T)))) != 0) {
            s.busy.push_back(T);
        }
    }

    s.raw = base;
    if (fault == Fault::OracleOutput) s.raw = complement_output(base);
    if (fault == Fault::CellBound) s.raw = flip_first_negative(base);

    if (fault == Fault::GridCell) {
        const NormalizedGadget ng = normalize(corrupt_one_cell(base));
        s.gadget = std::make_shared<const Gadget>(ng, make_params(ng, s.enc.length(), e.k, e.gamma));
    } else {
        Gadget g(e.instance, e.k, e.gamma);
        GadgetParams prm = g.params();
        if (fault == Fault::FinalB) {
            prm.bits_B += 1;
            prm.rho_value = prm.sigma_value * prm.bits_B;
            g = Gadget(g.normalized(), prm);
        } else if (fault == Fault::ResidualB) {
            prm.bits_B += 1;
            g = g.with_g_params(prm);
        } else if (fault == Fault::BoundsB) {
            prm.bits_B = static_cast<std::int64_t>(prm.r) + 1;
            g = g.with_g_params(prm);
        }
        s.gadget = std::make_shared<const Gadget>(std::move(g));
    }
    return s;
}

struct Context {
    const Corpus* corpus = nullptr;
    const SuiteOptions* options = nullptr;
    std::vector<Subject> subjects;
    GluedSystem glued;
};

Verdict pass_verdict(json stats = json::object())
{
    Verdict v;
    v.status = Status::Pass;
    v.stats = std::move(stats);
    return v;
}

Verdict fail_verdict(std::string detail, json witness, json stats = json::object())
{
    Verdict v;
    v.status = Status::Fail;
    v.detail = std::move(detail);
    v.witness = std::move(witness);
    v.stats = std::move(stats);
    return v;
}

// Interior offsets theta in (0,1) from the bit-reversal sequence.
Dyadic theta_at(std::uint64_t index)
{
    Dyadic th = van_der_corput(index, 16);
    return th.is_zero() ? Dyadic::pow2(-1) : th;
}

// Sample columns: every other one from the busy list, the rest spread over the grid.
std::vector<std::uint64_t> sample_columns(const Subject& s, unsigned count, std::uint64_t seed)
{
    std::vector<std::uint64_t> cols;
    const std::uint64_t W = s.clean.equation.width;
    for (unsigned k = 0; k < count; ++k) {
        if (k % 2 == 0 && !s.busy.empty()) {
            cols.push_back(s.busy[(seed + k / 2 * 7919) % s.busy.size()]);
        } else {
            const Dyadic u = van_der_corput(seed + k + 1, 32);
            cols.push_back(u.floor_scaled(static_cast<std::int64_t>(s.clean.q)).get_ui() % W);
        }
    }
    return cols;
}

Verdict check_oracle(const Subject& s)
{
    const std::int64_t got = recognize(normalize(s.raw).equation);
    const std::int64_t want = s.truth ? 1 : 0;
    if (got != want) return fail_verdict("recognized value differs from the truth table",
                                         {{"recognized", got}, {"expected", want}});
    return pass_verdict({{"recognized", got}});
}

Verdict check_cellbound(const Subject& s)
{
    SolutionGrid grid(0, 0);
    try {
        grid = solve(s.raw);
    } catch (const CellOverflow& e) {
        return fail_verdict(e.what(), {{"row", e.row()}, {"column", e.column()}});
    }
    if (auto row = cell_bound_violation(s.entry->instance, grid)) {
        const std::int64_t bound =
            *row <= s.entry->instance.n() ? (std::int64_t{1} << s.entry->instance.block_size(*row)) : 1;
        return fail_verdict("row exceeds its cell bound",
                            {{"row", *row}, {"max", grid.row_max(*row)}, {"bound", bound}});
    }
    return pass_verdict({{"rows", grid.height()}});
}

Verdict check_grid(const Subject& s)
{
    const Gadget& g = *s.gadget;
    const auto& H = *s.clean_grid;
    const std::uint64_t W = s.clean.equation.width;
    const std::int64_t q = s.expect.q;
    for (std::uint64_t T = 0; T <= W; ++T) {
        Dyadic expected;
        for (std::size_t i = 0; i < s.expect.d.size(); ++i) {
            const std::int64_t v = H.at(i, T);
            if (v != 0) expected += Dyadic(mpz_class(static_cast<long>(v)), -s.expect.scale(i));
        }
        const DyadicInterval got = g.enclose_h(column_point(T, q), 8);
        if (!got.is_point() || got.lo() != expected) {
            return fail_verdict("h_u at a grid point differs from the grid sum",
                                {{"t", column_point(T, q).str()}, {"T", T}, {"got", brief(got.lo())},
                                 {"expected", brief(expected)}, {"difference", brief(got.lo() - expected)}},
                                {{"points", T + 1}});
        }
    }
    return pass_verdict({{"points", W + 1}});
}

Verdict check_final(const Subject& s, const Context& ctx)
{
    const Dyadic want = s.truth ? Dyadic::pow2(-s.expect.rho) : Dyadic(0);
    const DyadicInterval got = s.gadget->enclose_h(Dyadic(1), 8);
    if (!got.is_point() || got.lo() != want) {
        return fail_verdict("h_u(1) differs from 2^-rho L(u)",
                            {{"t", "1"}, {"got", brief(got.lo())}, {"expected", brief(want)},
                             {"rho", s.expect.rho}});
    }
    const GlueLayout layout = glue_layout(s.enc);
    const DyadicInterval glued = ctx.glued.enclose_h(layout.c, 8);
    const Dyadic want_glued = want.scaled(-layout.lambda);
    if (!glued.is_point() || glued.lo() != want_glued) {
        return fail_verdict("glued h(c_u) differs from h_u(1) / Lambda_u",
                            {{"t", layout.c.str()}, {"got", brief(glued.lo())}, {"expected", brief(want_glued)}});
    }
    return pass_verdict({{"rho", s.expect.rho}, {"lambda", layout.lambda}});
}

const std::vector<Dyadic>& boundary_ys()
{
    static const std::vector<Dyadic> ys{Dyadic(-1), Dyadic(-1, -1), Dyadic(-3, -4), Dyadic(0),
                                        Dyadic(5, -6), Dyadic(341, -10), Dyadic(1)};
    return ys;
}

Verdict check_boundary(const Subject& s)
{
    std::uint64_t points = 0;
    for (unsigned i = 0; i <= 4; ++i) {
        for (const Dyadic& t : {Dyadic(0), Dyadic(1)}) {
            for (const Dyadic& y : boundary_ys()) {
                ++points;
                const DyadicInterval d = s.gadget->enclose_deriv(i, 0, t, y, 64);
                if (!d.is_point() || !d.lo().is_zero()) {
                    return fail_verdict("t-derivative does not vanish at the boundary",
                                        {{"i", i}, {"t", t.str()}, {"y", y.str()}, {"value", brief(d.midpoint())}});
                }
            }
        }
    }
    return pass_verdict({{"points", points}});
}

// Sample (t, y) pairs: t inside chosen columns, y near the row value with eta
// in the dead zone, at the seam side and in the blend.
struct SamplePoint {
    Dyadic t;
    Dyadic y;
    std::size_t row;
};

std::vector<SamplePoint> sample_points(const Subject& s, unsigned count, std::uint64_t seed)
{
    static const std::vector<Dyadic> etas{Dyadic(0), Dyadic(5, -4), Dyadic(1, -1), Dyadic(11, -4)};
    std::vector<SamplePoint> pts;
    const auto cols = sample_columns(s, count, seed);
    for (std::size_t k = 0; k < cols.size(); ++k) {
        const std::uint64_t T = cols[k];
        const std::size_t row = s.clean.active_row(T);
        const Dyadic t = (Dyadic(mpz_class(static_cast<unsigned long>(T))) + theta_at(seed + k + 1)).scaled(-s.expect.q);
        const std::int64_t H = s.clean_grid->at(row, T);
        for (std::int64_t dY : {-1, 0, 1}) {
            if (H + dY < 0) continue;
            for (const Dyadic& eta : etas) {
                const Dyadic y = (Dyadic(H + dY) + eta).scaled(-s.expect.scale(row));
                pts.push_back({t, y, row});
            }
        }
    }
    return pts;
}

Verdict check_bounds(const Subject& s, unsigned bound_points)
{
    const unsigned k = s.entry->k;
    std::uint64_t evaluations = 0;
    for (const auto& pt : sample_points(s, bound_points, 17)) {
        for (unsigned i = 0; i <= 3; ++i) {
            // enclosure error 64 bits below the bound under test
            const std::int64_t n = 64 + s.expect.gamma - s.expect.mu(i);
            for (unsigned j = 0; j <= k; ++j) {
                ++evaluations;
                const DyadicInterval d = s.gadget->enclose_deriv(i, j, pt.t, pt.y, n);
                const Dyadic limit = Dyadic::pow2(s.expect.mu(i) - s.expect.gamma) + Dyadic::pow2(1 - n);
                if (d.magnitude() > limit) {
                    return fail_verdict("derivative exceeds 2^{mu(i,|u|) - gamma(|u|)}",
                                        {{"i", i}, {"j", j}, {"t", pt.t.str()}, {"y", pt.y.str()},
                                         {"value_log2", d.magnitude().log2_floor()},
                                         {"bound_log2", s.expect.mu(i) - s.expect.gamma}},
                                        {{"evaluations", evaluations}});
                }
            }
        }
    }
    return pass_verdict({{"evaluations", evaluations}});
}

Verdict check_residual(const Subject& s, unsigned points, std::uint64_t seed)
{
    const Gadget& g = *s.gadget;
    const std::int64_t q = s.expect.q;
    const std::int64_t dexp = q + 4;  // delta = 2^-(q+4)
    const Dyadic delta = Dyadic::pow2(-dexp);
    const Dyadic last = Dyadic(1) - delta;
    const auto cols = sample_columns(s, points, seed);
    for (unsigned k = 0; k < points; ++k) {
        Dyadic t = (Dyadic(mpz_class(static_cast<unsigned long>(cols[k]))) + theta_at(seed + 3 * k + 1)).scaled(-q);
        if (t > last) t = last;
        const std::uint64_t T0 = t.floor_scaled(q).get_ui();
        const std::uint64_t T1 = std::min<std::uint64_t>((t + delta).floor_scaled(q).get_ui(),
                                                         s.clean.equation.width - 1);
        const std::int64_t sc = std::min(s.expect.scale(s.clean.active_row(T0) + 1),
                                         s.expect.scale(s.clean.active_row(T1) + 1));
        const std::int64_t n = 64 + sc - q;  // 64 bits relative to the size of g
        const Dyadic h0 = g.h(t, n + dexp + 6);
        const Dyadic h1 = g.h(t + delta, n + dexp + 6);
        if (h0.abs() > Dyadic(1)) {
            return fail_verdict("trajectory leaves [-1,1]", {{"t", t.str()}, {"h", brief(h0)}});
        }
        const Dyadic slope = (h1 - h0).scaled(dexp);
        const Dyadic gv = g.g(t, h0, n + 2);
        const Dyadic lhs = (slope - gv).abs();
        // 1/2 delta M2 + 4 2^-n with M2 = 2^{2q + s(2)} / B^{d(j+1)}
        const Dyadic tol = Dyadic::pow2(-dexp - 1 + 2 * q + s.expect.s[2] - sc) + Dyadic::pow2(2 - n);
        if (lhs > tol) {
            return fail_verdict("difference quotient of h_u differs from g_u(t, h_u(t))",
                                {{"t", t.str()}, {"delta", delta.str()}, {"residual", brief(lhs)},
                                 {"tolerance", brief(tol)}, {"slope", brief(slope)}, {"g", brief(gv)}},
                                {{"points", k + 1}});
        }
    }
    return pass_verdict({{"points", points}});
}

Verdict check_integrate(const Subject& s, unsigned cells, unsigned steps)
{
    const Gadget& g = *s.gadget;
    const std::int64_t q = s.expect.q;
    std::vector<std::uint64_t> chosen;
    if (s.busy.empty()) {
        for (std::uint64_t T = 0; T < cells && T < s.clean.equation.width; ++T) chosen.push_back(T);
    } else {
        for (unsigned c = 0; c < cells; ++c) chosen.push_back(s.busy[(c * s.busy.size()) / cells]);
    }
    const std::int64_t step_log = std::countr_zero(static_cast<std::uint64_t>(steps));
    const Dyadic step = Dyadic::pow2(-q - step_log);
    const RightHandSide rhs = [&g](const Dyadic& t, const Dyadic& y, std::int64_t n) { return g.g(t, y, n); };
    for (const std::uint64_t T : chosen) {
        const std::int64_t sc = s.expect.scale(s.clean.active_row(T) + 1);
        const std::int64_t n = 64 + sc;
        const Dyadic t0 = column_point(T, q);
        const Dyadic h0 = g.h(t0, n).round_to(n);
        Trajectory tr;
        try {
            tr = integrate_rk4(rhs, t0, h0, step, steps, n);
        } catch (const ContainmentError& e) {
            return fail_verdict(e.what(), {{"t", e.t().str()}, {"y", brief(e.y())}});
        }
        const Dyadic want = g.h(column_point(T + 1, q), n + 8);
        // steps * step^5 / 2880 * 2^{5q + s(5)} / B^{d(j+1)}, with 1/2880 < 2^-11, plus rounding
        const std::int64_t env_log = 5 * (-q - step_log) - 11 + 5 * q + s.expect.s[5] - sc + step_log;
        const Dyadic tol = Dyadic::pow2(env_log) + Dyadic(static_cast<long>(2 * steps + 4)) * Dyadic::pow2(-n);
        const Dyadic err = (tr.y.back() - want).abs();
        if (err > tol) {
            return fail_verdict("RK4 endpoint differs from h_u beyond the fourth-order envelope",
                                {{"cell", T}, {"t0", t0.str()}, {"error", brief(err)}, {"tolerance", brief(tol)}});
        }
    }
    return pass_verdict({{"cells", chosen.size()}, {"steps", steps}});
}

Verdict check_seam(const Subject& s, const Context& ctx)
{
    const Gadget& g = *s.gadget;
    const std::int64_t eps = 40;
    const Dyadic e = Dyadic::pow2(-eps);
    std::uint64_t pairs = 0;
    const auto cols = sample_columns(s, 8, 29);
    for (std::size_t k = 0; k < cols.size(); ++k) {
        const std::uint64_t T = cols[k];
        const std::size_t row = s.clean.active_row(T);
        const std::int64_t ys = s.expect.scale(row);
        const std::int64_t n = 64 + s.expect.scale(row + 1) - s.expect.q;
        const Dyadic t = (Dyadic(mpz_class(static_cast<unsigned long>(T))) + theta_at(k + 5)).scaled(-s.expect.q);
        const Dyadic Y(s.clean_grid->at(row, T));
        // |D_2 g_u| <= 2^{mu(0) - gamma}; the points are 2 eps B^{-d} apart
        const Dyadic tol = Dyadic::pow2(s.expect.mu(0) - s.expect.gamma + 1 - eps - ys) + Dyadic::pow2(2 - n);
        for (const Dyadic& z : {Dyadic(1, -2), Dyadic(3, -2)}) {
            ++pairs;
            const Dyadic a = g.g(t, (Y + z - e).scaled(-ys), n);
            const Dyadic b = g.g(t, (Y + z + e).scaled(-ys), n);
            if ((a - b).abs() > tol) {
                return fail_verdict("g_u jumps across an eta seam",
                                    {{"t", t.str()}, {"y_below", (Y + z - e).scaled(-ys).str()},
                                     {"below", brief(a)}, {"above", brief(b)}, {"tolerance", brief(tol)}});
            }
        }
    }
    // Taylor extension seams of the glued g at y Lambda = +-1
    const GlueLayout layout = glue_layout(s.enc);
    const std::int64_t lam = layout.lambda;
    const std::int64_t n = 64 + s.expect.scale(s.expect.d.size() - 1);
    const Dyadic tol = Dyadic::pow2(s.expect.mu(0) - s.expect.gamma + 1 - eps) + Dyadic::pow2(2 - n);
    for (unsigned k = 0; k < 4; ++k) {
        const Dyadic t = layout.lo + van_der_corput(k + 1, 20).scaled(1 - lam);
        for (const long side : {1L, -1L}) {
            ++pairs;
            const Dyadic edge = Dyadic(side, -lam);
            const Dyadic off = Dyadic::pow2(-lam - eps);
            const Dyadic a = ctx.glued.g(t, edge - off, n);
            const Dyadic b = ctx.glued.g(t, edge + off, n);
            if ((a - b).abs() > tol) {
                return fail_verdict("glued g jumps at the edge of the strip",
                                    {{"t", t.str()}, {"y", edge.str()}, {"inside", brief(a)}, {"outside", brief(b)}});
            }
        }
    }
    return pass_verdict({{"pairs", pairs}});
}

Verdict check_decay(const Subject& s, const Context& ctx)
{
    const GlueLayout layout = glue_layout(s.enc);
    const std::int64_t len = static_cast<std::int64_t>(layout.length);
    const Dyadic limit = Dyadic::pow2(-2 * len);
    const std::int64_t n = 2 * len + 4;
    std::uint64_t evaluations = 0;
    std::vector<Dyadic> ys{Dyadic(-1), Dyadic(-1, -1), Dyadic(0), Dyadic(1, -1), Dyadic(1)};
    ys.push_back(Dyadic(1, -layout.lambda - 1));
    for (unsigned k = 0; k < 8; ++k) {
        const Dyadic s_pt = layout.lo + van_der_corput(k + 1, 20).scaled(1 - layout.lambda);
        for (unsigned i = 1; i <= 4; ++i) {
            for (unsigned j = 0; j <= s.entry->k; ++j) {
                for (const Dyadic& y : ys) {
                    ++evaluations;
                    const DyadicInterval d = ctx.glued.enclose_deriv(i - 1, j, s_pt, y, n);
                    if (d.magnitude() > limit) {
                        return fail_verdict("glued derivative above 2^-2|u|",
                                            {{"i", i}, {"j", j}, {"s", s_pt.str()}, {"y", y.str()},
                                             {"value_log2", d.magnitude().log2_floor()}});
                    }
                }
            }
        }
    }
    return pass_verdict({{"evaluations", evaluations}});
}

Verdict check_reduce(const Subject& s, const NamedFunction& oracle)
{
    ReductionTrace trace;
    try {
        const bool got = reduce(s.entry->instance, s.entry->k, oracle, &trace, s.entry->gamma);
        if (got != s.truth) {
            return fail_verdict("reduction disagrees with the formula oracle",
                                {{"point", trace.point.str()}, {"precision", trace.precision},
                                 {"answer", brief(trace.answer)}, {"expected", s.truth}});
        }
    } catch (const ContractViolation& e) {
        return fail_verdict(e.what(), {{"precision", e.precision()}, {"answer", brief(e.answer())}});
    }
    return pass_verdict({{"precision", trace.precision}});
}

Verdict check_modulus(const Subject& s)
{
    const Gadget& g = *s.gadget;
    // y on the row-0 level of the first busy column keeps g nonzero somewhere
    const Dyadic y0 = Dyadic(1, -3).scaled(-s.expect.scale(1));
    NamedFunction f = [&g, y0](const Dyadic& x) {
        return name_from_enclosures([&g, x, y0](std::int64_t n) { return g.enclose_g(x, y0, n); });
    };
    // |g(x) - g(x')| <= 2^{mu(1) - gamma} |x - x'|
    const std::int64_t lip = std::max<std::int64_t>(0, s.expect.mu(1) - s.expect.gamma);
    const ModulusVerdict mv = check_modulus(f, Polynomial{static_cast<std::uint64_t>(lip), 1});
    if (!mv.pass) {
        const auto& w = *mv.witness;
        return fail_verdict("modulus of continuity violated",
                            {{"x", w.x.str()}, {"y", w.y.str()}, {"n", w.n}, {"fx", brief(w.fx)}, {"fy", brief(w.fy)}},
                            {{"pairs", mv.pairs_checked}});
    }
    return pass_verdict({{"pairs", mv.pairs_checked}});
}

struct Tally {
    const char* name;
    TallyLanguage lang;
};

std::vector<Tally> test_tallies()
{
    return {
        {"all", [](std::uint64_t) { return true; }},
        {"odd", [](std::uint64_t n) { return n % 2 == 1; }},
        {"primes", [](std::uint64_t n) { return n == 2 || n == 3 || n == 5 || n == 7 || n == 11 || n == 13; }},
        {"powers-of-two", [](std::uint64_t n) { return n != 0 && (n & (n - 1)) == 0; }},
    };
}

std::vector<Verdict> check_finalvalue(Fault fault)
{
    std::vector<Verdict> out;
    for (const auto& tally : test_tallies()) {
        Verdict v;
        const FinalValueParams params(trivial_tally_reduction(tally.lang), 1);
        RealName name = final_value_name(tally.lang, params);
        if (fault == Fault::FinalValueName) {
            const Dyadic bump = Dyadic::pow2(-params.exponent(3));
            name = RealName([name, bump](std::int64_t m) {
                return (name(m + 2) + Dyadic::pow2(-(m + 2)) + bump).floor_to(m);
            });
        }
        v = pass_verdict({{"bits", params.horizon()}});
        for (std::uint64_t n = 0; n < params.horizon(); ++n) {
            const bool got = decode_tally(name, n, params);
            if (got != tally.lang(n)) {
                v = fail_verdict("decoded tally bit differs",
                                 {{"n", n}, {"exponent", params.exponent(n)}, {"decoded", got},
                                  {"expected", tally.lang(n)}});
                break;
            }
        }
        v.check = "finalvalue";
        v.instance = std::string("tally:") + tally.name;
        out.push_back(std::move(v));
    }
    return out;
}

Verdict check_bump(Fault fault)
{
    const auto& bump = BumpFunction::instance();
    std::vector<std::int64_t> table(BumpFunction::kShippedBounds.begin(), BumpFunction::kShippedBounds.end());
    if (fault == Fault::BumpTable) table[3] -= 3;

    if (bump.f(Dyadic(0), 64) != Dyadic(0) || bump.f(Dyadic(1), 64) != Dyadic(1)) {
        return fail_verdict("endpoint values", {{"f0", bump.f(Dyadic(0), 64).str()}, {"f1", bump.f(Dyadic(1), 64).str()}});
    }
    constexpr std::int64_t n = 64;
    for (std::uint64_t k = 1; k <= 64; ++k) {
        const Dyadic t = van_der_corput(k, 24);
        const Dyadic sum = bump.f(t, n) + bump.f(Dyadic(1) - t, n) - Dyadic(1);
        if (sum.abs() > Dyadic::pow2(1 - n)) {
            return fail_verdict("symmetry f(t) + f(1-t) = 1 violated", {{"t", t.str()}, {"excess", sum.str()}});
        }
    }
    std::uint64_t samples = 0;
    for (unsigned m = 1; m <= 4; ++m) {
        const Dyadic limit = Dyadic::pow2(table[m]);
        for (std::uint64_t i = 0; i <= 4096; ++i) {
            ++samples;
            const Dyadic t(mpz_class(static_cast<unsigned long>(i)), -12);
            const Dyadic v = bump.eval(m, t, 24).abs();
            if (v > limit) {
                return fail_verdict("sampled |D^m f| above the bound table",
                                    {{"m", m}, {"t", t.str()}, {"value", v.str()}, {"s", table[m]}});
            }
        }
        // D^m f against a central difference of D^{m-1} f, h = 2^-12
        const std::int64_t hl = 12;
        const Dyadic h = Dyadic::pow2(-hl);
        for (std::uint64_t k = 1; k <= 16; ++k) {
            Dyadic t = van_der_corput(k, 10);
            if (t < h) t = h;
            if (t > Dyadic(1) - h) t = Dyadic(1) - h;
            const Dyadic fd = (bump.eval(m - 1, t + h, 48) - bump.eval(m - 1, t - h, 48)).scaled(hl - 1);
            const Dyadic exact = bump.eval(m, t, 48);
            const std::int64_t s2 = m + 2 < table.size() ? table[m + 2] : BumpFunction::s_extension(m + 2);
            const Dyadic env = Dyadic::pow2(s2 - 2 * hl - 2) + Dyadic::pow2(-48 + hl + 1);
            if ((fd - exact).abs() > env) {
                return fail_verdict("finite difference disagrees with D^m f",
                                    {{"m", m}, {"t", t.str()}, {"fd", fd.str()}, {"exact", exact.str()}});
            }
        }
    }
    for (unsigned m = 1; m <= 3; ++m) {
        const BoundCertificate cert = bump.certify_bound(m);
        if (cert.s > table[m]) {
            return fail_verdict("certified exponent above the table", {{"m", m}, {"certified", cert.s}, {"table", table[m]}});
        }
    }
    return pass_verdict({{"samples", samples}});
}

Verdict check_order()
{
    const OrderStudy study = rk4_order_study();
    json ratios = json::array();
    for (double r : study.ratios) ratios.push_back(std::round(r * 100) / 100);
    for (double r : study.ratios) {
        if (!(r >= 8.0 && r <= 32.0)) return fail_verdict("RK4 order ratio outside [8, 32]", {{"ratios", ratios}});
    }
    return pass_verdict({{"ratios", ratios}});
}

}  // namespace

VerdictReport run_suite(const Corpus& corpus, const SuiteOptions& options)
{
    VerdictReport report;
    std::vector<std::string> checks = options.checks.empty() ? all_checks() : options.checks;
    for (const auto& c : checks) {
        if (std::find(all_checks().begin(), all_checks().end(), c) == all_checks().end()) {
            throw std::invalid_argument("unknown check: " + c);
        }
    }
    if (corpus.entries.empty()) return report;
    auto wants = [&checks](const char* name) { return std::find(checks.begin(), checks.end(), name) != checks.end(); };

    Context ctx;
    ctx.corpus = &corpus;
    ctx.options = &options;
    for (const auto& e : corpus.entries) ctx.subjects.push_back(make_subject(e, options.fault));
    for (const auto& s : ctx.subjects) ctx.glued.add(s.entry->instance, s.gadget);

    NamedFunction oracle = ctx.glued.h_oracle();
    if (options.fault == Fault::ReduceOracle) {
        // answers half a unit off the 2^-n grid
        oracle = [inner = oracle](const Dyadic& x) {
            RealName base = inner(x);
            return RealName([base](std::int64_t n) { return base(n) + Dyadic::pow2(-(n + 1)); });
        };
    }

    struct Job {
        std::string check;
        std::size_t subject;
    };
    std::vector<Job> jobs;
    for (const auto& c : checks) {
        if (c == "finalvalue" || c == "bump") continue;
        for (std::size_t i = 0; i < ctx.subjects.size(); ++i) jobs.push_back({c, i});
    }

    std::vector<Verdict> verdicts(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t idx = next++; idx < jobs.size(); idx = next++) {
            const Job& job = jobs[idx];
            const Subject& s = ctx.subjects[job.subject];
            Verdict v;
            try {
                if (job.check == "oracle") v = check_oracle(s);
                else if (job.check == "cellbound") v = check_cellbound(s);
                else if (job.check == "grid") v = check_grid(s);
                else if (job.check == "final") v = check_final(s, ctx);
                else if (job.check == "boundary") v = check_boundary(s);
                else if (job.check == "bounds") v = check_bounds(s, options.bound_points);
                else if (job.check == "residual") v = check_residual(s, options.residual_points, corpus.seed);
                else if (job.check == "integrate") v = check_integrate(s, options.rk_cells, options.rk_steps);
                else if (job.check == "seam") v = check_seam(s, ctx);
                else if (job.check == "decay") v = check_decay(s, ctx);
                else if (job.check == "reduce") v = check_reduce(s, oracle);
                else if (job.check == "modulus") v = check_modulus(s);
            } catch (const std::exception& e) {
                v = Verdict{};
                v.status = Status::Error;
                v.detail = e.what();
                v.stats = json::object();
            }
            v.check = job.check;
            v.instance = s.name;
            verdicts[idx] = std::move(v);
        }
    };
    unsigned threads = options.threads ? options.threads : std::max(1U, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(1, jobs.size())));
    std::vector<std::thread> pool;
    for (unsigned i = 1; i < threads; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    if (wants("integrate")) {
        Verdict v = check_order();
        v.check = "integrate";
        v.instance = "(rk4-order)";
        verdicts.push_back(std::move(v));
    }
    auto guarded = [&](const char* check, const char* instance, auto&& fn) {
        try {
            fn();
        } catch (const std::exception& e) {
            Verdict v;
            v.check = check;
            v.instance = instance;
            v.status = Status::Error;
            v.detail = e.what();
            v.stats = json::object();
            verdicts.push_back(std::move(v));
        }
    };
    if (wants("finalvalue")) {
        guarded("finalvalue", "(tally)", [&] {
            for (auto& v : check_finalvalue(options.fault)) verdicts.push_back(std::move(v));
        });
    }
    if (wants("bump")) {
        guarded("bump", "(f)", [&] {
            Verdict v = check_bump(options.fault);
            v.check = "bump";
            v.instance = "(f)";
            verdicts.push_back(std::move(v));
        });
    }

    std::stable_sort(verdicts.begin(), verdicts.end(), [](const Verdict& a, const Verdict& b) {
        return std::tie(a.check, a.instance) < std::tie(b.check, b.instance);
    });
    report.verdicts = std::move(verdicts);
    return report;
}

}  // namespace odegadget
