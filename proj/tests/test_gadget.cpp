#include "doctest.h"

#include <random>

#include "formula_oracle.hpp"
#include "odegadget/final_value.hpp"
#include "odegadget/glue.hpp"

using namespace odegadget;

namespace {

const char* kA = "blocks 1\nblock 1 vars a threshold 1\nformula a\n";
const char* kContra = "blocks 1\nblock 1 vars a threshold 1\nformula a & !a\n";
const char* kTwo = "blocks 2\nblock 1 vars a b threshold 2\nblock 2 vars c threshold 1\nformula (a | b) & c\n";

std::int64_t ipow(std::int64_t b, std::size_t e)
{
    std::int64_t r = 1;
    while (e--) r *= b;
    return r;
}

// Interior point of column T at offset num / 2^den.
Dyadic in_cell(const Gadget& g, std::uint64_t T, long num, std::int64_t den)
{
    return (Dyadic(mpz_class(static_cast<unsigned long>(T))) + Dyadic(mpz_class(num), -den)).scaled(-g.params().q);
}

// First column whose active row has a nonzero step along the solution.
std::uint64_t busy_column(const Gadget& g, std::uint64_t from = 0)
{
    const auto& H = g.grid();
    for (std::uint64_t T = from; T < g.normalized().equation.width; ++T) {
        const auto row = g.normalized().active_row(T);
        if (g.step(row, T, mpz_class(static_cast<long>(H.at(row, T)))) != 0) return T;
    }
    FAIL("no busy column");
    return 0;
}

}  // namespace

TEST_CASE("parameters")
{
    const auto inst = parse_instance(kTwo);
    const auto ng = normalize(build_gadget(inst));
    const std::uint64_t len = encode(inst).length();

    const auto p1 = make_params(ng, len, 1, glue_gamma());
    CHECK(p1.sigma_value == static_cast<std::int64_t>(ng.p));
    for (std::size_t i = 0; i <= p1.p; ++i) CHECK(p1.d[i] == static_cast<std::int64_t>(i));

    for (unsigned k = 2; k <= 3; ++k) {
        const auto pk = make_params(ng, len, k, glue_gamma());
        for (std::size_t i = 0; i < pk.p; ++i) CHECK(pk.d[i] == ipow(k + 1, i));
        CHECK(pk.sigma_value >= ipow(k + 1, pk.p));
        CHECK(pk.d[pk.p] == pk.sigma_value);
    }

    // B and rho recomputed from their defining formulas
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        const auto u = testing_oracles::random_instance(rng, 3, 8);
        const auto nu = normalize(build_gadget(u));
        const auto lu = static_cast<std::int64_t>(encode(u).length());
        for (unsigned k = 1; k <= 3; ++k) {
            const auto prm = make_params(nu, lu, k, glue_gamma());
            const std::int64_t gamma = 4 * (lu + 1) * (lu + 1);
            const std::int64_t sk = BumpFunction::kShippedBounds[k];
            CHECK(prm.bits_B == gamma + lu + sk + k + 3);
            CHECK(prm.rho_value == prm.sigma_value * prm.bits_B);
            CHECK(prm.rho.eval(lu) == prm.rho_value);
            // gamma dominates mu(x, x) + x lambda(x) for both scalings
            CHECK(prm.gamma_value >= prm.mu(lu) + lu * (2 * lu + 2));
            CHECK(final_value_gamma().eval(lu) >= prm.mu(lu) + lu * (lu + 1));
            CHECK(prm.q <= lu);
        }
    }

    const auto toy = make_params(ng, len, 1, glue_gamma(), ParamMode::Toy);
    CHECK(toy.gamma_value == 0);
    CHECK(toy.bits_B == static_cast<std::int64_t>(len) + 1 + 1 + 3);
    CHECK_THROWS_AS(make_params(ng, len, 0, glue_gamma()), ParameterError);
}

TEST_CASE("grid identity and final value")
{
    std::mt19937_64 rng(12);
    std::vector<CountingInstance> insts{parse_instance(kA), parse_instance(kContra), parse_instance(kTwo)};
    for (int i = 0; i < 6; ++i) insts.push_back(testing_oracles::random_instance(rng, 2, 5));
    for (const auto& inst : insts) {
        const Gadget g(inst, 1, glue_gamma());
        const auto& prm = g.params();
        const auto H = solve(normalize(build_gadget(inst)).equation);
        const std::uint64_t W = g.normalized().equation.width;
        CHECK(g.h(Dyadic(0), 64) == Dyadic(0));
        for (std::uint64_t T = 0; T <= W; ++T) {
            Dyadic expected;
            for (std::size_t i = 0; i <= prm.p; ++i) {
                expected += Dyadic(mpz_class(static_cast<long>(H.at(i, T))), -prm.bits_B * prm.d[i]);
            }
            const auto e = g.enclose_h(Dyadic(mpz_class(static_cast<unsigned long>(T)), -prm.q), 8);
            CHECK(e.is_point());
            CHECK(e.lo() == expected);
        }
        const Dyadic L(testing_oracles::truth_table_value(inst) ? 1 : 0);
        CHECK(g.h(Dyadic(1), 8) == L * Dyadic::pow2(-prm.rho_value));
    }
}

TEST_CASE("g tilde")
{
    const Gadget g(parse_instance(kTwo), 2, glue_gamma());
    const auto& prm = g.params();
    const std::uint64_t T = busy_column(g);
    const auto row = g.normalized().active_row(T);
    const mpz_class Y = g.grid().at(row, T);
    const int G = g.step(row, T, Y);

    // on the grid Df(0) = 0
    CHECK(g.enclose_g_tilde(Y, Dyadic(mpz_class(static_cast<unsigned long>(T)), -prm.q), 8).lo() == Dyadic(0));
    // a column where the step is silent
    std::uint64_t quiet = 0;
    while (g.step(g.normalized().active_row(quiet), quiet, 0) != 0) ++quiet;
    CHECK(g.enclose_g_tilde(0, in_cell(g, quiet, 3, 3), 8).is_point());
    const Dyadic t = in_cell(g, T, 3, 3);

    // recomposition from df_eval and the integer factors
    const std::int64_t E = prm.q - prm.bits_B * prm.d[row + 1];
    const std::int64_t n = 64 - E;
    const Dyadic theta(mpz_class(3), -3);
    const Dyadic expect = BumpFunction::instance().eval(1, theta, n + E + 2).scaled(E) * Dyadic(G);
    CHECK((g.g_tilde(Y, t, n) - expect).abs() <= Dyadic::pow2(1 - n));
}

TEST_CASE("g_u and its derivatives")
{
    const Gadget g(parse_instance(kTwo), 3, glue_gamma());
    const auto& prm = g.params();
    const std::uint64_t T = busy_column(g);
    const auto row = g.normalized().active_row(T);
    const mpz_class H = g.grid().at(row, T);
    const std::int64_t yscale = prm.bits_B * prm.d[row];
    const std::int64_t n = 64 + prm.bits_B * prm.d[row + 1] - prm.q;

    for (long yv : {-3L, 0L, 5L}) {
        CHECK(g.g(Dyadic(0), Dyadic(yv, -4), 32) == Dyadic(0));
        CHECK(g.g(Dyadic(1), Dyadic(yv, -4), 32) == Dyadic(0));
    }

    // dead zone: y on the row value gives g = g_tilde_Y and zero y-derivatives
    const Dyadic y0 = Dyadic(H, -yscale);
    const Dyadic t = in_cell(g, T, 5, 4);
    CHECK((g.g(t, y0, n) - g.g_tilde(H, t, n)).abs() <= Dyadic::pow2(1 - n));
    for (unsigned j = 1; j <= 3; ++j) CHECK(g.enclose_deriv(2, j, t, y0, n).lo() == Dyadic(0));
    // D^{(1,0)} vanishes on the grid
    CHECK(g.enclose_deriv(1, 0, Dyadic(mpz_class(static_cast<unsigned long>(T)), -prm.q), y0, n).lo() == Dyadic(0));

    // seam at eta = 1/4, approached from both sides
    const std::int64_t eps = 40;
    const Dyadic quarter = Dyadic::pow2(-2);
    const Dyadic below = Dyadic(H) + quarter - Dyadic::pow2(-eps);
    const Dyadic above = Dyadic(H) + quarter + Dyadic::pow2(-eps);
    const Dyadic gb = g.g(t, below.scaled(-yscale), n);
    const Dyadic ga = g.g(t, above.scaled(-yscale), n);
    // |D_2 g| <= 2^{mu(0) - gamma} and the two points are 2^{1-eps} B^{-d} apart
    const Dyadic lip = Dyadic::pow2(prm.mu(0) - prm.gamma_value + 1 - eps - yscale);
    CHECK((ga - gb).abs() <= lip + Dyadic::pow2(1 - n));

    // finite difference in t, h = 2^-14 relative to the cell
    const Dyadic yb = (Dyadic(H) + Dyadic::pow2(-1)).scaled(-yscale);  // eta = 1/2, blended
    const std::int64_t hb = 14;
    const Dyadic step = Dyadic::pow2(-hb - prm.q);
    const Dyadic fd = (g.g(t + step, yb, n + 40) - g.g(t - step, yb, n + 40)).scaled(hb + prm.q - 1);
    const Dyadic d1 = g.deriv(1, 0, t, yb, n);
    // h^2/6 max|D^3_t g| plus rounding of the difference quotient
    const std::int64_t d3 = 4 * prm.q + prm.s[4] + 1 - prm.bits_B * prm.d[row + 1];
    const Dyadic env = Dyadic::pow2(d3 - 2 * (hb + prm.q) - 2) + Dyadic::pow2(1 - n);
    CHECK((fd - d1).abs() <= env);
    CHECK_FALSE(d1.is_zero());

    // blended y-derivative where the step changes between Y and Y+1
    std::uint64_t Ts = 0;
    long Ys = -1;
    for (std::uint64_t c = 0; c < g.normalized().equation.width && Ys < 0; ++c) {
        const auto rw = g.normalized().active_row(c);
        for (long v = 0; v < 8 && rw > 0; ++v) {
            if (g.step(rw, c, v) != g.step(rw, c, v + 1)) {
                Ts = c;
                Ys = v;
                break;
            }
        }
    }
    REQUIRE(Ys >= 0);
    const auto rs = g.normalized().active_row(Ts);
    const std::int64_t ys_scale = prm.scale(rs);
    const Dyadic ts = in_cell(g, Ts, 5, 4);
    const Dyadic yc = (Dyadic(Ys) + Dyadic::pow2(-1)).scaled(-ys_scale);
    const Dyadic ystep = Dyadic::pow2(-20 - ys_scale);
    const std::int64_t ns = 64 + prm.scale(rs + 1) - prm.q;
    const Dyadic fdy = (g.g(ts, yc + ystep, ns + 60) - g.g(ts, yc - ystep, ns + 60)).scaled(20 + ys_scale - 1);
    const Dyadic dy = g.deriv(0, 1, ts, yc, ns - ys_scale);
    CHECK_FALSE(dy.is_zero());
    CHECK((fdy - dy).abs() <= dy.abs().scaled(-10));

    CHECK_THROWS_AS(g.deriv(0, 4, t, yb, 8), std::out_of_range);

    // constant-zero equation
    DifferenceEquation zero;
    zero.height = 2;
    zero.width = 3;
    zero.cell_bits = 4;
    zero.step = [](std::size_t, std::uint64_t, const mpz_class&) { return 0; };
    const auto nz = normalize(zero);
    const Gadget gz(nz, make_params(nz, 4, 1, glue_gamma()));
    for (int i = 1; i < 16; ++i) CHECK(gz.enclose_g(Dyadic(i, -4), Dyadic(i - 8, -3), 16).lo() == Dyadic(0));
}

TEST_CASE("glued system")
{
    GluedSystem sys;
    const auto a = parse_instance(kA);
    const auto contra = parse_instance(kContra);
    const auto two = parse_instance(kTwo);
    sys.add(a, 3);
    sys.add(contra, 1);
    sys.add(two, 2);
    CHECK_THROWS(sys.add(a, 1));

    CHECK(sys.h(Dyadic(1), 16) == Dyadic(0));
    CHECK(sys.g(Dyadic(1), Dyadic(1, -1), 16) == Dyadic(0));
    CHECK(sys.h(Dyadic(0), 16) == Dyadic(0));
    for (const auto& e : sys.entries()) {
        const auto& L = e.layout;
        CHECK(L.lambda == static_cast<std::int64_t>(2 * L.length + 2));
        CHECK(sys.enclose_h(L.lo, 8).lo() == Dyadic(0));
        CHECK(sys.enclose_h(L.hi, 8).lo() == Dyadic(0));
        const auto hc = sys.enclose_h(L.c, 8);
        CHECK(hc.is_point());
        CHECK(hc.lo() == e.gadget->final_value().scaled(-L.lambda));
        CHECK(sys.locate(L.c) == sys.locate(L.lo));
        for (unsigned i = 0; i <= 2; ++i) {
            for (unsigned j = 0; j <= e.gadget->params().k; ++j) {
                CHECK(sys.enclose_deriv(i, j, Dyadic(1), Dyadic(1, -2), 8).lo() == Dyadic(0));
            }
        }
    }

    // intervals are disjoint apart from shared endpoints and lie inside [0,1)
    const auto& es = sys.entries();
    for (std::size_t i = 0; i + 1 < es.size(); ++i) CHECK(es[i].layout.hi <= es[i + 1].layout.lo);
    CHECK(es.back().layout.hi < Dyadic(1));

    // (0,0) derivative is g; the reversed copy flips the sign of odd t-derivatives
    const auto& e = es.front();
    const Gadget& gu = *e.gadget;
    const std::uint64_t T = busy_column(gu);
    const Dyadic tau = in_cell(gu, T, 1, 2);
    const Dyadic fwd = e.layout.lo + tau.scaled(-e.layout.lambda);
    const Dyadic rev = e.layout.hi - tau.scaled(-e.layout.lambda);
    const auto row = gu.normalized().active_row(T);
    const Dyadic yl = (Dyadic(gu.grid().at(row, T)) + Dyadic::pow2(-1)).scaled(-gu.params().scale(row));
    const Dyadic y = yl.scaled(-e.layout.lambda);
    const std::int64_t n = 64 + gu.params().scale(row + 1) + 4 * e.layout.lambda;
    CHECK(sys.g(fwd, y, n) == sys.deriv(0, 0, fwd, y, n));
    const Dyadic local = gu.g(tau, yl, n);
    CHECK((sys.g(fwd, y, n) - local).abs() <= Dyadic::pow2(2 - n));
    CHECK((sys.g(rev, y, n) + local).abs() <= Dyadic::pow2(2 - n));
    const Dyadic d1f = sys.deriv(1, 0, fwd, y, n);
    const Dyadic d1r = sys.deriv(1, 0, rev, y, n);
    CHECK_FALSE(d1f.is_zero());
    CHECK((d1f - d1r).abs() <= Dyadic::pow2(2 - n));

    // Taylor extension: continuous across y Lambda = 1 and matching D_2 there
    const Dyadic edge = Dyadic::pow2(-e.layout.lambda);
    const Dyadic off = Dyadic::pow2(-e.layout.lambda - 30);
    const Dyadic inside = sys.g(fwd, edge - off, n);
    const Dyadic outside = sys.g(fwd, edge + off, n);
    const Dyadic dy = sys.deriv(0, 1, fwd, edge, n).abs();
    CHECK((inside - outside).abs() <= dy.scaled(-e.layout.lambda - 29) + Dyadic::pow2(3 - n));
    CHECK(sys.g(fwd, Dyadic(1), n) == sys.g(fwd, Dyadic(1), n));

    // a point in no interval
    CHECK(!sys.locate(Dyadic(1, -3)).has_value());
    CHECK(sys.g(Dyadic(1, -3), Dyadic(0), 8) == Dyadic(0));
}

TEST_CASE("reduction")
{
    GluedSystem sys;
    const auto a = parse_instance(kA);
    const auto contra = parse_instance(kContra);
    sys.add(a, 1);
    sys.add(contra, 1);
    const auto oracle = sys.h_oracle();
    ReductionTrace tr;
    CHECK(reduce(a, 1, oracle, &tr));
    CHECK(tr.accepted);
    CHECK(tr.answer >= tr.threshold);
    CHECK_FALSE(reduce(contra, 1, oracle));

    NamedFunction bad = [](const Dyadic&) {
        return RealName([](std::int64_t n) { return Dyadic(1, -(n + 1)); });
    };
    CHECK_THROWS_AS(reduce(a, 1, bad), ContractViolation);
}

TEST_CASE("final value encoding")
{
    const TallyLanguage none = [](std::uint64_t) { return false; };
    const FinalValueParams p0(trivial_tally_reduction(none), 1);
    for (std::uint64_t n = 0; n + 1 < 8; ++n) CHECK(p0.exponent(n) < p0.exponent(n + 1));
    const auto zero = final_value_name(none, p0);
    CHECK(zero(p0.exponent(3) + 2) == Dyadic(0));
    for (std::uint64_t n = 0; n < 8; ++n) CHECK_FALSE(decode_tally(zero, n, p0));
    CHECK_THROWS_AS(decode_tally(zero, 8, p0), std::out_of_range);

    const TallyLanguage first = [](std::uint64_t n) { return n == 0; };
    const FinalValueParams p1(trivial_tally_reduction(first), 1);
    const auto one = final_value_name(first, p1);
    const std::int64_t E0 = final_value_gamma().eval(0) + p1.rho_bar(1);
    CHECK(E0 == p1.exponent(0));
    CHECK(one(E0 + 50) == Dyadic::pow2(-E0));
    CHECK(decode_tally(one, 0, p1));
    for (std::uint64_t n = 1; n < 8; ++n) CHECK_FALSE(decode_tally(one, n, p1));

    const TallyLanguage alt = [](std::uint64_t n) { return n % 2 == 1; };
    const FinalValueParams pa(trivial_tally_reduction(alt), 2);
    const auto name = final_value_name(alt, pa);
    for (std::uint64_t n = 0; n < 8; ++n) CHECK(decode_tally(name, n, pa) == alt(n));
}
