// odegadget: command-line front end.
//
// Exit codes: 0 success, 1 a check failed, 2 usage or input error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "odegadget/final_value.hpp"
#include "odegadget/verify.hpp"

using namespace odegadget;

namespace {

constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kUsage = 2;

struct Config {
    std::int64_t precision = 64;
    unsigned k = 1;
    unsigned enumeration_cap = 24;
    unsigned width_bits = 20;
    std::string mode = "faithful";
    std::optional<std::uint64_t> seed;
    std::string out;
    bool verbose = false;
};

// Flags > ODEGADGET_* environment > defaults. CLI11's envname() gives the
// middle layer; defaults live in Config.
void common_options(CLI::App& app, Config& cfg)
{
    app.add_option("--precision", cfg.precision, "absolute precision in bits")->envname("ODEGADGET_PRECISION");
    // range checks live in validate(): CLI11 drops bad environment values silently
    app.add_option("--k", cfg.k, "y-smoothness order k, 1..8")->envname("ODEGADGET_K");
    app.add_option("--mode", cfg.mode, "faithful or toy")->envname("ODEGADGET_MODE");
    app.add_option("--enumeration-cap", cfg.enumeration_cap, "largest block enumerated")
        ->envname("ODEGADGET_ENUMERATION_CAP");
    app.add_option("--width-cap", cfg.width_bits, "log2 of the largest grid width")->envname("ODEGADGET_WIDTH_CAP");
    app.add_option("--seed", cfg.seed, "sample seed")->envname("ODEGADGET_SEED");
    app.add_option("--out", cfg.out, "output file (default stdout)")->envname("ODEGADGET_OUT");
}

void validate(const Config& cfg)
{
    if (!parse_mode(cfg.mode)) throw CLI::ValidationError("--mode", "expected faithful or toy, got " + cfg.mode);
    if (cfg.k < 1 || cfg.k > 8) throw CLI::ValidationError("--k", "expected 1..8");
    if (cfg.enumeration_cap == 0 || cfg.width_bits == 0) throw CLI::ValidationError("caps", "must be positive");
}

void preamble(const Config& cfg, const std::string& command)
{
    validate(cfg);
    if (!cfg.verbose) return;
    std::cerr << "# command=" << command << " precision=" << cfg.precision << " k=" << cfg.k
              << " mode=" << cfg.mode << " enumeration_cap=" << cfg.enumeration_cap
              << " width_cap=" << cfg.width_bits << " seed=" << (cfg.seed ? std::to_string(*cfg.seed) : "corpus")
              << " out=" << (cfg.out.empty() ? "-" : cfg.out) << "\n";
}

// Output sink: the --out file when given, else stdout.
class Sink {
public:
    explicit Sink(const std::string& path)
    {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) throw std::runtime_error("cannot write " + path);
        }
    }
    std::ostream& get() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

// p / points rounded down to a multiple of 2^-bits.
Dyadic sample_point(unsigned p, unsigned points, std::int64_t bits)
{
    mpz_class num(p);
    num <<= static_cast<mp_bitcnt_t>(bits);
    num /= points;
    return Dyadic(num, -bits);
}

ParamMode mode_of(const Config& cfg)
{
    return *parse_mode(cfg.mode);
}

int cmd_eval(const Config& cfg, const std::string& file)
{
    const auto inst = load_instance(file);
    Sink sink(cfg.out);
    sink.get() << (truth_value(inst, cfg.enumeration_cap) ? 1 : 0) << "\n";
    return kOk;
}

int cmd_solve(const Config& cfg, const std::string& file, const std::string& grid_csv,
              const std::string& table_csv, std::uint64_t y_limit)
{
    const auto inst = load_instance(file);
    GadgetCaps caps;
    caps.width_bits = cfg.width_bits;
    caps.enumeration_cap = cfg.enumeration_cap;
    const auto ng = normalize(build_gadget(inst, BitLayout::PinLowBit, caps));
    const auto grid = solve(ng.equation);
    if (!grid_csv.empty()) {
        std::ofstream out(grid_csv);
        if (!out) throw std::runtime_error("cannot write " + grid_csv);
        dump_grid(grid, out);
    }
    if (!table_csv.empty()) {
        std::ofstream out(table_csv);
        if (!out) throw std::runtime_error("cannot write " + table_csv);
        dump_table(ng.equation, y_limit, out);
    }
    Sink sink(cfg.out);
    sink.get() << "height " << ng.equation.height << "\nwidth " << ng.equation.width << "\ncell_bits "
               << ng.equation.cell_bits << "\nq " << ng.q << "\nrecognized " << recognize(ng.equation) << "\n";
    return kOk;
}

int cmd_gadget_sample(const Config& cfg, const std::string& file, unsigned points, unsigned derivs)
{
    const auto inst = load_instance(file);
    const Gadget g(inst, cfg.k, glue_gamma(), mode_of(cfg));
    Sink sink(cfg.out);
    auto& out = sink.get();
    out << "t,h,g";
    for (unsigned i = 1; i <= derivs; ++i) out << ",D1^" << i << "g";
    out << "\n";
    const std::int64_t n = cfg.precision;
    for (unsigned p = 0; p <= points; ++p) {
        const Dyadic t = sample_point(p, points, cfg.precision);
        const Dyadic ht = g.h(t, n);
        out << t.str() << "," << ht.str() << "," << g.g(t, ht, n).str();
        for (unsigned i = 1; i <= derivs; ++i) out << "," << g.deriv(i, 0, t, ht, n).str();
        out << "\n";
    }
    return kOk;
}

int cmd_verify(const Config& cfg, const std::string& dir, const std::string& checks, const std::string& fault,
               unsigned points, unsigned threads)
{
    Corpus corpus = load_corpus(dir);
    if (cfg.seed) corpus.seed = *cfg.seed;
    SuiteOptions opt;
    if (checks != "all") {
        std::stringstream ss(checks);
        for (std::string c; std::getline(ss, c, ',');) opt.checks.push_back(c);
    }
    auto f = parse_fault(fault);
    if (!f) throw CLI::ValidationError("--fault", "unknown fault " + fault);
    opt.fault = *f;
    opt.residual_points = points;
    opt.threads = threads;
    const VerdictReport report = run_suite(corpus, opt);
    Sink sink(cfg.out);
    report.write_jsonl(sink.get());
    if (cfg.verbose) {
        std::cerr << "# pass " << report.count(Status::Pass) << " fail " << report.count(Status::Fail) << " error "
                  << report.count(Status::Error) << "\n";
    }
    return report.all_pass() ? kOk : kCheckFailed;
}

int cmd_reduce(const Config& cfg, const std::string& file)
{
    const auto inst = load_instance(file);
    GluedSystem glued;
    glued.add(inst, std::make_shared<const Gadget>(inst, cfg.k, glue_gamma(), mode_of(cfg)));
    ReductionTrace trace;
    const bool accepted = reduce(inst, cfg.k, glued.h_oracle(), &trace);
    Sink sink(cfg.out);
    sink.get() << (accepted ? 1 : 0) << "\n";
    if (cfg.verbose) {
        std::cerr << "# c_u=" << trace.point.str() << " precision=" << trace.precision << "\n";
    }
    return kOk;
}

TallyLanguage tally_language(const std::string& name)
{
    if (name == "all") return [](std::uint64_t) { return true; };
    if (name == "none") return [](std::uint64_t) { return false; };
    if (name == "odd") return [](std::uint64_t n) { return n % 2 == 1; };
    if (name == "even") return [](std::uint64_t n) { return n % 2 == 0; };
    if (name == "primes") {
        return [](std::uint64_t n) {
            if (n < 2) return false;
            for (std::uint64_t d = 2; d * d <= n; ++d) {
                if (n % d == 0) return false;
            }
            return true;
        };
    }
    if (name == "powers-of-two") return [](std::uint64_t n) { return n != 0 && (n & (n - 1)) == 0; };
    throw CLI::ValidationError("--language", "unknown tally language " + name);
}

int cmd_final_value(const Config& cfg, const std::string& language, unsigned bits)
{
    const TallyLanguage tally = tally_language(language);
    const FinalValueParams params(trivial_tally_reduction(tally), cfg.k, bits);
    const RealName name = final_value_name(tally, params);
    Sink sink(cfg.out);
    auto& out = sink.get();
    int status = kOk;
    out << "n,exponent,decoded,expected\n";
    for (std::uint64_t n = 0; n < bits; ++n) {
        const bool got = decode_tally(name, n, params);
        if (got != tally(n)) status = kCheckFailed;
        out << n << "," << params.exponent(n) << "," << got << "," << tally(n) << "\n";
    }
    return status;
}

int cmd_bump_table(const Config& cfg, unsigned orders, unsigned points)
{
    const auto& bump = BumpFunction::instance();
    if (orders > bump.max_order()) throw CLI::ValidationError("--orders", "at most " + std::to_string(bump.max_order()));
    Sink sink(cfg.out);
    auto& out = sink.get();
    out << "t,f";
    for (unsigned m = 1; m <= orders; ++m) out << ",D" << m << "f";
    out << ",t_float,f_float\n";
    for (unsigned p = 0; p <= points; ++p) {
        const Dyadic t = sample_point(p, points, cfg.precision);
        const Dyadic f = bump.f(t, cfg.precision);
        out << t.str() << "," << f.str();
        for (unsigned m = 1; m <= orders; ++m) out << "," << bump.eval(m, t, cfg.precision).str();
        out << "," << t.to_double() << "," << f.to_double() << "\n";
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"odegadget: smooth ODE gadgets for counting-hierarchy instances"};
    app.require_subcommand(1);
    Config cfg;
    app.add_flag("--verbose,-v", cfg.verbose, "print the effective configuration to stderr")
        ->envname("ODEGADGET_VERBOSE");

    auto* eval = app.add_subcommand("eval", "truth value of a counting instance");
    std::string file;
    eval->add_option("instance", file, "instance file")->required();
    common_options(*eval, cfg);

    auto* solve_cmd = app.add_subcommand("solve", "solve the normalized difference equation");
    std::string dump_grid_path, dump_table_path;
    std::uint64_t y_limit = 4;
    solve_cmd->add_option("instance", file, "instance file")->required();
    solve_cmd->add_option("--dump-grid", dump_grid_path, "write i,T,H CSV");
    solve_cmd->add_option("--dump-table", dump_table_path, "write sparse i,T,Y,G CSV");
    solve_cmd->add_option("--y-limit", y_limit, "Y values per cell in --dump-table");
    common_options(*solve_cmd, cfg);

    auto* gadget = app.add_subcommand("gadget", "evaluate the smooth gadget");
    auto* sample = gadget->add_subcommand("sample", "t, h_u(t), g_u(t, h_u(t)) as CSV");
    gadget->require_subcommand(1);
    unsigned points = 64;
    unsigned derivs = 0;
    sample->add_option("--instance", file, "instance file")->required();
    sample->add_option("--points", points, "number of intervals")->envname("ODEGADGET_POINTS");
    sample->add_option("--derivs", derivs, "extra t-derivative columns")->check(CLI::Range(0, 4));
    common_options(*sample, cfg);

    auto* verify = app.add_subcommand("verify", "run the verification suite, JSON lines out");
    std::string corpus_dir, checks = "all", fault = "none";
    unsigned threads = 0;
    unsigned vpoints = 256;
    verify->add_option("--corpus", corpus_dir, "corpus directory")->required()->envname("ODEGADGET_CORPUS");
    verify->add_option("--checks", checks, "comma list or all")->envname("ODEGADGET_CHECKS");
    verify->add_option("--fault", fault, "inject a fault");
    verify->add_option("--points", vpoints, "residual sample points")->envname("ODEGADGET_POINTS");
    verify->add_option("--threads", threads, "worker threads, 0 = all cores");
    common_options(*verify, cfg);

    auto* reduce_cmd = app.add_subcommand("reduce", "decide an instance through the glued h oracle");
    reduce_cmd->add_option("instance", file, "instance file")->required();
    common_options(*reduce_cmd, cfg);

    auto* final_value = app.add_subcommand("final-value", "encode a tally language and decode it back");
    std::string language = "primes";
    unsigned bits = FinalValueParams::kDefaultHorizon;
    final_value->add_option("--language", language, "all, none, odd, even, primes, powers-of-two");
    final_value->add_option("--bits", bits, "horizon")->envname("ODEGADGET_BITS")->check(CLI::Range(1, 16));
    common_options(*final_value, cfg);

    auto* bump = app.add_subcommand("bump", "the bump function f");
    auto* table = bump->add_subcommand("table", "t, f, Df, ... as CSV");
    bump->require_subcommand(1);
    unsigned orders = 4;
    unsigned bpoints = 64;
    table->add_option("--orders", orders, "highest derivative");
    table->add_option("--points", bpoints, "number of intervals")->envname("ODEGADGET_POINTS");
    common_options(*table, cfg);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*eval) {
            preamble(cfg, "eval");
            return cmd_eval(cfg, file);
        }
        if (*solve_cmd) {
            preamble(cfg, "solve");
            return cmd_solve(cfg, file, dump_grid_path, dump_table_path, y_limit);
        }
        if (*sample) {
            preamble(cfg, "gadget sample");
            return cmd_gadget_sample(cfg, file, points, derivs);
        }
        if (*verify) {
            preamble(cfg, "verify");
            return cmd_verify(cfg, corpus_dir, checks, fault, vpoints, threads);
        }
        if (*reduce_cmd) {
            preamble(cfg, "reduce");
            return cmd_reduce(cfg, file);
        }
        if (*final_value) {
            preamble(cfg, "final-value");
            return cmd_final_value(cfg, language, bits);
        }
        if (*table) {
            preamble(cfg, "bump table");
            return cmd_bump_table(cfg, orders, bpoints);
        }
    } catch (const std::exception& e) {
        // bad input files, parse errors, unknown names and caps all land here
        std::cerr << "odegadget: " << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}
