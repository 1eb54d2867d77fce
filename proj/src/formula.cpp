#include "odegadget/formula.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <unordered_map>

namespace odegadget {

ParseError::ParseError(const std::string& message, std::size_t line, std::size_t column)
    : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) +
                         ": " + message),
      line_(line),
      column_(column)
{
}

PropFormula make_var(std::string name)
{
    return std::make_shared<const PropNode>(PropNode{PropNode::Kind::Var, std::move(name), {}, {}});
}

PropFormula make_not(PropFormula child)
{
    return std::make_shared<const PropNode>(PropNode{PropNode::Kind::Not, {}, std::move(child), {}});
}

PropFormula make_and(PropFormula left, PropFormula right)
{
    return std::make_shared<const PropNode>(
        PropNode{PropNode::Kind::And, {}, std::move(left), std::move(right)});
}

PropFormula make_or(PropFormula left, PropFormula right)
{
    return std::make_shared<const PropNode>(
        PropNode{PropNode::Kind::Or, {}, std::move(left), std::move(right)});
}

bool structurally_equal(const PropFormula& a, const PropFormula& b)
{
    if (!a || !b) return !a && !b;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
    case PropNode::Kind::Var: return a->name == b->name;
    case PropNode::Kind::Not: return structurally_equal(a->left, b->left);
    default: return structurally_equal(a->left, b->left) && structurally_equal(a->right, b->right);
    }
}

namespace {

int precedence(const PropFormula& f)
{
    switch (f->kind) {
    case PropNode::Kind::Or: return 1;
    case PropNode::Kind::And: return 2;
    case PropNode::Kind::Not: return 3;
    case PropNode::Kind::Var: return 4;
    }
    return 0;
}

void write_formula(const PropFormula& f, std::string& out)
{
    auto wrapped = [&out](const PropFormula& child, bool paren) {
        if (paren) out += '(';
        write_formula(child, out);
        if (paren) out += ')';
    };
    switch (f->kind) {
    case PropNode::Kind::Var: out += f->name; break;
    case PropNode::Kind::Not:
        out += '!';
        wrapped(f->left, precedence(f->left) < 3);
        break;
    case PropNode::Kind::And:
    case PropNode::Kind::Or: {
        const int p = precedence(f);
        wrapped(f->left, precedence(f->left) < p);
        out += (f->kind == PropNode::Kind::And) ? " & " : " | ";
        wrapped(f->right, precedence(f->right) <= p);
        break;
    }
    }
}

void collect_vars(const PropFormula& f, std::vector<std::pair<std::string, const PropNode*>>& out)
{
    if (f->kind == PropNode::Kind::Var) {
        out.emplace_back(f->name, f.get());
        return;
    }
    collect_vars(f->left, out);
    if (f->right) collect_vars(f->right, out);
}

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

// Recursive-descent parser for one formula line.
class ExprParser {
public:
    ExprParser(std::string_view text, std::size_t line, std::size_t column0)
        : text_(text), line_(line), column0_(column0)
    {
    }

    PropFormula parse()
    {
        PropFormula f = parse_or();
        skip_ws();
        if (pos_ < text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
        return f;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const
    {
        throw ParseError(msg, line_, column0_ + pos_);
    }

    void skip_ws()
    {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
    }

    bool accept(char c)
    {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    PropFormula parse_or()
    {
        PropFormula f = parse_and();
        while (accept('|')) f = make_or(f, parse_and());
        return f;
    }

    PropFormula parse_and()
    {
        PropFormula f = parse_unary();
        while (accept('&')) f = make_and(f, parse_unary());
        return f;
    }

    PropFormula parse_unary()
    {
        if (accept('!')) return make_not(parse_unary());
        return parse_atom();
    }

    PropFormula parse_atom()
    {
        skip_ws();
        if (pos_ >= text_.size()) fail("unexpected end of formula");
        if (text_[pos_] == '(') {
            const std::size_t open = pos_;
            ++pos_;
            PropFormula f = parse_or();
            if (!accept(')')) {
                pos_ = open;
                fail("unclosed parenthesis");
            }
            return f;
        }
        if (!is_ident_start(text_[pos_])) fail("expected identifier, '!' or '('");
        const std::size_t start = pos_;
        while (pos_ < text_.size() && is_ident_char(text_[pos_])) ++pos_;
        return make_var(std::string(text_.substr(start, pos_ - start)));
    }

    std::string_view text_;
    std::size_t line_;
    std::size_t column0_;
    std::size_t pos_ = 0;
};

struct Token {
    std::string text;
    std::size_t column;
};

std::vector<Token> split_words(std::string_view line)
{
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        if (i >= line.size()) break;
        const std::size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        out.push_back({std::string(line.substr(start, i - start)), start + 1});
    }
    return out;
}

std::uint64_t parse_natural(const Token& tok, std::size_t line, const std::string& what)
{
    std::uint64_t v = 0;
    const char* first = tok.text.data();
    const char* last = first + tok.text.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || tok.text.empty()) {
        throw ParseError(what + " must be a non-negative integer, got '" + tok.text + "'", line,
                         tok.column);
    }
    return v;
}

}  // namespace

std::string to_string(const PropFormula& f)
{
    std::string out;
    write_formula(f, out);
    return out;
}

bool eval_formula(const PropFormula& f, const Assignment& a)
{
    switch (f->kind) {
    case PropNode::Kind::Var: {
        const auto it = a.find(f->name);
        if (it == a.end()) throw std::out_of_range("variable '" + f->name + "' is not assigned");
        return it->second;
    }
    case PropNode::Kind::Not: return !eval_formula(f->left, a);
    case PropNode::Kind::And: return eval_formula(f->left, a) && eval_formula(f->right, a);
    case PropNode::Kind::Or: return eval_formula(f->left, a) || eval_formula(f->right, a);
    }
    return false;
}

std::uint64_t count_models(const PropFormula& f, const std::vector<std::string>& block,
                           const Assignment& fixed, unsigned enumeration_cap)
{
    if (block.size() > enumeration_cap) {
        throw CapacityError("block of " + std::to_string(block.size()) +
                            " variables exceeds the enumeration cap of " +
                            std::to_string(enumeration_cap));
    }
    Assignment a = fixed;
    std::uint64_t count = 0;
    const std::uint64_t total = std::uint64_t{1} << block.size();
    for (std::uint64_t x = 0; x < total; ++x) {
        for (std::size_t j = 0; j < block.size(); ++j) a[block[j]] = ((x >> j) & 1U) != 0;
        if (eval_formula(f, a)) ++count;
    }
    return count;
}

std::uint64_t CountingInstance::s(std::size_t i) const
{
    std::uint64_t acc = 0;
    for (std::size_t j = 1; j <= i; ++j) acc += block_size(j) + 1;
    return acc;
}

std::size_t CountingInstance::variable_count() const
{
    std::size_t v = 0;
    for (const auto& b : blocks) v += b.size();
    return v;
}

void CountingInstance::validate() const
{
    if (!formula) throw std::invalid_argument("instance has no formula");
    if (blocks.empty()) throw std::invalid_argument("instance needs at least one block");
    if (thresholds.size() != blocks.size()) {
        throw std::invalid_argument("one threshold per block is required");
    }
    std::set<std::string> seen;
    for (const auto& b : blocks) {
        if (b.empty()) throw std::invalid_argument("empty quantifier block");
        for (const auto& v : b) {
            if (!seen.insert(v).second) throw std::invalid_argument("duplicate variable '" + v + "'");
        }
    }
    std::vector<std::pair<std::string, const PropNode*>> used;
    collect_vars(formula, used);
    for (const auto& [name, node] : used) {
        if (!seen.count(name)) {
            throw std::invalid_argument("variable '" + name + "' is not in any block");
        }
    }
}

CountingInstance parse_instance(std::string_view text)
{
    CountingInstance inst;
    std::size_t declared = 0;
    bool have_header = false;
    bool have_formula = false;
    std::set<std::string> seen;

    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        ++line_no;
        start = end + 1;

        const auto words = split_words(line);
        if (words.empty() || words[0].text[0] == '#') {
            if (end == text.size()) break;
            continue;
        }
        const std::string& kw = words[0].text;
        if (have_formula) throw ParseError("content after the formula line", line_no, words[0].column);

        if (!have_header) {
            if (kw != "blocks") throw ParseError("expected 'blocks <n>'", line_no, words[0].column);
            if (words.size() != 2) {
                throw ParseError("expected exactly one count after 'blocks'", line_no, words[0].column);
            }
            declared = parse_natural(words[1], line_no, "block count");
            if (declared == 0) throw ParseError("block count must be positive", line_no, words[1].column);
            have_header = true;
        } else if (kw == "block") {
            if (inst.blocks.size() == declared) {
                throw ParseError("more blocks than declared", line_no, words[0].column);
            }
            if (words.size() < 5 || words[2].text != "vars") {
                throw ParseError("expected 'block <i> vars <id>+ threshold <m>'", line_no,
                                 words[0].column);
            }
            const std::uint64_t idx = parse_natural(words[1], line_no, "block index");
            if (idx != inst.blocks.size() + 1) {
                throw ParseError("expected block index " + std::to_string(inst.blocks.size() + 1),
                                 line_no, words[1].column);
            }
            std::vector<std::string> vars;
            std::size_t w = 3;
            for (; w < words.size() && words[w].text != "threshold"; ++w) {
                const auto& id = words[w].text;
                if (!is_ident_start(id[0]) || !std::all_of(id.begin(), id.end(), is_ident_char)) {
                    throw ParseError("invalid identifier '" + id + "'", line_no, words[w].column);
                }
                if (!seen.insert(id).second) {
                    throw ParseError("duplicate variable '" + id + "'", line_no, words[w].column);
                }
                vars.push_back(id);
            }
            if (vars.empty()) throw ParseError("block needs at least one variable", line_no, words[2].column);
            if (w + 2 != words.size()) {
                throw ParseError("expected 'threshold <m>' at end of block line", line_no,
                                 w < words.size() ? words[w].column : line.size() + 1);
            }
            inst.thresholds.push_back(parse_natural(words[w + 1], line_no, "threshold"));
            inst.blocks.push_back(std::move(vars));
        } else if (kw == "formula") {
            if (inst.blocks.size() != declared) {
                throw ParseError("expected " + std::to_string(declared) + " blocks before the formula",
                                 line_no, words[0].column);
            }
            const std::size_t expr_start = words[0].column - 1 + kw.size();
            ExprParser parser(line.substr(expr_start), line_no, expr_start + 1);
            inst.formula = parser.parse();
            std::vector<std::pair<std::string, const PropNode*>> used;
            collect_vars(inst.formula, used);
            for (const auto& [name, node] : used) {
                if (!seen.count(name)) {
                    // locate the first occurrence for the column
                    std::size_t col = line.find(name, expr_start);
                    throw ParseError("variable '" + name + "' is not in any block", line_no,
                                     col == std::string_view::npos ? 1 : col + 1);
                }
            }
            have_formula = true;
        } else {
            throw ParseError("unknown directive '" + kw + "'", line_no, words[0].column);
        }
        if (end == text.size()) break;
    }
    if (!have_header) throw ParseError("missing 'blocks' header", line_no, 1);
    if (!have_formula) throw ParseError("missing 'formula' line", line_no, 1);
    return inst;
}

CountingInstance load_instance(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open instance file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_instance(ss.str());
}

std::string serialize(const CountingInstance& inst)
{
    std::string out = "blocks " + std::to_string(inst.blocks.size()) + "\n";
    for (std::size_t i = 0; i < inst.blocks.size(); ++i) {
        out += "block " + std::to_string(i + 1) + " vars";
        for (const auto& v : inst.blocks[i]) out += " " + v;
        out += " threshold " + std::to_string(inst.thresholds[i]) + "\n";
    }
    out += "formula " + to_string(inst.formula) + "\n";
    return out;
}

CompiledFormula::CompiledFormula(const CountingInstance& inst)
{
    std::unordered_map<std::string, std::uint8_t> index;
    for (const auto& b : inst.blocks) {
        for (const auto& v : b) {
            if (vars_ >= 64) throw CapacityError("more than 64 variables in one instance");
            index.emplace(v, static_cast<std::uint8_t>(vars_++));
        }
    }
    std::function<void(const PropFormula&)> emit = [&](const PropFormula& f) {
        switch (f->kind) {
        case PropNode::Kind::Var: {
            const auto it = index.find(f->name);
            if (it == index.end()) throw std::invalid_argument("variable '" + f->name + "' is not in any block");
            program_.push_back({Op::Push, it->second});
            break;
        }
        case PropNode::Kind::Not:
            emit(f->left);
            program_.push_back({Op::Not, 0});
            break;
        case PropNode::Kind::And:
            emit(f->left);
            emit(f->right);
            program_.push_back({Op::And, 0});
            break;
        case PropNode::Kind::Or:
            emit(f->left);
            emit(f->right);
            program_.push_back({Op::Or, 0});
            break;
        }
    };
    emit(inst.formula);
}

bool CompiledFormula::operator()(std::uint64_t mask) const
{
    std::vector<bool> stack;
    stack.reserve(program_.size());
    for (const auto& ins : program_) {
        switch (ins.op) {
        case Op::Push: stack.push_back(((mask >> ins.var) & 1U) != 0); break;
        case Op::Not: stack.back() = !stack.back(); break;
        case Op::And: {
            const bool r = stack.back();
            stack.pop_back();
            stack.back() = stack.back() && r;
            break;
        }
        case Op::Or: {
            const bool r = stack.back();
            stack.pop_back();
            stack.back() = stack.back() || r;
            break;
        }
        }
    }
    return stack.back();
}

namespace {

bool phi_rec(const CountingInstance& inst, const CompiledFormula& cf,
             const std::vector<std::size_t>& offsets, std::size_t i, std::uint64_t mask)
{
    if (i == 0) return cf(mask);
    const std::size_t l = inst.block_size(i);
    const std::uint64_t m = inst.threshold(i);
    if (m == 0) return true;
    if (m > (std::uint64_t{1} << l)) return false;
    std::uint64_t count = 0;
    const std::uint64_t total = std::uint64_t{1} << l;
    for (std::uint64_t x = 0; x < total; ++x) {
        if (phi_rec(inst, cf, offsets, i - 1, mask | (x << offsets[i - 1]))) {
            if (++count >= m) return true;
        }
        // remaining completions cannot reach m
        if (count + (total - x - 1) < m) return false;
    }
    return count >= m;
}

}  // namespace

bool eval_phi_i(const CountingInstance& inst, std::size_t i, const Assignment& outer,
                unsigned enumeration_cap)
{
    if (i > inst.n()) throw std::out_of_range("level index above the number of blocks");
    for (std::size_t b = 1; b <= i; ++b) {
        if (inst.block_size(b) > enumeration_cap) {
            throw CapacityError("block " + std::to_string(b) + " exceeds the enumeration cap of " +
                                std::to_string(enumeration_cap));
        }
    }
    const CompiledFormula cf(inst);
    std::vector<std::size_t> offsets;
    std::size_t off = 0;
    for (const auto& b : inst.blocks) {
        offsets.push_back(off);
        off += b.size();
    }
    std::uint64_t mask = 0;
    for (std::size_t b = i; b < inst.n(); ++b) {
        for (std::size_t j = 0; j < inst.blocks[b].size(); ++j) {
            const auto& name = inst.blocks[b][j];
            const auto it = outer.find(name);
            if (it == outer.end()) throw std::out_of_range("variable '" + name + "' is not assigned");
            if (it->second) mask |= std::uint64_t{1} << (offsets[b] + j);
        }
    }
    return phi_rec(inst, cf, offsets, i, mask);
}

bool truth_value(const CountingInstance& inst, unsigned enumeration_cap)
{
    return eval_phi_i(inst, inst.n(), {}, enumeration_cap);
}

mpz_class InstanceEncoding::value() const { return mpz_class(bits, 2); }

InstanceEncoding encode(const CountingInstance& inst)
{
    InstanceEncoding enc;
    std::string& w = enc.bits;
    auto unary = [&w](std::uint64_t k) {
        w.append(k, '1');
        w += '0';
    };
    auto binary = [&w](std::uint64_t x, unsigned width) {
        for (unsigned b = width; b-- > 0;) w += ((x >> b) & 1U) ? '1' : '0';
    };
    auto gamma = [&](std::uint64_t x) {  // x >= 1
        unsigned len = 0;
        while ((x >> len) > 1) ++len;
        w.append(len, '0');
        binary(x, len + 1);
    };

    w += '1';
    unary(inst.n());
    for (const auto& b : inst.blocks) unary(b.size());
    for (const auto m : inst.thresholds) gamma(m + 1);

    std::unordered_map<std::string, std::uint64_t> index;
    for (const auto& b : inst.blocks) {
        for (const auto& v : b) index.emplace(v, index.size());
    }
    unsigned width = 0;
    while ((std::uint64_t{1} << width) < index.size()) ++width;
    std::function<void(const PropFormula&)> emit = [&](const PropFormula& f) {
        switch (f->kind) {
        case PropNode::Kind::Var:
            w += "00";
            binary(index.at(f->name), width);
            break;
        case PropNode::Kind::Not:
            w += "01";
            emit(f->left);
            break;
        case PropNode::Kind::And:
            w += "10";
            emit(f->left);
            emit(f->right);
            break;
        case PropNode::Kind::Or:
            w += "11";
            emit(f->left);
            emit(f->right);
            break;
        }
    };
    emit(inst.formula);
    enc.padding = std::uint64_t{1} << inst.n();
    return enc;
}

}  // namespace odegadget
