#include <ixt/constraints.hpp>

#include <ixt/error.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

namespace ixt {

namespace {

constexpr const char *kOrigin = "constraints";

std::string upper(std::string_view s)
{
    std::string out(s);
    for (auto &c : out)
        c = char(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

struct Token
{
    enum Kind { Word, Number, String, Symbol, End } kind = End;
    std::string text;
    double value = 0;
};

std::vector<Token> tokenize(std::string_view s, int line)
{
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < s.size()) {
        char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            auto j = i;
            while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_' || s[j] == '.'))
                ++j;
            out.push_back({Token::Word, std::string(s.substr(i, j - i))});
            i = j;
        } else if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && i + 1 < s.size() &&
                                                                     std::isdigit(static_cast<unsigned char>(s[i + 1])))) {
            std::size_t used = 0;
            double v = std::stod(std::string(s.substr(i)), &used);
            out.push_back({Token::Number, std::string(s.substr(i, used)), v});
            i += used;
        } else if (c == '\'' || c == '"') {
            auto j = s.find(c, i + 1);
            if (j == std::string_view::npos)
                throw Error(kOrigin, "DslSyntaxError", "unterminated string", line);
            out.push_back({Token::String, std::string(s.substr(i + 1, j - i - 1))});
            i = j + 1;
        } else if (c == '<' || c == '>' || c == '!') {
            if (i + 1 < s.size() && s[i + 1] == '=') {
                out.push_back({Token::Symbol, std::string(s.substr(i, 2))});
                i += 2;
            } else if (c == '<' && i + 1 < s.size() && s[i + 1] == '>') {
                out.push_back({Token::Symbol, "<>"});
                i += 2;
            } else {
                out.push_back({Token::Symbol, std::string(1, c)});
                ++i;
            }
        } else if (std::string_view("=()*/+-,;").find(c) != std::string_view::npos) {
            out.push_back({Token::Symbol, std::string(1, c)});
            ++i;
        } else {
            throw Error(kOrigin, "DslSyntaxError", std::string("unexpected character `") + c + "`", line);
        }
    }
    out.push_back({Token::End, ""});
    return out;
}

const std::vector<std::string> kAttributes{"TABLE", "WIDTH", "SIZE", "CLUSTERED", "COLS"};

class Parser
{
public:
    Parser(std::string_view text, int line) : tokens_(tokenize(text, line)), line_(line) { }

    ConstraintAst statement()
    {
        bool soft = accept("SOFT");
        auto ast = body(soft);
        accept_symbol(";");
        if (peek().kind != Token::End)
            syntax("unexpected `" + peek().text + "` after the statement");
        return ast;
    }

private:
    [[noreturn]] void syntax(const std::string &msg) const { throw Error(kOrigin, "DslSyntaxError", msg, line_); }
    [[noreturn]] void nonlinear(const std::string &msg) const
    {
        throw Error(kOrigin, "NonLinearConstruct", msg, line_);
    }

    const Token & peek(std::size_t ahead = 0) const { return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)]; }
    Token next() { return tokens_[std::min(pos_++, tokens_.size() - 1)]; }
    bool is_word(const char *kw, std::size_t ahead = 0) const
    {
        return peek(ahead).kind == Token::Word && upper(peek(ahead).text) == kw;
    }
    bool accept(const char *kw)
    {
        if (!is_word(kw))
            return false;
        ++pos_;
        return true;
    }
    void expect(const char *kw)
    {
        if (!accept(kw))
            syntax(std::string("expected ") + kw + ", got `" + peek().text + "`");
    }
    bool accept_symbol(const char *sym)
    {
        if (peek().kind == Token::Symbol && peek().text == sym) {
            ++pos_;
            return true;
        }
        return false;
    }
    void expect_symbol(const char *sym)
    {
        if (!accept_symbol(sym))
            syntax(std::string("expected `") + sym + "`, got `" + peek().text + "`");
    }
    std::string identifier()
    {
        if (peek().kind != Token::Word)
            syntax("expected an identifier, got `" + peek().text + "`");
        return next().text;
    }
    double number()
    {
        bool negative = accept_symbol("-");
        if (peek().kind != Token::Number)
            syntax("expected a number, got `" + peek().text + "`");
        double v = next().value;
        if (!std::isfinite(v))
            syntax("bound must be finite");
        return negative ? -v : v;
    }

    /// A function call we do not know is a UDF; reject it as non-linear.
    void reject_call()
    {
        if (peek().kind == Token::Word && peek(1).kind == Token::Symbol && peek(1).text == "(")
            nonlinear("unsupported function `" + peek().text + "`");
    }

    DslCmp comparison()
    {
        auto t = peek();
        if (t.kind == Token::Symbol) {
            if (t.text == "<=") return ++pos_, DslCmp::Le;
            if (t.text == "<") return ++pos_, DslCmp::Lt;
            if (t.text == "=") return ++pos_, DslCmp::Eq;
            if (t.text == ">=") return ++pos_, DslCmp::Ge;
            if (t.text == ">") return ++pos_, DslCmp::Gt;
            if (t.text == "<>" || t.text == "!=")
                nonlinear("`" + t.text + "` is a disjunction");
            if (t.text == "*" || t.text == "/" || t.text == "+" || t.text == "-")
                nonlinear("arithmetic on aggregates is outside the linear fragment");
        }
        syntax("expected a comparison, got `" + t.text + "`");
    }

    std::vector<FilterAtom> filter()
    {
        std::vector<FilterAtom> atoms;
        do {
            reject_call();
            auto attr = upper(identifier());
            if (std::find(kAttributes.begin(), kAttributes.end(), attr) == kAttributes.end())
                throw Error(kOrigin, "UnknownAttribute", attr, line_);
            FilterAtom atom;
            atom.attribute = attr;
            atom.cmp = comparison();
            if (peek().kind == Token::Number || (peek().kind == Token::Symbol && peek().text == "-"))
                atom.number = number();
            else if (peek().kind == Token::Word || peek().kind == Token::String)
                atom.name = next().text;
            else
                syntax("expected a filter value, got `" + peek().text + "`");
            atoms.push_back(std::move(atom));
            if (is_word("OR"))
                nonlinear("OR in a filter");
        } while (accept("AND"));
        return atoms;
    }

    ConstraintAst body(bool soft)
    {
        if (accept("FOR"))
            return generator(soft);
        if (accept("ASSERT"))
            return assertion(soft);
        reject_call();
        syntax("expected ASSERT or FOR, got `" + peek().text + "`");
    }

    ConstraintAst generator(bool soft)
    {
        ConstraintAst ast;
        ast.soft = soft;
        ast.kind = ConstraintAst::Kind::Generator;
        ast.line = line_;
        ast.variable = identifier();
        expect("IN");
        auto domain = upper(identifier());
        if (domain == "W")
            ast.domain = Domain::Workload;
        else if (domain == "S")
            ast.domain = Domain::Candidates;
        else if (domain == "TABLES")
            ast.domain = Domain::Tables;
        else
            syntax("unknown loop domain `" + domain + "`");
        if (accept("WHERE"))
            ast.domain_filter = filter();
        if (accept("SOFT"))
            syntax("SOFT must prefix the whole statement");
        ast.body = std::make_shared<ConstraintAst>(body(soft));
        return ast;
    }

    ConstraintAst assertion(bool soft)
    {
        ConstraintAst ast;
        ast.soft = soft;
        ast.line = line_;
        if (peek().kind != Token::Word)
            syntax("expected an aggregate, got `" + peek().text + "`");
        auto head = upper(peek().text);

        if (head == "COST") {
            next();
            ast.kind = ConstraintAst::Kind::QueryCost;
            expect_symbol("(");
            ast.query = identifier();
            expect_symbol(")");
            if (peek().kind == Token::Symbol && (peek().text == "*" || peek().text == "/"))
                nonlinear("product involving COST");
            ast.cmp = comparison();
            if (ast.cmp != DslCmp::Le && ast.cmp != DslCmp::Lt)
                nonlinear("a query cost can only be bounded from above");
            if (is_word("BASECOST")) {
                ast.factor = 1.0;
            } else {
                ast.bound = number();
                if (accept_symbol("*"))
                    ast.factor = ast.bound;
            }
            if (ast.factor) {
                expect("BASECOST");
                expect_symbol("(");
                auto q = identifier();
                expect_symbol(")");
                if (q != ast.query)
                    nonlinear("BASECOST must refer to the same query as COST");
                ast.bound = 0;
            }
            return ast;
        }

        ast.kind = ConstraintAst::Kind::IndexAggregate;
        if (head == "AVG")
            nonlinear("AVG is a ratio of two sums");
        if (head == "SUM")
            ast.aggregate = Aggregate::Sum;
        else if (head == "COUNT")
            ast.aggregate = Aggregate::Count;
        else if (head == "MIN")
            ast.aggregate = Aggregate::Min;
        else if (head == "MAX")
            ast.aggregate = Aggregate::Max;
        else {
            reject_call();
            syntax("unknown aggregate `" + peek().text + "`");
        }
        next();
        expect_symbol("(");
        if (accept_symbol("*") || (peek().kind == Token::Number && peek().value == 1.0 && (next(), true))) {
            ast.measure = Measure::One;
        } else {
            reject_call();
            auto term = upper(identifier());
            if (term == "SIZE")
                ast.measure = Measure::Size;
            else if (term == "WIDTH" || term == "COLS")
                ast.measure = Measure::Width;
            else
                syntax("unknown measure `" + term + "`");
        }
        expect_symbol(")");
        if (accept("WHERE"))
            ast.filter = filter();
        ast.cmp = comparison();
        ast.bound = number();
        if (peek().kind == Token::Symbol && (peek().text == "*" || peek().text == "/"))
            nonlinear("arithmetic on the bound is not supported");

        if (soft && (ast.aggregate == Aggregate::Min || ast.aggregate == Aggregate::Max))
            nonlinear("soft MIN/MAX has no linear violation measure");
        if (soft && ast.cmp == DslCmp::Eq && ast.bound != 0.0)
            nonlinear("soft equality with a nonzero bound needs an absolute value");
        return ast;
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
    int line_;
};

bool filter_matches_index(const std::vector<FilterAtom> &atoms, const IndexCandidate &a,
                          const std::map<std::string, Binding> &env, const ConstraintUniverse &u, int line)
{
    for (auto &atom : atoms) {
        if (atom.attribute == "TABLE") {
            std::string name = atom.name;
            if (auto it = env.find(atom.name); it != env.end()) {
                if (it->second.domain != Domain::Tables)
                    throw Error(kOrigin, "DslSyntaxError", atom.name + " is not a table variable", line);
                name = u.catalog->table(it->second.index).name;
            }
            bool eq = a.table == name;
            if (atom.cmp != DslCmp::Eq)
                throw Error(kOrigin, "DslSyntaxError", "TABLE only supports `=`", line);
            if (!eq)
                return false;
        } else if (atom.attribute == "CLUSTERED") {
            bool want;
            if (atom.number)
                want = *atom.number != 0.0;
            else {
                auto v = upper(atom.name);
                if (v != "TRUE" && v != "FALSE")
                    throw Error(kOrigin, "DslSyntaxError", "CLUSTERED compares with TRUE or FALSE", line);
                want = v == "TRUE";
            }
            if (atom.cmp != DslCmp::Eq)
                throw Error(kOrigin, "DslSyntaxError", "CLUSTERED only supports `=`", line);
            if (a.clustered != want)
                return false;
        } else {
            if (!atom.number)
                throw Error(kOrigin, "DslSyntaxError", atom.attribute + " compares with a number", line);
            double v = atom.attribute == "SIZE" ? a.size_bytes : double(a.width());
            if (!compare(v, atom.cmp, *atom.number))
                return false;
        }
    }
    return true;
}

bool filter_matches_table(const std::vector<FilterAtom> &atoms, const std::string &table, int line)
{
    for (auto &atom : atoms) {
        if (atom.attribute != "TABLE")
            throw Error(kOrigin, "UnknownAttribute", atom.attribute + " does not apply here", line);
        if (atom.cmp != DslCmp::Eq)
            throw Error(kOrigin, "DslSyntaxError", "TABLE only supports `=`", line);
        if (table != atom.name)
            return false;
    }
    return true;
}

bool filter_matches_query(const std::vector<FilterAtom> &atoms, const QueryDescriptor &q, int line)
{
    for (auto &atom : atoms) {
        if (atom.attribute != "TABLE")
            throw Error(kOrigin, "UnknownAttribute", atom.attribute + " does not apply to statements", line);
        if (atom.cmp != DslCmp::Eq)
            throw Error(kOrigin, "DslSyntaxError", "TABLE only supports `=`", line);
        if (!q.references(atom.name))
            return false;
    }
    return true;
}

void unroll_into(const ConstraintAst &ast, const ConstraintUniverse &u, std::map<std::string, Binding> env,
                 std::string suffix, std::vector<UnrolledAssert> &out)
{
    if (ast.kind != ConstraintAst::Kind::Generator) {
        out.push_back({&ast, std::move(env), std::move(suffix)});
        return;
    }
    if (env.count(ast.variable))
        throw Error(kOrigin, "DslSyntaxError", "loop variable `" + ast.variable + "` shadows another", ast.line);
    switch (ast.domain) {
        case Domain::Workload: {
            auto &stmts = u.workload->statements();
            for (std::size_t i = 0; i != stmts.size(); ++i) {
                if (!filter_matches_query(ast.domain_filter, stmts[i].query, ast.line))
                    continue;
                auto e = env;
                e[ast.variable] = {Domain::Workload, i};
                unroll_into(*ast.body, u, std::move(e), suffix + "[" + stmts[i].query.id + "]", out);
            }
            break;
        }
        case Domain::Candidates:
            for (std::size_t i = 0; i != u.candidates.size(); ++i) {
                if (!filter_matches_index(ast.domain_filter, u.candidates[i], env, u, ast.line))
                    continue;
                auto e = env;
                e[ast.variable] = {Domain::Candidates, i};
                unroll_into(*ast.body, u, std::move(e), suffix + "[" + u.candidates[i].id + "]", out);
            }
            break;
        case Domain::Tables:
            for (std::size_t t = 0; t != u.catalog->table_count(); ++t) {
                auto &name = u.catalog->table(t).name;
                if (!filter_matches_table(ast.domain_filter, name, ast.line))
                    continue;
                auto e = env;
                e[ast.variable] = {Domain::Tables, t};
                unroll_into(*ast.body, u, std::move(e), suffix + "[" + name + "]", out);
            }
            break;
    }
}

/// Integer-valued left-hand sides turn strict bounds into closed ones.
std::pair<Cmp, double> closed_bound(DslCmp cmp, double bound, bool integral)
{
    switch (cmp) {
        case DslCmp::Le: return {Cmp::Le, bound};
        case DslCmp::Ge: return {Cmp::Ge, bound};
        case DslCmp::Eq: return {Cmp::Eq, bound};
        case DslCmp::Lt: return {Cmp::Le, integral ? std::ceil(bound) - 1.0 : bound};
        case DslCmp::Gt: return {Cmp::Ge, integral ? std::floor(bound) + 1.0 : bound};
    }
    return {Cmp::Le, bound};
}

struct HardResult
{
    std::vector<LinConstraint> rows;
    bool infeasible = false;
    std::vector<std::string> warnings;
};

/// Min/max activity of a row over binary variables.
std::pair<double, double> activity_range(const LinConstraint &row)
{
    double lo = 0, hi = 0;
    for (auto &t : row.terms)
        (t.coef < 0 ? lo : hi) += t.coef;
    return {lo, hi};
}

bool trivially_false(const LinConstraint &row, double lo, double hi)
{
    constexpr double tol = 1e-9;
    switch (row.cmp) {
        case Cmp::Le: return lo > row.rhs + tol;
        case Cmp::Ge: return hi < row.rhs - tol;
        case Cmp::Eq: return lo > row.rhs + tol || hi < row.rhs - tol;
    }
    return false;
}

HardResult compile_hard(const ConstraintAst &ast, const std::string &name, const BipProblem &bip,
                        const Workload &workload, const Catalog &catalog)
{
    HardResult result;
    ConstraintUniverse u{bip.candidates(), &workload, &catalog};
    for (auto &element : unroll(ast, u)) {
        auto &a = *element.assertion;
        auto row_name = name + element.suffix;
        std::vector<LinConstraint> rows;

        if (a.kind == ConstraintAst::Kind::QueryCost) {
            auto stmt = cost_statement(element, u);
            auto block = *bip.block_of_statement(workload.statements()[stmt].query.id);
            auto &qb = bip.blocks()[block];
            double base = bip.block_base_cost(block) + qb.update_constant;
            double limit = a.factor ? *a.factor * base : a.bound;
            LinConstraint row;
            row.terms = bip.statement_cost_terms(block);
            row.cmp = Cmp::Le;
            row.rhs = limit - qb.update_constant;
            row.cost_of_query = block;
            row.name = row_name;
            std::vector<char> all(bip.candidates().size(), 1);
            if (bip.block_cost(block, all) > row.rhs + 1e-9 * std::max(1.0, std::abs(row.rhs)))
                result.infeasible = true;
            rows.push_back(std::move(row));
        } else {
            auto scope = aggregate_scope(element, u);
            std::vector<double> w;
            for (auto i : scope)
                w.push_back(measure_of(u.candidates[i], a.measure));
            bool integral = integral_measure(a);
            if (a.aggregate == Aggregate::Sum || a.aggregate == Aggregate::Count) {
                LinConstraint row;
                for (std::size_t j = 0; j != scope.size(); ++j) {
                    double coef = a.aggregate == Aggregate::Count ? 1.0 : w[j];
                    if (coef != 0.0)
                        row.terms.push_back({bip.z_var(scope[j]), coef});
                }
                std::tie(row.cmp, row.rhs) = closed_bound(a.cmp, a.bound, integral);
                row.name = row_name;
                auto [lo, hi] = activity_range(row);
                if (trivially_false(row, lo, hi))
                    result.infeasible = true;
                else if (row.terms.empty()) {
                    result.warnings.push_back("EmptyScope: " + row_name + " is trivially true");
                    continue;
                }
                rows.push_back(std::move(row));
            } else {
                bool is_max = a.aggregate == Aggregate::Max;
                // Universal part: forbid indexes whose measure breaks the bound.
                auto violates = [&](double v) {
                    switch (a.cmp) {
                        case DslCmp::Le: return is_max && v > a.bound;
                        case DslCmp::Lt: return is_max && v >= a.bound;
                        case DslCmp::Ge: return !is_max && v < a.bound;
                        case DslCmp::Gt: return !is_max && v <= a.bound;
                        case DslCmp::Eq: return is_max ? v > a.bound : v < a.bound;
                    }
                    return false;
                };
                // Existential part: at least one chosen index attains the bound.
                bool existential = a.cmp == DslCmp::Eq || (is_max && (a.cmp == DslCmp::Ge || a.cmp == DslCmp::Gt)) ||
                                   (!is_max && (a.cmp == DslCmp::Le || a.cmp == DslCmp::Lt));
                auto witnesses = [&](double v) {
                    switch (a.cmp) {
                        case DslCmp::Ge: return v >= a.bound;
                        case DslCmp::Gt: return v > a.bound;
                        case DslCmp::Le: return v <= a.bound;
                        case DslCmp::Lt: return v < a.bound;
                        case DslCmp::Eq: return is_max ? v >= a.bound : v <= a.bound;
                    }
                    return false;
                };
                for (std::size_t j = 0; j != scope.size(); ++j)
                    if (violates(w[j])) {
                        LinConstraint row;
                        row.terms = {{bip.z_var(scope[j]), 1.0}};
                        row.cmp = Cmp::Le;
                        row.rhs = 0.0;
                        row.name = row_name + "[" + u.candidates[scope[j]].id + "]";
                        rows.push_back(std::move(row));
                    }
                if (existential) {
                    LinConstraint row;
                    for (std::size_t j = 0; j != scope.size(); ++j)
                        if (witnesses(w[j]))
                            row.terms.push_back({bip.z_var(scope[j]), 1.0});
                    row.cmp = Cmp::Ge;
                    row.rhs = 1.0;
                    row.name = row_name;
                    if (row.terms.empty())
                        result.infeasible = true;
                    rows.push_back(std::move(row));
                } else if (rows.empty()) {
                    result.warnings.push_back("EmptyScope: " + row_name + " is trivially true");
                }
            }
        }
        for (auto &row : rows) {
            row.origin = OriginKind::Dba;
            row.group = name;
            result.rows.push_back(std::move(row));
        }
    }
    return result;
}

}

/*======================================================================================================================
 * Public helpers
 *====================================================================================================================*/

const char * to_string(DslCmp cmp)
{
    switch (cmp) {
        case DslCmp::Lt: return "<";
        case DslCmp::Le: return "<=";
        case DslCmp::Eq: return "=";
        case DslCmp::Ge: return ">=";
        case DslCmp::Gt: return ">";
    }
    return "?";
}

bool compare(double lhs, DslCmp cmp, double rhs)
{
    switch (cmp) {
        case DslCmp::Lt: return lhs < rhs;
        case DslCmp::Le: return lhs <= rhs;
        case DslCmp::Eq: return lhs == rhs;
        case DslCmp::Ge: return lhs >= rhs;
        case DslCmp::Gt: return lhs > rhs;
    }
    return false;
}

bool ConstraintAst::operator==(const ConstraintAst &o) const
{
    bool bodies = (!body && !o.body) || (body && o.body && *body == *o.body);
    return soft == o.soft && kind == o.kind && aggregate == o.aggregate && measure == o.measure &&
           filter == o.filter && cmp == o.cmp && bound == o.bound && query == o.query && factor == o.factor &&
           variable == o.variable && domain == o.domain && domain_filter == o.domain_filter && bodies;
}

ConstraintAst parse_constraint(std::string_view statement, int line)
{
    return Parser(statement, line).statement();
}

std::vector<ConstraintAst> parse_constraints(std::string_view text)
{
    std::vector<ConstraintAst> out;
    std::istringstream in{std::string(text)};
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        auto first = raw.find_first_not_of(" \t\r");
        if (first == std::string::npos || raw[first] == '#' || raw.compare(first, 2, "--") == 0)
            continue;
        out.push_back(parse_constraint(raw, line));
    }
    return out;
}

std::vector<UnrolledAssert> unroll(const ConstraintAst &ast, const ConstraintUniverse &universe)
{
    std::vector<UnrolledAssert> out;
    unroll_into(ast, universe, {}, "", out);
    return out;
}

std::vector<std::size_t> aggregate_scope(const UnrolledAssert &element, const ConstraintUniverse &u)
{
    auto &a = *element.assertion;
    std::vector<std::size_t> scope;
    for (std::size_t i = 0; i != u.candidates.size(); ++i) {
        bool ok = true;
        for (auto &[var, binding] : element.env) {
            (void)var;
            if (binding.domain == Domain::Tables && u.candidates[i].table != u.catalog->table(binding.index).name)
                ok = false;
            if (binding.domain == Domain::Candidates && binding.index != i)
                ok = false;
        }
        if (ok && filter_matches_index(a.filter, u.candidates[i], element.env, u, a.line))
            scope.push_back(i);
    }
    return scope;
}

std::size_t cost_statement(const UnrolledAssert &element, const ConstraintUniverse &u)
{
    auto &a = *element.assertion;
    if (auto it = element.env.find(a.query); it != element.env.end()) {
        if (it->second.domain != Domain::Workload)
            throw Error(kOrigin, "DslSyntaxError", a.query + " is not bound to a statement", a.line);
        return it->second.index;
    }
    auto &stmts = u.workload->statements();
    for (std::size_t i = 0; i != stmts.size(); ++i)
        if (stmts[i].query.id == a.query)
            return i;
    throw Error(kOrigin, "UnknownStatement", a.query, a.line);
}

double measure_of(const IndexCandidate &index, Measure measure)
{
    switch (measure) {
        case Measure::Size: return index.size_bytes;
        case Measure::Width: return double(index.width());
        case Measure::One: return 1.0;
    }
    return 0.0;
}

bool integral_measure(const ConstraintAst &a)
{
    return a.aggregate == Aggregate::Count || a.measure != Measure::Size;
}

std::vector<LinConstraint> compile_constraint(const ConstraintAst &ast, const std::string &name, const BipProblem &bip,
                                              const Workload &workload, const Catalog &catalog)
{
    return compile_hard(ast, name, bip, workload, catalog).rows;
}

void add_hard_constraint(BipProblem &bip, const ConstraintAst &ast, const std::string &name, const Workload &workload,
                         const Catalog &catalog)
{
    auto result = compile_hard(ast, name, bip, workload, catalog);
    for (auto &row : result.rows)
        bip.add_constraint(std::move(row));
    if (result.infeasible)
        bip.add_infeasible(name);
    for (auto &w : result.warnings)
        bip.add_warning(std::move(w));
}

void add_soft_constraint(BipProblem &bip, const ConstraintAst &ast, const std::string &name, const Workload &workload,
                         const Catalog &catalog)
{
    ConstraintUniverse u{bip.candidates(), &workload, &catalog};
    SoftTerm term;
    term.name = name;
    std::map<std::size_t, double> z;
    std::map<std::size_t, double> cost;
    for (auto &element : unroll(ast, u)) {
        auto &a = *element.assertion;
        // g = lhs - bound for upper bounds, bound - lhs for lower bounds.
        if (a.kind == ConstraintAst::Kind::QueryCost) {
            auto stmt = cost_statement(element, u);
            auto block = *bip.block_of_statement(workload.statements()[stmt].query.id);
            double base = bip.block_base_cost(block) + bip.blocks()[block].update_constant;
            cost[block] += 1.0;
            term.constant -= a.factor ? *a.factor * base : a.bound;
            continue;
        }
        if (a.aggregate == Aggregate::Min || a.aggregate == Aggregate::Max)
            throw Error(kOrigin, "NonLinearConstruct", "soft MIN/MAX", a.line);
        auto [cmp, bound] = closed_bound(a.cmp, a.bound, integral_measure(a));
        if (cmp == Cmp::Eq && bound != 0.0)
            throw Error(kOrigin, "NonLinearConstruct", "soft equality with a nonzero bound", a.line);
        double sign = cmp == Cmp::Ge ? -1.0 : 1.0;
        for (auto i : aggregate_scope(element, u)) {
            double coef = a.aggregate == Aggregate::Count ? 1.0 : measure_of(u.candidates[i], a.measure);
            z[i] += sign * coef;
        }
        term.constant -= sign * bound;
    }
    term.z_terms.assign(z.begin(), z.end());
    term.cost_terms.assign(cost.begin(), cost.end());
    bip.add_soft_term(std::move(term));
}

void add_constraint(BipProblem &bip, const ConstraintAst &ast, const std::string &name, const Workload &workload,
                    const Catalog &catalog)
{
    if (ast.soft)
        add_soft_constraint(bip, ast, name, workload, catalog);
    else
        add_hard_constraint(bip, ast, name, workload, catalog);
}

}
