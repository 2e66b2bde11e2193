#include <ixt/query.hpp>

#include <ixt/error.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace ixt {

namespace {

constexpr const char *kOrigin = "queryparse";

enum class Tok { Ident, Number, String, Symbol, End };

struct Token
{
    Tok kind;
    std::string text;
};

std::string upper(std::string_view s)
{
    std::string out(s);
    for (auto &c : out)
        c = char(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

class Lexer
{
public:
    Lexer(std::string_view text, std::optional<int> line) : text_(text), line_(line) { }

    std::vector<Token> run()
    {
        std::vector<Token> out;
        std::size_t i = 0;
        while (i < text_.size()) {
            char c = text_[i];
            if (std::isspace(static_cast<unsigned char>(c))) {
                ++i;
            } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                auto start = i;
                while (i < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[i])) || text_[i] == '_'))
                    ++i;
                out.push_back({Tok::Ident, std::string(text_.substr(start, i - start))});
            } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                       ((c == '-' || c == '.') && i + 1 < text_.size() &&
                        std::isdigit(static_cast<unsigned char>(text_[i + 1])))) {
                auto start = i++;
                while (i < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[i])) || text_[i] == '.' ||
                                            text_[i] == 'e' || text_[i] == 'E'))
                    ++i;
                out.push_back({Tok::Number, std::string(text_.substr(start, i - start))});
            } else if (c == '\'') {
                auto start = i++;
                while (i < text_.size() && text_[i] != '\'')
                    ++i;
                if (i == text_.size())
                    throw Error(kOrigin, "SyntaxError", "unterminated string literal", line_);
                ++i;
                out.push_back({Tok::String, std::string(text_.substr(start, i - start))});
            } else {
                static const char *two[] = {"<=", ">=", "<>", "!="};
                bool matched = false;
                for (auto *op : two) {
                    if (text_.substr(i, 2) == op) {
                        out.push_back({Tok::Symbol, op});
                        i += 2;
                        matched = true;
                        break;
                    }
                }
                if (matched)
                    continue;
                if (std::string_view(",.*()=<>;").find(c) == std::string_view::npos)
                    throw Error(kOrigin, "SyntaxError", std::string("unexpected character `") + c + "`", line_);
                out.push_back({Tok::Symbol, std::string(1, c)});
                ++i;
            }
        }
        out.push_back({Tok::End, ""});
        return out;
    }

private:
    std::string_view text_;
    std::optional<int> line_;
};

struct RawColumn
{
    std::optional<std::string> qualifier;
    std::string name;
};

class Parser
{
public:
    Parser(std::string_view sql, std::string id, const Catalog &catalog, std::optional<int> line)
        : tokens_(Lexer(sql, line).run())
        , id_(std::move(id))
        , catalog_(catalog)
        , line_(line)
    { }

    QueryDescriptor parse()
    {
        QueryDescriptor q;
        q.id = id_;
        if (accept_keyword("SELECT"))
            parse_select(q);
        else if (accept_keyword("UPDATE"))
            parse_update(q);
        else if (peek_keyword("INSERT") || peek_keyword("DELETE") || peek_keyword("WITH"))
            unsupported(upper(peek().text) + " statements");
        else
            syntax("expected SELECT or UPDATE");
        accept_symbol(";");
        if (peek().kind != Tok::End)
            syntax("unexpected trailing input `" + peek().text + "`");
        return q;
    }

private:
    /*----- token helpers --------------------------------------------------------------------------------------------*/

    const Token & peek(std::size_t ahead = 0) const { return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)]; }
    const Token & next() { return tokens_[std::min(pos_++, tokens_.size() - 1)]; }

    bool peek_keyword(const char *kw, std::size_t ahead = 0) const
    {
        return peek(ahead).kind == Tok::Ident && upper(peek(ahead).text) == kw;
    }
    bool accept_keyword(const char *kw)
    {
        if (!peek_keyword(kw))
            return false;
        ++pos_;
        return true;
    }
    void expect_keyword(const char *kw)
    {
        if (!accept_keyword(kw))
            syntax(std::string("expected ") + kw);
    }
    bool peek_symbol(const char *sym) const { return peek().kind == Tok::Symbol && peek().text == sym; }
    bool accept_symbol(const char *sym)
    {
        if (!peek_symbol(sym))
            return false;
        ++pos_;
        return true;
    }
    void expect_symbol(const char *sym)
    {
        if (!accept_symbol(sym))
            syntax(std::string("expected `") + sym + "`");
    }
    std::string expect_ident(const char *what)
    {
        if (peek().kind != Tok::Ident || is_reserved(peek().text))
            syntax(std::string("expected ") + what);
        return next().text;
    }

    static bool is_reserved(const std::string &word)
    {
        static const std::set<std::string> reserved{"SELECT", "FROM",  "WHERE", "AND",   "OR",   "NOT",
                                                    "GROUP",  "ORDER", "BY",    "ASC",   "DESC", "UPDATE",
                                                    "SET",    "JOIN",  "ON",    "INNER", "AS",   "BETWEEN",
                                                    "LIKE",   "IN",    "EXISTS", "DISTINCT", "UNION", "HAVING"};
        return reserved.count(upper(word)) != 0;
    }

    [[noreturn]] void syntax(const std::string &message) const
    {
        throw Error(kOrigin, "SyntaxError", id_ + ": " + message, line_);
    }
    [[noreturn]] void unsupported(const std::string &what) const
    {
        throw Error(kOrigin, "UnsupportedFeature", id_ + ": " + what, line_);
    }

    /*----- FROM / column resolution ---------------------------------------------------------------------------------*/

    void add_table(const std::string &name, std::optional<std::string> alias)
    {
        if (!catalog_.table_index(name))
            throw Error(kOrigin, "UnknownTable", id_ + ": " + name, line_);
        for (auto &[t, a] : from_)
            if (t == name)
                throw Error(kOrigin, "MultipleTableReference", name + " in statement " + id_, line_);
        from_.emplace_back(name, alias.value_or(name));
    }

    void parse_table_ref()
    {
        if (peek_symbol("("))
            unsupported("subqueries");
        auto name = expect_ident("table name");
        std::optional<std::string> alias;
        accept_keyword("AS");
        if (peek().kind == Tok::Ident && !is_reserved(peek().text))
            alias = next().text;
        add_table(name, alias);
    }

    ColumnRef resolve(const RawColumn &raw) const
    {
        if (raw.qualifier) {
            for (auto &[table, alias] : from_) {
                if (alias == *raw.qualifier || table == *raw.qualifier) {
                    if (!catalog_.table(table).column_index(raw.name))
                        throw Error(kOrigin, "UnknownColumn", id_ + ": " + table + "." + raw.name, line_);
                    return {table, raw.name};
                }
            }
            throw Error(kOrigin, "UnknownColumn", id_ + ": " + *raw.qualifier + "." + raw.name, line_);
        }
        std::optional<ColumnRef> found;
        for (auto &[table, alias] : from_) {
            if (catalog_.table(table).column_index(raw.name)) {
                if (found)
                    throw Error(kOrigin, "AmbiguousColumn", id_ + ": " + raw.name, line_);
                found = ColumnRef{table, raw.name};
            }
        }
        if (!found)
            throw Error(kOrigin, "UnknownColumn", id_ + ": " + raw.name, line_);
        return *found;
    }

    RawColumn parse_raw_column()
    {
        RawColumn raw;
        raw.name = expect_ident("column");
        if (accept_symbol(".")) {
            raw.qualifier = raw.name;
            raw.name = expect_ident("column");
        }
        return raw;
    }

    /*----- SELECT ---------------------------------------------------------------------------------------------------*/

    struct RawProjection
    {
        std::optional<std::string> aggregate;
        std::optional<RawColumn> column;
    };

    void parse_select(QueryDescriptor &q)
    {
        q.kind = StatementKind::Select;
        if (peek_keyword("DISTINCT"))
            unsupported("DISTINCT");

        std::vector<RawProjection> raw_projections;
        if (accept_symbol("*")) {
            q.select_star = true;
        } else {
            do {
                RawProjection p;
                static const std::set<std::string> aggregates{"COUNT", "SUM", "AVG", "MIN", "MAX"};
                if (peek().kind == Tok::Ident && peek(1).kind == Tok::Symbol && peek(1).text == "(") {
                    auto fn = upper(next().text);
                    if (!aggregates.count(fn))
                        unsupported("function " + fn);
                    expect_symbol("(");
                    if (peek_keyword("SELECT"))
                        unsupported("subqueries");
                    p.aggregate = fn;
                    if (!accept_symbol("*"))
                        p.column = parse_raw_column();
                    else if (fn != "COUNT")
                        syntax(fn + "(*) is not valid");
                    expect_symbol(")");
                } else {
                    p.column = parse_raw_column();
                }
                if (accept_keyword("AS"))
                    expect_ident("alias");
                raw_projections.push_back(std::move(p));
            } while (accept_symbol(","));
        }

        expect_keyword("FROM");
        parse_table_ref();
        std::vector<std::vector<Token>> on_clauses;
        while (true) {
            if (accept_symbol(",")) {
                parse_table_ref();
            } else if (peek_keyword("JOIN") || peek_keyword("INNER")) {
                accept_keyword("INNER");
                expect_keyword("JOIN");
                parse_table_ref();
                expect_keyword("ON");
                parse_conjunction(q, /* stop_at_join */ true);
            } else if (peek_keyword("LEFT") || peek_keyword("RIGHT") || peek_keyword("FULL") ||
                       peek_keyword("CROSS") || peek_keyword("NATURAL")) {
                unsupported("outer/natural joins");
            } else {
                break;
            }
        }
        // Predicates parsed inside ON clauses were resolved already; resolve projections now.
        for (auto &p : raw_projections)
            q.projections.push_back({p.aggregate, p.column ? std::optional(resolve(*p.column)) : std::nullopt});

        if (accept_keyword("WHERE"))
            parse_conjunction(q, false);
        if (accept_keyword("GROUP")) {
            expect_keyword("BY");
            do
                q.group_by.push_back(resolve(parse_raw_column()));
            while (accept_symbol(","));
        }
        if (accept_keyword("HAVING"))
            unsupported("HAVING");
        if (accept_keyword("ORDER")) {
            expect_keyword("BY");
            q.order_by = resolve(parse_raw_column());
            if (accept_keyword("DESC"))
                q.order_descending = true;
            else
                accept_keyword("ASC");
            if (peek_symbol(","))
                unsupported("multi-column ORDER BY");
        }
        if (peek_keyword("UNION") || peek_keyword("LIMIT"))
            unsupported(upper(peek().text));
        finish_tables(q);
    }

    /*----- UPDATE ---------------------------------------------------------------------------------------------------*/

    void parse_update(QueryDescriptor &q)
    {
        q.kind = StatementKind::Update;
        auto table = expect_ident("table name");
        std::optional<std::string> alias;
        if (peek().kind == Tok::Ident && !is_reserved(peek().text))
            alias = next().text;
        add_table(table, alias);
        q.target_table = table;
        expect_keyword("SET");
        do {
            auto col = resolve(parse_raw_column());
            expect_symbol("=");
            auto lit = parse_literal("SET value");
            q.set_columns.push_back({col, lit});
        } while (accept_symbol(","));
        if (accept_keyword("FROM"))
            unsupported("UPDATE ... FROM");
        if (accept_keyword("WHERE"))
            parse_conjunction(q, false);
        finish_tables(q);

        auto shell = std::make_shared<QueryDescriptor>();
        shell->id = q.id + "_shell";
        shell->kind = StatementKind::Select;
        shell->referenced_tables = q.referenced_tables;
        shell->eq_predicates = q.eq_predicates;
        shell->range_predicates = q.range_predicates;
        q.shell = std::move(shell);
    }

    /*----- predicates -----------------------------------------------------------------------------------------------*/

    bool at_literal() const
    {
        return peek().kind == Tok::Number || peek().kind == Tok::String || peek_keyword("NULL") ||
               peek_keyword("TRUE") || peek_keyword("FALSE") || peek_keyword("DATE");
    }

    std::string parse_literal(const char *what)
    {
        if (peek_keyword("DATE") && peek(1).kind == Tok::String) {
            next();
            return "DATE " + next().text;
        }
        if (!at_literal())
            syntax(std::string("expected literal for ") + what);
        if (peek_symbol("("))
            unsupported("expressions");
        auto text = next().text;
        if (peek().kind == Tok::Symbol && (peek().text == "*" || peek().text == "("))
            unsupported("expressions");
        auto u = upper(text);
        if (u == "NULL" || u == "TRUE" || u == "FALSE")
            return u;
        return text;
    }

    void parse_conjunction(QueryDescriptor &q, bool stop_at_join)
    {
        do {
            if (peek_keyword("NOT") || peek_keyword("EXISTS"))
                unsupported(upper(peek().text));
            if (peek_symbol("("))
                unsupported("parenthesized predicates or subqueries");
            parse_predicate(q);
            if (peek_keyword("OR"))
                unsupported("OR");
        } while (accept_keyword("AND"));
        (void) stop_at_join;
    }

    static std::string flip(const std::string &op)
    {
        if (op == "<") return ">";
        if (op == ">") return "<";
        if (op == "<=") return ">=";
        if (op == ">=") return "<=";
        return op;
    }

    void parse_predicate(QueryDescriptor &q)
    {
        if (at_literal()) {
            auto lit = parse_literal("predicate");
            auto op = parse_comparison();
            auto col = resolve(parse_raw_column());
            add_comparison(q, col, flip(op), lit);
            return;
        }
        auto col = resolve(parse_raw_column());
        if (accept_keyword("BETWEEN")) {
            auto low = parse_literal("BETWEEN");
            expect_keyword("AND");
            auto high = parse_literal("BETWEEN");
            q.range_predicates.push_back({col, "BETWEEN", low, high});
            return;
        }
        if (peek_keyword("IN") || peek_keyword("LIKE") || peek_keyword("IS") || peek_keyword("NOT"))
            unsupported(upper(peek().text) + " predicates");
        auto op = parse_comparison();
        if (peek_symbol("("))
            unsupported("subqueries");
        if (at_literal()) {
            add_comparison(q, col, op, parse_literal("predicate"));
            return;
        }
        auto other = resolve(parse_raw_column());
        if (op != "=")
            unsupported("non-equality join predicate");
        if (other.table == col.table) {
            if (other.column == col.column)
                return;
            unsupported("comparison between two columns of one table");
        }
        q.join_predicates.push_back({col, other});
    }

    std::string parse_comparison()
    {
        if (peek().kind != Tok::Symbol)
            syntax("expected comparison operator");
        auto op = next().text;
        if (op == "<>" || op == "!=")
            unsupported("inequality (<>) predicates");
        if (op != "=" && op != "<" && op != ">" && op != "<=" && op != ">=")
            syntax("expected comparison operator, got `" + op + "`");
        return op;
    }

    void add_comparison(QueryDescriptor &q, const ColumnRef &col, const std::string &op, const std::string &literal)
    {
        if (op == "=")
            q.eq_predicates.push_back({col, literal});
        else
            q.range_predicates.push_back({col, op, literal, ""});
    }

    void finish_tables(QueryDescriptor &q)
    {
        std::vector<std::pair<std::size_t, std::string>> ordered;
        for (auto &[t, a] : from_)
            ordered.emplace_back(*catalog_.table_index(t), t);
        std::sort(ordered.begin(), ordered.end());
        for (auto &[idx, name] : ordered)
            q.referenced_tables.push_back(name);
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
    std::string id_;
    const Catalog &catalog_;
    std::optional<int> line_;
    std::vector<std::pair<std::string, std::string>> from_;   // (table, alias)
};

std::string trim(std::string_view s)
{
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos)
        return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::string format_weight(double w)
{
    std::ostringstream os;
    os.precision(17);
    os << w;
    return os.str();
}

}

/*======================================================================================================================
 * QueryDescriptor / Workload
 *====================================================================================================================*/

bool QueryDescriptor::references(std::string_view table) const
{
    return std::find(referenced_tables.begin(), referenced_tables.end(), table) != referenced_tables.end();
}

std::vector<std::string> QueryDescriptor::referenced_columns(std::string_view table, const Catalog &catalog) const
{
    auto &stats = catalog.table(table);
    if (!references(table))
        return {};
    std::vector<bool> used(stats.columns.size(), false);
    auto mark = [&](const ColumnRef &c) {
        if (c.table == table)
            used[*stats.column_index(c.column)] = true;
    };
    if (select_star)
        std::fill(used.begin(), used.end(), true);
    for (auto &p : projections)
        if (p.column)
            mark(*p.column);
    for (auto &p : eq_predicates)
        mark(p.column);
    for (auto &p : range_predicates)
        mark(p.column);
    for (auto &j : join_predicates) {
        mark(j.left);
        mark(j.right);
    }
    if (order_by)
        mark(*order_by);
    for (auto &g : group_by)
        mark(g);
    std::vector<std::string> out;
    for (std::size_t i = 0; i != used.size(); ++i)
        if (used[i])
            out.push_back(stats.columns[i].name);
    return out;
}

bool QueryDescriptor::operator==(const QueryDescriptor &o) const
{
    auto shells_equal = (!shell && !o.shell) || (shell && o.shell && *shell == *o.shell);
    return id == o.id and kind == o.kind and referenced_tables == o.referenced_tables and
           select_star == o.select_star and projections == o.projections and eq_predicates == o.eq_predicates and
           range_predicates == o.range_predicates and join_predicates == o.join_predicates and
           order_by == o.order_by and order_descending == o.order_descending and group_by == o.group_by and
           target_table == o.target_table and set_columns == o.set_columns and shells_equal;
}

Workload::Workload(std::vector<Statement> statements) : statements_(std::move(statements))
{
    std::set<std::string> ids;
    for (auto &s : statements_) {
        if (!(s.weight > 0.0) || !std::isfinite(s.weight))
            throw Error(kOrigin, "InvalidWeight", s.query.id);
        for (const std::string *id : {static_cast<const std::string *>(&s.query.id), s.query.shell ? &s.query.shell->id : nullptr})
            if (id && !ids.insert(*id).second)
                throw Error(kOrigin, "DuplicateStatement", *id);
    }
}

const Statement * Workload::find(std::string_view id) const
{
    for (auto &s : statements_)
        if (s.query.id == id)
            return &s;
    return nullptr;
}

void Workload::set_weight(std::string_view id, double weight)
{
    if (!(weight > 0.0) || !std::isfinite(weight))
        throw Error(kOrigin, "InvalidWeight", std::string(id));
    for (auto &s : statements_) {
        if (s.query.id == id) {
            s.weight = weight;
            return;
        }
    }
    throw Error(kOrigin, "UnknownStatement", std::string(id));
}

std::vector<std::pair<const QueryDescriptor *, double>> Workload::read_queries() const
{
    std::vector<std::pair<const QueryDescriptor *, double>> out;
    for (auto &s : statements_)
        out.emplace_back(s.query.is_update() ? s.query.shell.get() : &s.query, s.weight);
    return out;
}

std::vector<const Statement *> Workload::updates() const
{
    std::vector<const Statement *> out;
    for (auto &s : statements_)
        if (s.query.is_update())
            out.push_back(&s);
    return out;
}

/*======================================================================================================================
 * Parsing / printing
 *====================================================================================================================*/

QueryDescriptor parse_statement(std::string_view sql, std::string id, const Catalog &catalog, std::optional<int> line)
{
    return Parser(sql, std::move(id), catalog, line).parse();
}

Workload parse_workload(std::string_view text, const Catalog &catalog)
{
    std::vector<Statement> statements;
    std::set<std::string> ids;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos)
            end = text.size();
        auto line = trim(text.substr(pos, end - pos));
        pos = end + 1;
        ++line_no;
        if (line.empty() || line.front() == '#')
            continue;

        auto bar1 = line.find('|');
        auto bar2 = bar1 == std::string::npos ? std::string::npos : line.find('|', bar1 + 1);
        if (bar2 == std::string::npos)
            throw Error(kOrigin, "SyntaxError", "expected `<id> | <weight> | <SQL>`", line_no);
        auto id = trim(line.substr(0, bar1));
        auto weight_text = trim(line.substr(bar1 + 1, bar2 - bar1 - 1));
        auto sql = trim(line.substr(bar2 + 1));
        if (id.empty() || !std::all_of(id.begin(), id.end(), [](char c) {
                return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
            }))
            throw Error(kOrigin, "SyntaxError", "invalid statement id `" + id + "`", line_no);
        double weight = 0;
        try {
            std::size_t used = 0;
            weight = std::stod(weight_text, &used);
            if (used != weight_text.size())
                throw std::invalid_argument("trailing");
        } catch (const std::exception &) {
            throw Error(kOrigin, "SyntaxError", "invalid weight `" + weight_text + "`", line_no);
        }
        if (!(weight > 0.0) || !std::isfinite(weight))
            throw Error(kOrigin, "InvalidWeight", id + " has weight " + weight_text, line_no);

        auto q = parse_statement(sql, id, catalog, line_no);
        for (const std::string *sid : {static_cast<const std::string *>(&q.id), q.shell ? &q.shell->id : nullptr})
            if (sid && !ids.insert(*sid).second)
                throw Error(kOrigin, "DuplicateStatement", *sid, line_no);
        statements.push_back({std::move(q), weight});
    }
    return Workload(std::move(statements));
}

std::string to_sql(const QueryDescriptor &q)
{
    std::ostringstream os;
    auto join = [&os](auto &items, auto &&emit, const char *sep) {
        bool first = true;
        for (auto &item : items) {
            if (!first)
                os << sep;
            first = false;
            emit(item);
        }
    };
    auto where = [&] {
        std::vector<std::string> parts;
        for (auto &p : q.eq_predicates)
            parts.push_back(p.column.str() + " = " + p.literal);
        for (auto &p : q.range_predicates) {
            if (p.op == "BETWEEN")
                parts.push_back(p.column.str() + " BETWEEN " + p.low + " AND " + p.high);
            else
                parts.push_back(p.column.str() + " " + p.op + " " + p.low);
        }
        for (auto &j : q.join_predicates)
            parts.push_back(j.left.str() + " = " + j.right.str());
        if (!parts.empty()) {
            os << " WHERE ";
            join(parts, [&os](auto &s) { os << s; }, " AND ");
        }
    };

    if (q.is_update()) {
        os << "UPDATE " << q.target_table << " SET ";
        join(q.set_columns, [&os](auto &s) { os << s.column.str() << " = " << s.literal; }, ", ");
        where();
        return os.str();
    }

    os << "SELECT ";
    if (q.select_star) {
        os << "*";
    } else {
        join(q.projections, [&os](auto &p) {
            if (p.aggregate)
                os << *p.aggregate << "(" << (p.column ? p.column->str() : std::string("*")) << ")";
            else
                os << p.column->str();
        }, ", ");
    }
    os << " FROM ";
    join(q.referenced_tables, [&os](auto &t) { os << t; }, ", ");
    where();
    if (!q.group_by.empty()) {
        os << " GROUP BY ";
        join(q.group_by, [&os](auto &c) { os << c.str(); }, ", ");
    }
    if (q.order_by)
        os << " ORDER BY " << q.order_by->str() << (q.order_descending ? " DESC" : "");
    return os.str();
}

std::string to_text(const Workload &workload)
{
    std::string out;
    for (auto &s : workload.statements())
        out += s.query.id + " | " + format_weight(s.weight) + " | " + to_sql(s.query) + ";\n";
    return out;
}

}
