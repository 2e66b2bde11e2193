#pragma once

#include <ixt/catalog.hpp>

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ixt {

enum class StatementKind { Select, Update };

struct EqPredicate
{
    ColumnRef column;
    std::string literal;

    bool operator==(const EqPredicate &) const = default;
};

/// `col < v`, `col >= v`, ... or `col BETWEEN low AND high` (op == "BETWEEN").
struct RangePredicate
{
    ColumnRef column;
    std::string op;
    std::string low;
    std::string high;

    bool operator==(const RangePredicate &) const = default;
};

struct JoinPredicate
{
    ColumnRef left;
    ColumnRef right;

    bool operator==(const JoinPredicate &) const = default;
};

struct Projection
{
    std::optional<std::string> aggregate;   ///< COUNT, SUM, AVG, MIN, MAX
    std::optional<ColumnRef> column;        ///< empty for COUNT(*)

    bool operator==(const Projection &) const = default;
};

/// One parsed statement.  Each table is referenced at most once.  An UPDATE
/// carries its query shell: the SELECT that locates the tuples to modify.
struct QueryDescriptor
{
    std::string id;
    StatementKind kind = StatementKind::Select;
    std::vector<std::string> referenced_tables;   ///< in catalog order
    bool select_star = false;
    std::vector<Projection> projections;
    std::vector<EqPredicate> eq_predicates;
    std::vector<RangePredicate> range_predicates;
    std::vector<JoinPredicate> join_predicates;
    std::optional<ColumnRef> order_by;
    bool order_descending = false;
    std::vector<ColumnRef> group_by;

    // UPDATE only
    std::string target_table;
    std::vector<EqPredicate> set_columns;
    std::shared_ptr<const QueryDescriptor> shell;

    bool is_update() const { return kind == StatementKind::Update; }
    bool references(std::string_view table) const;
    /// Every column of `table` the statement touches, in catalog column order.
    std::vector<std::string> referenced_columns(std::string_view table, const Catalog &catalog) const;

    bool operator==(const QueryDescriptor &other) const;
};

struct Statement
{
    QueryDescriptor query;
    double weight = 1.0;

    bool operator==(const Statement &) const = default;
};

class Workload
{
public:
    Workload() = default;
    explicit Workload(std::vector<Statement> statements);

    const std::vector<Statement> & statements() const { return statements_; }
    std::size_t size() const { return statements_.size(); }
    bool empty() const { return statements_.empty(); }

    const Statement * find(std::string_view id) const;
    void set_weight(std::string_view id, double weight);

    /// W_r: the SELECT statements and the query shells of the updates, paired
    /// with the weight of their originating statement.
    std::vector<std::pair<const QueryDescriptor *, double>> read_queries() const;
    /// W_u: the UPDATE statements.
    std::vector<const Statement *> updates() const;

    bool operator==(const Workload &) const = default;

private:
    std::vector<Statement> statements_;
};

/// Parses `<id> | <weight> | <SQL>` lines.  Throws Error with origin
/// "queryparse" and the offending line number.
Workload parse_workload(std::string_view text, const Catalog &catalog);
QueryDescriptor parse_statement(std::string_view sql, std::string id, const Catalog &catalog,
                                std::optional<int> line = std::nullopt);

/// Canonical SQL for a statement; parsing it again yields an equal descriptor.
std::string to_sql(const QueryDescriptor &query);
/// Canonical workload document.
std::string to_text(const Workload &workload);

}
