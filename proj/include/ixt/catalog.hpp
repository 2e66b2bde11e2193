#pragma once

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ixt {

struct ColumnStats
{
    std::string name;
    int width = 0;               ///< bytes
    std::int64_t distinct = 1;

    bool operator==(const ColumnStats &) const = default;
};

struct TableStats
{
    std::string name;
    std::int64_t row_count = 0;
    std::vector<ColumnStats> columns;

    std::optional<std::size_t> column_index(std::string_view column) const;
    const ColumnStats & column(std::string_view column) const;
    int row_width() const;

    bool operator==(const TableStats &) const = default;
};

/// A fully qualified column `table.column`.
struct ColumnRef
{
    std::string table;
    std::string column;

    std::string str() const { return table + "." + column; }
    auto operator<=>(const ColumnRef &) const = default;
};

struct JoinSelectivity
{
    ColumnRef left;
    ColumnRef right;
    double selectivity = 1.0;

    bool operator==(const JoinSelectivity &) const = default;
};

/// Schema plus synthetic statistics.  Immutable once constructed; the
/// constructor enforces all invariants and throws `Error` on violation.
class Catalog
{
public:
    Catalog() = default;
    Catalog(int page_size, std::vector<TableStats> tables, std::vector<JoinSelectivity> join_selectivities);

    int page_size() const { return page_size_; }
    const std::vector<TableStats> & tables() const { return tables_; }
    std::size_t table_count() const { return tables_.size(); }
    const std::vector<JoinSelectivity> & join_selectivities() const { return join_selectivities_; }

    std::optional<std::size_t> table_index(std::string_view name) const;
    const TableStats & table(std::size_t index) const { return tables_.at(index); }
    /// Throws UnknownTable.
    const TableStats & table(std::string_view name) const;
    std::size_t require_table(std::string_view name) const;

    /// Explicit selectivity if one was given, otherwise 1/max(distinct(left), distinct(right)).
    double join_selectivity(const ColumnRef &left, const ColumnRef &right) const;

    /// ceil(row_count * row_width / page_size); the sequential scan cost.
    double pages(std::size_t table) const;
    /// max(1, ceil(log10(row_count))); shared by every index on the table.
    int index_height(std::size_t table) const;

    bool operator==(const Catalog &) const = default;

private:
    int page_size_ = 4096;
    std::vector<TableStats> tables_;
    std::vector<JoinSelectivity> join_selectivities_;
};

Catalog load_catalog(const nlohmann::json &document);
Catalog load_catalog_text(std::string_view text);
nlohmann::json to_json(const Catalog &catalog);

/// An index over exactly one table.  Column ordinals are resolved against
/// the catalog when the candidate is created through `make_candidate`.
struct IndexCandidate
{
    std::string id;
    std::string table;
    std::vector<std::string> key_columns;
    std::vector<std::string> include_columns;
    bool clustered = false;
    double size_bytes = 0;

    std::size_t table_ordinal = 0;
    std::vector<std::size_t> key_ordinals;
    std::vector<std::size_t> include_ordinals;

    std::size_t width() const { return key_columns.size() + include_columns.size(); }
    /// True when `other` has the same table, columns and clustered flag.
    bool same_structure(const IndexCandidate &other) const;
    /// e.g. `T1(c1,c2) INCLUDE(c3) CLUSTERED`
    std::string describe() const;
};

/// Content hash of (table, keys, includes, clustered); stable across runs.
std::string candidate_id(std::string_view table, const std::vector<std::string> &keys,
                         const std::vector<std::string> &includes, bool clustered);

/// Validates the definition against the catalog and fills in id, ordinals
/// and size.  Throws UnknownTable, UnknownColumn, EmptyKey, OverlappingColumns.
IndexCandidate make_candidate(const Catalog &catalog, std::string table, std::vector<std::string> keys,
                              std::vector<std::string> includes = {}, bool clustered = false);

/// row_count * (8 + sum of key and include column widths).
double estimate_index_size(const IndexCandidate &index, const Catalog &catalog);

nlohmann::json to_json(const IndexCandidate &index);
/// Parses the DBA candidate form {"table","key":[...],"include":[...],"clustered":bool}.
IndexCandidate candidate_from_json(const nlohmann::json &spec, const Catalog &catalog);

/// The synthetic primary keys: one clustered index per table on its first column.
std::vector<IndexCandidate> baseline_configuration(const Catalog &catalog);

}
