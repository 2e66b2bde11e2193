#pragma once

#include <ixt/catalog.hpp>
#include <ixt/query.hpp>

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ixt {

inline constexpr double kInfiniteCost = std::numeric_limits<double>::infinity();

enum class JoinAlgorithm { NestedLoop, Hash, Merge };
const char * to_string(JoinAlgorithm algorithm);

/// The access requirement of one leaf of a plan.
struct SlotSpec
{
    std::size_t table = 0;                         ///< catalog ordinal
    std::optional<std::string> required_order;     ///< column the access must deliver sorted
    double multiplicity = 1;                       ///< number of times the access is repeated
    std::vector<std::string> probe_columns;        ///< nested-loop inner: columns bound per probe

    bool operator==(const SlotSpec &) const = default;
};

/// A physical plan with its leaves left open.  `internal_cost` and the slot
/// requirements depend only on statistics, never on the access methods.
struct PlanSkeleton
{
    std::vector<std::string> join_order;
    std::vector<JoinAlgorithm> join_algorithms;
    std::vector<SlotSpec> slots;                   ///< one per referenced table, in catalog order
    double internal_cost = 0;
};

/// Plan-independent facts about how a statement touches each table.
struct TableAccess
{
    std::size_t table = 0;
    std::vector<bool> eq_column;                   ///< indexed by column ordinal
    std::vector<int> range_count;                  ///< range predicates per column ordinal
    std::vector<bool> referenced;                  ///< columns the statement reads
    double filtered_rows = 0;
};

struct QueryProfile
{
    std::vector<TableAccess> tables;               ///< referenced tables, catalog order
    const TableAccess * find(std::size_t table) const;
};

QueryProfile profile_query(const QueryDescriptor &query, const Catalog &catalog);

/// Cost of serving `slot` with `index` (nullptr: sequential scan).  Infinite
/// when the access cannot deliver the slot's required order.
double access_cost(const QueryProfile &profile, const SlotSpec &slot, const IndexCandidate *index,
                   const Catalog &catalog);

/// Canonical plan cost: slot costs summed in catalog-table order, then the
/// internal cost.  Every costing path goes through this function.
double compose_cost(std::span<const double> slot_costs, double internal_cost);

/// Cost of an explicit sort of `rows` tuples.
double sort_cost(double rows);

/// Finite, deterministic plan space of a SELECT (or query shell).
std::vector<PlanSkeleton> enumerate_plans(const QueryDescriptor &query, const Catalog &catalog);
/// Total number of `enumerate_plans` calls in this process.
std::uint64_t plan_enumeration_count();

/// cost(q, X): exhaustive minimum over every plan skeleton and every atomic
/// configuration drawn from X.  Updates add index maintenance and the base
/// tuple cost.  Throws CandidateTableMismatch for indexes on unknown tables.
double whatif_cost(const QueryDescriptor &query, std::span<const IndexCandidate> config, const Catalog &catalog);

/// Reusable what-if evaluator for one statement: enumerates its plan space
/// once and then costs any number of configurations.
class WhatIfEvaluator
{
public:
    WhatIfEvaluator(const QueryDescriptor &query, const Catalog &catalog);

    double cost(std::span<const IndexCandidate> config) const;
    double cost(std::span<const IndexCandidate *const> config) const;

private:
    double select_cost(std::span<const IndexCandidate *const> config) const;

    const QueryDescriptor *query_;
    const Catalog *catalog_;
    const QueryDescriptor *read_part_;
    QueryProfile profile_;
    std::vector<PlanSkeleton> plans_;
};

/// ucost(a, q) = rows_updated * (2 + height(a)).  Throws TableMismatch.
double update_cost(const IndexCandidate &index, const QueryDescriptor &update, const Catalog &catalog);
/// c_q = rows_updated * 1.0
double base_update_cost(const QueryDescriptor &update, const Catalog &catalog);
/// ceil(selectivity(WHERE) * row_count) of the target table.
double rows_updated(const QueryDescriptor &update, const Catalog &catalog);

/// ucost for every (index on the target table, UPDATE) pair and c_q per UPDATE.
class UpdateCostTable
{
public:
    UpdateCostTable() = default;
    UpdateCostTable(const Workload &workload, std::span<const IndexCandidate> candidates, const Catalog &catalog);

    void add_candidate(const IndexCandidate &index, const Workload &workload, const Catalog &catalog);
    void remove_candidate(const std::string &index_id);

    /// nullopt when the index does not affect the statement.
    std::optional<double> ucost(const std::string &index_id, const std::string &statement_id) const;
    double base_cost(const std::string &statement_id) const;
    std::size_t size() const { return ucost_.size(); }

private:
    std::map<std::pair<std::string, std::string>, double> ucost_;
    std::map<std::string, double> base_;
};

}
