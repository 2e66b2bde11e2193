#include <ixt/whatif.hpp>

#include <ixt/error.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>

namespace ixt {

namespace {

constexpr const char *kOrigin = "whatif";

std::atomic<std::uint64_t> enumeration_calls{0};

/// Row counts are whole numbers; the epsilon keeps 0.01 * 10000 from becoming 101.
double whole_rows(double x)
{
    return std::max(0.0, std::ceil(x - 1e-9));
}

struct JoinEdge
{
    std::size_t left_table;
    std::size_t right_table;
    const JoinPredicate *predicate;
};

std::vector<JoinEdge> join_edges(const QueryDescriptor &q, const Catalog &catalog)
{
    std::vector<JoinEdge> edges;
    for (auto &j : q.join_predicates)
        edges.push_back({*catalog.table_index(j.left.table), *catalog.table_index(j.right.table), &j});
    return edges;
}

const std::string & column_on(const JoinPredicate &p, const std::string &table)
{
    return p.left.table == table ? p.left.column : p.right.column;
}

}

const char * to_string(JoinAlgorithm algorithm)
{
    switch (algorithm) {
        case JoinAlgorithm::NestedLoop: return "NESTED_LOOP";
        case JoinAlgorithm::Hash: return "HASH";
        case JoinAlgorithm::Merge: return "MERGE";
    }
    return "?";
}

/*======================================================================================================================
 * Profiles and access costs
 *====================================================================================================================*/

const TableAccess * QueryProfile::find(std::size_t table) const
{
    for (auto &t : tables)
        if (t.table == table)
            return &t;
    return nullptr;
}

QueryProfile profile_query(const QueryDescriptor &query, const Catalog &catalog)
{
    QueryProfile profile;
    for (auto &name : query.referenced_tables) {
        TableAccess access;
        access.table = catalog.require_table(name);
        auto &stats = catalog.table(access.table);
        auto n = stats.columns.size();
        access.eq_column.assign(n, false);
        access.range_count.assign(n, 0);
        access.referenced.assign(n, false);
        double sel = 1.0;
        for (auto &p : query.eq_predicates) {
            if (p.column.table != name)
                continue;
            auto ord = *stats.column_index(p.column.column);
            access.eq_column[ord] = true;
            sel *= 1.0 / double(stats.columns[ord].distinct);
        }
        for (auto &p : query.range_predicates) {
            if (p.column.table != name)
                continue;
            access.range_count[*stats.column_index(p.column.column)] += 1;
            sel *= 1.0 / 3.0;
        }
        for (auto &col : query.referenced_columns(name, catalog))
            access.referenced[*stats.column_index(col)] = true;
        access.filtered_rows = double(stats.row_count) * sel;
        profile.tables.push_back(std::move(access));
    }
    return profile;
}

double access_cost(const QueryProfile &profile, const SlotSpec &slot, const IndexCandidate *index,
                   const Catalog &catalog)
{
    auto &stats = catalog.table(slot.table);
    if (!index) {
        if (slot.required_order)
            return kInfiniteCost;
        return catalog.pages(slot.table) * slot.multiplicity;
    }
    if (index->table_ordinal != slot.table)
        return kInfiniteCost;
    if (slot.required_order && stats.columns[index->key_ordinals.front()].name != *slot.required_order)
        return kInfiniteCost;

    auto *access = profile.find(slot.table);
    auto is_bound = [&](std::size_t ord) {
        if (access && access->eq_column[ord])
            return true;
        auto &name = stats.columns[ord].name;
        return std::find(slot.probe_columns.begin(), slot.probe_columns.end(), name) != slot.probe_columns.end();
    };

    double sel = 1.0;
    std::size_t pos = 0;
    auto &keys = index->key_ordinals;
    while (pos < keys.size() && is_bound(keys[pos])) {
        sel *= 1.0 / double(stats.columns[keys[pos]].distinct);
        ++pos;
    }
    if (pos < keys.size() && access)
        for (int r = 0; r < access->range_count[keys[pos]]; ++r)
            sel *= 1.0 / 3.0;

    bool covering = true;
    if (access) {
        for (std::size_t c = 0; c != access->referenced.size() && covering; ++c) {
            if (!access->referenced[c])
                continue;
            covering = std::find(keys.begin(), keys.end(), c) != keys.end() ||
                       std::find(index->include_ordinals.begin(), index->include_ordinals.end(), c) !=
                           index->include_ordinals.end();
        }
    }
    double factor = covering ? 0.2 : 1.0;
    double rows = whole_rows(sel * double(stats.row_count));
    return (double(catalog.index_height(slot.table)) + rows * factor) * slot.multiplicity;
}

double compose_cost(std::span<const double> slot_costs, double internal_cost)
{
    double total = 0.0;
    for (double c : slot_costs)
        total += c;
    return total + internal_cost;
}

double sort_cost(double rows)
{
    return 0.1 * rows * std::log2(std::max(rows, 2.0));
}

/*======================================================================================================================
 * Plan enumeration
 *====================================================================================================================*/

std::uint64_t plan_enumeration_count()
{
    return enumeration_calls.load();
}

std::vector<PlanSkeleton> enumerate_plans(const QueryDescriptor &query, const Catalog &catalog)
{
    enumeration_calls.fetch_add(1);
    auto profile = profile_query(query, catalog);
    std::vector<PlanSkeleton> plans;

    std::vector<std::size_t> tables;
    for (auto &t : profile.tables)
        tables.push_back(t.table);
    auto rows_of = [&](std::size_t table) { return profile.find(table)->filtered_rows; };

    if (tables.size() == 1) {
        PlanSkeleton plain;
        plain.join_order = {catalog.table(tables[0]).name};
        plain.slots = {SlotSpec{tables[0], std::nullopt, 1, {}}};
        plain.internal_cost = query.order_by ? sort_cost(rows_of(tables[0])) : 0.0;
        plans.push_back(plain);
        if (query.order_by) {
            PlanSkeleton ordered = plain;
            ordered.slots[0].required_order = query.order_by->column;
            ordered.internal_cost = 0.0;
            plans.push_back(std::move(ordered));
        }
        return plans;
    }

    auto edges = join_edges(query, catalog);
    auto connecting = [&](const std::vector<std::size_t> &prefix, std::size_t table) {
        std::vector<const JoinPredicate *> out;
        for (auto &e : edges) {
            bool l = e.left_table == table && std::find(prefix.begin(), prefix.end(), e.right_table) != prefix.end();
            bool r = e.right_table == table && std::find(prefix.begin(), prefix.end(), e.left_table) != prefix.end();
            if (l || r)
                out.push_back(e.predicate);
        }
        return out;
    };

    auto build = [&](const std::vector<std::size_t> &order, const std::vector<JoinAlgorithm> &algorithms) {
        PlanSkeleton plan;
        plan.join_algorithms = algorithms;
        std::vector<SlotSpec> slots;
        for (auto t : tables)
            slots.push_back(SlotSpec{t, std::nullopt, 1, {}});
        auto slot_of = [&](std::size_t table) -> SlotSpec & {
            return *std::find_if(slots.begin(), slots.end(), [&](auto &s) { return s.table == table; });
        };
        for (auto t : order)
            plan.join_order.push_back(catalog.table(t).name);

        double card = rows_of(order[0]);
        double internal = 0.0;
        std::vector<std::size_t> prefix{order[0]};
        for (std::size_t j = 1; j != order.size(); ++j) {
            auto inner = order[j];
            auto &inner_name = catalog.table(inner).name;
            auto preds = connecting(prefix, inner);
            double sel = 1.0;
            for (auto *p : preds)
                sel *= catalog.join_selectivity(p->left, p->right);
            double inner_rows = rows_of(inner);
            switch (algorithms[j - 1]) {
                case JoinAlgorithm::NestedLoop: {
                    auto &slot = slot_of(inner);
                    slot.multiplicity = std::max(1.0, whole_rows(card));
                    for (auto *p : preds) {
                        auto &col = column_on(*p, inner_name);
                        if (std::find(slot.probe_columns.begin(), slot.probe_columns.end(), col) ==
                            slot.probe_columns.end())
                            slot.probe_columns.push_back(col);
                    }
                    break;
                }
                case JoinAlgorithm::Hash:
                    internal += 1.5 * (card + inner_rows);
                    break;
                case JoinAlgorithm::Merge: {
                    auto *p = preds.front();
                    auto &outer_name = catalog.table(order[0]).name;
                    slot_of(order[0]).required_order = column_on(*p, outer_name);
                    slot_of(inner).required_order = column_on(*p, inner_name);
                    internal += 1.0 * (card + inner_rows);
                    break;
                }
            }
            card = card * inner_rows * sel;
            prefix.push_back(inner);
        }
        if (query.order_by)
            internal += sort_cost(card);
        plan.slots = std::move(slots);
        plan.internal_cost = internal;
        return plan;
    };

    std::vector<std::size_t> order;
    std::vector<bool> used(tables.size(), false);
    std::function<void()> permute = [&] {
        if (order.size() == tables.size()) {
            // Algorithm assignments: NL / HASH per join, MERGE only for the first join.
            std::vector<JoinAlgorithm> algorithms(order.size() - 1, JoinAlgorithm::NestedLoop);
            bool merge_possible = order[0] < order[1] && !connecting({order[0]}, order[1]).empty();
            std::function<void(std::size_t)> assign = [&](std::size_t j) {
                if (j == algorithms.size()) {
                    plans.push_back(build(order, algorithms));
                    return;
                }
                for (auto alg : {JoinAlgorithm::NestedLoop, JoinAlgorithm::Hash, JoinAlgorithm::Merge}) {
                    if (alg == JoinAlgorithm::Merge && (j != 0 || !merge_possible))
                        continue;
                    algorithms[j] = alg;
                    assign(j + 1);
                }
            };
            assign(0);
            return;
        }
        bool any_connected = false;
        if (!order.empty())
            for (std::size_t i = 0; i != tables.size(); ++i)
                if (!used[i] && !connecting(order, tables[i]).empty())
                    any_connected = true;
        for (std::size_t i = 0; i != tables.size(); ++i) {
            if (used[i])
                continue;
            if (any_connected && connecting(order, tables[i]).empty())
                continue;
            used[i] = true;
            order.push_back(tables[i]);
            permute();
            order.pop_back();
            used[i] = false;
        }
    };
    permute();
    return plans;
}

/*======================================================================================================================
 * What-if costing
 *====================================================================================================================*/

WhatIfEvaluator::WhatIfEvaluator(const QueryDescriptor &query, const Catalog &catalog)
    : query_(&query)
    , catalog_(&catalog)
    , read_part_(query.is_update() ? query.shell.get() : &query)
    , profile_(profile_query(*read_part_, catalog))
    , plans_(enumerate_plans(*read_part_, catalog))
{ }

double WhatIfEvaluator::cost(std::span<const IndexCandidate> config) const
{
    std::vector<const IndexCandidate *> ptrs;
    ptrs.reserve(config.size());
    for (auto &a : config)
        ptrs.push_back(&a);
    return cost(std::span<const IndexCandidate *const>(ptrs));
}

double WhatIfEvaluator::cost(std::span<const IndexCandidate *const> config) const
{
    for (auto *a : config)
        if (!catalog_->table_index(a->table))
            throw Error(kOrigin, "CandidateTableMismatch", a->id + " is on unknown table " + a->table);

    double total = select_cost(config);
    if (!query_->is_update())
        return total;
    for (auto *a : config)
        if (a->table == query_->target_table)
            total += update_cost(*a, *query_, *catalog_);
    return total + base_update_cost(*query_, *catalog_);
}

double WhatIfEvaluator::select_cost(std::span<const IndexCandidate *const> config) const
{
    double best = kInfiniteCost;
    std::vector<std::vector<double>> options;
    std::vector<double> chosen;
    for (auto &plan : plans_) {
        options.assign(plan.slots.size(), {});
        bool instantiable = true;
        for (std::size_t s = 0; s != plan.slots.size(); ++s) {
            auto &slot = plan.slots[s];
            double scan = access_cost(profile_, slot, nullptr, *catalog_);
            if (std::isfinite(scan))
                options[s].push_back(scan);
            for (auto *a : config) {
                if (a->table_ordinal != slot.table)
                    continue;
                double c = access_cost(profile_, slot, a, *catalog_);
                if (std::isfinite(c))
                    options[s].push_back(c);
            }
            if (options[s].empty()) {
                instantiable = false;
                break;
            }
        }
        if (!instantiable)
            continue;

        // Joint enumeration of every atomic configuration for this plan.
        chosen.assign(plan.slots.size(), 0.0);
        std::function<void(std::size_t)> walk = [&](std::size_t s) {
            if (s == options.size()) {
                best = std::min(best, compose_cost(chosen, plan.internal_cost));
                return;
            }
            for (double c : options[s]) {
                chosen[s] = c;
                walk(s + 1);
            }
        };
        walk(0);
    }
    return best;
}

double whatif_cost(const QueryDescriptor &query, std::span<const IndexCandidate> config, const Catalog &catalog)
{
    return WhatIfEvaluator(query, catalog).cost(config);
}

/*======================================================================================================================
 * Update costs
 *====================================================================================================================*/

double rows_updated(const QueryDescriptor &update, const Catalog &catalog)
{
    auto &stats = catalog.table(update.target_table);
    double sel = 1.0;
    for (auto &p : update.eq_predicates)
        sel *= 1.0 / double(stats.column(p.column.column).distinct);
    for (std::size_t i = 0; i != update.range_predicates.size(); ++i)
        sel *= 1.0 / 3.0;
    return whole_rows(sel * double(stats.row_count));
}

double update_cost(const IndexCandidate &index, const QueryDescriptor &update, const Catalog &catalog)
{
    if (!update.is_update())
        throw Error(kOrigin, "NotAnUpdate", update.id);
    if (index.table != update.target_table)
        throw Error(kOrigin, "TableMismatch", index.id + " is on " + index.table + ", " + update.id + " updates " +
                                                  update.target_table);
    auto height = catalog.index_height(catalog.require_table(index.table));
    return rows_updated(update, catalog) * (2.0 + double(height));
}

double base_update_cost(const QueryDescriptor &update, const Catalog &catalog)
{
    return rows_updated(update, catalog) * 1.0;
}

UpdateCostTable::UpdateCostTable(const Workload &workload, std::span<const IndexCandidate> candidates,
                                 const Catalog &catalog)
{
    for (auto *s : workload.updates())
        base_[s->query.id] = base_update_cost(s->query, catalog);
    for (auto &a : candidates)
        add_candidate(a, workload, catalog);
}

void UpdateCostTable::add_candidate(const IndexCandidate &index, const Workload &workload, const Catalog &catalog)
{
    for (auto *s : workload.updates()) {
        base_.try_emplace(s->query.id, base_update_cost(s->query, catalog));
        if (index.table == s->query.target_table)
            ucost_[{index.id, s->query.id}] = update_cost(index, s->query, catalog);
    }
}

void UpdateCostTable::remove_candidate(const std::string &index_id)
{
    std::erase_if(ucost_, [&](auto &entry) { return entry.first.first == index_id; });
}

std::optional<double> UpdateCostTable::ucost(const std::string &index_id, const std::string &statement_id) const
{
    auto it = ucost_.find({index_id, statement_id});
    if (it == ucost_.end())
        return std::nullopt;
    return it->second;
}

double UpdateCostTable::base_cost(const std::string &statement_id) const
{
    auto it = base_.find(statement_id);
    if (it == base_.end())
        throw Error(kOrigin, "MissingUpdateCost", "no base cost for " + statement_id);
    return it->second;
}

}
