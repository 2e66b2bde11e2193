#include <ixt/candgen.hpp>

#include <ixt/error.hpp>

#include <algorithm>

namespace ixt {

namespace {

constexpr const char *kOrigin = "candgen";

void push_unique(std::vector<std::string> &list, const std::string &value)
{
    if (std::find(list.begin(), list.end(), value) == list.end())
        list.push_back(value);
}

/// Columns of `table` used by the query in each predicate role, catalog order.
struct ColumnRoles
{
    std::vector<std::string> eq, range, join, referenced;
    std::optional<std::string> order;
};

ColumnRoles column_roles(const QueryDescriptor &q, const TableStats &table, const Catalog &catalog)
{
    ColumnRoles roles;
    for (auto &col : table.columns) {
        ColumnRef ref{table.name, col.name};
        for (auto &p : q.eq_predicates)
            if (p.column == ref)
                push_unique(roles.eq, col.name);
        for (auto &p : q.range_predicates)
            if (p.column == ref)
                push_unique(roles.range, col.name);
        for (auto &j : q.join_predicates)
            if (j.left == ref || j.right == ref)
                push_unique(roles.join, col.name);
    }
    if (q.order_by && q.order_by->table == table.name)
        roles.order = q.order_by->column;
    roles.referenced = q.referenced_columns(table.name, catalog);
    return roles;
}

}

/*======================================================================================================================
 * CandidateSet
 *====================================================================================================================*/

bool CandidateSet::add(IndexCandidate candidate, std::string provenance)
{
    for (auto &c : candidates_)
        if (c.same_structure(candidate))
            return false;
    candidates_.push_back(std::move(candidate));
    provenance_.push_back(std::move(provenance));
    return true;
}

bool CandidateSet::remove(const std::string &id)
{
    for (std::size_t i = 0; i != candidates_.size(); ++i)
        if (candidates_[i].id == id) {
            candidates_.erase(candidates_.begin() + std::ptrdiff_t(i));
            provenance_.erase(provenance_.begin() + std::ptrdiff_t(i));
            return true;
        }
    return false;
}

const IndexCandidate * CandidateSet::find(const std::string &id) const
{
    for (auto &c : candidates_)
        if (c.id == id)
            return &c;
    return nullptr;
}

std::optional<std::string> CandidateSet::provenance_of(const std::string &id) const
{
    for (std::size_t i = 0; i != candidates_.size(); ++i)
        if (candidates_[i].id == id)
            return provenance_[i];
    return std::nullopt;
}

std::vector<const IndexCandidate *> CandidateSet::on_table(std::size_t table) const
{
    std::vector<const IndexCandidate *> out;
    for (auto &c : candidates_)
        if (c.table_ordinal == table)
            out.push_back(&c);
    return out;
}

/*======================================================================================================================
 * Generation
 *====================================================================================================================*/

CandidateSet generate_candidates(const Workload &workload, const Catalog &catalog, std::span<const IndexCandidate> dba)
{
    CandidateSet set;
    for (auto &a : dba) {
        IndexCandidate checked;
        try {
            checked = make_candidate(catalog, a.table, a.key_columns, a.include_columns, a.clustered);
        } catch (const Error &e) {
            throw Error(kOrigin, "InvalidDbaCandidate", a.id + ": " + e.what());
        }
        set.add(std::move(checked), "dba");
    }

    auto baseline = baseline_configuration(catalog);
    auto propose = [&](const std::string &table, std::vector<std::string> keys, std::vector<std::string> includes,
                       bool clustered, const char *heuristic) {
        auto a = make_candidate(catalog, table, std::move(keys), std::move(includes), clustered);
        for (auto &b : baseline)
            if (b.same_structure(a))
                return;
        set.add(std::move(a), heuristic);
    };

    for (auto [q, weight] : workload.read_queries()) {
        (void)weight;
        for (auto &name : q->referenced_tables) {
            auto &table = catalog.table(name);
            auto roles = column_roles(*q, table, catalog);

            std::vector<std::string> singles;
            for (auto *list : {&roles.eq, &roles.range, &roles.join})
                for (auto &c : *list)
                    push_unique(singles, c);
            if (roles.order)
                push_unique(singles, *roles.order);
            for (auto &c : singles)
                propose(name, {c}, {}, false, "single-column");

            std::vector<std::vector<std::string>> composites;
            for (auto &r : roles.range) {
                if (std::find(roles.eq.begin(), roles.eq.end(), r) != roles.eq.end())
                    continue;
                auto keys = roles.eq;
                keys.push_back(r);
                composites.push_back(std::move(keys));
            }
            if (composites.empty() && !roles.eq.empty())
                composites.push_back(roles.eq);
            for (auto &keys : composites)
                propose(name, keys, {}, false, "eq-range-composite");

            if (roles.order) {
                std::vector<std::string> keys{*roles.order};
                for (auto &c : roles.eq)
                    push_unique(keys, c);
                propose(name, keys, {}, false, "order-leading");
            }

            for (auto &keys : composites) {
                std::vector<std::string> includes;
                for (auto &c : roles.referenced)
                    if (std::find(keys.begin(), keys.end(), c) == keys.end())
                        includes.push_back(c);
                if (!includes.empty())
                    propose(name, keys, includes, false, "covering");
            }

            if (!roles.eq.empty()) {
                auto best = *std::max_element(roles.eq.begin(), roles.eq.end(), [&](auto &x, auto &y) {
                    return table.column(x).distinct < table.column(y).distinct;
                });
                propose(name, {best}, {}, true, "clustered");
            }
        }
    }
    return set;
}

std::vector<IndexCandidate> load_dba_candidates(const nlohmann::json &document, const Catalog &catalog)
{
    if (!document.is_array())
        throw Error(kOrigin, "InvalidDbaCandidate", "DBA candidate document must be a JSON array");
    std::vector<IndexCandidate> out;
    for (std::size_t i = 0; i != document.size(); ++i) {
        try {
            out.push_back(candidate_from_json(document[i], catalog));
        } catch (const Error &e) {
            throw Error(kOrigin, "InvalidDbaCandidate", "#" + std::to_string(i) + ": " + e.what());
        }
    }
    return out;
}

}
