#include <ixt/synth.hpp>

#include <ixt/candgen.hpp>

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

namespace ixt {

namespace {

std::size_t pick(std::mt19937_64 &rng, std::size_t lo, std::size_t hi)
{
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

bool chance(std::mt19937_64 &rng, double p)
{
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

std::string qualified(const Catalog &catalog, std::size_t t, std::size_t c)
{
    auto &table = catalog.table(t);
    return table.name + "." + table.columns[c].name;
}

/// Picks up to `count` distinct tables in random order.
std::vector<std::size_t> pick_tables(std::mt19937_64 &rng, const Catalog &catalog, std::size_t count)
{
    std::vector<std::size_t> all(catalog.table_count());
    std::iota(all.begin(), all.end(), 0);
    std::shuffle(all.begin(), all.end(), rng);
    all.resize(std::min(count, all.size()));
    return all;
}

std::string select_sql(std::mt19937_64 &rng, const Catalog &catalog, bool joins, bool orders)
{
    std::size_t n = joins ? pick(rng, 1, std::min<std::size_t>(3, catalog.table_count())) : 1;
    if (n > 1 && !chance(rng, 0.5))
        n = 1;
    auto tables = pick_tables(rng, catalog, n);

    std::vector<std::string> projections, where;
    std::set<std::string> used;
    for (auto t : tables) {
        auto &table = catalog.table(t);
        std::size_t cols = table.columns.size();
        std::size_t proj = pick(rng, 0, std::min<std::size_t>(2, cols));
        for (std::size_t i = 0; i != proj; ++i) {
            auto col = qualified(catalog, t, pick(rng, 0, cols - 1));
            if (std::find(projections.begin(), projections.end(), col) == projections.end())
                projections.push_back(col);
        }
        std::size_t eqs = pick(rng, 0, std::min<std::size_t>(2, cols));
        for (std::size_t i = 0; i != eqs; ++i) {
            auto col = qualified(catalog, t, pick(rng, 0, cols - 1));
            if (used.insert(col).second)
                where.push_back(col + " = " + std::to_string(pick(rng, 1, 50)));
        }
        if (chance(rng, 0.4)) {
            auto col = qualified(catalog, t, pick(rng, 0, cols - 1));
            if (used.insert(col).second) {
                if (chance(rng, 0.5))
                    where.push_back(col + " < " + std::to_string(pick(rng, 10, 500)));
                else
                    where.push_back(col + " BETWEEN " + std::to_string(pick(rng, 1, 10)) + " AND " +
                                    std::to_string(pick(rng, 20, 90)));
            }
        }
    }
    for (std::size_t i = 1; i < tables.size(); ++i) {
        auto left = tables[pick(rng, 0, i - 1)];
        auto right = tables[i];
        auto lc = pick(rng, 0, catalog.table(left).columns.size() - 1);
        auto rc = pick(rng, 0, catalog.table(right).columns.size() - 1);
        where.push_back(qualified(catalog, left, lc) + " = " + qualified(catalog, right, rc));
    }
    if (projections.empty())
        projections.push_back(qualified(catalog, tables[0], 0));

    std::ostringstream sql;
    sql << "SELECT ";
    for (std::size_t i = 0; i != projections.size(); ++i)
        sql << (i ? ", " : "") << projections[i];
    sql << " FROM ";
    for (std::size_t i = 0; i != tables.size(); ++i)
        sql << (i ? ", " : "") << catalog.table(tables[i]).name;
    if (!where.empty()) {
        sql << " WHERE ";
        for (std::size_t i = 0; i != where.size(); ++i)
            sql << (i ? " AND " : "") << where[i];
    }
    if (orders && chance(rng, 0.3)) {
        auto t = tables[pick(rng, 0, tables.size() - 1)];
        sql << " ORDER BY " << qualified(catalog, t, pick(rng, 0, catalog.table(t).columns.size() - 1));
    }
    return sql.str();
}

std::string update_sql(std::mt19937_64 &rng, const Catalog &catalog)
{
    auto t = pick(rng, 0, catalog.table_count() - 1);
    auto &table = catalog.table(t);
    std::size_t cols = table.columns.size();
    auto set_col = pick(rng, 0, cols - 1);
    std::ostringstream sql;
    sql << "UPDATE " << table.name << " SET " << table.columns[set_col].name << " = " << pick(rng, 0, 9);
    if (chance(rng, 0.85)) {
        auto w = pick(rng, 0, cols - 1);
        sql << " WHERE " << table.columns[w].name << " = " << pick(rng, 1, 50);
    }
    return sql.str();
}

}

Catalog random_catalog(std::mt19937_64 &rng, std::size_t tables, std::size_t min_columns, std::size_t max_columns,
                       std::int64_t min_rows, std::int64_t max_rows)
{
    std::vector<TableStats> stats;
    std::uniform_real_distribution<double> log_rows(std::log10(double(min_rows)), std::log10(double(max_rows)));
    for (std::size_t t = 0; t != tables; ++t) {
        TableStats ts;
        ts.name = "T" + std::to_string(t + 1);
        ts.row_count = std::int64_t(std::pow(10.0, log_rows(rng)));
        std::size_t cols = pick(rng, min_columns, max_columns);
        for (std::size_t c = 0; c != cols; ++c) {
            ColumnStats cs;
            cs.name = "c" + std::to_string(c + 1);
            static const int widths[] = {4, 4, 8, 8, 16, 32};
            cs.width = widths[pick(rng, 0, 5)];
            double frac = std::pow(10.0, std::uniform_real_distribution<double>(-4.0, 0.0)(rng));
            cs.distinct = std::clamp<std::int64_t>(std::int64_t(double(ts.row_count) * frac), 1, ts.row_count);
            if (c == 0)
                cs.distinct = ts.row_count;
            ts.columns.push_back(cs);
        }
        stats.push_back(std::move(ts));
    }
    std::vector<JoinSelectivity> sels;
    for (std::size_t t = 0; t + 1 < tables; ++t) {
        if (!chance(rng, 0.5))
            continue;
        auto &a = stats[t];
        auto &b = stats[t + 1];
        ColumnRef l{a.name, a.columns[pick(rng, 0, a.columns.size() - 1)].name};
        ColumnRef r{b.name, b.columns[pick(rng, 0, b.columns.size() - 1)].name};
        double sel = std::pow(10.0, std::uniform_real_distribution<double>(-5.0, -1.0)(rng));
        sels.push_back({l, r, sel});
    }
    return Catalog(4096, std::move(stats), std::move(sels));
}

std::string random_workload_text(std::mt19937_64 &rng, const Catalog &catalog, std::size_t statements,
                                 double update_fraction, bool joins, bool orders, const std::string &prefix)
{
    std::ostringstream out;
    for (std::size_t i = 0; i != statements; ++i) {
        bool update = chance(rng, update_fraction);
        double weight = double(pick(rng, 1, 10)) / 2.0;
        out << (update ? "U" : prefix) << (i + 1) << " | " << weight << " | "
            << (update ? update_sql(rng, catalog) : select_sql(rng, catalog, joins, orders)) << "\n";
    }
    return out.str();
}

SyntheticInstance small_instance(std::uint64_t seed, const SmallInstanceOptions &options)
{
    std::mt19937_64 rng(seed);
    SyntheticInstance inst;
    inst.seed = seed;
    inst.catalog = random_catalog(rng, pick(rng, 1, options.max_tables), 3, 5, 1000, 200000);
    std::size_t n = pick(rng, 1, options.max_statements);
    inst.workload_text = random_workload_text(rng, inst.catalog, n, options.updates ? 0.25 : 0.0, options.joins,
                                              options.orders);
    inst.workload = parse_workload(inst.workload_text, inst.catalog);

    std::vector<IndexCandidate> dba;
    if (chance(rng, 0.3)) {
        auto t = pick(rng, 0, inst.catalog.table_count() - 1);
        auto &table = inst.catalog.table(t);
        auto c = pick(rng, 1, table.columns.size() - 1);
        dba.push_back(make_candidate(inst.catalog, table.name, {table.columns[c].name}, {}, true));
    }
    auto generated = generate_candidates(inst.workload, inst.catalog, dba);
    inst.candidates = generated.candidates();
    std::shuffle(inst.candidates.begin(), inst.candidates.end(), rng);
    if (inst.candidates.size() > options.max_candidates)
        inst.candidates.resize(options.max_candidates);
    std::sort(inst.candidates.begin(), inst.candidates.end(), [](auto &a, auto &b) { return a.id < b.id; });

    if (options.constraints) {
        double total = 0;
        for (auto &c : inst.candidates)
            total += c.size_bytes;
        std::ostringstream text;
        if (chance(rng, 0.7)) {
            double frac = std::uniform_real_distribution<double>(0.1, 0.9)(rng);
            text << "ASSERT SUM(SIZE) <= " << std::int64_t(total * frac) << "\n";
        }
        switch (pick(rng, 0, 5)) {
            case 0: text << "ASSERT COUNT(1) WHERE COLS > 1 <= 1\n"; break;
            case 1: text << "FOR t IN TABLES ASSERT COUNT(1) <= 2\n"; break;
            case 2: text << "FOR q IN W ASSERT COST(q) <= 0.9 * BASECOST(q)\n"; break;
            case 3: text << "ASSERT MAX(WIDTH) <= 2\n"; break;
            case 4: text << "ASSERT COUNT(*) >= 1\n"; break;
            default: break;
        }
        inst.constraint_text = text.str();
        inst.constraints = parse_constraints(inst.constraint_text);
    }
    return inst;
}

SyntheticInstance bench_instance(const BenchOptions &options)
{
    std::mt19937_64 rng(options.seed);
    SyntheticInstance inst;
    inst.seed = options.seed;
    inst.catalog = random_catalog(rng, options.tables, options.min_columns, options.max_columns, 10000, 10000000);
    inst.workload_text =
        random_workload_text(rng, inst.catalog, options.statements, options.update_fraction, true, true);
    inst.workload = parse_workload(inst.workload_text, inst.catalog);
    inst.candidates = generate_candidates(inst.workload, inst.catalog).candidates();
    return inst;
}

}
