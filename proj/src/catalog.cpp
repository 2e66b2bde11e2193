#include <ixt/catalog.hpp>

#include <ixt/error.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <unordered_set>

namespace ixt {

namespace {

constexpr const char *kOrigin = "catalog";

[[noreturn]] void fail(const char *code, const std::string &message)
{
    throw Error(kOrigin, code, message);
}

ColumnRef parse_column_ref(const std::string &text)
{
    auto dot = text.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == text.size())
        fail("SchemaError", "expected `table.column`, got `" + text + "`");
    return {text.substr(0, dot), text.substr(dot + 1)};
}

template<typename T>
T field(const nlohmann::json &object, const char *name, const std::string &where)
{
    if (!object.is_object() || !object.contains(name))
        fail("SchemaError", where + ": missing field `" + name + "`");
    try {
        return object.at(name).get<T>();
    } catch (const nlohmann::json::exception &) {
        fail("SchemaError", where + ": field `" + name + "` has the wrong type");
    }
}

}

/*======================================================================================================================
 * TableStats
 *====================================================================================================================*/

std::optional<std::size_t> TableStats::column_index(std::string_view column) const
{
    for (std::size_t i = 0; i != columns.size(); ++i)
        if (columns[i].name == column)
            return i;
    return std::nullopt;
}

const ColumnStats & TableStats::column(std::string_view column) const
{
    auto idx = column_index(column);
    if (!idx)
        throw Error(kOrigin, "UnknownColumn", name + "." + std::string(column));
    return columns[*idx];
}

int TableStats::row_width() const
{
    int width = 0;
    for (auto &c : columns)
        width += c.width;
    return width;
}

/*======================================================================================================================
 * Catalog
 *====================================================================================================================*/

Catalog::Catalog(int page_size, std::vector<TableStats> tables, std::vector<JoinSelectivity> join_selectivities)
    : page_size_(page_size)
    , tables_(std::move(tables))
{
    if (page_size_ <= 0)
        fail("InvalidPageSize", std::to_string(page_size_));

    std::unordered_set<std::string> seen_tables;
    for (auto &t : tables_) {
        if (!seen_tables.insert(t.name).second)
            fail("DuplicateTable", t.name);
        if (t.row_count < 0)
            fail("NegativeRowCount", t.name);
        if (t.columns.empty())
            fail("SchemaError", t.name + " has no columns");
        std::unordered_set<std::string> seen_columns;
        for (auto &c : t.columns) {
            if (!seen_columns.insert(c.name).second)
                fail("DuplicateColumn", t.name + "." + c.name);
            if (c.width <= 0)
                fail("NonPositiveWidth", t.name + "." + c.name);
            if (c.distinct < 1 || c.distinct > std::max<std::int64_t>(t.row_count, 1))
                fail("InvalidDistinct", t.name + "." + c.name);
        }
    }

    for (auto &js : join_selectivities) {
        for (auto *ref : {&js.left, &js.right}) {
            auto t = table_index(ref->table);
            if (!t || !tables_[*t].column_index(ref->column))
                fail("UnknownColumnInJoinSelectivity", ref->str());
        }
        if (!(js.selectivity > 0.0 && js.selectivity <= 1.0))
            fail("InvalidSelectivity", js.left.str() + " = " + js.right.str());
        if (js.right < js.left)
            std::swap(js.left, js.right);
        join_selectivities_.push_back(js);
    }
    std::sort(join_selectivities_.begin(), join_selectivities_.end(), [](auto &a, auto &b) {
        return std::tie(a.left, a.right) < std::tie(b.left, b.right);
    });
}

std::optional<std::size_t> Catalog::table_index(std::string_view name) const
{
    for (std::size_t i = 0; i != tables_.size(); ++i)
        if (tables_[i].name == name)
            return i;
    return std::nullopt;
}

const TableStats & Catalog::table(std::string_view name) const
{
    return tables_[require_table(name)];
}

std::size_t Catalog::require_table(std::string_view name) const
{
    auto idx = table_index(name);
    if (!idx)
        fail("UnknownTable", std::string(name));
    return *idx;
}

double Catalog::join_selectivity(const ColumnRef &left, const ColumnRef &right) const
{
    ColumnRef a = left, b = right;
    if (b < a)
        std::swap(a, b);
    for (auto &js : join_selectivities_)
        if (js.left == a && js.right == b)
            return js.selectivity;
    auto da = table(a.table).column(a.column).distinct;
    auto db = table(b.table).column(b.column).distinct;
    return 1.0 / double(std::max(da, db));
}

double Catalog::pages(std::size_t t) const
{
    auto &stats = tables_.at(t);
    return std::ceil(double(stats.row_count) * double(stats.row_width()) / double(page_size_));
}

int Catalog::index_height(std::size_t t) const
{
    auto rows = tables_.at(t).row_count;
    if (rows <= 1)
        return 1;
    return std::max(1, int(std::ceil(std::log10(double(rows)))));
}

Catalog load_catalog(const nlohmann::json &document)
{
    if (!document.is_object())
        fail("SchemaError", "catalog document must be a JSON object");
    int page_size = 4096;
    if (document.contains("page_size"))
        page_size = field<int>(document, "page_size", "catalog");

    std::vector<TableStats> tables;
    auto jtables = field<nlohmann::json>(document, "tables", "catalog");
    if (!jtables.is_array())
        fail("SchemaError", "`tables` must be an array");
    for (auto &jt : jtables) {
        TableStats t;
        t.name = field<std::string>(jt, "name", "table");
        t.row_count = field<std::int64_t>(jt, "row_count", "table " + t.name);
        auto jcols = field<nlohmann::json>(jt, "columns", "table " + t.name);
        if (!jcols.is_array())
            fail("SchemaError", "table " + t.name + ": `columns` must be an array");
        for (auto &jc : jcols) {
            ColumnStats c;
            c.name = field<std::string>(jc, "name", "column of " + t.name);
            c.width = field<int>(jc, "width", t.name + "." + c.name);
            c.distinct = field<std::int64_t>(jc, "distinct", t.name + "." + c.name);
            t.columns.push_back(std::move(c));
        }
        tables.push_back(std::move(t));
    }

    std::vector<JoinSelectivity> joins;
    if (document.contains("join_selectivities")) {
        for (auto &jj : document.at("join_selectivities")) {
            JoinSelectivity js;
            js.left = parse_column_ref(field<std::string>(jj, "left", "join selectivity"));
            js.right = parse_column_ref(field<std::string>(jj, "right", "join selectivity"));
            js.selectivity = field<double>(jj, "sel", "join selectivity");
            joins.push_back(std::move(js));
        }
    }
    return Catalog(page_size, std::move(tables), std::move(joins));
}

Catalog load_catalog_text(std::string_view text)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error &e) {
        fail("SchemaError", std::string("invalid JSON: ") + e.what());
    }
    return load_catalog(doc);
}

nlohmann::json to_json(const Catalog &catalog)
{
    nlohmann::json doc;
    doc["page_size"] = catalog.page_size();
    doc["tables"] = nlohmann::json::array();
    for (auto &t : catalog.tables()) {
        nlohmann::json jt{{"name", t.name}, {"row_count", t.row_count}, {"columns", nlohmann::json::array()}};
        for (auto &c : t.columns)
            jt["columns"].push_back({{"name", c.name}, {"width", c.width}, {"distinct", c.distinct}});
        doc["tables"].push_back(std::move(jt));
    }
    doc["join_selectivities"] = nlohmann::json::array();
    for (auto &js : catalog.join_selectivities())
        doc["join_selectivities"].push_back(
            {{"left", js.left.str()}, {"right", js.right.str()}, {"sel", js.selectivity}});
    return doc;
}

/*======================================================================================================================
 * IndexCandidate
 *====================================================================================================================*/

bool IndexCandidate::same_structure(const IndexCandidate &other) const
{
    return table == other.table and key_columns == other.key_columns and
           include_columns == other.include_columns and clustered == other.clustered;
}

std::string IndexCandidate::describe() const
{
    auto join = [](const std::vector<std::string> &cols) {
        std::string out;
        for (auto &c : cols) {
            if (!out.empty())
                out += ",";
            out += c;
        }
        return out;
    };
    std::string out = table + "(" + join(key_columns) + ")";
    if (!include_columns.empty())
        out += " INCLUDE(" + join(include_columns) + ")";
    if (clustered)
        out += " CLUSTERED";
    return out;
}

std::string candidate_id(std::string_view table, const std::vector<std::string> &keys,
                         const std::vector<std::string> &includes, bool clustered)
{
    // FNV-1a over a canonical, unambiguous rendering.
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](std::string_view s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 1099511628211ull;
        }
        h ^= 0xff;
        h *= 1099511628211ull;
    };
    mix(table);
    mix("K");
    for (auto &k : keys)
        mix(k);
    mix("I");
    for (auto &i : includes)
        mix(i);
    mix(clustered ? "C" : "N");
    char buf[20];
    std::snprintf(buf, sizeof buf, "ix%016llx", static_cast<unsigned long long>(h));
    return buf;
}

IndexCandidate make_candidate(const Catalog &catalog, std::string table, std::vector<std::string> keys,
                              std::vector<std::string> includes, bool clustered)
{
    IndexCandidate a;
    a.table_ordinal = catalog.require_table(table);
    auto &stats = catalog.table(a.table_ordinal);
    if (keys.empty())
        fail("EmptyKey", "index on " + table + " has no key columns");
    std::set<std::string> seen;
    for (auto *list : {&keys, &includes}) {
        for (auto &col : *list) {
            auto ord = stats.column_index(col);
            if (!ord)
                fail("UnknownColumn", table + "." + col);
            if (!seen.insert(col).second)
                fail("OverlappingColumns", table + "." + col + " appears twice in the index definition");
            (list == &keys ? a.key_ordinals : a.include_ordinals).push_back(*ord);
        }
    }
    a.id = candidate_id(table, keys, includes, clustered);
    a.table = std::move(table);
    a.key_columns = std::move(keys);
    a.include_columns = std::move(includes);
    a.clustered = clustered;
    a.size_bytes = estimate_index_size(a, catalog);
    return a;
}

double estimate_index_size(const IndexCandidate &index, const Catalog &catalog)
{
    auto &stats = catalog.table(index.table);
    double width = 8;
    for (auto *list : {&index.key_columns, &index.include_columns})
        for (auto &col : *list)
            width += stats.column(col).width;
    return double(stats.row_count) * width;
}

nlohmann::json to_json(const IndexCandidate &index)
{
    return {{"id", index.id},
            {"table", index.table},
            {"key", index.key_columns},
            {"include", index.include_columns},
            {"clustered", index.clustered},
            {"size", index.size_bytes}};
}

IndexCandidate candidate_from_json(const nlohmann::json &spec, const Catalog &catalog)
{
    auto table = field<std::string>(spec, "table", "candidate");
    auto keys = field<std::vector<std::string>>(spec, "key", "candidate on " + table);
    std::vector<std::string> includes;
    if (spec.contains("include"))
        includes = field<std::vector<std::string>>(spec, "include", "candidate on " + table);
    bool clustered = spec.contains("clustered") ? field<bool>(spec, "clustered", "candidate on " + table) : false;
    return make_candidate(catalog, std::move(table), std::move(keys), std::move(includes), clustered);
}

std::vector<IndexCandidate> baseline_configuration(const Catalog &catalog)
{
    std::vector<IndexCandidate> out;
    for (auto &t : catalog.tables())
        out.push_back(make_candidate(catalog, t.name, {t.columns.front().name}, {}, true));
    return out;
}

}
