#include <doctest.h>
#include <support.hpp>

using namespace ixt;
using namespace ixt::test;

TEST_SUITE("catalog")
{
    TEST_CASE("a minimal document yields one table")
    {
        auto cat = load_catalog_text(R"({"page_size": 4096, "tables": [{"name": "T1", "row_count": 10,
            "columns": [{"name": "a", "width": 4, "distinct": 2}, {"name": "b", "width": 4, "distinct": 2},
                        {"name": "c", "width": 4, "distinct": 2}]}]})");
        CHECK(cat.table_count() == 1);
        CHECK(cat.table("T1").columns.size() == 3);
        CHECK(cat.join_selectivities().empty());
    }

    TEST_CASE("duplicate table names are rejected")
    {
        auto code = error_code([] {
            load_catalog_text(R"({"tables": [
                {"name": "T1", "row_count": 1, "columns": [{"name": "a", "width": 4, "distinct": 1}]},
                {"name": "T1", "row_count": 1, "columns": [{"name": "a", "width": 4, "distinct": 1}]}]})");
        });
        CHECK(code == "DuplicateTable");
    }

    TEST_CASE("a join selectivity must name existing columns")
    {
        auto code = error_code([] {
            load_catalog_text(R"({"tables": [{"name": "T1", "row_count": 1,
                "columns": [{"name": "c1", "width": 4, "distinct": 1}]}],
                "join_selectivities": [{"left": "T1.c1", "right": "T9.c1", "sel": 0.5}]})");
        });
        CHECK(code == "UnknownColumnInJoinSelectivity");
    }

    TEST_CASE("F1 statistics")
    {
        auto cat = f1();
        CHECK(cat.pages(0) == 40);
        CHECK(cat.index_height(0) == 4);
        CHECK(cat.join_selectivity({"T1", "c1"}, {"T2", "d1"}) == doctest::Approx(0.01));
        CHECK(cat.join_selectivity({"T2", "d1"}, {"T1", "c1"}) == doctest::Approx(0.01));
        CHECK(cat.join_selectivity({"T1", "c3"}, {"T2", "d2"}) == doctest::Approx(1.0 / 50));
    }

    TEST_CASE("index size is rows times (8 + column widths)")
    {
        auto cat = f1();
        CHECK(a1(cat).size_bytes == 120000);
        CHECK(a2(cat).size_bytes == 200000);
        CHECK(estimate_index_size(a2(cat), cat) == 200000);
    }

    TEST_CASE("candidate validation")
    {
        auto cat = f1();
        CHECK(error_code([&] { make_candidate(cat, "T9", {"c1"}); }) == "UnknownTable");
        CHECK(error_code([&] { make_candidate(cat, "T1", {"zz"}); }) == "UnknownColumn");
        CHECK(error_code([&] { make_candidate(cat, "T1", {}); }) == "EmptyKey");
        CHECK(error_code([&] { make_candidate(cat, "T1", {"c1"}, {"c1"}); }) == "OverlappingColumns");
    }

    TEST_CASE("candidate ids are content hashes")
    {
        auto cat = f1();
        CHECK(a1(cat).id == make_candidate(cat, "T1", {"c1"}).id);
        CHECK(a1(cat).id != a2(cat).id);
        CHECK(make_candidate(cat, "T1", {"c1"}, {}, true).id != a1(cat).id);
        CHECK(a2(cat).describe() == "T1(c1) INCLUDE(c2)");
    }

    TEST_CASE("JSON round trip")
    {
        auto cat = f1();
        CHECK(load_catalog(to_json(cat)) == cat);
        auto c = candidate_from_json(to_json(a2(cat)), cat);
        CHECK(c.id == a2(cat).id);
    }

    TEST_CASE("baseline is one clustered index per table on its first column")
    {
        auto base = baseline_configuration(f1());
        REQUIRE(base.size() == 2);
        CHECK(base[0].clustered);
        CHECK(base[0].key_columns == std::vector<std::string>{"c1"});
        CHECK(base[1].key_columns == std::vector<std::string>{"d1"});
    }
}
