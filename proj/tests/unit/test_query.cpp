#include <doctest.h>
#include <support.hpp>

#include <ixt/query.hpp>

using namespace ixt;
using namespace ixt::test;

TEST_SUITE("queryparse")
{
    TEST_CASE("a single SELECT line")
    {
        auto w = parse_workload(kQ1, f1());
        REQUIRE(w.size() == 1);
        auto &s = w.statements()[0];
        CHECK(s.weight == 1.0);
        CHECK(s.query.id == "Q1");
        CHECK(s.query.kind == StatementKind::Select);
        CHECK(s.query.referenced_tables == std::vector<std::string>{"T1"});
        REQUIRE(s.query.eq_predicates.size() == 1);
        CHECK(s.query.eq_predicates[0].column.str() == "T1.c1");
    }

    TEST_CASE("an UPDATE carries its query shell")
    {
        auto w = parse_workload("U1 | 2.0 | UPDATE T1 SET c2 = 0 WHERE c1 = 5", f1());
        REQUIRE(w.size() == 1);
        auto &q = w.statements()[0].query;
        CHECK(w.statements()[0].weight == 2.0);
        CHECK(q.is_update());
        CHECK(q.target_table == "T1");
        REQUIRE(q.shell);
        CHECK(q.shell->kind == StatementKind::Select);
        CHECK(q.shell->referenced_tables == std::vector<std::string>{"T1"});
        REQUIRE(q.shell->eq_predicates.size() == 1);
        CHECK(q.shell->eq_predicates[0].column.column == "c1");

        auto reads = w.read_queries();
        REQUIRE(reads.size() == 1);
        CHECK(reads[0].second == 2.0);
        CHECK(w.updates().size() == 1);
    }

    TEST_CASE("a table may be referenced once")
    {
        Error *caught = nullptr;
        try {
            parse_statement("SELECT * FROM T1 a, T1 b WHERE a.c1=b.c1", "Q", f1());
        } catch (Error &e) {
            caught = &e;
            CHECK(e.code() == "MultipleTableReference");
            CHECK(e.origin() == "queryparse");
        }
        CHECK(caught != nullptr);
    }

    TEST_CASE("errors name the line")
    {
        try {
            parse_workload(std::string(kQ1) + "\nQ2 | 1 | SELEKT c1 FROM T1\n", f1());
            FAIL("expected an error");
        } catch (const Error &e) {
            CHECK(e.origin() == "queryparse");
            REQUIRE(e.line());
            CHECK(*e.line() == 2);
        }
    }

    TEST_CASE("joins, ranges, order and grouping")
    {
        auto cat = f1();
        auto q = parse_statement("SELECT T1.c2, COUNT(*) FROM T1, T2 WHERE T1.c1 = T2.d1 AND T2.d2 BETWEEN 1 AND 4 "
                                 "AND c3 > 2 GROUP BY T1.c2 ORDER BY T1.c2",
                                 "J", cat);
        CHECK(q.referenced_tables == std::vector<std::string>{"T1", "T2"});
        REQUIRE(q.join_predicates.size() == 1);
        CHECK(q.range_predicates.size() == 2);
        REQUIRE(q.order_by);
        CHECK(q.order_by->str() == "T1.c2");
        CHECK(q.group_by.size() == 1);
    }

    TEST_CASE("unknown and ambiguous names")
    {
        auto cat = f1();
        CHECK(error_code([&] { parse_statement("SELECT c1 FROM T7", "Q", cat); }) == "UnknownTable");
        CHECK(error_code([&] { parse_statement("SELECT zz FROM T1", "Q", cat); }) == "UnknownColumn");
    }

    TEST_CASE("unsupported SQL is reported, not ignored")
    {
        auto cat = f1();
        CHECK(error_code([&] { parse_statement("SELECT c1 FROM T1 WHERE c1 = 1 OR c2 = 2", "Q", cat); }) ==
              "UnsupportedFeature");
    }

    TEST_CASE("canonical SQL parses back to the same descriptor")
    {
        auto cat = f1();
        for (auto sql : {"SELECT c2 FROM T1 WHERE c1 = 5",
                         "SELECT T1.c2, T2.d2 FROM T1, T2 WHERE T1.c1 = T2.d1 AND T2.d2 < 7 ORDER BY T2.d2",
                         "UPDATE T1 SET c2 = 0 WHERE c1 = 5"}) {
            auto q = parse_statement(sql, "Q", cat);
            CHECK(parse_statement(to_sql(q), "Q", cat) == q);
        }
        auto w = parse_workload(std::string(kQ1) + "\nU1 | 2 | UPDATE T1 SET c2 = 0 WHERE c1 = 5", cat);
        CHECK(parse_workload(to_text(w), cat) == w);
    }

    TEST_CASE("duplicate statement ids")
    {
        CHECK(error_code([] { parse_workload(std::string(kQ1) + "\n" + kQ1, f1()); }) == "DuplicateStatement");
    }
}
