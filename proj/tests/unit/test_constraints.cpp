#include <doctest.h>
#include <support.hpp>

#include <ixt/constraints.hpp>

#include <algorithm>

using namespace ixt;
using namespace ixt::test;

namespace {

struct Fixture
{
    Catalog cat = f1();
    Workload workload;
    std::vector<IndexCandidate> s;
    BipProblem bip;

    explicit Fixture(const std::string &text, std::vector<IndexCandidate> cands) : s(std::move(cands))
    {
        workload = parse_workload(text, cat);
        auto base = baseline_configuration(cat);
        std::map<std::string, TemplatePlanSet> caches;
        for (auto &[q, w] : workload.read_queries()) {
            (void)w;
            caches.emplace(q->id, build_templates(*q, s, cat, base));
        }
        bip = build_bip(workload, s, caches, UpdateCostTable(workload, s, cat), cat, base);
    }

    std::vector<LinConstraint> rows(const std::string &text)
    {
        return compile_constraint(parse_constraint(text), "c1", bip, workload, cat);
    }
};

}

TEST_SUITE("constraints")
{
    TEST_CASE("storage budget parses to a hard size sum")
    {
        auto ast = parse_constraint("ASSERT SUM(SIZE) <= 250000");
        CHECK_FALSE(ast.soft);
        CHECK(ast.kind == ConstraintAst::Kind::IndexAggregate);
        CHECK(ast.aggregate == Aggregate::Sum);
        CHECK(ast.measure == Measure::Size);
        CHECK(ast.cmp == DslCmp::Le);
        CHECK(ast.bound == 250000);
    }

    TEST_CASE("per-table generator over wide indexes")
    {
        auto ast = parse_constraint("FOR t IN TABLES ASSERT COUNT(1) WHERE COLS > 5 <= 2");
        CHECK(ast.kind == ConstraintAst::Kind::Generator);
        CHECK(ast.domain == Domain::Tables);
        REQUIRE(ast.body);
        CHECK(ast.body->aggregate == Aggregate::Count);
        REQUIRE(ast.body->filter.size() == 1);
        CHECK(ast.body->filter[0].attribute == "COLS");
    }

    TEST_CASE("soft size constraint")
    {
        auto ast = parse_constraint("SOFT ASSERT SUM(SIZE) <= 0");
        CHECK(ast.soft);
        Fixture fx(kQ1, {a1(f1()), a2(f1())});
        add_constraint(fx.bip, ast, "c1", fx.workload, fx.cat);
        REQUIRE(fx.bip.soft_terms().size() == 1);
        auto &term = fx.bip.soft_terms()[0];
        CHECK(term.z_terms.size() == 2);
        CHECK(fx.bip.soft_value(0, {0, 1}) == 200000);
        CHECK(fx.bip.soft_value(0, {1, 1}) == 320000);
        CHECK(fx.bip.constraints().empty());
    }

    TEST_CASE("storage budget compiles to one size-weighted row")
    {
        Fixture fx(kQ1, {a1(f1()), a2(f1())});
        auto rows = fx.rows("ASSERT SUM(SIZE) <= 250000");
        REQUIRE(rows.size() == 1);
        CHECK(rows[0].cmp == Cmp::Le);
        CHECK(rows[0].rhs == 250000);
        std::vector<double> coefs;
        for (auto &t : rows[0].terms)
            coefs.push_back(t.coef);
        std::sort(coefs.begin(), coefs.end());
        CHECK(coefs == std::vector<double>{120000, 200000});
        CHECK(rows[0].origin == OriginKind::Dba);
        CHECK(rows[0].group == "c1");
    }

    TEST_CASE("a strict count bound becomes one less")
    {
        Fixture fx(kQ1, {a1(f1()), a2(f1())});
        auto rows = fx.rows("ASSERT COUNT(1) < 2");
        REQUIRE(rows.size() == 1);
        CHECK(rows[0].rhs == 1);
        CHECK(rows[0].terms.size() == 2);
    }

    TEST_CASE("the generator unrolls per table and restricts the scope")
    {
        auto cat = f1();
        auto wide = make_candidate(cat, "T1", {"c1", "c2", "c3"});
        Fixture fx(kQ1, {a1(cat), a2(cat), wide});
        auto rows = fx.rows("FOR t IN TABLES ASSERT COUNT(1) WHERE COLS > 2 <= 0");
        std::size_t terms = 0;
        for (auto &r : rows)
            terms += r.terms.size();
        CHECK(terms == 1);
    }

    TEST_CASE("MAX(WIDTH) bounds fix wide candidates to zero")
    {
        auto cat = f1();
        Fixture fx(kQ1, {a1(cat), a2(cat)});
        auto rows = fx.rows("ASSERT MAX(WIDTH) <= 1");
        REQUIRE(rows.size() == 1);
        REQUIRE(rows[0].terms.size() == 1);
        CHECK(fx.bip.candidates()[rows[0].terms[0].var].id == a2(cat).id);
        CHECK(rows[0].rhs == 0);
    }

    TEST_CASE("the speed-up generator emits one cost row per query")
    {
        auto cat = f1();
        Fixture fx("Q1 | 1 | SELECT c2 FROM T1 WHERE c1 = 5\nQ2 | 1 | SELECT c3 FROM T1 WHERE c2 = 1\n"
                   "Q3 | 1 | SELECT d2 FROM T2 WHERE d1 = 3",
                   {a1(cat), a2(cat)});
        auto rows = fx.rows("FOR q IN W ASSERT COST(q) <= 0.75 * BASECOST(q)");
        CHECK(rows.size() == 3);
        for (auto &r : rows)
            CHECK(r.cost_of_query.has_value());
    }

    TEST_CASE("syntax and linearity errors carry the line")
    {
        try {
            parse_constraints("ASSERT COUNT(1) <= 3\nASSERT COUNT(1) <=\n");
            FAIL("expected an error");
        } catch (const Error &e) {
            CHECK(e.code() == "DslSyntaxError");
            CHECK(e.line() == std::optional<int>(2));
        }
        CHECK(error_code([] { parse_constraint("ASSERT AVG(SIZE) <= 3"); }) == "NonLinearConstruct");
        CHECK(error_code([] { parse_constraint("ASSERT SUM(SIZE) * COUNT(1) <= 3"); }) == "NonLinearConstruct");
        CHECK(error_code([] { parse_constraint("ASSERT COUNT(1) WHERE COLOR = 2 <= 3"); }) == "UnknownAttribute");
    }

    TEST_CASE("a contradiction by itself is recorded as infeasible")
    {
        Fixture fx(kQ1, {a1(f1()), a2(f1())});
        add_constraint(fx.bip, parse_constraint("ASSERT COUNT(1) >= 3"), "c1", fx.workload, fx.cat);
        CHECK(fx.bip.infeasible_constraints() == std::vector<std::string>{"c1"});
    }

    TEST_CASE("comments and blank lines are skipped")
    {
        auto list = parse_constraints("# budget\n\nASSERT SUM(SIZE) <= 10\n  \nSOFT ASSERT COUNT(1) <= 0\n");
        CHECK(list.size() == 2);
        CHECK(list[1].soft);
    }
}
