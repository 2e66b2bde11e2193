#include <doctest.h>
#include <support.hpp>

#include <ixt/bruteforce.hpp>

#include <algorithm>

using namespace ixt;
using namespace ixt::test;

namespace {

struct Setup
{
    Catalog cat = f1();
    Workload workload;
    std::vector<IndexCandidate> s;

    Setup(const std::string &text, std::vector<IndexCandidate> cands) : workload(parse_workload(text, cat)), s(std::move(cands)) {}
};

}

TEST_SUITE("bruteforce")
{
    TEST_CASE("F1 optimum is {a2} at 24")
    {
        Setup f(kQ1, {a1(f1()), a2(f1())});
        auto r = enumerate_optimal(f.workload, f.s, {}, f.cat);
        CHECK(r.feasible);
        CHECK(r.cost == 24.0);
        // {a1, a2} ties with {a2} since reads pick the cheaper access.
        CHECK(std::find(r.minimizers.begin(), r.minimizers.end(), std::vector<std::string>{f.s[1].id}) !=
              r.minimizers.end());
        for (auto &m : r.minimizers)
            CHECK(std::find(m.begin(), m.end(), f.s[1].id) != m.end());
    }

    TEST_CASE("an empty universe has the single subset ∅")
    {
        Setup f(kQ1, {});
        auto r = enumerate_optimal(f.workload, f.s, {}, f.cat, true);
        CHECK(r.feasible);
        CHECK(r.cost == 40.0);
        CHECK(r.minimizers == std::vector<std::vector<std::string>>{{}});
        CHECK(r.table.size() == 1);
    }

    TEST_CASE("contradictory constraints leave nothing feasible")
    {
        Setup f(kQ1, {a1(f1()), a2(f1())});
        auto hard = parse_constraints(read_file(fixture("contradictory.txt")));
        auto r = enumerate_optimal(f.workload, f.s, hard, f.cat);
        CHECK_FALSE(r.feasible);
        CHECK(r.minimizers.empty());
    }

    TEST_CASE("a budget removes a2 from the feasible set")
    {
        Setup f(kQ1, {a1(f1()), a2(f1())});
        auto hard = parse_constraints("ASSERT SUM(SIZE) <= 150000");
        auto r = enumerate_optimal(f.workload, f.s, hard, f.cat, true);
        CHECK(r.cost == 40.0);
        CHECK(r.table.size() == 2);
    }

    TEST_CASE("an index used only by an update never pays off")
    {
        auto cat = f1();
        auto upkeep = make_candidate(cat, "T1", {"c3"});
        Setup f(std::string(kQ1) + "\nU1 | 1 | UPDATE T1 SET c3 = 1 WHERE c2 = 7", {a2(cat), upkeep});
        auto r = enumerate_optimal(f.workload, f.s, {}, f.cat);
        REQUIRE(r.feasible);
        for (auto &m : r.minimizers)
            CHECK(std::find(m.begin(), m.end(), upkeep.id) == m.end());
    }

    TEST_CASE("oracle costs and constraint judgments")
    {
        Setup f(kQ1, {a1(f1()), a2(f1())});
        Oracle o(f.workload, f.s, f.cat);
        CHECK(o.candidate_count() == 2);
        CHECK(o.itcost(0) == 40.0);
        CHECK(o.itcost(1) == 40.0);
        CHECK(o.itcost(2) == 24.0);
        CHECK(o.itcost(3) == 24.0);
        CHECK(o.base_statement_cost(0) == 40.0);
        CHECK(o.ids(3) == std::vector<std::string>{f.s[0].id, f.s[1].id});
        auto budget = parse_constraint("ASSERT SUM(SIZE) <= 200000");
        CHECK(o.satisfies(budget, 2));
        CHECK_FALSE(o.satisfies(budget, 3));
        auto soft = parse_constraint("SOFT ASSERT SUM(SIZE) <= 0");
        CHECK(o.violation(soft, 2) == 200000.0);
        CHECK(o.violation(soft, 0) == 0.0);
    }

    TEST_CASE("the configuration assignment realizes ITcost")
    {
        auto cat = f1();
        auto in = f1_input(kQ1);
        in.candidates = std::vector<IndexCandidate>{a1(cat), a2(cat)};
        auto s = create_session(in);
        auto &bip = s->bip();
        auto v = assignment_from_config({a2(cat).id}, bip);
        CHECK(v.size() == bip.variable_count());
        CHECK(bip.satisfies(v));
        CHECK(bip.evaluate(v) == 24.0);
        CHECK(bip.evaluate(assignment_from_config({a1(cat).id}, bip)) == 40.0);
    }

    TEST_CASE("exact Pareto set for the soft size constraint")
    {
        Setup f(kQ1, {a1(f1()), a2(f1())});
        auto soft = parse_constraints(read_file(fixture("soft_size.txt")));
        auto front = pareto_exact(f.workload, f.s, soft, {}, f.cat);
        REQUIRE(front.size() == 2);
        std::sort(front.begin(), front.end(), [](auto &a, auto &b) { return a.objectives < b.objectives; });
        CHECK(front[0].objectives == std::vector<double>{24, 200000});
        CHECK(front[1].objectives == std::vector<double>{40, 0});
        CHECK(front[1].indexes.empty());
    }

    TEST_CASE("universe size limits")
    {
        auto cat = f1();
        std::vector<IndexCandidate> many;
        const char *cols[] = {"c1", "c2", "c3"};
        for (auto a : cols)
            for (auto b : cols)
                for (auto c : cols)
                    if (a != b && b != c && a != c)
                        many.push_back(make_candidate(cat, "T1", {a, b, c}));
        for (auto a : cols)
            for (auto b : cols)
                if (a != b)
                    many.push_back(make_candidate(cat, "T1", {a, b}));
        for (auto a : cols)
            many.push_back(make_candidate(cat, "T1", {a}));
        many.push_back(make_candidate(cat, "T2", {"d2"}));
        many.push_back(make_candidate(cat, "T2", {"d1", "d2"}));
        many.push_back(make_candidate(cat, "T2", {"d2", "d1"}));
        many.push_back(make_candidate(cat, "T2", {"d2"}, {"d1"}));
        many.push_back(make_candidate(cat, "T1", {"c1"}, {"c2"}));
        many.push_back(make_candidate(cat, "T1", {"c1"}, {"c3"}));
        REQUIRE(many.size() == 21);
        Setup f(kQ1, many);
        CHECK(error_code([&] { enumerate_optimal(f.workload, f.s, {}, f.cat); }) == "TooManyCandidates");
        std::vector<IndexCandidate> seventeen(many.begin(), many.begin() + 17);
        auto soft = parse_constraints(read_file(fixture("soft_size.txt")));
        CHECK(error_code([&] { pareto_exact(f.workload, seventeen, soft, {}, f.cat); }) == "TooManyCandidates");
    }
}
