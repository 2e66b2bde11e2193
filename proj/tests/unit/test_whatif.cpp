#include <doctest.h>
#include <support.hpp>

#include <ixt/whatif.hpp>

#include <cmath>
#include <set>

using namespace ixt;
using namespace ixt::test;

namespace {

QueryDescriptor q1(const Catalog &cat) { return parse_statement("SELECT c2 FROM T1 WHERE c1 = 5", "Q1", cat); }

double cost_with(const QueryDescriptor &q, std::vector<IndexCandidate> x, const Catalog &cat)
{
    auto full = baseline_configuration(cat);
    full.insert(full.end(), x.begin(), x.end());
    return whatif_cost(q, full, cat);
}

}

TEST_SUITE("whatif")
{
    TEST_CASE("sequential scan of T1 costs its 40 pages")
    {
        auto cat = f1();
        CHECK(whatif_cost(q1(cat), {}, cat) == 40.0);
        CHECK(cost_with(q1(cat), {}, cat) == 40.0);
    }

    TEST_CASE("a non-covering index loses to the scan")
    {
        auto cat = f1();
        CHECK(cost_with(q1(cat), {a1(cat)}, cat) == 40.0);
    }

    TEST_CASE("a covering index wins: 4 + 100 x 0.2")
    {
        auto cat = f1();
        CHECK(cost_with(q1(cat), {a2(cat)}, cat) == 24.0);
        CHECK(cost_with(q1(cat), {a1(cat), a2(cat)}, cat) == 24.0);
    }

    TEST_CASE("update maintenance: 100 rows x (2 + height)")
    {
        auto cat = f1();
        auto u = parse_statement("UPDATE T1 SET c2 = 0 WHERE c1 = 5", "U1", cat);
        CHECK(rows_updated(u, cat) == 100);
        CHECK(update_cost(a1(cat), u, cat) == 600.0);
        CHECK(base_update_cost(u, cat) == 100.0);
    }

    TEST_CASE("an update with no WHERE touches every row")
    {
        auto cat = f1();
        auto u = parse_statement("UPDATE T1 SET c2 = 0", "U2", cat);
        CHECK(update_cost(a1(cat), u, cat) == 10000.0 * (2 + cat.index_height(0)));
    }

    TEST_CASE("maintenance of an index on another table is a precondition error")
    {
        auto cat = f1();
        auto u = parse_statement("UPDATE T1 SET c2 = 0 WHERE c1 = 5", "U1", cat);
        auto other = make_candidate(cat, "T2", {"d1"});
        CHECK(error_code([&] { update_cost(other, u, cat); }) == "TableMismatch");
    }

    TEST_CASE("the evaluator agrees with the one-shot function")
    {
        auto cat = f1();
        auto q = parse_statement("SELECT T1.c2, T2.d2 FROM T1, T2 WHERE T1.c1 = T2.d1 AND T2.d2 = 3 ORDER BY T1.c1",
                                 "J", cat);
        WhatIfEvaluator ev(q, cat);
        std::vector<IndexCandidate> x{a2(cat), make_candidate(cat, "T2", {"d2"}, {"d1"})};
        CHECK(ev.cost(x) == whatif_cost(q, x, cat));
        CHECK(std::isfinite(ev.cost(std::span<const IndexCandidate>{})));
    }

    TEST_CASE("order requirements: a leading key on the ordered column")
    {
        auto cat = f1();
        auto q = parse_statement("SELECT c1, c2 FROM T1 ORDER BY c1", "O", cat);
        auto profile = profile_query(q, cat);
        SlotSpec ordered{0, std::string("c1"), 1, {}};
        auto lead = make_candidate(cat, "T1", {"c1"}, {"c2"});
        auto second = make_candidate(cat, "T1", {"c2", "c1"});
        CHECK(std::isfinite(access_cost(profile, ordered, &lead, cat)));
        CHECK(std::isinf(access_cost(profile, ordered, &second, cat)));
        CHECK(std::isinf(access_cost(profile, ordered, nullptr, cat)));
    }

    TEST_CASE("a two-table join has plans for both orders and all three algorithms")
    {
        auto cat = f1();
        auto q = parse_statement("SELECT T1.c2 FROM T1, T2 WHERE T1.c1 = T2.d1", "J", cat);
        auto plans = enumerate_plans(q, cat);
        bool nl = false, hash = false, merge = false;
        std::set<std::string> firsts;
        for (auto &p : plans) {
            REQUIRE(p.slots.size() == 2);
            firsts.insert(p.join_order.front());
            for (auto a : p.join_algorithms) {
                nl |= a == JoinAlgorithm::NestedLoop;
                hash |= a == JoinAlgorithm::Hash;
                merge |= a == JoinAlgorithm::Merge;
            }
        }
        CHECK(firsts.size() == 2);
        CHECK(nl);
        CHECK(hash);
        CHECK(merge);
    }
}
