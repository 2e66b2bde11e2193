#include <doctest.h>
#include <support.hpp>

#include <ixt/candgen.hpp>

#include <algorithm>

using namespace ixt;
using namespace ixt::test;

namespace {

bool contains(const CandidateSet &s, const IndexCandidate &c)
{
    return s.find(c.id) != nullptr;
}

}

TEST_SUITE("candgen")
{
    TEST_CASE("Q1 yields the equality index and its covering variant")
    {
        auto cat = f1();
        auto s = generate_candidates(parse_workload(kQ1, cat), cat);
        CHECK(contains(s, a1(cat)));
        CHECK(contains(s, a2(cat)));
        for (auto &c : s.candidates())
            CHECK(c.table == "T1");
    }

    TEST_CASE("an empty workload keeps exactly the DBA candidates")
    {
        auto cat = f1();
        std::vector<IndexCandidate> dba{make_candidate(cat, "T2", {"d2"})};
        auto s = generate_candidates(Workload{}, cat, dba);
        REQUIRE(s.size() == 1);
        CHECK(s.candidates()[0].id == dba[0].id);
        CHECK(s.provenance_of(dba[0].id) == std::optional<std::string>("dba"));
    }

    TEST_CASE("a candidate suggested by two queries appears once")
    {
        auto cat = f1();
        auto w = parse_workload("Q1 | 1 | SELECT c2 FROM T1 WHERE c1 = 5\nQ2 | 1 | SELECT c2 FROM T1 WHERE c1 = 7", cat);
        auto s = generate_candidates(w, cat);
        auto n = std::count_if(s.candidates().begin(), s.candidates().end(),
                               [&](auto &c) { return c.id == a1(cat).id; });
        CHECK(n == 1);
    }

    TEST_CASE("set semantics")
    {
        auto cat = f1();
        CandidateSet s;
        CHECK(s.add(a1(cat), "dba"));
        CHECK_FALSE(s.add(a1(cat), "Q1"));
        CHECK(s.provenance_of(a1(cat).id) == std::optional<std::string>("dba"));
        CHECK(s.on_table(0).size() == 1);
        CHECK(s.on_table(1).empty());
        CHECK(s.remove(a1(cat).id));
        CHECK(s.empty());
    }

    TEST_CASE("DBA candidate documents")
    {
        auto cat = f1();
        auto list = load_dba_candidates(
            nlohmann::json::parse(R"([{"table": "T1", "key": ["c1"], "include": ["c2"]}])"), cat);
        REQUIRE(list.size() == 1);
        CHECK(list[0].id == a2(cat).id);
        CHECK(error_code([&] { load_dba_candidates(nlohmann::json::parse(R"([{"key": ["c1"]}])"), cat); }) ==
              "InvalidDbaCandidate");
        CHECK(error_code([&] { load_dba_candidates(nlohmann::json::parse(R"({"table": "T1"})"), cat); }) ==
              "InvalidDbaCandidate");
    }
}
