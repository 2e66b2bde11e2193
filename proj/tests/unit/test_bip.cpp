#include <doctest.h>
#include <support.hpp>

#include <ixt/bip.hpp>
#include <ixt/bruteforce.hpp>

#include <algorithm>
#include <sstream>

using namespace ixt;
using namespace ixt::test;

namespace {

struct Built
{
    Catalog cat;
    Workload workload;
    std::vector<IndexCandidate> s;
    BipProblem bip;
};

Built build(const std::string &text, std::vector<IndexCandidate> s)
{
    Built b{f1(), {}, std::move(s), {}};
    b.workload = parse_workload(text, b.cat);
    auto base = baseline_configuration(b.cat);
    std::map<std::string, TemplatePlanSet> caches;
    for (auto &[q, w] : b.workload.read_queries()) {
        (void)w;
        caches.emplace(q->id, build_templates(*q, b.s, b.cat, base));
    }
    UpdateCostTable u(b.workload, b.s, b.cat);
    for (auto &x : base)
        u.add_candidate(x, b.workload, b.cat);
    b.bip = build_bip(b.workload, b.s, caches, u, b.cat, base);
    return b;
}

std::vector<std::uint8_t> assignment_of(const BipProblem &bip, std::vector<std::string> ids)
{
    return assignment_from_config(ids, bip);
}

}

TEST_SUITE("bipmodel")
{
    TEST_CASE("Q1 over {a1, a2}: one y, three x, two z")
    {
        auto cat = f1();
        auto b = build(kQ1, {a1(cat), a2(cat)});
        CHECK(b.bip.variable_count() == 6);
        auto rows = b.bip.structural_constraints();
        CHECK(rows.size() == 4);
        auto count = [&](auto pred) { return std::count_if(rows.begin(), rows.end(), pred); };
        CHECK(count([](auto &r) { return r.cmp == Cmp::Eq && r.rhs == 1.0 && r.terms.size() == 1; }) == 1);
        CHECK(count([](auto &r) { return r.cmp == Cmp::Eq && r.terms.size() == 4; }) == 1);
        CHECK(count([](auto &r) { return r.cmp == Cmp::Le && r.rhs == 0.0; }) == 2);
        CHECK(b.bip.structural_constraint_count() == 4);
    }

    TEST_CASE("update maintenance enters the z coefficients and the constant")
    {
        auto cat = f1();
        auto b = build(std::string(kQ1) + "\nU1 | 2.0 | UPDATE T1 SET c2 = 0 WHERE c1 = 5", {a1(cat), a2(cat)});
        auto u = parse_statement("UPDATE T1 SET c2 = 0 WHERE c1 = 5", "U1", cat);
        for (std::size_t a = 0; a != 2; ++a)
            CHECK(b.bip.z_coefficient(a) == doctest::Approx(2 * update_cost(b.bip.candidates()[a], u, cat)));
        double baseline_upkeep = update_cost(baseline_configuration(cat)[0], u, cat);
        CHECK(b.bip.objective_constant() == doctest::Approx(2 * (base_update_cost(u, cat) + baseline_upkeep)));
    }

    TEST_CASE("ORDER BY: the ordered template has no NO_INDEX option")
    {
        auto cat = f1();
        auto lead = make_candidate(cat, "T1", {"c2"}, {"c3"});
        auto b = build("O | 1 | SELECT c2 FROM T1 WHERE c3 = 1 ORDER BY c2", {lead});
        auto &block = b.bip.blocks().at(0);
        REQUIRE(block.templates.size() == 2);
        int without = 0;
        for (auto &t : block.templates) {
            bool has_no_index = std::any_of(t.slots[0].options.begin(), t.slots[0].options.end(),
                                            [](auto &o) { return o.candidate == BipOption::kNoIndex; });
            without += !has_no_index;
        }
        CHECK(without == 1);
    }

    TEST_CASE("evaluate and satisfies on configuration assignments")
    {
        auto cat = f1();
        auto b = build(kQ1, {a1(cat), a2(cat)});
        auto empty = assignment_of(b.bip, {});
        auto best = assignment_of(b.bip, {a2(cat).id});
        CHECK(b.bip.satisfies(empty));
        CHECK(b.bip.satisfies(best));
        CHECK(b.bip.evaluate(empty) == 40.0);
        CHECK(b.bip.evaluate(best) == 24.0);
        CHECK(b.bip.objective_of({0, 0}) == 40.0);

        // x on a2 with z_a2 = 0 breaks the link row.
        auto broken = best;
        broken[*b.bip.candidate_index(a2(cat).id)] = 0;
        CHECK_FALSE(b.bip.satisfies(broken));
    }

    TEST_CASE("LP dump names every variable")
    {
        auto cat = f1();
        auto b = build(kQ1, {a1(cat), a2(cat)});
        std::ostringstream os;
        b.bip.dump_lp(os);
        auto text = os.str();
        CHECK(text.find("minimize") != std::string::npos);
        for (std::size_t v = 0; v != b.bip.variable_count(); ++v)
            CHECK(text.find(b.bip.variable_name(v)) != std::string::npos);
    }

    TEST_CASE("two clustered candidates on one table get an at-most-one row")
    {
        auto cat = f1();
        auto b = build(kQ1, {make_candidate(cat, "T1", {"c2"}, {}, true), make_candidate(cat, "T1", {"c3"}, {}, true)});
        auto &rows = b.bip.constraints();
        auto it = std::find_if(rows.begin(), rows.end(), [](auto &r) { return r.origin == OriginKind::Clustered; });
        REQUIRE(it != rows.end());
        CHECK(it->cmp == Cmp::Le);
        CHECK(it->rhs == 1.0);
        CHECK(it->terms.size() == 2);
    }

    TEST_CASE("scalarization weights are validated")
    {
        auto cat = f1();
        auto b = build(kQ1, {a1(cat), a2(cat)});
        std::vector<double> bad{-0.5};
        CHECK(error_code([&] { b.bip.scalarized(bad); }) == "WeightOutOfRange");
    }

    TEST_CASE("a missing template cache is reported")
    {
        auto cat = f1();
        auto w = parse_workload(kQ1, cat);
        std::vector<IndexCandidate> s{a1(cat)};
        std::map<std::string, TemplatePlanSet> none;
        UpdateCostTable u(w, s, cat);
        CHECK(error_code([&] { build_bip(w, s, none, u, cat); }) == "MissingTemplateCache");
    }
}
