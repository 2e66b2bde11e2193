#include <doctest.h>
#include <support.hpp>

#include <ixt/bruteforce.hpp>
#include <ixt/pareto.hpp>
#include <ixt/synth.hpp>

#include <algorithm>

using namespace ixt;
using namespace ixt::test;

namespace {

std::unique_ptr<Session> soft_session()
{
    auto cat = f1();
    auto in = f1_input(kQ1, read_file(fixture("soft_size.txt")));
    in.candidates = std::vector<IndexCandidate>{a1(cat), a2(cat)};
    return create_session(in);
}

bool has_point(const std::vector<ParetoPoint> &points, double cost, double violation)
{
    return std::any_of(points.begin(), points.end(), [&](auto &p) {
        return p.objectives.size() == 2 && p.objectives[0] == doctest::Approx(cost) &&
               p.objectives[1] == doctest::Approx(violation);
    });
}

}

TEST_SUITE("pareto")
{
    TEST_CASE("the soft size constraint trades 24 at 200000 against 40 at 0")
    {
        auto s = soft_session();
        auto points = chord(*s);
        CHECK(points.size() == 2);
        CHECK(has_point(points, 24, 200000));
        CHECK(has_point(points, 40, 0));
        for (auto &p : points) {
            CHECK(p.lambda.size() == 2);
            CHECK(p.status == SolveStatus::Optimal);
        }
    }

    TEST_CASE("points are mutually non-dominated")
    {
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            SmallInstanceOptions o;
            o.max_candidates = 8;
            auto inst = small_instance(seed, o);
            SessionInput in;
            in.catalog = to_json(inst.catalog);
            in.workload = inst.workload_text;
            in.candidates = inst.candidates;
            in.constraints = "SOFT ASSERT SUM(SIZE) <= 0";
            auto s = create_session(in);
            auto points = chord(*s);
            REQUIRE(!points.empty());
            for (auto &p : points)
                for (auto &q : points) {
                    bool dominates = p.objectives[0] <= q.objectives[0] && p.objectives[1] <= q.objectives[1] &&
                                     (p.objectives[0] < q.objectives[0] || p.objectives[1] < q.objectives[1]);
                    CHECK_FALSE(dominates);
                }
        }
    }

    TEST_CASE("chord needs a soft constraint")
    {
        auto cat = f1();
        auto in = f1_input(kQ1);
        in.candidates = std::vector<IndexCandidate>{a1(cat), a2(cat)};
        auto s = create_session(in);
        CHECK(error_code([&] { chord(*s); }) == "NoSoftConstraints");
    }

    TEST_CASE("epsilon must be positive")
    {
        auto s = soft_session();
        for (double eps : {0.0, -0.5}) {
            ChordOptions o;
            o.epsilon = eps;
            CHECK(error_code([&] { chord(*s, o); }) == "InvalidEpsilon");
        }
    }

    TEST_CASE("JSON and SVG renderings")
    {
        auto points = chord(*soft_session());
        auto j = to_json(points);
        REQUIRE(j.is_array());
        CHECK(j.size() == points.size());
        auto svg = pareto_svg(points);
        CHECK(svg.find("<svg") != std::string::npos);
        CHECK(std::count(svg.begin(), svg.end(), '\n') > 0);
        CHECK(svg.find("<circle") != std::string::npos);
    }
}
