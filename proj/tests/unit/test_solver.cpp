#include <doctest.h>
#include <support.hpp>

#include <ixt/bruteforce.hpp>
#include <ixt/solver.hpp>
#include <ixt/synth.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>

using namespace ixt;
using namespace ixt::test;

namespace {

std::unique_ptr<Session> f1_session(const std::string &constraints = "")
{
    auto cat = f1();
    auto in = f1_input(kQ1, constraints);
    in.candidates = std::vector<IndexCandidate>{a1(cat), a2(cat)};
    return create_session(in);
}

SolverOptions exact()
{
    SolverOptions o;
    o.gap_threshold = 0;
    return o;
}

std::unique_ptr<Session> small_session(const SyntheticInstance &inst)
{
    SessionInput in;
    in.catalog = to_json(inst.catalog);
    in.workload = inst.workload_text;
    in.constraints = inst.constraint_text;
    in.candidates = inst.candidates;
    return create_session(in);
}

}

TEST_SUITE("solver")
{
    TEST_CASE("a budget that fits a2 selects it")
    {
        auto s = f1_session("ASSERT SUM(SIZE) <= 200000");
        auto sol = solve(s->bip(), exact());
        CHECK(sol.status == SolveStatus::Optimal);
        CHECK(sol.chosen_ids == std::vector<std::string>{a2(f1()).id});
        CHECK(sol.objective == 24.0);
        CHECK(s->bip().satisfies(sol.assignment));
        CHECK(s->bip().evaluate(sol.assignment) == 24.0);
    }

    TEST_CASE("a budget below every size selects nothing")
    {
        auto s = f1_session("ASSERT SUM(SIZE) <= 100000");
        auto sol = solve(s->bip(), exact());
        CHECK(sol.status == SolveStatus::Optimal);
        CHECK(sol.chosen_ids.empty());
        CHECK(sol.objective == 40.0);
    }

    TEST_CASE("gap 0 matches exhaustive search on random instances")
    {
        for (std::uint64_t seed = 1; seed <= 30; ++seed) {
            auto inst = small_instance(seed);
            auto oracle = enumerate_optimal(inst.workload, inst.candidates, inst.constraints, inst.catalog);
            auto s = small_session(inst);
            auto sol = solve(s->bip(), exact());
            if (!oracle.feasible) {
                CHECK(sol.status == SolveStatus::Infeasible);
                continue;
            }
            REQUIRE(sol.status == SolveStatus::Optimal);
            CHECK(sol.objective == doctest::Approx(oracle.cost).epsilon(1e-9));
            auto ids = sol.chosen_ids;
            std::sort(ids.begin(), ids.end());
            CHECK(std::find(oracle.minimizers.begin(), oracle.minimizers.end(), ids) != oracle.minimizers.end());
        }
    }

    TEST_CASE("zero multipliers give the every-index-free bound")
    {
        auto s = f1_session();
        // One query and no update costs: the relaxation is exact.
        CHECK(lagrangian_bound(s->bip(), 0) == 24.0);
    }

    TEST_CASE("the Lagrangian bound never exceeds the optimum")
    {
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            auto inst = small_instance(seed);
            auto oracle = enumerate_optimal(inst.workload, inst.candidates, inst.constraints, inst.catalog);
            if (!oracle.feasible)
                continue;
            auto s = small_session(inst);
            double lb = lagrangian_bound(s->bip(), 200, oracle.cost);
            CHECK(lb <= oracle.cost + 1e-9 * std::max(1.0, std::abs(oracle.cost)));
        }
    }

    TEST_CASE("feasibility reports")
    {
        CHECK(check_feasibility(f1_session()->bip()).feasible);
        CHECK(check_feasibility(f1_session("ASSERT SUM(SIZE) <= 1000000")->bip()).feasible);
        auto bad = check_feasibility(f1_session(read_file(fixture("contradictory.txt")))->bip());
        CHECK_FALSE(bad.feasible);
        CHECK(bad.decided);
        CHECK(bad.conflicting == std::vector<std::string>{"c1", "c2"});
    }

    TEST_CASE("an infeasible solve names the conflicting constraints")
    {
        auto s = f1_session(read_file(fixture("contradictory.txt")));
        auto sol = solve(s->bip(), exact());
        CHECK(sol.status == SolveStatus::Infeasible);
        CHECK(sol.conflicting_constraints == std::vector<std::string>{"c1", "c2"});
    }

    TEST_CASE("progress is monotone")
    {
        BenchOptions bo;
        bo.statements = 60;
        bo.tables = 4;
        bo.seed = 3;
        auto inst = bench_instance(bo);
        auto s = small_session(inst);
        std::vector<ProgressEvent> events;
        auto o = exact();
        o.progress = [&](const ProgressEvent &e) { events.push_back(e); };
        auto sol = solve(s->bip(), o);
        REQUIRE(!events.empty());
        for (std::size_t i = 1; i < events.size(); ++i) {
            CHECK(events[i].incumbent <= events[i - 1].incumbent);
            CHECK(events[i].lower_bound >= events[i - 1].lower_bound);
            CHECK(events[i].nodes_explored >= events[i - 1].nodes_explored);
        }
        CHECK(events.back().incumbent == sol.objective);
    }

    TEST_CASE("a raised stop flag ends the search with the incumbent")
    {
        BenchOptions bo;
        bo.statements = 120;
        bo.tables = 6;
        auto inst = bench_instance(bo);
        auto s = small_session(inst);
        std::atomic<bool> stop{true};
        auto o = exact();
        o.stop = &stop;
        auto sol = solve(s->bip(), o);
        CHECK(sol.stopped_by_user);
        CHECK(sol.status != SolveStatus::Infeasible);
        CHECK(std::isfinite(sol.objective));
    }

    TEST_CASE("node bounds are admissible for their subtrees")
    {
        auto inst = small_instance(7);
        auto s = small_session(inst);
        Oracle oracle(inst.workload, inst.candidates, inst.catalog);
        auto &bip = s->bip();
        std::vector<NodeRecord> nodes;
        auto o = exact();
        o.node_observer = [&](const NodeRecord &r) { nodes.push_back(r); };
        solve(bip, o);
        REQUIRE(!nodes.empty());
        std::uint64_t subsets = std::uint64_t(1) << inst.candidates.size();
        for (auto &node : nodes) {
            double best = INFINITY;
            for (std::uint64_t mask = 0; mask != subsets; ++mask) {
                std::vector<char> chosen(bip.candidates().size(), 0);
                for (auto &id : oracle.ids(mask))
                    chosen[*bip.candidate_index(id)] = 1;
                bool inside = true;
                for (std::size_t a = 0; a != chosen.size() && inside; ++a)
                    inside = node.fixings[a] < 0 || node.fixings[a] == chosen[a];
                if (!inside)
                    continue;
                auto v = assignment_for(bip, chosen);
                if (bip.satisfies(v))
                    best = std::min(best, bip.evaluate(v));
            }
            if (std::isfinite(best))
                CHECK(node.bound <= best + 1e-9 * std::max(1.0, std::abs(best)));
        }
    }

    TEST_CASE("thread count does not change the answer")
    {
        BenchOptions bo;
        bo.statements = 80;
        bo.tables = 5;
        bo.seed = 2;
        auto inst = bench_instance(bo);
        auto s = small_session(inst);
        auto one = exact();
        auto many = exact();
        many.threads = 8;
        auto a = solve(s->bip(), one);
        auto b = solve(s->bip(), many);
        CHECK(a.objective == b.objective);
        CHECK(a.chosen_ids == b.chosen_ids);
    }

    TEST_CASE("a warm re-solve needs a previous solve")
    {
        SolverState state;
        CHECK(error_code([&] { resolve_delta(state, f1_session()->bip()); }) == "StaleState");
    }
}
