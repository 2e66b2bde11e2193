// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance            run every criterion
//   acceptance 1 6 9      run a subset

#include <ixt/advisor.hpp>
#include <ixt/bruteforce.hpp>
#include <ixt/cli.hpp>
#include <ixt/pareto.hpp>
#include <ixt/synth.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace ixt;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

bool same(double a, double b, double rel = 1e-9)
{
    if (std::isinf(a) || std::isinf(b))
        return a == b;
    return std::abs(a - b) <= rel * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

struct Outcome
{
    bool pass = true;
    std::ostringstream detail;
    std::vector<std::string> failures;

    void fail(const std::string &why)
    {
        pass = false;
        if (failures.size() < 5)
            failures.push_back(why);
    }
};

std::unique_ptr<Session> session_for(const SyntheticInstance &inst, const std::string &constraints)
{
    SessionInput in;
    in.catalog = to_json(inst.catalog);
    in.workload = inst.workload_text;
    in.constraints = constraints;
    in.candidates = inst.candidates;
    in.id = "acc-" + std::to_string(inst.seed);
    return create_session(in);
}

SolverOptions exact(unsigned threads = 1)
{
    SolverOptions o;
    o.gap_threshold = 0;
    o.threads = threads;
    return o;
}

struct Solved
{
    bool feasible = false;
    double objective = 0;
    std::vector<std::string> indexes;
};

Solved solve_session(Session &s, const SolverOptions &o)
{
    try {
        auto rec = recommend(s, o);
        return {true, rec.objective, rec.indexes};
    } catch (const InfeasibleProblem &) {
        return {};
    }
}

/// Solver at gap 0 against exhaustive enumeration under the same hard constraints.
void compare_with_oracle(const SyntheticInstance &inst, const std::string &constraints, Outcome &out,
                         unsigned threads = 1, Solved *solved = nullptr)
{
    auto hard = parse_constraints(constraints);
    auto oracle = enumerate_optimal(inst.workload, inst.candidates, hard, inst.catalog);
    auto session = session_for(inst, constraints);
    auto got = solve_session(*session, exact(threads));
    if (solved)
        *solved = got;
    std::ostringstream why;
    why << "seed " << inst.seed;
    if (got.feasible != oracle.feasible) {
        why << ": solver " << (got.feasible ? "feasible" : "infeasible") << ", oracle "
            << (oracle.feasible ? "feasible" : "infeasible");
        out.fail(why.str());
        return;
    }
    if (!got.feasible)
        return;
    bool member = std::find(oracle.minimizers.begin(), oracle.minimizers.end(), got.indexes) != oracle.minimizers.end();
    if (!same(got.objective, oracle.cost) || !member) {
        why.precision(17);
        why << ": solver " << got.objective << " oracle " << oracle.cost << (member ? "" : " (not a minimizer)");
        out.fail(why.str());
    }
}

// ---------------------------------------------------------------------------

std::map<std::uint64_t, double> criterion1_objectives;

Outcome optimum_equivalence()
{
    Outcome out;
    std::size_t feasible = 0;
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        auto inst = small_instance(seed);
        Solved got;
        compare_with_oracle(inst, inst.constraint_text, out, 1, &got);
        feasible += got.feasible;
        criterion1_objectives[seed] = got.feasible ? got.objective : INFINITY;
    }
    out.detail << "200 instances, " << feasible << " feasible";
    return out;
}

bool clustered_clash(const std::vector<IndexCandidate> &cands, std::uint64_t mask)
{
    std::set<std::string> seen;
    for (std::size_t i = 0; i != cands.size(); ++i)
        if ((mask >> i & 1) && cands[i].clustered && !seen.insert(cands[i].table).second)
            return true;
    return false;
}

Outcome lattice_embedding()
{
    Outcome out;
    SmallInstanceOptions plain;
    plain.constraints = false;
    plain.max_candidates = 10;
    std::size_t subsets_checked = 0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        auto inst = small_instance(seed, plain);
        auto session = session_for(inst, "");
        auto &bip = session->bip();
        Oracle oracle(inst.workload, inst.candidates, inst.catalog);
        std::uint64_t subsets = std::uint64_t(1) << inst.candidates.size();
        for (std::uint64_t mask = 0; mask != subsets; ++mask) {
            if (clustered_clash(inst.candidates, mask))
                continue;
            ++subsets_checked;
            auto v = assignment_from_config(oracle.ids(mask), bip);
            double bip_cost = bip.evaluate(v);
            double it_cost = oracle.itcost(mask);
            if (!bip.satisfies(v) || !same(bip_cost, it_cost)) {
                std::ostringstream why;
                why << "seed " << seed << " subset " << mask << ": BIPcost " << bip_cost << " ITcost " << it_cost;
                out.fail(why.str());
                break;
            }
        }
    }
    out.detail << "50 instances, " << subsets_checked << " subsets";
    return out;
}

Outcome template_exactness()
{
    Outcome out;
    struct Class
    {
        std::string name;
        SmallInstanceOptions options;
        bool shells_only;
        std::size_t pairs = 0;
    };
    std::vector<Class> classes(3);
    classes[0].name = "single-table";
    classes[0].options.joins = false;
    classes[0].options.orders = false;
    classes[0].options.updates = false;
    classes[0].shells_only = false;
    classes[1].name = "join+order";
    classes[1].options.updates = false;
    classes[1].shells_only = false;
    classes[2].name = "update-shell";
    classes[2].options.max_statements = 8;
    classes[2].shells_only = true;
    for (auto &cls : classes) {
        cls.options.constraints = false;
        std::size_t with_joins = 0, with_order = 0;
        for (std::uint64_t seed = 1; seed <= 400 && cls.pairs < 400; ++seed) {
            auto inst = small_instance(seed, cls.options);
            auto baseline = baseline_configuration(inst.catalog);
            std::mt19937_64 rng(seed * 104729 + cls.pairs);
            for (auto &[query, weight] : inst.workload.read_queries()) {
                (void)weight;
                bool shell = query->id.ends_with("_shell");
                if (shell != cls.shells_only)
                    continue;
                with_joins += query->referenced_tables.size() > 1;
                with_order += query->referenced_tables.size() > 1 && (query->order_by || !query->group_by.empty());
                TemplatePlanSet cache(*query, inst.candidates, inst.catalog, baseline);
                for (int draw = 0; draw != 4; ++draw) {
                    std::vector<const IndexCandidate *> chosen;
                    std::set<std::string> clustered_tables;
                    auto full = baseline;
                    for (auto &c : inst.candidates) {
                        if (rng() % 2)
                            continue;
                        if (c.clustered && !clustered_tables.insert(c.table).second)
                            continue;
                        chosen.push_back(&c);
                        full.push_back(c);
                    }
                    double got = cache.cost(std::span<const IndexCandidate *const>(chosen));
                    double expected = whatif_cost(*query, full, inst.catalog);
                    ++cls.pairs;
                    if (got != expected) {
                        std::ostringstream why;
                        why.precision(17);
                        why << cls.name << " seed " << seed << " " << query->id << ": inum " << got << " whatif "
                            << expected;
                        out.fail(why.str());
                    }
                }
            }
        }
        if (cls.pairs < 200)
            out.fail(cls.name + ": only " + std::to_string(cls.pairs) + " pairs");
        if (cls.name == "join+order" && (with_joins == 0 || with_order == 0))
            out.fail("join+order class has no ordered joins");
        out.detail << cls.name << " " << cls.pairs << " pairs; ";
    }
    return out;
}

/// Catalog with wide tables so that indexes over more than five columns
/// exist.  Each wide candidate covers one query on the first table.
SyntheticInstance wide_instance(std::uint64_t seed)
{
    std::mt19937_64 rng(seed * 7 + 3);
    SyntheticInstance inst;
    inst.seed = seed;
    inst.catalog = random_catalog(rng, 1 + rng() % 2, 7, 9, 1000, 200000);
    inst.workload_text = random_workload_text(rng, inst.catalog, 4 + rng() % 5, 0.15, true, true);
    inst.workload = parse_workload(inst.workload_text, inst.catalog);
    auto generated = generate_candidates(inst.workload, inst.catalog).candidates();
    std::shuffle(generated.begin(), generated.end(), rng);
    generated.resize(std::min<std::size_t>(generated.size(), 5));
    std::set<std::string> ids;
    for (auto &c : generated)
        ids.insert(c.id);
    auto &table = inst.catalog.table(0);
    for (auto &[query, weight] : inst.workload.read_queries()) {
        (void)weight;
        if (generated.size() >= 11 || !query->references(table.name))
            continue;
        std::vector<std::string> key;
        for (auto &p : query->eq_predicates)
            if (p.column.table == table.name && key.size() < 2)
                key.push_back(p.column.column);
        auto used = query->referenced_columns(table.name, inst.catalog);
        if (key.empty())
            key.push_back(used.empty() ? table.columns[0].name : used[0]);
        std::vector<std::string> include;
        auto wanted = [&](const std::string &col) {
            return std::find(key.begin(), key.end(), col) == key.end() &&
                   std::find(include.begin(), include.end(), col) == include.end();
        };
        for (auto &col : used)
            if (wanted(col))
                include.push_back(col);
        for (auto &col : table.columns)
            if (key.size() + include.size() < 6 && wanted(col.name))
                include.push_back(col.name);
        auto c = make_candidate(inst.catalog, table.name, key, include);
        if (ids.insert(c.id).second)
            generated.push_back(c);
    }
    std::sort(generated.begin(), generated.end(), [](auto &a, auto &b) { return a.id < b.id; });
    inst.candidates = generated;
    return inst;
}

/// Small instance whose candidate set holds at least two clustered candidates per table.
SyntheticInstance clustered_instance(std::uint64_t seed)
{
    SmallInstanceOptions o;
    o.constraints = false;
    o.max_candidates = 8;
    auto inst = small_instance(seed, o);
    std::mt19937_64 rng(seed * 31 + 1);
    std::set<std::string> ids;
    for (auto &c : inst.candidates)
        ids.insert(c.id);
    for (std::size_t t = 0; t != inst.catalog.table_count() && inst.candidates.size() < 12; ++t) {
        auto &table = inst.catalog.table(t);
        for (int k = 0; k != 2 && inst.candidates.size() < 12; ++k) {
            auto &col = table.columns[rng() % table.columns.size()];
            auto c = make_candidate(inst.catalog, table.name, {col.name}, {}, true);
            if (ids.insert(c.id).second)
                inst.candidates.push_back(c);
        }
    }
    std::sort(inst.candidates.begin(), inst.candidates.end(), [](auto &a, auto &b) { return a.id < b.id; });
    return inst;
}

Outcome constraint_compiler()
{
    Outcome out;
    SmallInstanceOptions plain;
    plain.constraints = false;

    std::size_t budget = 0, wide = 0, wide_binding = 0, speedup = 0, speedup_feasible = 0, clustered = 0;
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        auto inst = small_instance(seed, plain);
        double total = 0;
        for (auto &c : inst.candidates)
            total += c.size_bytes;
        std::mt19937_64 rng(seed);
        double frac = std::uniform_real_distribution<double>(0.05, 0.6)(rng);
        compare_with_oracle(inst, "ASSERT SUM(SIZE) <= " + std::to_string(std::int64_t(total * frac)) + "\n", out);
        ++budget;
    }
    for (std::uint64_t seed = 1; seed <= 1000 && (wide < 30 || wide_binding < 10); ++seed) {
        auto inst = wide_instance(seed);
        auto text = "FOR t IN TABLES ASSERT COUNT(1) WHERE COLS > 5 <= 2\n";
        compare_with_oracle(inst, text, out);
        auto free = enumerate_optimal(inst.workload, inst.candidates, {}, inst.catalog);
        auto ast = parse_constraint("FOR t IN TABLES ASSERT COUNT(1) WHERE COLS > 5 <= 2");
        bool binds = true;
        Oracle oracle(inst.workload, inst.candidates, inst.catalog);
        for (auto &m : free.minimizers) {
            std::uint64_t mask = 0;
            for (std::size_t i = 0; i != inst.candidates.size(); ++i)
                if (std::find(m.begin(), m.end(), inst.candidates[i].id) != m.end())
                    mask |= std::uint64_t(1) << i;
            binds = binds && !oracle.satisfies(ast, mask);
        }
        wide_binding += binds;
        ++wide;
    }
    for (std::uint64_t seed = 1; seed <= 1000 && speedup_feasible < 20; ++seed) {
        auto inst = small_instance(seed, plain);
        Solved got;
        auto before = out.failures.size();
        compare_with_oracle(inst, "FOR q IN W ASSERT COST(q) <= 0.75 * BASECOST(q)\n", out, 1, &got);
        speedup_feasible += got.feasible && out.failures.size() == before;
        ++speedup;
    }
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        compare_with_oracle(clustered_instance(seed), "", out);
        ++clustered;
    }
    out.detail << "budget " << budget << ", wide-index generator " << wide << " (" << wide_binding
               << " binding), 0.75 speed-up generator " << speedup << " (" << speedup_feasible
               << " feasible), clustered " << clustered;
    if (std::min({budget, wide, speedup, clustered}) < 20)
        out.fail("fewer than 20 instances in a family");
    if (speedup_feasible < 20)
        out.fail("fewer than 20 feasible speed-up instances");
    return out;
}

Outcome anytime_contract()
{
    Outcome out;
    std::size_t streams = 0, events_seen = 0, gap_reached = 0;
    auto check_stream = [&](const std::vector<ProgressEvent> &events, const std::string &label) {
        ++streams;
        events_seen += events.size();
        for (std::size_t i = 1; i < events.size(); ++i) {
            if (events[i].incumbent > events[i - 1].incumbent)
                out.fail(label + ": incumbent increased");
            if (events[i].lower_bound < events[i - 1].lower_bound)
                out.fail(label + ": bound decreased");
        }
    };
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        auto inst = small_instance(seed);
        auto oracle = enumerate_optimal(inst.workload, inst.candidates, inst.constraints, inst.catalog);
        if (!oracle.feasible)
            continue;
        auto session = session_for(inst, inst.constraint_text);
        std::vector<ProgressEvent> events;
        SolverOptions o;
        o.gap_threshold = 0.05;
        o.progress = [&](const ProgressEvent &e) { events.push_back(e); };
        auto rec = recommend(*session, o);
        check_stream(events, "seed " + std::to_string(seed));
        if (rec.objective - oracle.cost > 0.05 * rec.objective + 1e-9 * std::max(1.0, rec.objective))
            out.fail("seed " + std::to_string(seed) + ": incumbent beyond 5% of the optimum");
        gap_reached += rec.status == SolveStatus::GapReached;
    }
    // Longer streams from larger instances searched to optimality.
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        BenchOptions bo;
        bo.statements = 150;
        bo.tables = 6;
        bo.seed = seed;
        auto inst = bench_instance(bo);
        double total = 0;
        for (auto &c : inst.candidates)
            total += c.size_bytes;
        auto session = session_for(inst, "ASSERT SUM(SIZE) <= " + std::to_string(std::int64_t(total * 0.05)));
        std::vector<ProgressEvent> events;
        auto o = exact();
        o.time_limit = 20;
        o.progress = [&](const ProgressEvent &e) { events.push_back(e); };
        recommend(*session, o);
        check_stream(events, "bench seed " + std::to_string(seed));
    }
    out.detail << streams << " progress streams, " << events_seen << " events, " << gap_reached << " GAP_REACHED";
    return out;
}

/// Random DBA-style candidates absent from `existing`.
std::vector<IndexCandidate> extra_candidates(const SyntheticInstance &inst, std::size_t count, std::uint64_t seed)
{
    std::mt19937_64 rng(seed * 31 + 7);
    std::set<std::string> ids;
    for (auto &c : inst.candidates)
        ids.insert(c.id);
    std::vector<IndexCandidate> added;
    while (added.size() < count) {
        auto &t = inst.catalog.table(rng() % inst.catalog.table_count());
        std::vector<std::string> cols;
        for (auto &c : t.columns)
            cols.push_back(c.name);
        std::shuffle(cols.begin(), cols.end(), rng);
        std::size_t keys = 1 + rng() % std::min<std::size_t>(3, cols.size());
        std::size_t include = std::min<std::size_t>(rng() % 3, cols.size() - keys);
        auto c = make_candidate(inst.catalog, t.name, std::vector<std::string>(cols.begin(), cols.begin() + keys),
                                std::vector<std::string>(cols.begin() + keys, cols.begin() + keys + include));
        if (ids.insert(c.id).second)
            added.push_back(c);
    }
    return added;
}

Outcome incremental_resolve()
{
    Outcome out;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        BenchOptions bo;
        bo.statements = 250;
        bo.tables = 8;
        bo.seed = seed;
        auto inst = bench_instance(bo);
        auto added = extra_candidates(inst, 100, seed);
        if (inst.candidates.size() < 500) {
            out.fail("seed " + std::to_string(seed) + ": only " + std::to_string(inst.candidates.size()) +
                     " candidates");
            continue;
        }

        auto session = session_for(inst, "");
        recommend(*session, exact());
        Delta delta;
        delta.add_candidates = added;
        auto start = Clock::now();
        auto incremental = apply_delta(*session, delta, exact());
        double delta_s = seconds_since(start);

        auto all = inst;
        all.candidates.insert(all.candidates.end(), added.begin(), added.end());
        start = Clock::now();
        auto fresh_session = session_for(all, "");
        auto fresh = recommend(*fresh_session, exact());
        double fresh_s = seconds_since(start);

        double ratio = delta_s / fresh_s;
        out.detail.precision(3);
        out.detail << "seed " << seed << " |W| 250 |S| " << inst.candidates.size() << "+100: delta " << delta_s
                   << " s, fresh " << fresh_s << " s, ratio " << ratio << "; ";
        if (!same(incremental.objective, fresh.objective))
            out.fail("seed " + std::to_string(seed) + ": objectives differ");
        if (ratio > 0.5)
            out.fail("seed " + std::to_string(seed) + ": delta took " + std::to_string(ratio) + "x the fresh solve");
    }
    return out;
}

double segment_distance(double px, double py, double ax, double ay, double bx, double by)
{
    double dx = bx - ax, dy = by - ay;
    double len2 = dx * dx + dy * dy;
    double t = len2 > 0 ? std::clamp(((px - ax) * dx + (py - ay) * dy) / len2, 0.0, 1.0) : 0.0;
    return std::hypot(px - (ax + t * dx), py - (ay + t * dy));
}

/// Lower-left convex hull of a 2-D point set (the supported Pareto points).
std::vector<std::pair<double, double>> supported(std::vector<std::pair<double, double>> pts)
{
    std::sort(pts.begin(), pts.end());
    std::vector<std::pair<double, double>> hull;
    for (auto &p : pts) {
        if (!hull.empty() && p.second >= hull.back().second)
            continue;
        while (hull.size() >= 2) {
            auto &a = hull[hull.size() - 2], &b = hull.back();
            double cross = (b.first - a.first) * (p.second - a.second) - (b.second - a.second) * (p.first - a.first);
            if (cross > 0)
                break;
            hull.pop_back();
        }
        hull.push_back(p);
    }
    return hull;
}

Outcome chord_pareto()
{
    Outcome out;
    std::size_t instances = 0, points = 0;
    const char *softs[] = {"SOFT ASSERT SUM(SIZE) <= 0\n", "SOFT ASSERT COUNT(1) <= 1\n"};
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        SmallInstanceOptions o;
        o.constraints = false;
        auto inst = small_instance(seed, o);
        std::string text = softs[seed % 2];
        auto session = session_for(inst, text);
        ChordOptions co;
        co.max_points = 64;
        auto returned = chord(*session, co);
        auto soft = parse_constraints(text);
        auto exact_front = pareto_exact(inst.workload, inst.candidates, soft, {}, inst.catalog);
        ++instances;
        points += returned.size();
        std::string tag = "seed " + std::to_string(seed);

        for (auto &p : returned)
            for (auto &e : exact_front) {
                bool le = e.objectives[0] <= p.objectives[0] + 1e-9 * std::max(1.0, p.objectives[0]) &&
                          e.objectives[1] <= p.objectives[1] + 1e-9 * std::max(1.0, p.objectives[1]);
                bool lt = e.objectives[0] < p.objectives[0] - 1e-9 * std::max(1.0, p.objectives[0]) ||
                          e.objectives[1] < p.objectives[1] - 1e-9 * std::max(1.0, p.objectives[1]);
                if (le && lt)
                    out.fail(tag + ": a returned point is dominated");
            }

        std::vector<std::pair<double, double>> all;
        for (auto &e : exact_front)
            all.emplace_back(e.objectives[0], e.objectives[1]);
        auto hull = supported(all);
        double x0 = hull.front().first, x1 = hull.back().first;
        double y0 = hull.back().second, y1 = hull.front().second;
        double xr = x1 - x0 > 0 ? x1 - x0 : 1.0, yr = y1 - y0 > 0 ? y1 - y0 : 1.0;
        auto nx = [&](double x) { return (x - x0) / xr; };
        auto ny = [&](double y) { return (y - y0) / yr; };
        for (auto &[hx, hy] : hull) {
            double best = INFINITY;
            for (std::size_t i = 0; i + 1 < returned.size(); ++i)
                best = std::min(best, segment_distance(nx(hx), ny(hy), nx(returned[i].objectives[0]),
                                                       ny(returned[i].objectives[1]), nx(returned[i + 1].objectives[0]),
                                                       ny(returned[i + 1].objectives[1])));
            if (returned.size() == 1)
                best = std::hypot(nx(hx) - nx(returned[0].objectives[0]), ny(hy) - ny(returned[0].objectives[1]));
            if (!(best < co.epsilon)) {
                std::ostringstream why;
                why << tag << ": supported point (" << hx << ", " << hy << ") is " << best << " from the chain";
                out.fail(why.str());
            }
        }
    }
    out.detail << instances << " instances, " << points << " points; ";

    // Warm-started exploration against the same sequence of scalarized solves from scratch.
    double warm_total = 0, cold_total = 0;
    std::size_t k_total = 0;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        BenchOptions bo;
        bo.statements = 150;
        bo.tables = 6;
        bo.seed = seed;
        auto inst = bench_instance(bo);
        auto session = session_for(inst, "SOFT ASSERT SUM(SIZE) <= 0\n");
        ChordOptions warm;
        warm.max_points = 8;
        auto start = Clock::now();
        auto warm_points = chord(*session, warm);
        warm_total += seconds_since(start);
        ChordOptions cold = warm;
        cold.warm_start = false;
        start = Clock::now();
        auto cold_points = chord(*session, cold);
        cold_total += seconds_since(start);
        k_total += warm_points.size();
    }
    out.detail.precision(3);
    out.detail << "timing: " << k_total << " points, warm " << warm_total << " s, " << "cold " << cold_total
               << " s, ratio " << warm_total / cold_total;
    if (warm_total > cold_total / 1.5)
        out.fail("warm-started exploration is not 1.5x faster than cold solves");
    return out;
}

double scale_objective_1 = 0;
double scale_objective_8 = 0;

Outcome scalability(unsigned threads, double *objective)
{
    Outcome out;
    std::ostringstream csv, err;
    auto start = Clock::now();
    int code = run_cli({"bench", "--statements", "1000", "--tables", "8", "--threads", std::to_string(threads)}, csv,
                       err);
    double wall = seconds_since(start);
    if (code != kExitOk) {
        out.fail("bench exited with " + std::to_string(code) + ": " + err.str());
        return out;
    }
    std::istringstream lines(csv.str());
    std::string header, row;
    std::getline(lines, header);
    std::getline(lines, row);
    std::vector<std::string> names, cells;
    auto split = [](const std::string &line) {
        std::vector<std::string> parts;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
            parts.push_back(cell);
        return parts;
    };
    names = split(header);
    cells = split(row);
    std::map<std::string, std::string> record;
    for (std::size_t i = 0; i != names.size() && i != cells.size(); ++i)
        record[names[i]] = cells[i];
    for (auto key : {"|W|", "|S|", "build_ms", "solve_ms", "objective", "gap", "inum_ms", "bip_ms"})
        if (record[key].empty())
            out.fail(std::string("bench CSV lacks ") + key);
    if (!out.pass)
        return out;
    double build_ms = std::stod(record["build_ms"]), solve_ms = std::stod(record["solve_ms"]);
    double gap = std::stod(record["gap"]);
    std::size_t candidates = std::stoul(record["|S|"]);
    *objective = std::stod(record["objective"]);
    out.detail.precision(4);
    out.detail << "threads " << threads << ": |W| " << record["|W|"] << " |S| " << candidates << " inum "
               << record["inum_ms"] << " ms, bip " << record["bip_ms"] << " ms, build " << build_ms << " ms, solve "
               << solve_ms << " ms, gap " << gap << ", wall " << wall << " s";
    if (record["|W|"] != "1000")
        out.fail("workload size is not 1000");
    if (candidates < 1500)
        out.fail("fewer than 1500 candidates");
    if (gap > 0.05)
        out.fail("gap above 0.05");
    if (build_ms + solve_ms >= 600000)
        out.fail("build and solve took 10 minutes or more");
    return out;
}

Outcome scalability_single()
{
    return scalability(1, &scale_objective_1);
}

Outcome determinism()
{
    Outcome out;
    std::size_t compared = 0;
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        auto inst = small_instance(seed);
        double one;
        if (auto it = criterion1_objectives.find(seed); it != criterion1_objectives.end()) {
            one = it->second;
        } else {
            auto s = session_for(inst, inst.constraint_text);
            auto got = solve_session(*s, exact(1));
            one = got.feasible ? got.objective : INFINITY;
        }
        auto s = session_for(inst, inst.constraint_text);
        auto got = solve_session(*s, exact(8));
        double eight = got.feasible ? got.objective : INFINITY;
        ++compared;
        if (one != eight)
            out.fail("seed " + std::to_string(seed) + ": objectives differ between 1 and 8 threads");
    }
    if (scale_objective_1 == 0) {
        auto r = scalability(1, &scale_objective_1);
        if (!r.pass)
            out.fail("1-thread scalability run failed");
    }
    auto r = scalability(8, &scale_objective_8);
    if (!r.pass)
        out.fail("8-thread scalability run failed");
    if (scale_objective_1 != scale_objective_8)
        out.fail("scalability objectives differ between 1 and 8 threads");
    out.detail.precision(17);
    out.detail << compared << " small instances; 1000-statement objective " << scale_objective_1 << " vs "
               << scale_objective_8;
    return out;
}

struct Criterion
{
    int number;
    const char *title;
    double limit_s;
    std::function<Outcome()> run;
};

}

int main(int argc, char **argv)
{
    std::vector<Criterion> criteria = {
        {1, "solver optimum equals exhaustive optimum", 300, optimum_equivalence},
        {2, "subset lattice embeds into the BIP", 120, lattice_embedding},
        {3, "template cache costs equal what-if costs", 60, template_exactness},
        {4, "compiled constraints keep the exhaustive optimum", 120, constraint_compiler},
        {5, "anytime progress and the 5% gap", 120, anytime_contract},
        {6, "incremental re-solve", 0, incremental_resolve},
        {7, "Pareto exploration", 300, chord_pareto},
        {8, "1000-statement scalability", 0, scalability_single},
        {9, "thread-count determinism", 0, determinism},
    };
    std::set<int> wanted;
    for (int i = 1; i < argc; ++i)
        wanted.insert(std::atoi(argv[i]));

    bool all_pass = true;
    for (auto &c : criteria) {
        if (!wanted.empty() && !wanted.count(c.number))
            continue;
        auto start = Clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception &e) {
            out.fail(std::string("exception: ") + e.what());
        }
        double took = seconds_since(start);
        if (c.limit_s > 0 && took >= c.limit_s)
            out.fail("took " + std::to_string(took) + " s, limit " + std::to_string(c.limit_s) + " s");
        all_pass = all_pass && out.pass;
        std::printf("criterion %d %-48s %s  (%.1f s) %s\n", c.number, c.title, out.pass ? "PASS" : "FAIL", took,
                    out.detail.str().c_str());
        for (auto &f : out.failures)
            std::printf("    %s\n", f.c_str());
        std::fflush(stdout);
    }
    return all_pass ? 0 : 1;
}
