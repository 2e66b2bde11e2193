#include <ixt/selfcheck.hpp>

#include <ixt/advisor.hpp>
#include <ixt/bruteforce.hpp>
#include <ixt/synth.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace ixt {

namespace {

constexpr std::size_t kKeptFailures = 5;
constexpr std::size_t kLatticeLimit = 10;

bool close(double a, double b)
{
    if (std::isinf(a) || std::isinf(b))
        return a == b;
    return std::abs(a - b) <= 1e-9 * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

void record(CheckRow &row, bool ok, std::uint64_t seed, const std::string &detail)
{
    ++row.instances;
    if (ok) {
        ++row.passed;
        return;
    }
    ++row.failed;
    if (row.failures.size() < kKeptFailures)
        row.failures.push_back("seed " + std::to_string(seed) + ": " + detail);
}

std::unique_ptr<Session> session_for(const SyntheticInstance &inst)
{
    SessionInput input;
    input.catalog = to_json(inst.catalog);
    input.workload = inst.workload_text;
    input.constraints = inst.constraint_text;
    input.candidates = inst.candidates;
    input.id = "check-" + std::to_string(inst.seed);
    return create_session(input);
}

void check_optimum(const SyntheticInstance &inst, unsigned threads, CheckRow &row)
{
    auto oracle = enumerate_optimal(inst.workload, inst.candidates, inst.constraints, inst.catalog);
    auto session = session_for(inst);
    SolverOptions opts;
    opts.gap_threshold = 0;
    opts.threads = threads;
    std::ostringstream detail;
    bool ok = false;
    try {
        auto rec = recommend(*session, opts);
        bool member = std::find(oracle.minimizers.begin(), oracle.minimizers.end(), rec.indexes) !=
                      oracle.minimizers.end();
        ok = oracle.feasible && close(rec.objective, oracle.cost) && member;
        detail << "solver " << rec.objective << " oracle " << (oracle.feasible ? oracle.cost : NAN);
    } catch (const InfeasibleProblem &) {
        ok = !oracle.feasible;
        detail << "solver infeasible, oracle " << oracle.cost;
    }
    record(row, ok, inst.seed, detail.str());
}

bool clustered_conflict(const std::vector<IndexCandidate> &cands, std::uint64_t mask)
{
    std::vector<int> per_table;
    for (std::size_t i = 0; i != cands.size(); ++i) {
        if (!(mask >> i & 1) || !cands[i].clustered)
            continue;
        if (per_table.size() <= cands[i].table_ordinal)
            per_table.resize(cands[i].table_ordinal + 1, 0);
        if (++per_table[cands[i].table_ordinal] > 1)
            return true;
    }
    return false;
}

void check_embedding(const SyntheticInstance &inst, CheckRow &row)
{
    if (inst.candidates.size() > kLatticeLimit)
        return;
    SessionInput input;
    input.catalog = to_json(inst.catalog);
    input.workload = inst.workload_text;
    input.candidates = inst.candidates;
    auto session = create_session(input);
    Oracle oracle(inst.workload, inst.candidates, inst.catalog);
    auto &bip = session->bip();
    std::uint64_t subsets = std::uint64_t(1) << inst.candidates.size();
    for (std::uint64_t mask = 0; mask != subsets; ++mask) {
        if (clustered_conflict(inst.candidates, mask))
            continue;
        auto v = assignment_from_config(oracle.ids(mask), bip);
        double bip_cost = bip.evaluate(v);
        double it_cost = oracle.itcost(mask);
        if (!bip.satisfies(v) || !close(bip_cost, it_cost)) {
            std::ostringstream detail;
            detail << "subset " << mask << " bip " << bip_cost << " itcost " << it_cost;
            record(row, false, inst.seed, detail.str());
            return;
        }
    }
    record(row, true, inst.seed, "");
}

void check_inum(const SyntheticInstance &inst, std::size_t draws, CheckRow &row)
{
    auto baseline = baseline_configuration(inst.catalog);
    std::mt19937_64 rng(inst.seed * 7919 + 17);
    for (auto &[query, weight] : inst.workload.read_queries()) {
        (void)weight;
        TemplatePlanSet cache(*query, inst.candidates, inst.catalog, baseline);
        for (std::size_t d = 0; d != draws; ++d) {
            std::vector<IndexCandidate> config;
            std::vector<const IndexCandidate *> chosen;
            std::vector<bool> clustered_on(inst.catalog.table_count(), false);
            for (auto &c : inst.candidates) {
                if (!(rng() & 1))
                    continue;
                if (c.clustered && clustered_on[c.table_ordinal])
                    continue;
                if (c.clustered)
                    clustered_on[c.table_ordinal] = true;
                config.push_back(c);
                chosen.push_back(&c);
            }
            auto full = baseline;
            full.insert(full.end(), config.begin(), config.end());
            double expected = whatif_cost(*query, full, inst.catalog);
            double got = cache.cost(std::span<const IndexCandidate *const>(chosen));
            if (expected != got) {
                std::ostringstream detail;
                detail << query->id << " inum " << got << " whatif " << expected;
                record(row, false, inst.seed, detail.str());
                return;
            }
        }
    }
    record(row, true, inst.seed, "");
}

}

std::vector<CheckRow> run_self_check(const SelfCheckOptions &options)
{
    CheckRow optimum, embedding, inum;
    optimum.name = "optimum";
    embedding.name = "embedding";
    inum.name = "inum";
    SmallInstanceOptions plain;
    plain.constraints = false;
    for (std::size_t i = 0; i != options.seeds; ++i) {
        auto seed = options.first_seed + i;
        if (options.on_seed)
            options.on_seed(seed);
        auto inst = small_instance(seed);
        check_optimum(inst, options.threads, optimum);
        check_inum(inst, options.whatif_draws, inum);
        check_embedding(small_instance(seed, plain), embedding);
    }
    return {optimum, embedding, inum};
}

}
