#include <ixt/bruteforce.hpp>

#include <ixt/error.hpp>
#include <ixt/whatif.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <unordered_map>

namespace ixt {

namespace {

constexpr const char *kOrigin = "bruteforce";

bool close_enough(double a, double b)
{
    return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
}

std::string upper(std::string s)
{
    for (auto &c : s)
        c = char(std::toupper(static_cast<unsigned char>(c)));
    return s;
}

struct Env
{
    std::map<std::string, std::pair<Domain, std::size_t>> vars;
};

}

struct Oracle::Impl
{
    const Workload *workload;
    const Catalog *catalog;
    std::vector<IndexCandidate> candidates;
    std::vector<IndexCandidate> baseline;
    std::vector<std::unique_ptr<WhatIfEvaluator>> evaluators;
    std::vector<std::uint64_t> relevant;
    std::vector<double> base;
    mutable std::vector<std::unordered_map<std::uint64_t, double>> cache;

    double cost(std::size_t s, std::uint64_t mask) const
    {
        auto key = mask & relevant[s];
        auto &c = cache[s];
        if (auto it = c.find(key); it != c.end())
            return it->second;
        std::vector<const IndexCandidate *> config;
        for (auto &b : baseline)
            config.push_back(&b);
        for (std::size_t i = 0; i != candidates.size(); ++i)
            if (key >> i & 1)
                config.push_back(&candidates[i]);
        double v = evaluators[s]->cost(std::span<const IndexCandidate *const>(config));
        c.emplace(key, v);
        return v;
    }

    bool index_matches(const std::vector<FilterAtom> &filter, const IndexCandidate &a, const Env &env) const
    {
        for (auto &atom : filter) {
            if (atom.attribute == "TABLE") {
                std::string name = atom.name;
                if (auto it = env.vars.find(atom.name); it != env.vars.end())
                    name = catalog->table(it->second.second).name;
                if (a.table != name)
                    return false;
            } else if (atom.attribute == "CLUSTERED") {
                bool want = atom.number ? *atom.number != 0.0 : upper(atom.name) == "TRUE";
                if (a.clustered != want)
                    return false;
            } else {
                double v = atom.attribute == "SIZE" ? a.size_bytes : double(a.key_columns.size() + a.include_columns.size());
                if (!compare(v, atom.cmp, *atom.number))
                    return false;
            }
        }
        return true;
    }

    std::vector<std::size_t> members(const ConstraintAst &a, const Env &env, std::uint64_t mask) const
    {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i != candidates.size(); ++i) {
            if (!(mask >> i & 1))
                continue;
            bool ok = true;
            for (auto &[name, binding] : env.vars) {
                (void)name;
                if (binding.first == Domain::Tables && candidates[i].table != catalog->table(binding.second).name)
                    ok = false;
                if (binding.first == Domain::Candidates && binding.second != i)
                    ok = false;
            }
            if (ok && index_matches(a.filter, candidates[i], env))
                out.push_back(i);
        }
        return out;
    }

    double measure(const IndexCandidate &a, Measure m) const
    {
        switch (m) {
            case Measure::Size: return a.size_bytes;
            case Measure::Width: return double(a.key_columns.size() + a.include_columns.size());
            case Measure::One: return 1.0;
        }
        return 0.0;
    }

    std::size_t statement_of(const ConstraintAst &a, const Env &env) const
    {
        if (auto it = env.vars.find(a.query); it != env.vars.end())
            return it->second.second;
        auto &stmts = workload->statements();
        for (std::size_t i = 0; i != stmts.size(); ++i)
            if (stmts[i].query.id == a.query)
                return i;
        throw Error(kOrigin, "UnknownStatement", a.query);
    }

    template <class Fn>
    void for_each_element(const ConstraintAst &a, Env env, Fn &&fn) const
    {
        if (a.kind != ConstraintAst::Kind::Generator) {
            fn(a, env);
            return;
        }
        switch (a.domain) {
            case Domain::Workload:
                for (std::size_t i = 0; i != workload->size(); ++i) {
                    auto &q = workload->statements()[i].query;
                    bool ok = std::all_of(a.domain_filter.begin(), a.domain_filter.end(),
                                          [&](auto &f) { return q.references(f.name); });
                    if (!ok)
                        continue;
                    auto e = env;
                    e.vars[a.variable] = {Domain::Workload, i};
                    for_each_element(*a.body, std::move(e), fn);
                }
                break;
            case Domain::Candidates:
                for (std::size_t i = 0; i != candidates.size(); ++i) {
                    if (!index_matches(a.domain_filter, candidates[i], env))
                        continue;
                    auto e = env;
                    e.vars[a.variable] = {Domain::Candidates, i};
                    for_each_element(*a.body, std::move(e), fn);
                }
                break;
            case Domain::Tables:
                for (std::size_t t = 0; t != catalog->table_count(); ++t) {
                    auto &name = catalog->table(t).name;
                    bool ok = std::all_of(a.domain_filter.begin(), a.domain_filter.end(),
                                          [&](auto &f) { return f.name == name; });
                    if (!ok)
                        continue;
                    auto e = env;
                    e.vars[a.variable] = {Domain::Tables, t};
                    for_each_element(*a.body, std::move(e), fn);
                }
                break;
        }
    }

    double cost_limit(const ConstraintAst &a, std::size_t s) const
    {
        return a.factor ? *a.factor * base[s] : a.bound;
    }

    bool holds(const ConstraintAst &a, const Env &env, std::uint64_t mask) const
    {
        if (a.kind == ConstraintAst::Kind::QueryCost) {
            auto s = statement_of(a, env);
            double lhs = cost(s, mask);
            double rhs = cost_limit(a, s);
            return lhs <= rhs + 1e-9 * std::max(1.0, std::abs(rhs));
        }
        auto in = members(a, env, mask);
        double lhs = 0.0;
        switch (a.aggregate) {
            case Aggregate::Sum:
                for (auto i : in)
                    lhs += measure(candidates[i], a.measure);
                break;
            case Aggregate::Count:
                lhs = double(in.size());
                break;
            case Aggregate::Min:
                lhs = std::numeric_limits<double>::infinity();
                for (auto i : in)
                    lhs = std::min(lhs, measure(candidates[i], a.measure));
                break;
            case Aggregate::Max:
                lhs = -std::numeric_limits<double>::infinity();
                for (auto i : in)
                    lhs = std::max(lhs, measure(candidates[i], a.measure));
                break;
        }
        return compare(lhs, a.cmp, a.bound);
    }

    double violation(const ConstraintAst &a, const Env &env, std::uint64_t mask) const
    {
        if (a.kind == ConstraintAst::Kind::QueryCost) {
            auto s = statement_of(a, env);
            return cost(s, mask) - cost_limit(a, s);
        }
        double lhs = 0.0;
        for (auto i : members(a, env, mask))
            lhs += a.aggregate == Aggregate::Count ? 1.0 : measure(candidates[i], a.measure);
        bool lower = a.cmp == DslCmp::Ge || a.cmp == DslCmp::Gt;
        return lower ? a.bound - lhs : lhs - a.bound;
    }
};

Oracle::Oracle(const Workload &workload, std::span<const IndexCandidate> candidates, const Catalog &catalog)
    : impl_(new Impl)
{
    if (candidates.size() > 63)
        throw Error(kOrigin, "TooManyCandidates", std::to_string(candidates.size()) + " candidates");
    impl_->workload = &workload;
    impl_->catalog = &catalog;
    impl_->candidates.assign(candidates.begin(), candidates.end());
    impl_->baseline = baseline_configuration(catalog);
    for (auto &st : workload.statements()) {
        auto &q = st.query;
        impl_->evaluators.push_back(std::make_unique<WhatIfEvaluator>(q, catalog));
        std::uint64_t rel = 0;
        for (std::size_t i = 0; i != candidates.size(); ++i) {
            auto &table = candidates[i].table;
            bool touches = q.references(table) || (q.is_update() && q.target_table == table) ||
                           (q.shell && q.shell->references(table));
            if (touches)
                rel |= std::uint64_t(1) << i;
        }
        impl_->relevant.push_back(rel);
    }
    impl_->cache.resize(workload.size());
    for (std::size_t s = 0; s != workload.size(); ++s)
        impl_->base.push_back(impl_->cost(s, 0));
}

Oracle::~Oracle()
{
    delete impl_;
}

std::size_t Oracle::candidate_count() const
{
    return impl_->candidates.size();
}

const std::vector<IndexCandidate> & Oracle::candidates() const
{
    return impl_->candidates;
}

double Oracle::itcost(std::uint64_t mask) const
{
    double total = 0.0;
    auto &stmts = impl_->workload->statements();
    for (std::size_t s = 0; s != stmts.size(); ++s)
        total += stmts[s].weight * impl_->cost(s, mask);
    return total;
}

double Oracle::statement_cost(std::size_t statement, std::uint64_t mask) const
{
    return impl_->cost(statement, mask);
}

double Oracle::base_statement_cost(std::size_t statement) const
{
    return impl_->base.at(statement);
}

bool Oracle::satisfies(const ConstraintAst &constraint, std::uint64_t mask) const
{
    bool ok = true;
    impl_->for_each_element(constraint, {}, [&](const ConstraintAst &a, const Env &env) {
        if (ok && !impl_->holds(a, env, mask))
            ok = false;
    });
    return ok;
}

double Oracle::violation(const ConstraintAst &constraint, std::uint64_t mask) const
{
    double total = 0.0;
    impl_->for_each_element(constraint, {}, [&](const ConstraintAst &a, const Env &env) {
        total += impl_->violation(a, env, mask);
    });
    return total;
}

std::vector<std::string> Oracle::ids(std::uint64_t mask) const
{
    std::vector<std::string> out;
    for (std::size_t i = 0; i != impl_->candidates.size(); ++i)
        if (mask >> i & 1)
            out.push_back(impl_->candidates[i].id);
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

bool clustered_ok(const std::vector<IndexCandidate> &candidates, std::uint64_t mask)
{
    std::map<std::string, int> per_table;
    for (std::size_t i = 0; i != candidates.size(); ++i)
        if ((mask >> i & 1) && candidates[i].clustered && ++per_table[candidates[i].table] > 1)
            return false;
    return true;
}

}

OracleResult enumerate_optimal(const Workload &workload, std::span<const IndexCandidate> candidates,
                               std::span<const ConstraintAst> hard, const Catalog &catalog, bool keep_table)
{
    if (candidates.size() > 20)
        throw Error(kOrigin, "TooManyCandidates", std::to_string(candidates.size()) + " candidates, at most 20");
    Oracle oracle(workload, candidates, catalog);
    OracleResult result;
    std::vector<std::pair<std::uint64_t, double>> feasible;
    std::uint64_t count = std::uint64_t(1) << candidates.size();
    for (std::uint64_t mask = 0; mask != count; ++mask) {
        if (!clustered_ok(oracle.candidates(), mask))
            continue;
        bool ok = std::all_of(hard.begin(), hard.end(), [&](auto &c) { return oracle.satisfies(c, mask); });
        if (!ok)
            continue;
        feasible.emplace_back(mask, oracle.itcost(mask));
    }
    if (feasible.empty())
        return result;
    result.feasible = true;
    result.cost = std::min_element(feasible.begin(), feasible.end(),
                                   [](auto &a, auto &b) { return a.second < b.second; })->second;
    for (auto &[mask, value] : feasible)
        if (close_enough(value, result.cost))
            result.minimizers.push_back(oracle.ids(mask));
    std::sort(result.minimizers.begin(), result.minimizers.end());
    if (keep_table)
        result.table = std::move(feasible);
    return result;
}

std::vector<std::uint8_t> assignment_from_config(const std::vector<std::string> &config, const BipProblem &bip)
{
    std::vector<char> in(bip.candidates().size(), 0);
    for (auto &id : config)
        if (auto a = bip.candidate_index(id))
            in[*a] = 1;
    std::vector<std::uint8_t> v(bip.variable_count(), 0);
    for (std::size_t a = 0; a != in.size(); ++a)
        v[bip.z_var(a)] = in[a] ? 1 : 0;

    for (auto &block : bip.blocks()) {
        // Cheapest access per slot over X ∪ {NO_INDEX}, then the cheapest template.
        std::optional<std::size_t> best_k;
        double best = std::numeric_limits<double>::infinity();
        std::vector<std::vector<std::size_t>> picks(block.templates.size());
        for (std::size_t k = 0; k != block.templates.size(); ++k) {
            auto &t = block.templates[k];
            double total = 0.0;
            bool ok = true;
            for (auto &slot : t.slots) {
                std::optional<std::size_t> pick;
                for (std::size_t o = 0; o != slot.options.size(); ++o) {
                    auto c = slot.options[o].candidate;
                    if (c != BipOption::kNoIndex && !in[std::size_t(c)])
                        continue;
                    if (!pick || slot.options[o].gamma < slot.options[*pick].gamma)
                        pick = o;
                }
                if (!pick) {
                    ok = false;
                    break;
                }
                picks[k].push_back(*pick);
                total += slot.options[*pick].gamma;
            }
            if (ok && total + t.beta < best) {
                best = total + t.beta;
                best_k = k;
            }
        }
        if (!best_k)
            continue;
        auto &t = block.templates[*best_k];
        v[t.y_var] = 1;
        for (std::size_t s = 0; s != t.slots.size(); ++s)
            v[t.slots[s].first_var + picks[*best_k][s]] = 1;
    }
    return v;
}

std::vector<ParetoEntry> pareto_exact(const Workload &workload, std::span<const IndexCandidate> candidates,
                                      std::span<const ConstraintAst> soft, std::span<const ConstraintAst> hard,
                                      const Catalog &catalog)
{
    if (candidates.size() > 16)
        throw Error(kOrigin, "TooManyCandidates", std::to_string(candidates.size()) + " candidates, at most 16");
    Oracle oracle(workload, candidates, catalog);
    std::vector<ParetoEntry> all;
    std::uint64_t count = std::uint64_t(1) << candidates.size();
    for (std::uint64_t mask = 0; mask != count; ++mask) {
        if (!clustered_ok(oracle.candidates(), mask))
            continue;
        if (!std::all_of(hard.begin(), hard.end(), [&](auto &c) { return oracle.satisfies(c, mask); }))
            continue;
        ParetoEntry e;
        e.objectives.push_back(oracle.itcost(mask));
        for (auto &s : soft)
            e.objectives.push_back(oracle.violation(s, mask));
        e.indexes = oracle.ids(mask);
        all.push_back(std::move(e));
    }
    auto dominates = [](const ParetoEntry &a, const ParetoEntry &b) {
        bool strictly = false;
        for (std::size_t i = 0; i != a.objectives.size(); ++i) {
            if (a.objectives[i] > b.objectives[i] && !close_enough(a.objectives[i], b.objectives[i]))
                return false;
            if (a.objectives[i] < b.objectives[i] && !close_enough(a.objectives[i], b.objectives[i]))
                strictly = true;
        }
        return strictly;
    };
    // A dominating vector sorts lexicographically before the one it dominates.
    std::sort(all.begin(), all.end(), [](auto &a, auto &b) { return a.objectives < b.objectives; });
    std::vector<ParetoEntry> front;
    for (auto &e : all)
        if (std::none_of(front.begin(), front.end(), [&](auto &o) { return dominates(o, e); }))
            front.push_back(e);
    std::erase_if(front, [&](auto &e) {
        return std::any_of(front.begin(), front.end(), [&](auto &o) { return &o != &e && dominates(o, e); });
    });
    return front;
}

}
