#include <ixt/advisor.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

namespace ixt {

namespace {

constexpr const char *kOrigin = "advisor";

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start)
{
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string join(const std::vector<std::string> &items)
{
    std::string out;
    for (auto &s : items)
        out += (out.empty() ? "" : ", ") + s;
    return out;
}

std::string random_token()
{
    static std::atomic<std::uint64_t> counter{0};
    std::random_device rd;
    std::mt19937_64 rng((std::uint64_t(rd()) << 32) ^ rd() ^ counter.fetch_add(1));
    std::ostringstream out;
    out << "s" << std::hex << rng();
    return out.str();
}

/// The source line of each parsed statement, used as its stored text.
std::string line_of(const std::string &text, int line)
{
    std::istringstream in(text);
    std::string raw;
    for (int i = 1; std::getline(in, raw); ++i)
        if (i == line)
            return raw;
    return {};
}

nlohmann::json number(double v)
{
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

}

InfeasibleProblem::InfeasibleProblem(std::vector<std::string> conflicting)
    : Error("solver", "InfeasibleProblem",
            conflicting.empty() ? "no configuration satisfies the constraints"
                                : "conflicting constraints: " + join(conflicting))
    , conflicting_(std::move(conflicting))
{ }

/*======================================================================================================================
 * Deltas
 *====================================================================================================================*/

bool Delta::empty() const
{
    return add_candidates.empty() && remove_candidates.empty() && add_constraints.empty() &&
           remove_constraints.empty() && weights.empty();
}

nlohmann::json to_json(const Delta &delta)
{
    nlohmann::json j = nlohmann::json::object();
    j["add_candidates"] = nlohmann::json::array();
    for (auto &c : delta.add_candidates)
        j["add_candidates"].push_back(
            {{"table", c.table}, {"key", c.key_columns}, {"include", c.include_columns}, {"clustered", c.clustered}});
    j["remove_candidates"] = delta.remove_candidates;
    j["add_constraints"] = nlohmann::json::array();
    for (auto &[name, text] : delta.add_constraints)
        j["add_constraints"].push_back({{"name", name}, {"text", text}});
    j["remove_constraints"] = delta.remove_constraints;
    j["weights"] = nlohmann::json::object();
    for (auto &[id, w] : delta.weights)
        j["weights"][id] = w;
    return j;
}

Delta delta_from_json(const nlohmann::json &doc, const Catalog &catalog)
{
    if (!doc.is_object())
        throw Error(kOrigin, "InvalidDelta", "a delta is a JSON object");
    static const std::set<std::string> known{"add_candidates", "remove_candidates", "add_constraints",
                                             "remove_constraints", "weights"};
    for (auto &[key, value] : doc.items()) {
        (void)value;
        if (!known.count(key))
            throw Error(kOrigin, "InvalidDelta", "unknown field `" + key + "`");
    }
    Delta d;
    try {
        if (doc.contains("add_candidates"))
            d.add_candidates = load_dba_candidates(doc.at("add_candidates"), catalog);
        if (doc.contains("remove_candidates"))
            d.remove_candidates = doc.at("remove_candidates").get<std::vector<std::string>>();
        if (doc.contains("add_constraints"))
            for (auto &c : doc.at("add_constraints")) {
                if (c.is_string())
                    d.add_constraints.emplace_back("", c.get<std::string>());
                else
                    d.add_constraints.emplace_back(c.value("name", ""), c.at("text").get<std::string>());
            }
        if (doc.contains("remove_constraints"))
            d.remove_constraints = doc.at("remove_constraints").get<std::vector<std::string>>();
        if (doc.contains("weights"))
            for (auto &[id, w] : doc.at("weights").items())
                d.weights.emplace_back(id, w.get<double>());
    } catch (const nlohmann::json::exception &e) {
        throw Error(kOrigin, "InvalidDelta", e.what());
    }
    return d;
}

/*======================================================================================================================
 * Serialization
 *====================================================================================================================*/

nlohmann::json to_json(const Recommendation &rec)
{
    nlohmann::json j;
    j["status"] = to_string(rec.status);
    j["indexes"] = rec.indexes;
    j["index_details"] = nlohmann::json::array();
    for (auto &c : rec.index_details)
        j["index_details"].push_back(to_json(c));
    j["objective"] = number(rec.objective);
    j["lower_bound"] = number(rec.lower_bound);
    j["gap"] = number(rec.gap);
    j["partial"] = rec.status != SolveStatus::Optimal;
    if (rec.status == SolveStatus::GapReached || rec.status == SolveStatus::TimeLimit) {
        std::ostringstream label;
        label << "within " << std::round(rec.gap * 1000.0) / 10.0 << "% of optimal";
        j["label"] = label.str();
    }
    j["queries"] = nlohmann::json::array();
    for (auto &q : rec.queries)
        j["queries"].push_back(
            {{"id", q.id}, {"weight", q.weight}, {"baseline", q.baseline}, {"recommended", q.recommended}});
    j["baseline_cost"] = rec.baseline_cost;
    j["recommended_cost"] = rec.recommended_cost;
    j["perf"] = rec.perf;
    j["constraints"] = nlohmann::json::array();
    for (auto &c : rec.constraints) {
        nlohmann::json cj{{"name", c.name}, {"soft", c.soft}, {"satisfied", c.satisfied}};
        if (c.soft)
            cj["value"] = c.value;
        j["constraints"].push_back(cj);
    }
    j["nodes_explored"] = rec.nodes_explored;
    j["solve_ms"] = rec.solve_ms;
    j["stopped_by_user"] = rec.stopped_by_user;
    j["warnings"] = rec.warnings;
    return j;
}

nlohmann::json to_json(const WhatIfReport &report)
{
    nlohmann::json j;
    j["queries"] = nlohmann::json::array();
    for (auto &q : report.queries)
        j["queries"].push_back({{"id", q.id}, {"weight", q.weight}, {"baseline", q.baseline}, {"whatif", q.recommended}});
    j["baseline_total"] = report.baseline_total;
    j["whatif_total"] = report.whatif_total;
    return j;
}

nlohmann::json to_json(const SessionStats &s)
{
    return {{"candidates", s.candidates}, {"statements", s.statements}, {"templates", s.templates},
            {"variables", s.variables},   {"constraints", s.constraints}, {"inum_ms", s.inum_ms},
            {"bip_ms", s.bip_ms}};
}

/*======================================================================================================================
 * Session
 *====================================================================================================================*/

SessionStats Session::stats() const
{
    SessionStats s;
    s.candidates = candidates_.size();
    s.statements = workload_.size();
    for (auto &[id, cache] : caches_) {
        (void)id;
        s.templates += cache.template_count();
    }
    s.variables = bip_.variable_count();
    s.constraints = bip_.structural_constraint_count() + bip_.constraints().size();
    s.inum_ms = inum_ms_;
    s.bip_ms = bip_ms_;
    return s;
}

double Session::statement_cost(std::size_t statement, const std::vector<const IndexCandidate *> &config) const
{
    std::vector<const IndexCandidate *> all;
    for (auto &b : baseline_)
        all.push_back(&b);
    all.insert(all.end(), config.begin(), config.end());
    return evaluators_.at(statement)->cost(std::span<const IndexCandidate *const>(all));
}

void Session::add_constraint_text(std::string name, const std::string &text)
{
    auto parsed = parse_constraints(text);
    for (std::size_t i = 0; i != parsed.size(); ++i) {
        std::string n = name;
        if (n.empty())
            n = "c" + std::to_string(next_constraint_++);
        else if (parsed.size() > 1)
            n += "_" + std::to_string(i + 1);
        bool taken = std::any_of(constraints_.begin(), constraints_.end(), [&](auto &c) { return c.name == n; });
        if (taken)
            throw Error(kOrigin, "DuplicateConstraint", n);
        constraints_.push_back({n, parsed.size() > 1 ? line_of(text, parsed[i].line) : text, parsed[i]});
    }
}

void Session::rebuild_bip()
{
    auto start = Clock::now();
    bip_ = build_bip(workload_, candidates_.candidates(), caches_, ucosts_, catalog_, baseline_);
    for (auto &c : constraints_)
        add_constraint(bip_, c.ast, c.name, workload_, catalog_);
    bip_ms_ = ms_since(start);
}

void Session::mutate(const Delta &delta)
{
    // Validate everything first so a rejected delta leaves the session untouched.
    std::set<std::string> removing;
    for (auto &id : delta.remove_candidates) {
        if (!candidates_.find(id))
            throw Error(kOrigin, "UnknownCandidate", id);
        removing.insert(id);
    }
    for (auto &[name, text] : delta.add_constraints)
        (void)parse_constraints(text);
    for (auto &name : delta.remove_constraints)
        if (std::none_of(constraints_.begin(), constraints_.end(), [&](auto &c) { return c.name == name; }))
            throw Error(kOrigin, "UnknownConstraint", name);
    for (auto &[id, w] : delta.weights) {
        if (!workload_.find(id))
            throw Error(kOrigin, "UnknownStatement", id);
        if (!(w > 0) || !std::isfinite(w))
            throw Error(kOrigin, "InvalidWeight", id + " must have a positive weight");
    }

    for (auto &c : delta.add_candidates) {
        if (!candidates_.add(c, "dba"))
            continue;
        for (auto &[id, cache] : caches_) {
            (void)id;
            cache.add_candidate(c, catalog_);
        }
        ucosts_.add_candidate(c, workload_, catalog_);
    }
    for (auto &id : delta.remove_candidates) {
        candidates_.remove(id);
        for (auto &[qid, cache] : caches_) {
            (void)qid;
            cache.remove_candidate(id);
        }
        ucosts_.remove_candidate(id);
    }
    auto keep = constraints_;
    try {
        for (auto &[name, text] : delta.add_constraints)
            add_constraint_text(name, text);
    } catch (...) {
        constraints_ = std::move(keep);
        throw;
    }
    std::erase_if(constraints_, [&](auto &c) {
        return std::find(delta.remove_constraints.begin(), delta.remove_constraints.end(), c.name) !=
               delta.remove_constraints.end();
    });
    for (auto &[id, w] : delta.weights)
        workload_.set_weight(id, w);
    rebuild_bip();
}

Recommendation Session::finish(const Solution &solution)
{
    if (solution.status == SolveStatus::Infeasible)
        throw InfeasibleProblem(solution.conflicting_constraints);

    Recommendation rec;
    rec.status = solution.status;
    rec.objective = solution.objective;
    rec.lower_bound = solution.lower_bound;
    rec.gap = solution.gap;
    rec.nodes_explored = solution.nodes_explored;
    rec.solve_ms = solution.elapsed_ms;
    rec.stopped_by_user = solution.stopped_by_user;
    rec.warnings = bip_.warnings();

    std::vector<char> chosen(bip_.candidates().size(), 0);
    std::vector<const IndexCandidate *> config;
    for (auto a : solution.chosen) {
        chosen[a] = 1;
        config.push_back(&bip_.candidates()[a]);
        rec.indexes.push_back(bip_.candidates()[a].id);
        rec.index_details.push_back(bip_.candidates()[a]);
    }

    auto &stmts = workload_.statements();
    for (std::size_t s = 0; s != stmts.size(); ++s) {
        QueryCostRow row;
        row.id = stmts[s].query.id;
        row.weight = stmts[s].weight;
        row.baseline = baseline_costs_[s];
        row.recommended = statement_cost(s, config);
        rec.baseline_cost += row.weight * row.baseline;
        rec.recommended_cost += row.weight * row.recommended;
        rec.queries.push_back(std::move(row));
    }
    rec.perf = rec.baseline_cost > 0 ? 1.0 - rec.recommended_cost / rec.baseline_cost : 0.0;

    auto assignment = solution.assignment.empty() ? assignment_for(bip_, chosen) : solution.assignment;
    auto &infeasible = bip_.infeasible_constraints();
    for (auto &c : constraints_) {
        ConstraintStatus st;
        st.name = c.name;
        st.soft = c.ast.soft;
        if (c.ast.soft) {
            for (std::size_t t = 0; t != bip_.soft_terms().size(); ++t)
                if (bip_.soft_terms()[t].name == c.name)
                    st.value = bip_.soft_value(t, chosen);
            st.satisfied = st.value <= 1e-9 * std::max(1.0, std::abs(st.value));
        } else {
            st.satisfied = std::find(infeasible.begin(), infeasible.end(), c.name) == infeasible.end();
            for (auto &row : bip_.constraints())
                if (row.group == c.name && !bip_.row_holds(row, assignment, 1e-9 * std::max(1.0, std::abs(row.rhs))))
                    st.satisfied = false;
        }
        rec.constraints.push_back(std::move(st));
    }
    last_ = rec;
    return rec;
}

BusyGuard::BusyGuard(Session &session) : session_(session)
{
    bool expected = false;
    if (!session_.busy_.compare_exchange_strong(expected, true))
        throw Error(kOrigin, "SessionBusy", "session " + session_.id() + " is already solving");
}

BusyGuard::~BusyGuard()
{
    session_.busy_.store(false);
}

/*======================================================================================================================
 * Pipeline
 *====================================================================================================================*/

std::unique_ptr<Session> create_session(const SessionInput &input)
{
    auto s = std::make_unique<Session>();
    s->id_ = input.id.empty() ? random_token() : input.id;
    s->catalog_ = load_catalog(input.catalog);
    s->workload_ = parse_workload(input.workload, s->catalog_);
    s->baseline_ = baseline_configuration(s->catalog_);

    if (input.candidates) {
        for (auto &c : *input.candidates)
            s->candidates_.add(c, "dba");
    } else {
        auto dba = load_dba_candidates(input.dba_candidates.is_null() ? nlohmann::json::array() : input.dba_candidates,
                                       s->catalog_);
        s->candidates_ = generate_candidates(s->workload_, s->catalog_, dba);
    }

    auto start = Clock::now();
    auto &cands = s->candidates_.candidates();
    for (auto &[read, weight] : s->workload_.read_queries()) {
        (void)weight;
        s->caches_.emplace(read->id, TemplatePlanSet(*read, cands, s->catalog_, s->baseline_));
    }
    s->inum_ms_ = ms_since(start);

    for (auto &st : s->workload_.statements()) {
        s->evaluators_.push_back(std::make_unique<WhatIfEvaluator>(st.query, s->catalog_));
        s->baseline_costs_.push_back(s->evaluators_.back()->cost(std::span<const IndexCandidate>(s->baseline_)));
    }
    s->ucosts_ = UpdateCostTable(s->workload_, cands, s->catalog_);
    for (auto &b : s->baseline_)
        s->ucosts_.add_candidate(b, s->workload_, s->catalog_);

    for (auto &ast : parse_constraints(input.constraints)) {
        auto name = "c" + std::to_string(s->next_constraint_++);
        s->constraints_.push_back({name, line_of(input.constraints, ast.line), ast});
    }
    s->rebuild_bip();

    s->initial_ = {{"id", s->id_},
                   {"catalog", to_json(s->catalog_)},
                   {"workload", input.workload},
                   {"constraints", input.constraints},
                   {"candidates", nlohmann::json::array()}};
    for (auto &c : cands)
        s->initial_["candidates"].push_back(to_json(c));
    return s;
}

Recommendation recommend(Session &session, const SolverOptions &options)
{
    BusyGuard guard(session);
    auto solution = solve(session.bip_, options, &session.state_);
    return session.finish(solution);
}

Recommendation apply_delta(Session &session, const Delta &delta, const SolverOptions &options)
{
    BusyGuard guard(session);
    session.mutate(delta);
    session.history_.push_back(delta);
    Solution solution = session.state_.valid ? resolve_delta(session.state_, session.bip_, options)
                                             : solve(session.bip_, options, &session.state_);
    return session.finish(solution);
}

WhatIfReport whatif_report(const Session &session, const std::vector<std::string> &indexes)
{
    std::vector<const IndexCandidate *> config;
    for (auto &id : indexes) {
        auto *c = session.candidates().find(id);
        if (!c)
            throw Error(kOrigin, "UnknownCandidate", id);
        config.push_back(c);
    }
    WhatIfReport report;
    auto &stmts = session.workload().statements();
    for (std::size_t s = 0; s != stmts.size(); ++s) {
        QueryCostRow row;
        row.id = stmts[s].query.id;
        row.weight = stmts[s].weight;
        row.baseline = session.statement_cost(s, {});
        row.recommended = session.statement_cost(s, config);
        report.baseline_total += row.weight * row.baseline;
        report.whatif_total += row.weight * row.recommended;
        report.queries.push_back(std::move(row));
    }
    return report;
}

nlohmann::json export_snapshot(const Session &session)
{
    auto j = session.initial_;
    j["format"] = "index-tuning-session/1";
    j["history"] = nlohmann::json::array();
    for (auto &d : session.history_)
        j["history"].push_back(to_json(d));
    return j;
}

std::unique_ptr<Session> import_snapshot(const nlohmann::json &snapshot)
{
    if (!snapshot.is_object() || !snapshot.contains("catalog") || !snapshot.contains("workload"))
        throw Error(kOrigin, "InvalidSnapshot", "snapshot needs catalog and workload");
    SessionInput input;
    input.catalog = snapshot.at("catalog");
    input.workload = snapshot.at("workload").get<std::string>();
    input.constraints = snapshot.value("constraints", "");
    input.id = snapshot.value("id", "");
    auto catalog = load_catalog(input.catalog);
    std::vector<IndexCandidate> cands;
    for (auto &c : snapshot.value("candidates", nlohmann::json::array()))
        cands.push_back(candidate_from_json(c, catalog));
    input.candidates = std::move(cands);
    auto session = create_session(input);
    for (auto &d : snapshot.value("history", nlohmann::json::array())) {
        auto delta = delta_from_json(d, session->catalog());
        session->mutate(delta);
        session->history_.push_back(std::move(delta));
    }
    return session;
}

}
