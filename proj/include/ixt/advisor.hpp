#pragma once

#include <ixt/bip.hpp>
#include <ixt/candgen.hpp>
#include <ixt/catalog.hpp>
#include <ixt/constraints.hpp>
#include <ixt/error.hpp>
#include <ixt/inum.hpp>
#include <ixt/query.hpp>
#include <ixt/solver.hpp>
#include <ixt/whatif.hpp>

#include <json.hpp>

#include <atomic>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace ixt {

/// Raised when the hard constraints admit no configuration.
class InfeasibleProblem : public Error
{
public:
    explicit InfeasibleProblem(std::vector<std::string> conflicting);
    const std::vector<std::string> & conflicting() const { return conflicting_; }

private:
    std::vector<std::string> conflicting_;
};

struct NamedConstraint
{
    std::string name;
    std::string text;
    ConstraintAst ast;
};

/// A change to a session.  Fields are applied in declaration order.
struct Delta
{
    std::vector<IndexCandidate> add_candidates;
    std::vector<std::string> remove_candidates;
    std::vector<std::pair<std::string, std::string>> add_constraints;   ///< (name, DSL text); empty name: auto
    std::vector<std::string> remove_constraints;
    std::vector<std::pair<std::string, double>> weights;                ///< (statement id, new f_q)

    bool empty() const;
};

nlohmann::json to_json(const Delta &delta);
Delta delta_from_json(const nlohmann::json &document, const Catalog &catalog);

struct QueryCostRow
{
    std::string id;
    double weight = 1;
    double baseline = 0;        ///< whatif_cost(q, X0)
    double recommended = 0;     ///< whatif_cost(q, X ∪ X0)
};

struct ConstraintStatus
{
    std::string name;
    bool soft = false;
    bool satisfied = true;
    double value = 0;           ///< soft: violation g(X)
};

struct Recommendation
{
    SolveStatus status = SolveStatus::Infeasible;
    std::vector<std::string> indexes;
    std::vector<IndexCandidate> index_details;
    double objective = 0;
    double lower_bound = 0;
    double gap = 0;
    std::vector<QueryCostRow> queries;
    double baseline_cost = 0;
    double recommended_cost = 0;
    double perf = 0;
    std::vector<ConstraintStatus> constraints;
    std::uint64_t nodes_explored = 0;
    double solve_ms = 0;
    bool stopped_by_user = false;
    std::vector<std::string> warnings;
};

nlohmann::json to_json(const Recommendation &rec);

struct WhatIfReport
{
    std::vector<QueryCostRow> queries;
    double baseline_total = 0;
    double whatif_total = 0;
};

nlohmann::json to_json(const WhatIfReport &report);

struct SessionStats
{
    std::size_t candidates = 0;
    std::size_t statements = 0;
    std::size_t templates = 0;
    std::size_t variables = 0;
    std::size_t constraints = 0;        ///< structural plus explicit rows
    double inum_ms = 0;
    double bip_ms = 0;
};

nlohmann::json to_json(const SessionStats &stats);

/// Inputs of a new session.  When `candidates` is set it replaces generation.
struct SessionInput
{
    nlohmann::json catalog;
    std::string workload;
    std::string constraints;
    nlohmann::json dba_candidates = nlohmann::json::array();
    std::optional<std::vector<IndexCandidate>> candidates;
    std::string id;
};

/// A long-lived tuning session.  Operations on one session are serialized;
/// overlapping solves fail with SessionBusy.
class Session
{
public:
    const std::string & id() const { return id_; }
    const Catalog & catalog() const { return catalog_; }
    const Workload & workload() const { return workload_; }
    const CandidateSet & candidates() const { return candidates_; }
    const std::vector<IndexCandidate> & baseline() const { return baseline_; }
    const std::map<std::string, TemplatePlanSet> & templates() const { return caches_; }
    const UpdateCostTable & update_costs() const { return ucosts_; }
    const std::vector<NamedConstraint> & constraints() const { return constraints_; }
    const BipProblem & bip() const { return bip_; }
    const SolverState & solver_state() const { return state_; }
    SolverState & solver_state() { return state_; }
    const std::vector<Delta> & history() const { return history_; }
    const std::optional<Recommendation> & last_recommendation() const { return last_; }
    SessionStats stats() const;
    bool busy() const { return busy_.load(); }

    /// Structural part of a delta: candidates, caches, constraints, weights and the BIP.
    void mutate(const Delta &delta);
    /// Per-statement what-if costs of X ∪ X0 from the evaluators built at creation.
    double statement_cost(std::size_t statement, const std::vector<const IndexCandidate *> &config) const;

private:
    friend std::unique_ptr<Session> create_session(const SessionInput &input);
    friend class BusyGuard;
    friend Recommendation recommend(Session &, const SolverOptions &);
    friend Recommendation apply_delta(Session &, const Delta &, const SolverOptions &);
    friend nlohmann::json export_snapshot(const Session &);
    friend std::unique_ptr<Session> import_snapshot(const nlohmann::json &);

    void rebuild_bip();
    void add_constraint_text(std::string name, const std::string &text);
    Recommendation finish(const Solution &solution);

    std::string id_;
    Catalog catalog_;
    Workload workload_;
    CandidateSet candidates_;
    std::vector<IndexCandidate> baseline_;
    std::map<std::string, TemplatePlanSet> caches_;
    UpdateCostTable ucosts_;
    std::vector<std::unique_ptr<WhatIfEvaluator>> evaluators_;
    std::vector<double> baseline_costs_;
    std::vector<NamedConstraint> constraints_;
    int next_constraint_ = 1;
    BipProblem bip_;
    SolverState state_;
    std::vector<Delta> history_;
    std::optional<Recommendation> last_;
    double inum_ms_ = 0;
    double bip_ms_ = 0;
    std::atomic<bool> busy_{false};
    nlohmann::json initial_;
};

/// Holds the busy flag of a session for one operation.  Throws SessionBusy.
class BusyGuard
{
public:
    explicit BusyGuard(Session &session);
    ~BusyGuard();
    BusyGuard(const BusyGuard &) = delete;
    BusyGuard & operator=(const BusyGuard &) = delete;

private:
    Session &session_;
};

/// Parses, generates candidates, builds template caches and the BIP.  Does not solve.
std::unique_ptr<Session> create_session(const SessionInput &input);

/// Feasibility check and solve.  Throws InfeasibleProblem.
Recommendation recommend(Session &session, const SolverOptions &options = {});

/// Applies the delta, warm-starts the solver from the previous run, and
/// records the delta.  Throws UnknownCandidate, InfeasibleProblem.
Recommendation apply_delta(Session &session, const Delta &delta, const SolverOptions &options = {});

/// Per-statement costs under X ∪ X0 and under X0.  Throws UnknownCandidate.
WhatIfReport whatif_report(const Session &session, const std::vector<std::string> &indexes);

nlohmann::json export_snapshot(const Session &session);
/// Rebuilds a session from a snapshot and replays its delta history without solving.
std::unique_ptr<Session> import_snapshot(const nlohmann::json &snapshot);

}
