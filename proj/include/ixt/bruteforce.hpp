#pragma once

#include <ixt/bip.hpp>
#include <ixt/catalog.hpp>
#include <ixt/constraints.hpp>
#include <ixt/query.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ixt {

/// Ground-truth evaluator over subsets of a small candidate universe.  Every
/// cost comes from the what-if optimizer with the baseline configuration
/// added; constraints are evaluated by their meaning, never compiled.
class Oracle
{
public:
    Oracle(const Workload &workload, std::span<const IndexCandidate> candidates, const Catalog &catalog);
    ~Oracle();
    Oracle(const Oracle &) = delete;
    Oracle & operator=(const Oracle &) = delete;

    std::size_t candidate_count() const;
    const std::vector<IndexCandidate> & candidates() const;

    /// Σ f_q · whatif_cost(q, X ∪ X0), with X given as a bit mask over the candidates.
    double itcost(std::uint64_t mask) const;
    double statement_cost(std::size_t statement, std::uint64_t mask) const;
    double base_statement_cost(std::size_t statement) const;

    /// True when X satisfies the constraint.  A soft constraint is judged as if it were hard.
    bool satisfies(const ConstraintAst &constraint, std::uint64_t mask) const;
    /// Violation measure g(X) of a soft constraint, summed over its unrolled elements.
    double violation(const ConstraintAst &constraint, std::uint64_t mask) const;

    std::vector<std::string> ids(std::uint64_t mask) const;

private:
    struct Impl;
    Impl *impl_;
};

struct OracleResult
{
    bool feasible = false;
    double cost = 0;
    std::vector<std::vector<std::string>> minimizers;   ///< every optimal set, ids sorted
    std::vector<std::pair<std::uint64_t, double>> table;   ///< (mask, ITcost) per feasible subset when requested
};

/// Exhaustive search over all 2^|S| subsets.  Throws TooManyCandidates when |S| > 20.
OracleResult enumerate_optimal(const Workload &workload, std::span<const IndexCandidate> candidates,
                               std::span<const ConstraintAst> hard, const Catalog &catalog, bool keep_table = false);

/// The y/x/z assignment that realizes configuration X: per query the cheapest
/// template and the cheapest allowed access per slot.
std::vector<std::uint8_t> assignment_from_config(const std::vector<std::string> &config, const BipProblem &bip);

struct ParetoEntry
{
    std::vector<double> objectives;      ///< workload cost, then one violation per soft constraint
    std::vector<std::string> indexes;
};

/// Non-dominated (workload cost, soft violations) vectors over every feasible
/// subset.  Throws TooManyCandidates when |S| > 16.
std::vector<ParetoEntry> pareto_exact(const Workload &workload, std::span<const IndexCandidate> candidates,
                                      std::span<const ConstraintAst> soft, std::span<const ConstraintAst> hard,
                                      const Catalog &catalog);

}
