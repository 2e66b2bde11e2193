#pragma once

#include <ixt/bip.hpp>

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ixt {

enum class SolveStatus { Optimal, GapReached, TimeLimit, Infeasible };
const char * to_string(SolveStatus status);

/// One anytime progress record.  `incumbent` is infinite until a feasible
/// configuration is known.
struct ProgressEvent
{
    double elapsed_ms = 0;
    double incumbent = 0;
    double lower_bound = 0;
    double gap = 0;
    std::uint64_t nodes_explored = 0;
};

/// A branch-and-bound node as seen by tests: z fixings (-1 free, 0, 1) and
/// the admissible bound computed for it.
struct NodeRecord
{
    std::vector<std::int8_t> fixings;
    double bound;
};

struct SolverOptions
{
    double gap_threshold = 0.05;
    std::optional<double> time_limit;               ///< seconds
    unsigned threads = 1;
    std::size_t batch_size = 8;                     ///< nodes evaluated per round, independent of `threads`
    int root_iterations = 1000;
    int node_iterations = 100;
    int patience = 50;                              ///< non-improving steps before the step is halved
    std::optional<std::uint64_t> node_limit;
    /// Only configurations with an objective below the cutoff are wanted;
    /// subtrees whose bound reaches it are discarded.
    std::optional<double> cutoff;
    std::function<void(const ProgressEvent &)> progress;
    const std::atomic<bool> *stop = nullptr;
    std::function<void(const NodeRecord &)> node_observer;
};

struct Solution
{
    SolveStatus status = SolveStatus::Infeasible;
    std::vector<std::size_t> chosen;                ///< candidate positions in the problem, ascending
    std::vector<std::string> chosen_ids;
    std::vector<std::uint8_t> assignment;           ///< every BIP variable; empty when infeasible
    double objective = 0;
    double lower_bound = 0;
    double gap = 0;
    std::uint64_t nodes_explored = 0;
    double elapsed_ms = 0;
    bool stopped_by_user = false;
    /// The search ended without finding a configuration below the cutoff;
    /// `lower_bound` then holds the cutoff, and `objective` is the best
    /// configuration seen (infinite when none).
    bool cutoff_reached = false;
    std::vector<std::string> conflicting_constraints;   ///< infeasibility report
};

struct FeasibilityReport
{
    bool feasible = true;
    bool decided = true;                            ///< false when the search budget ran out
    std::vector<std::string> conflicting;           ///< minimal-by-deletion set of constraint groups
};

/// Warm-start material carried from one solve to the next.
struct SolverState
{
    bool valid = false;
    std::vector<std::string> incumbent_ids;
    double incumbent_objective = 0;
    std::map<std::pair<std::string, std::string>, double> link_multipliers;   ///< (statement, candidate)
    std::map<std::string, double> row_multipliers;                            ///< constraint row name
    std::size_t open_nodes = 0;
    Solution last;

    /// True when the last solve closed its search tree.  Together with the
    /// signature below it lets a later solve skip the part of the search
    /// space that was already exhausted.
    bool proven = false;
    struct Signature
    {
        double constant = 0;
        std::map<std::string, double> block_scale;         ///< statement id
        std::map<std::string, double> z_coefficient;       ///< candidate id
        /// z rows in `<=` form, keyed by row name and occurrence
        std::map<std::string, std::pair<double, std::map<std::string, double>>> z_rows;
        std::map<std::string, std::pair<std::string, double>> cost_rows;   ///< name -> (statement, rhs)
    } signature;
};

FeasibilityReport check_feasibility(const BipProblem &bip);

/// Lagrangian bound of the whole problem after `iterations` subgradient
/// steps from zero multipliers; `upper` drives the step length.
double lagrangian_bound(const BipProblem &bip, int iterations, std::optional<double> upper = std::nullopt);

/// Optimal y/x assignment for a configuration (per-query minimization).
std::vector<std::uint8_t> assignment_for(const BipProblem &bip, const std::vector<char> &chosen);

Solution solve(const BipProblem &bip, const SolverOptions &options = {}, SolverState *state = nullptr);

/// Solves `modified` reusing the incumbent and multipliers of `state`, then
/// updates `state`.  Throws StaleState when `state` holds no prior solve.
Solution resolve_delta(SolverState &state, const BipProblem &modified, const SolverOptions &options = {});

}
