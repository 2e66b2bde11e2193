#pragma once

#include <ixt/advisor.hpp>
#include <ixt/bip.hpp>
#include <ixt/solver.hpp>

#include <json.hpp>

#include <string>
#include <vector>

namespace ixt {

struct ParetoPoint
{
    std::vector<double> lambda;          ///< workload-cost weight first, then one per soft term
    std::vector<double> objectives;      ///< workload cost, then the violation of each soft term
    std::vector<std::string> indexes;
    double solve_ms = 0;
    SolveStatus status = SolveStatus::Optimal;
    std::uint64_t nodes_explored = 0;
};

struct ChordOptions
{
    double epsilon = 0.02;               ///< distance threshold after per-axis normalization
    std::size_t max_points = 16;
    SolverOptions solver = [] {
        SolverOptions o;
        o.gap_threshold = 0.0;
        return o;
    }();
    bool warm_start = true;              ///< carry incumbent and multipliers between solves
    double eta = 1e-6;                   ///< relative weight kept on the other objectives at the extremes
};

/// Supported Pareto points of the scalarized family λ0·cost + Σ λj·gj, found
/// by recursive facet refinement.  Throws NoSoftConstraints, InvalidEpsilon.
std::vector<ParetoPoint> chord(const BipProblem &bip, const ChordOptions &options = {});

/// Runs `chord` on the session's current problem while holding the session.
std::vector<ParetoPoint> chord(Session &session, const ChordOptions &options = {});

nlohmann::json to_json(const std::vector<ParetoPoint> &points);

/// Scatter of the first two objectives as a standalone SVG document.
std::string pareto_svg(const std::vector<ParetoPoint> &points, const std::string &x_label = "workload cost",
                       const std::string &y_label = "soft violation");

}
