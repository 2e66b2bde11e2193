#pragma once

#include <ixt/catalog.hpp>
#include <ixt/constraints.hpp>
#include <ixt/query.hpp>

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace ixt {

/// A generated tuning problem.  The same seed always yields the same instance.
struct SyntheticInstance
{
    std::uint64_t seed = 0;
    Catalog catalog;
    std::string workload_text;
    Workload workload;
    std::vector<IndexCandidate> candidates;
    std::string constraint_text;
    std::vector<ConstraintAst> constraints;
};

struct SmallInstanceOptions
{
    std::size_t max_tables = 4;
    std::size_t max_statements = 8;
    std::size_t max_candidates = 12;
    bool updates = true;
    bool joins = true;
    bool orders = true;
    bool constraints = true;       ///< add a random budget and up to two other hard constraints
};

struct BenchOptions
{
    std::size_t statements = 1000;
    std::size_t tables = 8;
    std::size_t min_columns = 8;
    std::size_t max_columns = 14;
    double update_fraction = 0.1;
    std::uint64_t seed = 1;
};

Catalog random_catalog(std::mt19937_64 &rng, std::size_t tables, std::size_t min_columns, std::size_t max_columns,
                       std::int64_t min_rows = 1000, std::int64_t max_rows = 1000000);

/// Workload document with one statement per line; at most three tables per statement.
std::string random_workload_text(std::mt19937_64 &rng, const Catalog &catalog, std::size_t statements,
                                  double update_fraction, bool joins, bool orders, const std::string &prefix = "Q");

/// Instance for exhaustive cross-checks: few tables, few statements, a
/// subsample of the generated candidates.
SyntheticInstance small_instance(std::uint64_t seed, const SmallInstanceOptions &options = {});

/// Large instance for timing: candidates come from the generator unchanged.
SyntheticInstance bench_instance(const BenchOptions &options);

}
