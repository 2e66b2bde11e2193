#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace ixt {

/// Outcome of one family of cross-checks over a range of random instances.
struct CheckRow
{
    std::string name;
    std::size_t instances = 0;
    std::size_t passed = 0;
    std::size_t failed = 0;
    std::vector<std::string> failures;   ///< the first few, for the report

    bool ok() const { return failed == 0; }
};

struct SelfCheckOptions
{
    std::uint64_t first_seed = 1;
    std::size_t seeds = 200;
    unsigned threads = 1;
    std::size_t whatif_draws = 8;              ///< random configurations per read query
    std::function<void(std::uint64_t seed)> on_seed;
};

/// Runs the exhaustive cross-checks used by `advisor oracle-check`:
///   optimum     solver at gap 0 against subset enumeration, constraints included
///   embedding   every subset of the candidate lattice maps to a feasible BIP point of equal cost
///   inum        template-cache costs against the what-if optimizer
std::vector<CheckRow> run_self_check(const SelfCheckOptions &options);

}
