#pragma once

#include <ixt/bip.hpp>
#include <ixt/catalog.hpp>
#include <ixt/query.hpp>

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ixt {

enum class Aggregate { Sum, Count, Min, Max };
enum class Measure { Size, Width, One };
enum class Domain { Workload, Candidates, Tables };
enum class DslCmp { Lt, Le, Eq, Ge, Gt };

const char * to_string(DslCmp cmp);
bool compare(double lhs, DslCmp cmp, double rhs);

/// `<attribute> <cmp> <value>`; the value is a number, a name, or a bound
/// loop variable.
struct FilterAtom
{
    std::string attribute;              ///< TABLE, WIDTH, SIZE, CLUSTERED or COLS
    DslCmp cmp = DslCmp::Eq;
    std::optional<double> number;
    std::string name;

    bool operator==(const FilterAtom &) const = default;
};

struct ConstraintAst
{
    enum class Kind { IndexAggregate, QueryCost, Generator };

    bool soft = false;
    Kind kind = Kind::IndexAggregate;
    int line = 0;

    // IndexAggregate
    Aggregate aggregate = Aggregate::Sum;
    Measure measure = Measure::One;
    std::vector<FilterAtom> filter;     ///< conjunction
    DslCmp cmp = DslCmp::Le;
    double bound = 0;

    // QueryCost: COST(query) cmp bound, or cmp factor * BASECOST(query)
    std::string query;
    std::optional<double> factor;

    // Generator: FOR variable IN domain [WHERE domain_filter] body
    std::string variable;
    Domain domain = Domain::Workload;
    std::vector<FilterAtom> domain_filter;
    std::shared_ptr<ConstraintAst> body;

    bool operator==(const ConstraintAst &other) const;
};

/// One statement per non-empty, non-comment line.  Throws DslSyntaxError,
/// UnknownAttribute and NonLinearConstruct (with the line number).
std::vector<ConstraintAst> parse_constraints(std::string_view text);
ConstraintAst parse_constraint(std::string_view statement, int line = 1);

/// What the loop domains range over.
struct ConstraintUniverse
{
    std::span<const IndexCandidate> candidates;
    const Workload *workload = nullptr;
    const Catalog *catalog = nullptr;
};

struct Binding
{
    Domain domain;
    std::size_t index;                  ///< statement, candidate or table position
};

/// A generator-free assertion with its loop variables bound.
struct UnrolledAssert
{
    const ConstraintAst *assertion;
    std::map<std::string, Binding> env;
    std::string suffix;                 ///< e.g. `[Q1]`, `[T1]`
};

std::vector<UnrolledAssert> unroll(const ConstraintAst &ast, const ConstraintUniverse &universe);
/// Candidates an index aggregate ranges over, as positions in universe.candidates.
std::vector<std::size_t> aggregate_scope(const UnrolledAssert &element, const ConstraintUniverse &universe);
/// Statement position of a query-cost assertion.  Throws UnknownStatement.
std::size_t cost_statement(const UnrolledAssert &element, const ConstraintUniverse &universe);
double measure_of(const IndexCandidate &index, Measure measure);
/// Integer-valued left-hand sides get exact strict comparisons; SIZE sums are widened.
bool integral_measure(const ConstraintAst &assertion);

/// Compiles a hard constraint into rows of `bip` under the group `name`.
/// Trivially false constraints are recorded in bip.infeasible_constraints(),
/// empty trivially true ones in bip.warnings().
void add_hard_constraint(BipProblem &bip, const ConstraintAst &ast, const std::string &name, const Workload &workload,
                         const Catalog &catalog);
/// Compiles a soft constraint into a single soft term named `name`.
void add_soft_constraint(BipProblem &bip, const ConstraintAst &ast, const std::string &name, const Workload &workload,
                         const Catalog &catalog);
void add_constraint(BipProblem &bip, const ConstraintAst &ast, const std::string &name, const Workload &workload,
                    const Catalog &catalog);

/// Rows of a hard constraint without touching a problem.
std::vector<LinConstraint> compile_constraint(const ConstraintAst &ast, const std::string &name, const BipProblem &bip,
                                              const Workload &workload, const Catalog &catalog);

}
