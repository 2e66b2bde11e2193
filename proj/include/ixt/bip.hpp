#pragma once

#include <ixt/catalog.hpp>
#include <ixt/inum.hpp>
#include <ixt/query.hpp>
#include <ixt/whatif.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace ixt {

enum class Cmp { Le, Eq, Ge };
const char * to_string(Cmp cmp);

enum class OriginKind { Structural, Dba, Clustered };

struct LinTerm
{
    std::size_t var;
    double coef;

    bool operator==(const LinTerm &) const = default;
};

struct LinConstraint
{
    std::vector<LinTerm> terms;
    Cmp cmp = Cmp::Le;
    double rhs = 0;
    OriginKind origin = OriginKind::Structural;
    std::string name;                       ///< row name, e.g. `c2[Q1]`
    std::string group;                      ///< DSL statement the row came from, e.g. `c2`
    std::optional<std::size_t> cost_of_query;   ///< set when the row bounds the cost of one query block

    bool operator==(const LinConstraint &) const = default;
};

/// A soft term g(X) = Σ z_coef·z_a + Σ cost_coef·cost(q) + constant, where
/// cost(q) is the full (raw) cost of the statement behind a query block.
struct SoftTerm
{
    std::string name;
    std::vector<std::pair<std::size_t, double>> z_terms;      ///< (candidate, coefficient)
    std::vector<std::pair<std::size_t, double>> cost_terms;   ///< (query block, coefficient)
    double constant = 0;
};

/// One access option of a slot: a candidate (index into BipProblem::candidates())
/// or NO_INDEX (candidate == kNoIndex), with the raw γ.
struct BipOption
{
    static constexpr std::int32_t kNoIndex = -1;
    std::int32_t candidate;
    double gamma;
};

struct BipSlot
{
    std::size_t table;
    std::size_t first_var;                  ///< x variable of options[0]
    std::vector<BipOption> options;         ///< NO_INDEX first when finite, then candidates in S order
};

struct BipTemplate
{
    double beta;
    std::size_t y_var;
    std::vector<BipSlot> slots;
};

/// All variables of one statement of W_r.  For an UPDATE the block is its
/// query shell and carries the maintenance terms of the statement.
struct QueryBlock
{
    std::string statement_id;
    std::string read_id;                    ///< template cache key (shell id for updates)
    double weight = 1;                      ///< f_q
    bool is_update = false;
    std::vector<BipTemplate> templates;
    std::vector<std::pair<std::size_t, double>> ucost;   ///< (candidate, raw ucost) for updates
    double update_constant = 0;             ///< raw c_q plus baseline maintenance
    std::size_t first_var = 0;
    std::size_t end_var = 0;
};

enum class VarKind { Z, Y, X };

struct VarInfo
{
    VarKind kind;
    std::size_t candidate = 0;              ///< Z, or X with a real index
    std::size_t block = 0;                  ///< Y, X
    std::size_t template_index = 0;         ///< Y, X
    std::size_t slot = 0;                   ///< X
    std::size_t option = 0;                 ///< X
};

/// The index-tuning BIP.  Storage is compact: y/x objective coefficients are
/// scale(block) × raw cost and the three structural families are implicit.
class BipProblem
{
public:
    const std::vector<IndexCandidate> & candidates() const { return candidates_; }
    std::optional<std::size_t> candidate_index(const std::string &id) const;
    const std::vector<QueryBlock> & blocks() const { return blocks_; }
    std::optional<std::size_t> block_of_statement(const std::string &statement_id) const;
    const std::vector<std::string> & tables() const { return tables_; }

    std::size_t variable_count() const { return variable_count_; }
    std::size_t z_var(std::size_t candidate) const { return candidate; }
    VarInfo decode(std::size_t var) const;
    std::string variable_name(std::size_t var) const;

    double objective_coefficient(std::size_t var) const;
    double objective_constant() const { return constant_; }
    double block_scale(std::size_t block) const { return scale_[block]; }
    double z_coefficient(std::size_t candidate) const { return z_coef_[candidate]; }

    std::size_t structural_constraint_count() const;
    /// Materializes the implicit y-sum, x-sum and z–x link rows in that order.
    std::vector<LinConstraint> structural_constraints() const;

    const std::vector<LinConstraint> & constraints() const { return constraints_; }
    void add_constraint(LinConstraint row);
    /// Removes every row (and soft term) of a DSL statement group.
    void remove_group(const std::string &group);

    const std::vector<SoftTerm> & soft_terms() const { return soft_terms_; }
    void add_soft_term(SoftTerm term);
    const std::vector<double> & lambda() const { return lambda_; }

    /// Names of constraints that compile to something trivially false.
    const std::vector<std::string> & infeasible_constraints() const { return infeasible_; }
    void add_infeasible(std::string name) { infeasible_.push_back(std::move(name)); }
    const std::vector<std::string> & warnings() const { return warnings_; }
    void add_warning(std::string text) { warnings_.push_back(std::move(text)); }

    /// Raw cost(q, X ∪ baseline) of a block: the cheapest template over the allowed candidates.
    double block_cost(std::size_t block, const std::vector<char> &chosen) const;
    /// Block cost with no candidate of S: cost(q, X0) restricted to the read part.
    double block_base_cost(std::size_t block) const;
    /// Terms of the raw statement cost of a block: β·y, γ·x and ucost·z.  The
    /// constant part is the block's update_constant.
    std::vector<LinTerm> statement_cost_terms(std::size_t block) const;
    /// Full cost of the statement behind a block, including maintenance.
    double statement_cost(std::size_t block, const std::vector<char> &chosen) const;

    /// Objective for a configuration with y/x set by per-query minimization.
    double objective_of(const std::vector<char> &chosen) const;
    /// Unscalarized workload cost of a configuration.
    double workload_cost_of(const std::vector<char> &chosen) const;
    double soft_value(std::size_t term, const std::vector<char> &chosen) const;

    /// Value of a complete assignment under the objective.
    double evaluate(const std::vector<std::uint8_t> &assignment) const;
    /// Every structural and explicit row holds (tolerance is absolute).
    bool satisfies(const std::vector<std::uint8_t> &assignment, double tolerance = 1e-9) const;
    bool row_holds(const LinConstraint &row, const std::vector<std::uint8_t> &assignment,
                   double tolerance = 1e-9) const;

    void dump_lp(std::ostream &os) const;

    /// Copy with objective λ0·cost + Σ λ_j·g_j.  Throws WeightOutOfRange.
    BipProblem scalarized(std::span<const double> lambda) const;

private:
    friend BipProblem build_bip(const Workload &, std::span<const IndexCandidate>,
                                const std::map<std::string, TemplatePlanSet> &, const UpdateCostTable &,
                                const Catalog &, std::span<const IndexCandidate>);

    std::vector<IndexCandidate> candidates_;
    std::unordered_map<std::string, std::size_t> candidate_pos_;
    std::vector<QueryBlock> blocks_;
    std::vector<std::string> tables_;
    std::size_t variable_count_ = 0;

    std::vector<double> base_scale_;
    std::vector<double> base_z_coef_;
    double base_constant_ = 0;
    std::vector<double> scale_;
    std::vector<double> z_coef_;
    double constant_ = 0;
    std::vector<double> lambda_;

    std::vector<LinConstraint> constraints_;
    std::vector<SoftTerm> soft_terms_;
    std::vector<std::string> infeasible_;
    std::vector<std::string> warnings_;
};

/// Builds the problem.  `candidates` is S (any order; stored sorted by
/// id), `caches` maps every W_r statement id to its template cache, and
/// `baseline` contributes its maintenance cost to the constant.  Also
/// emits the at-most-one-clustered row for every table with two or more
/// clustered candidates.  Throws MissingTemplateCache, MissingUpdateCost.
BipProblem build_bip(const Workload &workload, std::span<const IndexCandidate> candidates,
                     const std::map<std::string, TemplatePlanSet> &caches, const UpdateCostTable &ucosts,
                     const Catalog &catalog, std::span<const IndexCandidate> baseline = {});

BipProblem scalarize(const BipProblem &bip, std::span<const double> lambda);

}
