#pragma once

#include <ixt/catalog.hpp>
#include <ixt/query.hpp>
#include <ixt/whatif.hpp>

#include <json.hpp>

#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace ixt {

/// One finite γ entry: a cached candidate and its access cost for the slot.
struct GammaEntry
{
    std::size_t candidate;      ///< position in TemplatePlanSet::candidate_ids()
    double cost;
};

struct TemplateSlot
{
    SlotSpec spec;
    std::optional<double> no_index;   ///< absent: no access without a new index fits this slot
    std::vector<GammaEntry> gamma;    ///< finite entries only, in cache order
};

struct Template
{
    double beta = 0;
    std::vector<TemplateSlot> slots;  ///< referenced tables in catalog order
};

/// The cached template plans of one statement of W_r.  Indexes from the
/// baseline configuration are folded into the NO_INDEX entry, so costs are
/// those of X ∪ baseline.
class TemplatePlanSet
{
public:
    TemplatePlanSet() = default;
    TemplatePlanSet(const QueryDescriptor &query, std::span<const IndexCandidate> candidates, const Catalog &catalog,
                    std::span<const IndexCandidate> baseline = {});

    const std::string & query_id() const { return query_.id; }
    const QueryDescriptor & query() const { return query_; }
    const std::vector<Template> & templates() const { return templates_; }
    std::size_t template_count() const { return templates_.size(); }

    const std::vector<std::string> & candidate_ids() const { return ids_; }
    std::optional<std::size_t> local_index(const std::string &id) const;

    /// γ for template k and catalog table `table`; `index == nullptr` is
    /// NO_INDEX.  Zero when the table is not referenced, infinite when the
    /// access is incompatible.  Throws UnknownTemplate, ForeignCandidate.
    double gamma(std::size_t k, std::size_t table, const IndexCandidate *index) const;

    /// Cheapest template with the cheapest allowed access per slot.  Never enumerates plans.
    double cost(std::span<const IndexCandidate *const> config) const;
    double cost(std::span<const IndexCandidate> config) const;

    /// Extends every template with the γ column of a new candidate.  Reuses
    /// the stored skeletons; no plan enumeration happens.
    void add_candidate(const IndexCandidate &index, const Catalog &catalog);
    void remove_candidate(const std::string &id);

    nlohmann::json to_json(const Catalog &catalog) const;

private:
    void add_column(const IndexCandidate &index, const Catalog &catalog);

    QueryDescriptor query_;
    QueryProfile profile_;
    std::vector<Template> templates_;
    std::vector<std::string> ids_;
    std::unordered_map<std::string, std::size_t> local_;
};

TemplatePlanSet build_templates(const QueryDescriptor &query, std::span<const IndexCandidate> candidates,
                                const Catalog &catalog, std::span<const IndexCandidate> baseline = {});

double inum_cost(const TemplatePlanSet &templates, std::span<const IndexCandidate> config);

}
