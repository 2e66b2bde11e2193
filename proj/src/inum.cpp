#include <ixt/inum.hpp>

#include <ixt/error.hpp>

#include <algorithm>
#include <cmath>

namespace ixt {

namespace {

constexpr const char *kOrigin = "inum";

}

TemplatePlanSet::TemplatePlanSet(const QueryDescriptor &query, std::span<const IndexCandidate> candidates,
                                 const Catalog &catalog, std::span<const IndexCandidate> baseline)
    : query_(query)
    , profile_(profile_query(query, catalog))
{
    for (auto &plan : enumerate_plans(query, catalog)) {
        Template t;
        t.beta = plan.internal_cost;
        for (auto &spec : plan.slots) {
            TemplateSlot slot;
            slot.spec = spec;
            double best = access_cost(profile_, spec, nullptr, catalog);
            for (auto &b : baseline)
                if (b.table_ordinal == spec.table)
                    best = std::min(best, access_cost(profile_, spec, &b, catalog));
            if (std::isfinite(best))
                slot.no_index = best;
            t.slots.push_back(std::move(slot));
        }
        templates_.push_back(std::move(t));
    }
    for (auto &a : candidates)
        if (query_.references(a.table))
            add_column(a, catalog);
}

std::optional<std::size_t> TemplatePlanSet::local_index(const std::string &id) const
{
    auto it = local_.find(id);
    if (it == local_.end())
        return std::nullopt;
    return it->second;
}

void TemplatePlanSet::add_column(const IndexCandidate &index, const Catalog &catalog)
{
    if (local_.count(index.id))
        return;
    auto pos = ids_.size();
    ids_.push_back(index.id);
    local_.emplace(index.id, pos);
    for (auto &t : templates_)
        for (auto &slot : t.slots) {
            if (slot.spec.table != index.table_ordinal)
                continue;
            double c = access_cost(profile_, slot.spec, &index, catalog);
            if (std::isfinite(c))
                slot.gamma.push_back({pos, c});
        }
}

void TemplatePlanSet::add_candidate(const IndexCandidate &index, const Catalog &catalog)
{
    if (query_.references(index.table))
        add_column(index, catalog);
}

void TemplatePlanSet::remove_candidate(const std::string &id)
{
    auto it = local_.find(id);
    if (it == local_.end())
        return;
    auto gone = it->second;
    ids_.erase(ids_.begin() + std::ptrdiff_t(gone));
    local_.clear();
    for (std::size_t i = 0; i != ids_.size(); ++i)
        local_.emplace(ids_[i], i);
    for (auto &t : templates_)
        for (auto &slot : t.slots) {
            std::erase_if(slot.gamma, [&](auto &g) { return g.candidate == gone; });
            for (auto &g : slot.gamma)
                if (g.candidate > gone)
                    --g.candidate;
        }
}

double TemplatePlanSet::gamma(std::size_t k, std::size_t table, const IndexCandidate *index) const
{
    if (k >= templates_.size())
        throw Error(kOrigin, "UnknownTemplate", query_.id + " has no template " + std::to_string(k));
    auto &t = templates_[k];
    auto slot = std::find_if(t.slots.begin(), t.slots.end(), [&](auto &s) { return s.spec.table == table; });
    if (slot == t.slots.end())
        return 0.0;
    if (!index)
        return slot->no_index.value_or(kInfiniteCost);
    auto pos = local_index(index->id);
    if (!pos)
        throw Error(kOrigin, "ForeignCandidate", index->id + " is not in the template cache of " + query_.id);
    for (auto &g : slot->gamma)
        if (g.candidate == *pos)
            return g.cost;
    return kInfiniteCost;
}

double TemplatePlanSet::cost(std::span<const IndexCandidate *const> config) const
{
    std::vector<bool> present(ids_.size(), false);
    for (auto *a : config) {
        if (!query_.references(a->table))
            continue;
        auto pos = local_index(a->id);
        if (!pos)
            throw Error(kOrigin, "ForeignCandidate", a->id + " is not in the template cache of " + query_.id);
        present[*pos] = true;
    }

    double best = kInfiniteCost;
    std::vector<double> mins;
    for (auto &t : templates_) {
        mins.clear();
        bool ok = true;
        for (auto &slot : t.slots) {
            double m = slot.no_index.value_or(kInfiniteCost);
            for (auto &g : slot.gamma)
                if (present[g.candidate])
                    m = std::min(m, g.cost);
            if (!std::isfinite(m)) {
                ok = false;
                break;
            }
            mins.push_back(m);
        }
        if (ok)
            best = std::min(best, compose_cost(mins, t.beta));
    }
    return best;
}

double TemplatePlanSet::cost(std::span<const IndexCandidate> config) const
{
    std::vector<const IndexCandidate *> ptrs;
    for (auto &a : config)
        ptrs.push_back(&a);
    return cost(std::span<const IndexCandidate *const>(ptrs));
}

nlohmann::json TemplatePlanSet::to_json(const Catalog &catalog) const
{
    nlohmann::json doc{{"query", query_.id}, {"templates", nlohmann::json::array()}};
    for (auto &t : templates_) {
        nlohmann::json jt{{"beta", t.beta}, {"slots", nlohmann::json::array()}};
        for (auto &slot : t.slots) {
            nlohmann::json gamma = nlohmann::json::object();
            if (slot.no_index)
                gamma["NO_INDEX"] = *slot.no_index;
            for (auto &g : slot.gamma)
                gamma[ids_[g.candidate]] = g.cost;
            jt["slots"].push_back({{"table", catalog.table(slot.spec.table).name},
                                   {"order", slot.spec.required_order ? nlohmann::json(*slot.spec.required_order)
                                                                      : nlohmann::json(nullptr)},
                                   {"multiplicity", slot.spec.multiplicity},
                                   {"gamma", std::move(gamma)}});
        }
        doc["templates"].push_back(std::move(jt));
    }
    return doc;
}

TemplatePlanSet build_templates(const QueryDescriptor &query, std::span<const IndexCandidate> candidates,
                                const Catalog &catalog, std::span<const IndexCandidate> baseline)
{
    return TemplatePlanSet(query, candidates, catalog, baseline);
}

double inum_cost(const TemplatePlanSet &templates, std::span<const IndexCandidate> config)
{
    return templates.cost(config);
}

}
