#pragma once

#include <ixt/catalog.hpp>
#include <ixt/query.hpp>

#include <json.hpp>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ixt {

/// The candidate universe S with a provenance tag per candidate.  Insertion
/// order is preserved; structurally equal candidates are stored once.
class CandidateSet
{
public:
    /// Returns false (and keeps the first provenance) for a structural duplicate.
    bool add(IndexCandidate candidate, std::string provenance);
    bool remove(const std::string &id);

    const std::vector<IndexCandidate> & candidates() const { return candidates_; }
    const std::vector<std::string> & provenance() const { return provenance_; }
    std::size_t size() const { return candidates_.size(); }
    bool empty() const { return candidates_.empty(); }

    const IndexCandidate * find(const std::string &id) const;
    std::optional<std::string> provenance_of(const std::string &id) const;
    /// S_i for catalog table `table`.
    std::vector<const IndexCandidate *> on_table(std::size_t table) const;

private:
    std::vector<IndexCandidate> candidates_;
    std::vector<std::string> provenance_;
};

/// Per-query heuristics over W_r plus the DBA set.  Generated candidates
/// identical to a baseline index are skipped; DBA candidates never are.
CandidateSet generate_candidates(const Workload &workload, const Catalog &catalog,
                                 std::span<const IndexCandidate> dba = {});

/// `[{"table","key":[...],"include":[...],"clustered":bool}]`.  Throws InvalidDbaCandidate.
std::vector<IndexCandidate> load_dba_candidates(const nlohmann::json &document, const Catalog &catalog);

}
