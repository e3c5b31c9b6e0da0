#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "medkg/andmerge.hpp"
#include "medkg/evalmetrics.hpp"
#include "medkg/ingest.hpp"

namespace medkg::linkage {

using andmerge::UnifiedAssignment;
using ingest::ArticleRecord;
using ingest::AuthorInstance;

// ISO 7064 mod 11-2 over the 16 base-11 digits (xxxx-xxxx-xxxx-xxxX).
bool orcid_checksum_ok(std::string_view orcid_id);

struct OrcidWork {
    std::string doi;      // empty = absent
    std::string title;
    std::string journal;
    std::optional<int> pub_year;
};

struct OrcidAffiliationEntry {
    std::string organization;
    std::string department;  // employment only
    std::string city;
    std::string region;
    std::string country;
    std::string begin_year;  // kept as text; source data is unvalidated
    std::string end_year;
    std::string role;  // education only (degree)
    std::string identifier;
    std::string id_source;
};

struct OrcidRecord {
    std::string orcid_id;
    std::string last_name;
    std::string fore_name;
    std::vector<OrcidWork> works;
    std::vector<OrcidAffiliationEntry> employments;
    std::vector<OrcidAffiliationEntry> educations;
};

struct OrcidLoadReport {
    std::uint64_t records = 0;
    std::uint64_t invalid_checksum_skipped = 0;
};

// Builds records from the three extract files (one person row per work;
// empty work fields allowed). Rows with an invalid ORCID checksum are
// skipped and counted.
std::vector<OrcidRecord> load_orcid_records(const ingest::TabularData& person,
                                            const ingest::TabularData* employment,
                                            const ingest::TabularData* education,
                                            OrcidLoadReport* report = nullptr);

// --- funding -----------------------------------------------------------------

// One (project, subproject, investigator) record, fiscal years folded in.
struct NihProjectRecord {
    std::string pi_id;
    std::string pi_name;  // "LAST, FIRST [MIDDLE]"
    std::string project_number;
    std::string sub_project_number;
    std::set<int> fiscal_years;
};

struct NihProjectSet {
    std::vector<NihProjectRecord> records;                          // sorted, unique
    std::map<std::string, std::vector<std::uint64_t>> project_pmids;  // sorted, unique
    std::map<std::string, std::set<std::string>> project_pis;

    std::size_t pi_count_on_project(const std::string& project_number) const {
        auto it = project_pis.find(project_number);
        return it == project_pis.end() ? 0 : it->second.size();
    }
};

NihProjectSet load_nih_projects(const ingest::TabularData& projects,
                                const ingest::TabularData& pubs);

// --- link records ------------------------------------------------------------

enum class CounterpartKind : std::uint8_t { Orcid, NihPi };
std::string_view counterpart_kind_name(CounterpartKind k);

struct LinkEvidence {
    std::uint64_t pmid = 0;
    std::string features;  // "doi+name", "title+journal+name", "pi-name"

    auto operator<=>(const LinkEvidence&) const = default;
};

struct LinkRecord {
    std::uint64_t and_id = 0;
    CounterpartKind kind = CounterpartKind::Orcid;
    std::string counterpart_id;
    std::vector<LinkEvidence> evidence;  // nonempty, sorted
};

// Last name + first initial, casefolded and diacritic-stripped.
struct NameKey {
    std::string last;
    char initial = 0;

    bool matches(const NameKey& o) const {
        return !last.empty() && initial != 0 && last == o.last && initial == o.initial;
    }
};

NameKey author_name_key(const AuthorInstance& a);
NameKey person_name_key(std::string_view last_name, std::string_view fore_name);
// ExPORTER style "SMITH, JOHN A" -> last "smith", initial 'j'.
NameKey pi_name_key(std::string_view pi_name);

// A corpus view shared by the linkage passes.
struct Corpus {
    const std::vector<ArticleRecord>* articles = nullptr;
    const std::vector<AuthorInstance>* authors = nullptr;

    // derived indexes, built once
    std::map<std::uint64_t, const ArticleRecord*> article_by_pmid;
    std::map<std::uint64_t, std::vector<const AuthorInstance*>> authors_by_pmid;
    std::map<std::string, std::vector<std::uint64_t>> pmids_by_doi;          // folded doi
    std::map<std::string, std::vector<std::uint64_t>> pmids_by_title_journal;  // no-doi articles

    static Corpus build(const std::vector<ArticleRecord>& articles,
                        const std::vector<AuthorInstance>& authors);
};

struct OrcidLinkResult {
    std::vector<LinkRecord> links;  // mutually unambiguous pairs only
    std::uint64_t candidate_pairs = 0;
    std::vector<std::string> ambiguities;  // logged, not linked
};

// Pass 1 matches work DOI + author name; pass 2 covers DOI-less articles
// by normalized title + journal + name. A link is emitted only when the
// (AND_ID, ORCID) pairing is unique on both sides.
OrcidLinkResult link_orcid(const Corpus& corpus, const UnifiedAssignment& ids,
                           const std::vector<OrcidRecord>& orcid_records);

struct NihRow {
    std::uint64_t and_id = 0;  // 0 = no author matched
    std::string pi_id;
    std::uint64_t pmid = 0;
    std::string project_number;
    std::string sub_project_number;
    std::string pi_name;
};

struct NihLinkResult {
    std::vector<NihRow> rows;
    std::vector<LinkRecord> links;  // strict-majority PI -> AND_ID
};

NihLinkResult link_nih(const NihProjectSet& projects, const Corpus& corpus,
                       const UnifiedAssignment& ids);

// --- evaluation crosswalk ----------------------------------------------------

struct FunnelReport {
    std::uint64_t project_records_total = 0;
    std::uint64_t projects_total = 0;
    std::uint64_t projects_with_articles = 0;
    std::uint64_t records_with_articles = 0;
    std::uint64_t multi_pi_records_removed = 0;
    std::uint64_t projects_final = 0;
    std::uint64_t pis_final = 0;
    std::uint64_t articles_final = 0;
    std::uint64_t crosswalk_articles = 0;
    std::uint64_t crosswalk_pis = 0;
    std::uint64_t crosswalk_and_ids = 0;
};

struct CrosswalkResult {
    evalmetrics::Crosswalk triples;
    FunnelReport funnel;
};

// The evaluation funnel: drop projects without corpus articles, drop
// multi-PI projects, then crosswalk PI ids to author ids through PMIDs
// and last-name + first-initial matches.
CrosswalkResult build_eval_crosswalk(const NihProjectSet& projects, const Corpus& corpus,
                                     const UnifiedAssignment& ids);

}  // namespace medkg::linkage
