#include "medkg/linkage.hpp"

#include <algorithm>
#include <charconv>

#include "medkg/errors.hpp"
#include "medkg/text.hpp"

namespace medkg::linkage {

namespace {

std::optional<int> parse_year(std::string_view s) {
    s = text::trim(s);
    if (s.empty()) return std::nullopt;
    int y = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), y);
    if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
    return y;
}

std::optional<std::uint64_t> parse_u64(std::string_view s) {
    s = text::trim(s);
    if (s.empty()) return std::nullopt;
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
    return v;
}

// casefold + strip punctuation + collapse whitespace, for title/journal
// equality
std::string match_key(std::string_view s) {
    std::string folded = text::casefold(text::nfc(s));
    std::string kept;
    kept.reserve(folded.size());
    std::size_t i = 0;
    while (i < folded.size()) {
        char32_t cp = text::decode_cp(folded, i);
        if (text::is_word_cp(cp)) text::append_cp(kept, cp);
        else kept.push_back(' ');
    }
    return text::collapse_ws(kept);
}

char initial_of(std::string_view name) {
    std::string key = text::name_key(name);
    return key.empty() ? 0 : key[0];
}

}  // namespace

bool orcid_checksum_ok(std::string_view orcid_id) {
    // xxxx-xxxx-xxxx-xxxX with X allowed as the final check character
    std::string digits;
    for (std::size_t i = 0; i < orcid_id.size(); ++i) {
        char c = orcid_id[i];
        if (c == '-') continue;
        digits.push_back(c);
    }
    if (orcid_id.size() != 19 || digits.size() != 16) return false;
    if (orcid_id[4] != '-' || orcid_id[9] != '-' || orcid_id[14] != '-') return false;
    int total = 0;
    for (std::size_t i = 0; i + 1 < digits.size(); ++i) {
        if (digits[i] < '0' || digits[i] > '9') return false;
        total = (total + (digits[i] - '0')) * 2;
    }
    int remainder = total % 11;
    int result = (12 - remainder) % 11;
    char expected = result == 10 ? 'X' : static_cast<char>('0' + result);
    return digits.back() == expected;
}

std::vector<OrcidRecord> load_orcid_records(const ingest::TabularData& person,
                                            const ingest::TabularData* employment,
                                            const ingest::TabularData* education,
                                            OrcidLoadReport* report) {
    std::map<std::string, OrcidRecord> by_id;
    std::set<std::string> bad;

    auto accept = [&](const std::string& id) -> OrcidRecord* {
        if (bad.contains(id)) return nullptr;
        if (!orcid_checksum_ok(id)) {
            bad.insert(id);
            if (report) ++report->invalid_checksum_skipped;
            return nullptr;
        }
        OrcidRecord& r = by_id[id];
        r.orcid_id = id;
        return &r;
    };

    // ORCID,LastName,ForeName,DOI,Title,Journal,PubYear
    for (const auto& row : person.rows) {
        OrcidRecord* r = accept(row[0]);
        if (!r) continue;
        if (r->last_name.empty()) r->last_name = row[1];
        if (r->fore_name.empty()) r->fore_name = row[2];
        if (!row[3].empty() || !row[4].empty()) {
            OrcidWork w;
            w.doi = row[3];
            w.title = row[4];
            w.journal = row[5];
            w.pub_year = parse_year(row[6]);
            r->works.push_back(std::move(w));
        }
    }

    auto load_entries = [&](const ingest::TabularData* t, bool is_employment) {
        if (!t) return;
        for (const auto& row : t->rows) {
            OrcidRecord* r = accept(row[0]);
            if (!r) continue;
            OrcidAffiliationEntry e;
            if (is_employment) {
                // ORCID,Organization,Department,City,Region,Country,BeginYear,EndYear,Identifier,IdSource
                e.organization = row[1];
                e.department = row[2];
                e.city = row[3];
                e.region = row[4];
                e.country = row[5];
                e.begin_year = row[6];
                e.end_year = row[7];
                e.identifier = row[8];
                e.id_source = row[9];
                r->employments.push_back(std::move(e));
            } else {
                // ORCID,Organization,City,Region,Country,BeginYear,EndYear,Role,Identifier,IdSource
                e.organization = row[1];
                e.city = row[2];
                e.region = row[3];
                e.country = row[4];
                e.begin_year = row[5];
                e.end_year = row[6];
                e.role = row[7];
                e.identifier = row[8];
                e.id_source = row[9];
                r->educations.push_back(std::move(e));
            }
        }
    };
    load_entries(employment, true);
    load_entries(education, false);

    std::vector<OrcidRecord> out;
    out.reserve(by_id.size());
    for (auto& [id, r] : by_id) out.push_back(std::move(r));
    if (report) report->records = out.size();
    return out;
}

NihProjectSet load_nih_projects(const ingest::TabularData& projects,
                                const ingest::TabularData& pubs) {
    NihProjectSet out;

    // PI_ID,PI_Name,ProjectNumber,subProjectNumber,FiscalYear
    std::map<std::tuple<std::string, std::string, std::string>, NihProjectRecord> records;
    for (const auto& row : projects.rows) {
        if (row[0].empty() || row[2].empty())
            throw Error("exporter project row needs PI_ID and ProjectNumber");
        auto key = std::tuple(row[2], row[3], row[0]);
        NihProjectRecord& r = records[key];
        r.pi_id = row[0];
        r.pi_name = row[1];
        r.project_number = row[2];
        r.sub_project_number = row[3];
        if (auto y = parse_year(row[4])) r.fiscal_years.insert(*y);
        out.project_pis[row[2]].insert(row[0]);
    }
    out.records.reserve(records.size());
    for (auto& [key, r] : records) out.records.push_back(std::move(r));

    // ProjectNumber,PMID
    for (const auto& row : pubs.rows) {
        auto pmid = parse_u64(row[1]);
        if (!pmid || row[0].empty()) throw Error("exporter pub row needs ProjectNumber and PMID");
        out.project_pmids[row[0]].push_back(*pmid);
    }
    for (auto& [project, pmids] : out.project_pmids) {
        std::sort(pmids.begin(), pmids.end());
        pmids.erase(std::unique(pmids.begin(), pmids.end()), pmids.end());
    }
    return out;
}

std::string_view counterpart_kind_name(CounterpartKind k) {
    return k == CounterpartKind::Orcid ? "ORCID" : "PI";
}

NameKey author_name_key(const AuthorInstance& a) {
    NameKey k;
    k.last = text::name_key(a.last_name);
    k.initial = !a.fore_name.empty() ? initial_of(a.fore_name) : initial_of(a.initials);
    return k;
}

NameKey person_name_key(std::string_view last_name, std::string_view fore_name) {
    NameKey k;
    k.last = text::name_key(last_name);
    k.initial = initial_of(fore_name);
    return k;
}

NameKey pi_name_key(std::string_view pi_name) {
    NameKey k;
    std::size_t comma = pi_name.find(',');
    if (comma == std::string_view::npos) {
        k.last = text::name_key(pi_name);
        return k;
    }
    k.last = text::name_key(pi_name.substr(0, comma));
    std::string_view rest = text::trim(pi_name.substr(comma + 1));
    k.initial = initial_of(rest);
    return k;
}

Corpus Corpus::build(const std::vector<ArticleRecord>& articles,
                     const std::vector<AuthorInstance>& authors) {
    Corpus c;
    c.articles = &articles;
    c.authors = &authors;
    for (const ArticleRecord& a : articles) {
        c.article_by_pmid[a.pmid] = &a;
        if (!a.doi.empty()) {
            c.pmids_by_doi[text::fold_key(a.doi)].push_back(a.pmid);
        } else if (!a.title.empty()) {
            c.pmids_by_title_journal[match_key(a.title) + "\x1f" + match_key(a.journal)]
                .push_back(a.pmid);
        }
    }
    for (const AuthorInstance& a : authors) c.authors_by_pmid[a.pmid].push_back(&a);
    for (auto& [pmid, list] : c.authors_by_pmid)
        std::sort(list.begin(), list.end(),
                  [](const AuthorInstance* x, const AuthorInstance* y) {
                      return x->au_order < y->au_order;
                  });
    return c;
}

namespace {

// First author instance on the article matching the key; smallest au_order.
const AuthorInstance* match_author(const Corpus& corpus, std::uint64_t pmid, const NameKey& key) {
    auto it = corpus.authors_by_pmid.find(pmid);
    if (it == corpus.authors_by_pmid.end()) return nullptr;
    for (const AuthorInstance* a : it->second)
        if (author_name_key(*a).matches(key)) return a;
    return nullptr;
}

}  // namespace

OrcidLinkResult link_orcid(const Corpus& corpus, const UnifiedAssignment& ids,
                           const std::vector<OrcidRecord>& orcid_records) {
    OrcidLinkResult out;

    // (and_id, orcid) -> evidence
    std::map<std::pair<std::uint64_t, std::string>, std::set<LinkEvidence>> candidates;

    for (const OrcidRecord& rec : orcid_records) {
        NameKey key = person_name_key(rec.last_name, rec.fore_name);
        for (const OrcidWork& work : rec.works) {
            // pass 1: DOI equality
            if (!work.doi.empty()) {
                auto it = corpus.pmids_by_doi.find(text::fold_key(work.doi));
                if (it != corpus.pmids_by_doi.end()) {
                    for (std::uint64_t pmid : it->second) {
                        const AuthorInstance* a = match_author(corpus, pmid, key);
                        if (!a) continue;
                        std::uint64_t and_id = ids.and_id_for(a->pmid, a->au_order);
                        if (and_id == 0) continue;
                        candidates[{and_id, rec.orcid_id}].insert({pmid, "doi+name"});
                    }
                }
            }
            // pass 2: DOI-less articles by title + journal
            if (!work.title.empty()) {
                auto it = corpus.pmids_by_title_journal.find(match_key(work.title) + "\x1f" +
                                                             match_key(work.journal));
                if (it != corpus.pmids_by_title_journal.end()) {
                    for (std::uint64_t pmid : it->second) {
                        const AuthorInstance* a = match_author(corpus, pmid, key);
                        if (!a) continue;
                        std::uint64_t and_id = ids.and_id_for(a->pmid, a->au_order);
                        if (and_id == 0) continue;
                        candidates[{and_id, rec.orcid_id}].insert({pmid, "title+journal+name"});
                    }
                }
            }
        }
    }

    out.candidate_pairs = candidates.size();

    std::map<std::uint64_t, std::uint64_t> orcids_per_and;
    std::map<std::string, std::uint64_t> ands_per_orcid;
    for (const auto& [pair, evidence] : candidates) {
        ++orcids_per_and[pair.first];
        ++ands_per_orcid[pair.second];
    }

    for (const auto& [pair, evidence] : candidates) {
        if (orcids_per_and[pair.first] == 1 && ands_per_orcid[pair.second] == 1) {
            LinkRecord link;
            link.and_id = pair.first;
            link.kind = CounterpartKind::Orcid;
            link.counterpart_id = pair.second;
            link.evidence.assign(evidence.begin(), evidence.end());
            out.links.push_back(std::move(link));
        } else {
            out.ambiguities.push_back("and_id " + std::to_string(pair.first) + " <-> " +
                                      pair.second + " suppressed: pairing not mutually unique");
        }
    }
    return out;
}

NihLinkResult link_nih(const NihProjectSet& projects, const Corpus& corpus,
                       const UnifiedAssignment& ids) {
    NihLinkResult out;

    for (const NihProjectRecord& rec : projects.records) {
        auto it = projects.project_pmids.find(rec.project_number);
        if (it == projects.project_pmids.end()) continue;
        NameKey key = pi_name_key(rec.pi_name);
        for (std::uint64_t pmid : it->second) {
            if (!corpus.article_by_pmid.contains(pmid)) continue;
            NihRow row;
            row.pi_id = rec.pi_id;
            row.pmid = pmid;
            row.project_number = rec.project_number;
            row.sub_project_number = rec.sub_project_number;
            row.pi_name = rec.pi_name;
            if (const AuthorInstance* a = match_author(corpus, pmid, key))
                row.and_id = ids.and_id_for(a->pmid, a->au_order);
            out.rows.push_back(std::move(row));
        }
    }

    // strict-majority PI -> AND_ID links over rows with a disambiguated match
    std::map<std::string, std::map<std::uint64_t, std::vector<std::uint64_t>>> by_pi;
    std::map<std::string, std::uint64_t> matched_rows;
    for (const NihRow& r : out.rows) {
        if (r.and_id == 0) continue;
        by_pi[r.pi_id][r.and_id].push_back(r.pmid);
        ++matched_rows[r.pi_id];
    }
    for (const auto& [pi, and_counts] : by_pi) {
        for (const auto& [and_id, pmids] : and_counts) {
            if (pmids.size() * 2 > matched_rows[pi]) {
                LinkRecord link;
                link.and_id = and_id;
                link.kind = CounterpartKind::NihPi;
                link.counterpart_id = pi;
                std::set<LinkEvidence> ev;
                for (std::uint64_t pmid : pmids) ev.insert({pmid, "pi-name"});
                link.evidence.assign(ev.begin(), ev.end());
                out.links.push_back(std::move(link));
                break;
            }
        }
    }
    return out;
}

CrosswalkResult build_eval_crosswalk(const NihProjectSet& projects, const Corpus& corpus,
                                     const UnifiedAssignment& ids) {
    CrosswalkResult out;
    FunnelReport& f = out.funnel;

    f.project_records_total = projects.records.size();
    f.projects_total = projects.project_pis.size();

    // filter 1: keep projects with at least one corpus article
    std::map<std::string, std::vector<std::uint64_t>> corpus_pmids_by_project;
    for (const auto& [project, pmids] : projects.project_pmids) {
        std::vector<std::uint64_t> present;
        for (std::uint64_t pmid : pmids)
            if (corpus.article_by_pmid.contains(pmid)) present.push_back(pmid);
        if (!present.empty()) corpus_pmids_by_project[project] = std::move(present);
    }
    f.projects_with_articles = corpus_pmids_by_project.size();
    for (const NihProjectRecord& rec : projects.records)
        if (corpus_pmids_by_project.contains(rec.project_number)) ++f.records_with_articles;

    // filter 2: drop multi-PI projects
    std::set<std::string> final_projects;
    for (const auto& [project, pmids] : corpus_pmids_by_project) {
        if (projects.pi_count_on_project(project) > 1) continue;
        final_projects.insert(project);
    }
    f.multi_pi_records_removed = 0;
    for (const NihProjectRecord& rec : projects.records) {
        if (corpus_pmids_by_project.contains(rec.project_number) &&
            !final_projects.contains(rec.project_number))
            ++f.multi_pi_records_removed;
    }
    f.projects_final = final_projects.size();

    std::set<std::string> pis_final;
    std::set<std::uint64_t> articles_final;
    for (const std::string& project : final_projects) {
        for (const std::string& pi : projects.project_pis.at(project)) pis_final.insert(pi);
        for (std::uint64_t pmid : corpus_pmids_by_project.at(project)) articles_final.insert(pmid);
    }
    f.pis_final = pis_final.size();
    f.articles_final = articles_final.size();

    // filter 3: crosswalk through PMIDs and the name key
    for (const NihProjectRecord& rec : projects.records) {
        if (!final_projects.contains(rec.project_number)) continue;
        NameKey key = pi_name_key(rec.pi_name);
        for (std::uint64_t pmid : corpus_pmids_by_project.at(rec.project_number)) {
            const AuthorInstance* a = match_author(corpus, pmid, key);
            if (!a) continue;
            std::uint64_t and_id = ids.and_id_for(a->pmid, a->au_order);
            if (and_id == 0) continue;
            out.triples.insert({pmid, rec.pi_id, and_id});
        }
    }

    std::set<std::uint64_t> xw_articles, xw_ands;
    std::set<std::string> xw_pis;
    for (const auto& t : out.triples) {
        xw_articles.insert(t.pmid);
        xw_pis.insert(t.pi_id);
        xw_ands.insert(t.and_id);
    }
    f.crosswalk_articles = xw_articles.size();
    f.crosswalk_pis = xw_pis.size();
    f.crosswalk_and_ids = xw_ands.size();
    return out;
}

}  // namespace medkg::linkage
