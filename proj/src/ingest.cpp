#include "medkg/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "medkg/csv.hpp"
#include "medkg/errors.hpp"
#include "medkg/text.hpp"

namespace medkg::ingest {

namespace {

std::optional<std::uint64_t> parse_u64(std::string_view s) {
    s = text::trim(s);
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

// First run of exactly four digits, used as the MedlineDate year fallback.
std::optional<int> leading_year(std::string_view s) {
    std::size_t i = 0;
    while (i < s.size()) {
        if (s[i] >= '0' && s[i] <= '9') {
            std::size_t j = i;
            while (j < s.size() && s[j] >= '0' && s[j] <= '9') ++j;
            if (j - i == 4) {
                int y = 0;
                std::from_chars(s.data() + i, s.data() + j, y);
                return y;
            }
            i = j;
        } else {
            ++i;
        }
    }
    return std::nullopt;
}

}  // namespace

// Assembles citations from the raw event stream. Field capture is keyed on
// the open-element stack, so wrappers (PubmedArticleSet, PubmedArticle,
// inline markup inside titles/abstracts) pass through untouched.
struct CitationReader::State {
    xml::Reader reader;
    std::vector<std::string> path;  // open elements, document order
    bool in_citation = false;

    // capture accumulators for the current citation
    std::string pmid_text;
    bool pmid_seen = false;
    std::string title, journal, year_text, medline_date, doi, abstract_text;
    bool title_seen = false, journal_seen = false, doi_seen = false;
    bool has_abstract = false;
    int abstract_sections = 0;
    std::vector<AuthorInstance> authors;
    bool in_author_list = false;

    // what the current Text events should be appended to, if anything
    std::string* capture = nullptr;
    std::size_t capture_depth = 0;

    explicit State(std::istream& in) : reader(in) {}

    void reset_citation() {
        pmid_text.clear();
        pmid_seen = false;
        title.clear();
        journal.clear();
        year_text.clear();
        medline_date.clear();
        doi.clear();
        abstract_text.clear();
        title_seen = journal_seen = doi_seen = false;
        has_abstract = false;
        abstract_sections = 0;
        authors.clear();
        in_author_list = false;
        capture = nullptr;
    }

    const std::string& parent() const {
        static const std::string empty;
        return path.size() >= 2 ? path[path.size() - 2] : empty;
    }
};

CitationReader::CitationReader(std::istream& in) : state_(std::make_unique<State>(in)) {}
CitationReader::~CitationReader() = default;

std::size_t CitationReader::peak_buffer_bytes() const {
    return state_->reader.peak_buffer_bytes();
}

std::optional<Citation> CitationReader::next() {
    State& s = *state_;
    auto sanitize = [&](std::string_view raw) {
        auto repaired = text::sanitize_utf8(raw);
        report_.invalid_utf8_replacements += repaired.replaced;
        return text::nfc(std::string(text::trim(repaired.text)));
    };

    for (;;) {
        const xml::Event& ev = s.reader.next();
        switch (ev.type) {
            case xml::EventType::EndOfDocument:
                if (s.in_citation)
                    throw ParseError("input ended inside a citation", s.reader.byte_offset());
                return std::nullopt;

            case xml::EventType::StartElement: {
                s.path.push_back(ev.name);
                if (ev.name == "MedlineCitation" && !s.in_citation) {
                    s.in_citation = true;
                    s.reset_citation();
                    break;
                }
                if (!s.in_citation) break;
                std::string* capture_before = s.capture;

                const std::string& parent = s.parent();
                if (ev.name == "PMID" && parent == "MedlineCitation" && !s.pmid_seen) {
                    s.pmid_seen = true;
                    s.capture = &s.pmid_text;
                } else if (ev.name == "ArticleTitle" && !s.title_seen) {
                    s.title_seen = true;
                    s.capture = &s.title;
                } else if (ev.name == "Title" && parent == "Journal" && !s.journal_seen) {
                    s.journal_seen = true;
                    s.capture = &s.journal;
                } else if (ev.name == "Year" && parent == "PubDate") {
                    s.capture = &s.year_text;
                } else if (ev.name == "MedlineDate" && parent == "PubDate") {
                    s.capture = &s.medline_date;
                } else if (ev.name == "ELocationID" && !s.doi_seen) {
                    const std::string* t = ev.attr("EIdType");
                    if (t && *t == "doi") {
                        s.doi_seen = true;
                        s.capture = &s.doi;
                    }
                } else if (ev.name == "AbstractText") {
                    if (s.abstract_sections++ > 0) s.abstract_text.push_back(' ');
                    s.has_abstract = true;
                    s.capture = &s.abstract_text;
                } else if (ev.name == "AuthorList") {
                    s.in_author_list = true;
                } else if (ev.name == "Author" && s.in_author_list) {
                    AuthorInstance a;
                    a.au_order = static_cast<std::uint32_t>(s.authors.size() + 1);
                    s.authors.push_back(std::move(a));
                } else if (!s.authors.empty() && s.in_author_list) {
                    AuthorInstance& a = s.authors.back();
                    if (parent == "Author") {
                        if (ev.name == "LastName") s.capture = &a.last_name;
                        else if (ev.name == "ForeName") s.capture = &a.fore_name;
                        else if (ev.name == "Initials") s.capture = &a.initials;
                        else if (ev.name == "Suffix") s.capture = &a.suffix;
                        else if (ev.name == "CollectiveName") {
                            a.collective = true;
                            s.capture = nullptr;
                        }
                    } else if (ev.name == "Affiliation" && parent == "AffiliationInfo") {
                        a.affiliations.emplace_back();
                        s.capture = &a.affiliations.back();
                    }
                }
                if (s.capture != capture_before) s.capture_depth = s.path.size();
                break;
            }

            case xml::EventType::Text:
                if (s.capture) s.capture->append(ev.text);
                break;

            case xml::EventType::EndElement: {
                if (s.capture && s.path.size() == s.capture_depth) s.capture = nullptr;
                bool closing_citation = s.in_citation && ev.name == "MedlineCitation" &&
                                        !s.path.empty() && s.path.back() == "MedlineCitation";
                if (!s.path.empty()) s.path.pop_back();
                if (s.in_citation && ev.name == "AuthorList") s.in_author_list = false;
                if (!closing_citation) break;

                s.in_citation = false;
                auto pmid = parse_u64(s.pmid_text);
                if (!pmid || *pmid == 0) {
                    ++report_.skipped_missing_pmid;
                    break;  // keep scanning for the next citation
                }

                Citation c;
                c.article.pmid = *pmid;
                c.article.title = sanitize(s.title);
                c.article.journal = sanitize(s.journal);
                c.article.doi = sanitize(s.doi);
                c.article.has_abstract = s.has_abstract;
                if (s.has_abstract) c.article.abstract_text = sanitize(s.abstract_text);

                std::string year_str = sanitize(s.year_text);
                if (!year_str.empty()) {
                    if (auto y = parse_u64(year_str)) c.article.pub_year = static_cast<int>(*y);
                } else if (!s.medline_date.empty()) {
                    c.article.pub_year = leading_year(sanitize(s.medline_date));
                }
                if (c.article.pub_year &&
                    (*c.article.pub_year < 1700 || *c.article.pub_year > 2100)) {
                    c.article.year_suspect = true;
                    ++report_.years_flagged;
                }

                c.authors = std::move(s.authors);
                s.authors.clear();
                for (AuthorInstance& a : c.authors) {
                    a.pmid = c.article.pmid;
                    a.last_name = sanitize(a.last_name);
                    a.fore_name = sanitize(a.fore_name);
                    a.initials = sanitize(a.initials);
                    a.suffix = sanitize(a.suffix);
                    for (std::string& aff : a.affiliations) aff = sanitize(aff);
                }

                ++report_.citations;
                report_.author_instances += c.authors.size();
                return c;
            }
        }
    }
}

IngestReport parse_citation_xml(std::istream& in, const std::function<void(Citation&&)>& sink) {
    CitationReader reader(in);
    while (auto c = reader.next()) sink(std::move(*c));
    return reader.report();
}

// --- clustering TSV ---------------------------------------------------------

SourceClustering parse_clustering(std::string_view data, const std::string& source_name) {
    SourceClustering out;
    out.source_name = source_name;
    std::uint64_t line_no = 0;
    std::size_t pos = 0;
    while (pos < data.size()) {
        std::size_t eol = data.find('\n', pos);
        std::string_view line = data.substr(pos, eol == std::string_view::npos ? std::string_view::npos
                                                                               : eol - pos);
        pos = eol == std::string_view::npos ? data.size() : eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (text::trim(line).empty()) continue;

        std::size_t t1 = line.find('\t');
        std::size_t t2 = t1 == std::string_view::npos ? std::string_view::npos
                                                      : line.find('\t', t1 + 1);
        if (t1 == std::string_view::npos || t2 == std::string_view::npos)
            throw ParseError("clustering line needs pmid<TAB>au_order<TAB>cluster_id", line_no,
                             ParseError::Unit::LineNumber);

        auto pmid = parse_u64(line.substr(0, t1));
        auto order = parse_u64(line.substr(t1 + 1, t2 - t1 - 1));
        auto cluster = parse_u64(line.substr(t2 + 1));
        if (!pmid || !order || !cluster)
            throw ParseError("non-integer field in clustering line", line_no,
                             ParseError::Unit::LineNumber);
        if (*cluster == 0)
            throw ParseError("cluster ids must be positive", line_no, ParseError::Unit::LineNumber);

        InstanceKey key{*pmid, static_cast<std::uint32_t>(*order)};
        auto [it, inserted] = out.assignments.emplace(key, *cluster);
        if (!inserted)
            throw IntegrityError("duplicate (pmid, au_order) key " + std::to_string(key.pmid) +
                                     "/" + std::to_string(key.au_order),
                                 line_no);
    }
    return out;
}

SourceClustering load_clustering(const std::string& path, const std::string& source_name) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open clustering file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_clustering(buf.str(), source_name);
}

// --- tabular sources --------------------------------------------------------

namespace {

const std::vector<TableSchemaDef>& schema_registry() {
    static const std::vector<TableSchemaDef> defs = {
        // external inputs
        {"exporter_projects", {"PI_ID", "PI_Name", "ProjectNumber", "subProjectNumber", "FiscalYear"}},
        {"exporter_pubs", {"ProjectNumber", "PMID"}},
        {"orcid_person",
         {"ORCID", "LastName", "ForeName", "DOI", "Title", "Journal", "PubYear"}},
        {"orcid_employment",
         {"ORCID", "Organization", "Department", "City", "Region", "Country", "BeginYear",
          "EndYear", "Identifier", "IdSource"}},
        {"orcid_education",
         {"ORCID", "Organization", "City", "Region", "Country", "BeginYear", "EndYear", "Role",
          "Identifier", "IdSource"}},
        {"gazetteer", {"city", "state", "country", "latitude", "longitude", "fips"}},
        // pipeline intermediates
        {"articles", {"pmid", "pub_year", "journal", "title", "doi", "abstract"}},
        {"authors", {"pmid", "au_order", "last_name", "fore_name", "initials", "suffix"}},
        {"affil_strings", {"pmid", "au_order", "affiliation_order", "affiliation"}},
        {"spans", {"pmid", "start", "end", "mention", "type", "score"}},
        {"mentions", {"pmid", "start", "end", "mention", "type", "score", "entity_id"}},
        {"mutations", {"pmid", "start", "end", "mention", "mutation_type", "normalized_name"}},
        {"conflicts", {"secondary_cluster", "primary_ids", "resolution", "rule"}},
        {"affil_parsed",
         {"pmid", "au_order", "and_id", "affiliation_order", "affiliation", "department",
          "institution", "email", "zip_code", "location", "country", "city", "state",
          "affiliation_type", "latitude", "longitude", "fips", "inherited", "pub_year"}},
        {"nih_rows", {"and_id", "pi_id", "pmid", "project_number", "sub_project_number", "pi_name"}},
        {"links", {"and_id", "kind", "counterpart", "evidence_pmids", "features"}},
        {"link_ambiguities", {"kind", "detail"}},
        {"crosswalk", {"pmid", "pi_id", "and_id"}},
        {"edges", {"source", "target", "weight"}},
        {"eval_report", {"metric", "value"}},
    };
    return defs;
}

}  // namespace

const TableSchemaDef* find_schema(const std::string& name) {
    for (const auto& d : schema_registry())
        if (d.name == name) return &d;
    return nullptr;
}

const std::vector<TableSchemaDef>& all_schemas() {
    return schema_registry();
}

std::size_t TabularData::column(const std::string& name) const {
    for (std::size_t i = 0; i < schema->columns.size(); ++i)
        if (schema->columns[i] == name) return i;
    throw Error("no column '" + name + "' in schema " + schema->name);
}

TabularData parse_tabular_source(std::string_view data, const std::string& schema_name) {
    const TableSchemaDef* schema = find_schema(schema_name);
    if (!schema) throw SchemaError("unknown schema: " + schema_name);

    std::vector<csv::Row> rows = csv::parse(data);
    if (rows.empty()) throw SchemaError("empty file for schema " + schema_name);

    const csv::Row& header = rows.front();
    if (header != schema->columns) {
        std::string msg = "header does not match schema " + schema_name;
        std::string missing, extra;
        for (const auto& c : schema->columns)
            if (std::find(header.begin(), header.end(), c) == header.end())
                missing += (missing.empty() ? "" : ", ") + c;
        for (const auto& c : header)
            if (std::find(schema->columns.begin(), schema->columns.end(), c) ==
                schema->columns.end())
                extra += (extra.empty() ? "" : ", ") + c;
        if (!missing.empty()) msg += "; missing: " + missing;
        if (!extra.empty()) msg += "; unexpected: " + extra;
        if (missing.empty() && extra.empty()) msg += "; column order differs";
        throw SchemaError(msg);
    }

    TabularData out;
    out.schema = schema;
    out.rows.assign(rows.begin() + 1, rows.end());
    for (std::size_t i = 0; i < out.rows.size(); ++i) {
        if (out.rows[i].size() != schema->columns.size())
            throw ParseError("row has " + std::to_string(out.rows[i].size()) + " fields, schema " +
                                 schema_name + " has " + std::to_string(schema->columns.size()),
                             i + 2, ParseError::Unit::LineNumber);
    }
    return out;
}

TabularData load_tabular_source(const std::string& path, const std::string& schema_name) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_tabular_source(buf.str(), schema_name);
}

std::string format_tabular(const TabularData& data) {
    std::string out = csv::format_row(data.schema->columns);
    for (const auto& r : data.rows) out += csv::format_row(r);
    return out;
}

void write_tabular(const std::string& path, const TabularData& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open file for writing: " + path);
    out << format_tabular(data);
    if (!out) throw Error("write failed: " + path);
}

}  // namespace medkg::ingest
