#pragma once

#include <cstdint>
#include <functional>
#include <istream>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "medkg/xml.hpp"

namespace medkg::ingest {

// One (pmid, au_order) author occurrence; the unit of disambiguation.
struct AuthorInstance {
    std::uint64_t pmid = 0;
    std::uint32_t au_order = 0;  // 1-based position in the author list
    std::string last_name;
    std::string fore_name;
    std::string initials;
    std::string suffix;
    std::vector<std::string> affiliations;  // raw strings, in document order
    bool collective = false;                // group author: name fields empty
};

struct ArticleRecord {
    std::uint64_t pmid = 0;
    std::optional<int> pub_year;
    bool year_suspect = false;  // present but outside [1700, 2100]
    std::string journal;
    std::string title;
    std::string doi;      // empty = absent
    std::string abstract_text;  // empty = absent
    bool has_abstract = false;
};

struct Citation {
    ArticleRecord article;
    std::vector<AuthorInstance> authors;
};

struct IngestReport {
    std::uint64_t citations = 0;
    std::uint64_t author_instances = 0;
    std::uint64_t skipped_missing_pmid = 0;
    std::uint64_t invalid_utf8_replacements = 0;
    std::uint64_t years_flagged = 0;
};

// Streaming citation reader. Memory is bounded by one citation: each call
// to next() holds only the citation currently being assembled.
class CitationReader {
public:
    explicit CitationReader(std::istream& in);
    ~CitationReader();

    // nullopt at end of document. Throws ParseError on malformed XML.
    std::optional<Citation> next();

    const IngestReport& report() const { return report_; }
    std::size_t peak_buffer_bytes() const;

private:
    struct State;
    std::unique_ptr<State> state_;
    IngestReport report_;
};

// Convenience: parse a whole stream, invoking `sink` per citation.
IngestReport parse_citation_xml(std::istream& in, const std::function<void(Citation&&)>& sink);

struct InstanceKey {
    std::uint64_t pmid = 0;
    std::uint32_t au_order = 0;

    bool operator==(const InstanceKey&) const = default;
    auto operator<=>(const InstanceKey&) const = default;
};

struct InstanceKeyHash {
    std::size_t operator()(const InstanceKey& k) const {
        return std::hash<std::uint64_t>{}(k.pmid * 1000003ULL + k.au_order);
    }
};

// One source disambiguation dataset: (pmid, au_order) -> cluster id.
struct SourceClustering {
    std::string source_name;
    std::optional<int> coverage_end_year;
    std::unordered_map<InstanceKey, std::uint64_t, InstanceKeyHash> assignments;
};

// TSV: pmid<TAB>au_order<TAB>cluster_id, no header. Duplicate keys are an
// IntegrityError naming the line; non-integer fields a ParseError.
SourceClustering load_clustering(const std::string& path, const std::string& source_name);
SourceClustering parse_clustering(std::string_view data, const std::string& source_name);

// --- tabular sources -------------------------------------------------------

struct TableSchemaDef {
    std::string name;
    std::vector<std::string> columns;
};

// Registered input schemas: exporter_projects, exporter_pubs, orcid_person,
// orcid_employment, orcid_education, gazetteer, plus the pipeline's
// intermediate files.
const TableSchemaDef* find_schema(const std::string& name);
const std::vector<TableSchemaDef>& all_schemas();

struct TabularData {
    const TableSchemaDef* schema = nullptr;
    std::vector<std::vector<std::string>> rows;  // empty string = absent

    std::size_t column(const std::string& name) const;
};

// CSV with header row. Header must match the schema exactly; otherwise a
// SchemaError lists the missing and unexpected columns.
TabularData load_tabular_source(const std::string& path, const std::string& schema_name);
TabularData parse_tabular_source(std::string_view data, const std::string& schema_name);

// Re-emission; byte-identical round trip with load for canonical files.
void write_tabular(const std::string& path, const TabularData& data);
std::string format_tabular(const TabularData& data);

}  // namespace medkg::ingest
